//! TF-IDF embedding of subject distinguished names.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A subject name embedded as a sparse, L2-normalized TF-IDF vector over
/// character n-grams of lengths one through three.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectVector {
    /// Fingerprint of the certificate the subject came from.
    pub fingerprint: String,
    /// Non-zero term weights keyed by n-gram.
    pub weights: BTreeMap<String, f64>,
}

/// All character n-grams of lengths one through three, with multiplicity.
fn char_ngrams(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut grams = Vec::new();
    for len in 1..=3 {
        for window in chars.windows(len) {
            grams.push(window.iter().collect());
        }
    }
    grams
}

/// Embeds each `(fingerprint, subject)` document. Term frequency is the raw
/// n-gram count, the inverse document frequency is `ln(corpus / df) + 1`, and
/// each vector is scaled to unit Euclidean length. A subject with no
/// characters embeds as the zero vector.
pub fn vectorize(docs: &[(String, String)]) -> Vec<SubjectVector> {
    let term_counts: Vec<BTreeMap<String, f64>> = docs
        .iter()
        .map(|(_, subject)| {
            let mut counts = BTreeMap::new();
            for gram in char_ngrams(subject) {
                *counts.entry(gram).or_insert(0.0) += 1.0;
            }
            counts
        })
        .collect();

    let mut document_frequency: BTreeMap<&str, f64> = BTreeMap::new();
    for counts in &term_counts {
        for term in counts.keys() {
            *document_frequency.entry(term).or_insert(0.0) += 1.0;
        }
    }
    let corpus = docs.len() as f64;

    docs.iter()
        .zip(term_counts.iter())
        .map(|((fingerprint, _), counts)| {
            let mut weights: BTreeMap<String, f64> = counts
                .iter()
                .map(|(term, tf)| {
                    let idf = (corpus / document_frequency[term.as_str()]).ln() + 1.0;
                    (term.clone(), tf * idf)
                })
                .collect();
            let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for weight in weights.values_mut() {
                    *weight /= norm;
                }
            }
            SubjectVector {
                fingerprint: fingerprint.clone(),
                weights,
            }
        })
        .collect()
}

/// Cosine similarity of two subject vectors. Both are unit length, so this
/// is their sparse dot product; a zero vector is similar to nothing.
pub fn cosine(a: &SubjectVector, b: &SubjectVector) -> f64 {
    let (small, large) = if a.weights.len() <= b.weights.len() {
        (&a.weights, &b.weights)
    } else {
        (&b.weights, &a.weights)
    };
    small
        .iter()
        .filter_map(|(term, wa)| large.get(term).map(|wb| wa * wb))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn docs(subjects: &[&str]) -> Vec<(String, String)> {
        subjects
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("fp-{i:02}"), s.to_string()))
            .collect()
    }

    fn dn_corpus() -> Vec<SubjectVector> {
        vectorize(&docs(&[
            "CN=device-0001.plant.example, O=Acme Industrial, C=DE",
            "CN=device-0002.plant.example, O=Acme Industrial, C=DE",
            "CN=gateway-7, O=Other Corp",
            "CN=device-0001.plant.example, O=Acme Industrial, C=DE",
            "O=Zebra, CN=unrelated",
        ]))
    }

    #[test]
    fn identical_subjects_embed_identically_with_unit_cosine() {
        let vectors = dn_corpus();
        assert_eq!(vectors[0].weights, vectors[3].weights);
        assert!((cosine(&vectors[0], &vectors[3]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_character_sets_have_zero_cosine() {
        let vectors = vectorize(&docs(&["ab", "cd"]));
        assert_eq!(cosine(&vectors[0], &vectors[1]), 0.0);
        for vector in &vectors {
            assert_eq!(vector.weights.len(), 3);
            for weight in vector.weights.values() {
                assert!((weight - 0.577350269190).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn shared_and_unique_terms_weight_as_expected() {
        let vectors = vectorize(&docs(&["ab", "ac"]));
        assert!((cosine(&vectors[0], &vectors[1]) - 0.148511291256).abs() < 1e-9);
        assert!((vectors[0].weights["a"] - 0.385371627466).abs() < 1e-9);
        assert!((vectors[0].weights["ab"] - 0.652490884513).abs() < 1e-9);
        assert!((vectors[0].weights["b"] - 0.652490884513).abs() < 1e-9);
        assert_eq!(vectors[0].weights.get("ac"), None);
    }

    #[test]
    fn dn_corpus_cosines_match_pinned_values() {
        let v = dn_corpus();
        let expected = [
            (0, 1, 0.926724439725),
            (0, 2, 0.153833033150),
            (0, 3, 1.000000000000),
            (0, 4, 0.188854986627),
            (1, 2, 0.150485426626),
            (1, 3, 0.926724439725),
            (1, 4, 0.184745256926),
            (2, 3, 0.153833033150),
            (2, 4, 0.149742614890),
            (3, 4, 0.188854986627),
        ];
        for (i, j, want) in expected {
            let got = cosine(&v[i], &v[j]);
            assert!((got - want).abs() < 1e-9, "cos({i},{j}) = {got}, want {want}");
        }
    }

    #[test]
    fn ubiquitous_terms_carry_less_weight_than_rare_ones() {
        let v = dn_corpus();
        assert!((v[0].weights["CN="] - 0.048888228033).abs() < 1e-9);
        assert!((v[0].weights["dev"] - 0.073861587613).abs() < 1e-9);
        assert!((v[4].weights["CN="] - 0.062345790154).abs() < 1e-9);
        assert!((v[4].weights["Z"] - 0.162687468510).abs() < 1e-9);
        assert!(v[4].weights["CN="] < v[4].weights["Z"]);
    }

    #[test]
    fn vectors_are_unit_length() {
        for vector in dn_corpus() {
            let norm: f64 = vector.weights.values().map(|w| w * w).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_inputs_embed_to_nothing() {
        assert!(vectorize(&[]).is_empty());
        let vectors = vectorize(&docs(&["", "ab"]));
        assert!(vectors[0].weights.is_empty());
        assert_eq!(cosine(&vectors[0], &vectors[1]), 0.0);
        assert_eq!(cosine(&vectors[0], &vectors[0]), 0.0);
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric_and_bounded(
            subjects in proptest::collection::vec("[ -~]{0,24}", 2..8),
        ) {
            let owned: Vec<&str> = subjects.iter().map(String::as_str).collect();
            let vectors = vectorize(&docs(&owned));
            for a in &vectors {
                for b in &vectors {
                    let ab = cosine(a, b);
                    prop_assert!((ab - cosine(b, a)).abs() < 1e-12);
                    prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
                }
            }
        }

        #[test]
        fn reordering_the_corpus_permutes_the_vectors(
            subjects in proptest::collection::vec("[a-z=.,]{1,16}", 3..7),
        ) {
            let owned: Vec<&str> = subjects.iter().map(String::as_str).collect();
            let forward = vectorize(&docs(&owned));
            let mut reversed_docs = docs(&owned);
            reversed_docs.reverse();
            let mut backward = vectorize(&reversed_docs);
            backward.reverse();
            for (f, b) in forward.iter().zip(&backward) {
                prop_assert_eq!(&f.weights, &b.weights);
            }
        }
    }
}
