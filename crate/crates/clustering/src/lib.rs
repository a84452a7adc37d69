//! Certificate-template detection over leaf subject names.
//!
//! Fleets provisioned from a shared template tend to mint certificates whose
//! subject distinguished names differ only in a serial number or hostname
//! fragment. This crate surfaces such fleets: subjects are embedded as TF-IDF
//! vectors over character n-grams, a thresholded cosine-similarity graph is
//! built, and density-based clustering groups near-duplicate subjects. For
//! every cluster the per-parameter entropy report then shows which certificate
//! fields (key size, lifetime, issuer, ...) are locked down by the template
//! and which still vary, compared against the corpus-wide baseline.
//!
//! The pipeline is deliberately deterministic: ties are broken by input
//! index, clustering is single-threaded, and the same corpus always yields
//! the same report, so results can be reviewed and diffed across runs.

mod corpus;
mod dbscan;
mod entropy;
mod graph;
mod vectorize;

pub use corpus::synthetic_corpus;
pub use dbscan::{dbscan, PointLabel, DBSCAN_EPSILON, DBSCAN_MIN_POINTS};
pub use entropy::{entropy_analysis, EntropyRow, PARAMETERS};
pub use graph::{similarity_graph, SimilarityGraph, MAX_ROW_NEIGHBORS, SIMILARITY_FLOOR};
pub use vectorize::{cosine, vectorize, SubjectVector};

use std::collections::{BTreeMap, BTreeSet};

use audit_certs::CertificateRecord;
use serde::{Deserialize, Serialize};

/// Every cluster found by [`dbscan`] has at least this many members.
pub const MIN_CLUSTER_SIZE: usize = 3;

/// How the report was produced, recorded so downstream consumers know which
/// weighting variant and graph truncation the numbers reflect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMetadata {
    /// Term weighting applied to subject n-grams.
    pub weighting: String,
    /// Neighbor-retention rule used while building the similarity graph.
    pub truncation: String,
    /// Set whenever clusters were found; grouped subjects warrant a human
    /// pass before findings derived from them are acted on.
    pub manual_review: bool,
}

/// Outcome of clustering one certificate corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// Disjoint groups of certificate fingerprints, each of size at least
    /// [`MIN_CLUSTER_SIZE`], in discovery order.
    pub clusters: Vec<BTreeSet<String>>,
    /// Fingerprints that joined no cluster.
    pub noise: BTreeSet<String>,
    /// Per-parameter entropy rows keyed by parameter name.
    pub per_parameter: BTreeMap<String, EntropyRow>,
    pub metadata: ReportMetadata,
}

impl ClusterReport {
    /// Total number of certificates the report covers.
    pub fn corpus_size(&self) -> usize {
        self.clusters.iter().map(BTreeSet::len).sum::<usize>() + self.noise.len()
    }
}

/// Runs the full template-detection pipeline over one corpus of distinct
/// certificates (one record per fingerprint): vectorize subjects, build the
/// similarity graph, cluster, and compute the entropy table.
pub fn analyze(records: &[CertificateRecord]) -> ClusterReport {
    let docs: Vec<(String, String)> = records
        .iter()
        .map(|r| (r.fingerprint.clone(), r.subject.clone()))
        .collect();
    let vectors = vectorize(&docs);
    let graph = similarity_graph(&vectors);
    let labels = dbscan(&graph);

    let mut clusters: Vec<BTreeSet<String>> = Vec::new();
    let mut noise = BTreeSet::new();
    for (record, label) in records.iter().zip(&labels) {
        match label {
            PointLabel::Cluster(id) => {
                if clusters.len() <= *id {
                    clusters.resize_with(id + 1, BTreeSet::new);
                }
                clusters[*id].insert(record.fingerprint.clone());
            }
            PointLabel::Noise => {
                noise.insert(record.fingerprint.clone());
            }
        }
    }

    ClusterReport {
        metadata: ReportMetadata {
            weighting: "tf-idf: count * (ln(corpus/df) + 1) over char 1..3-grams, L2-normalized".into(),
            truncation: format!(
                "per-row top-{MAX_ROW_NEIGHBORS} neighbors at cosine >= {SIMILARITY_FLOOR}, then symmetrized by union"
            ),
            manual_review: !clusters.is_empty(),
        },
        per_parameter: entropy_analysis(records, &labels),
        clusters,
        noise,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use audit_certs::{KeyType, SigHash};
    use chrono::{TimeZone, Utc};

    pub(crate) fn record(fingerprint: &str, subject: &str) -> CertificateRecord {
        CertificateRecord {
            fingerprint: fingerprint.into(),
            subject: subject.into(),
            issuer: subject.into(),
            not_before: Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap(),
            not_after: Utc.with_ymd_and_hms(2022, 3, 1, 0, 0, 0).unwrap(),
            key_type: KeyType::Rsa,
            key_bits: 2048,
            sig_hash: SigHash::Sha256,
            chain_validates_public: false,
            key_usage: vec!["digital_signature".into()],
            is_ca: false,
        }
    }

    fn corpus_records() -> Vec<CertificateRecord> {
        synthetic_corpus(30, 20, 7)
            .into_iter()
            .map(|(fp, subject)| record(&fp, &subject))
            .collect()
    }

    #[test]
    fn clusters_and_noise_partition_the_corpus() {
        let records = corpus_records();
        let report = analyze(&records);

        let mut seen = BTreeSet::new();
        for cluster in &report.clusters {
            assert!(cluster.len() >= MIN_CLUSTER_SIZE);
            for fp in cluster {
                assert!(seen.insert(fp.clone()), "{fp} appears twice");
            }
        }
        for fp in &report.noise {
            assert!(seen.insert(fp.clone()), "{fp} is both clustered and noise");
        }
        let all: BTreeSet<String> = records.iter().map(|r| r.fingerprint.clone()).collect();
        assert_eq!(seen, all);
        assert_eq!(report.corpus_size(), records.len());
    }

    #[test]
    fn templated_fleets_cluster_while_random_subjects_stay_noise() {
        let records = corpus_records();
        let report = analyze(&records);

        assert_eq!(report.clusters.len(), 4);
        for cluster in &report.clusters {
            assert_eq!(cluster.len(), 30);
        }
        assert_eq!(report.noise.len(), 20);
        let random: BTreeSet<String> = records
            .iter()
            .filter(|r| r.fingerprint.starts_with("random-"))
            .map(|r| r.fingerprint.clone())
            .collect();
        assert_eq!(report.noise, random);
    }

    #[test]
    fn empty_corpus_yields_an_empty_report() {
        let report = analyze(&[]);
        assert!(report.clusters.is_empty());
        assert!(report.noise.is_empty());
        assert!(!report.metadata.manual_review);
        assert_eq!(report.corpus_size(), 0);
        for row in report.per_parameter.values() {
            assert_eq!(row.global_entropy, 0.0);
            assert_eq!(row.weighted_cluster_entropy, 0.0);
        }
    }

    #[test]
    fn reports_round_trip_through_json() {
        let records = corpus_records();
        let report = analyze(&records);
        let json = serde_json::to_string(&report).unwrap();
        let back: ClusterReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn metadata_names_the_weighting_and_flags_review() {
        let report = analyze(&corpus_records());
        assert!(report.metadata.weighting.contains("ln(corpus/df) + 1"));
        assert!(report.metadata.truncation.contains("top-500"));
        assert!(report.metadata.truncation.contains("union"));
        assert!(report.metadata.manual_review);
    }

    #[test]
    fn analysis_is_deterministic_across_runs() {
        let records = corpus_records();
        assert_eq!(analyze(&records), analyze(&records));
    }
}
