//! Thresholded cosine-similarity graph over subject vectors.

use std::collections::BTreeMap;

use crate::vectorize::{cosine, SubjectVector};

/// Similarities below this floor never enter the graph.
pub const SIMILARITY_FLOOR: f64 = 0.5;

/// Each row keeps at most this many neighbors before symmetrization.
pub const MAX_ROW_NEIGHBORS: usize = 500;

/// Sparse undirected similarity graph. `neighbors[i]` lists `(j, cosine)`
/// pairs sorted by index, never including `i` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub neighbors: Vec<Vec<(usize, f64)>>,
}

impl SimilarityGraph {
    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    /// True when the graph has no vertices.
    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// The per-row retention step: all neighbors at or above
/// [`SIMILARITY_FLOOR`], keeping only the [`MAX_ROW_NEIGHBORS`] most similar
/// (ties broken toward lower indices).
pub(crate) fn retained_rows(vectors: &[SubjectVector]) -> Vec<Vec<(usize, f64)>> {
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vectors.len()];
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let similarity = cosine(&vectors[i], &vectors[j]);
            if similarity >= SIMILARITY_FLOOR {
                rows[i].push((j, similarity));
                rows[j].push((i, similarity));
            }
        }
    }
    for row in &mut rows {
        row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        row.truncate(MAX_ROW_NEIGHBORS);
        row.sort_by_key(|&(index, _)| index);
    }
    rows
}

/// Builds the similarity graph: per-row retention followed by symmetrization
/// by union, so an edge survives if either endpoint kept it.
pub fn similarity_graph(vectors: &[SubjectVector]) -> SimilarityGraph {
    let rows = retained_rows(vectors);
    let mut merged: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); vectors.len()];
    for (i, row) in rows.iter().enumerate() {
        for &(j, similarity) in row {
            merged[i].insert(j, similarity);
            merged[j].insert(i, similarity);
        }
    }
    SimilarityGraph {
        neighbors: merged
            .into_iter()
            .map(|row| row.into_iter().collect())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::vectorize;

    fn docs(subjects: &[&str]) -> Vec<(String, String)> {
        subjects
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("fp-{i:03}"), s.to_string()))
            .collect()
    }

    fn weight_of(graph: &SimilarityGraph, i: usize, j: usize) -> Option<f64> {
        graph.neighbors[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, w)| *w)
    }

    #[test]
    fn similar_pairs_get_edges_in_both_rows() {
        let vectors = vectorize(&docs(&[
            "CN=device-0001.plant.example, O=Acme Industrial, C=DE",
            "CN=device-0002.plant.example, O=Acme Industrial, C=DE",
            "CN=gateway-7, O=Other Corp",
            "CN=device-0001.plant.example, O=Acme Industrial, C=DE",
            "O=Zebra, CN=unrelated",
        ]));
        let graph = similarity_graph(&vectors);
        let forward = weight_of(&graph, 0, 1).unwrap();
        let backward = weight_of(&graph, 1, 0).unwrap();
        assert_eq!(forward, backward);
        assert!((forward - 0.926724439725).abs() < 1e-9);
        assert_eq!(weight_of(&graph, 0, 2), None);
        assert_eq!(weight_of(&graph, 2, 4), None);
    }

    #[test]
    fn dissimilar_pairs_stay_disconnected() {
        let vectors = vectorize(&docs(&[
            "CN=device-0001.plant.example, O=Acme Industrial, C=DE",
            "CN=gateway-7, O=Other Corp",
            "O=Zebra, CN=unrelated",
        ]));
        let graph = similarity_graph(&vectors);
        for row in &graph.neighbors {
            assert!(row.is_empty());
        }
    }

    #[test]
    fn rows_never_reference_themselves() {
        let vectors = vectorize(&docs(&["same", "same", "same"]));
        let graph = similarity_graph(&vectors);
        for (i, row) in graph.neighbors.iter().enumerate() {
            assert!(row.iter().all(|(j, _)| *j != i));
        }
    }

    #[test]
    fn retention_caps_each_row_at_five_hundred() {
        let subjects = vec!["CN=fixed.example"; 600];
        let vectors = vectorize(&docs(&subjects));
        let rows = retained_rows(&vectors);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), MAX_ROW_NEIGHBORS, "row {i}");
        }
        let kept: Vec<usize> = rows[0].iter().map(|(j, _)| *j).collect();
        assert_eq!(kept, (1..=500).collect::<Vec<_>>());
    }

    #[test]
    fn union_restores_edges_one_side_truncated_away() {
        let subjects = vec!["CN=fixed.example"; 600];
        let vectors = vectorize(&docs(&subjects));
        let rows = retained_rows(&vectors);
        assert!(!rows[0].iter().any(|(j, _)| *j == 599));
        assert!(rows[599].iter().any(|(j, _)| *j == 0));

        let graph = similarity_graph(&vectors);
        let restored = weight_of(&graph, 0, 599).unwrap();
        assert!((restored - 1.0).abs() < 1e-12);
        assert_eq!(weight_of(&graph, 599, 0), Some(restored));
    }

    #[test]
    fn graphs_are_symmetric_with_matching_weights() {
        let vectors = vectorize(&docs(&[
            "CN=plc-001.acme.example, O=Acme",
            "CN=plc-002.acme.example, O=Acme",
            "CN=plc-003.acme.example, O=Acme",
            "CN=totally different",
            "xyzzy",
        ]));
        let graph = similarity_graph(&vectors);
        for (i, row) in graph.neighbors.iter().enumerate() {
            for &(j, weight) in row {
                assert_eq!(weight_of(&graph, j, i), Some(weight), "edge {i}-{j}");
            }
        }
    }

    #[test]
    fn empty_input_builds_an_empty_graph() {
        let graph = similarity_graph(&[]);
        assert!(graph.is_empty());
        assert_eq!(graph.len(), 0);
    }
}
