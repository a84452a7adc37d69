//! Deterministic density-based clustering over the similarity graph.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::graph::SimilarityGraph;

/// Neighborhood radius in cosine distance: `j` neighbors `i` when an edge
/// exists and `1 - cosine <= DBSCAN_EPSILON`.
pub const DBSCAN_EPSILON: f64 = 0.8;

/// A point is a core point when its neighborhood, counting the point itself,
/// reaches this size.
pub const DBSCAN_MIN_POINTS: usize = 3;

/// Cluster assignment of one corpus index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    /// Member of the cluster with this zero-based id.
    Cluster(usize),
    /// Not density-reachable from any core point.
    Noise,
}

/// Indices within distance [`DBSCAN_EPSILON`] of `point`, including `point`
/// itself, in ascending order.
fn neighborhood(graph: &SimilarityGraph, point: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = graph.neighbors[point]
        .iter()
        .filter(|(_, similarity)| 1.0 - similarity <= DBSCAN_EPSILON)
        .map(|(j, _)| *j)
        .collect();
    indices.push(point);
    indices.sort_unstable();
    indices
}

/// Clusters the graph. Points are visited in ascending index order and each
/// cluster is fully expanded before the next seed is considered, so labels
/// are deterministic; the walk is single-threaded by construction. Returns
/// one label per vertex.
pub fn dbscan(graph: &SimilarityGraph) -> Vec<PointLabel> {
    let mut labels: Vec<Option<PointLabel>> = vec![None; graph.len()];
    let mut next_cluster = 0;

    for point in 0..graph.len() {
        if labels[point].is_some() {
            continue;
        }
        let seeds = neighborhood(graph, point);
        if seeds.len() < DBSCAN_MIN_POINTS {
            labels[point] = Some(PointLabel::Noise);
            continue;
        }

        let cluster = next_cluster;
        next_cluster += 1;
        labels[point] = Some(PointLabel::Cluster(cluster));
        let mut queue: VecDeque<usize> = seeds.into_iter().filter(|&q| q != point).collect();
        while let Some(current) = queue.pop_front() {
            match labels[current] {
                Some(PointLabel::Cluster(_)) => continue,
                Some(PointLabel::Noise) => {
                    labels[current] = Some(PointLabel::Cluster(cluster));
                    continue;
                }
                None => labels[current] = Some(PointLabel::Cluster(cluster)),
            }
            let reachable = neighborhood(graph, current);
            if reachable.len() >= DBSCAN_MIN_POINTS {
                queue.extend(reachable.into_iter().filter(|&q| {
                    matches!(labels[q], None | Some(PointLabel::Noise))
                }));
            }
        }
    }

    labels.into_iter().map(Option::unwrap).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::similarity_graph;
    use crate::vectorize::vectorize;

    /// Builds a graph from unit-weight undirected edges.
    fn graph_of(vertices: usize, edges: &[(usize, usize)]) -> SimilarityGraph {
        let mut neighbors = vec![Vec::new(); vertices];
        for &(a, b) in edges {
            neighbors[a].push((b, 1.0));
            neighbors[b].push((a, 1.0));
        }
        for row in &mut neighbors {
            row.sort_by_key(|&(j, _)| j);
        }
        SimilarityGraph { neighbors }
    }

    fn pipeline_labels(subjects: &[&str]) -> Vec<PointLabel> {
        let docs: Vec<(String, String)> = subjects
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("fp-{i}"), s.to_string()))
            .collect();
        dbscan(&similarity_graph(&vectorize(&docs)))
    }

    #[test]
    fn five_identical_subjects_form_one_cluster() {
        let labels = pipeline_labels(&["CN=same.example"; 5]);
        assert_eq!(labels, vec![PointLabel::Cluster(0); 5]);
    }

    #[test]
    fn two_identical_subjects_stay_noise() {
        let labels = pipeline_labels(&["CN=same.example"; 2]);
        assert_eq!(labels, vec![PointLabel::Noise; 2]);
    }

    #[test]
    fn empty_graph_yields_no_labels() {
        assert!(dbscan(&similarity_graph(&[])).is_empty());
    }

    #[test]
    fn early_noise_is_reclaimed_as_border_when_its_core_expands() {
        let graph = graph_of(4, &[(0, 1), (1, 2), (1, 3)]);
        let labels = dbscan(&graph);
        assert_eq!(labels, vec![PointLabel::Cluster(0); 4]);
    }

    #[test]
    fn chains_of_core_points_expand_into_one_cluster() {
        let graph = graph_of(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(dbscan(&graph), vec![PointLabel::Cluster(0); 5]);
    }

    #[test]
    fn disconnected_triangles_become_separate_clusters_in_index_order() {
        let graph = graph_of(7, &[(4, 5), (5, 6), (4, 6), (0, 1), (1, 2), (0, 2)]);
        let labels = dbscan(&graph);
        assert_eq!(
            labels,
            vec![
                PointLabel::Cluster(0),
                PointLabel::Cluster(0),
                PointLabel::Cluster(0),
                PointLabel::Noise,
                PointLabel::Cluster(1),
                PointLabel::Cluster(1),
                PointLabel::Cluster(1),
            ]
        );
    }

    #[test]
    fn isolated_pairs_are_noise_because_min_points_counts_self() {
        let graph = graph_of(2, &[(0, 1)]);
        assert_eq!(dbscan(&graph), vec![PointLabel::Noise; 2]);
    }

    #[test]
    fn every_cluster_has_at_least_three_members() {
        let labels = pipeline_labels(&[
            "CN=a.example",
            "CN=a.example",
            "CN=a.example",
            "CN=a.example",
            "qqqq-0000",
            "####!!!!",
            "####!!!!",
        ]);
        let mut sizes = std::collections::BTreeMap::new();
        for label in &labels {
            if let PointLabel::Cluster(id) = label {
                *sizes.entry(*id).or_insert(0usize) += 1;
            }
        }
        for (_, size) in sizes {
            assert!(size >= crate::MIN_CLUSTER_SIZE);
        }
        assert_eq!(labels[5], PointLabel::Noise);
        assert_eq!(labels[6], PointLabel::Noise);
    }
}
