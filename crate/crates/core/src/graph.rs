//! Keyword confidence vectors and the thresholded co-occurrence graph.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::PhotoCorpus;

/// Inner products must exceed this for an edge when nothing else is configured.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vector for `{keyword}` has length {found}, expected {expected}")]
    DimensionMismatch {
        keyword: String,
        expected: usize,
        found: usize,
    },
    #[error("edge threshold must be a finite non-negative number, got {0}")]
    InvalidThreshold(f64),
    #[error("keyword `{0}` appears twice among the vertices")]
    DuplicateKeyword(String),
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
}

/// Confidence of one keyword across all photos, stored sparsely.
///
/// Coordinate `p` is the confidence in the `p`-th photo of the corpus in
/// ascending `photo_id` order; absent coordinates are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordVector {
    keyword: String,
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl KeywordVector {
    /// `entries` must be sorted by photo index, unique and below `dim`.
    pub fn new(keyword: impl Into<String>, dim: usize, entries: Vec<(usize, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.last().is_none_or(|e| e.0 < dim));
        Self {
            keyword: keyword.into(),
            dim,
            entries,
        }
    }

    pub fn from_dense(keyword: impl Into<String>, values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        Self::new(keyword, values.len(), entries)
    }

    pub fn keyword(&self) -> &str {
        &self.keyword
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn dense(&self) -> Vec<f64> {
        let mut values = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            values[i] = v;
        }
        values
    }

    /// Inner product, accumulated in ascending photo index.
    pub fn dot(&self, other: &KeywordVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (pi, vi) = self.entries[i];
            let (pj, vj) = other.entries[j];
            match pi.cmp(&pj) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += vi * vj;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Cosine similarity; zero when either vector is all zeros.
    pub fn cosine(&self, other: &KeywordVector) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            0.0
        } else {
            self.dot(other) / denom
        }
    }
}

/// One vector per keyword of the corpus, in lexicographic keyword order.
pub fn build_vectors(corpus: &PhotoCorpus) -> Vec<KeywordVector> {
    let mut columns: BTreeMap<&str, Vec<(usize, f64)>> = BTreeMap::new();
    for (p, photo) in corpus.photos().iter().enumerate() {
        for tag in &photo.tags {
            columns
                .entry(tag.keyword.as_str())
                .or_default()
                .push((p, tag.confidence));
        }
    }
    columns
        .into_iter()
        .map(|(keyword, entries)| KeywordVector::new(keyword, corpus.n(), entries))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Smaller vertex index.
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Undirected graph over keywords; an edge joins two keywords whose inner
/// product is strictly greater than the threshold.
#[derive(Debug, Clone)]
pub struct KeywordGraph {
    vertices: Vec<KeywordVector>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    threshold: f64,
}

pub fn build_graph(vectors: Vec<KeywordVector>, threshold: f64) -> Result<KeywordGraph, GraphError> {
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(GraphError::InvalidThreshold(threshold));
    }
    let dim = vectors.first().map_or(0, KeywordVector::dim);
    let mut index = HashMap::with_capacity(vectors.len());
    for (i, v) in vectors.iter().enumerate() {
        if v.dim() != dim {
            return Err(GraphError::DimensionMismatch {
                keyword: v.keyword.clone(),
                expected: dim,
                found: v.dim(),
            });
        }
        if index.insert(v.keyword.clone(), i).is_some() {
            return Err(GraphError::DuplicateKeyword(v.keyword.clone()));
        }
    }

    // Only pairs sharing a photo can have a nonzero product, so accumulate
    // through the photo -> keywords index. Photos are visited in ascending
    // order, the same summation order as `KeywordVector::dot`.
    let mut by_photo: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    for (j, v) in vectors.iter().enumerate() {
        for &(p, c) in &v.entries {
            by_photo[p].push((j, c));
        }
    }
    let mut products: HashMap<(usize, usize), f64> = HashMap::new();
    for column in &by_photo {
        for (x, &(j, cj)) in column.iter().enumerate() {
            for &(k, ck) in &column[x + 1..] {
                *products.entry((j, k)).or_insert(0.0) += cj * ck;
            }
        }
    }

    let mut edges: Vec<Edge> = products
        .into_iter()
        .filter(|(_, w)| *w > threshold)
        .map(|((a, b), weight)| Edge { a, b, weight })
        .collect();
    edges.sort_by_key(|e| (e.a, e.b));

    let mut adjacency = vec![Vec::new(); vectors.len()];
    for e in &edges {
        adjacency[e.a].push(e.b);
        adjacency[e.b].push(e.a);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    Ok(KeywordGraph {
        vertices: vectors,
        index,
        edges,
        adjacency,
        threshold,
    })
}

impl KeywordGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn vertices(&self) -> &[KeywordVector] {
        &self.vertices
    }

    pub fn vector(&self, v: usize) -> &KeywordVector {
        &self.vertices[v]
    }

    pub fn keyword(&self, v: usize) -> &str {
        &self.vertices[v].keyword
    }

    pub fn vertex_index(&self, keyword: &str) -> Option<usize> {
        self.index.get(keyword).copied()
    }

    /// Edges sorted by `(a, b)`, with `a < b`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree_of(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degree(&self, keyword: &str) -> Result<usize, GraphError> {
        self.vertex_index(keyword)
            .map(|v| self.degree_of(v))
            .ok_or_else(|| GraphError::UnknownKeyword(keyword.to_string()))
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges
            .binary_search_by_key(&(a, b), |e| (e.a, e.b))
            .ok()
            .map(|i| self.edges[i].weight)
    }

    pub fn export(&self) -> GraphExport {
        GraphExport {
            version: GraphExport::VERSION,
            vertices: self.vertices.iter().map(|v| v.keyword.clone()).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| ExportEdge {
                    a: self.keyword(e.a).to_string(),
                    b: self.keyword(e.b).to_string(),
                    w: e.weight,
                })
                .collect(),
            threshold: self.threshold,
        }
    }
}

/// JSON form of the graph consumed by tree tooling and the UI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub version: u32,
    pub vertices: Vec<String>,
    pub edges: Vec<ExportEdge>,
    pub threshold: f64,
}

impl GraphExport {
    pub const VERSION: u32 = 1;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportEdge {
    pub a: String,
    pub b: String,
    pub w: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::tests::micro;

    fn micro_graph() -> KeywordGraph {
        build_graph(build_vectors(&micro()), DEFAULT_EDGE_THRESHOLD).unwrap()
    }

    #[test]
    fn animal_vector_follows_photo_order() {
        let vectors = build_vectors(&micro());
        let animal = vectors.iter().find(|v| v.keyword() == "animal").unwrap();
        assert_eq!(animal.dense(), vec![0.9, 0.85, 0.0]);
    }

    #[test]
    fn single_photo_vectors_have_length_one() {
        let corpus = crate::ingest::PhotoCorpus::from_manifest_str(
            r#"[{"photo_id": "a", "uri": "x", "tags": [
                {"keyword": "sky", "confidence": 0.4}, {"keyword": "sea", "confidence": 0.3}]}]"#,
        )
        .unwrap();
        assert!(build_vectors(&corpus).iter().all(|v| v.dim() == 1));
    }

    #[test]
    fn micro_fixture_edges() {
        let g = micro_graph();
        let export = g.export();
        let edges: Vec<(&str, &str, f64)> = export.edges.iter().map(|e| (e.a.as_str(), e.b.as_str(), e.w)).collect();
        assert_eq!(edges.len(), 2);
        // 0.9 * 0.8 and 0.85 * 0.7, hand-computed
        assert_eq!((edges[0].0, edges[0].1), ("animal", "cat"));
        assert!((edges[0].2 - 0.72).abs() < 1e-12);
        assert_eq!((edges[1].0, edges[1].1), ("animal", "dog"));
        assert!((edges[1].2 - 0.595).abs() < 1e-12);
        assert_eq!(g.degree("lake").unwrap(), 0);
        assert_eq!(g.degree("animal").unwrap(), 2);
        let (cat, dog) = (g.vertex_index("cat").unwrap(), g.vertex_index("dog").unwrap());
        assert_eq!(g.edge_weight(cat, dog), None);
    }

    #[test]
    fn default_threshold_is_point_one() {
        assert_eq!(DEFAULT_EDGE_THRESHOLD, 0.1);
        assert_eq!(micro_graph().threshold(), 0.1);
    }

    #[test]
    fn orthogonal_vectors_have_no_edge() {
        let g = build_graph(
            vec![
                KeywordVector::from_dense("a", &[1.0, 0.0]),
                KeywordVector::from_dense("b", &[0.0, 1.0]),
            ],
            0.0,
        )
        .unwrap();
        assert!(g.edges().is_empty());
    }

    #[test]
    fn tie_at_threshold_is_not_an_edge() {
        let g = build_graph(
            vec![
                KeywordVector::from_dense("a", &[0.5, 0.0]),
                KeywordVector::from_dense("b", &[0.25, 0.0]),
            ],
            0.125,
        )
        .unwrap();
        assert!(g.edges().is_empty());
    }

    #[test]
    fn complete_graph_degrees() {
        let vectors = (0..6)
            .map(|i| KeywordVector::from_dense(format!("k{i}"), &[0.9, 0.8]))
            .collect();
        let g = build_graph(vectors, 0.1).unwrap();
        assert!((0..6).all(|v| g.degree_of(v) == 5));
    }

    #[test]
    fn errors() {
        let mismatch = build_graph(
            vec![
                KeywordVector::from_dense("a", &[1.0]),
                KeywordVector::from_dense("b", &[1.0, 0.0]),
            ],
            0.1,
        );
        assert!(matches!(mismatch, Err(GraphError::DimensionMismatch { .. })));
        assert!(matches!(
            build_graph(vec![], -0.1),
            Err(GraphError::InvalidThreshold(_))
        ));
        assert!(matches!(
            micro_graph().degree("zebra"),
            Err(GraphError::UnknownKeyword(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dense_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
            (1usize..12, 1usize..10).prop_flat_map(|(n, m)| {
                prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..=1.0], n), m)
            })
        }

        fn graph_at(rows: &[Vec<f64>], t: f64) -> KeywordGraph {
            let vectors = rows
                .iter()
                .enumerate()
                .map(|(j, r)| KeywordVector::from_dense(format!("k{j:02}"), r))
                .collect();
            build_graph(vectors, t).unwrap()
        }

        proptest! {
            #[test]
            fn raising_threshold_never_adds_edges(rows in dense_matrix(), t1 in 0.0f64..1.0, dt in 0.0f64..1.0) {
                let low = graph_at(&rows, t1);
                let high = graph_at(&rows, t1 + dt);
                for e in high.edges() {
                    prop_assert!(low.edge_weight(e.a, e.b).is_some());
                }
            }

            #[test]
            fn edges_need_a_shared_photo(rows in dense_matrix()) {
                let g = graph_at(&rows, 0.0);
                for e in g.edges() {
                    let shared = rows[e.a].iter().zip(&rows[e.b]).any(|(x, y)| *x != 0.0 && *y != 0.0);
                    prop_assert!(shared);
                }
            }

            #[test]
            fn symmetric_and_loop_free(rows in dense_matrix()) {
                let g = graph_at(&rows, 0.1);
                for v in 0..g.len() {
                    prop_assert!(!g.neighbors(v).contains(&v));
                    for &u in g.neighbors(v) {
                        prop_assert!(g.neighbors(u).contains(&v));
                    }
                }
            }
        }
    }
}
