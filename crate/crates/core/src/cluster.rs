//! Key-node separation and agglomerative clustering of the keyword graph.
//!
//! High-degree vertices ("key nodes") are pulled out as singleton clusters.
//! The rest are merged bottom-up with average linkage over a blend of vector
//! cosine and neighbourhood Jaccard similarity, where neighbourhoods ignore
//! key nodes so that sharing a broad hub keyword alone does not make two
//! specific keywords similar.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::KeywordGraph;
use crate::ingest::KeywordStats;

pub const DEFAULT_KEY_QUANTILE: f64 = 0.95;
pub const DEFAULT_KEY_MIN_DEGREE: usize = 3;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_MERGE_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: usize,
    /// Sorted, non-empty.
    pub members: Vec<String>,
    /// Set for singletons produced by key-node separation.
    pub is_key: bool,
}

impl Cluster {
    pub fn contains(&self, keyword: &str) -> bool {
        self.members.binary_search_by(|m| m.as_str().cmp(keyword)).is_ok()
    }
}

/// Nearest-rank quantile of a degree sequence: the smallest degree `d` such
/// that at least `q` of the vertices have degree `<= d`.
pub fn degree_quantile(degrees: &[usize], q: f64) -> Option<usize> {
    if degrees.is_empty() {
        return None;
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    let rank = (q.clamp(0.0, 1.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Vertices whose degree reaches both the `key_quantile` degree quantile and
/// the absolute floor `key_min_degree`.
pub fn detect_key_nodes(graph: &KeywordGraph, key_quantile: f64, key_min_degree: usize) -> BTreeSet<String> {
    let degrees: Vec<usize> = (0..graph.len()).map(|v| graph.degree_of(v)).collect();
    let Some(quantile) = degree_quantile(&degrees, key_quantile) else {
        return BTreeSet::new();
    };
    let cutoff = quantile.max(key_min_degree);
    degrees
        .iter()
        .enumerate()
        .filter(|(_, d)| **d >= cutoff)
        .map(|(v, _)| graph.keyword(v).to_string())
        .collect()
}

/// Blended similarity between two vertices.
pub fn similarity(graph: &KeywordGraph, is_key: &[bool], alpha: f64, u: usize, v: usize) -> f64 {
    let cosine = graph.vector(u).cosine(graph.vector(v));
    let jaccard = neighborhood_jaccard(graph, is_key, u, v);
    alpha * cosine + (1.0 - alpha) * jaccard
}

/// Jaccard index of the non-key neighbourhoods; zero when both are empty.
fn neighborhood_jaccard(graph: &KeywordGraph, is_key: &[bool], u: usize, v: usize) -> f64 {
    let nu = graph.neighbors(u).iter().filter(|&&x| !is_key[x]);
    let nv: Vec<usize> = graph.neighbors(v).iter().copied().filter(|&x| !is_key[x]).collect();
    let mut size_u = 0usize;
    let mut shared = 0usize;
    for x in nu {
        size_u += 1;
        if nv.binary_search(x).is_ok() {
            shared += 1;
        }
    }
    let union = size_u + nv.len() - shared;
    if union == 0 {
        0.0
    } else {
        shared as f64 / union as f64
    }
}

/// Partition the vertices: key nodes as singletons, everything else merged
/// greedily (highest average-linkage similarity first) while the best pair
/// reaches `merge_threshold`.
///
/// Keywords in `key_nodes` that are not vertices are ignored. Output clusters
/// are ordered by their smallest member and numbered in that order.
pub fn cluster_graph(
    graph: &KeywordGraph,
    key_nodes: &BTreeSet<String>,
    alpha: f64,
    merge_threshold: f64,
) -> Vec<Cluster> {
    let is_key: Vec<bool> = (0..graph.len()).map(|v| key_nodes.contains(graph.keyword(v))).collect();
    let free: Vec<usize> = (0..graph.len()).filter(|&v| !is_key[v]).collect();
    let k = free.len();

    // sums[i][j] = total pairwise similarity between clusters i and j
    let mut sums = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let s = similarity(graph, &is_key, alpha, free[i], free[j]);
            sums[i][j] = s;
            sums[j][i] = s;
        }
    }
    let mut groups: Vec<Option<Vec<usize>>> = free.iter().map(|&v| Some(vec![v])).collect();

    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..k {
            let Some(gi) = &groups[i] else { continue };
            for j in i + 1..k {
                let Some(gj) = &groups[j] else { continue };
                let avg = sums[i][j] / (gi.len() * gj.len()) as f64;
                if best.is_none_or(|(_, _, b)| avg > b) {
                    best = Some((i, j, avg));
                }
            }
        }
        let Some((i, j, score)) = best else { break };
        if score < merge_threshold {
            break;
        }
        let absorbed = groups[j].take().expect("active cluster");
        groups[i].as_mut().expect("active cluster").extend(absorbed);
        let absorbed_row = sums[j].clone();
        for (x, add) in absorbed_row.into_iter().enumerate() {
            sums[i][x] += add;
            sums[x][i] = sums[i][x];
        }
    }

    let mut clusters: Vec<(Vec<String>, bool)> = groups
        .into_iter()
        .flatten()
        .map(|g| {
            let mut members: Vec<String> = g.iter().map(|&v| graph.keyword(v).to_string()).collect();
            members.sort();
            (members, false)
        })
        .chain(
            (0..graph.len())
                .filter(|&v| is_key[v])
                .map(|v| (vec![graph.keyword(v).to_string()], true)),
        )
        .collect();
    clusters.sort_by(|a, b| a.0[0].cmp(&b.0[0]));
    clusters
        .into_iter()
        .enumerate()
        .map(|(cluster_id, (members, is_key))| Cluster {
            cluster_id,
            members,
            is_key,
        })
        .collect()
}

/// The member seen on the most photos; ties go to the larger confidence
/// total, then to the lexicographically smaller keyword.
pub fn select_representative<'a>(members: &'a [String], stats: &BTreeMap<String, KeywordStats>) -> &'a str {
    let key = |k: &String| stats.get(k).map_or((0, 0.0), |s| (s.appear, s.conf_total));
    members
        .iter()
        .reduce(|best, k| {
            let (ab, cb) = key(best);
            let (ak, ck) = key(k);
            let better = ak > ab || (ak == ab && (ck > cb || (ck == cb && k < best)));
            if better {
                k
            } else {
                best
            }
        })
        .expect("cluster has members")
}
