//! The exploration tree: clusters arranged under a root, with hub clusters
//! around it and everything else hanging off a maximum spanning tree of the
//! cluster graph. Each node carries its best-scoring photos.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{select_representative, Cluster};
use crate::graph::KeywordGraph;
use crate::ingest::{KeywordStats, PhotoCorpus, PhotoRecord};

pub const DEFAULT_HUB_MIN_EDGES: usize = 2;
pub const DEFAULT_PHOTOS_PER_NODE: usize = 4;
pub const DEFAULT_CHILD_MIN_APPEAR: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("cannot build a tree from zero clusters")]
    EmptyClusters,
    #[error("clusters do not partition the graph: {0}")]
    NotAPartition(String),
    #[error("unknown node {0}")]
    UnknownNode(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Root,
    Hub,
    Child,
}

/// Which confidence feeds a keyword's contribution to a photo's score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// The photo's own confidence for the keyword, divided by the keyword's
    /// photo count.
    #[default]
    PerPhoto,
    /// The keyword's corpus-wide confidence total divided by its photo count;
    /// identical for every photo carrying the keyword.
    CorpusAggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotoNode {
    pub photo_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub role: NodeRole,
    pub members: Vec<String>,
    pub is_key: bool,
    pub representative: String,
    /// Photo count of the representative keyword.
    pub appear: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
    /// Root and hubs (with their photo nodes) make up the initial view.
    pub initially_visible: bool,
    pub photo_nodes: Vec<PhotoNode>,
}

impl TreeNode {
    pub fn contains(&self, keyword: &str) -> bool {
        self.members.binary_search_by(|m| m.as_str().cmp(keyword)).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub hub_min_edges: usize,
    pub photos_per_node: usize,
    pub child_min_appear: usize,
    pub score_mode: ScoreMode,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            hub_min_edges: DEFAULT_HUB_MIN_EDGES,
            photos_per_node: DEFAULT_PHOTOS_PER_NODE,
            child_min_appear: DEFAULT_CHILD_MIN_APPEAR,
            score_mode: ScoreMode::PerPhoto,
        }
    }
}

/// Immutable tree; serialises to the export format served to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationTree {
    pub version: u32,
    /// Indexed by node id.
    pub nodes: Vec<TreeNode>,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl ExplorationTree {
    pub const VERSION: u32 = 1;

    /// A tree with no nodes, produced for an empty corpus.
    pub fn empty(params: BTreeMap<String, serde_json::Value>) -> Self {
        Self {
            version: Self::VERSION,
            nodes: Vec::new(),
            params,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> Result<&TreeNode, TreeError> {
        self.nodes.get(id).ok_or(TreeError::UnknownNode(id))
    }

    pub fn root(&self) -> Option<&TreeNode> {
        self.nodes.iter().find(|n| n.role == NodeRole::Root)
    }

    pub fn hubs(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.role == NodeRole::Hub)
    }

    /// Every keyword that appears in some node.
    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.nodes
            .iter()
            .flat_map(|n| n.members.iter().map(String::as_str))
            .collect()
    }

    /// Nodes that show `photo_id` as a photo node.
    pub fn nodes_with_photo<'a>(&'a self, photo_id: &'a str) -> impl Iterator<Item = &'a TreeNode> + 'a {
        self.nodes
            .iter()
            .filter(move |n| n.photo_nodes.iter().any(|p| p.photo_id == photo_id))
    }
}

/// Sum of per-keyword scores over the node keywords the photo carries.
///
/// Contributions are added in lexicographic keyword order. Returns `None`
/// when the photo shares no keyword with `members` (which must be sorted).
pub fn score_photo(
    photo: &PhotoRecord,
    members: &[String],
    stats: &BTreeMap<String, KeywordStats>,
    mode: ScoreMode,
) -> Option<f64> {
    let mut score = None;
    let (mut i, mut j) = (0, 0);
    while i < members.len() && j < photo.tags.len() {
        let tag = &photo.tags[j];
        match members[i].as_str().cmp(tag.keyword.as_str()) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if let Some(s) = stats.get(&tag.keyword) {
                    let conf = match mode {
                        ScoreMode::PerPhoto => tag.confidence,
                        ScoreMode::CorpusAggregate => s.conf_total,
                    };
                    *score.get_or_insert(0.0) += conf / s.appear as f64;
                }
                i += 1;
                j += 1;
            }
        }
    }
    score
}

/// The `limit` best photos for a node: descending score, ties by `photo_id`.
pub fn select_photo_nodes(members: &[String], corpus: &PhotoCorpus, mode: ScoreMode, limit: usize) -> Vec<PhotoNode> {
    let mut scored: Vec<PhotoNode> = corpus
        .photos()
        .iter()
        .filter_map(|photo| {
            score_photo(photo, members, corpus.stats(), mode).map(|score| PhotoNode {
                photo_id: photo.photo_id.clone(),
                score,
            })
        })
        .collect();
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.photo_id.cmp(&b.photo_id)));
    scored.truncate(limit);
    scored
}

/// Number of graph edges between each pair of clusters, keyed `(low, high)`.
pub fn inter_cluster_edges(clusters: &[Cluster], graph: &KeywordGraph) -> BTreeMap<(usize, usize), usize> {
    let mut owner = vec![usize::MAX; graph.len()];
    for (c, cluster) in clusters.iter().enumerate() {
        for m in &cluster.members {
            if let Some(v) = graph.vertex_index(m) {
                owner[v] = c;
            }
        }
    }
    let mut weights = BTreeMap::new();
    for e in graph.edges() {
        let (x, y) = (owner[e.a], owner[e.b]);
        if x != y {
            *weights.entry((x.min(y), x.max(y))).or_insert(0) += 1;
        }
    }
    weights
}

fn check_partition(clusters: &[Cluster], graph: &KeywordGraph) -> Result<(), TreeError> {
    let mut seen = vec![false; graph.len()];
    for cluster in clusters {
        if cluster.members.is_empty() {
            return Err(TreeError::NotAPartition(format!(
                "cluster {} is empty",
                cluster.cluster_id
            )));
        }
        for m in &cluster.members {
            let v = graph
                .vertex_index(m)
                .ok_or_else(|| TreeError::NotAPartition(format!("`{m}` is not a vertex")))?;
            if std::mem::replace(&mut seen[v], true) {
                return Err(TreeError::NotAPartition(format!("`{m}` is in two clusters")));
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(v) => Err(TreeError::NotAPartition(format!(
            "`{}` is in no cluster",
            graph.keyword(v)
        ))),
        None => Ok(()),
    }
}

/// Arrange clusters into the exploration tree and attach photo nodes.
///
/// Node ids equal positions in `clusters`.
pub fn build_tree(
    clusters: &[Cluster],
    graph: &KeywordGraph,
    corpus: &PhotoCorpus,
    params: &TreeParams,
) -> Result<ExplorationTree, TreeError> {
    if clusters.is_empty() {
        return Err(TreeError::EmptyClusters);
    }
    check_partition(clusters, graph)?;
    let stats = corpus.stats();
    let reps: Vec<&str> = clusters
        .iter()
        .map(|c| select_representative(&c.members, stats))
        .collect();

    let max_degree = (0..graph.len()).map(|v| graph.degree_of(v)).max().unwrap_or(0);
    let root = (0..clusters.len())
        .filter(|&c| {
            clusters[c]
                .members
                .iter()
                .any(|m| graph.degree(m).is_ok_and(|d| d == max_degree))
        })
        .min_by(|&x, &y| {
            clusters[y]
                .members
                .len()
                .cmp(&clusters[x].members.len())
                .then_with(|| reps[x].cmp(reps[y]))
        })
        .expect("some cluster holds a max-degree vertex");

    let weights = inter_cluster_edges(clusters, graph);
    let w = |x: usize, y: usize| weights.get(&(x.min(y), x.max(y))).copied().unwrap_or(0);

    let count = clusters.len();
    let mut parent: Vec<Option<usize>> = vec![None; count];
    let mut role = vec![NodeRole::Child; count];
    let mut placed = vec![false; count];
    role[root] = NodeRole::Root;
    placed[root] = true;
    let mut newly_placed = vec![root];
    for c in 0..count {
        if c != root && w(root, c) > params.hub_min_edges {
            role[c] = NodeRole::Hub;
            parent[c] = Some(root);
            placed[c] = true;
            newly_placed.push(c);
        }
    }

    // Prim-style maximum spanning tree over positive inter-cluster weights.
    // best[c] = (weight, attach point) among placed nodes.
    let mut best: Vec<Option<(usize, usize)>> = vec![None; count];
    loop {
        for &p in &newly_placed {
            for c in 0..count {
                if placed[c] {
                    continue;
                }
                let wc = w(p, c);
                if wc == 0 {
                    continue;
                }
                let improves = match best[c] {
                    None => true,
                    Some((bw, bp)) => wc > bw || (wc == bw && p < bp),
                };
                if improves {
                    best[c] = Some((wc, p));
                }
            }
        }
        newly_placed.clear();
        let next = (0..count)
            .filter(|&c| !placed[c])
            .filter_map(|c| best[c].map(|(bw, _)| (c, bw)))
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        let Some((c, _)) = next else { break };
        parent[c] = Some(best[c].expect("candidate has an attach point").1);
        placed[c] = true;
        newly_placed.push(c);
    }
    // clusters with no path to the root hang directly beneath it
    for c in 0..count {
        if !placed[c] {
            parent[c] = Some(root);
        }
    }

    let mut children = vec![Vec::new(); count];
    for (c, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            children[p].push(c);
        }
    }
    let mut depth = vec![0usize; count];
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &c in &children[x] {
            depth[c] = depth[x] + 1;
            queue.push_back(c);
        }
    }

    let nodes = clusters
        .iter()
        .enumerate()
        .map(|(id, cluster)| TreeNode {
            id,
            role: role[id],
            members: cluster.members.clone(),
            is_key: cluster.is_key,
            representative: reps[id].to_string(),
            appear: stats.get(reps[id]).map_or(0, |s| s.appear),
            parent: parent[id],
            children: std::mem::take(&mut children[id]),
            depth: depth[id],
            initially_visible: role[id] != NodeRole::Child,
            photo_nodes: select_photo_nodes(&cluster.members, corpus, params.score_mode, params.photos_per_node),
        })
        .collect();

    Ok(ExplorationTree {
        version: ExplorationTree::VERSION,
        nodes,
        params: BTreeMap::new(),
    })
}

/// Children of `node_id` whose representative keyword is on at least
/// `child_min_appear` photos.
pub fn expand_node(
    tree: &ExplorationTree,
    node_id: usize,
    child_min_appear: usize,
) -> Result<Vec<&TreeNode>, TreeError> {
    let node = tree.node(node_id)?;
    Ok(node
        .children
        .iter()
        .map(|&c| &tree.nodes[c])
        .filter(|c| c.appear >= child_min_appear)
        .collect())
}

/// Nodes with a member keyword containing `text` (case-insensitive),
/// ordered by depth then id. Blank text matches nothing.
pub fn find_nodes_by_keyword(tree: &ExplorationTree, text: &str) -> Vec<usize> {
    let Some(needle) = crate::ingest::normalize_keyword(text) else {
        return Vec::new();
    };
    let mut hits: Vec<&TreeNode> = tree
        .nodes
        .iter()
        .filter(|n| n.members.iter().any(|m| m.to_lowercase().contains(&needle)))
        .collect();
    hits.sort_by_key(|n| (n.depth, n.id));
    hits.into_iter().map(|n| n.id).collect()
}
