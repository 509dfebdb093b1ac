//! End-to-end tree build: corpus -> vectors -> graph -> clusters -> tree.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::cluster::{cluster_graph, detect_key_nodes, Cluster};
use crate::graph::{build_graph, build_vectors, GraphError, KeywordGraph};
use crate::ingest::PhotoCorpus;
use crate::params::{ParamError, PipelineParams};
use crate::tree::{build_tree, ExplorationTree, TreeError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Every intermediate product of a build.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// The corpus after keyword filtering.
    pub corpus: PhotoCorpus,
    pub graph: KeywordGraph,
    pub key_nodes: BTreeSet<String>,
    pub clusters: Vec<Cluster>,
    pub tree: ExplorationTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuildSummary {
    pub n: usize,
    pub m: usize,
    pub edges: usize,
    pub clusters: usize,
    pub root: Option<String>,
}

impl PipelineOutput {
    pub fn summary(&self) -> BuildSummary {
        BuildSummary {
            n: self.corpus.n(),
            m: self.corpus.m(),
            edges: self.graph.edges().len(),
            clusters: self.clusters.len(),
            root: self.tree.root().map(|r| r.representative.clone()),
        }
    }
}

pub fn run_pipeline(corpus: &PhotoCorpus, params: &PipelineParams) -> Result<PipelineOutput, PipelineError> {
    params.validate()?;
    let corpus = corpus.filter_keywords(params.min_appear);
    let graph = build_graph(build_vectors(&corpus), params.threshold)?;
    let key_nodes = detect_key_nodes(&graph, params.key_quantile, params.key_min_degree);
    let clusters = cluster_graph(&graph, &key_nodes, params.alpha, params.merge_threshold);

    let recorded = match serde_json::to_value(params).expect("params serialize") {
        serde_json::Value::Object(map) => map.into_iter().collect(),
        _ => unreachable!("params serialize to an object"),
    };
    let mut tree = if clusters.is_empty() {
        ExplorationTree::empty(Default::default())
    } else {
        build_tree(&clusters, &graph, &corpus, &params.tree_params())?
    };
    tree.params = recorded;

    Ok(PipelineOutput {
        corpus,
        graph,
        key_nodes,
        clusters,
        tree,
    })
}
