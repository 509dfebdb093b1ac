//! Photo-tag keyword trees and sightseeing-spot retrieval.
//!
//! The build side turns recognition tags on a personal photo collection into
//! an explorable tree of keyword clusters:
//!
//! 1. [`ingest`] loads the corpus and computes per-keyword statistics.
//! 2. [`graph`] builds confidence vectors and the co-occurrence graph.
//! 3. [`cluster`] separates high-degree key nodes and clusters the rest.
//! 4. [`tree`] arranges clusters under a root with hubs and scores photos.
//!
//! The query side, [`spots`], takes keywords chosen from the tree plus a
//! region and returns ranked candidate spots from a pluggable provider.

pub mod artifact;
pub mod cluster;
pub mod geo;
pub mod graph;
pub mod ingest;
pub mod params;
pub mod pipeline;
#[cfg(feature = "remote")]
pub mod remote;
pub mod spots;
pub mod synthetic;
pub mod tree;

pub use geo::{haversine_m, GeoPoint};
pub use graph::{build_graph, build_vectors, KeywordGraph, KeywordVector};
pub use ingest::{load_corpus, PhotoCorpus, PhotoRecord, TagAssignment};
pub use params::{PipelineParams, SpotParams};
pub use pipeline::{run_pipeline, PipelineOutput};
pub use spots::{search_spots, FixtureProvider, Provider, ProviderMode, RankingMode, Spot, SpotQuery};
pub use tree::{ExplorationTree, NodeRole, TreeNode};
