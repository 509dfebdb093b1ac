//! Tunable parameters for tree building and spot search, with range checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{DEFAULT_ALPHA, DEFAULT_KEY_MIN_DEGREE, DEFAULT_KEY_QUANTILE, DEFAULT_MERGE_THRESHOLD};
use crate::graph::DEFAULT_EDGE_THRESHOLD;
use crate::spots::{DEFAULT_LIMIT, DEFAULT_MIN_NEARBY, DEFAULT_MIN_RELEVANCE, DEFAULT_RADIUS_M};
use crate::tree::{ScoreMode, TreeParams, DEFAULT_CHILD_MIN_APPEAR, DEFAULT_HUB_MIN_EDGES, DEFAULT_PHOTOS_PER_NODE};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("parameter `{name}` = {value} is out of range: {expected}")]
pub struct ParamError {
    pub name: &'static str,
    pub value: String,
    pub expected: &'static str,
}

fn check(ok: bool, name: &'static str, value: impl ToString, expected: &'static str) -> Result<(), ParamError> {
    if ok {
        Ok(())
    } else {
        Err(ParamError {
            name,
            value: value.to_string(),
            expected,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub threshold: f64,
    pub min_appear: usize,
    pub alpha: f64,
    pub merge_threshold: f64,
    pub key_quantile: f64,
    pub key_min_degree: usize,
    pub hub_min_edges: usize,
    pub photos_per_node: usize,
    pub child_min_appear: usize,
    pub score_mode: ScoreMode,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_EDGE_THRESHOLD,
            min_appear: 1,
            alpha: DEFAULT_ALPHA,
            merge_threshold: DEFAULT_MERGE_THRESHOLD,
            key_quantile: DEFAULT_KEY_QUANTILE,
            key_min_degree: DEFAULT_KEY_MIN_DEGREE,
            hub_min_edges: DEFAULT_HUB_MIN_EDGES,
            photos_per_node: DEFAULT_PHOTOS_PER_NODE,
            child_min_appear: DEFAULT_CHILD_MIN_APPEAR,
            score_mode: ScoreMode::PerPhoto,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        check(
            self.threshold.is_finite() && self.threshold >= 0.0,
            "threshold",
            self.threshold,
            ">= 0",
        )?;
        check(self.min_appear >= 1, "min_appear", self.min_appear, ">= 1")?;
        check((0.0..=1.0).contains(&self.alpha), "alpha", self.alpha, "in [0, 1]")?;
        check(
            self.merge_threshold.is_finite() && self.merge_threshold >= 0.0,
            "merge_threshold",
            self.merge_threshold,
            ">= 0",
        )?;
        check(
            self.key_quantile > 0.0 && self.key_quantile <= 1.0,
            "key_quantile",
            self.key_quantile,
            "in (0, 1]",
        )?;
        check(
            self.photos_per_node >= 1,
            "photos_per_node",
            self.photos_per_node,
            ">= 1",
        )?;
        Ok(())
    }

    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            hub_min_edges: self.hub_min_edges,
            photos_per_node: self.photos_per_node,
            child_min_appear: self.child_min_appear,
            score_mode: self.score_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpotParams {
    pub radius_m: f64,
    pub min_nearby: usize,
    pub min_relevance: f64,
    pub limit: usize,
}

impl Default for SpotParams {
    fn default() -> Self {
        Self {
            radius_m: DEFAULT_RADIUS_M,
            min_nearby: DEFAULT_MIN_NEARBY,
            min_relevance: DEFAULT_MIN_RELEVANCE,
            limit: DEFAULT_LIMIT,
        }
    }
}

impl SpotParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        check(
            self.radius_m.is_finite() && self.radius_m > 0.0,
            "radius_m",
            self.radius_m,
            "> 0",
        )?;
        check(self.min_nearby >= 1, "min_nearby", self.min_nearby, ">= 1")?;
        check(
            self.min_relevance > 0.0 && self.min_relevance <= 1.0,
            "min_relevance",
            self.min_relevance,
            "in (0, 1]",
        )?;
        check(self.limit >= 1, "limit", self.limit, ">= 1")?;
        Ok(())
    }
}
