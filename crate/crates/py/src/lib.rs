//! Python bindings: corpus loading, tree building, tree queries and spot
//! search. Structured results come back as plain Python objects decoded from
//! the same JSON the CLI writes.

use std::path::PathBuf;

use phototrail_core::artifact::to_json_string;
use phototrail_core::pipeline::PipelineOutput;
use phototrail_core::spots::SpotError;
use phototrail_core::synthetic::synthetic_corpus;
use phototrail_core::tree::{expand_node, find_nodes_by_keyword, ScoreMode};
use phototrail_core::{
    load_corpus, run_pipeline, search_spots, GeoPoint, PhotoCorpus, PipelineParams, SpotParams, SpotQuery,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(phototrail, ProviderError, PyRuntimeError);

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// A photo collection with per-keyword statistics.
#[pyclass(module = "phototrail", frozen)]
struct Corpus {
    inner: PhotoCorpus,
}

#[pymethods]
impl Corpus {
    /// Read a manifest file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_corpus(path).map(|inner| Self { inner }).map_err(value_err)
    }

    /// Parse a manifest from a JSON string.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        PhotoCorpus::from_manifest_str(text)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (photos=2581, seed=1))]
    fn synthetic(photos: usize, seed: u64) -> Self {
        Self {
            inner: synthetic_corpus(photos, seed),
        }
    }

    /// Number of photos.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Number of distinct keywords.
    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    /// `(conf_total, appear)` for a keyword, or None.
    fn keyword_stats(&self, keyword: &str) -> Option<(f64, usize)> {
        self.inner.keyword_stats(keyword).map(|s| (s.conf_total, s.appear))
    }

    fn to_json(&self) -> String {
        to_json_string(&self.inner.to_manifest_value())
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Corpus(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// The result of a build: graph, clusters and exploration tree.
#[pyclass(module = "phototrail", frozen)]
struct Build {
    out: PipelineOutput,
    child_min_appear: usize,
}

#[pymethods]
impl Build {
    /// `{"n", "m", "edges", "clusters", "root"}`.
    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        loads(py, &to_json_string(&self.out.summary()))
    }

    fn tree_json(&self) -> String {
        to_json_string(&self.out.tree)
    }

    fn graph_json(&self) -> String {
        to_json_string(&self.out.graph.export())
    }

    fn tree<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        loads(py, &self.tree_json())
    }

    /// Edges as `(keyword_a, keyword_b, weight)`.
    fn edges(&self) -> Vec<(String, String, f64)> {
        let g = &self.out.graph;
        g.edges()
            .iter()
            .map(|e| (g.keyword(e.a).to_string(), g.keyword(e.b).to_string(), e.weight))
            .collect()
    }

    fn key_nodes(&self) -> Vec<String> {
        self.out.key_nodes.iter().cloned().collect()
    }

    fn clusters(&self) -> Vec<Vec<String>> {
        self.out.clusters.iter().map(|c| c.members.clone()).collect()
    }

    /// Ids of the children shown when expanding `node_id`.
    #[pyo3(signature = (node_id, min_appear=None))]
    fn expand(&self, node_id: usize, min_appear: Option<usize>) -> PyResult<Vec<usize>> {
        let floor = min_appear.unwrap_or(self.child_min_appear);
        expand_node(&self.out.tree, node_id, floor)
            .map(|nodes| nodes.into_iter().map(|n| n.id).collect())
            .map_err(value_err)
    }

    /// Ids of nodes with a member keyword containing `text`.
    fn find(&self, text: &str) -> Vec<usize> {
        find_nodes_by_keyword(&self.out.tree, text)
    }

    fn __repr__(&self) -> String {
        let s = self.out.summary();
        format!(
            "Build(n={}, m={}, edges={}, clusters={})",
            s.n, s.m, s.edges, s.clusters
        )
    }
}

/// Run the full build. Keyword arguments override the default parameters.
#[pyfunction]
#[pyo3(signature = (
    corpus, *, threshold=None, min_appear=None, alpha=None, merge_threshold=None, key_quantile=None,
    key_min_degree=None, hub_min_edges=None, photos_per_node=None, child_min_appear=None, score_mode=None
))]
#[allow(clippy::too_many_arguments)]
fn build(
    corpus: &Corpus,
    threshold: Option<f64>,
    min_appear: Option<usize>,
    alpha: Option<f64>,
    merge_threshold: Option<f64>,
    key_quantile: Option<f64>,
    key_min_degree: Option<usize>,
    hub_min_edges: Option<usize>,
    photos_per_node: Option<usize>,
    child_min_appear: Option<usize>,
    score_mode: Option<&str>,
) -> PyResult<Build> {
    let d = PipelineParams::default();
    let score_mode = match score_mode {
        None => d.score_mode,
        Some(s) => serde_json::from_value::<ScoreMode>(serde_json::Value::String(s.into()))
            .map_err(|_| value_err(format!("unknown score mode `{s}`")))?,
    };
    let params = PipelineParams {
        threshold: threshold.unwrap_or(d.threshold),
        min_appear: min_appear.unwrap_or(d.min_appear),
        alpha: alpha.unwrap_or(d.alpha),
        merge_threshold: merge_threshold.unwrap_or(d.merge_threshold),
        key_quantile: key_quantile.unwrap_or(d.key_quantile),
        key_min_degree: key_min_degree.unwrap_or(d.key_min_degree),
        hub_min_edges: hub_min_edges.unwrap_or(d.hub_min_edges),
        photos_per_node: photos_per_node.unwrap_or(d.photos_per_node),
        child_min_appear: child_min_appear.unwrap_or(d.child_min_appear),
        score_mode,
    };
    let out = run_pipeline(&corpus.inner, &params).map_err(value_err)?;
    Ok(Build {
        out,
        child_min_appear: params.child_min_appear,
    })
}

/// Offline provider reading per-region JSON files from a directory.
#[pyclass(module = "phototrail", frozen)]
struct FixtureProvider {
    inner: phototrail_core::FixtureProvider,
}

#[pymethods]
impl FixtureProvider {
    #[new]
    fn new(directory: PathBuf) -> PyResult<Self> {
        phototrail_core::FixtureProvider::from_dir(directory)
            .map(|inner| Self { inner })
            .map_err(|e| ProviderError::new_err(e.to_string()))
    }

    fn regions(&self) -> Vec<String> {
        self.inner.regions().map(|r| r.region.clone()).collect()
    }
}

/// Ranked spots for a region as a JSON string, identical to the CLI's
/// spots.json.
#[pyfunction]
#[pyo3(signature = (
    provider, region, keywords, *, provider_mode="photo_search", ranking_mode="keyword_relevance",
    radius_m=None, min_nearby=None, min_relevance=None, limit=None
))]
#[allow(clippy::too_many_arguments)]
fn search_spots_json(
    py: Python<'_>,
    provider: &FixtureProvider,
    region: &str,
    keywords: Vec<String>,
    provider_mode: &str,
    ranking_mode: &str,
    radius_m: Option<f64>,
    min_nearby: Option<usize>,
    min_relevance: Option<f64>,
    limit: Option<usize>,
) -> PyResult<String> {
    let d = SpotParams::default();
    let params = SpotParams {
        radius_m: radius_m.unwrap_or(d.radius_m),
        min_nearby: min_nearby.unwrap_or(d.min_nearby),
        min_relevance: min_relevance.unwrap_or(d.min_relevance),
        limit: limit.unwrap_or(d.limit),
    };
    params.validate().map_err(value_err)?;
    let query = SpotQuery::new(
        region,
        &keywords,
        provider_mode.parse().map_err(value_err)?,
        ranking_mode.parse().map_err(value_err)?,
    )
    .map_err(value_err)?;
    let result = py.detach(|| search_spots(&query, &provider.inner, &params));
    match result {
        Ok(spots) => Ok(to_json_string(&spots)),
        Err(SpotError::InvalidQuery(m)) => Err(value_err(m)),
        Err(SpotError::Provider(e)) => Err(ProviderError::new_err(e.to_string())),
    }
}

/// Great-circle distance in meters.
#[pyfunction]
fn haversine_m(lat1: f64, lng1: f64, lat2: f64, lng2: f64) -> PyResult<f64> {
    let a = GeoPoint::new(lat1, lng1).map_err(value_err)?;
    let b = GeoPoint::new(lat2, lng2).map_err(value_err)?;
    Ok(phototrail_core::haversine_m(a, b))
}

#[pymodule]
pub fn phototrail(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Corpus>()?;
    m.add_class::<Build>()?;
    m.add_class::<FixtureProvider>()?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(search_spots_json, m)?)?;
    m.add_function(wrap_pyfunction!(haversine_m, m)?)?;
    m.add("ProviderError", m.py().get_type::<ProviderError>())?;
    Ok(())
}
