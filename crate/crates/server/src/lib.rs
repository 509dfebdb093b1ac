//! HTTP JSON service over a built exploration tree, with per-session keyword
//! selection and spot search.
//!
//! The tree is built once at startup (or on `POST /api/admin/reload`) and
//! shared read-only between requests. Sessions live in memory.

pub mod config;
mod error;
mod routes;
pub mod session;

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use parking_lot::RwLock;
use phototrail_core::artifact::to_json_string;
use phototrail_core::ingest::IngestError;
use phototrail_core::pipeline::PipelineError;
use phototrail_core::spots::ProviderError;
use phototrail_core::{
    load_corpus, run_pipeline, FixtureProvider, PhotoCorpus, PipelineOutput, PipelineParams, Provider,
};
use thiserror::Error;

pub use config::{ConfigError, ProviderConfig, ServiceConfig};
pub use error::ApiError;
pub use routes::router;
pub use session::{Session, SessionTable};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Everything derived from the corpus at build time.
pub struct Model {
    pub output: PipelineOutput,
    /// The tree export, serialized once.
    pub tree_json: String,
}

impl Model {
    pub fn build(corpus: &PhotoCorpus, params: &PipelineParams) -> Result<Self, PipelineError> {
        let output = run_pipeline(corpus, params)?;
        let tree_json = to_json_string(&output.tree);
        Ok(Self { output, tree_json })
    }
}

pub struct AppState {
    model: RwLock<Arc<Model>>,
    sessions: SessionTable,
    provider: Arc<dyn Provider>,
    config: ServiceConfig,
}

impl AppState {
    pub fn new(config: ServiceConfig, corpus: &PhotoCorpus, provider: Arc<dyn Provider>) -> Result<Self, ServerError> {
        config.validate()?;
        let model = Model::build(corpus, &config.pipeline)?;
        Ok(Self {
            model: RwLock::new(Arc::new(model)),
            sessions: SessionTable::new(Duration::from_secs(config.session_ttl_secs)),
            provider,
            config,
        })
    }

    /// Load the corpus and provider named by `config`.
    ///
    /// Call this outside an async runtime: the remote provider owns a
    /// blocking HTTP client.
    pub fn from_config(config: ServiceConfig) -> Result<Self, ServerError> {
        config.validate()?;
        let corpus = load_corpus(&config.corpus)?;
        let provider = build_provider(&config.provider)?;
        Self::new(config, &corpus, provider)
    }

    pub fn model(&self) -> Arc<Model> {
        Arc::clone(&self.model.read())
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn sessions(&self) -> &SessionTable {
        &self.sessions
    }

    pub fn provider(&self) -> Arc<dyn Provider> {
        Arc::clone(&self.provider)
    }

    /// Re-read the corpus and swap in a freshly built model. Sessions are
    /// dropped since their keywords may no longer exist.
    pub fn reload(&self) -> Result<Arc<Model>, ServerError> {
        let corpus = load_corpus(&self.config.corpus)?;
        let model = Arc::new(Model::build(&corpus, &self.config.pipeline)?);
        *self.model.write() = Arc::clone(&model);
        self.sessions.clear();
        Ok(model)
    }
}

pub fn build_provider(config: &ProviderConfig) -> Result<Arc<dyn Provider>, ServerError> {
    match config.name.as_str() {
        ProviderConfig::FIXTURE => Ok(Arc::new(FixtureProvider::from_dir(&config.fixtures)?)),
        #[cfg(feature = "remote")]
        ProviderConfig::REMOTE => Ok(Arc::new(phototrail_core::remote::RemoteProvider::from_env()?)),
        other => Err(ConfigError::Invalid(format!("provider `{other}` is not available in this build")).into()),
    }
}

/// Serve until `shutdown` resolves.
pub async fn serve(
    state: Arc<AppState>,
    listener: tokio::net::TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "listening");
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Where a photo's relative `uri` resolves under the photo root, if it is a
/// plain relative path that stays inside the root.
fn photo_path(root: &std::path::Path, uri: &str) -> Option<PathBuf> {
    use std::path::Component;
    let rel = std::path::Path::new(uri);
    let plain = rel
        .components()
        .all(|c| matches!(c, Component::Normal(_) | Component::CurDir));
    (plain && !uri.contains("://")).then(|| root.join(rel))
}
