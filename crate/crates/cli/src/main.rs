//! `phototrail`: build keyword trees from tagged photo manifests, query
//! spots, and run the HTTP service.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 provider error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use phototrail_core::artifact::{read_json, write_json, PipelineArtifacts};
use phototrail_core::cluster::{DEFAULT_ALPHA, DEFAULT_KEY_MIN_DEGREE, DEFAULT_KEY_QUANTILE, DEFAULT_MERGE_THRESHOLD};
use phototrail_core::graph::DEFAULT_EDGE_THRESHOLD;
use phototrail_core::ingest::FixtureRecognizer;
use phototrail_core::spots::{SpotError, DEFAULT_LIMIT, DEFAULT_MIN_NEARBY, DEFAULT_MIN_RELEVANCE, DEFAULT_RADIUS_M};
use phototrail_core::synthetic::synthetic_corpus;
use phototrail_core::tree::{ScoreMode, DEFAULT_CHILD_MIN_APPEAR, DEFAULT_HUB_MIN_EDGES, DEFAULT_PHOTOS_PER_NODE};
use phototrail_core::{
    load_corpus, run_pipeline, search_spots, ExplorationTree, PipelineParams, ProviderMode, RankingMode, Spot,
    SpotParams, SpotQuery,
};
use phototrail_server::{build_provider, AppState, ProviderConfig, ServerError, ServiceConfig};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Provider(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Provider(_) => 3,
        }
    }
}

fn data(e: impl ToString) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "phototrail",
    version,
    about = "Keyword trees from photo tags, and sightseeing-spot search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build graph and tree artifacts from a photo manifest.
    Build(BuildArgs),
    /// Retrieve and rank spots for a region and keywords.
    Spots(SpotsArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Write a seeded synthetic manifest.
    Synth(SynthArgs),
}

fn parse_score_mode(s: &str) -> Result<ScoreMode, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown score mode `{s}`, expected per_photo or corpus_aggregate"))
}

#[derive(Args)]
struct PipelineArgs {
    /// Edge threshold on keyword-vector inner products.
    #[arg(long, default_value_t = DEFAULT_EDGE_THRESHOLD, allow_negative_numbers = true)]
    threshold: f64,
    /// Drop keywords seen on fewer photos than this before building.
    #[arg(long, default_value_t = 1)]
    min_appear: usize,
    /// Weight of cosine similarity against neighbourhood overlap.
    #[arg(long, default_value_t = DEFAULT_ALPHA, allow_negative_numbers = true)]
    alpha: f64,
    /// Stop merging clusters below this average similarity.
    #[arg(long, default_value_t = DEFAULT_MERGE_THRESHOLD, allow_negative_numbers = true)]
    merge_threshold: f64,
    /// Degree quantile for key nodes.
    #[arg(long, default_value_t = DEFAULT_KEY_QUANTILE, allow_negative_numbers = true)]
    key_quantile: f64,
    /// Minimum degree for key nodes.
    #[arg(long, default_value_t = DEFAULT_KEY_MIN_DEGREE)]
    key_min_degree: usize,
    /// A cluster is a hub when it has more edges than this to the root.
    #[arg(long, default_value_t = DEFAULT_HUB_MIN_EDGES)]
    hub_min_edges: usize,
    /// Photo nodes attached to each tree node.
    #[arg(long, default_value_t = DEFAULT_PHOTOS_PER_NODE)]
    photos_per_node: usize,
    /// Children shown on expand need at least this many photos.
    #[arg(long, default_value_t = DEFAULT_CHILD_MIN_APPEAR)]
    child_min_appear: usize,
    /// per_photo or corpus_aggregate.
    #[arg(long, default_value = "per_photo", value_parser = parse_score_mode)]
    score_mode: ScoreMode,
}

impl PipelineArgs {
    fn params(&self) -> Result<PipelineParams, CliError> {
        let params = PipelineParams {
            threshold: self.threshold,
            min_appear: self.min_appear,
            alpha: self.alpha,
            merge_threshold: self.merge_threshold,
            key_quantile: self.key_quantile,
            key_min_degree: self.key_min_degree,
            hub_min_edges: self.hub_min_edges,
            photos_per_node: self.photos_per_node,
            child_min_appear: self.child_min_appear,
            score_mode: self.score_mode,
        };
        params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(params)
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Photo manifest (JSON array of photo records).
    #[arg(long)]
    manifest: PathBuf,
    /// Replace manifest tags with a recognizer sidecar (`{photo_id: [tags]}`).
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Output directory for corpus.json, graph.json and tree.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct SpotsArgs {
    #[arg(long)]
    region: String,
    /// Query keywords; repeat or comma-separate.
    #[arg(long = "keywords", value_delimiter = ',')]
    keywords: Vec<String>,
    /// Tree artifact, needed by --select-node.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Add the representative keyword of these tree nodes to the query.
    #[arg(long = "select-node", value_delimiter = ',')]
    select_node: Vec<usize>,
    /// fixture or remote.
    #[arg(long, default_value = ProviderConfig::FIXTURE)]
    provider: String,
    /// Directory of per-region fixture files.
    #[arg(long, default_value = "fixtures/providers")]
    fixtures: PathBuf,
    /// photo_search or place_search.
    #[arg(long, default_value_t = ProviderMode::default())]
    mode: ProviderMode,
    /// keyword_relevance, photo_count or review_score.
    #[arg(long, default_value_t = RankingMode::default())]
    ranking: RankingMode,
    #[arg(long, default_value_t = DEFAULT_RADIUS_M)]
    radius_m: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_NEARBY)]
    min_nearby: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_RELEVANCE)]
    min_relevance: f64,
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    limit: usize,
    /// Output directory for spots.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// TOML service config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus manifest, overriding the config.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Listen address, overriding the config and PHOTOTRAIL_LISTEN.
    #[arg(long)]
    listen: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2581)]
    photos: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Manifest path to write.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_build(args: &BuildArgs) -> Result<(), CliError> {
    let params = args.pipeline.params()?;
    let mut corpus = load_corpus(&args.manifest).map_err(data)?;
    if let Some(sidecar) = &args.sidecar {
        let recognizer = FixtureRecognizer::from_path(sidecar).map_err(data)?;
        corpus = corpus.retag(&recognizer).map_err(data)?;
    }
    if corpus.n() == 0 {
        eprintln!(
            "warning: {} has no photos; writing an empty tree",
            args.manifest.display()
        );
    }
    let out = run_pipeline(&corpus, &params).map_err(data)?;
    let paths = PipelineArtifacts::in_dir(&args.out);
    write_json(&paths.corpus, &out.corpus.to_manifest_value()).map_err(data)?;
    write_json(&paths.graph, &out.graph.export()).map_err(data)?;
    write_json(&paths.tree, &out.tree).map_err(data)?;

    let s = out.summary();
    println!("photos (n)      {}", s.n);
    println!("keywords (m)    {}", s.m);
    println!("edges           {}", s.edges);
    println!("clusters        {}", s.clusters);
    println!("root            {}", s.root.as_deref().unwrap_or("-"));
    println!("tree            {}", paths.tree.display());
    Ok(())
}

fn query_keywords(args: &SpotsArgs) -> Result<Vec<String>, CliError> {
    let mut keywords = args.keywords.clone();
    if !args.select_node.is_empty() {
        let path = args
            .tree
            .as_deref()
            .ok_or_else(|| CliError::Usage("--select-node needs --tree".into()))?;
        let tree: ExplorationTree = read_json(path).map_err(data)?;
        for &id in &args.select_node {
            let node = tree.node(id).map_err(|e| CliError::Usage(e.to_string()))?;
            keywords.push(node.representative.clone());
        }
    }
    Ok(keywords)
}

fn print_spots(spots: &[Spot]) {
    println!(
        "{:>4}  {:<28} {:<32} {:>6} {:>9} {:>6}",
        "rank", "spot", "name", "photos", "relevance", "review"
    );
    for (i, s) in spots.iter().enumerate() {
        let review = s.review_score.map_or("-".to_string(), |r| format!("{r:.1}"));
        println!(
            "{:>4}  {:<28} {:<32} {:>6} {:>9.3} {:>6}",
            i + 1,
            s.spot_id,
            s.name,
            s.nearby_count,
            s.relevance,
            review
        );
    }
}

fn cmd_spots(args: &SpotsArgs) -> Result<(), CliError> {
    let params = SpotParams {
        radius_m: args.radius_m,
        min_nearby: args.min_nearby,
        min_relevance: args.min_relevance,
        limit: args.limit,
    };
    params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let keywords = query_keywords(args)?;
    let query =
        SpotQuery::new(&args.region, &keywords, args.mode, args.ranking).map_err(|e| CliError::Usage(e.to_string()))?;
    let provider_config = ProviderConfig {
        name: args.provider.clone(),
        fixtures: args.fixtures.clone(),
    };
    if ![ProviderConfig::FIXTURE, ProviderConfig::REMOTE].contains(&args.provider.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown provider `{}`, expected fixture or remote",
            args.provider
        )));
    }
    let provider = build_provider(&provider_config).map_err(|e| match e {
        ServerError::Config(e) => CliError::Usage(e.to_string()),
        other => CliError::Provider(other.to_string()),
    })?;
    let spots = search_spots(&query, provider.as_ref(), &params).map_err(|e| match e {
        SpotError::InvalidQuery(m) => CliError::Usage(m),
        SpotError::Provider(e) => CliError::Provider(e.to_string()),
    })?;
    let path = PipelineArtifacts::in_dir(&args.out).spots;
    write_json(&path, &spots).map_err(data)?;
    print_spots(&spots);
    println!("wrote {} spots to {}", spots.len(), path.display());
    Ok(())
}

fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => ServiceConfig::load(path).map_err(|e| CliError::Usage(e.to_string()))?,
        None => {
            let mut c = ServiceConfig::default();
            c.apply_env();
            c
        }
    };
    if let Some(manifest) = &args.manifest {
        config.corpus = manifest.clone();
    }
    if let Some(listen) = &args.listen {
        config.listen = listen.clone();
    }
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();

    let listen = config.listen.clone();
    let state = Arc::new(AppState::from_config(config).map_err(|e| match e {
        ServerError::Config(e) => CliError::Usage(e.to_string()),
        ServerError::Provider(e) => CliError::Provider(e.to_string()),
        other => data(other),
    })?);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(data)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&listen)
            .await
            .map_err(|e| data(format!("cannot listen on {listen}: {e}")))?;
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        phototrail_server::serve(state, listener, shutdown).await.map_err(data)
    })
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let corpus = synthetic_corpus(args.photos, args.seed);
    write_json(&args.out, &corpus.to_manifest_value()).map_err(data)?;
    println!(
        "wrote {} photos, {} keywords to {}",
        corpus.n(),
        corpus.m(),
        display(&args.out)
    );
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Spots(a) => cmd_spots(a),
        Command::Serve(a) => cmd_serve(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
