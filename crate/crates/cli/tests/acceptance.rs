//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use phototrail_core::artifact::write_json;
use phototrail_core::spots::{aggregate_spots, rank_spots, GeoPhoto};
use phototrail_core::synthetic::synthetic_corpus;
use phototrail_core::tree::{select_photo_nodes, ScoreMode};
use phototrail_core::{
    build_graph, build_vectors, haversine_m, load_corpus, run_pipeline, NodeRole, PhotoCorpus, PhotoRecord,
    PipelineParams, RankingMode, Spot, SpotParams, TagAssignment,
};
use phototrail_server::{AppState, ServiceConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type MakeRequest<'a> = Box<dyn Fn(usize) -> reqwest::blocking::RequestBuilder + 'a>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phototrail"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

// ---------------------------------------------------------------------------
// random corpora

/// photo_id -> keyword -> confidence, photo ids in sorted order.
type Raw = Vec<(String, BTreeMap<String, f64>)>;

fn random_raw(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Raw {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=max_m);
    let density = rng.random_range(0.05..0.5);
    (0..n)
        .map(|p| {
            let mut tags = BTreeMap::new();
            for k in 0..m {
                if rng.random_bool(density) {
                    let c: f64 = rng.random_range(0.0..=1.0);
                    if c > 0.0 {
                        tags.insert(format!("k{k:02}"), c);
                    }
                }
            }
            (format!("p{p:03}"), tags)
        })
        .collect()
}

fn corpus_of(raw: &Raw) -> PhotoCorpus {
    let photos = raw
        .iter()
        .map(|(id, tags)| {
            let tags = tags.iter().map(|(k, &c)| TagAssignment::new(k, c).unwrap()).collect();
            PhotoRecord::new(id.clone(), format!("{id}.jpg"), tags)
        })
        .collect();
    PhotoCorpus::new(photos).unwrap()
}

fn vocabulary(raw: &Raw) -> Vec<String> {
    raw.iter()
        .flat_map(|(_, t)| t.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Dense all-pairs inner products, thresholded.
fn oracle_edges(raw: &Raw, threshold: f64) -> BTreeMap<(String, String), f64> {
    let vocab = vocabulary(raw);
    let mut edges = BTreeMap::new();
    for (i, a) in vocab.iter().enumerate() {
        for b in &vocab[i + 1..] {
            let dot: f64 = raw
                .iter()
                .map(|(_, t)| t.get(a).copied().unwrap_or(0.0) * t.get(b).copied().unwrap_or(0.0))
                .sum();
            if dot > threshold {
                edges.insert((a.clone(), b.clone()), dot);
            }
        }
    }
    edges
}

fn graph_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut total_edges = 0;
    for case in 0..100 {
        let raw = random_raw(&mut rng, 50, 30);
        let corpus = corpus_of(&raw);
        let graph = build_graph(build_vectors(&corpus), 0.1).map_err(|e| e.to_string())?;
        let expected = oracle_edges(&raw, 0.1);
        let got: BTreeMap<(String, String), f64> = graph
            .edges()
            .iter()
            .map(|e| {
                (
                    (graph.keyword(e.a).to_string(), graph.keyword(e.b).to_string()),
                    e.weight,
                )
            })
            .collect();
        ensure(got.keys().eq(expected.keys()), || {
            format!("case {case}: edge sets differ")
        })?;
        for (k, w) in &expected {
            ensure((got[k] - w).abs() <= 1e-9, || {
                format!("case {case}: weight {k:?} {} vs {w}", got[k])
            })?;
        }
        let vocab = vocabulary(&raw);
        ensure(graph.len() == vocab.len(), || format!("case {case}: vertex count"))?;
        total_edges += expected.len();
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("100 corpora, {total_edges} edges, {elapsed:.2?}"))
}

fn default_constants() -> Outcome {
    let config = ServiceConfig::from_toml_str("").map_err(|e| e.to_string())?;
    let p = &config.pipeline;
    ensure(p.threshold == 0.1, || format!("threshold {}", p.threshold))?;
    ensure(p.photos_per_node == 4, || {
        format!("photos_per_node {}", p.photos_per_node)
    })?;
    ensure(p.child_min_appear == 5, || {
        format!("child_min_appear {}", p.child_min_appear)
    })?;
    ensure(*p == PipelineParams::default(), || {
        "config and library defaults differ".into()
    })?;

    let help = bin().args(["build", "--help"]).output().map_err(|e| e.to_string())?;
    let help = String::from_utf8_lossy(&help.stdout);
    for (flag, default) in [
        ("--threshold", "0.1"),
        ("--photos-per-node", "4"),
        ("--child-min-appear", "5"),
    ] {
        let line = help
            .lines()
            .skip_while(|l| !l.contains(flag))
            .take(3)
            .collect::<String>();
        ensure(line.contains(&format!("[default: {default}]")), || {
            format!("{flag} help lacks default {default}")
        })?;
    }
    Ok("threshold 0.1, photos per node 4, child floor 5 (config and CLI)".into())
}

fn oracle_photo_nodes(raw: &Raw, members: &[String], mode: ScoreMode, limit: usize) -> Vec<(String, f64)> {
    // statistics from the raw data, photos in id order
    let mut appear: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total: BTreeMap<&str, f64> = BTreeMap::new();
    for (_, tags) in raw {
        for (k, &c) in tags {
            *appear.entry(k).or_default() += 1;
            *total.entry(k).or_default() += c;
        }
    }
    let mut scored: Vec<(String, f64)> = raw
        .iter()
        .filter_map(|(id, tags)| {
            let mut score: Option<f64> = None;
            for k in members {
                if let Some(&c) = tags.get(k) {
                    let conf = match mode {
                        ScoreMode::PerPhoto => c,
                        ScoreMode::CorpusAggregate => total[k.as_str()],
                    };
                    *score.get_or_insert(0.0) += conf / appear[k.as_str()] as f64;
                }
            }
            score.map(|s| (id.clone(), s))
        })
        .collect();
    // insertion sort: descending score, then ascending id
    let mut ordered: Vec<(String, f64)> = Vec::new();
    for item in scored.drain(..) {
        let pos = ordered
            .iter()
            .position(|o| item.1 > o.1 || (item.1 == o.1 && item.0 < o.0))
            .unwrap_or(ordered.len());
        ordered.insert(pos, item);
    }
    ordered.truncate(limit);
    ordered
}

fn eq1_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checks = 0;
    for case in 0..100 {
        let raw = random_raw(&mut rng, 100, 30);
        let corpus = corpus_of(&raw);
        let vocab = vocabulary(&raw);
        if vocab.is_empty() {
            continue;
        }
        for _ in 0..5 {
            let members: Vec<String> = vocab.iter().filter(|_| rng.random_bool(0.3)).cloned().collect();
            let limit = rng.random_range(1..=8);
            for mode in [ScoreMode::PerPhoto, ScoreMode::CorpusAggregate] {
                let got: Vec<(String, f64)> = select_photo_nodes(&members, &corpus, mode, limit)
                    .into_iter()
                    .map(|p| (p.photo_id, p.score))
                    .collect();
                let expected = oracle_photo_nodes(&raw, &members, mode, limit);
                ensure(got == expected, || {
                    format!("case {case} {mode:?}: {got:?} vs {expected:?}")
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} node selections, exact"))
}

fn clustering() -> Outcome {
    let corpus = load_corpus(fixtures().join("animal/manifest.json")).map_err(|e| e.to_string())?;
    let out = run_pipeline(&corpus, &PipelineParams::default()).map_err(|e| e.to_string())?;
    let find = |k: &str| out.clusters.iter().find(|c| c.contains(k)).unwrap();
    ensure(find("cat").cluster_id == find("dog").cluster_id, || {
        "cat and dog apart".into()
    })?;
    let animal = find("animal");
    ensure(animal.is_key && animal.members == ["animal"], || {
        format!("animal cluster {animal:?}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..100 {
        let raw = random_raw(&mut rng, 50, 30);
        let params = PipelineParams {
            key_min_degree: rng.random_range(1..=4),
            key_quantile: rng.random_range(0.5..=1.0),
            alpha: rng.random_range(0.0..=1.0),
            merge_threshold: rng.random_range(0.05..0.6),
            ..Default::default()
        };
        let out = run_pipeline(&corpus_of(&raw), &params).map_err(|e| e.to_string())?;
        let mut seen = BTreeSet::new();
        for c in &out.clusters {
            for m in &c.members {
                ensure(seen.insert(m.clone()), || format!("case {case}: {m} in two clusters"))?;
                let key = out.key_nodes.contains(m);
                ensure(key == c.is_key, || {
                    format!("case {case}: {m} key={key} in cluster is_key={}", c.is_key)
                })?;
            }
            ensure(!c.is_key || c.members.len() == 1, || {
                format!("case {case}: key cluster {:?}", c.members)
            })?;
        }
        let vertices: BTreeSet<String> = out.graph.vertices().iter().map(|v| v.keyword().to_string()).collect();
        ensure(seen == vertices, || {
            format!("case {case}: clusters do not cover the vertices")
        })?;
    }
    Ok("animal fixture {cat,dog} + key {animal}; 100 random graphs partitioned".into())
}

fn tree_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut built = 0;
    for case in 0..100 {
        let raw = random_raw(&mut rng, 50, 30);
        let params = PipelineParams {
            key_min_degree: rng.random_range(1..=4),
            hub_min_edges: rng.random_range(0..=3),
            merge_threshold: rng.random_range(0.05..0.6),
            ..Default::default()
        };
        let out = run_pipeline(&corpus_of(&raw), &params).map_err(|e| e.to_string())?;
        let tree = &out.tree;
        if tree.nodes.is_empty() {
            continue;
        }
        built += 1;
        let roots: Vec<_> = tree.nodes.iter().filter(|n| n.role == NodeRole::Root).collect();
        ensure(roots.len() == 1, || format!("case {case}: {} roots", roots.len()))?;
        let root = roots[0];
        ensure(root.parent.is_none() && root.depth == 0, || {
            format!("case {case}: root has a parent")
        })?;

        let g = &out.graph;
        let max_degree = (0..g.len()).map(|v| g.degree_of(v)).max().unwrap_or(0);
        ensure(root.members.iter().any(|m| g.degree(m).unwrap() == max_degree), || {
            format!("case {case}: root lacks a max-degree vertex")
        })?;

        let owner: BTreeMap<&str, usize> = tree
            .nodes
            .iter()
            .flat_map(|n| n.members.iter().map(move |m| (m.as_str(), n.id)))
            .collect();
        let mut to_root: BTreeMap<usize, usize> = BTreeMap::new();
        for e in g.edges() {
            let (a, b) = (owner[g.keyword(e.a)], owner[g.keyword(e.b)]);
            if a != b && (a == root.id || b == root.id) {
                *to_root.entry(if a == root.id { b } else { a }).or_default() += 1;
            }
        }
        for n in tree.nodes.iter().filter(|n| n.id != root.id) {
            let w = to_root.get(&n.id).copied().unwrap_or(0);
            let hub = w > params.hub_min_edges;
            ensure(hub == (n.role == NodeRole::Hub), || {
                format!("case {case}: node {} w={w} role {:?}", n.id, n.role)
            })?;
            if hub {
                ensure(n.parent == Some(root.id), || {
                    format!("case {case}: hub {} not under root", n.id)
                })?;
            }
        }

        for n in &tree.nodes {
            let (mut cur, mut steps) = (n, 0);
            while let Some(p) = cur.parent {
                let parent = &tree.nodes[p];
                ensure(parent.children.contains(&cur.id), || {
                    format!("case {case}: {p} does not list {}", cur.id)
                })?;
                cur = parent;
                steps += 1;
                ensure(steps <= tree.nodes.len(), || {
                    format!("case {case}: cycle through {}", n.id)
                })?;
            }
            ensure(cur.id == root.id, || {
                format!("case {case}: {} does not reach the root", n.id)
            })?;
            ensure(n.depth == steps, || {
                format!("case {case}: depth {} vs {steps}", n.depth)
            })?;
        }
    }
    Ok(format!("{built} non-empty trees: one root, strict hub rule, acyclic"))
}

// ---------------------------------------------------------------------------
// spots

fn oracle_aggregate(photos: &[GeoPhoto], params: &SpotParams) -> Vec<Spot> {
    let mut photos: Vec<&GeoPhoto> = photos.iter().collect();
    photos.sort_by(|a, b| a.photo_id.cmp(&b.photo_id));
    let near = |a: &GeoPhoto, b: &GeoPhoto| haversine_m(a.point(), b.point()) <= params.radius_m;
    let mut assigned = vec![false; photos.len()];
    let mut spots = Vec::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for i in (0..photos.len()).filter(|&i| !assigned[i]) {
            let count = (0..photos.len())
                .filter(|&j| !assigned[j] && near(photos[i], photos[j]))
                .count();
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((i, count));
            }
        }
        let Some((seed, _)) = best else { break };
        let members: Vec<usize> = (0..photos.len())
            .filter(|&j| !assigned[j] && near(photos[seed], photos[j]))
            .collect();
        for &j in &members {
            assigned[j] = true;
        }
        let k = members.len() as f64;
        let mean = |f: &dyn Fn(&GeoPhoto) -> f64| members.iter().map(|&j| f(photos[j])).sum::<f64>() / k;
        let relevance = mean(&|p| p.relevance);
        if members.len() >= params.min_nearby && relevance >= params.min_relevance {
            let seed = photos[seed];
            spots.push(Spot {
                spot_id: format!("photo:{}", seed.photo_id),
                name: if seed.title.trim().is_empty() {
                    seed.photo_id.clone()
                } else {
                    seed.title.clone()
                },
                lat: mean(&|p| p.lat),
                lng: mean(&|p| p.lng),
                nearby_count: members.len(),
                relevance,
                review_score: None,
                details: None,
                member_photo_ids: members.iter().map(|&j| photos[j].photo_id.clone()).collect(),
            });
        }
    }
    spots
}

fn oracle_rank(spots: &[Spot], mode: RankingMode) -> Vec<Spot> {
    let better = |a: &Spot, b: &Spot| -> bool {
        let key = |s: &Spot| match mode {
            RankingMode::ReviewScore => s.review_score.unwrap_or(f64::NEG_INFINITY),
            RankingMode::KeywordRelevance => s.relevance,
            RankingMode::PhotoCount => s.nearby_count as f64,
        };
        let (ka, kb) = (key(a), key(b));
        ka > kb || (ka == kb && a.spot_id < b.spot_id)
    };
    let mut rest: Vec<Spot> = spots.to_vec();
    let mut out = Vec::new();
    while !rest.is_empty() {
        let mut best = 0;
        for i in 1..rest.len() {
            if better(&rest[i], &rest[best]) {
                best = i;
            }
        }
        out.push(rest.remove(best));
    }
    out
}

fn random_geo_photos(rng: &mut ChaCha8Rng) -> Vec<GeoPhoto> {
    let n = rng.random_range(0..=200);
    let centers: Vec<(f64, f64)> = (0..rng.random_range(1..=6))
        .map(|_| (43.0 + rng.random_range(0.0..0.05), 141.0 + rng.random_range(0.0..0.05)))
        .collect();
    (0..n)
        .map(|i| {
            let (lat, lng) = centers[rng.random_range(0..centers.len())];
            GeoPhoto {
                photo_id: format!("g{:04}", rng.random_range(0..10_000)),
                lat: lat + rng.random_range(-0.004..0.004),
                lng: lng + rng.random_range(-0.004..0.004),
                title: format!("photo {i}"),
                tags: vec![],
                relevance: [0.25, 0.5, 0.75, 1.0][rng.random_range(0..4)],
            }
        })
        .collect()
}

/// A background service on an ephemeral port; dropped with the returned guard.
struct Running {
    port: u16,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl Running {
    fn start(state: AppState) -> Self {
        let (port_tx, port_rx) = std::sync::mpsc::channel();
        let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
        let state = Arc::new(state);
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                port_tx.send(listener.local_addr().unwrap().port()).unwrap();
                phototrail_server::serve(state, listener, async {
                    let _ = stop_rx.await;
                })
                .await
                .unwrap();
            });
        });
        let port = port_rx.recv().unwrap();
        Self {
            port,
            stop: Some(stop_tx),
            thread: Some(thread),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("http://127.0.0.1:{}{path}", self.port)
    }
}

impl Drop for Running {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn micro_state() -> Result<AppState, String> {
    let mut config = ServiceConfig {
        corpus: fixtures().join("micro/manifest.json"),
        ..Default::default()
    };
    config.provider.fixtures = fixtures().join("providers");
    AppState::from_config(config).map_err(|e| e.to_string())
}

fn spot_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut promoted = 0;
    for case in 0..100 {
        let photos = random_geo_photos(&mut rng);
        let params = SpotParams {
            radius_m: rng.random_range(100.0..600.0),
            min_nearby: rng.random_range(1..=6),
            min_relevance: [0.25, 0.5, 0.75][rng.random_range(0..3)],
            limit: 20,
        };
        let mut unique = photos.clone();
        unique.sort_by(|a, b| a.photo_id.cmp(&b.photo_id));
        unique.dedup_by(|a, b| a.photo_id == b.photo_id);
        let got = aggregate_spots(&photos, &params);
        let expected = oracle_aggregate(&unique, &params);
        ensure(got == expected, || format!("case {case}: aggregation differs"))?;
        promoted += got.len();
        for mode in RankingMode::ALL {
            let mut with_scores = got.clone();
            for (i, s) in with_scores.iter_mut().enumerate() {
                s.review_score = (i % 3 != 0).then_some((i % 5) as f64);
            }
            let ranked = rank_spots(with_scores.clone(), *mode);
            ensure(ranked == oracle_rank(&with_scores, *mode), || {
                format!("case {case}: {mode} order differs")
            })?;
        }
    }

    // the same query through the CLI and through the service
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let providers = fixtures().join("providers");
    let o = bin()
        .args([
            "spots",
            "--region",
            "Hokkaido",
            "--keywords",
            "lake",
            "--fixtures",
            s(&providers),
            "--out",
            s(dir.path()),
        ])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
    let cli = std::fs::read_to_string(dir.path().join("spots.json")).map_err(|e| e.to_string())?;

    let server = Running::start(micro_state()?);
    let client = reqwest::blocking::Client::new();
    let tree: Value = client
        .get(server.url("/api/tree"))
        .send()
        .and_then(|r| r.json())
        .map_err(|e| e.to_string())?;
    let lake = tree["nodes"]
        .as_array()
        .and_then(|ns| ns.iter().find(|n| n["representative"] == "lake"))
        .ok_or("no lake node")?["id"]
        .clone();
    client
        .post(server.url("/api/sessions/acceptance/selection"))
        .json(&json!({ "node_id": lake }))
        .send()
        .map_err(|e| e.to_string())?;
    let service = client
        .post(server.url("/api/spots"))
        .json(&json!({ "session_id": "acceptance", "region": "Hokkaido" }))
        .send()
        .and_then(|r| r.text())
        .map_err(|e| e.to_string())?;
    ensure(service == cli, || "CLI and service spot lists differ".into())?;
    let spots: Vec<Spot> = serde_json::from_str(&cli).map_err(|e| e.to_string())?;
    ensure(!spots.is_empty(), || "Hokkaido + lake returned no spots".into())?;
    Ok(format!(
        "100 fixtures, {promoted} spots exact; Hokkaido+lake = {} spots, CLI == service",
        spots.len()
    ))
}

fn p99(mut samples: Vec<Duration>) -> Duration {
    samples.sort();
    let idx = ((samples.len() as f64) * 0.99).ceil() as usize - 1;
    samples[idx]
}

fn latency() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = dir.path().join("synthetic.json");
    let corpus = synthetic_corpus(2581, 7);
    write_json(&manifest, &corpus.to_manifest_value()).map_err(|e| e.to_string())?;
    let mut config = ServiceConfig {
        corpus: manifest,
        ..Default::default()
    };
    config.provider.fixtures = fixtures().join("providers");
    let state = AppState::from_config(config).map_err(|e| e.to_string())?;
    let model = state.model();
    let root = model.output.tree.root().ok_or("empty tree")?.id;
    let node_ids: Vec<usize> = model.output.tree.nodes.iter().map(|n| n.id).collect();
    let vocab: Vec<String> = model.output.tree.vocabulary().into_iter().map(str::to_string).collect();
    let photo_id = corpus.photos()[0].photo_id.clone();
    drop(model);

    let server = Running::start(state);
    let client = reqwest::blocking::Client::new();
    let timed = |req: reqwest::blocking::RequestBuilder| -> Result<Duration, String> {
        let start = Instant::now();
        let resp = req.send().map_err(|e| e.to_string())?;
        let status = resp.status();
        resp.bytes().map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        ensure(status.is_success(), || format!("status {status}"))?;
        Ok(elapsed)
    };

    let mut report = Vec::new();
    let mut worst = Duration::ZERO;
    let endpoints: Vec<(&str, MakeRequest)> = vec![
        ("GET /api/tree", Box::new(|_| client.get(server.url("/api/tree")))),
        (
            "GET children",
            Box::new(|_| client.get(server.url(&format!("/api/nodes/{root}/children")))),
        ),
        (
            "GET nodes?query",
            Box::new(|i| client.get(server.url(&format!("/api/nodes?query={}", &vocab[i % vocab.len()][..2])))),
        ),
        (
            "POST selection",
            Box::new(|i| {
                client
                    .post(server.url("/api/sessions/load/selection"))
                    .json(&json!({ "node_id": node_ids[i % node_ids.len()] }))
            }),
        ),
        (
            "GET session",
            Box::new(|_| client.get(server.url("/api/sessions/load"))),
        ),
        (
            "DELETE selection",
            Box::new(|i| {
                client.delete(server.url(&format!("/api/sessions/load/selection/{}", vocab[i % vocab.len()])))
            }),
        ),
        (
            "POST spots",
            Box::new(|i| {
                let mode = RankingMode::ALL[i % 3];
                client.post(server.url("/api/spots")).json(
                    &json!({ "session_id": "load", "region": "Hokkaido", "keywords": ["lake"], "ranking_mode": mode }),
                )
            }),
        ),
        (
            "GET photo",
            Box::new(|_| client.get(server.url(&format!("/api/photos/{photo_id}")))),
        ),
        (
            "POST reload",
            Box::new(|_| client.post(server.url("/api/admin/reload"))),
        ),
    ];
    for (name, make) in &endpoints {
        let samples = (0..100).map(|i| timed(make(i))).collect::<Result<Vec<_>, _>>()?;
        let p = p99(samples);
        worst = worst.max(p);
        report.push(format!("{name} {:.1}ms", p.as_secs_f64() * 1e3));
        ensure(p < Duration::from_millis(1000), || format!("{name} p99 {p:?}"))?;
    }
    Ok(format!(
        "2,581 photos, p99 worst {:.1}ms [{}]",
        worst.as_secs_f64() * 1e3,
        report.join(", ")
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let synth = dir.path().join("synth.json");
    let o = bin()
        .args(["synth", "--photos", "600", "--seed", "5", "--out", s(&synth)])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || "synth failed".into())?;
    let providers = fixtures().join("providers");
    let manifests = [
        fixtures().join("animal/manifest.json"),
        fixtures().join("micro/manifest.json"),
        synth,
    ];
    for manifest in &manifests {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("run{run}"));
            let build = bin()
                .args(["build", "--manifest", s(manifest), "--out", s(&out)])
                .output()
                .map_err(|e| e.to_string())?;
            ensure(build.status.success(), || {
                String::from_utf8_lossy(&build.stderr).into_owned()
            })?;
            let spots = bin()
                .args([
                    "spots",
                    "--region",
                    "Hokkaido",
                    "--keywords",
                    "lake,forest",
                    "--ranking",
                    "photo_count",
                ])
                .args(["--fixtures", s(&providers), "--out", s(&out)])
                .output()
                .map_err(|e| e.to_string())?;
            ensure(spots.status.success(), || {
                String::from_utf8_lossy(&spots.stderr).into_owned()
            })?;
            let files =
                ["graph.json", "tree.json", "spots.json"].map(|f| std::fs::read(out.join(f)).unwrap_or_default());
            outputs.push(files);
        }
        ensure(outputs[0] == outputs[1], || {
            format!("{} differs between runs", manifest.display())
        })?;
    }
    Ok("graph, tree and spot JSON byte-identical across runs (3 manifests)".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("graph oracle", graph_oracle),
        ("default constants", default_constants),
        ("photo scoring oracle", eq1_oracle),
        ("clustering behaviour", clustering),
        ("tree invariants", tree_invariants),
        ("spot pipeline oracle", spot_oracle),
        ("latency p99 < 1000 ms", latency),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
