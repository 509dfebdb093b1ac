use std::collections::BTreeSet;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use phototrail_core::artifact::to_json_string;
use phototrail_core::ingest::normalize_keyword;
use phototrail_core::spots::{ProviderMode, RankingMode, SpotError};
use phototrail_core::tree::{expand_node, find_nodes_by_keyword};
use phototrail_core::{search_spots, SpotQuery, TreeNode};
use serde::{Deserialize, Serialize};

use crate::{photo_path, ApiError, AppState, Model};

type Shared = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/tree", get(get_tree))
        .route("/api/nodes", get(search_nodes))
        .route("/api/nodes/{id}/children", get(expand))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/selection", post(select))
        .route("/api/sessions/{id}/selection/{keyword}", delete(deselect))
        .route("/api/spots", post(spots))
        .route("/api/photos/{id}", get(photo))
        .route("/api/admin/reload", post(reload))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .with_state(state)
}

fn json_body(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn json<T: Serialize + ?Sized>(value: &T) -> Response {
    json_body(to_json_string(value))
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::validation(e.body_text()))
}

fn node<'a>(model: &'a Model, id: &str) -> Result<&'a TreeNode, ApiError> {
    id.parse::<usize>()
        .ok()
        .and_then(|id| model.output.tree.nodes.get(id))
        .ok_or_else(|| ApiError::not_found(format!("unknown node {id}")))
}

async fn get_tree(State(state): Shared) -> Response {
    json_body(state.model().tree_json.clone())
}

#[derive(Deserialize)]
struct ChildrenParams {
    min_appear: Option<usize>,
}

async fn expand(
    State(state): Shared,
    Path(id): Path<String>,
    Query(q): Query<ChildrenParams>,
) -> Result<Response, ApiError> {
    let model = state.model();
    let node = node(&model, &id)?;
    let floor = q.min_appear.unwrap_or(state.config().pipeline.child_min_appear);
    let children = expand_node(&model.output.tree, node.id, floor).map_err(|e| ApiError::not_found(e.to_string()))?;
    Ok(json(&children))
}

#[derive(Deserialize)]
struct SearchParams {
    #[serde(default)]
    query: String,
}

async fn search_nodes(State(state): Shared, Query(q): Query<SearchParams>) -> Response {
    let model = state.model();
    let tree = &model.output.tree;
    let nodes: Vec<&TreeNode> = find_nodes_by_keyword(tree, &q.query)
        .into_iter()
        .map(|id| &tree.nodes[id])
        .collect();
    json(&nodes)
}

async fn get_session(State(state): Shared, Path(id): Path<String>) -> Response {
    let session = state.sessions().get_or_create(&id);
    let snapshot = session.lock().clone();
    json(&snapshot)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Selection {
    node_id: Option<usize>,
    photo_id: Option<String>,
}

/// Node selection adds the node's representative. Photo selection adds the
/// photo's keywords that are members of its node: `node_id` if given,
/// otherwise every node showing the photo as a photo node.
fn selection_keywords(model: &Model, sel: &Selection) -> Result<Vec<String>, ApiError> {
    let tree = &model.output.tree;
    let node = |id: usize| {
        tree.node(id)
            .map_err(|_| ApiError::not_found(format!("unknown node {id}")))
    };
    match (&sel.photo_id, sel.node_id) {
        (None, None) => Err(ApiError::validation("expected node_id or photo_id")),
        (None, Some(id)) => Ok(vec![node(id)?.representative.clone()]),
        (Some(photo_id), node_id) => {
            let photo = model
                .output
                .corpus
                .photo(photo_id)
                .ok_or_else(|| ApiError::not_found(format!("unknown photo {photo_id}")))?;
            let members: BTreeSet<&str> = match node_id {
                Some(id) => node(id)?.members.iter().map(String::as_str).collect(),
                None => {
                    let nodes: Vec<&TreeNode> = tree.nodes_with_photo(photo_id).collect();
                    if nodes.is_empty() {
                        return Err(ApiError::validation(format!(
                            "photo {photo_id} is not a photo node; pass node_id"
                        )));
                    }
                    nodes
                        .iter()
                        .flat_map(|n| n.members.iter().map(String::as_str))
                        .collect()
                }
            };
            Ok(photo
                .tags
                .iter()
                .filter(|t| members.contains(t.keyword.as_str()))
                .map(|t| t.keyword.clone())
                .collect())
        }
    }
}

async fn select(
    State(state): Shared,
    Path(id): Path<String>,
    payload: Result<Json<Selection>, JsonRejection>,
) -> Result<Response, ApiError> {
    let sel = body(payload)?;
    let model = state.model();
    let keywords = selection_keywords(&model, &sel)?;
    let session = state.sessions().get_or_create(&id);
    let mut session = session.lock();
    session.selected_keywords.extend(keywords);
    if let (Some(node_id), None) = (sel.node_id, &sel.photo_id) {
        session.selected_node_ids.insert(node_id);
    }
    Ok(json(&*session))
}

async fn deselect(State(state): Shared, Path((id, keyword)): Path<(String, String)>) -> Response {
    let model = state.model();
    let session = state.sessions().get_or_create(&id);
    let mut session = session.lock();
    if let Some(keyword) = normalize_keyword(&keyword) {
        session.selected_keywords.shift_remove(&keyword);
        let tree = &model.output.tree;
        session
            .selected_node_ids
            .retain(|&n| tree.nodes.get(n).is_some_and(|n| n.representative != keyword));
    }
    json(&*session)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpotRequest {
    session_id: String,
    region: String,
    #[serde(default)]
    provider_mode: ProviderMode,
    #[serde(default)]
    ranking_mode: RankingMode,
    /// Used instead of the session's selection when non-empty.
    #[serde(default)]
    keywords: Vec<String>,
    limit: Option<usize>,
}

async fn spots(State(state): Shared, payload: Result<Json<SpotRequest>, JsonRejection>) -> Result<Response, ApiError> {
    let req = body(payload)?;
    let keywords = if req.keywords.is_empty() {
        let session = state.sessions().get_or_create(&req.session_id);
        let keywords = session.lock().keywords();
        keywords
    } else {
        req.keywords
    };
    if keywords.is_empty() {
        return Err(ApiError::validation("no keywords selected"));
    }
    let query = SpotQuery::new(&req.region, &keywords, req.provider_mode, req.ranking_mode)
        .map_err(|e| ApiError::validation(e.to_string()))?;
    let mut params = state.config().spots.clone();
    if let Some(limit) = req.limit {
        params.limit = limit;
    }
    params.validate().map_err(|e| ApiError::validation(e.to_string()))?;

    let provider = state.provider();
    let result = tokio::task::spawn_blocking(move || search_spots(&query, provider.as_ref(), &params))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    match result {
        Ok(spots) => Ok(json(&spots)),
        Err(SpotError::InvalidQuery(m)) => Err(ApiError::validation(m)),
        Err(SpotError::Provider(e)) => Err(ApiError::provider(e.to_string())),
    }
}

fn content_type(path: &std::path::Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("png") => "image/png",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        _ => "application/octet-stream",
    }
}

/// The image bytes when the photo root holds the asset, otherwise the
/// photo record (with its URI) as JSON.
async fn photo(State(state): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let model = state.model();
    let record = model
        .output
        .corpus
        .photo(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown photo {id}")))?;
    if let Some(path) = state
        .config()
        .photo_root
        .as_deref()
        .and_then(|root| photo_path(root, &record.uri))
    {
        if let Ok(bytes) = tokio::fs::read(&path).await {
            return Ok(([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response());
        }
    }
    Ok(json(record))
}

async fn reload(State(state): Shared) -> Result<Response, ApiError> {
    let model = tokio::task::spawn_blocking(move || state.reload())
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::validation(e.to_string()))?;
    Ok(json(&model.output.summary()))
}
