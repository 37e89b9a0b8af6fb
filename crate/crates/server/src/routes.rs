//! Endpoint handlers.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use circos_core::analysis::{distributions, stacked_matrix, synthesized_matrix};
use circos_core::config::{Token, TrackAddr};
use circos_core::dag::layout;
use circos_core::recommend::{History, Recommendation};
use circos_core::render::data::parse_csv;
use circos_core::render::{render_hash, render_svg, BindWarning, DatasetKind, PlotSession, TrackStyle};
use circos_core::retrieval::{structural_search, RetrievalHit, DEFAULT_K};
use circos_core::{parse, CircosConfig, Corpus, CorpusRecord, Recommender, ReferenceDag};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{ApiError, ApiJson, ApiPath, ApiQuery};
use crate::state::{AppState, CorpusState, SessionEntry, SessionHandle};

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

/// Records considered by a corpus-wide DAG.
pub const CORPUS_DAG_LIMIT: usize = 500;

pub fn api() -> Router<Arc<AppState>> {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/corpus/import", post(import_corpus))
        .route("/api/corpus/stats", get(corpus_stats))
        .route("/api/corpus/records", get(list_records))
        .route("/api/corpus/records/{id}", get(get_record).delete(delete_record))
        .route("/api/data", post(upload_data).get(list_data))
        .route("/api/data/{id}", get(get_data).patch(patch_data).delete(delete_data))
        .route("/api/session/{id}", get(get_session))
        .route("/api/session/{id}/config", get(get_config).put(put_config))
        .route("/api/session/{id}/track/{ring}/{position}", put(put_track))
        .route("/api/session/{id}/history", get(get_history))
        .route("/api/recommend", post(recommend))
        .route("/api/recommend/{id}/regenerate", post(regenerate))
        .route("/api/retrieve", post(retrieve))
        .route("/api/dag", get(get_dag))
        .route("/api/dag/complete", post(complete_dag))
        .route("/api/render", post(render))
        .route("/api/export/{file}", get(export))
}

fn k_or_default(k: Option<usize>) -> ApiResult<usize> {
    match k {
        Some(0) => Err(ApiError::bad_request("invalid_k", "k must be at least 1")),
        Some(k) => Ok(k),
        None => Ok(DEFAULT_K),
    }
}

/// Runs blocking provider work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

// ---- health ----

async fn health(State(state): Shared) -> Json<Value> {
    let corpus = state.corpus();
    let tracks: Vec<&str> = Token::vocabulary()
        .into_iter()
        .filter_map(|t| match t {
            Token::Track(k) => Some(k.name()),
            _ => None,
        })
        .collect();
    Json(json!({
        "status": "ok",
        "corpusVersion": corpus.corpus.version(),
        "records": corpus.corpus.len(),
        "vocabulary": {
            "tracks": tracks,
            "structural": ["start", "split", "end"],
            "commands": ["\\recommend", "\\data"],
        },
        "providers": { "embedding": state.provider_names.0, "generation": state.provider_names.1 },
    }))
}

// ---- corpus ----

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RecordView {
    id: String,
    annotation: String,
    config: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    source_meta: Option<Value>,
}

impl From<&CorpusRecord> for RecordView {
    fn from(r: &CorpusRecord) -> Self {
        RecordView {
            id: r.id.clone(),
            annotation: r.annotation.clone(),
            config: r.config.to_bare_string(),
            source_meta: r.source_meta.as_ref().map(|m| json!(m)),
        }
    }
}

/// Applies `edit` to a copy of the corpus, re-indexes, persists and swaps.
async fn rewrite_corpus<T: Send + 'static>(
    state: &Arc<AppState>,
    edit: impl FnOnce(&mut Corpus) -> ApiResult<T> + Send + 'static,
) -> ApiResult<(T, u64)> {
    let _writer = state.corpus_writer.lock().await;
    let current = state.corpus();
    let embedder = state.embedder.clone();
    let path = state.corpus_path.clone();
    let mut corpus = current.corpus.clone();
    let (out, next) = blocking(move || {
        let out = edit(&mut corpus)?;
        if let Some(path) = &path {
            corpus.snapshot(path)?;
        }
        let next = CorpusState::build(corpus, embedder.as_ref())?;
        Ok((out, next))
    })
    .await?;
    let version = next.corpus.version();
    state.swap_corpus(next);
    Ok((out, version))
}

async fn import_corpus(State(state): Shared, headers: HeaderMap, body: Bytes) -> ApiResult<Json<Value>> {
    let csv =
        headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).is_some_and(|ct| ct.starts_with("text/csv"));
    let (report, version) = rewrite_corpus(&state, move |corpus| {
        Ok(if csv { corpus.import_csv(&body)? } else { corpus.import_jsonl(&body)? })
    })
    .await?;
    Ok(Json(json!({
        "accepted": report.accepted,
        "rejected": report.rejected,
        "corpusVersion": version,
    })))
}

async fn corpus_stats(State(state): Shared) -> ApiResult<Json<Value>> {
    let c = state.corpus();
    Ok(Json(json!({
        "corpusVersion": c.corpus.version(),
        "records": c.corpus.len(),
        "distributions": distributions(&c.corpus)?,
        "stacked": stacked_matrix(&c.corpus)?,
        "synthesized": synthesized_matrix(&c.corpus)?,
    })))
}

#[derive(Deserialize)]
struct Page {
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn list_records(State(state): Shared, ApiQuery(page): ApiQuery<Page>) -> Json<Value> {
    let c = state.corpus();
    let records: Vec<RecordView> =
        c.corpus.list(page.offset.unwrap_or(0), page.limit.unwrap_or(50)).into_iter().map(RecordView::from).collect();
    Json(json!({ "total": c.corpus.len(), "corpusVersion": c.corpus.version(), "records": records }))
}

async fn get_record(State(state): Shared, ApiPath(id): ApiPath<String>) -> ApiResult<Json<RecordView>> {
    let c = state.corpus();
    Ok(Json(RecordView::from(c.corpus.get(&id)?)))
}

async fn delete_record(State(state): Shared, ApiPath(id): ApiPath<String>) -> ApiResult<Json<Value>> {
    let (_, version) = rewrite_corpus(&state, move |corpus| {
        corpus.delete(&id)?;
        Ok(())
    })
    .await?;
    Ok(Json(json!({ "deleted": true, "corpusVersion": version })))
}

// ---- sessions ----

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct DatasetSummary {
    id: String,
    name: String,
    kind: DatasetKind,
    rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    marker: Option<String>,
}

fn dataset_summaries(s: &PlotSession) -> Vec<DatasetSummary> {
    s.datasets
        .iter()
        .map(|d| DatasetSummary {
            id: d.id.clone(),
            name: d.name.clone(),
            kind: d.kind(),
            rows: d.data.row_count(),
            marker: d.marker.clone(),
        })
        .collect()
}

fn unbound(s: &PlotSession) -> Vec<TrackAddr> {
    s.config.tracks().filter(|&(a, _)| s.binding(a).is_none()).map(|(a, _)| a).collect()
}

/// Render hash of the session, or the reason it cannot render.
fn hash_of(s: &PlotSession) -> Value {
    match render_svg(s) {
        Ok(svg) => json!(render_hash(&svg)),
        Err(_) => Value::Null,
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RecommendationView {
    id: String,
    query: String,
    config: String,
    explanation: String,
    raw: String,
    attempts: usize,
    seed: Option<u64>,
    references: Vec<Value>,
}

fn recommendation_view(rec: &Recommendation, corpus: &Corpus, hits: Option<&[RetrievalHit]>) -> RecommendationView {
    let references = rec
        .references
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let mut v = json!({ "id": id, "rank": i + 1 });
            if let Ok(r) = corpus.get(id) {
                v["annotation"] = json!(r.annotation);
                v["config"] = json!(r.config.to_bare_string());
            }
            if let Some(h) = hits.and_then(|h| h.iter().find(|h| &h.id == id)) {
                v["distance"] = json!(h.distance);
            }
            v
        })
        .collect();
    RecommendationView {
        id: rec.id.clone(),
        query: rec.query.clone(),
        config: rec.config_string(),
        explanation: rec.explanation.clone(),
        raw: rec.raw.clone(),
        attempts: rec.attempts,
        seed: rec.seed,
        references,
    }
}

fn history_views(h: &History, corpus: &Corpus) -> Vec<RecommendationView> {
    h.entries.iter().map(|r| recommendation_view(r, corpus, None)).collect()
}

async fn session_handle(state: &AppState, id: &str) -> ApiResult<SessionHandle> {
    state.sessions.get_or_create(id)
}

async fn get_session(State(state): Shared, ApiPath(id): ApiPath<String>) -> ApiResult<Json<Value>> {
    let handle = session_handle(&state, &id).await?;
    let entry = handle.lock().await;
    let s = &entry.session;
    let corpus = state.corpus();
    Ok(Json(json!({
        "id": s.id,
        "config": s.config.to_bare_string(),
        "datasets": dataset_summaries(s),
        "bindings": s.bindings,
        "unbound": unbound(s),
        "canvas": s.canvas,
        "history": history_views(&entry.history, &corpus.corpus),
        "renderHash": hash_of(s),
    })))
}

async fn get_config(State(state): Shared, ApiPath(id): ApiPath<String>) -> ApiResult<Json<Value>> {
    let handle = session_handle(&state, &id).await?;
    let entry = handle.lock().await;
    Ok(Json(json!({
        "sessionId": id,
        "config": entry.session.config.to_bare_string(),
        "wrapped": entry.session.config.to_wrapped_string(),
    })))
}

#[derive(Deserialize)]
struct ConfigBody {
    config: String,
}

/// Config text from either `{"config": "..."}` or a plain-text body.
fn config_text(headers: &HeaderMap, body: &[u8]) -> ApiResult<String> {
    let json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|ct| ct.starts_with("application/json"));
    if json {
        serde_json::from_slice::<ConfigBody>(body)
            .map(|b| b.config)
            .map_err(|e| ApiError::bad_request("invalid_json", e.to_string()))
    } else {
        String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("invalid_body", "body is not UTF-8"))
    }
}

/// Writes the session through and reports the refreshed state.
async fn applied(state: &AppState, entry: &SessionEntry, warnings: Vec<BindWarning>) -> ApiResult<Json<Value>> {
    state.sessions.persist(entry).await?;
    let s = &entry.session;
    Ok(Json(json!({
        "sessionId": s.id,
        "config": s.config.to_bare_string(),
        "bindings": s.bindings,
        "warnings": warnings.iter().map(|w| json!({ "code": "no_compatible_dataset", "message": w.to_string(), "detail": w })).collect::<Vec<_>>(),
        "renderHash": hash_of(s),
    })))
}

async fn put_config(
    State(state): Shared,
    ApiPath(id): ApiPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let config = parse(&config_text(&headers, &body)?)?;
    let handle = session_handle(&state, &id).await?;
    let mut entry = handle.lock().await;
    let warnings = entry.session.set_config(config);
    applied(&state, &entry, warnings).await
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct TrackBody {
    dataset_id: Option<String>,
    style: Option<TrackStyle>,
}

async fn put_track(
    State(state): Shared,
    ApiPath((id, ring, position)): ApiPath<(String, usize, usize)>,
    ApiJson(body): ApiJson<TrackBody>,
) -> ApiResult<Json<Value>> {
    let handle = session_handle(&state, &id).await?;
    let mut entry = handle.lock().await;
    entry.session.update_binding(TrackAddr { ring, position }, body.dataset_id.as_deref(), body.style)?;
    applied(&state, &entry, Vec::new()).await
}

async fn get_history(State(state): Shared, ApiPath(id): ApiPath<String>) -> ApiResult<Json<Value>> {
    let handle = session_handle(&state, &id).await?;
    let entry = handle.lock().await;
    let corpus = state.corpus();
    Ok(Json(json!({ "sessionId": id, "entries": history_views(&entry.history, &corpus.corpus) })))
}

// ---- data ----

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct UploadQuery {
    session_id: String,
    kind: String,
    name: Option<String>,
}

async fn upload_data(State(state): Shared, ApiQuery(q): ApiQuery<UploadQuery>, body: Bytes) -> ApiResult<Json<Value>> {
    let kind: DatasetKind = q.kind.parse()?;
    let data = parse_csv(kind, &body)?;
    let handle = session_handle(&state, &q.session_id).await?;
    let mut entry = handle.lock().await;
    let name = q.name.unwrap_or_else(|| format!("{} {}", kind, entry.session.datasets.len() + 1));
    let rows = data.row_count();
    let dataset_id = entry.session.add_dataset(name, data)?;
    let warnings = entry.session.auto_bind();
    state.sessions.persist(&entry).await?;
    Ok(Json(json!({
        "datasetId": dataset_id,
        "kind": kind,
        "rows": rows,
        "bindings": entry.session.bindings,
        "warnings": warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "renderHash": hash_of(&entry.session),
    })))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SessionQuery {
    session_id: String,
}

async fn list_data(State(state): Shared, ApiQuery(q): ApiQuery<SessionQuery>) -> ApiResult<Json<Value>> {
    let handle = session_handle(&state, &q.session_id).await?;
    let entry = handle.lock().await;
    Ok(Json(json!({ "sessionId": q.session_id, "datasets": dataset_summaries(&entry.session) })))
}

async fn get_data(
    State(state): Shared,
    ApiPath(id): ApiPath<String>,
    ApiQuery(q): ApiQuery<SessionQuery>,
) -> ApiResult<Json<Value>> {
    let handle = session_handle(&state, &q.session_id).await?;
    let entry = handle.lock().await;
    let ds = entry.session.dataset(&id).ok_or_else(|| ApiError::not_found(format!("dataset `{id}` not found")))?;
    Ok(Json(json!(ds)))
}

#[derive(Deserialize)]
struct DataPatch {
    name: Option<String>,
    marker: Option<String>,
}

async fn patch_data(
    State(state): Shared,
    ApiPath(id): ApiPath<String>,
    ApiQuery(q): ApiQuery<SessionQuery>,
    ApiJson(patch): ApiJson<DataPatch>,
) -> ApiResult<Json<Value>> {
    let handle = session_handle(&state, &q.session_id).await?;
    let mut entry = handle.lock().await;
    let ds = entry
        .session
        .datasets
        .iter_mut()
        .find(|d| d.id == id)
        .ok_or_else(|| ApiError::not_found(format!("dataset `{id}` not found")))?;
    if let Some(name) = patch.name {
        ds.name = name;
    }
    if patch.marker.is_some() {
        ds.marker = patch.marker;
    }
    state.sessions.persist(&entry).await?;
    Ok(Json(json!({ "sessionId": q.session_id, "datasets": dataset_summaries(&entry.session) })))
}

async fn delete_data(
    State(state): Shared,
    ApiPath(id): ApiPath<String>,
    ApiQuery(q): ApiQuery<SessionQuery>,
) -> ApiResult<Json<Value>> {
    let handle = session_handle(&state, &q.session_id).await?;
    let mut entry = handle.lock().await;
    entry.session.remove_dataset(&id)?;
    state.sessions.persist(&entry).await?;
    Ok(Json(json!({
        "deleted": id,
        "unbound": unbound(&entry.session),
        "renderHash": hash_of(&entry.session),
    })))
}

// ---- recommendation ----

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RecommendBody {
    session_id: String,
    query: String,
    k: Option<usize>,
    seed: Option<u64>,
}

async fn recommend(State(state): Shared, ApiJson(body): ApiJson<RecommendBody>) -> ApiResult<Json<RecommendationView>> {
    let k = k_or_default(body.k)?;
    let handle = session_handle(&state, &body.session_id).await?;
    let mut entry = handle.lock().await;
    let existing = entry.session.config.clone();
    let corpus = state.corpus();
    let (embedder, generator, max_attempts) = (state.embedder.clone(), state.generator.clone(), state.max_attempts);
    let snapshot = corpus.clone();
    let query = body.query.clone();
    let seed = body.seed;
    let (rec, hits) = blocking(move || {
        let index = snapshot.index()?;
        let hits = index.search(&snapshot.corpus, embedder.as_ref(), &query, k)?;
        let rec =
            Recommender { corpus: &snapshot.corpus, index, embedder: embedder.as_ref(), generator: generator.as_ref() }
                .recommend(&query, Some(&existing), k, max_attempts, seed)?;
        Ok((rec, hits))
    })
    .await?;
    let session_id = entry.session.id.clone();
    let view = recommendation_view(entry.history.push(&session_id, rec), &corpus.corpus, Some(&hits));
    state.sessions.persist(&entry).await?;
    Ok(Json(view))
}

async fn regenerate(State(state): Shared, ApiPath(rec_id): ApiPath<String>) -> ApiResult<Json<RecommendationView>> {
    let session_id = rec_id
        .rsplit_once("-r")
        .map(|(s, _)| s.to_string())
        .ok_or_else(|| ApiError::not_found(format!("recommendation `{rec_id}` not found")))?;
    let handle = session_handle(&state, &session_id).await?;
    let mut entry = handle.lock().await;
    if entry.history.get(&rec_id).is_none() {
        return Err(ApiError::not_found(format!("recommendation `{rec_id}` not found")));
    }
    let mut history = std::mem::take(&mut entry.history);
    let (generator, max_attempts) = (state.generator.clone(), state.max_attempts);
    let sid = session_id.clone();
    let result = blocking(move || {
        let r = history.regenerate(&sid, &rec_id, generator.as_ref(), max_attempts).map(|_| ());
        Ok((history, r))
    })
    .await;
    let (history, outcome) = result?;
    entry.history = history;
    outcome?;
    let corpus = state.corpus();
    let view = recommendation_view(entry.history.latest().unwrap(), &corpus.corpus, None);
    state.sessions.persist(&entry).await?;
    Ok(Json(view))
}

// ---- retrieval ----

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Semantic,
    Structural,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RetrieveBody {
    mode: Mode,
    query: Option<String>,
    session_id: Option<String>,
    config: Option<String>,
    k: Option<usize>,
}

fn hit_views(corpus: &Corpus, hits: &[RetrievalHit]) -> Vec<Value> {
    hits.iter()
        .map(|h| {
            let r = corpus.get(&h.id).expect("hits come from this corpus");
            json!({
                "id": h.id,
                "rank": h.rank,
                "distance": h.distance,
                "annotation": r.annotation,
                "config": r.config.to_bare_string(),
            })
        })
        .collect()
}

async fn session_config(state: &AppState, id: &str) -> ApiResult<CircosConfig> {
    let handle = session_handle(state, id).await?;
    let entry = handle.lock().await;
    Ok(entry.session.config.clone())
}

async fn retrieve(State(state): Shared, ApiJson(body): ApiJson<RetrieveBody>) -> ApiResult<Json<Value>> {
    let k = k_or_default(body.k)?;
    let corpus = state.corpus();
    let hits = match body.mode {
        Mode::Semantic => {
            let query =
                body.query.ok_or_else(|| ApiError::bad_request("missing_field", "semantic retrieval needs `query`"))?;
            let embedder = state.embedder.clone();
            let snapshot = corpus.clone();
            blocking(move || Ok(snapshot.index()?.search(&snapshot.corpus, embedder.as_ref(), &query, k)?)).await?
        }
        Mode::Structural => {
            let current = match (body.config, body.session_id) {
                (Some(text), _) => parse(&text)?,
                (None, Some(id)) => session_config(&state, &id).await?,
                (None, None) => {
                    return Err(ApiError::bad_request(
                        "missing_field",
                        "structural retrieval needs `sessionId` or `config`",
                    ))
                }
            };
            structural_search(&corpus.corpus, &current, k)?
        }
    };
    Ok(Json(json!({
        "mode": if body.mode == Mode::Semantic { "semantic" } else { "structural" },
        "k": k,
        "corpusVersion": corpus.corpus.version(),
        "hits": hit_views(&corpus.corpus, &hits),
    })))
}

// ---- reference DAG ----

#[derive(Deserialize, Clone, Copy, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Scope {
    #[default]
    Retrieved,
    Corpus,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct DagQuery {
    session_id: String,
    #[serde(default)]
    scope: Scope,
    k: Option<usize>,
}

struct BuiltDag {
    dag: ReferenceDag,
    record_ids: Vec<String>,
    truncated: bool,
}

/// The DAG a session sees: the structural top-k around its config, or the
/// first [`CORPUS_DAG_LIMIT`] records by id. Edges are classified against
/// the session config and its latest recommendation.
fn session_dag(
    corpus: &Corpus,
    scope: Scope,
    k: usize,
    current: &CircosConfig,
    recommended: Option<&CircosConfig>,
) -> ApiResult<BuiltDag> {
    let (records, truncated): (Vec<&CorpusRecord>, bool) = match scope {
        Scope::Retrieved => (
            structural_search(corpus, current, k)?
                .iter()
                .map(|h| corpus.get(&h.id).expect("hits come from this corpus"))
                .collect(),
            false,
        ),
        Scope::Corpus => {
            if corpus.is_empty() {
                return Err(ApiError::empty_corpus());
            }
            (corpus.list(0, CORPUS_DAG_LIMIT), corpus.len() > CORPUS_DAG_LIMIT)
        }
    };
    let mut dag = ReferenceDag::build(records.iter().map(|r| (r.id.as_str(), &r.config)))?;
    let current = Some(current).filter(|c| !c.is_empty());
    dag.classify_edges(current, recommended);
    Ok(BuiltDag { dag, record_ids: records.iter().map(|r| r.id.clone()).collect(), truncated })
}

async fn session_context(state: &AppState, id: &str) -> ApiResult<(CircosConfig, Option<CircosConfig>)> {
    let handle = session_handle(state, id).await?;
    let entry = handle.lock().await;
    Ok((entry.session.config.clone(), entry.history.latest().map(|r| r.config.clone())))
}

async fn get_dag(State(state): Shared, ApiQuery(q): ApiQuery<DagQuery>) -> ApiResult<Json<Value>> {
    let k = k_or_default(q.k)?;
    let (current, recommended) = session_context(&state, &q.session_id).await?;
    let corpus = state.corpus();
    let built = session_dag(&corpus.corpus, q.scope, k, &current, recommended.as_ref())?;
    let l = layout(&built.dag);
    let export = built.dag.export(&l);
    Ok(Json(json!({
        "sessionId": q.session_id,
        "scope": if q.scope == Scope::Corpus { "corpus" } else { "retrieved" },
        "corpusVersion": corpus.corpus.version(),
        "records": built.record_ids,
        "truncated": built.truncated,
        "initialCrossings": l.initial_crossings,
        "nodes": export.nodes,
        "edges": export.edges,
        "crossings": export.crossings,
    })))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct CompleteBody {
    session_id: String,
    node_id: String,
    #[serde(default)]
    scope: Scope,
    k: Option<usize>,
}

async fn complete_dag(State(state): Shared, ApiJson(body): ApiJson<CompleteBody>) -> ApiResult<Json<Value>> {
    let k = k_or_default(body.k)?;
    let handle = session_handle(&state, &body.session_id).await?;
    let mut entry = handle.lock().await;
    let current = entry.session.config.clone();
    let recommended = entry.history.latest().map(|r| r.config.clone());
    let corpus = state.corpus();
    let built = session_dag(&corpus.corpus, body.scope, k, &current, recommended.as_ref())?;
    let node = built.dag.find(&body.node_id)?;
    let current_opt = Some(&current).filter(|c| !c.is_empty());
    let next = built.dag.complete_path(node, current_opt, recommended.as_ref())?;
    let warnings = entry.session.set_config(next);
    applied(&state, &entry, warnings).await
}

// ---- rendering ----

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RenderBody {
    session_id: String,
}

async fn svg_of(state: &AppState, id: &str) -> ApiResult<String> {
    let handle = session_handle(state, id).await?;
    let session = handle.lock().await.session.clone();
    Ok(render_svg(&session)?)
}

async fn render(State(state): Shared, ApiJson(body): ApiJson<RenderBody>) -> ApiResult<Response> {
    let svg = svg_of(&state, &body.session_id).await?;
    let hash = render_hash(&svg);
    Ok(([(header::CONTENT_TYPE, "image/svg+xml".to_string()), (header::ETAG, format!("\"{hash}\""))], svg)
        .into_response())
}

async fn export(State(state): Shared, ApiPath(file): ApiPath<String>) -> ApiResult<Response> {
    let id = file.strip_suffix(".svg").ok_or_else(|| ApiError::not_found(format!("no export `{file}`")))?;
    let svg = svg_of(&state, id).await?;
    Ok((
        StatusCode::OK,
        [
            (header::CONTENT_TYPE, "image/svg+xml".to_string()),
            (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{id}.svg\"")),
        ],
        svg,
    )
        .into_response())
}
