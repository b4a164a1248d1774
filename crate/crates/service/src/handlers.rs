use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use boundline::assessment::{assess_lines, layers_grid, AssessmentConfig, DEFAULT_DISTANCES};
use boundline::contours::CueParams;
use boundline::geojson::{line_geometry, network_to_geojson, parse_linestring, read_file, read_lines};
use boundline::geometry::Polyline;
use boundline::pipeline::PipelineParams;
use boundline::raster::sidecar_world_file;
use boundline::superpixels::SlicParams;
use boundline::{CandidateLine, DelineationSession, GridSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{ApiError, ApiResult};
use crate::store::{now, SessionInput, SessionRecord, Status};
use crate::{AppState, Job, SessionEntry};

const GEOJSON: &str = "application/geo+json";

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request: {e}")))
}

fn geojson(v: Value) -> Response {
    ([(header::CONTENT_TYPE, GEOJSON)], v.to_string()).into_response()
}

fn entry(state: &AppState, id: &str) -> ApiResult<Arc<SessionEntry>> {
    state.entry(id).ok_or_else(|| ApiError::not_found(format!("unknown session {id}")))
}

fn ready(rec: &SessionRecord) -> ApiResult<&DelineationSession> {
    match rec.status {
        Status::Ready => rec.session.as_ref().ok_or_else(|| ApiError::internal("ready session without state")),
        Status::Processing => Err(ApiError::conflict("session is still processing")),
        Status::Failed => Err(ApiError::conflict(format!(
            "session failed: {}",
            rec.error.as_deref().unwrap_or("unknown error")
        ))),
    }
}

fn candidate_json(c: &CandidateLine) -> Value {
    json!({
        "geometry": line_geometry(&c.parts),
        "sinuosity": c.sinuosity,
        "color": c.color,
        "terminals": c.terminals,
        "edges": c.edges,
        "length_m": c.length(),
        "simplified": c.simplified,
    })
}

/// Apply `f` to a copy of the session under the exclusive guard and
/// commit only if it and the snapshot write succeed. A guard held by
/// another request yields 409.
async fn mutate(
    state: &AppState,
    id: &str,
    f: impl FnOnce(&mut DelineationSession) -> boundline::Result<Value>,
) -> ApiResult<Value> {
    let e = entry(state, id)?;
    let mut rec = e.record.try_lock().map_err(|_| ApiError::conflict("session is busy"))?;
    let mut work = ready(&rec)?.clone();
    let out = f(&mut work)?;
    let old = rec.session.replace(work);
    let old_updated = rec.updated;
    rec.updated = now();
    if let Err(err) = state.save(&rec) {
        rec.session = old;
        rec.updated = old_updated;
        return Err(ApiError::internal(format!("cannot write session snapshot: {err}")));
    }
    Ok(out)
}

pub async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    image: Option<PathBuf>,
    worldfile: Option<PathBuf>,
    lines: Option<Value>,
    cue_params: Option<CueParams>,
    slic_params: Option<SlicParams>,
    buffer_radius_m: Option<f64>,
    snap_tol_m: Option<f64>,
    min_dangle_m: Option<f64>,
}

pub async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: CreateSession = parse(&body)?;
    let mut params = PipelineParams::default();
    if let Some(c) = req.cue_params {
        params.cue = c;
    }
    if let Some(s) = req.slic_params {
        params.slic = s;
    }
    if let Some(r) = req.buffer_radius_m {
        params.buffer_radius_m = r;
    }
    params.snap_tol_m = req.snap_tol_m;
    params.min_dangle_m = req.min_dangle_m;
    params.validate()?;

    let (job, input) = match (req.image, req.lines) {
        (Some(image), None) => {
            if !image.is_file() {
                return Err(ApiError::not_found(format!("image not found: {}", image.display())));
            }
            let worldfile = req.worldfile.unwrap_or_else(|| sidecar_world_file(&image));
            if !worldfile.is_file() {
                return Err(ApiError::not_found(format!("world file not found: {}", worldfile.display())));
            }
            let input = SessionInput::Image { image: image.clone(), worldfile: worldfile.clone() };
            (Job::Image { image, worldfile, params: params.clone() }, input)
        }
        (None, Some(v)) => {
            let lines: Vec<Polyline<f64>> = read_lines(&v, false)?;
            let input = SessionInput::Lines { count: lines.len() };
            (Job::Lines { lines, params: params.clone() }, input)
        }
        _ => return Err(ApiError::bad_request("give exactly one of `image` or `lines`")),
    };

    let id = uuid::Uuid::new_v4().simple().to_string();
    let rec = SessionRecord::new(id.clone(), input, params);
    state.save(&rec).map_err(|e| ApiError::internal(format!("cannot write session snapshot: {e}")))?;
    let e = state.insert(rec);
    let runner = state.runner();
    let st = state.clone();
    tokio::spawn(async move {
        let result = tokio::task::spawn_blocking(move || runner(job)).await;
        let mut rec = e.record.lock().await;
        match result {
            Ok(Ok(out)) => {
                log::info!("session {}: {} nodes, {} edges", rec.id, out.network.nodes.len(), out.network.edges.len());
                rec.session = Some(DelineationSession::new(out.network));
                rec.raster = out.raster;
                rec.warnings = out.warnings;
                rec.status = Status::Ready;
            }
            Ok(Err(err)) => {
                log::warn!("session {} failed: {err}", rec.id);
                rec.status = Status::Failed;
                rec.error = Some(err.to_string());
            }
            Err(join) => {
                log::error!("session {} worker crashed: {join}", rec.id);
                rec.status = Status::Failed;
                rec.error = Some("internal error in network generation".into());
            }
        }
        rec.updated = now();
        if let Err(err) = st.save(&rec) {
            log::error!("cannot write snapshot for {}: {err}", rec.id);
        }
    });
    let body = json!({ "session_id": id, "status_url": format!("/sessions/{id}") });
    Ok((StatusCode::ACCEPTED, Json(body)).into_response())
}

pub async fn list_sessions(State(state): State<AppState>) -> Json<Value> {
    let mut out = Vec::new();
    for id in state.ids() {
        if let Some(e) = state.entry(&id) {
            out.push(e.record.lock().await.summary());
        }
    }
    Json(Value::Array(out))
}

pub async fn get_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let e = entry(&state, &id)?;
    let rec = e.record.lock().await;
    Ok(Json(rec.summary()))
}

pub async fn get_network(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let e = entry(&state, &id)?;
    let rec = e.record.lock().await;
    Ok(geojson(network_to_geojson(&ready(&rec)?.network)))
}

pub async fn get_image(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let e = entry(&state, &id)?;
    let path = match &e.record.lock().await.input {
        SessionInput::Image { image, .. } => image.clone(),
        SessionInput::Lines { .. } => return Err(ApiError::not_found("session has no image")),
    };
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|err| ApiError::not_found(format!("{}: {err}", path.display())))?;
    Ok(([(header::CONTENT_TYPE, image_mime(&path))], bytes).into_response())
}

fn image_mime(p: &Path) -> &'static str {
    match p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref() {
        Some("png") => "image/png",
        Some("ppm") | Some("pnm") => "image/x-portable-pixmap",
        _ => "application/octet-stream",
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectRequest {
    node_ids: Vec<usize>,
    #[serde(default)]
    replace: bool,
}

pub async fn create_candidate(State(state): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: ConnectRequest = parse(&body)?;
    let v = mutate(&state, &id, |s| s.connect(&req.node_ids, req.replace).map(candidate_json)).await?;
    Ok(Json(v))
}

pub async fn get_candidate(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let e = entry(&state, &id)?;
    let rec = e.record.lock().await;
    let c = ready(&rec)?.candidate.as_ref().ok_or_else(|| ApiError::conflict("no candidate line"))?;
    Ok(Json(candidate_json(c)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimplifyRequest {
    tolerance_m: f64,
}

pub async fn simplify_candidate(State(state): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: SimplifyRequest = parse(&body)?;
    let v = mutate(&state, &id, |s| s.simplify_candidate(req.tolerance_m).map(candidate_json)).await?;
    Ok(Json(v))
}

pub async fn accept_candidate(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let v = mutate(&state, &id, |s| {
        let a = s.accept_candidate()?;
        let accepted = json!({
            "order": a.order,
            "geometry": line_geometry(&a.parts),
            "sinuosity": a.sinuosity,
            "color": a.color,
            "terminals": a.terminals,
            "simplified": a.simplified,
        });
        Ok(json!({
            "accepted_count": s.accepted.len(),
            "suggested_next_node": s.suggested_next_node,
            "accepted": accepted,
        }))
    })
    .await?;
    Ok(Json(v))
}

pub async fn delete_candidate(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let v = mutate(&state, &id, |s| {
        s.delete_candidate()?;
        Ok(json!({ "deleted": true, "accepted_count": s.accepted.len() }))
    })
    .await?;
    Ok(Json(v))
}

pub async fn replace_geometry(State(state): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let v: Value = parse(&body)?;
    let line: Polyline<f64> = parse_linestring(&v).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let out = mutate(&state, &id, |s| s.replace_candidate_geometry(line).map(candidate_json)).await?;
    Ok(Json(out))
}

pub async fn get_boundaries(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let e = entry(&state, &id)?;
    let rec = e.record.lock().await;
    Ok(geojson(ready(&rec)?.export_boundaries()))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct AssessOptions {
    gsd: Option<f64>,
    distances: Option<Vec<f64>>,
    grid: Option<GridSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AssessRequest {
    delineated: Value,
    reference: Value,
    #[serde(default)]
    config: AssessOptions,
}

/// A layer reference: inline GeoJSON, or `{geojson | path | session, grid?}`.
async fn resolve_layer(state: &AppState, v: &Value, exact_only: bool) -> ApiResult<(Vec<Polyline<f64>>, Option<GridSpec>)> {
    if v.get("type").is_some() {
        return Ok((read_lines(v, exact_only)?, None));
    }
    let obj = v.as_object().ok_or_else(|| ApiError::bad_request("layer reference must be an object"))?;
    let grid = match obj.get("grid") {
        Some(g) => Some(serde_json::from_value::<GridSpec>(g.clone()).map_err(|e| ApiError::bad_request(format!("bad grid: {e}")))?),
        None => None,
    };
    let doc = match (obj.get("geojson"), obj.get("path"), obj.get("session")) {
        (Some(g), None, None) => g.clone(),
        (None, Some(Value::String(p)), None) => {
            let path = PathBuf::from(p);
            if !path.is_file() {
                return Err(ApiError::not_found(format!("layer not found: {p}")));
            }
            read_file(&path)?
        }
        (None, None, Some(Value::String(id))) => {
            let e = entry(state, id)?;
            let rec = e.record.lock().await;
            ready(&rec)?.export_boundaries()
        }
        _ => return Err(ApiError::bad_request("layer reference needs exactly one of geojson, path or session")),
    };
    Ok((read_lines(&doc, exact_only)?, grid))
}

pub async fn assess(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: AssessRequest = parse(&body)?;
    let (del, del_grid) = resolve_layer(&state, &req.delineated, false).await?;
    let (refr, ref_grid) = resolve_layer(&state, &req.reference, true).await?;
    let distances = req.config.distances.unwrap_or_else(|| DEFAULT_DISTANCES.to_vec());
    let explicit: Vec<GridSpec> = [req.config.grid, del_grid, ref_grid].into_iter().flatten().collect();
    if explicit.windows(2).any(|w| w[0] != w[1]) {
        return Err(ApiError::bad_request("layers are on different grids"));
    }
    let grid = match explicit.into_iter().next() {
        Some(g) => g,
        None => {
            let gsd = req.config.gsd.unwrap_or(0.05);
            layers_grid(&del, &refr, gsd, &distances)?
        }
    };
    let cfg = AssessmentConfig { distances, grid };
    let series = tokio::task::spawn_blocking(move || assess_lines(&del, &refr, &cfg))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    let mut out = series.to_json();
    out["csv"] = json!(series.to_csv());
    out["text"] = json!(series.to_text());
    Ok(Json(out))
}
