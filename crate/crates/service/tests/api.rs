use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use boundline::fixtures::two_color_split;
use boundline::raster::write_world_file;
use boundline_service::{router, run_job, AppState, Runner, ServeConfig, ServeError};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let v = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, v)
}

async fn call_raw(app: &Router, method: Method, uri: &str, body: &str) -> StatusCode {
    let req = Request::builder().method(method).uri(uri).body(Body::from(body.to_string())).unwrap();
    app.clone().oneshot(req).await.unwrap().status()
}

fn fc(lines: &[&[(f64, f64)]]) -> Value {
    let feats: Vec<Value> = lines
        .iter()
        .map(|l| {
            let coords: Vec<Value> = l.iter().map(|(x, y)| json!([x, y])).collect();
            json!({"type": "Feature", "properties": {}, "geometry": {"type": "LineString", "coordinates": coords}})
        })
        .collect();
    json!({"type": "FeatureCollection", "features": feats})
}

/// Plus sign, a separate straight segment far away and a narrow U.
fn plus_and_island() -> Value {
    fc(&[
        &[(-10.0, 0.0), (10.0, 0.0)],
        &[(0.0, -10.0), (0.0, 10.0)],
        &[(100.0, 100.0), (110.0, 100.0)],
        &[(200.0, 0.0), (200.0, 10.0), (201.0, 10.0), (201.0, 0.0)],
    ])
}

async fn wait_ready(app: &Router, id: &str) -> Value {
    for _ in 0..600 {
        let (s, v) = call(app, Method::GET, &format!("/sessions/{id}"), None).await;
        assert_eq!(s, StatusCode::OK);
        if v["status"] != "processing" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    panic!("session {id} never finished");
}

async fn lines_session(app: &Router, lines: Value) -> String {
    let (s, v) = call(app, Method::POST, "/sessions", Some(json!({ "lines": lines }))).await;
    assert_eq!(s, StatusCode::ACCEPTED, "{v}");
    let id = v["session_id"].as_str().unwrap().to_string();
    assert_eq!(v["status_url"], format!("/sessions/{id}"));
    assert_eq!(wait_ready(app, &id).await["status"], "ready");
    id
}

/// Node ids of the network by coordinate.
async fn node_at(app: &Router, id: &str, x: f64, y: f64) -> usize {
    let (_, net) = call(app, Method::GET, &format!("/sessions/{id}/network"), None).await;
    net["features"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["geometry"]["type"] == "Point" && f["geometry"]["coordinates"] == json!([x, y]))
        .map(|f| f["properties"]["node_id"].as_u64().unwrap() as usize)
        .unwrap_or_else(|| panic!("no node at {x},{y}"))
}

#[tokio::test]
async fn health_is_ok() {
    let app = router(AppState::in_memory());
    let (s, v) = call(&app, Method::GET, "/health", None).await;
    assert_eq!((s, v), (StatusCode::OK, json!({"status": "ok"})));
}

#[tokio::test]
async fn session_creation_errors() {
    let app = router(AppState::in_memory());
    let (s, _) = call(&app, Method::POST, "/sessions", Some(json!({"image": "/nonexistent/ortho.png"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(call_raw(&app, Method::POST, "/sessions", "{not json").await, StatusCode::BAD_REQUEST);
    for body in [
        json!({}),
        json!({"lines": plus_and_island(), "image": "a.png"}),
        json!({"lines": plus_and_island(), "colour": 1}),
        json!({"lines": plus_and_island(), "buffer_radius_m": -1.0}),
        json!({"lines": plus_and_island(), "slic_params": {"compactness": 0.0}}),
        json!({"lines": {"type": "LineString", "coordinates": [[0, 0]]}}),
    ] {
        let (s, v) = call(&app, Method::POST, "/sessions", Some(body.clone())).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{body} -> {v}");
        assert!(v["error"].is_string());
    }
    let (s, _) = call(&app, Method::GET, "/sessions/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, Method::GET, "/sessions/nope/network", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn identical_requests_give_distinct_sessions() {
    let app = router(AppState::in_memory());
    let a = lines_session(&app, plus_and_island()).await;
    let b = lines_session(&app, plus_and_island()).await;
    assert_ne!(a, b);
    let (_, list) = call(&app, Method::GET, "/sessions", None).await;
    assert_eq!(list.as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn network_is_409_while_processing() {
    let release = Arc::new(AtomicBool::new(false));
    let gate = release.clone();
    let runner: Runner = Arc::new(move |job| {
        while !gate.load(Ordering::SeqCst) {
            std::thread::sleep(Duration::from_millis(5));
        }
        run_job(job)
    });
    let app = router(AppState::with_runner(runner));
    let (s, v) = call(&app, Method::POST, "/sessions", Some(json!({"lines": plus_and_island()}))).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let id = v["session_id"].as_str().unwrap().to_string();
    let (s, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!((s, v["status"].clone()), (StatusCode::OK, json!("processing")));
    let (s, _) = call(&app, Method::GET, &format!("/sessions/{id}/network"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = call(&app, Method::POST, &format!("/sessions/{id}/candidate"), Some(json!({"node_ids": [0, 1]}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    release.store(true, Ordering::SeqCst);
    assert_eq!(wait_ready(&app, &id).await["status"], "ready");
    let (s, net) = call(&app, Method::GET, &format!("/sessions/{id}/network"), None).await;
    assert_eq!(s, StatusCode::OK);
    let feats = net["features"].as_array().unwrap();
    let points = feats.iter().filter(|f| f["geometry"]["type"] == "Point").count();
    // plus sign: 5 nodes, 4 edges; island and U: 2 nodes, 1 edge each
    assert_eq!((points, feats.len() - points), (9, 6));
}

#[tokio::test]
async fn candidate_workflow() {
    let app = router(AppState::in_memory());
    let id = lines_session(&app, plus_and_island()).await;
    let base = format!("/sessions/{id}");
    let west = node_at(&app, &id, -10.0, 0.0).await;
    let east = node_at(&app, &id, 10.0, 0.0).await;
    let north = node_at(&app, &id, 0.0, 10.0).await;
    let island = node_at(&app, &id, 100.0, 100.0).await;

    let (s, _) = call(&app, Method::GET, &format!("{base}/candidate"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    for (ids, want) in [
        (json!([west]), StatusCode::BAD_REQUEST),
        (json!([west, west]), StatusCode::BAD_REQUEST),
        (json!([west, 999]), StatusCode::NOT_FOUND),
        (json!([west, island]), StatusCode::UNPROCESSABLE_ENTITY),
    ] {
        let (s, v) = call(&app, Method::POST, &format!("{base}/candidate"), Some(json!({"node_ids": ids}))).await;
        assert_eq!(s, want, "{ids} -> {v}");
    }
    assert_eq!(call_raw(&app, Method::POST, &format!("{base}/candidate"), "{\"node_ids\": \"x\"}").await, StatusCode::BAD_REQUEST);

    let (s, c) = call(&app, Method::POST, &format!("{base}/candidate"), Some(json!({"node_ids": [west, east]}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(c["color"], "green");
    assert_eq!(c["sinuosity"], 1.0);
    assert_eq!(c["length_m"], 20.0);
    assert_eq!(c["geometry"]["coordinates"][0], json!([-10.0, 0.0]));

    let (s, _) = call(&app, Method::POST, &format!("{base}/candidate"), Some(json!({"node_ids": [west, north]}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, c) = call(&app, Method::POST, &format!("{base}/candidate"), Some(json!({"node_ids": [west, north], "replace": true}))).await;
    assert_eq!(s, StatusCode::OK);
    // 10 sqrt(2) / 20 = 0.71
    assert_eq!(c["color"], "green");
    let (_, got) = call(&app, Method::GET, &format!("{base}/candidate"), None).await;
    assert_eq!(got, c);

    let (s, simp) = call(&app, Method::POST, &format!("{base}/candidate/simplify"), Some(json!({"tolerance_m": 0.0}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(simp["geometry"], c["geometry"]);
    let (s, _) = call(&app, Method::POST, &format!("{base}/candidate/simplify"), Some(json!({"tolerance_m": -1.0}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    for bad in [json!({"type": "Point", "coordinates": [0, 0]}), json!({"type": "LineString", "coordinates": [[1, 1]]})] {
        let (s, _) = call(&app, Method::PUT, &format!("{base}/candidate/geometry"), Some(bad)).await;
        assert_eq!(s, StatusCode::BAD_REQUEST);
    }
    let edited = json!({"type": "LineString", "coordinates": [[-10.0, 0.0], [-5.0, 5.0], [0.0, 10.0]]});
    let (s, e) = call(&app, Method::PUT, &format!("{base}/candidate/geometry"), Some(edited.clone())).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(e["geometry"], edited);
    assert_eq!(e["color"], "green");

    let (s, acc) = call(&app, Method::POST, &format!("{base}/candidate/accept"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(acc["accepted_count"], 1);
    assert_eq!(acc["suggested_next_node"], north);
    let (s, _) = call(&app, Method::POST, &format!("{base}/candidate/accept"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);

    call(&app, Method::POST, &format!("{base}/candidate"), Some(json!({"node_ids": [north, east]}))).await;
    let (s, _) = call(&app, Method::DELETE, &format!("{base}/candidate"), None).await;
    assert_eq!(s, StatusCode::OK);
    let (s, _) = call(&app, Method::DELETE, &format!("{base}/candidate"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);

    let (u0, u1) = (node_at(&app, &id, 200.0, 0.0).await, node_at(&app, &id, 201.0, 0.0).await);
    let (s, u) = call(&app, Method::POST, &format!("{base}/candidate"), Some(json!({"node_ids": [u0, u1]}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(u["color"], "red");
    let (s, _) = call(&app, Method::DELETE, &format!("{base}/candidate"), None).await;
    assert_eq!(s, StatusCode::OK);

    let (s, b1) = call(&app, Method::GET, &format!("{base}/boundaries"), None).await;
    let (_, b2) = call(&app, Method::GET, &format!("{base}/boundaries"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(b1, b2);
    let feats = b1["features"].as_array().unwrap();
    assert_eq!(feats.len(), 1);
    assert_eq!(feats[0]["geometry"], edited);
    assert_eq!(feats[0]["properties"]["accepted_order"], 1);
}

#[tokio::test]
async fn empty_session_exports_nothing() {
    let app = router(AppState::in_memory());
    let id = lines_session(&app, plus_and_island()).await;
    let (s, v) = call(&app, Method::GET, &format!("/sessions/{id}/boundaries"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v, json!({"type": "FeatureCollection", "features": []}));
    let (s, _) = call(&app, Method::GET, &format!("/sessions/{id}/image"), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn held_guard_turns_mutations_into_409() {
    let state = AppState::in_memory();
    let app = router(state.clone());
    let id = lines_session(&app, plus_and_island()).await;
    let (w, e) = (node_at(&app, &id, -10.0, 0.0).await, node_at(&app, &id, 10.0, 0.0).await);
    let entry = state.entry(&id).unwrap();
    let guard = entry.record.lock().await;
    let (s, _) = call(&app, Method::POST, &format!("/sessions/{id}/candidate"), Some(json!({"node_ids": [w, e]}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    drop(guard);
    let (s, _) = call(&app, Method::POST, &format!("/sessions/{id}/candidate"), Some(json!({"node_ids": [w, e]}))).await;
    assert_eq!(s, StatusCode::OK);
}

#[tokio::test]
async fn concurrent_accepts_commit_once() {
    let app = router(AppState::in_memory());
    let id = lines_session(&app, plus_and_island()).await;
    let (w, e) = (node_at(&app, &id, -10.0, 0.0).await, node_at(&app, &id, 10.0, 0.0).await);
    call(&app, Method::POST, &format!("/sessions/{id}/candidate"), Some(json!({"node_ids": [w, e]}))).await;
    let uri = format!("/sessions/{id}/candidate/accept");
    let (a, b) = tokio::join!(call(&app, Method::POST, &uri, None), call(&app, Method::POST, &uri, None));
    let mut codes = [a.0, b.0];
    codes.sort();
    assert_eq!(codes, [StatusCode::OK, StatusCode::CONFLICT]);
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(v["accepted_count"], 1);
}

#[tokio::test]
async fn assess_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::in_memory());
    let reference = fc(&[&[(0.5, 1.0), (3.5, 1.0)]]);
    let (s, v) = call(&app, Method::POST, "/assess", Some(json!({"delineated": reference, "reference": reference}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["bands"][0]["tp_percent"], 100.0);

    let offset = fc(&[&[(0.5, 1.5), (3.5, 1.5)]]);
    let path = dir.path().join("ref.geojson");
    std::fs::write(&path, reference.to_string()).unwrap();
    let (s, v) = call(&app, Method::POST, "/assess", Some(json!({
        "delineated": offset,
        "reference": {"path": path},
        "config": {"gsd": 0.05},
    }))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["bands"][2]["tp_percent"], 100.0);
    assert!(v["csv"].as_str().unwrap().contains("0.41,0.6,"));

    let g1 = json!({"transform": {"pixel_size_x": 0.05, "rotation_y": 0.0, "rotation_x": 0.0, "pixel_size_y": -0.05, "origin_x": 0.0, "origin_y": 3.0}, "width": 80, "height": 60});
    let mut g2 = g1.clone();
    g2["width"] = json!(81);
    let (s, _) = call(&app, Method::POST, "/assess", Some(json!({
        "delineated": {"geojson": reference, "grid": g1},
        "reference": {"geojson": reference, "grid": g2},
    }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, v) = call(&app, Method::POST, "/assess", Some(json!({
        "delineated": {"geojson": reference, "grid": g1},
        "reference": {"geojson": reference, "grid": g1},
    }))).await;
    assert_eq!(s, StatusCode::OK, "{v}");

    let (s, _) = call(&app, Method::POST, "/assess", Some(json!({"delineated": reference, "reference": {"path": "/nonexistent.geojson"}}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, Method::POST, "/assess", Some(json!({"delineated": reference}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn snapshots_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let app = router(AppState::persistent(dir.path()).unwrap());
        let id = lines_session(&app, plus_and_island()).await;
        let (w, e) = (node_at(&app, &id, -10.0, 0.0).await, node_at(&app, &id, 10.0, 0.0).await);
        call(&app, Method::POST, &format!("/sessions/{id}/candidate"), Some(json!({"node_ids": [w, e]}))).await;
        call(&app, Method::POST, &format!("/sessions/{id}/candidate/accept"), None).await;
        id
    };
    let app = router(AppState::persistent(dir.path()).unwrap());
    let (s, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!((v["status"].clone(), v["accepted_count"].clone()), (json!("ready"), json!(1)));
    let (_, b) = call(&app, Method::GET, &format!("/sessions/{id}/boundaries"), None).await;
    assert_eq!(b["features"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn interrupted_processing_reloads_as_failed() {
    let dir = tempfile::tempdir().unwrap();
    let runner: Runner = Arc::new(|_| {
        std::thread::sleep(Duration::from_secs(3600));
        unreachable!()
    });
    let app = router(AppState::persistent_with_runner(dir.path(), runner).unwrap());
    let (_, v) = call(&app, Method::POST, "/sessions", Some(json!({"lines": plus_and_island()}))).await;
    let id = v["session_id"].as_str().unwrap().to_string();
    let app = router(AppState::persistent(dir.path()).unwrap());
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(v["status"], "failed");
    let (s, _) = call(&app, Method::GET, &format!("/sessions/{id}/network"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test]
async fn image_session_runs_step_one() {
    let dir = tempfile::tempdir().unwrap();
    let fx = two_color_split(64, 48, 30, 0.05);
    let png = dir.path().join("split.png");
    fx.image.save_png(&png).unwrap();
    write_world_file(&png.with_extension("pgw"), &fx.image.transform).unwrap();
    let app = router(AppState::in_memory());
    let body = json!({
        "image": png,
        "cue_params": {"radii": [3], "weights": [[1.0, 1.0, 1.0, 0.0]], "spectral": false},
        "slic_params": {"region_size": 8},
        "buffer_radius_m": 1.0,
    });
    let (s, v) = call(&app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(s, StatusCode::ACCEPTED, "{v}");
    let id = v["session_id"].as_str().unwrap().to_string();
    let v = wait_ready(&app, &id).await;
    assert_eq!(v["status"], "ready", "{v}");
    assert!(v["edge_count"].as_u64().unwrap() > 0);
    assert_eq!(v["raster"]["width"], 64);
    let req = Request::builder().uri(format!("/sessions/{id}/image")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "image/png");
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    assert_eq!(&bytes[..], &std::fs::read(&png).unwrap()[..]);

    std::fs::remove_file(png.with_extension("pgw")).unwrap();
    let (s, _) = call(&app, Method::POST, "/sessions", Some(json!({"image": png}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn busy_port_is_a_bind_error() {
    let dir = tempfile::tempdir().unwrap();
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let cfg = ServeConfig { addr: taken.local_addr().unwrap(), data_dir: dir.path().to_path_buf() };
    assert!(matches!(boundline_service::serve(cfg).await, Err(ServeError::Bind { .. })));
}
