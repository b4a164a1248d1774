//! HTTP JSON API over the boundline pipeline: asynchronous network
//! generation and per-session interactive delineation.

mod error;
mod handlers;
pub mod store;

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::routing::{get, post};
use axum::Router;
use boundline::geometry::Polyline;
use boundline::pipeline::{generate_network, PipelineParams};
use boundline::raster::load_image;
use boundline::vectornet::{build_network, clean_topology};
use boundline::LineNetwork;
use tokio::sync::Mutex;

pub use error::{ApiError, ApiResult};
use store::{RasterInfo, SessionRecord, Store};

pub const DATA_DIR_ENV: &str = "BOUNDLINE_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "boundline-data";

/// Work handed to the step-I runner.
#[derive(Debug, Clone)]
pub enum Job {
    Image { image: PathBuf, worldfile: PathBuf, params: PipelineParams },
    Lines { lines: Vec<Polyline<f64>>, params: PipelineParams },
}

#[derive(Debug, Clone)]
pub struct JobOutput {
    pub network: LineNetwork,
    pub raster: Option<RasterInfo>,
    pub warnings: Vec<String>,
}

pub type Runner = Arc<dyn Fn(Job) -> boundline::Result<JobOutput> + Send + Sync>;

/// Snap tolerance for sessions built from lines when none is given.
const LINES_SNAP_M: f64 = 0.01;

pub fn run_job(job: Job) -> boundline::Result<JobOutput> {
    match job {
        Job::Image { image, worldfile, params } => {
            let img = load_image(&image, &worldfile)?;
            let raster = RasterInfo { width: img.width, height: img.height, transform: img.transform };
            let run = generate_network(&img, &params)?;
            Ok(JobOutput { network: run.network, raster: Some(raster), warnings: run.warnings })
        }
        Job::Lines { lines, params } => {
            params.validate()?;
            let cleaned = clean_topology(&lines, params.snap_tol_m.unwrap_or(LINES_SNAP_M), params.min_dangle_m.unwrap_or(0.0));
            Ok(JobOutput { network: build_network(&cleaned)?, raster: None, warnings: Vec::new() })
        }
    }
}

pub struct SessionEntry {
    pub record: Mutex<SessionRecord>,
}

struct Inner {
    sessions: RwLock<HashMap<String, Arc<SessionEntry>>>,
    store: Option<Store>,
    runner: Runner,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// Sessions kept in memory only.
    pub fn in_memory() -> Self {
        Self::build(None, Vec::new(), Arc::new(run_job))
    }

    /// Sessions snapshotted to `dir`; existing snapshots are loaded.
    pub fn persistent(dir: &Path) -> io::Result<Self> {
        Self::persistent_with_runner(dir, Arc::new(run_job))
    }

    pub fn persistent_with_runner(dir: &Path, runner: Runner) -> io::Result<Self> {
        let store = Store::open(dir)?;
        let records = store.load_all()?;
        log::info!("loaded {} session(s) from {}", records.len(), dir.display());
        Ok(Self::build(Some(store), records, runner))
    }

    pub fn with_runner(runner: Runner) -> Self {
        Self::build(None, Vec::new(), runner)
    }

    fn build(store: Option<Store>, records: Vec<SessionRecord>, runner: Runner) -> Self {
        let sessions = records
            .into_iter()
            .map(|r| (r.id.clone(), Arc::new(SessionEntry { record: Mutex::new(r) })))
            .collect();
        Self { inner: Arc::new(Inner { sessions: RwLock::new(sessions), store, runner }) }
    }

    pub fn entry(&self, id: &str) -> Option<Arc<SessionEntry>> {
        self.inner.sessions.read().expect("session table poisoned").get(id).cloned()
    }

    fn insert(&self, rec: SessionRecord) -> Arc<SessionEntry> {
        let id = rec.id.clone();
        let e = Arc::new(SessionEntry { record: Mutex::new(rec) });
        self.inner.sessions.write().expect("session table poisoned").insert(id, e.clone());
        e
    }

    fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.inner.sessions.read().expect("session table poisoned").keys().cloned().collect();
        ids.sort();
        ids
    }

    fn runner(&self) -> Runner {
        self.inner.runner.clone()
    }

    fn save(&self, rec: &SessionRecord) -> io::Result<()> {
        match &self.inner.store {
            Some(s) => s.save(rec),
            None => Ok(()),
        }
    }

    /// Write every session snapshot; used at shutdown.
    pub async fn flush(&self) -> io::Result<usize> {
        let mut n = 0;
        for id in self.ids() {
            if let Some(e) = self.entry(&id) {
                let rec = e.record.lock().await;
                self.save(&rec)?;
                n += 1;
            }
        }
        Ok(n)
    }
}

pub fn router(state: AppState) -> Router {
    use handlers::*;
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/network", get(get_network))
        .route("/sessions/{id}/image", get(get_image))
        .route(
            "/sessions/{id}/candidate",
            post(create_candidate).get(get_candidate).delete(delete_candidate),
        )
        .route("/sessions/{id}/candidate/simplify", post(simplify_candidate))
        .route("/sessions/{id}/candidate/accept", post(accept_candidate))
        .route("/sessions/{id}/candidate/geometry", axum::routing::put(replace_geometry))
        .route("/sessions/{id}/boundaries", get(get_boundaries))
        .route("/assess", post(assess))
        .with_state(state)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error("session storage {path}: {source}")]
    Storage { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub data_dir: PathBuf,
}

/// Flag, then `BOUNDLINE_DATA_DIR`, then `./boundline-data`.
pub fn resolve_data_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR))
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    log::info!("shutdown requested");
}

/// Run until SIGINT/SIGTERM, then flush all sessions to the data dir.
pub async fn serve(cfg: ServeConfig) -> Result<(), ServeError> {
    let state = AppState::persistent(&cfg.data_dir)
        .map_err(|source| ServeError::Storage { path: cfg.data_dir.clone(), source })?;
    let listener = tokio::net::TcpListener::bind(cfg.addr)
        .await
        .map_err(|source| ServeError::Bind { addr: cfg.addr, source })?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown_signal())
        .await?;
    let n = state.flush().await?;
    log::info!("flushed {n} session(s) to {}", cfg.data_dir.display());
    Ok(())
}
