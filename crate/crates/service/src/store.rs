//! Session records and their JSON snapshots on disk.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use boundline::pipeline::PipelineParams;
use boundline::{DelineationSession, GeoTransform};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Processing,
    Ready,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SessionInput {
    Image { image: PathBuf, worldfile: PathBuf },
    Lines { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterInfo {
    pub width: usize,
    pub height: usize,
    pub transform: GeoTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub id: String,
    pub status: Status,
    pub error: Option<String>,
    pub input: SessionInput,
    pub params: PipelineParams,
    pub raster: Option<RasterInfo>,
    pub warnings: Vec<String>,
    pub session: Option<DelineationSession>,
    /// Unix seconds.
    pub created: u64,
    pub updated: u64,
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl SessionRecord {
    pub fn new(id: String, input: SessionInput, params: PipelineParams) -> Self {
        let t = now();
        Self {
            id,
            status: Status::Processing,
            error: None,
            input,
            params,
            raster: None,
            warnings: Vec::new(),
            session: None,
            created: t,
            updated: t,
        }
    }

    pub fn summary(&self) -> Value {
        let s = self.session.as_ref();
        json!({
            "session_id": self.id,
            "status": self.status,
            "error": self.error,
            "input": self.input,
            "raster": self.raster,
            "warnings": self.warnings,
            "node_count": s.map(|s| s.network.nodes.len()),
            "edge_count": s.map(|s| s.network.edges.len()),
            "accepted_count": s.map(|s| s.accepted.len()),
            "has_candidate": s.map(|s| s.candidate.is_some()),
            "suggested_next_node": s.and_then(|s| s.suggested_next_node),
            "created": self.created,
            "updated": self.updated,
        })
    }
}

/// Directory of `<id>.json` snapshots.
#[derive(Debug, Clone)]
pub struct Store {
    dir: PathBuf,
}

impl Store {
    pub fn open(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Write via a temporary file and rename, so a crash never leaves a
    /// half-written snapshot.
    pub fn save(&self, rec: &SessionRecord) -> io::Result<()> {
        let text = serde_json::to_string(rec)?;
        let tmp = self.dir.join(format!(".{}.json.tmp", rec.id));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, self.path(&rec.id))
    }

    /// Every readable snapshot. Sessions caught mid-processing by a
    /// shutdown come back as failed.
    pub fn load_all(&self) -> io::Result<Vec<SessionRecord>> {
        let mut out = Vec::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        for p in paths {
            let rec = fs::read_to_string(&p).ok().and_then(|t| serde_json::from_str::<SessionRecord>(&t).ok());
            match rec {
                Some(mut r) => {
                    if r.status == Status::Processing {
                        r.status = Status::Failed;
                        r.error = Some("interrupted by a service restart".into());
                    }
                    out.push(r);
                }
                None => log::warn!("skipping unreadable snapshot {}", p.display()),
            }
        }
        Ok(out)
    }
}
