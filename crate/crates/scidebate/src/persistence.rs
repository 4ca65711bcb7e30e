//! Run directories: `config.json`, `transcript.jsonl`, `pool.jsonl`,
//! `metrics.jsonl`, `result.json`.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::debate::{Candidate, DebateResult, Event, EventSink, RoundSnapshot};

pub const CONFIG_FILE: &str = "config.json";
pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";
pub const POOL_FILE: &str = "pool.jsonl";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const RESULT_FILE: &str = "result.json";

/// Fields of `result.json` that differ between otherwise identical runs.
pub const TIMESTAMP_FIELDS: [&str; 2] = ["started_at_ms", "finished_at_ms"];

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("run {run_id} already exists in {dir} with a different config")]
    Collision { run_id: String, dir: PathBuf },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("event is not serializable: {0}")]
    Contract(serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub dir: PathBuf,
    pub started_at_ms: u64,
    pub corpus_fingerprint: String,
    pub status: RunStatus,
}

/// Pretty JSON with a trailing newline; these are the bytes persisted as
/// `config.json` and hashed for the run id.
pub fn config_bytes(echo: &Value) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(echo).expect("json values serialize");
    b.push(b'\n');
    b
}

pub fn run_id(config_bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(config_bytes)[..8])
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T, PersistError> {
    r.map_err(|source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Single writer for one run directory.
pub struct RunWriter {
    record: RunRecord,
    config: Value,
    transcript: File,
    /// Whole lines not yet written, so the file never ends mid-line.
    pending: Vec<u8>,
    metrics: File,
}

/// Creates `<out>/<run id>/`. Re-opening with byte-identical config starts
/// the run over; any difference is a collision.
pub fn open_run(out: &Path, config: &Value, corpus_fingerprint: &str) -> Result<RunWriter, PersistError> {
    let bytes = config_bytes(config);
    let id = run_id(&bytes);
    let dir = out.join(&id);
    let cfg_path = dir.join(CONFIG_FILE);
    if cfg_path.exists() {
        let existing = io(&cfg_path, fs::read(&cfg_path))?;
        if existing != bytes {
            return Err(PersistError::Collision { run_id: id, dir });
        }
    }
    io(&dir, fs::create_dir_all(&dir))?;
    io(&cfg_path, fs::write(&cfg_path, &bytes))?;
    let create = |name: &str| {
        let p = dir.join(name);
        io(&p, File::create(&p))
    };
    let transcript = create(TRANSCRIPT_FILE)?;
    let metrics = create(METRICS_FILE)?;
    create(POOL_FILE)?;
    let mut w = RunWriter {
        record: RunRecord {
            run_id: id,
            dir,
            started_at_ms: now_ms(),
            corpus_fingerprint: corpus_fingerprint.into(),
            status: RunStatus::Running,
        },
        config: config.clone(),
        transcript,
        pending: Vec::new(),
        metrics,
    };
    w.write_result(json!({}))?;
    Ok(w)
}

impl RunWriter {
    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn dir(&self) -> &Path {
        &self.record.dir
    }

    /// Buffers one transcript line; durable after the next `flush`.
    pub fn append_event<T: Serialize>(
        &mut self,
        round: usize,
        phase: &str,
        agent: Option<&str>,
        payload: &T,
    ) -> Result<(), PersistError> {
        let payload = serde_json::to_value(payload).map_err(PersistError::Contract)?;
        let line = json!({"round": round, "phase": phase, "agent": agent, "payload": payload});
        self.pending.extend_from_slice(line.to_string().as_bytes());
        self.pending.push(b'\n');
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), PersistError> {
        let path = self.record.dir.join(TRANSCRIPT_FILE);
        io(&path, self.transcript.write_all(&self.pending))?;
        self.pending.clear();
        io(&path, self.transcript.sync_data())
    }

    /// Replaces `pool.jsonl` atomically.
    pub fn write_pool(&mut self, pool: &[Candidate]) -> Result<(), PersistError> {
        let path = self.record.dir.join(POOL_FILE);
        let tmp = self.record.dir.join("pool.jsonl.tmp");
        let mut out = String::new();
        for c in pool {
            out.push_str(&serde_json::to_string(c).map_err(PersistError::Contract)?);
            out.push('\n');
        }
        io(&tmp, fs::write(&tmp, out))?;
        io(&path, fs::rename(&tmp, &path))
    }

    pub fn append_metrics(&mut self, snapshot: &RoundSnapshot) -> Result<(), PersistError> {
        let path = self.record.dir.join(METRICS_FILE);
        let line = serde_json::to_string(snapshot).map_err(PersistError::Contract)? + "\n";
        io(&path, self.metrics.write_all(line.as_bytes()))
    }

    fn write_result(&mut self, body: Value) -> Result<(), PersistError> {
        let mut v = json!({
            "run_id": self.record.run_id,
            "status": self.record.status,
            "started_at_ms": self.record.started_at_ms,
            "corpus_fingerprint": self.record.corpus_fingerprint,
            "config": self.config,
        });
        let obj = v.as_object_mut().expect("object");
        if self.record.status != RunStatus::Running {
            obj.insert("finished_at_ms".into(), now_ms().into());
        }
        if let Value::Object(extra) = body {
            obj.extend(extra);
        }
        let path = self.record.dir.join(RESULT_FILE);
        let tmp = self.record.dir.join("result.json.tmp");
        let text = serde_json::to_string_pretty(&v).map_err(PersistError::Contract)? + "\n";
        io(&tmp, fs::write(&tmp, text))?;
        io(&path, fs::rename(&tmp, &path))
    }

    pub fn complete(mut self, result: &DebateResult) -> Result<RunRecord, PersistError> {
        self.flush()?;
        self.write_pool(&result.candidates)?;
        self.record.status = RunStatus::Completed;
        self.write_result(json!({
            "rounds": result.rounds,
            "termination": result.termination,
            "ranking": result.ranking,
            "snapshots": result.snapshots,
            "oracle_scores": result.oracle_scores,
            "summary": result.summary,
        }))?;
        Ok(self.record)
    }

    /// Marks the run failed; everything flushed so far stays readable.
    pub fn fail(mut self, error: &str) -> Result<RunRecord, PersistError> {
        let flushed = self.flush();
        self.record.status = RunStatus::Failed;
        self.write_result(json!({"error": error}))?;
        flushed.map(|_| self.record)
    }
}

impl EventSink for RunWriter {
    fn record(&mut self, event: &Event) -> std::io::Result<()> {
        self.append_event(event.round, &event.phase, event.agent.as_deref(), &event.payload)
            .map_err(std::io::Error::other)
    }

    fn end_phase(&mut self) -> std::io::Result<()> {
        self.flush().map_err(std::io::Error::other)
    }

    fn end_round(&mut self, pool: &[Candidate], snapshot: &RoundSnapshot) -> std::io::Result<()> {
        self.write_pool(pool).map_err(std::io::Error::other)?;
        self.append_metrics(snapshot).map_err(std::io::Error::other)
    }
}

/// Reads a JSONL file, skipping blank lines.
pub fn read_jsonl(path: &Path) -> Result<Vec<Value>, PersistError> {
    let text = io(path, fs::read_to_string(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| PersistError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
            })
        })
        .collect()
}

pub fn read_result(dir: &Path) -> Result<Value, PersistError> {
    let path = dir.join(RESULT_FILE);
    let text = io(&path, fs::read_to_string(&path))?;
    serde_json::from_str(&text).map_err(|e| PersistError::Io {
        path,
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })
}

/// Removes timestamp fields so replays can be compared byte for byte.
pub fn strip_timestamps(mut result: Value) -> Value {
    if let Some(obj) = result.as_object_mut() {
        for f in TIMESTAMP_FIELDS {
            obj.remove(f);
        }
    }
    result
}
