//! Campaign configuration file (JSON).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use scidebate_core::metrics::MetricConfig;
use scidebate_core::FingerprintParams;

use crate::debate::DebateConfig;
use crate::llm::{HttpBackendConfig, Sampling};
use crate::oracle::HttpOracleConfig;
use crate::profiles::ProfileSettings;
use crate::task::TaskSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Scripted responses for the mock backend.
    pub script: Option<PathBuf>,
    pub sampling: Sampling,
    pub http: HttpBackendConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    #[default]
    Mock,
    Http,
    None,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub kind: OracleKind,
    /// Mock oracle seed.
    pub seed: u64,
    pub http: HttpOracleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusPaths {
    pub publications: PathBuf,
    #[serde(default)]
    pub molecules: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub task: TaskSpec,
    #[serde(default)]
    pub debate: DebateConfig,
    #[serde(default)]
    pub profiles: ProfileSettings,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    pub corpus: CorpusPaths,
    /// Directory of template overrides.
    #[serde(default)]
    pub templates: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub metrics: MetricConfig,
    #[serde(default)]
    pub fingerprint: FingerprintParams,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{field}: file not found: {path}")]
    MissingFile { field: &'static str, path: PathBuf },
    #[error("{0}")]
    Invalid(String),
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn must_exist(field: &'static str, p: &Path) -> Result<(), ConfigError> {
    if p.exists() {
        Ok(())
    } else {
        Err(ConfigError::MissingFile { field, path: p.to_path_buf() })
    }
}

impl CampaignConfig {
    /// Reads and validates a config; relative paths resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: CampaignConfig = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.corpus.publications);
        if let Some(m) = &mut self.corpus.molecules {
            resolve(base, m);
        }
        if let Some(s) = &mut self.backend.script {
            resolve(base, s);
        }
        if let Some(t) = &mut self.templates {
            resolve(base, t);
        }
        resolve(base, &mut self.output_dir);
    }

    /// Checks objective requirements, numeric ranges and referenced files.
    pub fn validate(&mut self) -> Result<(), ConfigError> {
        self.task.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.debate.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.metrics.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !self.backend.sampling.temperature.is_finite() || self.backend.sampling.temperature < 0.0 {
            return Err(ConfigError::Invalid("backend.sampling.temperature must be non-negative".into()));
        }
        must_exist("corpus.publications", &self.corpus.publications)?;
        if let Some(m) = &self.corpus.molecules {
            must_exist("corpus.molecules", m)?;
        }
        match (self.backend.kind, &self.backend.script) {
            (BackendKind::Mock, None) => {
                return Err(ConfigError::Invalid("backend.script is required for the mock backend".into()))
            }
            (BackendKind::Mock, Some(s)) => must_exist("backend.script", s)?,
            (BackendKind::Http, _) => {}
        }
        if let Some(t) = &self.templates {
            must_exist("templates", t)?;
        }
        if self.oracle.kind != OracleKind::None {
            if let Some(p) = &self.task.property {
                p.parse::<crate::oracle::PropertySpec>()
                    .map_err(|e| ConfigError::Invalid(format!("task.property: {e}")))?;
            }
        }
        Ok(())
    }

    /// The config as persisted with a run: everything that can change the
    /// outcome. Output location and concurrency settings are left out so
    /// they do not change the run id; paths are made relative to `base`
    /// where possible.
    pub fn echo(&self, base: &Path) -> Value {
        let mut c = self.clone();
        let rel = |p: &mut PathBuf| {
            if let Ok(r) = p.strip_prefix(base) {
                *p = r.to_path_buf();
            }
        };
        rel(&mut c.corpus.publications);
        if let Some(m) = &mut c.corpus.molecules {
            rel(m);
        }
        if let Some(s) = &mut c.backend.script {
            rel(s);
        }
        if let Some(t) = &mut c.templates {
            rel(t);
        }
        let mut v = serde_json::to_value(&c).expect("config serializes");
        let obj = v.as_object_mut().expect("config is an object");
        obj.remove("output_dir");
        if let Some(d) = obj.get_mut("debate").and_then(Value::as_object_mut) {
            d.remove("parallelism");
        }
        if let Some(h) = obj
            .get_mut("backend")
            .and_then(|b| b.get_mut("http"))
            .and_then(Value::as_object_mut)
        {
            h.remove("max_in_flight");
        }
        v
    }
}
