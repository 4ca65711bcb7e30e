use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{check_batch, Oracle, OracleError, PropertySpec, Slot, DEFAULT_MAX_BATCH};
use crate::retry::{Attempt, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpOracleConfig {
    pub endpoint: String,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
    pub max_batch: usize,
}

impl Default for HttpOracleConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8100".into(),
            timeout_secs: 60,
            retry: RetryPolicy::default(),
            max_batch: DEFAULT_MAX_BATCH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    #[serde(default)]
    pub properties: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct ScoreResponse {
    scores: Vec<Option<f64>>,
    #[serde(default)]
    errors: Option<Vec<Option<String>>>,
}

/// Client for the oracle service: `POST /score`, `GET /health`.
pub struct HttpOracle {
    base: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
    max_batch: usize,
}

impl HttpOracle {
    pub fn new(config: &HttpOracleConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            base: config.endpoint.trim_end_matches('/').to_string(),
            agent,
            retry: config.retry,
            max_batch: config.max_batch.max(1),
        }
    }

    fn call(&self, send: impl Fn() -> Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Result<String, OracleError> {
        let mut hard = None;
        let out = self.retry.run(|_| {
            let mut resp = match send() {
                Ok(r) => r,
                Err(e) => return Attempt::Retry(e.to_string()),
            };
            let status = resp.status().as_u16();
            let body = match resp.body_mut().read_to_string() {
                Ok(b) => b,
                Err(e) => return Attempt::Retry(e.to_string()),
            };
            if status == 429 || status >= 500 {
                return Attempt::Retry(format!("HTTP {status}"));
            }
            if !(200..300).contains(&status) {
                hard = Some(match status {
                    400 | 404 | 422 => OracleError::Protocol(format!("HTTP {status}: {body}")),
                    _ => OracleError::Unavailable(format!("HTTP {status}: {body}")),
                });
            }
            Attempt::Done(body)
        });
        if let Some(e) = hard {
            return Err(e);
        }
        out.map_err(|(attempts, last)| {
            OracleError::Unavailable(format!("gave up after {attempts} attempts: {last}"))
        })
    }

    pub fn health(&self) -> Result<HealthStatus, OracleError> {
        let url = format!("{}/health", self.base);
        let body = self.call(|| self.agent.get(&url).call())?;
        serde_json::from_str(&body).map_err(|e| OracleError::Protocol(e.to_string()))
    }
}

fn decode(body: &str, n: usize) -> Result<Vec<Slot>, OracleError> {
    let r: ScoreResponse =
        serde_json::from_str(body).map_err(|e| OracleError::Protocol(e.to_string()))?;
    if r.scores.len() != n {
        return Err(OracleError::Protocol(format!(
            "{} scores for {n} molecules",
            r.scores.len()
        )));
    }
    let errors = r.errors.unwrap_or_else(|| vec![None; n]);
    if errors.len() != n {
        return Err(OracleError::Protocol(format!(
            "{} error slots for {n} molecules",
            errors.len()
        )));
    }
    Ok(r.scores
        .into_iter()
        .zip(errors)
        .map(|(s, e)| match (s, e) {
            (_, Some(msg)) => Err(msg),
            (Some(v), None) if v.is_finite() => Ok(v),
            (Some(v), None) => Err(format!("non-finite score {v}")),
            (None, None) => Err("no score returned".into()),
        })
        .collect())
}

impl Oracle for HttpOracle {
    fn score_batch(&self, property: &PropertySpec, smiles: &[String]) -> Result<Vec<Slot>, OracleError> {
        check_batch(smiles.len(), self.max_batch)?;
        if smiles.is_empty() {
            return Ok(Vec::new());
        }
        let url = format!("{}/score", self.base);
        let req = json!({ "property": property.name(), "smiles": smiles });
        let body = self.call(|| self.agent.post(&url).send_json(&req))?;
        decode(&body, smiles.len())
    }

    fn max_batch(&self) -> usize {
        self.max_batch
    }
}
