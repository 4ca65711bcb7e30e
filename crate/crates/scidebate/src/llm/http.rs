use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{validate_request, ChatBackend, ChatRequest, LlmError};
use crate::parallel::Permits;
use crate::retry::{Attempt, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpBackendConfig {
    /// Base URL; `/v1/chat/completions` is appended.
    pub endpoint: String,
    /// Environment variable holding the bearer token. Unset or empty means
    /// no Authorization header.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
    pub max_in_flight: usize,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 120,
            retry: RetryPolicy::default(),
            max_in_flight: 8,
        }
    }
}

/// OpenAI-compatible chat-completions client.
pub struct HttpBackend {
    url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
    retry: RetryPolicy,
    permits: Permits,
}

impl HttpBackend {
    pub fn new(config: &HttpBackendConfig) -> Self {
        let api_key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.is_empty());
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: &HttpBackendConfig, api_key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            url: format!("{}/v1/chat/completions", config.endpoint.trim_end_matches('/')),
            api_key,
            agent,
            retry: config.retry,
            permits: Permits::new(config.max_in_flight),
        }
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<Attempt<String>, LlmError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = match req.send_json(body) {
            Ok(r) => r,
            Err(e) => return Ok(Attempt::Retry(e.to_string())),
        };
        let status = resp.status().as_u16();
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Ok(Attempt::Retry(e.to_string())),
        };
        if status == 429 || status >= 500 {
            return Ok(Attempt::Retry(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(LlmError::Status { status, body: text });
        }
        extract_content(&text).map(Attempt::Done)
    }
}

fn extract_content(text: &str) -> Result<String, LlmError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| LlmError::BadResponse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(String::from)
        .ok_or_else(|| LlmError::BadResponse("missing choices[0].message.content".into()))
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        validate_request(request)?;
        let body = json!({
            "model": request.model,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let _permit = self.permits.acquire();
        let mut hard = None;
        let out = self.retry.run(|_| match self.attempt(&body) {
            Ok(a) => a,
            Err(e) => {
                hard = Some(e);
                Attempt::Done(String::new())
            }
        });
        if let Some(e) = hard {
            return Err(e);
        }
        out.map_err(|(attempts, last)| {
            log::error!("{}: backend unavailable after {attempts} attempts", request.tag);
            LlmError::RetriesExhausted { attempts, last }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_extraction() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(extract_content(ok).unwrap(), "hi");
        assert!(matches!(extract_content("{}"), Err(LlmError::BadResponse(_))));
        assert!(matches!(extract_content("nope"), Err(LlmError::BadResponse(_))));
    }
}
