use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{validate_request, ChatBackend, ChatRequest, LlmError, Phase, RequestTag};

/// One line of a mock script file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub agent: String,
    pub round: usize,
    pub phase: Phase,
    pub response: String,
}

/// Replays scripted responses keyed by (agent, round, phase). Lookup never
/// depends on call order.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    script: HashMap<RequestTag, String>,
}

impl MockBackend {
    pub fn new(entries: impl IntoIterator<Item = ScriptEntry>) -> Result<Self, LlmError> {
        let mut script = HashMap::new();
        for (i, e) in entries.into_iter().enumerate() {
            let tag = RequestTag::new(e.agent, e.round, e.phase);
            if script.contains_key(&tag) {
                return Err(LlmError::Script {
                    line: i + 1,
                    message: format!("duplicate key {tag}"),
                });
            }
            script.insert(tag, e.response);
        }
        Ok(Self { script })
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LlmError> {
        let mut entries = Vec::new();
        let mut lines = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e: ScriptEntry = serde_json::from_str(line).map_err(|e| LlmError::Script {
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.push(e);
            lines.push(i + 1);
        }
        Self::new(entries).map_err(|e| match e {
            LlmError::Script { line, message } => LlmError::Script {
                line: lines[line - 1],
                message,
            },
            other => other,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path).map_err(|e| LlmError::Script {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::from_jsonl(&text)
    }

    pub fn len(&self) -> usize {
        self.script.len()
    }

    pub fn is_empty(&self) -> bool {
        self.script.is_empty()
    }
}

impl ChatBackend for MockBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        validate_request(request)?;
        self.script
            .get(&request.tag)
            .cloned()
            .ok_or_else(|| LlmError::MissingScript(request.tag.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Sampling;

    #[test]
    fn lookup_and_missing_key() {
        let m = MockBackend::from_jsonl(
            r#"{"agent":"a1","round":1,"phase":"proposal","response":"hello"}"#,
        )
        .unwrap();
        let s = Sampling::default();
        let ok = s.request(RequestTag::new("a1", 1, Phase::Proposal), "sys".into(), "u".into());
        assert_eq!(m.complete(&ok).unwrap(), "hello");
        let miss = s.request(RequestTag::new("a2", 1, Phase::Proposal), "sys".into(), "u".into());
        let err = m.complete(&miss).unwrap_err().to_string();
        assert!(err.contains("(a2, 1, proposal)"), "{err}");
    }

    #[test]
    fn duplicate_and_bad_lines() {
        let dup = "{\"agent\":\"a\",\"round\":1,\"phase\":\"voting\",\"response\":\"x\"}\n\n{\"agent\":\"a\",\"round\":1,\"phase\":\"voting\",\"response\":\"y\"}";
        match MockBackend::from_jsonl(dup) {
            Err(LlmError::Script { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match MockBackend::from_jsonl("{\"agent\":\"a\",\"round\":1,\"phase\":\"nope\",\"response\":\"\"}") {
            Err(LlmError::Script { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }
}
