//! Chat backends, prompt templates and structured-output parsing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

mod http;
mod mock;
pub mod parse;
pub mod template;

pub use http::{HttpBackend, HttpBackendConfig};
pub use mock::{MockBackend, ScriptEntry};
pub use template::{Template, TemplateError, TemplateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// What a backend call is for. Mock scripts are keyed by it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Proposal,
    ProposalRepair,
    CritiqueSelf,
    CritiqueSelfRepair,
    CritiqueCross,
    CritiqueCrossRepair,
    Voting,
    VotingRepair,
    RoleGeneration,
    KeywordExtraction,
    LlmProfilePub,
    LlmProfileMol,
}

impl Phase {
    pub const ALL: [Phase; 12] = [
        Phase::Proposal,
        Phase::ProposalRepair,
        Phase::CritiqueSelf,
        Phase::CritiqueSelfRepair,
        Phase::CritiqueCross,
        Phase::CritiqueCrossRepair,
        Phase::Voting,
        Phase::VotingRepair,
        Phase::RoleGeneration,
        Phase::KeywordExtraction,
        Phase::LlmProfilePub,
        Phase::LlmProfileMol,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Proposal => "proposal",
            Phase::ProposalRepair => "proposal_repair",
            Phase::CritiqueSelf => "critique_self",
            Phase::CritiqueSelfRepair => "critique_self_repair",
            Phase::CritiqueCross => "critique_cross",
            Phase::CritiqueCrossRepair => "critique_cross_repair",
            Phase::Voting => "voting",
            Phase::VotingRepair => "voting_repair",
            Phase::RoleGeneration => "role_generation",
            Phase::KeywordExtraction => "keyword_extraction",
            Phase::LlmProfilePub => "llm_profile_pub",
            Phase::LlmProfileMol => "llm_profile_mol",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phase::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown phase {s:?}"))
    }
}

/// Addresses a call for logging and scripted replay. Profile-building calls
/// use round 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RequestTag {
    pub agent: String,
    pub round: usize,
    pub phase: Phase,
}

impl RequestTag {
    pub fn new(agent: impl Into<String>, round: usize, phase: Phase) -> Self {
        Self {
            agent: agent.into(),
            round,
            phase,
        }
    }
}

impl fmt::Display for RequestTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.agent, self.round, self.phase)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    /// First message is the system persona.
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model: String,
    pub tag: RequestTag,
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("backend returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("malformed backend response: {0}")]
    BadResponse(String),
    #[error("mock script has no entry for {0}")]
    MissingScript(RequestTag),
    #[error("mock script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// A chat-completion backend. Implementations must tolerate concurrent
/// calls.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for &T {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for Box<T> {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }
}

/// Model-call settings shared by every request in a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sampling {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            model: "deepseek-chat".into(),
            temperature: 0.7,
            max_tokens: 4096,
        }
    }
}

impl Sampling {
    pub fn request(&self, tag: RequestTag, system: String, user: String) -> ChatRequest {
        ChatRequest {
            messages: vec![Message::system(system), Message::user(user)],
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            model: self.model.clone(),
            tag,
        }
    }
}

pub(crate) fn validate_request(req: &ChatRequest) -> Result<(), LlmError> {
    if !req.temperature.is_finite() || req.temperature < 0.0 {
        return Err(LlmError::InvalidRequest(format!(
            "temperature {} must be finite and non-negative",
            req.temperature
        )));
    }
    match req.messages.first() {
        Some(m) if m.role == Role::System => Ok(()),
        _ => Err(LlmError::InvalidRequest("first message must be the system persona".into())),
    }
}
