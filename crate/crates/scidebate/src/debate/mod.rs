//! The debate coordinator: proposal, self and cross critique, voting,
//! aggregation and termination, round after round.

use serde::{Deserialize, Serialize};

mod engine;
mod events;
mod pool;

pub use engine::{Debate, DebateResult, OracleScore, RoundSnapshot, Summary};
pub use events::{Event, EventSink, MemorySink};
pub use pool::{Candidate, Critique, CritiqueKind, Pool, Rationale};
pub use scidebate_core::consensus::TerminationReason;

use crate::llm::{LlmError, RequestTag, TemplateError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DebateConfig {
    /// N.
    pub n_scientists: usize,
    /// k.
    pub proposals_per_agent: usize,
    /// t.
    pub votes_per_agent: usize,
    pub max_rounds: usize,
    pub candidate_budget: usize,
    pub self_critique: bool,
    /// Show oracle estimates of the task property during self critique.
    pub self_critique_oracle: bool,
    /// Peer candidates each agent critiques per round.
    pub cross_sample: usize,
    /// Largest ballot shown to a voter; `null` shows the whole pool.
    pub ballot_cap: Option<usize>,
    /// Leading candidates carried into the next round's proposal prompt.
    pub context_top: usize,
    pub parallelism: usize,
    pub seed: u64,
}

impl Default for DebateConfig {
    fn default() -> Self {
        Self {
            n_scientists: 50,
            proposals_per_agent: 30,
            votes_per_agent: 5,
            max_rounds: 20,
            candidate_budget: 1000,
            self_critique: true,
            self_critique_oracle: false,
            cross_sample: 10,
            ballot_cap: Some(50),
            context_top: 10,
            parallelism: 1,
            seed: 0,
        }
    }
}

impl DebateConfig {
    pub fn validate(&self) -> Result<(), DebateError> {
        let checks = [
            (self.n_scientists, "n_scientists"),
            (self.proposals_per_agent, "proposals_per_agent"),
            (self.votes_per_agent, "votes_per_agent"),
            (self.max_rounds, "max_rounds"),
            (self.candidate_budget, "candidate_budget"),
            (self.parallelism, "parallelism"),
        ];
        for (v, name) in checks {
            if v == 0 {
                return Err(DebateError::Config(format!("{name} must be at least 1")));
            }
        }
        if self.ballot_cap == Some(0) {
            return Err(DebateError::Config("ballot_cap must be at least 1 or null".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DebateError {
    #[error("invalid debate config: {0}")]
    Config(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("backend call {tag} failed: {source}")]
    Backend { tag: RequestTag, source: LlmError },
    #[error("cannot record event: {0}")]
    Sink(#[from] std::io::Error),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = DebateConfig::default();
        assert_eq!(
            (c.n_scientists, c.proposals_per_agent, c.max_rounds, c.candidate_budget),
            (50, 30, 20, 1000)
        );
        c.validate().unwrap();
        let bad = DebateConfig {
            votes_per_agent: 0,
            ..c
        };
        assert!(bad.validate().is_err());
    }
}
