//! Ballot scoring, per-agent vote selection, global ranking and the
//! termination rule.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Per-candidate assessment on the three voting criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreTriple {
    pub task_relevance: f64,
    pub synthetic_feasibility: f64,
    pub novelty: f64,
}

fn clamp01(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

impl ScoreTriple {
    /// `None` unless every component lies in `[0, 1]`.
    pub fn new(task_relevance: f64, synthetic_feasibility: f64, novelty: f64) -> Option<Self> {
        let t = Self {
            task_relevance,
            synthetic_feasibility,
            novelty,
        };
        t.is_valid().then_some(t)
    }

    /// Clamps each component into `[0, 1]`; NaN becomes 0.
    pub fn clamped(self) -> Self {
        Self {
            task_relevance: clamp01(self.task_relevance),
            synthetic_feasibility: clamp01(self.synthetic_feasibility),
            novelty: clamp01(self.novelty),
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.task_relevance, self.synthetic_feasibility, self.novelty]
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
    }

    pub fn mean(&self) -> f64 {
        (self.task_relevance + self.synthetic_feasibility + self.novelty) / 3.0
    }
}

/// One agent's scores over the candidates it was shown.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ballot {
    /// Candidates presented to the agent.
    pub view: Vec<String>,
    /// Scores it returned, keyed by canonical SMILES. Candidates in `view`
    /// without an entry count as mean score 0 when picking votes.
    pub scores: BTreeMap<String, ScoreTriple>,
}

impl Ballot {
    /// The agent's `t` favourite candidates by its own mean score, ties
    /// broken by SMILES. `t` is clamped to the view size.
    pub fn votes(&self, t: usize) -> Vec<String> {
        let mut view: Vec<(&str, f64)> = self
            .view
            .iter()
            .map(|s| (s.as_str(), self.scores.get(s).map_or(0.0, ScoreTriple::mean)))
            .collect();
        view.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        view.dedup_by(|a, b| a.0 == b.0);
        view.into_iter().take(t).map(|(s, _)| s.into()).collect()
    }
}

/// A candidate's aggregate position after one voting phase.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standing {
    pub smiles: String,
    pub votes: usize,
    /// Mean over the agents that scored this candidate of their mean score;
    /// 0 when nobody did.
    pub mean_score: f64,
}

/// Vote count descending, mean score descending, SMILES ascending.
pub fn compare_standings(a: &Standing, b: &Standing) -> Ordering {
    b.votes
        .cmp(&a.votes)
        .then_with(|| b.mean_score.total_cmp(&a.mean_score))
        .then_with(|| a.smiles.cmp(&b.smiles))
}

/// Tallies `ballots` over `candidates` and returns the global ranking.
/// Abstaining agents are simply absent from `ballots`. Ballot entries for
/// SMILES outside `candidates` are ignored.
pub fn aggregate(candidates: &[String], ballots: &[Ballot], t: usize) -> Vec<Standing> {
    let mut acc: BTreeMap<&str, (usize, f64, usize)> =
        candidates.iter().map(|c| (c.as_str(), (0, 0.0, 0))).collect();
    for ballot in ballots {
        for (smiles, triple) in &ballot.scores {
            if let Some(e) = acc.get_mut(smiles.as_str()) {
                e.1 += triple.mean();
                e.2 += 1;
            }
        }
        for v in ballot.votes(t) {
            if let Some(e) = acc.get_mut(v.as_str()) {
                e.0 += 1;
            }
        }
    }
    let mut out: Vec<Standing> = acc
        .into_iter()
        .map(|(s, (votes, sum, n))| Standing {
            smiles: s.into(),
            votes,
            mean_score: if n == 0 { 0.0 } else { sum / n as f64 },
        })
        .collect();
    out.sort_by(compare_standings);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TerminationReason {
    MaxRounds,
    BudgetReached,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::MaxRounds => "max_rounds",
            TerminationReason::BudgetReached => "budget_reached",
        }
    }
}

/// Evaluated at the end of round `round` (1-based).
pub fn should_terminate(
    round: usize,
    pool_size: usize,
    max_rounds: usize,
    candidate_budget: usize,
) -> Option<TerminationReason> {
    if pool_size >= candidate_budget {
        Some(TerminationReason::BudgetReached)
    } else if round >= max_rounds {
        Some(TerminationReason::MaxRounds)
    } else {
        None
    }
}
