use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use scidebate_core::consensus::ScoreTriple;
use scidebate_core::{morgan_fingerprint, Fingerprint, FingerprintParams};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rationale {
    pub agent: String,
    pub round: usize,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CritiqueKind {
    SelfReview,
    Cross,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Critique {
    pub critic: String,
    pub round: usize,
    pub kind: CritiqueKind,
    pub text: String,
    /// Replacement (self) or suggested modification (cross), canonical.
    pub suggestion: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub smiles: String,
    pub proposer: String,
    pub round: usize,
    pub rationales: Vec<Rationale>,
    pub critiques: Vec<Critique>,
    /// Scores from the latest voting phase, by agent.
    pub scores: BTreeMap<String, ScoreTriple>,
    /// Voters in the latest voting phase.
    pub votes: BTreeSet<String>,
    pub vote_count: usize,
    pub mean_score: f64,
    /// The candidate this one replaced during self critique.
    pub replaces: Option<String>,
    /// Set when its proposer swapped it out; it then leaves ballots and
    /// rankings but stays in the pool.
    pub superseded_by: Option<String>,
}

impl Candidate {
    pub fn is_active(&self) -> bool {
        self.superseded_by.is_none()
    }
}

/// Candidates keyed by canonical SMILES, in insertion order. Nothing is
/// ever removed.
#[derive(Debug, Clone, Default)]
pub struct Pool {
    candidates: Vec<Candidate>,
    fingerprints: Vec<Fingerprint>,
    index: HashMap<String, usize>,
}

impl Pool {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn get(&self, smiles: &str) -> Option<&Candidate> {
        self.index.get(smiles).map(|&i| &self.candidates[i])
    }

    pub fn get_mut(&mut self, smiles: &str) -> Option<&mut Candidate> {
        self.index.get(smiles).map(|&i| &mut self.candidates[i])
    }

    pub fn contains(&self, smiles: &str) -> bool {
        self.index.contains_key(smiles)
    }

    /// Adds a new candidate, or appends the rationale to the existing one.
    /// Returns true when the SMILES was new. `smiles` must be canonical.
    pub fn merge(
        &mut self,
        smiles: &str,
        agent: &str,
        round: usize,
        rationale: &str,
        params: FingerprintParams,
    ) -> bool {
        let r = Rationale {
            agent: agent.into(),
            round,
            text: rationale.into(),
        };
        if let Some(c) = self.get_mut(smiles) {
            c.rationales.push(r);
            return false;
        }
        let mol = scidebate_core::parse(smiles).expect("pool SMILES are canonical");
        self.fingerprints.push(morgan_fingerprint(&mol, params));
        self.index.insert(smiles.into(), self.candidates.len());
        self.candidates.push(Candidate {
            smiles: smiles.into(),
            proposer: agent.into(),
            round,
            rationales: vec![r],
            critiques: Vec::new(),
            scores: BTreeMap::new(),
            votes: BTreeSet::new(),
            vote_count: 0,
            mean_score: 0.0,
            replaces: None,
            superseded_by: None,
        });
        true
    }

    pub fn active(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.is_active())
    }

    pub fn active_fingerprints(&self) -> Vec<Fingerprint> {
        self.candidates
            .iter()
            .zip(&self.fingerprints)
            .filter(|(c, _)| c.is_active())
            .map(|(_, f)| f.clone())
            .collect()
    }

    pub(super) fn candidates_mut(&mut self) -> &mut [Candidate] {
        &mut self.candidates
    }
}
