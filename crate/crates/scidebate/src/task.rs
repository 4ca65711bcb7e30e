//! Campaign task description.

use serde::{Deserialize, Serialize};

use scidebate_core::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    ProteinTarget,
    Bioactivity,
    LeadOptimization,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::ProteinTarget => "protein_target",
            Objective::Bioactivity => "bioactivity",
            Objective::LeadOptimization => "lead_optimization",
        }
    }
}

/// Lead-optimization thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSet {
    pub min_qed: f64,
    pub max_sa: f64,
    pub min_sim: f64,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self {
            min_qed: 0.6,
            max_sa: 4.0,
            min_sim: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: String,
    pub description: String,
    pub keywords: Vec<String>,
    pub objective: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintSet>,
    /// Oracle property used to score the final ranking, e.g. `gsk3b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaskError {
    #[error("task keywords are empty")]
    NoKeywords,
    #[error("task description is empty")]
    NoDescription,
    #[error("lead_optimization requires a seed molecule")]
    MissingSeed,
    #[error("seed molecule {smiles:?} does not parse: {reason}")]
    BadSeed { smiles: String, reason: String },
}

impl TaskSpec {
    /// Checks objective requirements and canonicalizes the seed in place.
    pub fn validate(&mut self) -> Result<(), TaskError> {
        if tokenize(&self.description).is_empty() {
            return Err(TaskError::NoDescription);
        }
        if self.keywords.iter().all(|k| tokenize(k).is_empty()) {
            return Err(TaskError::NoKeywords);
        }
        if self.objective == Objective::LeadOptimization {
            if self.seed.is_none() {
                return Err(TaskError::MissingSeed);
            }
            self.constraints.get_or_insert_with(ConstraintSet::default);
        }
        if let Some(seed) = &self.seed {
            let mol = scidebate_core::parse(seed).map_err(|e| TaskError::BadSeed {
                smiles: seed.clone(),
                reason: e.to_string(),
            })?;
            self.seed = Some(mol.canonical().to_string());
        }
        Ok(())
    }

    pub fn keyword_refs(&self) -> Vec<&str> {
        self.keywords.iter().map(String::as_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(objective: Objective, seed: Option<&str>) -> TaskSpec {
        TaskSpec {
            id: "t".into(),
            description: "Inhibit GSK3 beta".into(),
            keywords: vec!["gsk3".into()],
            objective,
            seed: seed.map(String::from),
            constraints: None,
            property: None,
        }
    }

    #[test]
    fn lead_optimization_needs_seed() {
        assert_eq!(
            task(Objective::LeadOptimization, None).validate(),
            Err(TaskError::MissingSeed)
        );
        let mut t = task(Objective::LeadOptimization, Some("OCC"));
        t.validate().unwrap();
        assert_eq!(t.seed.as_deref(), Some("CCO"));
        assert_eq!(t.constraints, Some(ConstraintSet::default()));
    }

    #[test]
    fn keywords_required() {
        let mut t = task(Objective::Bioactivity, None);
        t.keywords = vec!["  ".into()];
        assert_eq!(t.validate(), Err(TaskError::NoKeywords));
    }
}
