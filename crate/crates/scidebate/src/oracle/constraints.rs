use serde::Serialize;

use scidebate_core::{morgan_fingerprint, tanimoto, FingerprintParams, Molecule};

use super::{Oracle, PropertySpec};
use crate::task::ConstraintSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The value could not be obtained.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub value: Option<f64>,
    /// `>=` or `<=`.
    pub comparator: &'static str,
    pub threshold: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub candidate: String,
    pub seed: String,
    pub checks: Vec<ConstraintCheck>,
    pub overall: Verdict,
}

impl ConstraintReport {
    pub fn get(&self, name: &str) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(
    name: &'static str,
    value: Result<f64, String>,
    comparator: &'static str,
    threshold: f64,
) -> ConstraintCheck {
    let (value, verdict, note) = match value {
        Ok(v) => {
            let ok = if comparator == ">=" { v >= threshold } else { v <= threshold };
            (Some(v), if ok { Verdict::Pass } else { Verdict::Fail }, None)
        }
        Err(e) => (None, Verdict::Indeterminate, Some(e)),
    };
    ConstraintCheck {
        name,
        value,
        comparator,
        threshold,
        verdict,
        note,
    }
}

fn fetch(oracle: &dyn Oracle, property: &str, smiles: &str) -> Result<f64, String> {
    let spec: PropertySpec = property.parse().map_err(|e: super::OracleError| e.to_string())?;
    let mut slots = oracle
        .score_batch(&spec, &[smiles.to_string()])
        .map_err(|e| e.to_string())?;
    match slots.pop() {
        Some(slot) if slots.is_empty() => slot,
        _ => Err("oracle returned the wrong number of scores".into()),
    }
}

/// QED and SA come from `oracle`; similarity to the seed is computed
/// locally. Any failed check fails the candidate; otherwise any check that
/// could not be evaluated makes it indeterminate.
pub fn check_constraints(
    candidate: &Molecule,
    seed: &Molecule,
    constraints: &ConstraintSet,
    oracle: &dyn Oracle,
    params: FingerprintParams,
) -> ConstraintReport {
    let smiles = candidate.canonical();
    let sim = tanimoto(
        &morgan_fingerprint(candidate, params),
        &morgan_fingerprint(seed, params),
    )
    .map_err(|e| e.to_string());
    let checks = vec![
        check("qed", fetch(oracle, "qed", smiles), ">=", constraints.min_qed),
        check("sa", fetch(oracle, "sa", smiles), "<=", constraints.max_sa),
        check("sim", sim, ">=", constraints.min_sim),
    ];
    let overall = if checks.iter().any(|c| c.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if checks.iter().any(|c| c.verdict == Verdict::Indeterminate) {
        Verdict::Indeterminate
    } else {
        Verdict::Pass
    };
    ConstraintReport {
        candidate: smiles.into(),
        seed: seed.canonical().into(),
        checks,
        overall,
    }
}
