//! Evaluation metrics for generated molecule sets and oracle-call traces.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::chem::{tanimoto, Fingerprint, FingerprintError};

/// Kelvin. Chosen so that RT·ln 10 matches the 1.36355 kcal/mol per log10
/// unit conversion commonly used for IC50 values.
pub const AFFINITY_TEMPERATURE_K: f64 = 298.0;
/// kcal/(mol·K).
pub const GAS_CONSTANT_KCAL: f64 = 1.98720e-3;
/// kcal/mol per log10 unit of IC50.
pub const KCAL_PER_LOG10: f64 = GAS_CONSTANT_KCAL * AFFINITY_TEMPERATURE_K * core::f64::consts::LN_10;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct MetricConfig {
    /// Similarity threshold `h` for #Circles.
    pub circle_threshold: f64,
    pub auc_k: usize,
    pub oracle_budget: usize,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            circle_threshold: 0.75,
            auc_k: 10,
            oracle_budget: 1000,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        check_threshold(self.circle_threshold)?;
        if self.auc_k == 0 {
            return Err(MetricError::InvalidK);
        }
        if self.oracle_budget == 0 {
            return Err(MetricError::InvalidBudget);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    TooFewMolecules { needed: usize, got: usize },
    EmptyCalls,
    InvalidThreshold(f64),
    InvalidK,
    InvalidBudget,
    OverBudget { calls: usize, budget: usize },
    CallsOutOfOrder { position: usize },
    NonFinite { position: usize },
    Fingerprint(FingerprintError),
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::TooFewMolecules { needed, got } => write!(
                f,
                "metric undefined: needs at least {needed} molecules, got {got}"
            ),
            MetricError::EmptyCalls => write!(f, "metric undefined: no oracle calls"),
            MetricError::InvalidThreshold(h) => write!(f, "threshold {h} is outside (0, 1]"),
            MetricError::InvalidK => write!(f, "k must be positive"),
            MetricError::InvalidBudget => write!(f, "budget must be positive"),
            MetricError::OverBudget { calls, budget } => {
                write!(f, "{calls} oracle calls exceed the budget of {budget}")
            }
            MetricError::CallsOutOfOrder { position } => {
                write!(f, "call index not strictly increasing at position {position}")
            }
            MetricError::NonFinite { position } => {
                write!(f, "non-finite value at position {position}")
            }
            MetricError::Fingerprint(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MetricError {}

impl From<FingerprintError> for MetricError {
    fn from(e: FingerprintError) -> Self {
        MetricError::Fingerprint(e)
    }
}

fn check_threshold(h: f64) -> Result<(), MetricError> {
    if h > 0.0 && h <= 1.0 {
        Ok(())
    } else {
        Err(MetricError::InvalidThreshold(h))
    }
}

/// Mean Tanimoto similarity over unordered distinct pairs, summed in
/// `(i, j)` order with `i < j`.
pub fn mean_pairwise_similarity(fps: &[Fingerprint]) -> Result<f64, MetricError> {
    let n = fps.len();
    if n < 2 {
        return Err(MetricError::TooFewMolecules { needed: 2, got: n });
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += tanimoto(&fps[i], &fps[j])?;
        }
    }
    Ok(sum / (n * (n - 1) / 2) as f64)
}

/// Internal diversity: `1 - mean pairwise similarity`.
pub fn int_div(fps: &[Fingerprint]) -> Result<f64, MetricError> {
    mean_pairwise_similarity(fps).map(|s| 1.0 - s)
}

/// #Circles by greedy sphere exclusion in input order: a fingerprint opens
/// a new circle iff its similarity to every existing center is below `h`.
pub fn num_circles(fps: &[Fingerprint], h: f64) -> Result<usize, MetricError> {
    circle_centers(fps, h).map(|c| c.len())
}

/// Indices of the circle centers chosen by [`num_circles`].
pub fn circle_centers(fps: &[Fingerprint], h: f64) -> Result<Vec<usize>, MetricError> {
    check_threshold(h)?;
    let mut centers: Vec<usize> = Vec::new();
    'next: for (i, fp) in fps.iter().enumerate() {
        for &c in &centers {
            if tanimoto(fp, &fps[c])? >= h {
                continue 'next;
            }
        }
        centers.push(i);
    }
    Ok(centers)
}

/// One oracle evaluation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredCall {
    /// 1-based position in the oracle call sequence.
    pub call_index: u64,
    pub molecule: String,
    pub score: f64,
}

/// Mean of the `k` largest values (or of all of them when fewer).
pub fn top_k_mean(scores: &[f64], k: usize) -> Option<f64> {
    if scores.is_empty() || k == 0 {
        return None;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let take = k.min(sorted.len());
    Some(sorted[..take].iter().sum::<f64>() / take as f64)
}

/// Budget-normalized area under the running top-`k` mean curve.
///
/// After call `i` the running value is the mean of the best `min(k, i)`
/// scores so far. A run that stops before `budget` calls is extended with
/// its last running value. Duplicate molecules count as separate calls.
pub fn topk_auc(calls: &[ScoredCall], k: usize, budget: usize) -> Result<f64, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidK);
    }
    if budget == 0 {
        return Err(MetricError::InvalidBudget);
    }
    if calls.is_empty() {
        return Err(MetricError::EmptyCalls);
    }
    if calls.len() > budget {
        return Err(MetricError::OverBudget {
            calls: calls.len(),
            budget,
        });
    }
    // Best scores so far, descending, at most k.
    let mut best: Vec<f64> = Vec::with_capacity(k + 1);
    let mut area = 0.0;
    let mut running = 0.0;
    for (pos, call) in calls.iter().enumerate() {
        if !call.score.is_finite() {
            return Err(MetricError::NonFinite { position: pos });
        }
        if pos > 0 && call.call_index <= calls[pos - 1].call_index {
            return Err(MetricError::CallsOutOfOrder { position: pos });
        }
        let at = best.partition_point(|&b| b >= call.score);
        if at < k {
            best.insert(at, call.score);
            best.truncate(k);
        }
        running = best.iter().sum::<f64>() / best.len() as f64;
        area += running;
    }
    area += running * (budget - calls.len()) as f64;
    Ok(area / budget as f64)
}

/// Converts log10(IC50 / M) to a binding free energy in kcal/mol.
pub fn affinity_to_kcal(log10_ic50: f64) -> Result<f64, MetricError> {
    if !log10_ic50.is_finite() {
        return Err(MetricError::NonFinite { position: 0 });
    }
    Ok(KCAL_PER_LOG10 * log10_ic50)
}
