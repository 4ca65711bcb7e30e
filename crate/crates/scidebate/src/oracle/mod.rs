//! Property oracles and the lead-optimization constraint checker.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

mod constraints;
mod http;
mod mock;

pub use constraints::{check_constraints, ConstraintCheck, ConstraintReport, Verdict};
pub use http::{HealthStatus, HttpOracle, HttpOracleConfig};
pub use mock::MockOracle;

pub const DEFAULT_MAX_BATCH: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropertyKind {
    Qed,
    Sa,
    Gsk3b,
    Drd2,
    Jnk3,
    Docking(String),
    Affinity(String),
}

/// A named oracle property with its optimization direction and value range.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertySpec {
    pub kind: PropertyKind,
    pub direction: Direction,
    /// Inclusive bounds. Docking and affinity ranges are nominal and only
    /// shape mock scores.
    pub range: (f64, f64),
}

impl PropertySpec {
    pub fn new(kind: PropertyKind) -> Self {
        use Direction::*;
        let (direction, range) = match kind {
            PropertyKind::Qed | PropertyKind::Gsk3b | PropertyKind::Drd2 | PropertyKind::Jnk3 => {
                (Maximize, (0.0, 1.0))
            }
            PropertyKind::Sa => (Minimize, (1.0, 10.0)),
            PropertyKind::Docking(_) => (Minimize, (-15.0, 0.0)),
            PropertyKind::Affinity(_) => (Minimize, (-4.0, 4.0)),
        };
        Self {
            kind,
            direction,
            range,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            PropertyKind::Qed => "qed".into(),
            PropertyKind::Sa => "sa".into(),
            PropertyKind::Gsk3b => "gsk3b".into(),
            PropertyKind::Drd2 => "drd2".into(),
            PropertyKind::Jnk3 => "jnk3".into(),
            PropertyKind::Docking(t) => format!("docking:{t}"),
            PropertyKind::Affinity(t) => format!("affinity:{t}"),
        }
    }

    /// `a` is better than `b` under this property's direction.
    pub fn better(&self, a: f64, b: f64) -> bool {
        match self.direction {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }
}

impl fmt::Display for PropertySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for PropertySpec {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let target = |t: &str| -> Result<String, OracleError> {
            if t.is_empty() {
                Err(OracleError::UnknownProperty(s.into()))
            } else {
                Ok(t.into())
            }
        };
        let kind = match s {
            "qed" => PropertyKind::Qed,
            "sa" => PropertyKind::Sa,
            "gsk3b" => PropertyKind::Gsk3b,
            "drd2" => PropertyKind::Drd2,
            "jnk3" => PropertyKind::Jnk3,
            _ => {
                if let Some(t) = s.strip_prefix("docking:") {
                    PropertyKind::Docking(target(t)?)
                } else if let Some(t) = s.strip_prefix("affinity:") {
                    PropertyKind::Affinity(target(t)?)
                } else {
                    return Err(OracleError::UnknownProperty(s.into()));
                }
            }
        };
        Ok(Self::new(kind))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("unknown property {0:?}")]
    UnknownProperty(String),
    #[error("batch of {got} exceeds the limit of {max}")]
    BatchTooLarge { got: usize, max: usize },
    #[error("oracle unavailable: {0}")]
    Unavailable(String),
    #[error("oracle protocol violation: {0}")]
    Protocol(String),
}

/// Per-molecule outcome. A failed slot carries the service's message and is
/// never silently zero.
pub type Slot = Result<f64, String>;

pub trait Oracle: Send + Sync {
    /// One slot per input, order-preserving. `smiles.len()` must not exceed
    /// [`Oracle::max_batch`].
    fn score_batch(&self, property: &PropertySpec, smiles: &[String]) -> Result<Vec<Slot>, OracleError>;

    fn max_batch(&self) -> usize {
        DEFAULT_MAX_BATCH
    }
}

impl<T: Oracle + ?Sized> Oracle for &T {
    fn score_batch(&self, property: &PropertySpec, smiles: &[String]) -> Result<Vec<Slot>, OracleError> {
        (**self).score_batch(property, smiles)
    }

    fn max_batch(&self) -> usize {
        (**self).max_batch()
    }
}

impl<T: Oracle + ?Sized> Oracle for Box<T> {
    fn score_batch(&self, property: &PropertySpec, smiles: &[String]) -> Result<Vec<Slot>, OracleError> {
        (**self).score_batch(property, smiles)
    }

    fn max_batch(&self) -> usize {
        (**self).max_batch()
    }
}

/// Scores any number of molecules in `max_batch` chunks.
pub fn score_all(oracle: &dyn Oracle, property: &PropertySpec, smiles: &[String]) -> Result<Vec<Slot>, OracleError> {
    let mut out = Vec::with_capacity(smiles.len());
    for chunk in smiles.chunks(oracle.max_batch().max(1)) {
        out.extend(oracle.score_batch(property, chunk)?);
    }
    Ok(out)
}

pub(crate) fn check_batch(len: usize, max: usize) -> Result<(), OracleError> {
    if len > max {
        Err(OracleError::BatchTooLarge { got: len, max })
    } else {
        Ok(())
    }
}
