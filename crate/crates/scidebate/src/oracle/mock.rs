use std::collections::HashMap;

use scidebate_core::hash::{unit_interval, Mixer};

use super::{check_batch, Oracle, OracleError, PropertySpec, Slot, DEFAULT_MAX_BATCH};

/// Deterministic stand-in: each score is a seeded hash of (property,
/// canonical SMILES) mapped into the property's range.
#[derive(Debug, Clone, Default)]
pub struct MockOracle {
    seed: u64,
    pinned_property: HashMap<String, f64>,
    pinned: HashMap<(String, String), f64>,
    outage: Option<String>,
}

impl MockOracle {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Every molecule scores `value` for `property`.
    pub fn pin_property(mut self, property: &str, value: f64) -> Self {
        self.pinned_property.insert(property.into(), value);
        self
    }

    /// One molecule scores `value`. `smiles` is canonicalized.
    pub fn pin(mut self, property: &str, smiles: &str, value: f64) -> Self {
        let canon = scidebate_core::parse(smiles)
            .map(|m| m.canonical().to_string())
            .unwrap_or_else(|_| smiles.to_string());
        self.pinned.insert((property.into(), canon), value);
        self
    }

    /// Every batch fails as if the service were down.
    pub fn with_outage(mut self, message: &str) -> Self {
        self.outage = Some(message.into());
        self
    }

    fn score_one(&self, property: &PropertySpec, smiles: &str) -> Slot {
        let name = property.name();
        let canon = scidebate_core::parse(smiles).map_err(|e| format!("invalid SMILES: {e}"))?;
        let canon = canon.canonical();
        if let Some(&v) = self.pinned.get(&(name.clone(), canon.to_string())) {
            return Ok(v);
        }
        if let Some(&v) = self.pinned_property.get(&name) {
            return Ok(v);
        }
        let digest = Mixer::new()
            .word(self.seed)
            .bytes(name.as_bytes())
            .bytes(canon.as_bytes())
            .finish();
        let (lo, hi) = property.range;
        Ok(lo + unit_interval(digest) * (hi - lo))
    }
}

impl Oracle for MockOracle {
    fn score_batch(&self, property: &PropertySpec, smiles: &[String]) -> Result<Vec<Slot>, OracleError> {
        check_batch(smiles.len(), DEFAULT_MAX_BATCH)?;
        if let Some(m) = &self.outage {
            return Err(OracleError::Unavailable(m.clone()));
        }
        Ok(smiles.iter().map(|s| self.score_one(property, s)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qed() -> PropertySpec {
        "qed".parse().unwrap()
    }

    #[test]
    fn deterministic_and_in_range() {
        let o = MockOracle::new(7);
        let mols: Vec<String> = ["CCO", "OCC", "c1ccccc1", "CCN"].iter().map(|s| s.to_string()).collect();
        let a = o.score_batch(&qed(), &mols).unwrap();
        let b = o.score_batch(&qed(), &mols).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], a[1]);
        assert!(a.iter().all(|s| (0.0..=1.0).contains(s.as_ref().unwrap())));
        let sa = o.score_batch(&"sa".parse().unwrap(), &mols).unwrap();
        assert!(sa.iter().all(|s| (1.0..=10.0).contains(s.as_ref().unwrap())));
        assert_ne!(MockOracle::new(8).score_batch(&qed(), &mols).unwrap(), a);
    }

    #[test]
    fn slots_pins_and_outage() {
        let o = MockOracle::new(0).pin_property("qed", 0.5).pin("qed", "OCC", 0.9);
        let r = o
            .score_batch(&qed(), &["CCO".into(), "C".into(), "xyz(".into()])
            .unwrap();
        assert_eq!(r[0], Ok(0.9));
        assert_eq!(r[1], Ok(0.5));
        assert!(r[2].is_err());
        assert!(o.score_batch(&qed(), &[]).unwrap().is_empty());
        let down = MockOracle::new(0).with_outage("maintenance");
        assert!(matches!(down.score_batch(&qed(), &["C".into()]), Err(OracleError::Unavailable(_))));
        let big = vec!["C".to_string(); 129];
        assert!(matches!(o.score_batch(&qed(), &big), Err(OracleError::BatchTooLarge { .. })));
    }
}
