//! Circular (Morgan/ECFP-style) fingerprints and Tanimoto similarity.
//!
//! Each atom starts from a digest of (atomic number, formal charge, degree,
//! aromatic flag, attached hydrogens). At every iteration an atom's new
//! identifier digests the iteration number, its previous identifier and the
//! list of (bond order code, neighbor identifier) pairs sorted ascending.
//! Every identifier from iteration 0 through `radius` sets bit
//! `id mod nbits`. Digests use [`crate::hash::Mixer`], so bit positions are
//! identical across platforms and processes.

use alloc::vec::Vec;
use core::fmt;

use super::molecule::Molecule;
use crate::hash::Mixer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FingerprintParams {
    radius: u32,
    nbits: usize,
}

impl Default for FingerprintParams {
    fn default() -> Self {
        Self {
            radius: 2,
            nbits: 2048,
        }
    }
}

impl FingerprintParams {
    /// `nbits` must be a power of two no smaller than 64.
    pub fn new(radius: u32, nbits: usize) -> Result<Self, FingerprintError> {
        if nbits < 64 || !nbits.is_power_of_two() {
            return Err(FingerprintError::InvalidWidth(nbits));
        }
        Ok(Self { radius, nbits })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FingerprintError {
    InvalidWidth(usize),
    WidthMismatch { left: usize, right: usize },
}

impl fmt::Display for FingerprintError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FingerprintError::InvalidWidth(n) => {
                write!(f, "fingerprint width {n} is not a power of two >= 64")
            }
            FingerprintError::WidthMismatch { left, right } => {
                write!(f, "fingerprint widths differ: {left} vs {right}")
            }
        }
    }
}

impl core::error::Error for FingerprintError {}

/// Fixed-width bit vector with a cached population count.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
    radius: u32,
    popcount: u32,
}

impl Fingerprint {
    /// Builds a fingerprint with the given bits set. Indices are folded by
    /// `nbits`.
    pub fn from_indices(
        params: FingerprintParams,
        indices: impl IntoIterator<Item = usize>,
    ) -> Self {
        let mut words = alloc::vec![0u64; params.nbits / 64];
        for i in indices {
            let i = i & (params.nbits - 1);
            words[i / 64] |= 1 << (i % 64);
        }
        let popcount = words.iter().map(|w| w.count_ones()).sum();
        Self {
            words,
            nbits: params.nbits,
            radius: params.radius,
            popcount,
        }
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn popcount(&self) -> u32 {
        self.popcount
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_set(&self, bit: usize) -> bool {
        bit < self.nbits && self.words[bit / 64] & (1 << (bit % 64)) != 0
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter(move |b| w & (1u64 << b) != 0).map(move |b| wi * 64 + b)
        })
    }
}

/// Environment identifiers for iterations `0..=radius`, indexed
/// `[iteration][atom]`.
pub fn environment_ids(mol: &Molecule, radius: u32) -> Vec<Vec<u64>> {
    let n = mol.atom_count();
    let mut layers = Vec::with_capacity(radius as usize + 1);
    let initial: Vec<u64> = (0..n)
        .map(|i| {
            let a = &mol.atoms()[i];
            Mixer::new()
                .word(a.atomic_number as u64)
                .word(a.charge as i64 as u64)
                .word(mol.degree(i) as u64)
                .word(a.aromatic as u64)
                .word(mol.hydrogen_count(i) as u64)
                .finish()
        })
        .collect();
    layers.push(initial);
    for iteration in 1..=radius {
        let prev = layers.last().expect("layer 0 exists");
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut env: Vec<(u8, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(nb, b)| (mol.bonds()[b].order.code(), prev[nb]))
                    .collect();
                env.sort_unstable();
                let mut m = Mixer::new();
                m.word(iteration as u64).word(prev[i]);
                for (code, id) in env {
                    m.word(code as u64).word(id);
                }
                m.finish()
            })
            .collect();
        layers.push(next);
    }
    layers
}

pub fn morgan_fingerprint(mol: &Molecule, params: FingerprintParams) -> Fingerprint {
    let ids = environment_ids(mol, params.radius);
    Fingerprint::from_indices(
        params,
        ids.iter()
            .flatten()
            .map(|&id| (id & (params.nbits as u64 - 1)) as usize),
    )
}

/// |a ∧ b| / |a ∨ b|, defined as 1.0 when both are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    if a.nbits != b.nbits {
        return Err(FingerprintError::WidthMismatch {
            left: a.nbits,
            right: b.nbits,
        });
    }
    let common: u32 = a
        .words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x & y).count_ones())
        .sum();
    let union = a.popcount + b.popcount - common;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(common as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse;
    use alloc::collections::BTreeSet;

    fn fp(s: &str) -> Fingerprint {
        morgan_fingerprint(&parse(s).unwrap(), FingerprintParams::default())
    }

    #[test]
    fn params_validation() {
        assert!(FingerprintParams::new(2, 1024).is_ok());
        assert_eq!(
            FingerprintParams::new(2, 1000),
            Err(FingerprintError::InvalidWidth(1000))
        );
        assert_eq!(
            FingerprintParams::new(2, 32),
            Err(FingerprintError::InvalidWidth(32))
        );
    }

    #[test]
    fn methane_radius_zero_sets_one_bit() {
        let p = FingerprintParams::new(0, 2048).unwrap();
        let f = morgan_fingerprint(&parse("C").unwrap(), p);
        assert_eq!(f.popcount(), 1);
        assert_eq!(f.ones().count(), 1);
    }

    #[test]
    fn self_similarity_is_one() {
        for s in ["C", "CCO", "c1ccccc1O", "[Na+].[Cl-]"] {
            let f = fp(s);
            assert_eq!(tanimoto(&f, &f).unwrap(), 1.0);
        }
    }

    #[test]
    fn tanimoto_hand_cases() {
        let p = FingerprintParams::default();
        let a = Fingerprint::from_indices(p, [1, 2]);
        let b = Fingerprint::from_indices(p, [2, 3]);
        assert!((tanimoto(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let c = Fingerprint::from_indices(p, [10, 11]);
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        let empty = Fingerprint::from_indices(p, []);
        assert_eq!(tanimoto(&empty, &empty).unwrap(), 1.0);
        assert_eq!(tanimoto(&a, &empty).unwrap(), 0.0);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let a = Fingerprint::from_indices(FingerprintParams::new(2, 64).unwrap(), [1]);
        let b = Fingerprint::from_indices(FingerprintParams::new(2, 128).unwrap(), [1]);
        assert_eq!(
            tanimoto(&a, &b),
            Err(FingerprintError::WidthMismatch {
                left: 64,
                right: 128
            })
        );
    }

    #[test]
    fn shared_fragment_environments() {
        // Hand enumeration for CCO vs CCN (atoms in written order):
        //   r0: C(deg1,H3), C(deg2,H2) identical in both; O/N differ.
        //   r1: terminal C sees only the middle C -> identical; the middle C
        //       sees O vs N -> differs; the heteroatom differs.
        // So exactly three identifiers are shared: C0@r0, C1@r0, C0@r1.
        let ethanol = environment_ids(&parse("CCO").unwrap(), 1);
        let ethylamine = environment_ids(&parse("CCN").unwrap(), 1);
        assert_eq!(ethanol[0][0], ethylamine[0][0]);
        assert_eq!(ethanol[0][1], ethylamine[0][1]);
        assert_eq!(ethanol[1][0], ethylamine[1][0]);
        assert_ne!(ethanol[0][2], ethylamine[0][2]);
        assert_ne!(ethanol[1][1], ethylamine[1][1]);
        assert_ne!(ethanol[1][2], ethylamine[1][2]);
        let a: BTreeSet<u64> = ethanol.iter().flatten().copied().collect();
        let b: BTreeSet<u64> = ethylamine.iter().flatten().copied().collect();
        assert_eq!(a.intersection(&b).count(), 3);

        let p = FingerprintParams::new(1, 2048).unwrap();
        let fa = morgan_fingerprint(&parse("CCO").unwrap(), p);
        let fb = morgan_fingerprint(&parse("CCN").unwrap(), p);
        for id in [ethanol[0][0], ethanol[0][1], ethanol[1][0]] {
            let bit = (id % 2048) as usize;
            assert!(fa.is_set(bit) && fb.is_set(bit));
        }
    }

    #[test]
    fn independent_of_atom_order() {
        let m = parse("OC(=O)c1ccccc1N").unwrap();
        let order: Vec<usize> = (0..m.atom_count()).rev().collect();
        let r = m.renumbered(&order);
        let p = FingerprintParams::default();
        assert_eq!(morgan_fingerprint(&m, p), morgan_fingerprint(&r, p));
    }
}
