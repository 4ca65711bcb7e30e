//! Molecular graphs from SMILES, canonical strings, and fingerprints.

mod canon;
pub mod element;
mod fingerprint;
mod molecule;
mod parse;

pub use canon::canonicalize;
pub use fingerprint::{
    environment_ids, morgan_fingerprint, tanimoto, Fingerprint, FingerprintError,
    FingerprintParams,
};
pub use molecule::{Atom, Bond, BondOrder, Molecule, MoleculeError};
pub use parse::{parse, parse_with_warnings, ParseError, ParseErrorKind, ParseWarning};

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec::Vec;

    fn canon(s: &str) -> String {
        canonicalize(&parse(s).unwrap())
    }

    #[test]
    fn reversed_traversal_agrees() {
        assert_eq!(canon("CCO"), canon("OCC"));
        assert_eq!(canon("CC(=O)O"), canon("OC(C)=O"));
        assert_eq!(canon("c1ccccc1O"), canon("Oc1ccccc1"));
    }

    #[test]
    fn kekule_and_aromatic_spellings_differ() {
        assert_ne!(canon("C1=CC=CC=C1"), canon("c1ccccc1"));
    }

    #[test]
    fn redundant_brackets_are_dropped() {
        assert_eq!(canon("[CH3][CH2][OH]"), "CCO");
        assert_eq!(canon("[cH]1[cH]cccc1"), canon("c1ccccc1"));
        assert_eq!(canon("[nH]1cccc1"), canon("c1cc[nH]c1"));
        assert_eq!(canon("[CH2]"), "[CH2]");
        assert_eq!(canon("C[N+](C)(C)C"), canon("[N+](C)(C)(C)C"));
    }

    #[test]
    fn fixed_point_on_samples() {
        for s in [
            "C",
            "CCO",
            "c1ccccc1",
            "C1=CC=CC=C1",
            "CC(=O)Oc1ccccc1C(=O)O",
            "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
            "C12C3C4C1C5C2C3C45",
            "C1CC2CCC1CC2",
            "[Na+].[Cl-]",
            "OC(=O)C(N)Cc1c[nH]c2ccccc12",
            "c1ccc2cc3ccccc3cc2c1",
            "C#N",
            "O=[N+]([O-])c1ccc(cc1)-c1ccccc1",
            "CC(C)(C)c1cc(C(C)(C)C)cc(C(C)(C)C)c1",
        ] {
            let c = canon(s);
            assert_eq!(canon(&c), c, "{s} -> {c}");
        }
    }

    #[test]
    fn renumbering_invariance_on_symmetric_cages() {
        for s in ["C12C3C4C1C5C2C3C45", "C1CC2CCC1CC2", "C1C2CC3CC1CC(C2)C3"] {
            let m = parse(s).unwrap();
            let n = m.atom_count();
            let base = canonicalize(&m);
            for shift in 1..n {
                let order: Vec<usize> = (0..n).map(|i| (i * 5 + shift) % n).collect();
                let mut sorted = order.clone();
                sorted.sort_unstable();
                if sorted != (0..n).collect::<Vec<_>>() {
                    continue;
                }
                assert_eq!(canonicalize(&m.renumbered(&order)), base, "{s}");
            }
        }
    }
}
