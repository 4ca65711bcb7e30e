//! Allocation-only building blocks for profile-grounded multi-agent molecular
//! debate.
//!
//! This crate holds everything that is a pure function of its inputs: the
//! SMILES molecular-graph layer ([`chem`]), evaluation metrics ([`metrics`]),
//! lexical retrieval ([`text`]), and the vote/termination rules used by the
//! debate coordinator ([`consensus`]). It needs `alloc` but not `std`; IO,
//! networking, and orchestration live in the `scidebate` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod chem;
pub mod consensus;
pub mod hash;
pub mod metrics;
pub mod text;

pub use chem::{
    canonicalize, morgan_fingerprint, parse, parse_with_warnings, tanimoto, Atom, Bond, BondOrder,
    Fingerprint, FingerprintParams, Molecule, MoleculeError, ParseError, ParseErrorKind,
    ParseWarning,
};
