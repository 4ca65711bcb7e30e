use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::element;

/// Bond multiplicity as written in SMILES.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Stable small-integer code used in invariants and hashing.
    pub const fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    /// Contribution to the valence sum used for implicit hydrogens.
    pub(crate) const fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Atom {
    pub atomic_number: u8,
    pub charge: i8,
    pub aromatic: bool,
    /// Hydrogen count written inside brackets. `None` means the atom was
    /// written bare and carries implicit hydrogens from its default valence.
    pub explicit_h: Option<u8>,
}

impl Atom {
    /// An organic-subset atom with implicit hydrogens.
    pub const fn bare(atomic_number: u8, aromatic: bool) -> Self {
        Self {
            atomic_number,
            charge: 0,
            aromatic,
            explicit_h: None,
        }
    }

    pub fn symbol(&self) -> &'static str {
        element::symbol(self.atomic_number).unwrap_or("?")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub const fn new(a: usize, b: usize, order: BondOrder) -> Self {
        Self { a, b, order }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Structural invariant violated while assembling a [`Molecule`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoleculeError {
    Empty,
    UnknownElement(u8),
    BondOutOfRange { bond: usize },
    SelfBond { atom: usize },
    DuplicateBond { a: usize, b: usize },
    AromaticBondOnAliphaticAtom { bond: usize },
    AromaticNotAllowed { atom: usize },
    /// Implicit hydrogens requested on a charged or non-organic atom.
    ImplicitHydrogenNotAllowed { atom: usize },
}

impl fmt::Display for MoleculeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoleculeError::Empty => write!(f, "molecule has no atoms"),
            MoleculeError::UnknownElement(z) => write!(f, "unknown atomic number {z}"),
            MoleculeError::BondOutOfRange { bond } => {
                write!(f, "bond {bond} references a missing atom")
            }
            MoleculeError::SelfBond { atom } => write!(f, "atom {atom} is bonded to itself"),
            MoleculeError::DuplicateBond { a, b } => {
                write!(f, "atoms {a} and {b} are bonded more than once")
            }
            MoleculeError::AromaticBondOnAliphaticAtom { bond } => {
                write!(f, "aromatic bond {bond} touches a non-aromatic atom")
            }
            MoleculeError::AromaticNotAllowed { atom } => {
                write!(f, "atom {atom} cannot be aromatic")
            }
            MoleculeError::ImplicitHydrogenNotAllowed { atom } => write!(
                f,
                "atom {atom} needs an explicit hydrogen count (charged or outside the organic subset)"
            ),
        }
    }
}

impl core::error::Error for MoleculeError {}

/// An immutable molecular graph with its canonical SMILES computed at
/// construction.
#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// Per atom: (neighbor, bond index).
    adjacency: Vec<Vec<(usize, usize)>>,
    hydrogens: Vec<u8>,
    canonical: String,
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for Molecule {}

impl Molecule {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, MoleculeError> {
        if atoms.is_empty() {
            return Err(MoleculeError::Empty);
        }
        for (i, atom) in atoms.iter().enumerate() {
            if element::symbol(atom.atomic_number).is_none() {
                return Err(MoleculeError::UnknownElement(atom.atomic_number));
            }
            if atom.aromatic && !element::may_be_aromatic(atom.atomic_number) {
                return Err(MoleculeError::AromaticNotAllowed { atom: i });
            }
            if atom.explicit_h.is_none()
                && (atom.charge != 0
                    || !element::is_organic_subset(atom.atomic_number)
                    || (atom.aromatic && !element::may_be_bare_aromatic(atom.atomic_number)))
            {
                return Err(MoleculeError::ImplicitHydrogenNotAllowed { atom: i });
            }
        }
        let mut seen = BTreeSet::new();
        let mut adjacency = alloc::vec![Vec::new(); atoms.len()];
        for (i, bond) in bonds.iter().enumerate() {
            if bond.a >= atoms.len() || bond.b >= atoms.len() {
                return Err(MoleculeError::BondOutOfRange { bond: i });
            }
            if bond.a == bond.b {
                return Err(MoleculeError::SelfBond { atom: bond.a });
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen.insert(key) {
                return Err(MoleculeError::DuplicateBond { a: key.0, b: key.1 });
            }
            if bond.order == BondOrder::Aromatic
                && !(atoms[bond.a].aromatic && atoms[bond.b].aromatic)
            {
                return Err(MoleculeError::AromaticBondOnAliphaticAtom { bond: i });
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        let mut mol = Molecule {
            hydrogens: Vec::new(),
            atoms,
            bonds,
            adjacency,
            canonical: String::new(),
        };
        mol.hydrogens = (0..mol.atoms.len())
            .map(|i| match mol.atoms[i].explicit_h {
                Some(h) => h,
                None => mol.implicit_hydrogens(i),
            })
            .collect();
        mol.canonical = super::canon::canonical_smiles(&mol);
        Ok(mol)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Neighbors of `atom` as (neighbor index, bond index).
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    /// Attached hydrogens, explicit or implied by the default valence.
    pub fn hydrogen_count(&self, atom: usize) -> u8 {
        self.hydrogens[atom]
    }

    /// The cached canonical SMILES.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    /// Hydrogens this atom would carry if written bare, given its bonds, or
    /// `None` when the bonds already exceed every default valence.
    pub(crate) fn bare_hydrogens(&self, atom: usize) -> Option<u8> {
        let a = &self.atoms[atom];
        let sum: u32 = self.adjacency[atom]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.valence() as u32)
            .sum();
        let fit = |sum: u32| {
            element::default_valences(a.atomic_number)
                .iter()
                .map(|&v| v as u32)
                .find(|&v| v >= sum)
                .map(|v| (v - sum) as u8)
        };
        // An aromatic atom normally spends one extra valence on the ring's
        // pi system. Lone-pair donors (`o`, `s`) and carbons with an
        // exocyclic double bond (`c(=O)`) do not.
        if a.aromatic {
            fit(sum + 1).or_else(|| fit(sum))
        } else {
            fit(sum)
        }
    }

    fn implicit_hydrogens(&self, atom: usize) -> u8 {
        self.bare_hydrogens(atom).unwrap_or(0)
    }

    /// Rebuilds the molecule with atoms reordered so that new atom `i` is old
    /// atom `order[i]`. Bonds are listed in the same relative order.
    ///
    /// # Panics
    /// Panics if `order` is not a permutation of `0..atom_count()`.
    pub fn renumbered(&self, order: &[usize]) -> Molecule {
        assert_eq!(order.len(), self.atoms.len(), "order must be a permutation");
        let mut inverse = alloc::vec![usize::MAX; order.len()];
        for (new, &old) in order.iter().enumerate() {
            assert!(inverse[old] == usize::MAX, "order must be a permutation");
            inverse[old] = new;
        }
        let atoms = order.iter().map(|&old| self.atoms[old]).collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond::new(inverse[b.a], inverse[b.b], b.order))
            .collect();
        Molecule::new(atoms, bonds).expect("renumbering preserves validity")
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}
