//! SMILES reader.
//!
//! Supports the organic subset, aromatic lowercase atoms, bracket atoms with
//! isotope, chirality, hydrogen count, charge and atom class, ring closures
//! (`0`-`9` and `%nn`), branches, dot-disconnected fragments and the bond
//! symbols `- = # :`. Directional bonds (`/`, `\`), chirality and isotopes are
//! read and dropped with a [`ParseWarning`]. Valences are not checked.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use super::element;
use super::molecule::{Atom, Bond, BondOrder, Molecule, MoleculeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedEnd,
    UnbalancedParen,
    EmptyBranch,
    UnclosedBracket,
    UnknownElement,
    UnmatchedRingClosure,
    RingBondConflict,
    DanglingBond,
    InvalidAromaticBond,
    ChargeOutOfRange,
    SelfBond,
    DuplicateBond,
    AromaticNotAllowed,
    Structure(MoleculeError),
}

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match &self.kind {
            ParseErrorKind::Empty => "empty SMILES",
            ParseErrorKind::UnexpectedChar(c) => {
                return write!(f, "unexpected character {c:?} at offset {}", self.offset)
            }
            ParseErrorKind::UnexpectedEnd => "unexpected end of input",
            ParseErrorKind::UnbalancedParen => "unbalanced parenthesis",
            ParseErrorKind::EmptyBranch => "empty branch",
            ParseErrorKind::UnclosedBracket => "unclosed bracket atom",
            ParseErrorKind::UnknownElement => "unknown element",
            ParseErrorKind::UnmatchedRingClosure => "unmatched ring closure",
            ParseErrorKind::RingBondConflict => "conflicting ring-closure bond symbols",
            ParseErrorKind::DanglingBond => "bond symbol without a following atom",
            ParseErrorKind::InvalidAromaticBond => "aromatic bond between non-aromatic atoms",
            ParseErrorKind::ChargeOutOfRange => "charge out of range",
            ParseErrorKind::SelfBond => "ring closure bonds an atom to itself",
            ParseErrorKind::DuplicateBond => "atoms bonded twice",
            ParseErrorKind::AromaticNotAllowed => "element cannot be aromatic",
            ParseErrorKind::Structure(e) => return write!(f, "{e} (offset {})", self.offset),
        };
        write!(f, "{what} at offset {}", self.offset)
    }
}

impl core::error::Error for ParseError {}

/// Information dropped while reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseWarning {
    StereoDiscarded { offset: usize },
    IsotopeDiscarded { offset: usize },
    AtomClassDiscarded { offset: usize },
}

/// Parses a SMILES string into a [`Molecule`].
pub fn parse(smiles: &str) -> Result<Molecule, ParseError> {
    parse_with_warnings(smiles).map(|(m, _)| m)
}

/// Like [`parse`], also returning what was dropped on the way.
pub fn parse_with_warnings(smiles: &str) -> Result<(Molecule, Vec<ParseWarning>), ParseError> {
    let mut p = Parser {
        src: smiles.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        bonded: BTreeSet::new(),
        warnings: Vec::new(),
    };
    p.run()?;
    let Parser {
        atoms,
        bonds,
        warnings,
        ..
    } = p;
    let mol = Molecule::new(atoms, bonds).map_err(|e| ParseError {
        offset: 0,
        kind: ParseErrorKind::Structure(e),
    })?;
    Ok((mol, warnings))
}

#[derive(Clone, Copy)]
enum BondSymbol {
    Order(BondOrder),
    Directional,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    bonded: BTreeSet<(usize, usize)>,
    warnings: Vec<ParseWarning>,
}

struct OpenRing {
    atom: usize,
    bond: Option<(BondSymbol, usize)>,
    offset: usize,
}

fn err<T>(offset: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { offset, kind })
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.src.get(self.pos + n).copied()
    }

    fn current_char(&self) -> char {
        core::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .unwrap_or(self.src[self.pos] as char)
    }

    fn run(&mut self) -> Result<(), ParseError> {
        if self.src.is_empty() {
            return err(0, ParseErrorKind::Empty);
        }
        let mut prev: Option<usize> = None;
        // (atom the branch hangs from, offset of '(', atoms count at open)
        let mut branches: Vec<(usize, usize, usize)> = Vec::new();
        let mut pending: Option<(BondSymbol, usize)> = None;
        let mut rings: BTreeMap<u16, OpenRing> = BTreeMap::new();

        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let Some(atom) = prev else {
                        return err(start, ParseErrorKind::UnexpectedChar('('));
                    };
                    if let Some((_, off)) = pending {
                        return err(off, ParseErrorKind::DanglingBond);
                    }
                    branches.push((atom, start, self.atoms.len()));
                    self.pos += 1;
                }
                b')' => {
                    let Some((atom, _, count)) = branches.pop() else {
                        return err(start, ParseErrorKind::UnbalancedParen);
                    };
                    if let Some((_, off)) = pending {
                        return err(off, ParseErrorKind::DanglingBond);
                    }
                    if count == self.atoms.len() {
                        return err(start, ParseErrorKind::EmptyBranch);
                    }
                    prev = Some(atom);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if prev.is_none() || pending.is_some() {
                        return err(start, ParseErrorKind::UnexpectedChar(c as char));
                    }
                    let symbol = match c {
                        b'-' => BondSymbol::Order(BondOrder::Single),
                        b'=' => BondSymbol::Order(BondOrder::Double),
                        b'#' => BondSymbol::Order(BondOrder::Triple),
                        b':' => BondSymbol::Order(BondOrder::Aromatic),
                        _ => {
                            self.warnings
                                .push(ParseWarning::StereoDiscarded { offset: start });
                            BondSymbol::Directional
                        }
                    };
                    pending = Some((symbol, start));
                    self.pos += 1;
                }
                b'.' => {
                    if let Some((_, off)) = pending {
                        return err(off, ParseErrorKind::DanglingBond);
                    }
                    if prev.is_none() {
                        return err(start, ParseErrorKind::UnexpectedChar('.'));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(atom) = prev else {
                        return err(start, ParseErrorKind::UnexpectedChar(c as char));
                    };
                    let number = self.ring_number()?;
                    let bond = pending.take();
                    match rings.remove(&number) {
                        None => {
                            rings.insert(
                                number,
                                OpenRing {
                                    atom,
                                    bond,
                                    offset: start,
                                },
                            );
                        }
                        Some(open) => {
                            let symbol = match (open.bond, bond) {
                                (Some((a, _)), Some((b, off))) => {
                                    if !same_symbol(a, b) {
                                        return err(off, ParseErrorKind::RingBondConflict);
                                    }
                                    Some((a, off))
                                }
                                (a, b) => a.or(b),
                            };
                            if open.atom == atom {
                                return err(start, ParseErrorKind::SelfBond);
                            }
                            self.add_bond(open.atom, atom, symbol, start)?;
                        }
                    }
                }
                _ => {
                    let atom = self.atom()?;
                    let index = self.atoms.len();
                    self.atoms.push(atom);
                    match prev {
                        Some(p) => self.add_bond(p, index, pending.take(), start)?,
                        None => {
                            if let Some((_, off)) = pending {
                                return err(off, ParseErrorKind::DanglingBond);
                            }
                        }
                    }
                    prev = Some(index);
                }
            }
        }
        if let Some((_, off)) = pending {
            return err(off, ParseErrorKind::DanglingBond);
        }
        if prev.is_none() {
            return err(self.src.len(), ParseErrorKind::UnexpectedEnd);
        }
        if let Some(&(_, off, _)) = branches.first() {
            return err(off, ParseErrorKind::UnbalancedParen);
        }
        if let Some(open) = rings.values().min_by_key(|r| r.offset) {
            return err(open.offset, ParseErrorKind::UnmatchedRingClosure);
        }
        Ok(())
    }

    fn ring_number(&mut self) -> Result<u16, ParseError> {
        let start = self.pos;
        if self.peek() == Some(b'%') {
            let (Some(a), Some(b)) = (self.peek_at(1), self.peek_at(2)) else {
                return err(start, ParseErrorKind::UnexpectedEnd);
            };
            if !(a.is_ascii_digit() && b.is_ascii_digit()) {
                return err(start + 1, ParseErrorKind::UnexpectedChar('%'));
            }
            self.pos += 3;
            Ok(((a - b'0') * 10 + (b - b'0')) as u16)
        } else {
            let d = self.src[self.pos] - b'0';
            self.pos += 1;
            Ok(d as u16)
        }
    }

    fn add_bond(
        &mut self,
        a: usize,
        b: usize,
        symbol: Option<(BondSymbol, usize)>,
        at: usize,
    ) -> Result<(), ParseError> {
        let both_aromatic = self.atoms[a].aromatic && self.atoms[b].aromatic;
        let order = match symbol {
            None => {
                if both_aromatic {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                }
            }
            Some((BondSymbol::Directional, _)) => BondOrder::Single,
            Some((BondSymbol::Order(BondOrder::Aromatic), off)) => {
                if !both_aromatic {
                    return err(off, ParseErrorKind::InvalidAromaticBond);
                }
                BondOrder::Aromatic
            }
            Some((BondSymbol::Order(o), _)) => o,
        };
        if !self.bonded.insert((a.min(b), a.max(b))) {
            return err(at, ParseErrorKind::DuplicateBond);
        }
        self.bonds.push(Bond::new(a, b, order));
        Ok(())
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let start = self.pos;
        let c = self.src[self.pos];
        if c == b'[' {
            return self.bracket_atom();
        }
        let (z, aromatic, len) = match (c, self.peek_at(1)) {
            (b'C', Some(b'l')) => (17, false, 2),
            (b'B', Some(b'r')) => (35, false, 2),
            (b'B', _) => (5, false, 1),
            (b'C', _) => (6, false, 1),
            (b'N', _) => (7, false, 1),
            (b'O', _) => (8, false, 1),
            (b'P', _) => (15, false, 1),
            (b'S', _) => (16, false, 1),
            (b'F', _) => (9, false, 1),
            (b'I', _) => (53, false, 1),
            (b'b', _) => (5, true, 1),
            (b'c', _) => (6, true, 1),
            (b'n', _) => (7, true, 1),
            (b'o', _) => (8, true, 1),
            (b'p', _) => (15, true, 1),
            (b's', _) => (16, true, 1),
            _ if c.is_ascii_uppercase() => return err(start, ParseErrorKind::UnknownElement),
            _ => return err(start, ParseErrorKind::UnexpectedChar(self.current_char())),
        };
        self.pos += len;
        Ok(Atom::bare(z, aromatic))
    }

    fn bracket_atom(&mut self) -> Result<Atom, ParseError> {
        let open = self.pos;
        self.pos += 1;

        let iso_start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos > iso_start {
            self.warnings
                .push(ParseWarning::IsotopeDiscarded { offset: iso_start });
        }

        let sym_start = self.pos;
        let (z, aromatic) = self.bracket_symbol()?;
        if aromatic && !element::may_be_aromatic(z) {
            return err(sym_start, ParseErrorKind::AromaticNotAllowed);
        }

        if self.peek() == Some(b'@') {
            let chir = self.pos;
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            } else if let (Some(a), Some(b)) = (self.peek(), self.peek_at(1)) {
                if matches!(
                    (a, b),
                    (b'T', b'H') | (b'A', b'L') | (b'S', b'P') | (b'T', b'B') | (b'O', b'H')
                ) && self.peek_at(2).is_some_and(|d| d.is_ascii_digit())
                {
                    self.pos += 2;
                    while self.peek().is_some_and(|d| d.is_ascii_digit()) {
                        self.pos += 1;
                    }
                }
            }
            self.warnings
                .push(ParseWarning::StereoDiscarded { offset: chir });
        }

        let mut hydrogens = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = 1;
            if let Some(d) = self.peek().filter(u8::is_ascii_digit) {
                hydrogens = d - b'0';
                self.pos += 1;
            }
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let charge_start = self.pos;
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                let mut mag: i32 = 0;
                while let Some(d) = self.peek().filter(u8::is_ascii_digit) {
                    mag = mag * 10 + (d - b'0') as i32;
                    self.pos += 1;
                    if mag > 15 {
                        return err(charge_start, ParseErrorKind::ChargeOutOfRange);
                    }
                }
                charge = unit * mag;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
                if charge.abs() > 15 {
                    return err(charge_start, ParseErrorKind::ChargeOutOfRange);
                }
            }
        }

        if self.peek() == Some(b':') {
            let class = self.pos;
            self.pos += 1;
            let digits = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == digits {
                return err(class, ParseErrorKind::UnexpectedChar(':'));
            }
            self.warnings
                .push(ParseWarning::AtomClassDiscarded { offset: class });
        }

        match self.peek() {
            Some(b']') => self.pos += 1,
            Some(_) => {
                return err(
                    self.pos,
                    ParseErrorKind::UnexpectedChar(self.current_char()),
                )
            }
            None => return err(open, ParseErrorKind::UnclosedBracket),
        }

        Ok(Atom {
            atomic_number: z,
            charge: charge as i8,
            aromatic,
            explicit_h: Some(hydrogens),
        })
    }

    fn bracket_symbol(&mut self) -> Result<(u8, bool), ParseError> {
        let start = self.pos;
        let Some(c) = self.peek() else {
            return err(start, ParseErrorKind::UnclosedBracket);
        };
        if c.is_ascii_lowercase() {
            for (text, z) in [("se", 34u8), ("as", 33), ("te", 52)] {
                if self.src[self.pos..].starts_with(text.as_bytes()) {
                    self.pos += 2;
                    return Ok((z, true));
                }
            }
            let z = match c {
                b'b' => 5,
                b'c' => 6,
                b'n' => 7,
                b'o' => 8,
                b'p' => 15,
                b's' => 16,
                _ => return err(start, ParseErrorKind::UnknownElement),
            };
            self.pos += 1;
            return Ok((z, true));
        }
        if !c.is_ascii_uppercase() {
            return err(start, ParseErrorKind::UnexpectedChar(self.current_char()));
        }
        if let Some(second) = self.peek_at(1).filter(u8::is_ascii_lowercase) {
            let two = [c, second];
            if let Some(z) = core::str::from_utf8(&two).ok().and_then(element::atomic_number) {
                self.pos += 2;
                return Ok((z, false));
            }
        }
        let one = [c];
        match core::str::from_utf8(&one).ok().and_then(element::atomic_number) {
            Some(z) => {
                self.pos += 1;
                Ok((z, false))
            }
            None => err(start, ParseErrorKind::UnknownElement),
        }
    }
}

fn same_symbol(a: BondSymbol, b: BondSymbol) -> bool {
    match (a, b) {
        (BondSymbol::Order(x), BondSymbol::Order(y)) => x == y,
        (BondSymbol::Directional, BondSymbol::Directional) => true,
        (BondSymbol::Directional, BondSymbol::Order(o))
        | (BondSymbol::Order(o), BondSymbol::Directional) => o == BondOrder::Single,
    }
}
