//! Canonical SMILES.
//!
//! Atoms are ranked by iterative partition refinement starting from
//! (degree, element, aromatic, charge, hydrogen count) and refined by the
//! sorted (neighbor rank, bond order) multiset. Cells that stay tied are
//! broken by individualizing each member in turn and refining again; the
//! lexicographically smallest emitted string over that search tree is the
//! canonical form. Subtrees rooted at atoms already known to be equivalent
//! under an automorphism (found whenever two leaves emit the same string) are
//! skipped.
//!
//! Emission is a depth-first walk that starts each fragment at its lowest
//! ranked atom and visits neighbors in rank order. Atoms are written bare
//! whenever the bare spelling implies the same hydrogen count within a default
//! valence, so `[CH3]O` and `CO` agree while hypervalent `[I]` keeps brackets.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::element;
use super::molecule::{BondOrder, Molecule};

/// Canonical SMILES of `mol`. Equivalent to [`Molecule::canonical`].
pub fn canonicalize(mol: &Molecule) -> String {
    String::from(mol.canonical())
}

pub(crate) fn canonical_smiles(mol: &Molecule) -> String {
    let ranks = refine(mol, initial_ranks(mol));
    let mut search = Search {
        mol,
        best: None,
        seen: BTreeMap::new(),
        automorphisms: Vec::new(),
        path: Vec::new(),
    };
    search.descend(ranks);
    search.best.map(|(s, _)| s).unwrap_or_default()
}

/// Rank = number of atoms whose key sorts strictly before this atom's key.
fn ranks_from_keys<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = alloc::vec![0u32; keys.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = if pos > 0 && keys[order[pos - 1]] == keys[i] {
            ranks[order[pos - 1]]
        } else {
            pos as u32
        };
    }
    ranks
}

fn distinct(ranks: &[u32]) -> usize {
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len()
}

fn initial_ranks(mol: &Molecule) -> Vec<u32> {
    let keys: Vec<_> = (0..mol.atom_count())
        .map(|i| {
            let a = &mol.atoms()[i];
            (
                mol.degree(i),
                a.atomic_number,
                a.aromatic,
                a.charge,
                mol.hydrogen_count(i),
            )
        })
        .collect();
    ranks_from_keys(&keys)
}

fn refine(mol: &Molecule, mut ranks: Vec<u32>) -> Vec<u32> {
    let n = mol.atom_count();
    let mut classes = distinct(&ranks);
    while classes < n {
        let keys: Vec<(u32, Vec<(u32, u8)>)> = (0..n)
            .map(|i| {
                let mut env: Vec<(u32, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(nb, b)| (ranks[nb], mol.bonds()[b].order.code()))
                    .collect();
                env.sort_unstable();
                (ranks[i], env)
            })
            .collect();
        let next = ranks_from_keys(&keys);
        let next_classes = distinct(&next);
        ranks = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
    ranks
}

/// Smallest-rank cell with more than one member, as sorted atom indices.
fn target_cell(ranks: &[u32]) -> Option<Vec<usize>> {
    let mut counts: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &r) in ranks.iter().enumerate() {
        counts.entry(r).or_default().push(i);
    }
    counts.into_values().find(|members| members.len() > 1)
}

const SEEN_CAP: usize = 512;

struct Search<'m> {
    mol: &'m Molecule,
    best: Option<(String, Vec<usize>)>,
    /// Previously emitted leaves, used to discover automorphisms.
    seen: BTreeMap<String, Vec<usize>>,
    /// Automorphisms as atom permutations.
    automorphisms: Vec<Vec<usize>>,
    path: Vec<usize>,
}

impl Search<'_> {
    fn descend(&mut self, ranks: Vec<u32>) {
        let Some(cell) = target_cell(&ranks) else {
            self.leaf(&ranks);
            return;
        };
        let mut explored: Vec<usize> = Vec::new();
        for &x in &cell {
            if !explored.is_empty() && self.equivalent_to_any(x, &explored) {
                continue;
            }
            let mut child = ranks.clone();
            let r = ranks[x];
            for &other in &cell {
                if other != x {
                    child[other] = r + 1;
                }
            }
            let child = refine(self.mol, child);
            self.path.push(x);
            self.descend(child);
            self.path.pop();
            explored.push(x);
        }
    }

    fn leaf(&mut self, ranks: &[u32]) {
        let (text, order) = emit(self.mol, ranks);
        if let Some(other) = self.seen.get(&text) {
            let mut perm = alloc::vec![0usize; order.len()];
            for (pos, &atom) in other.iter().enumerate() {
                perm[atom] = order[pos];
            }
            if perm.iter().enumerate().any(|(i, &p)| i != p) {
                self.automorphisms.push(perm);
            }
        } else if self.seen.len() < SEEN_CAP {
            self.seen.insert(text.clone(), order.clone());
        }
        let better = match &self.best {
            None => true,
            Some((best, _)) => text < *best,
        };
        if better {
            self.best = Some((text, order));
        }
    }

    /// Whether `x` lies in the orbit of any of `explored` under the known
    /// automorphisms that fix the current path pointwise.
    fn equivalent_to_any(&self, x: usize, explored: &[usize]) -> bool {
        let n = self.mol.atom_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut any = false;
        for perm in &self.automorphisms {
            if self.path.iter().any(|&p| perm[p] != p) {
                continue;
            }
            any = true;
            for (i, &image) in perm.iter().enumerate().take(n) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, image));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        if !any {
            return false;
        }
        let root = find(&mut parent, x);
        explored.iter().any(|&e| find(&mut parent, e) == root)
    }
}

struct RingBond {
    opener: usize,
    closer: usize,
    order: BondOrder,
}

/// Writes the SMILES implied by a total ranking. Returns the text and the
/// atoms in the order they were written.
fn emit(mol: &Molecule, ranks: &[u32]) -> (String, Vec<usize>) {
    let n = mol.atom_count();
    let mut sorted_neighbors: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            let mut v = mol.neighbors(i).to_vec();
            v.sort_by_key(|&(nb, _)| ranks[nb]);
            v
        })
        .collect();

    // Pass 1: spanning forest and ring bonds.
    let mut visited = alloc::vec![false; n];
    let mut bond_used = alloc::vec![false; mol.bond_count()];
    let mut children: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    let mut rings: Vec<RingBond> = Vec::new();
    let mut roots = Vec::new();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&i| ranks[i]);
    for &root in &by_rank {
        if visited[root] {
            continue;
        }
        roots.push(root);
        visited[root] = true;
        // (atom, next neighbor slot)
        let mut stack: Vec<(usize, usize)> = alloc::vec![(root, 0)];
        while let Some(top) = stack.last_mut() {
            let (atom, slot) = *top;
            if slot == sorted_neighbors[atom].len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let (nb, bond) = sorted_neighbors[atom][slot];
            if bond_used[bond] {
                continue;
            }
            bond_used[bond] = true;
            let order = mol.bonds()[bond].order;
            if visited[nb] {
                rings.push(RingBond {
                    opener: nb,
                    closer: atom,
                    order,
                });
            } else {
                visited[nb] = true;
                children[atom].push((nb, bond));
                stack.push((nb, 0));
            }
        }
    }
    sorted_neighbors.clear();

    // Ring events per atom: (partner rank, ring index).
    let mut opens: Vec<Vec<(u32, usize)>> = alloc::vec![Vec::new(); n];
    let mut closes: Vec<Vec<(u32, usize)>> = alloc::vec![Vec::new(); n];
    for (ri, r) in rings.iter().enumerate() {
        opens[r.opener].push((ranks[r.closer], ri));
        closes[r.closer].push((ranks[r.opener], ri));
    }
    for v in opens.iter_mut().chain(closes.iter_mut()) {
        v.sort_unstable();
    }

    // Pass 2: write.
    let mut out = String::new();
    let mut order = Vec::with_capacity(n);
    let mut digit_of: Vec<u16> = alloc::vec![0; rings.len()];
    let mut in_use: Vec<bool> = alloc::vec![false; 100];
    enum Step {
        Atom { atom: usize, bond: Option<usize> },
        Open,
        Close,
    }
    for (fi, &root) in roots.iter().enumerate() {
        if fi > 0 {
            out.push('.');
        }
        let mut stack = alloc::vec![Step::Atom {
            atom: root,
            bond: None
        }];
        while let Some(step) = stack.pop() {
            let (atom, bond) = match step {
                Step::Open => {
                    out.push('(');
                    continue;
                }
                Step::Close => {
                    out.push(')');
                    continue;
                }
                Step::Atom { atom, bond } => (atom, bond),
            };
            if let Some(b) = bond {
                let bond = &mol.bonds()[b];
                write_bond(&mut out, mol, bond.a, bond.b, bond.order);
            }
            write_atom(&mut out, mol, atom);
            order.push(atom);

            let mut freed = Vec::new();
            for &(_, ri) in &closes[atom] {
                let d = digit_of[ri];
                write_ring_digit(&mut out, d);
                freed.push(d);
            }
            for &(_, ri) in &opens[atom] {
                let d = match (1..in_use.len()).find(|&d| !in_use[d]) {
                    Some(d) => d,
                    None => {
                        in_use.push(false);
                        in_use.len() - 1
                    }
                };
                in_use[d] = true;
                digit_of[ri] = d as u16;
                let r = &rings[ri];
                write_bond(&mut out, mol, r.opener, r.closer, r.order);
                write_ring_digit(&mut out, d as u16);
            }
            for d in freed {
                in_use[d as usize] = false;
            }

            // All children but the last go in parentheses. Pushed in reverse
            // so they pop in rank order.
            let kids = &children[atom];
            for (ci, &(child, b)) in kids.iter().enumerate().rev() {
                let last = ci + 1 == kids.len();
                if !last {
                    stack.push(Step::Close);
                }
                stack.push(Step::Atom {
                    atom: child,
                    bond: Some(b),
                });
                if !last {
                    stack.push(Step::Open);
                }
            }
        }
    }
    (out, order)
}

fn write_ring_digit(out: &mut String, d: u16) {
    if d < 10 {
        out.push((b'0' + d as u8) as char);
    } else {
        let _ = write!(out, "%{d:02}");
    }
}

fn write_bond(out: &mut String, mol: &Molecule, a: usize, b: usize, order: BondOrder) {
    let atoms = mol.atoms();
    match order {
        BondOrder::Single if atoms[a].aromatic && atoms[b].aromatic => out.push('-'),
        BondOrder::Single | BondOrder::Aromatic => {}
        BondOrder::Double => out.push('='),
        BondOrder::Triple => out.push('#'),
    }
}

fn write_atom(out: &mut String, mol: &Molecule, i: usize) {
    let atom = &mol.atoms()[i];
    let h = mol.hydrogen_count(i);
    let bare = atom.charge == 0
        && element::is_organic_subset(atom.atomic_number)
        && (!atom.aromatic || element::may_be_bare_aromatic(atom.atomic_number))
        && mol.bare_hydrogens(i) == Some(h);
    let symbol = atom.symbol();
    if bare {
        push_symbol(out, symbol, atom.aromatic);
        return;
    }
    out.push('[');
    push_symbol(out, symbol, atom.aromatic);
    match h {
        0 => {}
        1 => out.push('H'),
        _ => {
            let _ = write!(out, "H{h}");
        }
    }
    match atom.charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => {
            let _ = write!(out, "+{c}");
        }
        c => {
            let _ = write!(out, "-{}", -(c as i32));
        }
    }
    out.push(']');
}

fn push_symbol(out: &mut String, symbol: &str, aromatic: bool) {
    if aromatic {
        out.extend(symbol.chars().map(|c| c.to_ascii_lowercase()));
    } else {
        out.push_str(symbol);
    }
}
