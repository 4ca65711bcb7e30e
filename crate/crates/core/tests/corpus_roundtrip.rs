use std::time::Instant;

use scidebate_core::{canonicalize, parse};

const CORPUS: &str = include_str!("data/smiles_corpus.smi");

#[test]
fn corpus_canonical_fixed_point() {
    let start = Instant::now();
    let mut valid = 0;
    for (line_no, line) in CORPUS.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(bad) = line.strip_prefix('!') {
            assert!(parse(bad).is_err(), "line {}: {bad} should not parse", line_no + 1);
            continue;
        }
        let mol = parse(line).unwrap_or_else(|e| panic!("line {}: {line}: {e}", line_no + 1));
        let c1 = canonicalize(&mol);
        let c2 = canonicalize(&parse(&c1).unwrap_or_else(|e| panic!("{c1}: {e}")));
        assert_eq!(c1, c2, "line {}: {line}", line_no + 1);
        valid += 1;
    }
    assert!(valid >= 1000);
    eprintln!("{valid} molecules in {:?}", start.elapsed());
}

/// xorshift64*, good enough for shuffling test inputs.
struct Shuffler(u64);

impl Shuffler {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = (self.next() % (i as u64 + 1)) as usize;
            v.swap(i, j);
        }
        v
    }
}

#[test]
fn corpus_renumbering_invariance() {
    let mut rng = Shuffler(0x9E37_79B9_7F4A_7C15);
    for line in CORPUS.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('!') {
            continue;
        }
        let mol = parse(line).unwrap();
        let base = canonicalize(&mol);
        for _ in 0..3 {
            let order = rng.permutation(mol.atom_count());
            assert_eq!(canonicalize(&mol.renumbered(&order)), base, "{line}");
        }
    }
}
