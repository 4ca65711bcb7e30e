//! Offline publication and molecule corpora with a BM25 index over
//! title + abstract.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use scidebate_core::text::{Bm25Index, Bm25Params, TextError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub authors: Vec<String>,
    pub year: i32,
}

impl Publication {
    pub fn text(&self) -> String {
        format!("{} {}", self.title, self.abstract_text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoleculeRecord {
    /// Canonical after ingest.
    pub smiles: String,
    pub scientist_ids: Vec<String>,
    #[serde(default)]
    pub source_publication: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub line: usize,
    pub smiles: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub publications: usize,
    pub molecules_accepted: usize,
    pub molecules_rejected: Vec<Rejection>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{file} line {line}: {message}")]
    Line {
        file: String,
        line: usize,
        message: String,
    },
    #[error("duplicate publication id {0:?}")]
    DuplicateId(String),
    #[error(transparent)]
    Text(#[from] TextError),
}

/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct Corpus {
    publications: Vec<Publication>,
    by_id: BTreeMap<String, usize>,
    molecules: Vec<MoleculeRecord>,
    pubs_by_author: BTreeMap<String, Vec<usize>>,
    mols_by_author: BTreeMap<String, Vec<usize>>,
    index: Bm25Index,
    fingerprint: String,
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn jsonl<T: for<'de> Deserialize<'de>>(file: &str, text: &str) -> Result<Vec<(usize, T)>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| CorpusError::Line {
            file: file.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

fn numbered<T>(v: Vec<T>) -> Vec<(usize, T)> {
    v.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect()
}

impl Corpus {
    /// Reads `publications.jsonl` and, optionally, `molecules.jsonl`.
    pub fn ingest(pubs: &Path, mols: Option<&Path>) -> Result<(Self, IngestReport), CorpusError> {
        let pubs_text = read(pubs)?;
        let mols_text = match mols {
            Some(p) => read(p)?,
            None => String::new(),
        };
        Self::from_jsonl(&pubs_text, &mols_text)
    }

    pub fn from_jsonl(pubs: &str, mols: &str) -> Result<(Self, IngestReport), CorpusError> {
        let publications: Vec<(usize, Publication)> = jsonl("publications", pubs)?;
        let molecules: Vec<(usize, MoleculeRecord)> = jsonl("molecules", mols)?;
        let mut hasher = Sha256::new();
        hasher.update(pubs.as_bytes());
        hasher.update([0u8]);
        hasher.update(mols.as_bytes());
        let fingerprint = hex::encode(hasher.finalize());
        Self::build(publications, molecules, fingerprint)
    }

    /// Builds from in-memory records; line numbers in diagnostics are
    /// 1-based record positions.
    pub fn from_records(
        publications: Vec<Publication>,
        molecules: Vec<MoleculeRecord>,
    ) -> Result<(Self, IngestReport), CorpusError> {
        let mut hasher = Sha256::new();
        for p in &publications {
            hasher.update(serde_json::to_vec(p).expect("publication serializes"));
        }
        hasher.update([0u8]);
        for m in &molecules {
            hasher.update(serde_json::to_vec(m).expect("molecule serializes"));
        }
        let fingerprint = hex::encode(hasher.finalize());
        Self::build(numbered(publications), numbered(molecules), fingerprint)
    }

    fn build(
        publications: Vec<(usize, Publication)>,
        molecules: Vec<(usize, MoleculeRecord)>,
        fingerprint: String,
    ) -> Result<(Self, IngestReport), CorpusError> {
        let mut c = Corpus {
            publications: Vec::new(),
            by_id: BTreeMap::new(),
            molecules: Vec::new(),
            pubs_by_author: BTreeMap::new(),
            mols_by_author: BTreeMap::new(),
            index: Bm25Index::new(Bm25Params::default()),
            fingerprint,
        };
        let mut report = IngestReport::default();
        for (line, p) in publications {
            if c.by_id.contains_key(&p.id) {
                return Err(CorpusError::DuplicateId(p.id));
            }
            if p.authors.is_empty() {
                return Err(CorpusError::Line {
                    file: "publications".into(),
                    line,
                    message: format!("publication {:?} has no authors", p.id),
                });
            }
            c.index.add_document(&p.id, &p.text())?;
            let idx = c.publications.len();
            let mut seen = Vec::new();
            for a in &p.authors {
                if !seen.contains(a) {
                    c.pubs_by_author.entry(a.clone()).or_default().push(idx);
                    seen.push(a.clone());
                }
            }
            c.by_id.insert(p.id.clone(), idx);
            c.publications.push(p);
        }
        report.publications = c.publications.len();
        for (line, mut m) in molecules {
            if m.scientist_ids.is_empty() {
                return Err(CorpusError::Line {
                    file: "molecules".into(),
                    line,
                    message: "molecule record has no scientist_ids".into(),
                });
            }
            match scidebate_core::parse(&m.smiles) {
                Ok(mol) => {
                    m.smiles = mol.canonical().to_string();
                    let idx = c.molecules.len();
                    let mut seen = Vec::new();
                    for s in &m.scientist_ids {
                        if !seen.contains(s) {
                            c.mols_by_author.entry(s.clone()).or_default().push(idx);
                            seen.push(s.clone());
                        }
                    }
                    c.molecules.push(m);
                }
                Err(e) => {
                    log::warn!("molecules line {line}: rejected {:?}: {e}", m.smiles);
                    report.molecules_rejected.push(Rejection {
                        line,
                        smiles: m.smiles,
                        reason: e.to_string(),
                    });
                }
            }
        }
        report.molecules_accepted = c.molecules.len();
        Ok((c, report))
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn molecules(&self) -> &[MoleculeRecord] {
        &self.molecules
    }

    pub fn publication(&self, id: &str) -> Option<&Publication> {
        self.by_id.get(id).map(|&i| &self.publications[i])
    }

    /// Publications listing `author`, in corpus order.
    pub fn publications_by(&self, author: &str) -> Vec<&Publication> {
        self.pubs_by_author
            .get(author)
            .map(|v| v.iter().map(|&i| &self.publications[i]).collect())
            .unwrap_or_default()
    }

    /// Molecule records listing `author`, in corpus order, duplicates kept.
    pub fn molecules_by(&self, author: &str) -> Vec<&MoleculeRecord> {
        self.mols_by_author
            .get(author)
            .map(|v| v.iter().map(|&i| &self.molecules[i]).collect())
            .unwrap_or_default()
    }

    /// Every author id appearing on a publication or molecule record.
    pub fn authors(&self) -> Vec<&str> {
        let mut all: Vec<&str> = self
            .pubs_by_author
            .keys()
            .chain(self.mols_by_author.keys())
            .map(String::as_str)
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn index(&self) -> &Bm25Index {
        &self.index
    }

    /// SHA-256 of the ingested bytes.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn retrieve(&self, query: &str, top_m: usize) -> Result<Vec<(String, f64)>, CorpusError> {
        Ok(self.index.search(query, top_m)?)
    }

    pub fn keyword_frequency(
        &self,
        ids: &[&str],
        keywords: &[&str],
    ) -> Result<Vec<(String, u32)>, CorpusError> {
        Ok(self.index.keyword_frequency(ids, keywords)?)
    }

    /// Writes the normalized corpus (canonical SMILES, rejected molecules
    /// removed) plus a manifest. Re-ingesting the written files yields the
    /// same retrieval results.
    pub fn write_index(&self, dir: &Path, report: &IngestReport) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut pubs = fs::File::create(dir.join("publications.jsonl"))?;
        for p in &self.publications {
            writeln!(pubs, "{}", serde_json::to_string(p)?)?;
        }
        let mut mols = fs::File::create(dir.join("molecules.jsonl"))?;
        for m in &self.molecules {
            writeln!(mols, "{}", serde_json::to_string(m)?)?;
        }
        let manifest = serde_json::json!({
            "publications": self.publications.len(),
            "molecules": self.molecules.len(),
            "authors": self.authors().len(),
            "rejected": report.molecules_rejected,
            "source_fingerprint": self.fingerprint,
        });
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")
    }
}
