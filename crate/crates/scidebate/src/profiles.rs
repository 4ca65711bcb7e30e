//! Scientist selection and expertise-profile construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use scidebate_core::hash::Mixer;
use scidebate_core::text::top_terms;
use scidebate_core::{morgan_fingerprint, tanimoto, FingerprintParams};

use crate::corpus::{Corpus, CorpusError, Publication};
use crate::llm::parse::{parse_publications, parse_string_list};
use crate::llm::{ChatBackend, LlmError, Phase, RequestTag, Sampling, TemplateError, TemplateSet};
use crate::parallel::fan_out;
use crate::prompts::{publications_block, task_text};
use crate::task::TaskSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    Vanilla,
    Role,
    Keyword,
    Full,
    Single,
    MassiveSingle,
    LlmGenerated,
    Random,
}

impl ProfileMode {
    pub const ALL: [ProfileMode; 8] = [
        ProfileMode::Vanilla,
        ProfileMode::Role,
        ProfileMode::Keyword,
        ProfileMode::Full,
        ProfileMode::Single,
        ProfileMode::MassiveSingle,
        ProfileMode::LlmGenerated,
        ProfileMode::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProfileMode::Vanilla => "vanilla",
            ProfileMode::Role => "role",
            ProfileMode::Keyword => "keyword",
            ProfileMode::Full => "full",
            ProfileMode::Single => "single",
            ProfileMode::MassiveSingle => "massive_single",
            ProfileMode::LlmGenerated => "llm_generated",
            ProfileMode::Random => "random",
        }
    }
}

impl fmt::Display for ProfileMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProfileMode {
    type Err = ProfileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProfileMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ProfileError::UnknownMode(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeywordSource {
    /// Most frequent non-stopword tokens of the selected publications.
    Frequency,
    /// Asked of the backend from the selected publications.
    Llm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSettings {
    pub mode: ProfileMode,
    pub max_pubs: usize,
    pub max_mols: usize,
    /// Initial retrieval depth; doubled until enough scientists are found.
    pub top_m: usize,
    /// Character budget for the merged `massive_single` profile.
    pub context_chars: usize,
    pub keyword_source: KeywordSource,
    pub keyword_count: usize,
}

impl Default for ProfileSettings {
    fn default() -> Self {
        Self {
            mode: ProfileMode::Full,
            max_pubs: 5,
            max_mols: 10,
            top_m: 30,
            context_chars: 24_000,
            keyword_source: KeywordSource::Frequency,
            keyword_count: 10,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("unknown profile mode {0:?}")]
    UnknownMode(String),
    #[error("corpus has no publications")]
    EmptyCorpus,
    #[error("no publication is relevant to the task")]
    NoScientists,
    #[error("no task-irrelevant scientist available for {0}")]
    NoOtherScientist(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("backend call {tag} failed: {source}")]
    Backend { tag: RequestTag, source: LlmError },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scientist {
    pub id: String,
    pub name: String,
    pub publication_ids: Vec<String>,
    /// Canonical SMILES of every record, duplicates kept.
    pub molecules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationEntry {
    /// Absent for generated publications.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
}

impl From<&Publication> for PublicationEntry {
    fn from(p: &Publication) -> Self {
        Self {
            id: Some(p.id.clone()),
            title: p.title.clone(),
            abstract_text: p.abstract_text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertiseProfile {
    /// The agent this profile is attached to.
    pub scientist_id: String,
    pub name: String,
    pub mode: ProfileMode,
    pub publications: Vec<PublicationEntry>,
    pub molecules: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<String>,
    /// Scientists whose records the content was drawn from.
    pub sources: Vec<String>,
}

impl ExpertiseProfile {
    fn empty(s: &Scientist, mode: ProfileMode) -> Self {
        Self {
            scientist_id: s.id.clone(),
            name: s.name.clone(),
            mode,
            publications: Vec::new(),
            molecules: Vec::new(),
            role: None,
            keywords: Vec::new(),
            sources: Vec::new(),
        }
    }
}

fn scientist(corpus: &Corpus, id: &str) -> Scientist {
    Scientist {
        id: id.into(),
        name: id.into(),
        publication_ids: corpus.publications_by(id).iter().map(|p| p.id.clone()).collect(),
        molecules: corpus.molecules_by(id).iter().map(|m| m.smiles.clone()).collect(),
    }
}

/// First and last authors of retrieved publications in rank order,
/// deduplicated. Retrieval depth doubles until `n` are found or the
/// corpus is exhausted.
pub fn select_scientists(
    corpus: &Corpus,
    task: &TaskSpec,
    n: usize,
    top_m: usize,
) -> Result<Vec<Scientist>, ProfileError> {
    if corpus.publications().is_empty() {
        return Err(ProfileError::EmptyCorpus);
    }
    let n = n.max(1);
    let mut m = top_m.max(1);
    loop {
        let hits = corpus.retrieve(&task.description, m)?;
        let mut ids: Vec<&str> = Vec::new();
        for (pid, _) in &hits {
            let p = corpus.publication(pid).expect("hit ids come from the corpus");
            for a in [p.authors.first(), p.authors.last()].into_iter().flatten() {
                if !ids.contains(&a.as_str()) {
                    ids.push(a);
                }
            }
        }
        if ids.len() >= n || hits.len() < m {
            if ids.is_empty() {
                return Err(ProfileError::NoScientists);
            }
            return Ok(ids.into_iter().take(n).map(|id| scientist(corpus, id)).collect());
        }
        m = m.saturating_mul(2);
    }
}

/// Every corpus author by relevance: order of first appearance among
/// retrieved publications (any author position), then the rest by id.
pub fn rank_all_authors(corpus: &Corpus, task: &TaskSpec) -> Result<Vec<String>, ProfileError> {
    let hits = corpus.retrieve(&task.description, corpus.publications().len().max(1))?;
    let mut out: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    for (pid, _) in &hits {
        for a in &corpus.publication(pid).expect("hit ids come from the corpus").authors {
            if seen.insert(a.clone()) {
                out.push(a.clone());
            }
        }
    }
    for a in corpus.authors() {
        if seen.insert(a.to_string()) {
            out.push(a.to_string());
        }
    }
    Ok(out)
}

/// Everything needed to build profiles for a campaign.
pub struct ProfileBuilder<'a> {
    pub corpus: &'a Corpus,
    pub task: &'a TaskSpec,
    pub settings: &'a ProfileSettings,
    pub backend: &'a dyn ChatBackend,
    pub sampling: &'a Sampling,
    pub templates: &'a TemplateSet,
    pub rng_seed: u64,
    pub fingerprint: FingerprintParams,
}

impl ProfileBuilder<'_> {
    /// One profile per scientist, in input order.
    pub fn build_all(&self, scientists: &[Scientist], parallelism: usize) -> Result<Vec<ExpertiseProfile>, ProfileError> {
        let ranked = match self.settings.mode {
            ProfileMode::Random => rank_all_authors(self.corpus, self.task)?,
            _ => Vec::new(),
        };
        fan_out(scientists.len(), parallelism, |i| self.build(scientists, i, &ranked))
            .into_iter()
            .collect()
    }

    fn build(&self, all: &[Scientist], i: usize, ranked: &[String]) -> Result<ExpertiseProfile, ProfileError> {
        let s = &all[i];
        let mode = self.settings.mode;
        let mut p = ExpertiseProfile::empty(s, mode);
        match mode {
            ProfileMode::Vanilla => {}
            ProfileMode::Full => {
                self.fill_full(&mut p, &s.id, self.settings.max_pubs, self.settings.max_mols)?;
            }
            ProfileMode::Keyword => {
                let pubs = self.ranked_publications(&s.id, self.settings.max_pubs)?;
                p.keywords = match self.settings.keyword_source {
                    KeywordSource::Frequency => top_terms(
                        pubs.iter().flat_map(|e| [e.title.as_str(), e.abstract_text.as_str()]),
                        self.settings.keyword_count,
                    ),
                    KeywordSource::Llm => {
                        let count = self.settings.keyword_count.to_string();
                        let prompt = self.templates.render(
                            "keyword_extraction",
                            &[("count", &count), ("publications", &publications_block(&pubs))],
                        )?;
                        let reply = self.call(&s.id, Phase::KeywordExtraction, prompt)?;
                        parse_string_list(&reply, self.settings.keyword_count).unwrap_or_else(|e| {
                            log::warn!("{}: keyword reply unusable: {e}", s.id);
                            Vec::new()
                        })
                    }
                };
                p.sources = vec![s.id.clone()];
            }
            ProfileMode::Role => {
                let task = task_text(self.templates, self.task)?;
                let prompt = self.templates.render("role_generation", &[("task", &task)])?;
                p.role = Some(self.call(&s.id, Phase::RoleGeneration, prompt)?.trim().to_string());
            }
            ProfileMode::Single => {
                let top = &all[0].id;
                self.fill_full(&mut p, top, self.settings.max_pubs, self.settings.max_mols)?;
            }
            ProfileMode::MassiveSingle => self.fill_massive(&mut p, all)?,
            ProfileMode::LlmGenerated => self.fill_generated(&mut p)?,
            ProfileMode::Random => {
                let pick = self.random_other(i, &s.id, ranked)?;
                self.fill_full(&mut p, &pick, self.settings.max_pubs, self.settings.max_mols)?;
            }
        }
        Ok(p)
    }

    fn call(&self, agent: &str, phase: Phase, prompt: String) -> Result<String, ProfileError> {
        let tag = RequestTag::new(agent, 0, phase);
        let system = self.templates.render("vanilla_system", &[])?;
        let req = self.sampling.request(tag.clone(), system, prompt);
        self.backend
            .complete(&req)
            .map_err(|source| ProfileError::Backend { tag, source })
    }

    /// Keyword count descending, year descending, id ascending.
    fn ranked_publications(&self, author: &str, max: usize) -> Result<Vec<PublicationEntry>, ProfileError> {
        let pubs = self.corpus.publications_by(author);
        if pubs.is_empty() {
            return Ok(Vec::new());
        }
        let ids: Vec<&str> = pubs.iter().map(|p| p.id.as_str()).collect();
        let counts = self.corpus.keyword_frequency(&ids, &self.task.keyword_refs())?;
        let mut ranked: Vec<(&Publication, u32)> = pubs.into_iter().zip(counts.into_iter().map(|c| c.1)).collect();
        ranked.sort_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| b.0.year.cmp(&a.0.year))
                .then_with(|| a.0.id.cmp(&b.0.id))
        });
        Ok(ranked.into_iter().take(max).map(|(p, _)| p.into()).collect())
    }

    /// Distinct canonical SMILES: by similarity to the task seed when there
    /// is one, else by record frequency; ties by SMILES.
    fn ranked_molecules(&self, author: &str, max: usize) -> Vec<String> {
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        let records = self.corpus.molecules_by(author);
        for r in &records {
            *freq.entry(r.smiles.as_str()).or_insert(0) += 1;
        }
        let seed_fp = self
            .task
            .seed
            .as_deref()
            .and_then(|s| scidebate_core::parse(s).ok())
            .map(|m| morgan_fingerprint(&m, self.fingerprint));
        let mut ranked: Vec<(&str, f64)> = freq
            .iter()
            .map(|(&smi, &n)| {
                let key = match &seed_fp {
                    Some(seed) => {
                        let mol = scidebate_core::parse(smi).expect("corpus molecules parse");
                        tanimoto(&morgan_fingerprint(&mol, self.fingerprint), seed).expect("same width")
                    }
                    None => n as f64,
                };
                (smi, key)
            })
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.into_iter().take(max).map(|(s, _)| s.to_string()).collect()
    }

    fn fill_full(&self, p: &mut ExpertiseProfile, source: &str, max_pubs: usize, max_mols: usize) -> Result<(), ProfileError> {
        p.publications = self.ranked_publications(source, max_pubs)?;
        p.molecules = self.ranked_molecules(source, max_mols);
        p.sources = vec![source.to_string()];
        Ok(())
    }

    /// Union of the first half (rounded up) of the selected scientists'
    /// full records, molecules before publications, cut at the character
    /// budget.
    fn fill_massive(&self, p: &mut ExpertiseProfile, all: &[Scientist]) -> Result<(), ProfileError> {
        let take = all.len().div_ceil(2);
        let mut budget = self.settings.context_chars;
        let mut seen_pubs = BTreeSet::new();
        let mut seen_mols = BTreeSet::new();
        let mut pubs = Vec::new();
        for s in &all[..take] {
            p.sources.push(s.id.clone());
            for m in self.ranked_molecules(&s.id, usize::MAX) {
                if seen_mols.contains(&m) {
                    continue;
                }
                if m.len() > budget {
                    break;
                }
                budget -= m.len();
                seen_mols.insert(m.clone());
                p.molecules.push(m);
            }
            pubs.extend(self.ranked_publications(&s.id, usize::MAX)?);
        }
        for e in pubs {
            let id = e.id.clone().unwrap_or_default();
            if !seen_pubs.insert(id) {
                continue;
            }
            let cost = e.title.len() + e.abstract_text.len();
            if cost > budget {
                break;
            }
            budget -= cost;
            p.publications.push(e);
        }
        Ok(())
    }

    fn fill_generated(&self, p: &mut ExpertiseProfile) -> Result<(), ProfileError> {
        let task = task_text(self.templates, self.task)?;
        let pubs_n = self.settings.max_pubs.to_string();
        let mols_n = self.settings.max_mols.to_string();
        let prompt = self.templates.render(
            "llm_profile_pub",
            &[("count", &pubs_n), ("name", &p.name), ("task", &task)],
        )?;
        let reply = self.call(&p.scientist_id, Phase::LlmProfilePub, prompt)?;
        p.publications = parse_publications(&reply, self.settings.max_pubs)
            .unwrap_or_else(|e| {
                log::warn!("{}: generated publications unusable: {e}", p.scientist_id);
                Vec::new()
            })
            .into_iter()
            .map(|(title, abstract_text)| PublicationEntry {
                id: None,
                title,
                abstract_text,
            })
            .collect();
        let prompt = self.templates.render(
            "llm_profile_mol",
            &[("count", &mols_n), ("name", &p.name), ("task", &task)],
        )?;
        let reply = self.call(&p.scientist_id, Phase::LlmProfileMol, prompt)?;
        let raw = parse_string_list(&reply, usize::MAX).unwrap_or_default();
        for smi in raw {
            match scidebate_core::parse(&smi) {
                Ok(m) => {
                    let c = m.canonical().to_string();
                    if !p.molecules.contains(&c) && p.molecules.len() < self.settings.max_mols {
                        p.molecules.push(c);
                    }
                }
                Err(e) => log::warn!("{}: dropped generated molecule {smi:?}: {e}", p.scientist_id),
            }
        }
        Ok(())
    }

    /// Uniform pick among the bottom half of all corpus authors by
    /// relevance, excluding the agent itself.
    fn random_other(&self, index: usize, own: &str, ranked: &[String]) -> Result<String, ProfileError> {
        let half = ranked.len().div_ceil(2);
        let pool: Vec<&String> = ranked[half..].iter().filter(|a| a.as_str() != own).collect();
        if pool.is_empty() {
            return Err(ProfileError::NoOtherScientist(own.into()));
        }
        let seed = Mixer::new().word(self.rng_seed).word(index as u64).bytes(own.as_bytes()).finish();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(pool[rng.random_range(0..pool.len())].clone())
    }
}
