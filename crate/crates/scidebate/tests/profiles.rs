use std::collections::BTreeSet;

use scidebate::core::{morgan_fingerprint, FingerprintParams};
use scidebate::corpus::{Corpus, MoleculeRecord, Publication};
use scidebate::llm::{MockBackend, Phase, Sampling, ScriptEntry, TemplateSet};
use scidebate::profiles::{
    rank_all_authors, select_scientists, ExpertiseProfile, ProfileBuilder, ProfileError, ProfileMode,
    ProfileSettings, Scientist,
};
use scidebate::task::{Objective, TaskSpec};

fn publication(id: &str, title: &str, authors: &[&str], year: i32) -> Publication {
    Publication {
        id: id.into(),
        title: title.into(),
        abstract_text: String::new(),
        authors: authors.iter().map(|a| a.to_string()).collect(),
        year,
    }
}

fn molecule(smiles: &str, who: &[&str]) -> MoleculeRecord {
    MoleculeRecord {
        smiles: smiles.into(),
        scientist_ids: who.iter().map(|a| a.to_string()).collect(),
        source_publication: None,
    }
}

fn task(description: &str, keywords: &[&str], seed: Option<&str>) -> TaskSpec {
    let mut t = TaskSpec {
        id: "t".into(),
        description: description.into(),
        keywords: keywords.iter().map(|k| k.to_string()).collect(),
        objective: Objective::ProteinTarget,
        seed: seed.map(String::from),
        constraints: None,
        property: None,
    };
    t.validate().unwrap();
    t
}

fn ids(s: &[Scientist]) -> Vec<&str> {
    s.iter().map(|x| x.id.as_str()).collect()
}

/// Equal-length documents, so BM25 rank follows the count of "kinase".
fn ranked_corpus() -> Corpus {
    Corpus::from_records(
        vec![
            publication("p3", "kinase kinase x y", &["E"], 2020),
            publication("p1", "kinase kinase kinase kinase", &["A", "B", "C"], 2020),
            publication("p5", "x y z w", &["G"], 2020),
            publication("p4", "kinase x y z", &["A", "F"], 2020),
            publication("p2", "kinase kinase kinase x", &["C", "D"], 2020),
        ],
        Vec::new(),
    )
    .unwrap()
    .0
}

#[test]
fn single_author_appears_once() {
    let (c, _) = Corpus::from_records(vec![publication("p", "kinase", &["solo"], 2020)], Vec::new()).unwrap();
    let s = select_scientists(&c, &task("kinase", &["kinase"], None), 1, 30).unwrap();
    assert_eq!(ids(&s), ["solo"]);
}

#[test]
fn first_and_last_author() {
    let (c, _) = Corpus::from_records(vec![publication("p", "kinase", &["A", "B", "C"], 2020)], Vec::new()).unwrap();
    let s = select_scientists(&c, &task("kinase", &["kinase"], None), 2, 30).unwrap();
    assert_eq!(ids(&s), ["A", "C"]);
}

#[test]
fn hand_walked_selection_with_widening() {
    // Rank: p1 (A, C), p2 (C dup, D), p3 (E), p4 (A dup, F); p5 never hits.
    let c = ranked_corpus();
    let t = task("kinase", &["kinase"], None);
    let s = select_scientists(&c, &t, 4, 1).unwrap();
    assert_eq!(ids(&s), ["A", "C", "D", "E"]);
    assert_eq!(s[0].publication_ids, ["p1", "p4"]);
    let all = select_scientists(&c, &t, 10, 1).unwrap();
    assert_eq!(ids(&all), ["A", "C", "D", "E", "F"]);
    assert_eq!(rank_all_authors(&c, &t).unwrap(), ["A", "B", "C", "D", "E", "F", "G"]);
}

#[test]
fn empty_corpus_is_an_error() {
    let (c, _) = Corpus::from_records(Vec::new(), Vec::new()).unwrap();
    assert!(matches!(
        select_scientists(&c, &task("kinase", &["kinase"], None), 1, 30),
        Err(ProfileError::EmptyCorpus)
    ));
}

struct Fixture {
    corpus: Corpus,
    task: TaskSpec,
    templates: TemplateSet,
    sampling: Sampling,
    backend: MockBackend,
}

impl Fixture {
    fn new(corpus: Corpus, task: TaskSpec, script: Vec<ScriptEntry>) -> Self {
        Self {
            corpus,
            task,
            templates: TemplateSet::builtin(),
            sampling: Sampling::default(),
            backend: MockBackend::new(script).unwrap(),
        }
    }

    fn build(&self, settings: &ProfileSettings, who: &[Scientist]) -> Result<Vec<ExpertiseProfile>, ProfileError> {
        ProfileBuilder {
            corpus: &self.corpus,
            task: &self.task,
            settings,
            backend: &self.backend,
            sampling: &self.sampling,
            templates: &self.templates,
            rng_seed: 3,
            fingerprint: FingerprintParams::default(),
        }
        .build_all(who, 2)
    }

    fn scientists(&self, n: usize) -> Vec<Scientist> {
        select_scientists(&self.corpus, &self.task, n, 30).unwrap()
    }
}

fn settings(mode: ProfileMode) -> ProfileSettings {
    ProfileSettings {
        mode,
        ..ProfileSettings::default()
    }
}

fn lab_corpus() -> Corpus {
    Corpus::from_records(
        vec![
            publication("a1", "Kinase hinge binders", &["ana"], 2018),
            publication("a2", "Kinase kinase selectivity", &["ana"], 2017),
            publication("a3", "Kinase assays at scale", &["ana"], 2021),
            publication("b1", "Kinase inhibitors in mice", &["ben"], 2020),
            publication("c1", "Kinase structural biology", &["cat"], 2019),
            publication("z1", "Grassland ecology", &["zed"], 2015),
        ],
        vec![
            molecule("c1ccccc1O", &["ana"]),
            molecule("CCO", &["ana"]),
            molecule("OCC", &["ana"]),
            molecule("CCN", &["ana"]),
            molecule("c1ccncc1", &["ben"]),
            molecule("CC(=O)O", &["cat"]),
            molecule("CCCC", &["zed"]),
        ],
    )
    .unwrap()
    .0
}

#[test]
fn vanilla_is_empty() {
    let f = Fixture::new(lab_corpus(), task("kinase", &["kinase"], None), Vec::new());
    for p in f.build(&settings(ProfileMode::Vanilla), &f.scientists(3)).unwrap() {
        assert!(p.publications.is_empty() && p.molecules.is_empty() && p.role.is_none() && p.keywords.is_empty());
    }
}

#[test]
fn full_mode_ranks_and_truncates() {
    let f = Fixture::new(lab_corpus(), task("kinase", &["kinase"], None), Vec::new());
    let ana: Vec<Scientist> = f.scientists(3).into_iter().filter(|s| s.id == "ana").collect();
    let p = &f.build(&settings(ProfileMode::Full), &ana).unwrap()[0];
    // a2 has "kinase" twice; a1 and a3 tie on one, newer first.
    let order: Vec<_> = p.publications.iter().map(|e| e.id.clone().unwrap()).collect();
    assert_eq!(order, ["a2", "a3", "a1"]);
    // CCO appears twice (two spellings), then the rest by SMILES.
    assert_eq!(p.molecules[0], "CCO");
    assert_eq!(p.molecules.len(), 3);

    let tight = ProfileSettings {
        max_pubs: 2,
        max_mols: 1,
        ..settings(ProfileMode::Full)
    };
    let p = &f.build(&tight, &ana).unwrap()[0];
    assert_eq!(p.publications.len(), 2);
    assert_eq!(p.molecules, ["CCO"]);
}

#[test]
fn full_mode_two_publications_both_kept() {
    let f = Fixture::new(lab_corpus(), task("kinase", &["kinase"], None), Vec::new());
    let ben = f.scientists(3).into_iter().find(|s| s.id == "ben").unwrap();
    let p = &f.build(&settings(ProfileMode::Full), &[ben]).unwrap()[0];
    assert_eq!(p.publications.len(), 1);
    assert_eq!(p.molecules, ["c1ccncc1"]);
}

fn set_tanimoto(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    if union == 0.0 { 0.0 } else { inter / union }
}

#[test]
fn seed_similarity_orders_molecules() {
    let mols = ["CCOc1ccccc1", "Oc1ccccc1C", "CCCCCCN", "c1ccc2ccccc2c1"];
    let seed = "Oc1ccccc1";
    let corpus = Corpus::from_records(
        vec![publication("p", "kinase", &["ana"], 2020)],
        mols.iter().map(|m| molecule(m, &["ana"])).collect(),
    )
    .unwrap()
    .0;
    let f = Fixture::new(corpus, task("kinase", &["kinase"], Some(seed)), Vec::new());
    let p = &f.build(&settings(ProfileMode::Full), &f.scientists(1)).unwrap()[0];

    let bits = |s: &str| -> BTreeSet<usize> {
        morgan_fingerprint(&scidebate::core::parse(s).unwrap(), FingerprintParams::default()).ones().collect()
    };
    let seed_bits = bits(seed);
    let mut expected: Vec<(String, f64)> = mols
        .iter()
        .map(|m| {
            let c = scidebate::core::parse(m).unwrap().canonical().to_string();
            (c, set_tanimoto(&bits(m), &seed_bits))
        })
        .collect();
    expected.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    let expected: Vec<String> = expected.into_iter().map(|e| e.0).collect();
    assert_eq!(p.molecules, expected);
}

#[test]
fn deterministic_and_distinct() {
    let f = Fixture::new(lab_corpus(), task("kinase", &["kinase"], None), Vec::new());
    let who = f.scientists(3);
    let a = serde_json::to_vec(&f.build(&settings(ProfileMode::Full), &who).unwrap()).unwrap();
    let b = serde_json::to_vec(&f.build(&settings(ProfileMode::Full), &who).unwrap()).unwrap();
    assert_eq!(a, b);
    let profiles = f.build(&settings(ProfileMode::Full), &who).unwrap();
    for (i, p) in profiles.iter().enumerate() {
        for q in &profiles[i + 1..] {
            let pi: BTreeSet<_> = p.publications.iter().map(|e| e.id.clone()).collect();
            assert!(q.publications.iter().all(|e| !pi.contains(&e.id)));
            assert!(q.molecules.iter().all(|m| !p.molecules.contains(m)));
        }
    }
}

#[test]
fn keyword_mode_uses_frequent_terms() {
    let f = Fixture::new(lab_corpus(), task("kinase", &["kinase"], None), Vec::new());
    let ana: Vec<Scientist> = f.scientists(3).into_iter().filter(|s| s.id == "ana").collect();
    let p = &f.build(&settings(ProfileMode::Keyword), &ana).unwrap()[0];
    assert_eq!(p.keywords[0], "kinase");
    assert!(p.keywords.len() <= 10);
    assert!(p.publications.is_empty() && p.molecules.is_empty());
}

#[test]
fn role_mode_asks_the_backend() {
    let script = ["ana", "ben", "cat"]
        .iter()
        .map(|a| ScriptEntry {
            agent: a.to_string(),
            round: 0,
            phase: Phase::RoleGeneration,
            response: format!("  Medicinal chemist {a}\n"),
        })
        .collect();
    let f = Fixture::new(lab_corpus(), task("kinase", &["kinase"], None), script);
    let ps = f.build(&settings(ProfileMode::Role), &f.scientists(3)).unwrap();
    for p in &ps {
        assert_eq!(p.role.as_deref(), Some(format!("Medicinal chemist {}", p.scientist_id).as_str()));
        assert!(p.publications.is_empty() && p.molecules.is_empty());
    }
}

#[test]
fn single_and_massive_single() {
    let f = Fixture::new(lab_corpus(), task("kinase", &["kinase"], None), Vec::new());
    let who = f.scientists(3);
    let single = f.build(&settings(ProfileMode::Single), &who).unwrap();
    for p in &single {
        assert_eq!(p.sources, [who[0].id.clone()]);
        assert_eq!(p.publications, single[0].publications);
    }
    let massive = f.build(&settings(ProfileMode::MassiveSingle), &who).unwrap();
    let half: Vec<String> = who[..2].iter().map(|s| s.id.clone()).collect();
    for p in &massive {
        assert_eq!(p.sources, half);
        assert_eq!(p.molecules, massive[0].molecules);
    }
    let tight = ProfileSettings {
        context_chars: 10,
        ..settings(ProfileMode::MassiveSingle)
    };
    let p = &f.build(&tight, &who).unwrap()[0];
    let used: usize = p.molecules.iter().map(String::len).sum::<usize>()
        + p.publications.iter().map(|e| e.title.len() + e.abstract_text.len()).sum::<usize>();
    assert!(used <= 10);
}

#[test]
fn generated_profiles_drop_invalid_molecules() {
    let mut script = Vec::new();
    for a in ["ana", "ben", "cat"] {
        script.push(ScriptEntry {
            agent: a.into(),
            round: 0,
            phase: Phase::LlmProfilePub,
            response: r#"[{"title": "Made up", "abstract": "Imagined work."}]"#.into(),
        });
        script.push(ScriptEntry {
            agent: a.into(),
            round: 0,
            phase: Phase::LlmProfileMol,
            response: r#"["OCC", "C1CC", "c1ccccc1"]"#.into(),
        });
    }
    let f = Fixture::new(lab_corpus(), task("kinase", &["kinase"], None), script);
    let ps = f.build(&settings(ProfileMode::LlmGenerated), &f.scientists(3)).unwrap();
    for p in &ps {
        assert_eq!(p.publications.len(), 1);
        assert!(p.publications[0].id.is_none());
        assert_eq!(p.molecules, ["CCO", "c1ccccc1"]);
    }
}

#[test]
fn random_mode_picks_irrelevant_others() {
    let f = Fixture::new(lab_corpus(), task("kinase", &["kinase"], None), Vec::new());
    let who = f.scientists(3);
    let ranked = rank_all_authors(&f.corpus, &f.task).unwrap();
    let bottom: Vec<&String> = ranked[ranked.len().div_ceil(2)..].iter().collect();
    let a = f.build(&settings(ProfileMode::Random), &who).unwrap();
    let b = f.build(&settings(ProfileMode::Random), &who).unwrap();
    assert_eq!(a, b);
    for (p, s) in a.iter().zip(&who) {
        assert_eq!(p.sources.len(), 1);
        assert_ne!(p.sources[0], s.id);
        assert!(bottom.contains(&&p.sources[0]), "{:?} not in {bottom:?}", p.sources);
    }
}
