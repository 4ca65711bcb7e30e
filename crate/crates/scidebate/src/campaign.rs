//! End-to-end campaign: corpus, profiles, debate, run directory.

use std::path::Path;

use crate::config::{BackendKind, CampaignConfig, OracleKind};
use crate::corpus::{Corpus, CorpusError};
use crate::debate::{Debate, DebateError, DebateResult};
use crate::llm::{ChatBackend, HttpBackend, LlmError, MockBackend, TemplateError, TemplateSet};
use crate::oracle::{HttpOracle, MockOracle, Oracle};
use crate::persistence::{open_run, PersistError, RunRecord};
use crate::profiles::{select_scientists, ProfileBuilder, ProfileError};

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("backend script: {0}")]
    Script(LlmError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("campaign aborted in run {run_id}: {source}")]
    Debate { run_id: String, source: DebateError },
}

impl CampaignError {
    /// True for problems with the inputs rather than the run itself.
    pub fn is_config(&self) -> bool {
        matches!(self, CampaignError::Script(_) | CampaignError::Template(_))
            || matches!(self, CampaignError::Corpus(CorpusError::Io { .. }))
    }
}

pub struct Outcome {
    pub record: RunRecord,
    pub result: DebateResult,
}

/// Runs a loaded config. `base` is the config file's directory; paths in
/// the persisted config are written relative to it.
pub fn run_campaign(cfg: &CampaignConfig, base: &Path) -> Result<Outcome, CampaignError> {
    let (corpus, report) = Corpus::ingest(&cfg.corpus.publications, cfg.corpus.molecules.as_deref())?;
    if !report.molecules_rejected.is_empty() {
        log::warn!("{} corpus molecules rejected", report.molecules_rejected.len());
    }
    let templates = match &cfg.templates {
        Some(dir) => TemplateSet::with_overrides(dir)?,
        None => TemplateSet::builtin(),
    };
    let backend: Box<dyn ChatBackend> = match cfg.backend.kind {
        BackendKind::Mock => {
            let script = cfg.backend.script.as_deref().expect("validated: mock backend has a script");
            Box::new(MockBackend::from_file(script).map_err(CampaignError::Script)?)
        }
        BackendKind::Http => Box::new(HttpBackend::new(&cfg.backend.http)),
    };
    let oracle: Option<Box<dyn Oracle>> = match cfg.oracle.kind {
        OracleKind::Mock => Some(Box::new(MockOracle::new(cfg.oracle.seed))),
        OracleKind::Http => Some(Box::new(HttpOracle::new(&cfg.oracle.http))),
        OracleKind::None => None,
    };

    let scientists = select_scientists(&corpus, &cfg.task, cfg.debate.n_scientists, cfg.profiles.top_m)?;
    if scientists.len() < cfg.debate.n_scientists {
        log::warn!(
            "corpus yields {} scientists, fewer than the {} requested",
            scientists.len(),
            cfg.debate.n_scientists
        );
    }
    let builder = ProfileBuilder {
        corpus: &corpus,
        task: &cfg.task,
        settings: &cfg.profiles,
        backend: backend.as_ref(),
        sampling: &cfg.backend.sampling,
        templates: &templates,
        rng_seed: cfg.debate.seed,
        fingerprint: cfg.fingerprint,
    };
    let profiles = builder.build_all(&scientists, cfg.debate.parallelism)?;

    let mut writer = open_run(&cfg.output_dir, &cfg.echo(base), corpus.fingerprint())?;
    let debate = Debate {
        config: &cfg.debate,
        task: &cfg.task,
        profiles: &profiles,
        backend: backend.as_ref(),
        oracle: oracle.as_deref(),
        templates: &templates,
        sampling: &cfg.backend.sampling,
        metrics: cfg.metrics,
        fingerprint: cfg.fingerprint,
    };
    match debate.run(&mut writer) {
        Ok(result) => {
            let record = writer.complete(&result)?;
            Ok(Outcome { record, result })
        }
        Err(source) => {
            let run_id = writer.record().run_id.clone();
            writer.fail(&source.to_string())?;
            Err(CampaignError::Debate { run_id, source })
        }
    }
}
