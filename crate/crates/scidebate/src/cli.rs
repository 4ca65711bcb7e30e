//! The `scidebate` command line. Exit codes: 0 success, 1 runtime failure,
//! 2 usage or config error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use scidebate_core::metrics::{
    affinity_to_kcal, int_div, mean_pairwise_similarity, num_circles, top_k_mean, topk_auc, MetricError,
    ScoredCall,
};
use scidebate_core::{morgan_fingerprint, FingerprintParams};

use crate::campaign::{run_campaign, CampaignError};
use crate::config::CampaignConfig;
use crate::corpus::{Corpus, CorpusError};
use crate::oracle::{check_constraints, Direction, HttpOracle, HttpOracleConfig, MockOracle, Oracle, PropertyKind, PropertySpec};
use crate::persistence::RESULT_FILE;
use crate::profiles::ProfileMode;
use crate::task::ConstraintSet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "scidebate", version, about = "Profile-grounded multi-agent debate for molecular discovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus and write its normalized index.
    Ingest(IngestArgs),
    /// Run a campaign from a config file.
    Run(RunArgs),
    /// Compute metrics for a molecule file.
    Score(ScoreArgs),
    /// Render a Markdown report of a run directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub pubs: PathBuf,
    #[arg(long)]
    pub mols: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long)]
    pub mode: Option<ProfileMode>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// One SMILES per line; anything after the first whitespace is ignored.
    #[arg(long)]
    pub mols: PathBuf,
    /// One score per line, aligned with `--mols`, in oracle-call order.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Lead molecule for the constraint report.
    #[arg(long)]
    pub seed: Option<String>,
    /// Comma-separated: int_div, mean_similarity, num_circles, top1,
    /// top10_mean, topk_auc, constraints.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0.75)]
    pub threshold: f64,
    /// Property the scores measure; sets the optimization direction.
    #[arg(long)]
    pub property: Option<String>,
    /// `mock` or an oracle service URL.
    #[arg(long, default_value = "mock")]
    pub oracle: String,
    #[arg(long, default_value_t = 0)]
    pub oracle_seed: u64,
    #[arg(long)]
    pub min_qed: Option<f64>,
    #[arg(long)]
    pub max_sa: Option<f64>,
    #[arg(long)]
    pub min_sim: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub run: PathBuf,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: message.into(),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let r = match cli.command {
        Command::Ingest(a) => cmd_ingest(&a, out),
        Command::Run(a) => cmd_run(&a, out),
        Command::Score(a) => cmd_score(&a, out),
        Command::Report(a) => cmd_report(&a, out),
    };
    match r {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn require_file(p: &Path) -> Result<(), Failure> {
    if p.is_file() {
        Ok(())
    } else {
        Err(usage(format!("file not found: {}", p.display())))
    }
}

fn put(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| runtime(format!("cannot write output: {e}")))
}

pub fn cmd_ingest(a: &IngestArgs, out: &mut dyn Write) -> Result<(), Failure> {
    require_file(&a.pubs)?;
    if let Some(m) = &a.mols {
        require_file(m)?;
    }
    let (corpus, report) = Corpus::ingest(&a.pubs, a.mols.as_deref()).map_err(|e| match e {
        CorpusError::Io { .. } => usage(e.to_string()),
        _ => runtime(e.to_string()),
    })?;
    corpus
        .write_index(&a.out, &report)
        .map_err(|e| runtime(format!("cannot write {}: {e}", a.out.display())))?;
    let summary = json!({
        "publications": report.publications,
        "molecules_accepted": report.molecules_accepted,
        "molecules_rejected": report.molecules_rejected.len(),
        "authors": corpus.authors().len(),
        "fingerprint": corpus.fingerprint(),
    });
    put(out, &format!("{}\n", serde_json::to_string_pretty(&summary).expect("json")))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{v:.4}"))
}

pub fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    require_file(&a.config)?;
    let mut cfg = CampaignConfig::load(&a.config).map_err(|e| usage(e.to_string()))?;
    if let Some(o) = &a.out {
        cfg.output_dir = o.clone();
    }
    if let Some(p) = a.parallelism {
        cfg.debate.parallelism = p;
    }
    if let Some(s) = a.seed {
        cfg.debate.seed = s;
    }
    if let Some(r) = a.max_rounds {
        cfg.debate.max_rounds = r;
    }
    if let Some(m) = a.mode {
        cfg.profiles.mode = m;
    }
    cfg.debate.validate().map_err(|e| usage(e.to_string()))?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let o = run_campaign(&cfg, base).map_err(|e| match e {
        e @ CampaignError::Debate { .. } => runtime(e.to_string()),
        e if e.is_config() => usage(e.to_string()),
        e => runtime(e.to_string()),
    })?;
    let s = &o.result.summary;
    let mut text = format!(
        "run_id: {}\nrounds: {} ({})\npool_size: {}\nactive: {}\nint_div: {}\nnum_circles: {}\n",
        o.record.run_id,
        o.result.rounds,
        o.result.termination.as_str(),
        s.pool_size,
        s.active,
        fmt_opt(s.int_div),
        s.num_circles,
    );
    if let Some(p) = &s.property {
        text.push_str(&format!("{p} top1: {}\n{p} top10_mean: {}\n", fmt_opt(s.top1), fmt_opt(s.top10_mean)));
    }
    if let Some(e) = &s.oracle_error {
        text.push_str(&format!("oracle_error: {e}\n"));
    }
    log::info!("run directory: {}", o.record.dir.display());
    put(out, &text)
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, Failure> {
    require_file(path)?;
    let text = fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let t = l.split_whitespace().next()?;
            (!t.starts_with('#')).then(|| (i + 1, t.to_string()))
        })
        .collect())
}

fn metric_failure(e: MetricError) -> Failure {
    usage(format!("metric undefined: {e}"))
}

pub fn cmd_score(a: &ScoreArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let params = FingerprintParams::default();
    let mut mols = Vec::new();
    for (line, s) in read_lines(&a.mols)? {
        let m = scidebate_core::parse(&s)
            .map_err(|e| runtime(format!("{} line {line}: {s:?}: {e}", a.mols.display())))?;
        mols.push(m);
    }
    let scores: Option<Vec<f64>> = match &a.scores {
        Some(p) => {
            let mut v = Vec::new();
            for (line, s) in read_lines(p)? {
                v.push(
                    s.parse::<f64>()
                        .map_err(|e| runtime(format!("{} line {line}: {s:?}: {e}", p.display())))?,
                );
            }
            if v.len() != mols.len() {
                return Err(runtime(format!("{} scores for {} molecules", v.len(), mols.len())));
            }
            Some(v)
        }
        None => None,
    };
    let spec: Option<PropertySpec> = match &a.property {
        Some(p) => Some(p.parse().map_err(|e: crate::oracle::OracleError| usage(e.to_string()))?),
        None => None,
    };
    let minimize = spec.as_ref().is_some_and(|s| s.direction == Direction::Minimize);
    let metrics: Vec<String> = if a.metrics.is_empty() {
        let mut m = vec!["int_div".to_string(), "num_circles".to_string()];
        if scores.is_some() {
            m.extend(["top1", "top10_mean", "topk_auc"].map(String::from));
        }
        m
    } else {
        a.metrics.iter().map(|m| m.trim().to_string()).filter(|m| !m.is_empty()).collect()
    };

    let fps: Vec<_> = mols.iter().map(|m| morgan_fingerprint(m, params)).collect();
    let need_scores = |name: &str| -> Result<&Vec<f64>, Failure> {
        scores.as_ref().ok_or_else(|| usage(format!("{name} needs --scores")))
    };
    // Scores oriented so that larger is better.
    let oriented = |v: &[f64]| -> Vec<f64> { v.iter().map(|&x| if minimize { -x } else { x }).collect() };
    let back = |x: f64| if minimize { -x } else { x };
    let mut report = Map::new();
    for name in &metrics {
        let value = match name.as_str() {
            "int_div" => json!(int_div(&fps).map_err(metric_failure)?),
            "mean_similarity" => json!(mean_pairwise_similarity(&fps).map_err(metric_failure)?),
            "num_circles" => json!(num_circles(&fps, a.threshold).map_err(metric_failure)?),
            "top1" => json!(top_k_mean(&oriented(need_scores(name)?), 1).map(back)),
            "top10_mean" => json!(top_k_mean(&oriented(need_scores(name)?), 10).map(back)),
            "topk_auc" => {
                let calls: Vec<ScoredCall> = mols
                    .iter()
                    .zip(oriented(need_scores(name)?))
                    .enumerate()
                    .map(|(i, (m, score))| ScoredCall {
                        call_index: i as u64 + 1,
                        molecule: m.canonical().to_string(),
                        score,
                    })
                    .collect();
                json!(back(topk_auc(&calls, a.k, a.budget).map_err(metric_failure)?))
            }
            "constraints" => {
                let seed = a.seed.as_deref().ok_or_else(|| usage("constraints need --seed"))?;
                let seed = scidebate_core::parse(seed).map_err(|e| usage(format!("--seed {seed:?}: {e}")))?;
                let defaults = ConstraintSet::default();
                let set = ConstraintSet {
                    min_qed: a.min_qed.unwrap_or(defaults.min_qed),
                    max_sa: a.max_sa.unwrap_or(defaults.max_sa),
                    min_sim: a.min_sim.unwrap_or(defaults.min_sim),
                };
                let oracle: Box<dyn Oracle> = if a.oracle == "mock" {
                    Box::new(MockOracle::new(a.oracle_seed))
                } else {
                    Box::new(HttpOracle::new(&HttpOracleConfig {
                        endpoint: a.oracle.clone(),
                        ..HttpOracleConfig::default()
                    }))
                };
                let reports: Vec<_> = mols
                    .iter()
                    .map(|m| check_constraints(m, &seed, &set, oracle.as_ref(), params))
                    .collect();
                json!(reports)
            }
            other => return Err(usage(format!("unknown metric {other:?}"))),
        };
        report.insert(name.clone(), value);
    }
    if let Some(PropertyKind::Affinity(_)) = spec.as_ref().map(|s| &s.kind) {
        for name in ["top1", "top10_mean"] {
            if let Some(v) = report.get(name).and_then(Value::as_f64) {
                let kcal = affinity_to_kcal(v).map_err(metric_failure)?;
                report.insert(format!("{name}_kcal"), json!(kcal));
            }
        }
    }
    put(out, &format!("{}\n", serde_json::to_string_pretty(&Value::Object(report)).expect("json")))
}

pub fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if !a.run.is_dir() {
        return Err(usage(format!("no such run directory: {}", a.run.display())));
    }
    if !a.run.join(RESULT_FILE).is_file() {
        return Err(usage(format!("{} is not a run directory", a.run.display())));
    }
    let text = crate::report::render(&a.run).map_err(|e| runtime(e.to_string()))?;
    if let Some(p) = &a.out {
        fs::write(p, &text).map_err(|e| runtime(format!("cannot write {}: {e}", p.display())))?;
    }
    put(out, &text)
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    main_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
