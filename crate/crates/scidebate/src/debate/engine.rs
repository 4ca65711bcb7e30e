use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use scidebate_core::consensus::{aggregate, should_terminate, Ballot, Standing, TerminationReason};
use scidebate_core::hash::Mixer;
use scidebate_core::metrics::{int_div, num_circles, MetricConfig};
use scidebate_core::FingerprintParams;

use super::events::{Event, EventSink};
use super::pool::{Critique, CritiqueKind, Pool};
use super::{DebateConfig, DebateError};
use crate::llm::parse::{parse_ballot, parse_critiques, parse_proposals, CritiqueItem, OutputError};
use crate::llm::{ChatBackend, Phase, RequestTag, Sampling, TemplateSet};
use crate::oracle::{score_all, Direction, Oracle, PropertySpec};
use crate::parallel::fan_out;
use crate::profiles::ExpertiseProfile;
use crate::prompts::{smiles_block, system_prompt, task_text};
use crate::task::TaskSpec;

/// Pool metrics at the end of a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSnapshot {
    pub round: usize,
    pub pool_size: usize,
    pub active: usize,
    pub new_candidates: usize,
    /// Over active candidates; absent below two.
    pub int_div: Option<f64>,
    pub num_circles: usize,
    pub ballots: usize,
    pub abstentions: usize,
    pub leader: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleScore {
    pub smiles: String,
    pub score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pool_size: usize,
    pub active: usize,
    pub int_div: Option<f64>,
    pub num_circles: usize,
    pub property: Option<String>,
    pub top1: Option<f64>,
    pub top10_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateResult {
    pub rounds: usize,
    pub termination: TerminationReason,
    /// Last round's aggregation over active candidates.
    pub ranking: Vec<Standing>,
    pub candidates: Vec<super::Candidate>,
    pub snapshots: Vec<RoundSnapshot>,
    pub oracle_scores: Vec<OracleScore>,
    pub summary: Summary,
}

/// A configured campaign. Agents are the profiles, in order; each agent's
/// id is its profile's `scientist_id`.
pub struct Debate<'a> {
    pub config: &'a DebateConfig,
    pub task: &'a TaskSpec,
    pub profiles: &'a [ExpertiseProfile],
    pub backend: &'a dyn ChatBackend,
    pub oracle: Option<&'a dyn Oracle>,
    pub templates: &'a TemplateSet,
    pub sampling: &'a Sampling,
    pub metrics: MetricConfig,
    pub fingerprint: FingerprintParams,
}

struct Ctx<'a> {
    debate: &'a Debate<'a>,
    systems: Vec<String>,
    task: String,
}

fn canonical(smiles: &str) -> Result<String, String> {
    scidebate_core::parse(smiles.trim())
        .map(|m| m.canonical().to_string())
        .map_err(|e| e.to_string())
}

struct Accepted {
    smiles: String,
    input: String,
    rationale: String,
}

struct ProposalOutcome {
    response: String,
    repair_response: Option<String>,
    accepted: Vec<Accepted>,
    dropped: Vec<(String, String)>,
    recovered: usize,
    parse_failed: bool,
}

struct CritiqueOutcome {
    shown: Vec<String>,
    response: Option<String>,
    repair_response: Option<String>,
    items: Vec<(String, CritiqueItem, Option<String>)>,
    warnings: Vec<String>,
    failed: bool,
}

struct VoteOutcome {
    response: String,
    repair_response: Option<String>,
    ballot: Option<Ballot>,
    warnings: Vec<String>,
}

impl Ctx<'_> {
    fn ask(&self, agent: usize, round: usize, phase: Phase, prompt: String) -> Result<String, DebateError> {
        let id = &self.debate.profiles[agent].scientist_id;
        let tag = RequestTag::new(id.as_str(), round, phase);
        let req = self.debate.sampling.request(tag.clone(), self.systems[agent].clone(), prompt);
        self.debate
            .backend
            .complete(&req)
            .map_err(|source| DebateError::Backend { tag, source })
    }

    fn proposal(&self, agent: usize, round: usize, context: &str) -> Result<ProposalOutcome, DebateError> {
        let k = self.debate.config.proposals_per_agent;
        let prompt = self.debate.templates.render(
            "proposal",
            &[
                ("round", &round.to_string()),
                ("task", &self.task),
                ("context", context),
                ("k", &k.to_string()),
            ],
        )?;
        let response = self.ask(agent, round, Phase::Proposal, prompt)?;
        let mut out = ProposalOutcome {
            response,
            repair_response: None,
            accepted: Vec::new(),
            dropped: Vec::new(),
            recovered: 0,
            parse_failed: false,
        };
        let mut problems = Vec::new();
        let wanted = match parse_proposals(&out.response, k) {
            Ok(list) => {
                for p in list {
                    match canonical(&p.smiles) {
                        Ok(c) => out.accepted.push(Accepted {
                            smiles: c,
                            input: p.smiles,
                            rationale: p.rationale,
                        }),
                        Err(e) => {
                            problems.push(format!("- `{}` is not a valid SMILES ({e})", p.smiles));
                            out.dropped.push((p.smiles, e));
                        }
                    }
                }
                problems.len()
            }
            Err(_) => {
                problems.push("- the reply did not contain proposals in the requested format".into());
                k
            }
        };
        if problems.is_empty() {
            return Ok(out);
        }
        let prompt = self.debate.templates.render(
            "proposal_repair",
            &[("problems", &problems.join("\n")), ("count", &wanted.to_string())],
        )?;
        let repair = self.ask(agent, round, Phase::ProposalRepair, prompt)?;
        match parse_proposals(&repair, wanted) {
            Ok(list) => {
                for p in list {
                    match canonical(&p.smiles) {
                        Ok(c) => {
                            out.recovered += 1;
                            out.accepted.push(Accepted {
                                smiles: c,
                                input: p.smiles,
                                rationale: p.rationale,
                            });
                        }
                        Err(e) => out.dropped.push((p.smiles, e)),
                    }
                }
            }
            Err(_) => out.parse_failed = out.accepted.is_empty(),
        }
        out.repair_response = Some(repair);
        Ok(out)
    }

    /// Shared by both critique stages: `shown` are canonical SMILES.
    fn critique(
        &self,
        agent: usize,
        round: usize,
        shown: Vec<String>,
        kind: CritiqueKind,
        notes: String,
    ) -> Result<CritiqueOutcome, DebateError> {
        let (template, phase, repair_phase, edit_field) = match kind {
            CritiqueKind::SelfReview => ("critique_self", Phase::CritiqueSelf, Phase::CritiqueSelfRepair, "replacement"),
            CritiqueKind::Cross => ("critique_cross", Phase::CritiqueCross, Phase::CritiqueCrossRepair, "suggestion"),
        };
        let mut out = CritiqueOutcome {
            shown,
            response: None,
            repair_response: None,
            items: Vec::new(),
            warnings: Vec::new(),
            failed: false,
        };
        if out.shown.is_empty() {
            return Ok(out);
        }
        let prompt = self.debate.templates.render(
            template,
            &[
                ("round", &round.to_string()),
                ("task", &self.task),
                ("candidates", &smiles_block(&out.shown)),
                ("notes", &notes),
            ],
        )?;
        let response = self.ask(agent, round, phase, prompt)?;
        let parsed = match parse_critiques(&response) {
            Ok(items) => Some(items),
            Err(e) => {
                let prompt = self.debate.templates.render(
                    "critique_repair",
                    &[("problems", &e.to_string()), ("edit_field", edit_field)],
                )?;
                let repair = self.ask(agent, round, repair_phase, prompt)?;
                let p = parse_critiques(&repair).ok();
                out.repair_response = Some(repair);
                p
            }
        };
        out.response = Some(response);
        let Some(items) = parsed else {
            out.failed = true;
            return Ok(out);
        };
        for item in items {
            let target = match canonical(&item.smiles) {
                Ok(c) if out.shown.contains(&c) => c,
                _ => {
                    out.warnings.push(format!("ignored critique of {:?}: not shown", item.smiles));
                    continue;
                }
            };
            let edit = match &item.edit {
                Some(e) => match canonical(e) {
                    Ok(c) => Some(c),
                    Err(err) => {
                        out.warnings.push(format!("dropped {edit_field} {e:?}: {err}"));
                        None
                    }
                },
                None => None,
            };
            out.items.push((target, item, edit));
        }
        Ok(out)
    }

    fn vote(&self, agent: usize, round: usize, view: &[String]) -> Result<VoteOutcome, DebateError> {
        let prompt = self.debate.templates.render(
            "voting",
            &[
                ("round", &round.to_string()),
                ("task", &self.task),
                ("candidates", &smiles_block(view)),
            ],
        )?;
        let response = self.ask(agent, round, Phase::Voting, prompt)?;
        let mut out = VoteOutcome {
            response,
            repair_response: None,
            ballot: None,
            warnings: Vec::new(),
        };
        let usable = |text: &str| match parse_ballot(text, view) {
            Ok(b) if !b.scores.is_empty() => Ok(b),
            Ok(b) => Err((OutputError::Empty, b.warnings)),
            Err(e) => Err((e, Vec::new())),
        };
        let parsed = match usable(&out.response) {
            Ok(b) => Some(b),
            Err((e, warnings)) => {
                out.warnings.extend(warnings);
                let prompt = self
                    .debate
                    .templates
                    .render("voting_repair", &[("problems", &e.to_string())])?;
                let repair = self.ask(agent, round, Phase::VotingRepair, prompt)?;
                let p = match usable(&repair) {
                    Ok(b) => Some(b),
                    Err((_, w)) => {
                        out.warnings.extend(w);
                        None
                    }
                };
                out.repair_response = Some(repair);
                p
            }
        };
        if let Some(b) = parsed {
            out.warnings.extend(b.warnings);
            out.ballot = Some(Ballot {
                view: view.to_vec(),
                scores: b.scores.into_iter().map(|(s, t)| (s, t.clamped())).collect(),
            });
        }
        Ok(out)
    }
}

fn agent_rng(seed: u64, round: usize, agent: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        Mixer::new()
            .word(seed)
            .word(round as u64)
            .word(agent as u64)
            .finish(),
    )
}

fn standing_json(s: &Standing) -> Value {
    json!({"smiles": s.smiles, "votes": s.votes, "mean_score": s.mean_score})
}

impl Debate<'_> {
    pub fn agent_ids(&self) -> Vec<&str> {
        self.profiles.iter().map(|p| p.scientist_id.as_str()).collect()
    }

    /// Runs rounds until the termination rule fires.
    pub fn run(&self, sink: &mut dyn EventSink) -> Result<DebateResult, DebateError> {
        self.config.validate()?;
        if self.profiles.is_empty() {
            return Err(DebateError::Config("no agents".into()));
        }
        let mut ids: Vec<&str> = self.agent_ids();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(DebateError::Config("agent ids must be unique".into()));
        }
        let systems = self
            .profiles
            .iter()
            .map(|p| system_prompt(self.templates, p))
            .collect::<Result<Vec<_>, _>>()?;
        let ctx = Ctx {
            debate: self,
            systems,
            task: task_text(self.templates, self.task)?,
        };
        for p in self.profiles {
            sink.record(&Event {
                round: 0,
                phase: "profile".into(),
                agent: Some(p.scientist_id.clone()),
                payload: serde_json::to_value(p).expect("profiles serialize"),
            })?;
        }
        sink.end_phase()?;

        let mut pool = Pool::default();
        let mut ranking: Vec<Standing> = Vec::new();
        let mut snapshots = Vec::new();
        let mut round = 0;
        let termination = loop {
            round += 1;
            let before = pool.len();
            let own = self.proposal_phase(&ctx, round, &mut pool, &ranking, sink)?;
            if self.config.self_critique {
                self.self_critique_phase(&ctx, round, &mut pool, &own, sink)?;
            }
            self.cross_critique_phase(&ctx, round, &mut pool, sink)?;
            let (new_ranking, ballots, abstentions) = self.voting_phase(&ctx, round, &mut pool, sink)?;
            ranking = new_ranking;
            let fps = pool.active_fingerprints();
            let snap = RoundSnapshot {
                round,
                pool_size: pool.len(),
                active: fps.len(),
                new_candidates: pool.len() - before,
                int_div: int_div(&fps).ok(),
                num_circles: num_circles(&fps, self.metrics.circle_threshold).unwrap_or(0),
                ballots,
                abstentions,
                leader: ranking.first().map(|s| s.smiles.clone()),
            };
            sink.record(&Event {
                round,
                phase: "round_end".into(),
                agent: None,
                payload: serde_json::to_value(&snap).expect("snapshot serializes"),
            })?;
            sink.end_phase()?;
            sink.end_round(pool.candidates(), &snap)?;
            snapshots.push(snap);
            if let Some(reason) = should_terminate(round, pool.len(), self.config.max_rounds, self.config.candidate_budget) {
                break reason;
            }
        };
        sink.record(&Event {
            round,
            phase: "termination".into(),
            agent: None,
            payload: json!({"reason": termination, "rounds": round}),
        })?;
        sink.end_phase()?;

        let (oracle_scores, summary) = self.summarize(&pool, &ranking, snapshots.last());
        Ok(DebateResult {
            rounds: round,
            termination,
            ranking,
            candidates: pool.candidates().to_vec(),
            snapshots,
            oracle_scores,
            summary,
        })
    }

    fn context_block(&self, pool: &Pool, ranking: &[Standing], round: usize) -> String {
        if round == 1 || ranking.is_empty() {
            return String::new();
        }
        let mut out = String::from("Leading candidates so far, with recent critiques:\n");
        for s in ranking.iter().take(self.config.context_top) {
            out.push_str(&format!("- {} (votes: {}, mean score: {:.3})\n", s.smiles, s.votes, s.mean_score));
            if let Some(c) = pool.get(&s.smiles) {
                for cr in c.critiques.iter().filter(|cr| cr.round + 1 == round).take(3) {
                    out.push_str(&format!("    {}: {}\n", cr.critic, cr.text));
                }
            }
        }
        out
    }

    /// Returns, per agent, the canonical SMILES it proposed this round.
    fn proposal_phase(
        &self,
        ctx: &Ctx<'_>,
        round: usize,
        pool: &mut Pool,
        ranking: &[Standing],
        sink: &mut dyn EventSink,
    ) -> Result<Vec<Vec<String>>, DebateError> {
        let context = self.context_block(pool, ranking, round);
        let outcomes = fan_out(self.profiles.len(), self.config.parallelism, |i| ctx.proposal(i, round, &context));
        let mut own = Vec::with_capacity(outcomes.len());
        for (i, outcome) in outcomes.into_iter().enumerate() {
            let o = outcome?;
            let agent = &self.profiles[i].scientist_id;
            let mut mine: Vec<String> = Vec::new();
            let mut merged = Vec::new();
            for a in &o.accepted {
                let new = pool.merge(&a.smiles, agent, round, &a.rationale, self.fingerprint);
                merged.push(json!({"smiles": a.smiles, "input": a.input, "rationale": a.rationale, "new": new}));
                if !mine.contains(&a.smiles) {
                    mine.push(a.smiles.clone());
                }
            }
            if o.parse_failed {
                log::warn!("round {round}: {agent} contributed no proposals");
            }
            sink.record(&Event {
                round,
                phase: "proposal".into(),
                agent: Some(agent.clone()),
                payload: json!({
                    "response": o.response,
                    "repair_response": o.repair_response,
                    "accepted": merged,
                    "dropped": o.dropped.iter().map(|(s, r)| json!({"smiles": s, "reason": r})).collect::<Vec<_>>(),
                    "recovered": o.recovered,
                    "parse_failed": o.parse_failed,
                }),
            })?;
            own.push(mine);
        }
        sink.end_phase()?;
        Ok(own)
    }

    fn oracle_notes(&self, smiles: &[String]) -> String {
        if !self.config.self_critique_oracle {
            return String::new();
        }
        let (Some(oracle), Some(prop)) = (self.oracle, self.task.property.as_deref()) else {
            return String::new();
        };
        let spec: PropertySpec = match prop.parse() {
            Ok(s) => s,
            Err(e) => return format!("Property estimates unavailable: {e}\n"),
        };
        match score_all(oracle, &spec, smiles) {
            Ok(slots) => {
                let mut out = format!("Oracle estimates of {spec}:\n");
                for (s, v) in smiles.iter().zip(slots) {
                    match v {
                        Ok(v) => out.push_str(&format!("- {s}: {v:.4}\n")),
                        Err(e) => out.push_str(&format!("- {s}: unavailable ({e})\n")),
                    }
                }
                out
            }
            Err(e) => format!("Property estimates unavailable: {e}\n"),
        }
    }

    fn self_critique_phase(
        &self,
        ctx: &Ctx<'_>,
        round: usize,
        pool: &mut Pool,
        own: &[Vec<String>],
        sink: &mut dyn EventSink,
    ) -> Result<(), DebateError> {
        let shown: Vec<Vec<String>> = own
            .iter()
            .map(|list| list.iter().filter(|s| pool.get(s).is_some_and(|c| c.is_active())).cloned().collect())
            .collect();
        let outcomes = fan_out(self.profiles.len(), self.config.parallelism, |i| {
            let notes = if shown[i].is_empty() { String::new() } else { self.oracle_notes(&shown[i]) };
            ctx.critique(i, round, shown[i].clone(), CritiqueKind::SelfReview, notes)
        });
        for (i, outcome) in outcomes.into_iter().enumerate() {
            let o = outcome?;
            if o.shown.is_empty() {
                continue;
            }
            let agent = &self.profiles[i].scientist_id;
            let mut replacements = Vec::new();
            let mut warnings = o.warnings.clone();
            for (target, item, edit) in &o.items {
                let c = pool.get_mut(target).expect("critiqued candidates are pooled");
                c.critiques.push(Critique {
                    critic: agent.clone(),
                    round,
                    kind: CritiqueKind::SelfReview,
                    text: item.critique.clone(),
                    suggestion: edit.clone(),
                });
                let Some(new) = edit.as_ref().filter(|e| *e != target) else {
                    continue;
                };
                if c.proposer != *agent || !c.is_active() {
                    warnings.push(format!("replacement for {target} not applied: not the agent's active proposal"));
                    continue;
                }
                c.superseded_by = Some(new.clone());
                let text = format!("replaces {target}: {}", item.critique);
                if pool.merge(new, agent, round, &text, self.fingerprint) {
                    pool.get_mut(new).expect("just merged").replaces = Some(target.clone());
                }
                replacements.push(json!({"from": target, "to": new}));
            }
            sink.record(&Event {
                round,
                phase: "critique_self".into(),
                agent: Some(agent.clone()),
                payload: json!({
                    "shown": o.shown,
                    "response": o.response,
                    "repair_response": o.repair_response,
                    "critiques": o.items.iter().map(|(t, it, e)| json!({"smiles": t, "critique": it.critique, "replacement": e})).collect::<Vec<_>>(),
                    "replacements": replacements,
                    "warnings": warnings,
                    "failed": o.failed,
                }),
            })?;
        }
        sink.end_phase()?;
        Ok(())
    }

    fn cross_critique_phase(
        &self,
        ctx: &Ctx<'_>,
        round: usize,
        pool: &mut Pool,
        sink: &mut dyn EventSink,
    ) -> Result<(), DebateError> {
        let samples: Vec<Vec<String>> = (0..self.profiles.len())
            .map(|i| {
                let agent = &self.profiles[i].scientist_id;
                let eligible: Vec<&str> = pool
                    .active()
                    .filter(|c| c.proposer != *agent)
                    .map(|c| c.smiles.as_str())
                    .collect();
                let n = self.config.cross_sample.min(eligible.len());
                let mut rng = agent_rng(self.config.seed, round, i);
                let mut picked = rand::seq::index::sample(&mut rng, eligible.len(), n).into_vec();
                picked.sort_unstable();
                picked.into_iter().map(|j| eligible[j].to_string()).collect()
            })
            .collect();
        let outcomes = fan_out(self.profiles.len(), self.config.parallelism, |i| {
            ctx.critique(i, round, samples[i].clone(), CritiqueKind::Cross, String::new())
        });
        for (i, outcome) in outcomes.into_iter().enumerate() {
            let o = outcome?;
            if o.shown.is_empty() {
                continue;
            }
            let agent = &self.profiles[i].scientist_id;
            for (target, item, edit) in &o.items {
                pool.get_mut(target).expect("sampled from pool").critiques.push(Critique {
                    critic: agent.clone(),
                    round,
                    kind: CritiqueKind::Cross,
                    text: item.critique.clone(),
                    suggestion: edit.clone(),
                });
            }
            sink.record(&Event {
                round,
                phase: "critique_cross".into(),
                agent: Some(agent.clone()),
                payload: json!({
                    "shown": o.shown,
                    "response": o.response,
                    "repair_response": o.repair_response,
                    "critiques": o.items.iter().map(|(t, it, e)| json!({"smiles": t, "critique": it.critique, "suggestion": e})).collect::<Vec<_>>(),
                    "warnings": o.warnings,
                    "failed": o.failed,
                }),
            })?;
        }
        sink.end_phase()?;
        Ok(())
    }

    fn ballot_view(&self, pool: &Pool) -> Vec<String> {
        let mut active: Vec<&super::Candidate> = pool.active().collect();
        if let Some(cap) = self.config.ballot_cap {
            if active.len() > cap {
                active.sort_by(|a, b| {
                    b.vote_count
                        .cmp(&a.vote_count)
                        .then_with(|| b.mean_score.total_cmp(&a.mean_score))
                        .then_with(|| a.smiles.cmp(&b.smiles))
                });
                active.truncate(cap);
            }
        }
        active.into_iter().map(|c| c.smiles.clone()).collect()
    }

    fn voting_phase(
        &self,
        ctx: &Ctx<'_>,
        round: usize,
        pool: &mut Pool,
        sink: &mut dyn EventSink,
    ) -> Result<(Vec<Standing>, usize, usize), DebateError> {
        let active: Vec<String> = pool.active().map(|c| c.smiles.clone()).collect();
        if active.is_empty() {
            sink.record(&Event {
                round,
                phase: "voting".into(),
                agent: None,
                payload: json!({"skipped": "empty pool"}),
            })?;
            sink.end_phase()?;
            return Ok((Vec::new(), 0, 0));
        }
        let view = self.ballot_view(pool);
        let outcomes = fan_out(self.profiles.len(), self.config.parallelism, |i| ctx.vote(i, round, &view));
        let t = self.config.votes_per_agent;
        let mut ballots: Vec<(String, Ballot)> = Vec::new();
        let mut abstentions = 0;
        for (i, outcome) in outcomes.into_iter().enumerate() {
            let o = outcome?;
            let agent = &self.profiles[i].scientist_id;
            let votes = o.ballot.as_ref().map(|b| b.votes(t)).unwrap_or_default();
            if o.ballot.is_none() {
                abstentions += 1;
                log::warn!("round {round}: {agent} abstained");
            }
            sink.record(&Event {
                round,
                phase: "voting".into(),
                agent: Some(agent.clone()),
                payload: json!({
                    "view_size": view.len(),
                    "response": o.response,
                    "repair_response": o.repair_response,
                    "scores": o.ballot.as_ref().map(|b| &b.scores),
                    "votes": votes,
                    "warnings": o.warnings,
                    "abstained": o.ballot.is_none(),
                }),
            })?;
            if let Some(b) = o.ballot {
                ballots.push((agent.clone(), b));
            }
        }
        let plain: Vec<Ballot> = ballots.iter().map(|(_, b)| b.clone()).collect();
        let ranking = aggregate(&active, &plain, t);
        let by_smiles: BTreeMap<&str, &Standing> = ranking.iter().map(|s| (s.smiles.as_str(), s)).collect();
        for c in pool.candidates_mut() {
            c.scores.clear();
            c.votes.clear();
            let s = by_smiles.get(c.smiles.as_str());
            c.vote_count = s.map_or(0, |s| s.votes);
            c.mean_score = s.map_or(0.0, |s| s.mean_score);
        }
        for (agent, b) in &ballots {
            for (smiles, triple) in &b.scores {
                if let Some(c) = pool.get_mut(smiles) {
                    c.scores.insert(agent.clone(), *triple);
                }
            }
            for v in b.votes(t) {
                if let Some(c) = pool.get_mut(&v) {
                    c.votes.insert(agent.clone());
                }
            }
        }
        sink.record(&Event {
            round,
            phase: "aggregation".into(),
            agent: None,
            payload: json!({"ranking": ranking.iter().map(standing_json).collect::<Vec<_>>()}),
        })?;
        sink.end_phase()?;
        Ok((ranking, ballots.len(), abstentions))
    }

    fn summarize(&self, pool: &Pool, ranking: &[Standing], last: Option<&RoundSnapshot>) -> (Vec<OracleScore>, Summary) {
        let mut summary = Summary {
            pool_size: pool.len(),
            active: last.map_or(0, |s| s.active),
            int_div: last.and_then(|s| s.int_div),
            num_circles: last.map_or(0, |s| s.num_circles),
            property: self.task.property.clone(),
            top1: None,
            top10_mean: None,
            oracle_error: None,
        };
        let (Some(oracle), Some(prop)) = (self.oracle, self.task.property.as_deref()) else {
            return (Vec::new(), summary);
        };
        let spec: PropertySpec = match prop.parse() {
            Ok(s) => s,
            Err(e) => {
                summary.oracle_error = Some(e.to_string());
                return (Vec::new(), summary);
            }
        };
        let smiles: Vec<String> = ranking.iter().map(|s| s.smiles.clone()).collect();
        let slots = match score_all(oracle, &spec, &smiles) {
            Ok(s) => s,
            Err(e) => {
                log::error!("final scoring failed: {e}");
                summary.oracle_error = Some(e.to_string());
                return (Vec::new(), summary);
            }
        };
        let scores: Vec<OracleScore> = smiles
            .into_iter()
            .zip(slots)
            .map(|(smiles, slot)| match slot {
                Ok(v) => OracleScore { smiles, score: Some(v), error: None },
                Err(e) => OracleScore { smiles, score: None, error: Some(e) },
            })
            .collect();
        let mut values: Vec<f64> = scores.iter().filter_map(|s| s.score).collect();
        match spec.direction {
            Direction::Maximize => values.sort_by(|a, b| b.total_cmp(a)),
            Direction::Minimize => values.sort_by(|a, b| a.total_cmp(b)),
        }
        summary.top1 = values.first().copied();
        if !values.is_empty() {
            let top = &values[..values.len().min(10)];
            summary.top10_mean = Some(top.iter().sum::<f64>() / top.len() as f64);
        }
        (scores, summary)
    }
}
