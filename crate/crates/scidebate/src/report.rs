//! Markdown campaign report rendered from a run directory.

use std::fmt::Write;
use std::path::Path;

use serde_json::Value;

use crate::persistence::{read_jsonl, read_result, PersistError, METRICS_FILE, TRANSCRIPT_FILE};

fn num(v: &Value) -> String {
    match v.as_f64() {
        Some(f) if v.is_f64() => format!("{f:.4}"),
        Some(_) => v.to_string(),
        None => "n/a".into(),
    }
}

/// Works on completed, failed and interrupted runs alike.
pub fn render(dir: &Path) -> Result<String, PersistError> {
    let result = read_result(dir)?;
    let metrics = read_jsonl(&dir.join(METRICS_FILE))?;
    let transcript = read_jsonl(&dir.join(TRANSCRIPT_FILE))?;
    let mut out = String::new();

    let task = &result["config"]["task"];
    writeln!(out, "# Campaign {}", result["run_id"].as_str().unwrap_or("?")).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "- task: {} ({})", task["id"].as_str().unwrap_or("?"), task["objective"].as_str().unwrap_or("?")).unwrap();
    writeln!(out, "- status: {}", result["status"].as_str().unwrap_or("?")).unwrap();
    if let Some(t) = result["termination"].as_str() {
        writeln!(out, "- termination: {t} after {} rounds", result["rounds"]).unwrap();
    }
    if let Some(e) = result["error"].as_str() {
        writeln!(out, "- error: {e}").unwrap();
    }
    let agents = transcript.iter().filter(|e| e["phase"] == "profile").count();
    writeln!(out, "- agents: {agents}").unwrap();

    for m in &metrics {
        let round = m["round"].as_u64().unwrap_or(0);
        writeln!(out, "\n## Round {round}\n").unwrap();
        writeln!(
            out,
            "Pool {} (+{} new, {} active). IntDiv {}, #Circles {}. Ballots {}, abstentions {}.",
            m["pool_size"], m["new_candidates"], m["active"], num(&m["int_div"]), m["num_circles"], m["ballots"], m["abstentions"]
        )
        .unwrap();
        let ranking = transcript
            .iter()
            .find(|e| e["phase"] == "aggregation" && e["round"].as_u64() == Some(round))
            .and_then(|e| e["payload"]["ranking"].as_array());
        let voted: Vec<&Value> = ranking
            .map(|r| r.iter().filter(|s| s["votes"].as_u64().unwrap_or(0) > 0).collect())
            .unwrap_or_default();
        if voted.is_empty() {
            writeln!(out, "\nNo votes cast.").unwrap();
            continue;
        }
        writeln!(out, "\n| SMILES | votes | mean score |\n|---|---:|---:|").unwrap();
        for s in voted {
            writeln!(out, "| `{}` | {} | {} |", s["smiles"].as_str().unwrap_or("?"), s["votes"], num(&s["mean_score"])).unwrap();
        }
    }

    if let Some(ranking) = result["ranking"].as_array() {
        let scores: Vec<&Value> = result["oracle_scores"].as_array().map(|a| a.iter().collect()).unwrap_or_default();
        let property = result["summary"]["property"].as_str();
        writeln!(out, "\n## Final ranking (top 10)\n").unwrap();
        let header = property.filter(|_| !scores.is_empty()).unwrap_or("");
        if header.is_empty() {
            writeln!(out, "| rank | SMILES | votes | mean score |\n|---:|---|---:|---:|").unwrap();
        } else {
            writeln!(out, "| rank | SMILES | votes | mean score | {header} |\n|---:|---|---:|---:|---:|").unwrap();
        }
        for (i, s) in ranking.iter().take(10).enumerate() {
            let smiles = s["smiles"].as_str().unwrap_or("?");
            write!(out, "| {} | `{smiles}` | {} | {} |", i + 1, s["votes"], num(&s["mean_score"])).unwrap();
            if !header.is_empty() {
                let v = scores.iter().find(|o| o["smiles"] == smiles).map(|o| num(&o["score"])).unwrap_or("n/a".into());
                write!(out, " {v} |").unwrap();
            }
            writeln!(out).unwrap();
        }
        let summary = &result["summary"];
        writeln!(out, "\n## Summary\n").unwrap();
        writeln!(out, "- pool size: {}", summary["pool_size"]).unwrap();
        writeln!(out, "- IntDiv: {}", num(&summary["int_div"])).unwrap();
        writeln!(out, "- #Circles: {}", summary["num_circles"]).unwrap();
        if !summary["top1"].is_null() {
            writeln!(out, "- top-1: {}", num(&summary["top1"])).unwrap();
            writeln!(out, "- top-10 mean: {}", num(&summary["top10_mean"])).unwrap();
        }
        if let Some(e) = summary["oracle_error"].as_str() {
            writeln!(out, "- oracle error: {e}").unwrap();
        }
    }
    Ok(out)
}
