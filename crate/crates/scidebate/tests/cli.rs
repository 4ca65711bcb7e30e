use std::net::TcpListener;
use std::path::{Path, PathBuf};

use scidebate::cli::main_with;
use serde_json::{json, Value};

fn scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/mock")
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let argv = std::iter::once("scidebate").chain(args.iter().copied());
    let code = main_with(argv, &mut o, &mut e);
    (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ingest_writes_index() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenario();
    let (code, out, err) = cli(&[
        "ingest",
        "--pubs",
        s(&sc.join("publications.jsonl")),
        "--mols",
        s(&sc.join("molecules.jsonl")),
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["publications"], 6);
    assert_eq!(v["molecules_accepted"], 7);
    assert_eq!(v["molecules_rejected"], 1);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["rejected"][0]["smiles"], "not-a-smiles");
    assert!(tmp.path().join("publications.jsonl").is_file());
}

#[test]
fn ingest_missing_file_is_usage() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, err) = cli(&["ingest", "--pubs", s(&tmp.path().join("nope.jsonl")), "--out", s(tmp.path())]);
    assert_eq!(code, 2);
    assert!(err.contains("nope.jsonl"));
}

#[test]
fn ingest_bad_line_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let pubs = tmp.path().join("pubs.jsonl");
    std::fs::write(
        &pubs,
        "{\"id\":\"p\",\"title\":\"t\",\"abstract\":\"a\",\"authors\":[\"x\"],\"year\":2020}\n{oops\n",
    )
    .unwrap();
    let (code, _, err) = cli(&["ingest", "--pubs", s(&pubs), "--out", s(&tmp.path().join("idx"))]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");
}

const MOCK_SUMMARY: &str = "run_id: 08d0bd6131f99ec8
rounds: 3 (max_rounds)
pool_size: 45
active: 44
int_div: 0.8693
num_circles: 44
gsk3b top1: 0.9736
gsk3b top10_mean: 0.9320
";

#[test]
fn mock_campaign_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario().join("campaign.json");
    let (code, out, err) = cli(&["run", "--config", s(&cfg), "--out", s(tmp.path())]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out, MOCK_SUMMARY);
    // Parallelism is not part of the run identity.
    let (code, again, _) = cli(&["run", "--config", s(&cfg), "--out", s(tmp.path()), "--parallelism", "4"]);
    assert_eq!(code, 0);
    assert_eq!(again, MOCK_SUMMARY);
}

#[test]
fn overrides_change_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario().join("campaign.json");
    let (code, out, err) = cli(&["run", "--config", s(&cfg), "--out", s(tmp.path()), "--max-rounds", "1"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("rounds: 1 (max_rounds)"), "{out}");
    assert!(!out.starts_with("run_id: 08d0bd6131f99ec8"));
}

fn write_config(dir: &Path, patch: impl FnOnce(&mut Value)) -> PathBuf {
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(scenario().join("campaign.json")).unwrap()).unwrap();
    let sc = scenario();
    cfg["corpus"] = json!({"publications": sc.join("publications.jsonl"), "molecules": sc.join("molecules.jsonl")});
    cfg["backend"]["script"] = json!(sc.join("script.jsonl"));
    cfg["output_dir"] = json!(dir.join("runs"));
    patch(&mut cfg);
    let path = dir.join("campaign.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn lead_optimization_without_seed_is_usage() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), |c| c["task"]["objective"] = json!("lead_optimization"));
    let (code, _, err) = cli(&["run", "--config", s(&cfg)]);
    assert_eq!(code, 2);
    assert!(err.contains("seed"), "{err}");
}

#[test]
fn unknown_config_field_is_usage() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), |c| c["rounds"] = json!(3));
    assert_eq!(cli(&["run", "--config", s(&cfg)]).0, 2);
    assert_eq!(cli(&["run", "--config", s(&tmp.path().join("missing.json"))]).0, 2);
}

#[test]
fn unreachable_backend_fails_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = write_config(tmp.path(), |c| {
        c["backend"] = json!({"kind": "http", "http": {
            "endpoint": format!("http://127.0.0.1:{port}"),
            "api_key_env": "SCIDEBATE_TEST_NO_KEY",
            "retry": {"max_retries": 1, "base_delay_ms": 1, "max_delay_ms": 1}
        }});
    });
    let (code, _, err) = cli(&["run", "--config", s(&cfg)]);
    assert_eq!(code, 1);
    assert!(err.contains("gave up after 2 attempts"), "{err}");
    let runs: Vec<_> = std::fs::read_dir(tmp.path().join("runs")).unwrap().collect();
    let dir = runs[0].as_ref().unwrap().path();
    let result = scidebate::persistence::read_result(&dir).unwrap();
    assert_eq!(result["status"], "failed");
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn score(args: &[&str]) -> (i32, Value, String) {
    let mut full = vec!["score"];
    full.extend_from_slice(args);
    let (code, out, err) = cli(&full);
    (code, serde_json::from_str(&out).unwrap_or(Value::Null), err)
}

#[test]
fn duplicates_have_zero_diversity() {
    let tmp = tempfile::tempdir().unwrap();
    let mols = write(tmp.path(), "m.smi", "CCO\nOCC\nC(O)C\n");
    let (code, v, err) = score(&["--mols", s(&mols)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(v["int_div"], 0.0);
    assert_eq!(v["num_circles"], 1);
}

#[test]
fn single_molecule_diversity_is_undefined() {
    let tmp = tempfile::tempdir().unwrap();
    let mols = write(tmp.path(), "m.smi", "CCO\n");
    let (code, _, err) = score(&["--mols", s(&mols), "--metrics", "int_div"]);
    assert_eq!(code, 2);
    assert!(err.contains("undefined"), "{err}");
    assert_eq!(score(&["--mols", s(&mols), "--metrics", "num_circles"]).1["num_circles"], 1);
}

#[test]
fn invalid_smiles_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let mols = write(tmp.path(), "m.smi", "CCO\n# comment\nC1CC\n");
    let (code, _, err) = score(&["--mols", s(&mols)]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");
}

/// Step sum of the running top-k mean, padded to the budget.
fn brute_auc(scores: &[f64], k: usize, budget: usize) -> f64 {
    (1..=budget)
        .map(|i| {
            let mut seen: Vec<f64> = scores[..i.min(scores.len())].to_vec();
            seen.sort_by(|a, b| b.total_cmp(a));
            let top = &seen[..k.min(seen.len())];
            top.iter().sum::<f64>() / top.len() as f64
        })
        .sum::<f64>()
        / budget as f64
}

#[test]
fn score_file_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let smiles: Vec<String> = (1..=14).map(|n| format!("{}O", "C".repeat(n))).collect();
    let values: Vec<f64> = (0..14).map(|i| ((i * 7) % 11) as f64 / 10.0).collect();
    let mols = write(tmp.path(), "m.smi", &(smiles.join("\n") + "\n"));
    let text: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let scores = write(tmp.path(), "s.txt", &(text.join("\n") + "\n"));
    let (code, v, err) = score(&["--mols", s(&mols), "--scores", s(&scores), "--property", "gsk3b"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(v["top1"], 1.0);
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top10 = sorted[..10].iter().sum::<f64>() / 10.0;
    assert!((v["top10_mean"].as_f64().unwrap() - top10).abs() < 1e-12);
    let auc = v["topk_auc"].as_f64().unwrap();
    assert!((auc - brute_auc(&values, 10, 1000)).abs() < 1e-12);

    // Minimized property: best is the smallest value.
    let (_, v, _) = score(&["--mols", s(&mols), "--scores", s(&scores), "--property", "sa", "--metrics", "top1"]);
    assert_eq!(v["top1"], 0.0);

    let (_, v, _) = score(&[
        "--mols",
        s(&mols),
        "--scores",
        s(&scores),
        "--property",
        "affinity:mpro",
        "--metrics",
        "top1",
    ]);
    assert_eq!(v["top1"], 0.0);
    assert_eq!(v["top1_kcal"], 0.0);
}

#[test]
fn constraint_report() {
    let tmp = tempfile::tempdir().unwrap();
    let mols = write(tmp.path(), "m.smi", "Oc1ccccc1\n");
    let (code, v, err) = score(&["--mols", s(&mols), "--metrics", "constraints", "--seed", "c1ccccc1O"]);
    assert_eq!(code, 0, "{err}");
    let checks = v["constraints"][0]["checks"].as_array().unwrap();
    let sim = checks.iter().find(|c| c["name"] == "sim").unwrap();
    assert_eq!(sim["value"], 1.0);
    assert_eq!(sim["verdict"], "pass");
    assert_eq!(score(&["--mols", s(&mols), "--metrics", "constraints"]).0, 2);
}

#[test]
fn report_renders_rounds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario().join("campaign.json");
    assert_eq!(cli(&["run", "--config", s(&cfg), "--out", s(tmp.path())]).0, 0);
    let dir = tmp.path().join("08d0bd6131f99ec8");
    let md = tmp.path().join("report.md");
    let (code, out, err) = cli(&["report", "--run", s(&dir), "--out", s(&md)]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("# Campaign 08d0bd6131f99ec8"));
    assert_eq!(out.matches("\n## Round ").count(), 3);
    assert!(out.contains("## Final ranking (top 10)"));
    assert_eq!(std::fs::read_to_string(md).unwrap(), out);

    assert_eq!(cli(&["report", "--run", s(&tmp.path().join("nope"))]).0, 2);
}

#[test]
fn usage_errors() {
    assert_eq!(cli(&[]).0, 2);
    assert_eq!(cli(&["frobnicate"]).0, 2);
    assert_eq!(cli(&["--help"]).0, 0);
}
