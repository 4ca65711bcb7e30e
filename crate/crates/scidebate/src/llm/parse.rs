//! Machine-reading of agent replies.
//!
//! Every template asks for fenced JSON. Parsers look at fenced blocks
//! first, then the whole reply, then the widest bracketed span.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use scidebate_core::consensus::ScoreTriple;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OutputError {
    #[error("no usable entries in reply")]
    Empty,
    #[error("reply is not the expected JSON: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub smiles: String,
    #[serde(default)]
    pub rationale: String,
}

fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("```") {
        let after = &rest[start + 3..];
        let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
        let body = &after[body_start..];
        match body.find("```") {
            Some(end) => {
                out.push(&body[..end]);
                rest = &body[end + 3..];
            }
            None => {
                out.push(body);
                break;
            }
        }
    }
    out
}

fn span(text: &str, open: char, close: char) -> Option<&str> {
    let a = text.find(open)?;
    let b = text.rfind(close)?;
    (b > a).then(|| &text[a..=b])
}

/// First candidate region that parses as JSON and satisfies `want`.
fn find_json(text: &str, want: impl Fn(&Value) -> bool) -> Option<Value> {
    let mut regions: Vec<&str> = fenced_blocks(text);
    regions.push(text);
    regions.extend(span(text, '[', ']'));
    regions.extend(span(text, '{', '}'));
    regions
        .into_iter()
        .filter_map(|r| serde_json::from_str::<Value>(r.trim()).ok())
        .find(|v| want(v))
}

fn str_field<'a>(obj: &'a serde_json::Map<String, Value>, keys: &[&str]) -> Option<&'a str> {
    keys.iter()
        .find_map(|k| obj.get(*k).and_then(Value::as_str))
        .map(str::trim)
}

/// Up to `k` proposals in reply order. SMILES validity is not checked.
pub fn parse_proposals(text: &str, k: usize) -> Result<Vec<Proposal>, OutputError> {
    let mut out = match find_json(text, Value::is_array) {
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|it| match it {
                Value::Object(o) => Some(Proposal {
                    smiles: str_field(o, &["smiles", "SMILES"])?.to_string(),
                    rationale: str_field(o, &["rationale", "reason"]).unwrap_or("").to_string(),
                }),
                Value::String(s) => Some(Proposal {
                    smiles: s.trim().to_string(),
                    rationale: String::new(),
                }),
                _ => None,
            })
            .filter(|p| !p.smiles.is_empty())
            .collect(),
        _ => line_proposals(text),
    };
    if out.is_empty() {
        return Err(OutputError::Empty);
    }
    out.truncate(k);
    Ok(out)
}

fn strip_marker(line: &str) -> &str {
    line.trim_start_matches(|c: char| {
        c.is_ascii_digit() || c.is_whitespace() || matches!(c, '.' | ')' | '-' | '*' | '#')
    })
}

fn smiles_line(line: &str) -> Option<&str> {
    let l = strip_marker(line);
    let rest = l.strip_prefix("SMILES:").or_else(|| l.strip_prefix("smiles:"))?;
    rest.split_whitespace().next().map(|t| t.trim_matches('`'))
}

fn line_proposals(text: &str) -> Vec<Proposal> {
    let mut out: Vec<Proposal> = Vec::new();
    for line in text.lines() {
        if let Some(tok) = smiles_line(line) {
            out.push(Proposal {
                smiles: tok.to_string(),
                rationale: String::new(),
            });
        } else if let Some(last) = out.last_mut() {
            let l = strip_marker(line);
            let l = l.strip_prefix("Rationale:").unwrap_or(l).trim();
            if !l.is_empty() {
                if !last.rationale.is_empty() {
                    last.rationale.push(' ');
                }
                last.rationale.push_str(l);
            }
        }
    }
    out
}

/// Renders proposals in the shape [`parse_proposals`] reads first.
pub fn format_proposals(proposals: &[Proposal]) -> String {
    format!(
        "```json\n{}\n```",
        serde_json::to_string_pretty(proposals).expect("proposals serialize")
    )
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BallotParse {
    /// Raw scores keyed by canonical SMILES; not clamped.
    pub scores: BTreeMap<String, ScoreTriple>,
    pub warnings: Vec<String>,
}

fn number(v: Option<&Value>) -> Option<f64> {
    match v? {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Reads a JSON object keyed by SMILES. Keys are canonicalized and matched
/// against `expected` (canonical); others are dropped with a warning.
pub fn parse_ballot(text: &str, expected: &[String]) -> Result<BallotParse, OutputError> {
    let obj = match find_json(text, Value::is_object) {
        Some(Value::Object(o)) => o,
        _ => return Err(OutputError::Malformed("no JSON object found".into())),
    };
    let mut out = BallotParse::default();
    for (key, val) in &obj {
        let canon = match scidebate_core::parse(key.trim()) {
            Ok(m) => m.canonical().to_string(),
            Err(e) => {
                out.warnings.push(format!("dropped unparseable key {key:?}: {e}"));
                continue;
            }
        };
        if !expected.contains(&canon) {
            out.warnings.push(format!("dropped {key:?}: not on the ballot"));
            continue;
        }
        let fields = val.as_object();
        let get = |name: &str| number(fields.and_then(|f| f.get(name)));
        let triple = match (
            get("task_relevance"),
            get("synthetic_feasibility"),
            get("novelty"),
        ) {
            (Some(a), Some(b), Some(c)) => ScoreTriple {
                task_relevance: a,
                synthetic_feasibility: b,
                novelty: c,
            },
            _ => {
                out.warnings.push(format!("dropped {key:?}: missing numeric scores"));
                continue;
            }
        };
        if out.scores.insert(canon, triple).is_some() {
            out.warnings.push(format!("{key:?} repeats an earlier entry; last one kept"));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CritiqueItem {
    pub smiles: String,
    pub critique: String,
    /// Replacement (self critique) or suggested modification (cross).
    pub edit: Option<String>,
}

/// Reads a JSON array of `{smiles, critique, replacement|suggestion}`. An
/// empty array is a valid reply.
pub fn parse_critiques(text: &str) -> Result<Vec<CritiqueItem>, OutputError> {
    let items = match find_json(text, Value::is_array) {
        Some(Value::Array(items)) => items,
        _ => return Err(OutputError::Malformed("no JSON array found".into())),
    };
    let parsed: Vec<CritiqueItem> = items
        .iter()
        .filter_map(|it| {
            let o = it.as_object()?;
            Some(CritiqueItem {
                smiles: str_field(o, &["smiles", "SMILES"])?.to_string(),
                critique: str_field(o, &["critique", "comment", "text"]).unwrap_or("").to_string(),
                edit: str_field(o, &["replacement", "suggestion"])
                    .filter(|s| !s.is_empty())
                    .map(String::from),
            })
        })
        .collect();
    if parsed.is_empty() && !items.is_empty() {
        return Err(OutputError::Empty);
    }
    Ok(parsed)
}

/// A JSON array of strings, or failing that one item per non-empty line
/// (list markers and commas stripped).
pub fn parse_string_list(text: &str, max: usize) -> Result<Vec<String>, OutputError> {
    let mut out: Vec<String> = match find_json(text, Value::is_array) {
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|v| v.as_str().map(|s| s.trim().to_string()))
            .collect(),
        _ => text
            .lines()
            .filter(|l| !l.trim_start().starts_with("```"))
            .flat_map(|l| strip_marker(l).split(','))
            .map(|s| s.trim().trim_matches('"').to_string())
            .collect(),
    };
    out.retain(|s| !s.is_empty());
    if out.is_empty() {
        return Err(OutputError::Empty);
    }
    out.truncate(max);
    Ok(out)
}

/// `[{title, abstract}]`.
pub fn parse_publications(text: &str, max: usize) -> Result<Vec<(String, String)>, OutputError> {
    let items = match find_json(text, Value::is_array) {
        Some(Value::Array(items)) => items,
        _ => return Err(OutputError::Malformed("no JSON array found".into())),
    };
    let mut out: Vec<(String, String)> = items
        .iter()
        .filter_map(|it| {
            let o = it.as_object()?;
            let title = str_field(o, &["title"])?.to_string();
            let abs = str_field(o, &["abstract"]).unwrap_or("").to_string();
            Some((title, abs))
        })
        .collect();
    if out.is_empty() {
        return Err(OutputError::Empty);
    }
    out.truncate(max);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_proposals() {
        let p = parse_proposals(r#"[{"smiles":"CCO","rationale":"r"}]"#, 5).unwrap();
        assert_eq!(p, vec![Proposal { smiles: "CCO".into(), rationale: "r".into() }]);
        let fenced = "Here you go:\n```json\n[{\"smiles\":\"C\"},{\"smiles\":\"N\"},{\"smiles\":\"O\"}]\n```\nthanks";
        assert_eq!(parse_proposals(fenced, 2).unwrap().len(), 2);
    }

    #[test]
    fn line_fallback() {
        let text = "Ideas:\n1. SMILES: CCO\nRationale: small alcohol\nworks well\n\n2. SMILES: `c1ccccc1` extra\n";
        let p = parse_proposals(text, 10).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].rationale, "small alcohol works well");
        assert_eq!(p[1].smiles, "c1ccccc1");
        assert_eq!(parse_proposals("no molecules", 3), Err(OutputError::Empty));
        assert_eq!(parse_proposals("[]", 3), Err(OutputError::Empty));
    }

    #[test]
    fn ballot_rules() {
        let expected = vec!["CCO".to_string(), "CCN".to_string()];
        let text = r#"```json
{"OCC": {"task_relevance": 1.7, "synthetic_feasibility": "0.5", "novelty": 0.1},
 "c1ccccc1": {"task_relevance": 1, "synthetic_feasibility": 1, "novelty": 1},
 "NCC": {"task_relevance": 0.2}}
```"#;
        let b = parse_ballot(text, &expected).unwrap();
        assert_eq!(b.scores.len(), 1);
        let t = b.scores["CCO"];
        assert_eq!((t.task_relevance, t.synthetic_feasibility), (1.7, 0.5));
        assert_eq!(b.warnings.len(), 2);
        assert!(parse_ballot("I like them all", &expected).is_err());
    }

    #[test]
    fn critiques() {
        let c = parse_critiques(
            r#"[{"smiles":"CCO","critique":"too small","replacement":"CCCO"},{"smiles":"CN","critique":"ok","suggestion":null}]"#,
        )
        .unwrap();
        assert_eq!(c[0].edit.as_deref(), Some("CCCO"));
        assert_eq!(c[1].edit, None);
        assert_eq!(parse_critiques("[]").unwrap(), vec![]);
        assert!(parse_critiques("fine").is_err());
    }

    #[test]
    fn string_lists() {
        assert_eq!(parse_string_list("[\"a\", \"b\", \"c\"]", 2).unwrap(), ["a", "b"]);
        assert_eq!(parse_string_list("- kinase, hinge\n- selectivity", 10).unwrap(), ["kinase", "hinge", "selectivity"]);
        let pubs = parse_publications(r#"[{"title":"T","abstract":"A"}]"#, 5).unwrap();
        assert_eq!(pubs, vec![("T".to_string(), "A".to_string())]);
    }
}
