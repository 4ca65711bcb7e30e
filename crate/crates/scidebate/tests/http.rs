//! HTTP clients against throwaway local servers.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use scidebate::llm::{ChatBackend, HttpBackend, HttpBackendConfig, LlmError, Phase, RequestTag, Sampling};
use scidebate::oracle::{HttpOracle, HttpOracleConfig, Oracle, OracleError, PropertySpec};
use scidebate::retry::RetryPolicy;

#[derive(Debug, Clone)]
struct Seen {
    line: String,
    auth: Option<String>,
    body: String,
}

/// Serves `replies` (status, body) in order, one per connection, and
/// records each request.
fn serve(replies: Vec<(u16, &'static str)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (status, body) in replies {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let mut len = 0;
            let mut auth = None;
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                let h = h.trim_end();
                if h.is_empty() {
                    break;
                }
                let (k, v) = h.split_once(':').unwrap();
                match k.to_ascii_lowercase().as_str() {
                    "content-length" => len = v.trim().parse().unwrap(),
                    "authorization" => auth = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Seen {
                line: line.trim_end().to_string(),
                auth,
                body: String::from_utf8(buf).unwrap(),
            });
            let mut s = stream;
            write!(
                s,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, seen)
}

fn fast_retry(max_retries: u32) -> RetryPolicy {
    RetryPolicy {
        max_retries,
        base_delay_ms: 1,
        max_delay_ms: 2,
    }
}

fn backend(url: &str, retries: u32, key: Option<&str>) -> HttpBackend {
    let cfg = HttpBackendConfig {
        endpoint: url.into(),
        timeout_secs: 5,
        retry: fast_retry(retries),
        ..HttpBackendConfig::default()
    };
    HttpBackend::with_key(&cfg, key.map(String::from))
}

fn request() -> scidebate::llm::ChatRequest {
    Sampling::default().request(RequestTag::new("a1", 1, Phase::Proposal), "persona".into(), "task".into())
}

const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"CCO"}}]}"#;

#[test]
fn chat_request_shape() {
    let (url, seen) = serve(vec![(200, OK)]);
    let out = backend(&url, 0, Some("sk-test")).complete(&request()).unwrap();
    assert_eq!(out, "CCO");
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].line, "POST /v1/chat/completions HTTP/1.1");
    assert_eq!(seen[0].auth.as_deref(), Some("Bearer sk-test"));
    let body: serde_json::Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(body["model"], "deepseek-chat");
    assert_eq!(body["temperature"], 0.7);
    assert_eq!(body["max_tokens"], 4096);
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][0]["content"], "persona");
    assert_eq!(body["messages"][1]["role"], "user");
}

#[test]
fn no_key_no_header() {
    let (url, seen) = serve(vec![(200, OK)]);
    backend(&url, 0, None).complete(&request()).unwrap();
    assert!(seen.lock().unwrap()[0].auth.is_none());
}

#[test]
fn transient_statuses_are_retried() {
    let (url, seen) = serve(vec![(429, "{}"), (503, "{}"), (200, OK)]);
    assert_eq!(backend(&url, 3, None).complete(&request()).unwrap(), "CCO");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn retries_run_out() {
    let (url, _) = serve(vec![(500, "{}"), (500, "{}")]);
    match backend(&url, 1, None).complete(&request()) {
        Err(LlmError::RetriesExhausted { attempts, last }) => {
            assert_eq!(attempts, 2);
            assert!(last.contains("500"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen) = serve(vec![(401, "denied"), (200, OK)]);
    match backend(&url, 3, None).complete(&request()) {
        Err(LlmError::Status { status: 401, body }) => assert_eq!(body, "denied"),
        other => panic!("{other:?}"),
    }
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn unreachable_backend_gives_up() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let r = backend(&format!("http://127.0.0.1:{port}"), 1, None).complete(&request());
    assert!(matches!(r, Err(LlmError::RetriesExhausted { attempts: 2, .. })), "{r:?}");
}

#[test]
fn bad_temperature_never_leaves_the_process() {
    let mut req = request();
    req.temperature = f64::NAN;
    let r = backend("http://127.0.0.1:9", 0, None).complete(&req);
    assert!(matches!(r, Err(LlmError::InvalidRequest(_))));
}

fn oracle(url: &str, max_batch: usize) -> HttpOracle {
    HttpOracle::new(&HttpOracleConfig {
        endpoint: url.into(),
        timeout_secs: 5,
        retry: fast_retry(2),
        max_batch,
    })
}

fn gsk3b() -> PropertySpec {
    "gsk3b".parse().unwrap()
}

#[test]
fn score_round_trip() {
    let (url, seen) = serve(vec![(200, r#"{"scores":[0.71,null],"errors":[null,"unparsable SMILES"]}"#)]);
    let slots = oracle(&url, 8).score_batch(&gsk3b(), &["CCO".into(), "C1C".into()]).unwrap();
    assert_eq!(slots, vec![Ok(0.71), Err("unparsable SMILES".into())]);
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].line, "POST /score HTTP/1.1");
    let body: serde_json::Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(body, serde_json::json!({"property": "gsk3b", "smiles": ["CCO", "C1C"]}));
}

#[test]
fn score_retries_then_succeeds() {
    let (url, _) = serve(vec![(503, "{}"), (200, r#"{"scores":[0.5]}"#)]);
    assert_eq!(oracle(&url, 8).score_batch(&gsk3b(), &["CCO".into()]).unwrap(), vec![Ok(0.5)]);
}

#[test]
fn score_protocol_errors() {
    let (url, _) = serve(vec![(200, r#"{"scores":[0.5]}"#), (422, "unknown property")]);
    let o = oracle(&url, 8);
    let two = ["CCO".to_string(), "CCN".to_string()];
    assert!(matches!(o.score_batch(&gsk3b(), &two), Err(OracleError::Protocol(_))));
    assert!(matches!(o.score_batch(&gsk3b(), &two), Err(OracleError::Protocol(m)) if m.contains("422")));
}

#[test]
fn oversize_batch_is_refused_locally() {
    let smiles = vec!["C".to_string(); 3];
    let r = oracle("http://127.0.0.1:9", 2).score_batch(&gsk3b(), &smiles);
    assert_eq!(r, Err(OracleError::BatchTooLarge { got: 3, max: 2 }));
}

#[test]
fn health_check() {
    let (url, seen) = serve(vec![(200, r#"{"status":"ok","properties":["qed","gsk3b"]}"#)]);
    let h = oracle(&url, 8).health().unwrap();
    assert_eq!(h.status, "ok");
    assert_eq!(h.properties, ["qed", "gsk3b"]);
    assert_eq!(seen.lock().unwrap()[0].line, "GET /health HTTP/1.1");
}

#[test]
fn oracle_down_is_unavailable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let r = oracle(&format!("http://127.0.0.1:{port}"), 8).health();
    assert!(matches!(r, Err(OracleError::Unavailable(_))));
}
