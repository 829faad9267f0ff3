use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use mtbias::backends::{load_backend_configs, TranslationStatus, Translator};
use mtbias::corpus::{load_sentences, Suite};

struct Seen {
    requests: AtomicUsize,
    auth: Mutex<Vec<String>>,
}

fn handle(stream: TcpStream, seen: &Seen) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut length = 0;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap() == 0 {
            return;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            match k.to_ascii_lowercase().as_str() {
                "content-length" => length = v.trim().parse().unwrap(),
                "authorization" => seen.auth.lock().unwrap().push(v.trim().to_string()),
                _ => {}
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).unwrap();
    let n = seen.requests.fetch_add(1, Ordering::SeqCst);
    let request: serde_json::Value = serde_json::from_slice(&body).unwrap();
    let (status, reply) = if n == 0 {
        ("503 Service Unavailable", "{}".to_string())
    } else if request["q"].as_str().unwrap().contains("पूछती") {
        ("200 OK", r#"{"result":{"text":"The secretary asks what she should do."}}"#.to_string())
    } else {
        ("200 OK", r#"{"result":{"text":"He will help."}}"#.to_string())
    };
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
        reply.len()
    )
    .unwrap();
}

fn serve() -> (u16, Arc<Seen>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let seen = Arc::new(Seen {
        requests: AtomicUsize::new(0),
        auth: Mutex::new(Vec::new()),
    });
    let s = Arc::clone(&seen);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let stream = stream.unwrap();
            let s = Arc::clone(&s);
            std::thread::spawn(move || handle(stream, &s));
        }
    });
    (port, seen)
}

#[test]
fn http_backend_against_local_server() {
    let (port, seen) = serve();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("b.toml");
    std::fs::write(
        &config,
        format!(
            r#"
[[backend]]
name = "local"
kind = "http"
endpoint = "http://127.0.0.1:{port}/translate"
auth_env = "MTBIAS_HTTP_TEST_KEY"
max_concurrency = 3
timeout_ms = 5000
retry = {{ max_attempts = 3, backoff_ms = 1 }}

[backend.request_template]
body = '{{"q": "{{text}}", "target": "en"}}'
response_path = "result.text"
auth_prefix = "Bearer "
"#
        ),
    )
    .unwrap();
    // only this test touches the variable
    unsafe { std::env::set_var("MTBIAS_HTTP_TEST_KEY", "secret") };

    let cfg = load_backend_configs(&config).unwrap().remove("local").unwrap();
    let translator = Translator::from_config(&cfg).unwrap();
    let sample = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/winomt_sample.jsonl");
    let sources = load_sentences(&sample, Some(Suite::Winomt)).unwrap();
    let records = translator.translate_batch(&sources).unwrap();

    assert_eq!(records.len(), sources.len());
    for (r, s) in records.iter().zip(&sources) {
        assert_eq!(r.source_id, s.id);
        assert_eq!(r.status, TranslationStatus::Ok, "{}", r.source_id);
        let want = if s.text.contains("पूछती") {
            "The secretary asks what she should do."
        } else {
            "He will help."
        };
        assert_eq!(r.target_text, want);
    }
    // one transient failure, retried once
    assert_eq!(seen.requests.load(Ordering::SeqCst), sources.len() + 1);
    assert!(seen.auth.lock().unwrap().iter().all(|a| a == "Bearer secret"));
}
