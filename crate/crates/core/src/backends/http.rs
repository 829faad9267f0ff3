//! Generic JSON-over-HTTP translation client.
//!
//! The request body is a JSON document in which the string `"{text}"` is
//! replaced by one source sentence, or `"{texts}"` by an array of up to
//! `batch_size` sentences. The translation is read back from the response
//! with a dotted field path (`data.translations.0.translatedText`).

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BackendConfig, RetryConfig, TranslationRecord};
use crate::corpus::SourceSentence;
use crate::error::{Error, Result};

const TEXT_SLOT: &str = "{text}";
const TEXTS_SLOT: &str = "{texts}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestTemplate {
    /// JSON body containing a `"{text}"` or `"{texts}"` string value.
    pub body: String,
    /// Path to the translation (single mode) or to the array of results (batch mode).
    pub response_path: String,
    /// Path applied to each element of the result array.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_path: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub headers: BTreeMap<String, String>,
    /// Header carrying the credential; `Authorization` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_header: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_prefix: Option<String>,
    /// Send the credential as this query parameter instead of a header.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_query: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Single,
    Batch,
}

fn count_slots(v: &Value, slot: &str) -> usize {
    match v {
        Value::String(s) => usize::from(s == slot),
        Value::Array(xs) => xs.iter().map(|x| count_slots(x, slot)).sum(),
        Value::Object(m) => m.values().map(|x| count_slots(x, slot)).sum(),
        _ => 0,
    }
}

fn fill(v: &Value, texts: &[&str], mode: Mode) -> Value {
    match v {
        Value::String(s) if mode == Mode::Single && s == TEXT_SLOT => Value::String(texts[0].to_string()),
        Value::String(s) if mode == Mode::Batch && s == TEXTS_SLOT => {
            Value::Array(texts.iter().map(|t| Value::String(t.to_string())).collect())
        }
        Value::Array(xs) => Value::Array(xs.iter().map(|x| fill(x, texts, mode)).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, x)| (k.clone(), fill(x, texts, mode))).collect()),
        other => other.clone(),
    }
}

/// Follows a dotted path; numeric segments index arrays. Empty path is the root.
fn select<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').filter(|s| !s.is_empty()).try_fold(v, |cur, seg| match cur {
        Value::Array(xs) => seg.parse::<usize>().ok().and_then(|i| xs.get(i)),
        Value::Object(m) => m.get(seg),
        _ => None,
    })
}

impl RequestTemplate {
    fn body_value(&self) -> std::result::Result<Value, String> {
        serde_json::from_str(&self.body).map_err(|e| format!("request_template.body is not valid JSON: {e}"))
    }

    fn mode(&self) -> std::result::Result<Mode, String> {
        let body = self.body_value()?;
        match (count_slots(&body, TEXT_SLOT), count_slots(&body, TEXTS_SLOT)) {
            (0, 0) => Err("request_template.body has no \"{text}\" or \"{texts}\" value".into()),
            (_, 0) => Ok(Mode::Single),
            (0, _) => Ok(Mode::Batch),
            _ => Err("request_template.body mixes \"{text}\" and \"{texts}\"".into()),
        }
    }

    pub(crate) fn check(&self) -> std::result::Result<(), String> {
        self.mode().map(|_| ())
    }

    fn extract(&self, response: &str, expected: usize, mode: Mode) -> std::result::Result<Vec<String>, String> {
        let doc: Value = serde_json::from_str(response).map_err(|e| format!("response is not JSON: {e}"))?;
        let at = select(&doc, &self.response_path)
            .ok_or_else(|| format!("response has no value at {:?}", self.response_path))?;
        let as_text = |v: &Value| -> std::result::Result<String, String> {
            let v = match &self.item_path {
                Some(p) => select(v, p).ok_or_else(|| format!("result item has no value at {p:?}"))?,
                None => v,
            };
            v.as_str().map(str::to_string).ok_or_else(|| "translation is not a string".to_string())
        };
        match mode {
            Mode::Single => Ok(vec![as_text(at)?]),
            Mode::Batch => {
                let items = at.as_array().ok_or("batch response path does not hold an array")?;
                if items.len() != expected {
                    return Err(format!("sent {expected} texts, received {} translations", items.len()));
                }
                items.iter().map(as_text).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    Timeout,
    Connect(String),
    Other(String),
}

impl TransportError {
    fn is_transient(&self) -> bool {
        matches!(self, TransportError::Timeout | TransportError::Connect(_))
    }
}

impl std::fmt::Display for TransportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransportError::Timeout => f.write_str("request timed out"),
            TransportError::Connect(m) => write!(f, "connection error: {m}"),
            TransportError::Other(m) => write!(f, "request error: {m}"),
        }
    }
}

pub trait Transport: Send + Sync {
    fn post(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(timeout_ms: u64) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(timeout_ms))
            .build()
            .map_err(|e| Error::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(ReqwestTransport { client })
    }
}

impl Transport for ReqwestTransport {
    fn post(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
        let mut builder = self
            .client
            .post(&request.url)
            .header("Content-Type", "application/json")
            .body(request.body.clone());
        for (k, v) in &request.headers {
            builder = builder.header(k, v);
        }
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                TransportError::Timeout
            } else if e.is_connect() {
                TransportError::Connect(e.to_string())
            } else {
                TransportError::Other(e.to_string())
            }
        };
        let resp = builder.send().map_err(classify)?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(classify)?;
        Ok(HttpResponse { status, body })
    }
}

/// Spaces request starts at least `1 / rate` seconds apart across all workers.
struct RateLimiter {
    interval: Option<Duration>,
    next: Mutex<Instant>,
}

impl RateLimiter {
    fn new(rate: Option<f64>) -> Self {
        RateLimiter {
            interval: rate.map(|r| Duration::from_secs_f64(1.0 / r)),
            next: Mutex::new(Instant::now()),
        }
    }

    fn acquire(&self) {
        let Some(interval) = self.interval else { return };
        let wait = {
            let mut next = self.next.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let slot = (*next).max(now);
            *next = slot + interval;
            slot - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

pub struct HttpBackend {
    name: String,
    endpoint: String,
    template: RequestTemplate,
    mode: Mode,
    body: Value,
    credential: Option<String>,
    batch_size: usize,
    max_concurrency: usize,
    retry: RetryConfig,
    limiter: RateLimiter,
    transport: Box<dyn Transport>,
    requests: AtomicUsize,
}

enum Attempt {
    Done(Vec<String>),
    Permanent(String),
    Transient(String),
}

impl HttpBackend {
    pub fn new(config: &BackendConfig, credential: Option<String>, transport: Box<dyn Transport>) -> Result<Self> {
        config.validate()?;
        let template = config.request_template.clone().expect("validated");
        let mode = template.mode().map_err(Error::Config)?;
        let body = template.body_value().map_err(Error::Config)?;
        Ok(HttpBackend {
            name: config.name.clone(),
            endpoint: config.endpoint.clone().expect("validated"),
            template,
            mode,
            body,
            credential,
            batch_size: config.batch_size,
            max_concurrency: config.max_concurrency,
            retry: config.retry.clone(),
            limiter: RateLimiter::new(config.rate_limit),
            transport,
            requests: AtomicUsize::new(0),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Requests issued so far, retries included.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    fn build_request(&self, texts: &[&str]) -> HttpRequest {
        let mut url = self.endpoint.clone();
        let mut headers: Vec<(String, String)> =
            self.template.headers.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        if let Some(cred) = &self.credential {
            match &self.template.auth_query {
                Some(param) => {
                    let sep = if url.contains('?') { '&' } else { '?' };
                    url = format!("{url}{sep}{param}={cred}");
                }
                None => headers.push((
                    self.template.auth_header.clone().unwrap_or_else(|| "Authorization".into()),
                    format!("{}{cred}", self.template.auth_prefix.as_deref().unwrap_or("")),
                )),
            }
        }
        HttpRequest {
            url,
            headers,
            body: fill(&self.body, texts, self.mode).to_string(),
        }
    }

    fn attempt(&self, request: &HttpRequest, expected: usize) -> Attempt {
        self.limiter.acquire();
        self.requests.fetch_add(1, Ordering::Relaxed);
        match self.transport.post(request) {
            Ok(resp) if (200..300).contains(&resp.status) => match self.template.extract(&resp.body, expected, self.mode) {
                Ok(texts) => Attempt::Done(texts),
                Err(m) => Attempt::Permanent(m),
            },
            Ok(resp) => {
                let snippet: String = resp.body.chars().take(200).collect();
                let msg = format!("HTTP {}: {snippet}", resp.status);
                if resp.status >= 500 || self.retry.transient_status.contains(&resp.status) {
                    Attempt::Transient(msg)
                } else {
                    Attempt::Permanent(msg)
                }
            }
            Err(e) if e.is_transient() => Attempt::Transient(e.to_string()),
            Err(e) => Attempt::Permanent(e.to_string()),
        }
    }

    fn send_with_retry(&self, texts: &[&str]) -> std::result::Result<Vec<String>, String> {
        let request = self.build_request(texts);
        let attempts = self.retry.max_attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            match self.attempt(&request, texts.len()) {
                Attempt::Done(out) => return Ok(out),
                Attempt::Permanent(m) => return Err(m),
                Attempt::Transient(m) => last = m,
            }
            if attempt < attempts {
                let factor = 1u64 << (attempt - 1).min(20);
                std::thread::sleep(Duration::from_millis(self.retry.backoff_ms.saturating_mul(factor)));
            }
        }
        Err(format!("gave up after {attempts} attempts: {last}"))
    }

    fn translate_unit(&self, unit: &[SourceSentence]) -> Vec<TranslationRecord> {
        let texts: Vec<&str> = unit.iter().map(|s| s.text.as_str()).collect();
        match self.send_with_retry(&texts) {
            Ok(out) => unit
                .iter()
                .zip(out)
                .map(|(s, t)| TranslationRecord::ok(&s.id, t, &self.name))
                .collect(),
            Err(reason) => unit
                .iter()
                .map(|s| TranslationRecord::failed(&s.id, reason.clone(), &self.name))
                .collect(),
        }
    }

    /// Translates with up to `max_concurrency` workers; output is in input order.
    pub fn translate(&self, sources: &[SourceSentence]) -> Vec<TranslationRecord> {
        let unit_size = match self.mode {
            Mode::Single => 1,
            Mode::Batch => self.batch_size,
        };
        let units: Vec<&[SourceSentence]> = sources.chunks(unit_size).collect();
        let slots: Vec<Mutex<Option<Vec<TranslationRecord>>>> = units.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.max_concurrency.min(units.len()).max(1);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(unit) = units.get(i) else { break };
                    let out = self.translate_unit(unit);
                    *slots[i].lock().expect("slot poisoned") = Some(out);
                });
            }
        });
        slots
            .into_iter()
            .flat_map(|s| s.into_inner().expect("slot poisoned").expect("every unit translated"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{BackendKind, MockConfig, TranslationStatus};
    use crate::corpus::{GenderLabel, Suite};
    use std::sync::Arc;

    fn source(i: usize) -> SourceSentence {
        SourceSentence {
            id: format!("s{i}"),
            text: format!("वाक्य {i}"),
            suite: Suite::Otsc,
            set_id: "MM".into(),
            gold_gender: Some(GenderLabel::Male),
            speaker_gender: Some(GenderLabel::Male),
            occupation: Some("डॉक्टर".into()),
            stereotype: None,
            referenced_entity: None,
        }
    }

    fn config(body: &str, path: &str, item: Option<&str>) -> BackendConfig {
        BackendConfig {
            kind: BackendKind::Http,
            endpoint: Some("http://mt.test/translate".into()),
            mock: None,
            request_template: Some(RequestTemplate {
                body: body.into(),
                response_path: path.into(),
                item_path: item.map(str::to_string),
                headers: BTreeMap::from([("X-Client".into(), "mtbias".into())]),
                auth_header: None,
                auth_prefix: Some("Bearer ".into()),
                auth_query: None,
            }),
            retry: RetryConfig {
                max_attempts: 3,
                backoff_ms: 1,
                transient_status: vec![429],
            },
            ..BackendConfig::mock("svc", MockConfig::AlwaysMale)
        }
    }

    /// Scripted transport: `respond` decides per call number.
    struct Scripted<F> {
        calls: Arc<Mutex<Vec<HttpRequest>>>,
        respond: F,
    }

    impl<F> Transport for Scripted<F>
    where
        F: Fn(usize, &HttpRequest) -> std::result::Result<HttpResponse, TransportError> + Send + Sync,
    {
        fn post(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
            let n = {
                let mut calls = self.calls.lock().unwrap();
                calls.push(request.clone());
                calls.len()
            };
            (self.respond)(n, request)
        }
    }

    fn ok(body: Value) -> std::result::Result<HttpResponse, TransportError> {
        Ok(HttpResponse {
            status: 200,
            body: body.to_string(),
        })
    }

    fn echo_single(_: usize, req: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
        let body: Value = serde_json::from_str(&req.body).unwrap();
        ok(serde_json::json!({"result": {"text": format!("EN {}", body["q"].as_str().unwrap())}}))
    }

    fn backend<F>(cfg: &BackendConfig, respond: F) -> (HttpBackend, Arc<Mutex<Vec<HttpRequest>>>)
    where
        F: Fn(usize, &HttpRequest) -> std::result::Result<HttpResponse, TransportError> + Send + Sync + 'static,
    {
        let calls = Arc::new(Mutex::new(Vec::new()));
        let t = Scripted {
            calls: calls.clone(),
            respond,
        };
        (HttpBackend::new(cfg, Some("KEY".into()), Box::new(t)).unwrap(), calls)
    }

    #[test]
    fn single_mode_preserves_order_under_concurrency() {
        let mut cfg = config(r#"{"q": "{text}", "target": "en"}"#, "result.text", None);
        cfg.max_concurrency = 4;
        let (b, calls) = backend(&cfg, echo_single);
        let sources: Vec<_> = (0..25).map(source).collect();
        let out = b.translate(&sources);
        assert_eq!(out.len(), 25);
        for (s, r) in sources.iter().zip(&out) {
            assert_eq!(r.source_id, s.id);
            assert_eq!(r.target_text, format!("EN {}", s.text));
        }
        let calls = calls.lock().unwrap();
        assert_eq!(calls.len(), 25);
        assert!(calls[0].headers.contains(&("Authorization".into(), "Bearer KEY".into())));
        assert!(calls[0].headers.contains(&("X-Client".into(), "mtbias".into())));
    }

    #[test]
    fn batch_mode_groups_requests() {
        let mut cfg = config(r#"{"q": "{texts}"}"#, "data.translations", Some("translatedText"));
        cfg.batch_size = 4;
        cfg.max_concurrency = 2;
        let (b, calls) = backend(&cfg, |_, req| {
            let body: Value = serde_json::from_str(&req.body).unwrap();
            let items: Vec<Value> = body["q"]
                .as_array()
                .unwrap()
                .iter()
                .map(|t| serde_json::json!({"translatedText": format!("EN {}", t.as_str().unwrap())}))
                .collect();
            ok(serde_json::json!({"data": {"translations": items}}))
        });
        let sources: Vec<_> = (0..10).map(source).collect();
        let out = b.translate(&sources);
        assert!(out.iter().all(|r| r.is_ok()));
        assert_eq!(out[9].target_text, "EN वाक्य 9");
        assert_eq!(calls.lock().unwrap().len(), 3);
    }

    #[test]
    fn transient_errors_are_retried() {
        let cfg = config(r#"{"q": "{text}"}"#, "result.text", None);
        let (b, _) = backend(&cfg, |n, req| match n {
            1 => Ok(HttpResponse { status: 503, body: "busy".into() }),
            2 => Err(TransportError::Timeout),
            _ => echo_single(n, req),
        });
        let out = b.translate(&[source(0)]);
        assert!(out[0].is_ok());
        assert_eq!(b.request_count(), 3);
    }

    #[test]
    fn client_errors_are_permanent() {
        let cfg = config(r#"{"q": "{text}"}"#, "result.text", None);
        let (b, _) = backend(&cfg, |_, _| Ok(HttpResponse { status: 403, body: "forbidden".into() }));
        let out = b.translate(&[source(0), source(1)]);
        assert_eq!(b.request_count(), 2);
        assert!(matches!(&out[0].status, TranslationStatus::Failed { reason } if reason.contains("403")));
    }

    #[test]
    fn configured_status_is_transient() {
        let cfg = config(r#"{"q": "{text}"}"#, "result.text", None);
        let (b, _) = backend(&cfg, |n, req| {
            if n == 1 {
                Ok(HttpResponse { status: 429, body: String::new() })
            } else {
                echo_single(n, req)
            }
        });
        assert!(b.translate(&[source(0)])[0].is_ok());
        assert_eq!(b.request_count(), 2);
    }

    #[test]
    fn retries_are_bounded() {
        let cfg = config(r#"{"q": "{text}"}"#, "result.text", None);
        let (b, _) = backend(&cfg, |_, _| Err(TransportError::Connect("refused".into())));
        let sources: Vec<_> = (0..5).map(source).collect();
        let out = b.translate(&sources);
        assert_eq!(out.len(), 5);
        assert!(out.iter().all(|r| !r.is_ok()));
        assert_eq!(b.request_count(), 5 * 3);
        assert!(matches!(&out[0].status, TranslationStatus::Failed { reason } if reason.contains("gave up after 3")));
    }

    #[test]
    fn malformed_response_fails_item() {
        let cfg = config(r#"{"q": "{text}"}"#, "result.text", None);
        let (b, _) = backend(&cfg, |_, _| ok(serde_json::json!({"other": 1})));
        let out = b.translate(&[source(0)]);
        assert!(matches!(&out[0].status, TranslationStatus::Failed { reason } if reason.contains("result.text")));
        assert_eq!(b.request_count(), 1);
    }

    #[test]
    fn batch_length_mismatch_fails_batch() {
        let mut cfg = config(r#"{"q": "{texts}"}"#, "out", None);
        cfg.batch_size = 3;
        let (b, _) = backend(&cfg, |_, _| ok(serde_json::json!({"out": ["only one"]})));
        let out = b.translate(&(0..3).map(source).collect::<Vec<_>>());
        assert!(out.iter().all(|r| !r.is_ok()));
    }

    #[test]
    fn auth_query_parameter() {
        let mut cfg = config(r#"{"q": "{text}"}"#, "result.text", None);
        cfg.request_template.as_mut().unwrap().auth_query = Some("key".into());
        let (b, calls) = backend(&cfg, echo_single);
        b.translate(&[source(0)]);
        assert_eq!(calls.lock().unwrap()[0].url, "http://mt.test/translate?key=KEY");
    }

    #[test]
    fn rate_limit_spaces_requests() {
        let mut cfg = config(r#"{"q": "{text}"}"#, "result.text", None);
        cfg.rate_limit = Some(50.0);
        cfg.max_concurrency = 3;
        let (b, _) = backend(&cfg, echo_single);
        let start = Instant::now();
        b.translate(&(0..6).map(source).collect::<Vec<_>>());
        // six starts at 20 ms spacing: the last begins at least 100 ms in
        assert!(start.elapsed() >= Duration::from_millis(95), "{:?}", start.elapsed());
    }

    #[test]
    fn body_template_checks() {
        let bad = |body: &str| config(body, "x", None).validate().is_err();
        assert!(bad("not json"));
        assert!(bad(r#"{"q": "text"}"#));
        assert!(bad(r#"{"a": "{text}", "b": "{texts}"}"#));
        assert!(!bad(r#"{"q": ["{text}"]}"#));
    }

    #[test]
    fn select_paths() {
        let v = serde_json::json!({"a": [{"b": "x"}, {"b": "y"}]});
        assert_eq!(select(&v, "a.1.b"), Some(&Value::String("y".into())));
        assert_eq!(select(&v, "a.2.b"), None);
        assert_eq!(select(&v, ""), Some(&v));
    }
}
