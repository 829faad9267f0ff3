//! Translation backends behind one interface.
//!
//! - `Http`: a generic JSON-over-HTTP client shaped by a request template.
//! - `FileReplay`: previously produced translations read back from disk.
//! - `Mock`: deterministic synthetic translators.

mod http;
mod mock;
mod replay;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{SourceSentence, StereotypeLists};
use crate::error::{Error, Result};

pub use http::{
    HttpBackend, HttpRequest, HttpResponse, ReqwestTransport, RequestTemplate, Transport, TransportError,
};
pub use mock::{mock_translate, MockSpec};
pub use replay::{load_replay, ReplayTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Http,
    FileReplay,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryConfig {
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    /// Status codes retried in addition to 5xx.
    #[serde(default)]
    pub transient_status: Vec<u16>,
}

fn default_attempts() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    500
}

fn default_one() -> usize {
    1
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl Default for RetryConfig {
    fn default() -> Self {
        RetryConfig {
            max_attempts: default_attempts(),
            backoff_ms: default_backoff_ms(),
            transient_status: Vec::new(),
        }
    }
}

/// Mock translator as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MockConfig {
    AlwaysMale,
    AlwaysFemale,
    EchoGold,
    Neutralizing,
    CoinFlip { seed: u64, p_male: f64 },
    StereotypeFollower { lists: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub name: String,
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    /// Environment variable holding the credential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_template: Option<RequestTemplate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translations_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock: Option<MockConfig>,
    #[serde(default = "default_one")]
    pub batch_size: usize,
    #[serde(default = "default_one")]
    pub max_concurrency: usize,
    #[serde(default)]
    pub retry: RetryConfig,
    /// Requests per second, shared by all workers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_limit: Option<f64>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

impl BackendConfig {
    pub fn mock(name: &str, mock: MockConfig) -> Self {
        BackendConfig {
            name: name.to_string(),
            kind: BackendKind::Mock,
            endpoint: None,
            auth_env: None,
            request_template: None,
            translations_file: None,
            mock: Some(mock),
            batch_size: 1,
            max_concurrency: 1,
            retry: RetryConfig::default(),
            rate_limit: None,
            timeout_ms: default_timeout_ms(),
        }
    }

    pub fn file_replay(name: &str, path: impl Into<PathBuf>) -> Self {
        BackendConfig {
            kind: BackendKind::FileReplay,
            mock: None,
            translations_file: Some(path.into()),
            ..BackendConfig::mock(name, MockConfig::AlwaysMale)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(format!("backend {:?}: {m}", self.name)));
        if self.name.trim().is_empty() {
            return Err(Error::Config("backend name is empty".into()));
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive".into());
        }
        if self.max_concurrency == 0 {
            return fail("max_concurrency must be positive".into());
        }
        if self.retry.max_attempts == 0 {
            return fail("retry.max_attempts must be positive".into());
        }
        if let Some(r) = self.rate_limit {
            if !(r.is_finite() && r > 0.0) {
                return fail(format!("rate_limit must be a positive number, got {r}"));
            }
        }
        match self.kind {
            BackendKind::Http => {
                if self.endpoint.is_none() {
                    return fail("http backend needs endpoint".into());
                }
                match &self.request_template {
                    None => return fail("http backend needs request_template".into()),
                    Some(t) => t.check().map_err(|m| Error::Config(format!("backend {:?}: {m}", self.name)))?,
                }
            }
            BackendKind::FileReplay => {
                if self.translations_file.is_none() {
                    return fail("file-replay backend needs translations_file".into());
                }
            }
            BackendKind::Mock => match &self.mock {
                None => return fail("mock backend needs a [mock] table".into()),
                Some(MockConfig::CoinFlip { p_male, .. }) if !(0.0..=1.0).contains(p_male) => {
                    return fail(format!("p_male must be in [0,1], got {p_male}"));
                }
                Some(_) => {}
            },
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.translations_file.as_mut() {
            rebase(p);
        }
        if let Some(MockConfig::StereotypeFollower { lists }) = self.mock.as_mut() {
            rebase(lists);
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackendsFile {
    #[serde(default)]
    backend: Vec<BackendConfig>,
}

/// Reads a TOML file of `[[backend]]` tables. Relative paths inside are
/// taken relative to the file's directory.
pub fn load_backend_configs(path: &Path) -> Result<BTreeMap<String, BackendConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: BackendsFile =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = BTreeMap::new();
    for mut cfg in file.backend {
        cfg.validate()?;
        cfg.resolve_paths(base);
        let name = cfg.name.clone();
        if out.insert(name.clone(), cfg).is_some() {
            return Err(Error::Config(format!("duplicate backend name {name:?}")));
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("{}: no [[backend]] entries", path.display())));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TranslationStatus {
    Ok,
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub source_id: String,
    pub target_text: String,
    pub backend: String,
    #[serde(flatten)]
    pub status: TranslationStatus,
}

impl TranslationRecord {
    pub fn ok(source_id: &str, target_text: String, backend: &str) -> Self {
        if target_text.trim().is_empty() {
            return Self::failed(source_id, "empty translation", backend);
        }
        TranslationRecord {
            source_id: source_id.to_string(),
            target_text,
            backend: backend.to_string(),
            status: TranslationStatus::Ok,
        }
    }

    pub fn failed(source_id: &str, reason: impl Into<String>, backend: &str) -> Self {
        TranslationRecord {
            source_id: source_id.to_string(),
            target_text: String::new(),
            backend: backend.to_string(),
            status: TranslationStatus::Failed { reason: reason.into() },
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == TranslationStatus::Ok
    }
}

/// A configured, pre-flighted backend.
pub enum Translator {
    Mock { name: String, spec: MockSpec },
    Replay { name: String, table: ReplayTable },
    Http(Box<HttpBackend>),
}

impl Translator {
    /// Validates the config and does all setup that can fail (credential
    /// lookup, replay file parsing, list loading) before any translation.
    pub fn from_config(config: &BackendConfig) -> Result<Self> {
        config.validate()?;
        match config.kind {
            BackendKind::Mock => {
                let spec = match config.mock.clone().expect("validated") {
                    MockConfig::AlwaysMale => MockSpec::AlwaysMale,
                    MockConfig::AlwaysFemale => MockSpec::AlwaysFemale,
                    MockConfig::EchoGold => MockSpec::EchoGold,
                    MockConfig::Neutralizing => MockSpec::Neutralizing,
                    MockConfig::CoinFlip { seed, p_male } => MockSpec::CoinFlip { seed, p_male },
                    MockConfig::StereotypeFollower { lists } => {
                        MockSpec::StereotypeFollower(StereotypeLists::load(&lists)?)
                    }
                };
                Ok(Translator::Mock {
                    name: config.name.clone(),
                    spec,
                })
            }
            BackendKind::FileReplay => {
                let path = config.translations_file.as_ref().expect("validated");
                Ok(Translator::Replay {
                    name: config.name.clone(),
                    table: load_replay(path)?,
                })
            }
            BackendKind::Http => {
                let credential = match &config.auth_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| {
                        Error::Config(format!(
                            "backend {:?}: credential variable {var} is not set",
                            config.name
                        ))
                    })?),
                    None => None,
                };
                let transport = ReqwestTransport::new(config.timeout_ms)?;
                Ok(Translator::Http(Box::new(HttpBackend::new(config, credential, Box::new(transport))?)))
            }
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Translator::Mock { name, .. } | Translator::Replay { name, .. } => name,
            Translator::Http(h) => h.name(),
        }
    }

    /// One record per source, in input order. Transport failures become
    /// `Failed` records; only mock precondition violations are errors.
    pub fn translate_batch(&self, sources: &[SourceSentence]) -> Result<Vec<TranslationRecord>> {
        match self {
            Translator::Mock { name, spec } => {
                let texts = sources
                    .iter()
                    .map(|s| mock_translate(s, spec))
                    .collect::<Result<Vec<_>>>()?;
                Ok(sources
                    .iter()
                    .zip(texts)
                    .map(|(s, t)| TranslationRecord::ok(&s.id, t, name))
                    .collect())
            }
            Translator::Replay { name, table } => Ok(sources.iter().map(|s| table.lookup(&s.id, name)).collect()),
            Translator::Http(h) => Ok(h.translate(sources)),
        }
    }
}

pub fn translate_batch(sources: &[SourceSentence], config: &BackendConfig) -> Result<Vec<TranslationRecord>> {
    if sources.is_empty() {
        return Err(Error::Invalid("no sentences to translate".into()));
    }
    Translator::from_config(config)?.translate_batch(sources)
}

/// Line-delimited JSON form of translation records.
pub fn translations_to_jsonl(records: &[TranslationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_translations(text: &str, path: &Path) -> Result<Vec<TranslationRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<TranslationRecord>(l)
                .map_err(|e| Error::schema(path, i + 1, format!("malformed translation record: {e}")))
        })
        .collect()
}

pub fn load_translations(path: &Path) -> Result<Vec<TranslationRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_translations(&text, path)
}
