//! Pipeline commands: generate, translate, evaluate, report.
//!
//! Stages talk through line-delimited files. Each output file gets a
//! sidecar `<file>.manifest.json` recording what produced it; evaluation
//! checks those digests before trusting its inputs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backends::{
    load_backend_configs, parse_translations, translations_to_jsonl, BackendConfig, TranslationRecord, Translator,
};
use crate::classify::{classify_batch, PronounSets, SourceIndex};
use crate::corpus::{self, load_occupations, load_sentences, Quadrant, SourceSentence, StereotypeLists, Suite};
use crate::error::{Error, Result};
use crate::metrics::{compute_otsc, compute_winomt, tgbi_report, MetricOptions};
use crate::report::{EvaluationCounts, EvaluationReport, EvaluationSettings, FileDigest, ManifestRef, SuiteResult};
use crate::templates::{expand_otsc, OtscTemplate};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCounts {
    pub generated: usize,
    pub translated: usize,
    pub failed: usize,
    pub classified: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    /// Input role -> digest.
    pub inputs: BTreeMap<String, FileDigest>,
    pub output: FileDigest,
    pub counts: ManifestCounts,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

pub fn partial_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    output.with_file_name(name)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        file: file_name(path),
        sha256: sha256_hex(&bytes),
    })
}

fn digest_bytes(path: &Path, bytes: &[u8]) -> FileDigest {
    FileDigest {
        file: file_name(path),
        sha256: sha256_hex(bytes),
    }
}

/// Content-derived run id: identical inputs and settings give the same id.
fn run_id(command: &str, parts: &[&str]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(TOOL_VERSION.as_bytes());
    for p in parts {
        h.update([0u8]);
        h.update(p.as_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Writes through a temp file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn write_manifest(output: &Path, manifest: &RunManifest) -> Result<()> {
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    write_atomic(&manifest_path(output), json.as_bytes())
}

pub fn load_manifest(output: &Path) -> Result<Option<RunManifest>> {
    let path = manifest_path(output);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(Some(serde_json::from_str(&text)?))
}

#[derive(Debug, Clone)]
pub struct GenerateOutcome {
    pub records: usize,
    pub per_quadrant: BTreeMap<Quadrant, usize>,
    pub manifest: RunManifest,
}

/// Expands the OTSC template over an occupation list into a sentence file.
/// `template` defaults to the bundled OTSC-Hindi template.
pub fn cmd_generate(template: Option<&Path>, occupations: &Path, output: &Path) -> Result<GenerateOutcome> {
    let started_at = now();
    let (tpl, tpl_digest) = match template {
        Some(p) => (OtscTemplate::load(p)?, Some(digest_file(p)?)),
        None => (OtscTemplate::default(), None),
    };
    let occ = load_occupations(occupations)?.into_value();
    let records = expand_otsc(&occ, &tpl)?;
    let body = corpus::to_jsonl(&records);
    write_atomic(output, body.as_bytes())?;

    let mut per_quadrant = BTreeMap::new();
    for r in &records {
        *per_quadrant.entry(r.quadrant().expect("OTSC record")).or_insert(0) += 1;
    }
    let mut inputs = BTreeMap::from([("occupations".to_string(), digest_file(occupations)?)]);
    if let Some(d) = tpl_digest {
        inputs.insert("template".into(), d);
    }
    let out_digest = digest_bytes(output, body.as_bytes());
    let id_parts: Vec<&str> = inputs.values().map(|d| d.sha256.as_str()).collect();
    let manifest = RunManifest {
        run_id: run_id("generate", &id_parts),
        command: "generate".into(),
        tool_version: TOOL_VERSION.into(),
        started_at,
        finished_at: now(),
        suite: Some(Suite::Otsc),
        backend: None,
        config_hash: None,
        inputs,
        output: out_digest,
        counts: ManifestCounts {
            generated: records.len(),
            ..Default::default()
        },
    };
    write_manifest(output, &manifest)?;
    Ok(GenerateOutcome {
        records: records.len(),
        per_quadrant,
        manifest,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Partial,
}

#[derive(Debug, Clone)]
pub struct TranslateOutcome {
    pub total: usize,
    /// Translated in this invocation.
    pub translated_now: usize,
    /// Taken from an earlier, interrupted or completed, run.
    pub reused: usize,
    pub failed: usize,
    pub status: RunStatus,
    pub manifest: RunManifest,
}

/// Picks a backend by name, or the only one when the file defines one.
pub fn select_backend(config: &Path, name: Option<&str>) -> Result<BackendConfig> {
    let mut all = load_backend_configs(config)?;
    match name {
        Some(n) => all.remove(n).ok_or_else(|| {
            Error::Config(format!(
                "no backend named {n:?} in {} (have: {})",
                config.display(),
                all.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        }),
        None if all.len() == 1 => Ok(all.into_values().next().expect("one entry")),
        None => Err(Error::Config(format!(
            "{} defines several backends; choose one with --backend",
            config.display()
        ))),
    }
}

/// Ok records from earlier runs of the same backend, keyed by id.
fn prior_translations(output: &Path, backend: &str, wanted: &HashSet<&str>) -> Result<HashMap<String, TranslationRecord>> {
    let mut done = HashMap::new();
    for path in [output.to_path_buf(), partial_path(output)] {
        if !path.exists() {
            continue;
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        // an interrupted append can leave a torn last line
        let complete = if text.ends_with('\n') {
            text.as_str()
        } else {
            text.rfind('\n').map_or("", |i| &text[..=i])
        };
        for r in parse_translations(complete, &path)? {
            if r.is_ok() && r.backend == backend && wanted.contains(r.source_id.as_str()) {
                done.insert(r.source_id.clone(), r);
            }
        }
    }
    Ok(done)
}

/// Translates a sentence file. Progress is appended to `<output>.partial`
/// after every chunk; a rerun picks up every id already translated Ok.
pub fn cmd_translate(
    sentences: &Path,
    config: &Path,
    backend: Option<&str>,
    output: &Path,
) -> Result<TranslateOutcome> {
    let started_at = now();
    let sources = load_sentences(sentences, None)?;
    if sources.is_empty() {
        return Err(Error::EmptyFile { path: sentences.into() });
    }
    let cfg = select_backend(config, backend)?;
    let translator = Translator::from_config(&cfg)?;
    let name = translator.name().to_string();

    let wanted: HashSet<&str> = sources.iter().map(|s| s.id.as_str()).collect();
    let mut done = prior_translations(output, &name, &wanted)?;
    let reused = done.len();
    let pending: Vec<SourceSentence> = sources.iter().filter(|s| !done.contains_key(&s.id)).cloned().collect();

    let partial = partial_path(output);
    if !pending.is_empty() {
        let mut progress = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&partial)
            .map_err(|e| Error::io(&partial, e))?;
        let chunk = (cfg.batch_size * cfg.max_concurrency * 4).max(256);
        for part in pending.chunks(chunk) {
            let records = translator.translate_batch(part)?;
            progress
                .write_all(translations_to_jsonl(&records).as_bytes())
                .and_then(|_| progress.flush())
                .map_err(|e| Error::io(&partial, e))?;
            for r in records {
                done.insert(r.source_id.clone(), r);
            }
        }
    }

    let ordered: Vec<TranslationRecord> = sources
        .iter()
        .map(|s| done.remove(&s.id).expect("every source translated"))
        .collect();
    let failed = ordered.iter().filter(|r| !r.is_ok()).count();
    let body = translations_to_jsonl(&ordered);
    write_atomic(output, body.as_bytes())?;
    if partial.exists() {
        std::fs::remove_file(&partial).map_err(|e| Error::io(&partial, e))?;
    }

    let sentences_digest = digest_file(sentences)?;
    let config_hash = cfg.config_hash();
    let manifest = RunManifest {
        run_id: run_id("translate", &[&sentences_digest.sha256, &config_hash]),
        command: "translate".into(),
        tool_version: TOOL_VERSION.into(),
        started_at,
        finished_at: now(),
        suite: suite_of(&sources),
        backend: Some(name),
        config_hash: Some(config_hash),
        inputs: BTreeMap::from([("sentences".to_string(), sentences_digest)]),
        output: digest_bytes(output, body.as_bytes()),
        counts: ManifestCounts {
            generated: sources.len(),
            translated: ordered.len() - failed,
            failed,
            classified: 0,
        },
    };
    write_manifest(output, &manifest)?;
    Ok(TranslateOutcome {
        total: ordered.len(),
        translated_now: pending.len(),
        reused,
        failed,
        status: if failed == 0 { RunStatus::Ok } else { RunStatus::Partial },
        manifest,
    })
}

fn suite_of(sources: &[SourceSentence]) -> Option<Suite> {
    let first = sources.first()?.suite;
    sources.iter().all(|s| s.suite == first).then_some(first)
}

#[derive(Debug, Clone, Default)]
pub struct EvaluateOptions {
    /// Exactly he/him/his and she/her, and Ambiguous kept out of N.
    pub strict: bool,
    pub neutral_as_positive: bool,
    /// Recompute WinoMT pro/anti tags from these lists.
    pub stereotype_lists: Option<PathBuf>,
    pub pronoun_sets: Option<PathBuf>,
    /// Evaluate even when a manifest's recorded digest does not match.
    pub allow_digest_mismatch: bool,
}

fn check_digest(path: &Path, actual: &FileDigest, expected: &str, allow: bool) -> Result<()> {
    if actual.sha256 == expected {
        return Ok(());
    }
    let err = Error::DigestMismatch {
        path: path.into(),
        expected: expected.into(),
        actual: actual.sha256.clone(),
    };
    if allow {
        log::warn!("{err} (continuing)");
        Ok(())
    } else {
        Err(err)
    }
}

/// Verifies sidecar manifests, when present, against the files handed to evaluation.
fn verify_inputs(
    sentences: &Path,
    sentences_digest: &FileDigest,
    translations: &Path,
    translations_digest: &FileDigest,
    allow: bool,
) -> Result<()> {
    match load_manifest(sentences)? {
        Some(m) => check_digest(sentences, sentences_digest, &m.output.sha256, allow)?,
        None => log::info!("{} has no manifest; digest not checked", sentences.display()),
    }
    match load_manifest(translations)? {
        Some(m) => {
            check_digest(translations, translations_digest, &m.output.sha256, allow)?;
            if let Some(src) = m.inputs.get("sentences") {
                check_digest(sentences, sentences_digest, &src.sha256, allow)?;
            }
        }
        None => log::info!("{} has no manifest; digest not checked", translations.display()),
    }
    Ok(())
}

/// Classifies translations and computes the suite's report; writes it to `output`.
pub fn cmd_evaluate(
    sentences: &Path,
    translations: &Path,
    suite: Suite,
    options: &EvaluateOptions,
    output: &Path,
) -> Result<EvaluationReport> {
    let started_at = now();
    let sentences_bytes = std::fs::read(sentences).map_err(|e| Error::io(sentences, e))?;
    let translations_bytes = std::fs::read(translations).map_err(|e| Error::io(translations, e))?;
    let sentences_digest = digest_bytes(sentences, &sentences_bytes);
    let translations_digest = digest_bytes(translations, &translations_bytes);
    verify_inputs(
        sentences,
        &sentences_digest,
        translations,
        &translations_digest,
        options.allow_digest_mismatch,
    )?;

    let text = String::from_utf8(sentences_bytes)
        .map_err(|e| Error::schema(sentences, 0, format!("not UTF-8: {e}")))?;
    let mut sources = corpus::parse_sentences(&text, sentences, Some(suite))?;
    if sources.is_empty() {
        return Err(Error::EmptyFile { path: sentences.into() });
    }
    let tr_text = String::from_utf8(translations_bytes)
        .map_err(|e| Error::schema(translations, 0, format!("not UTF-8: {e}")))?;
    let records = parse_translations(&tr_text, translations)?;

    let mut seen = HashSet::new();
    for r in &records {
        if !seen.insert(r.source_id.as_str()) {
            return Err(Error::Invalid(format!("translation for {:?} appears twice", r.source_id)));
        }
    }
    if let Some(missing) = sources.iter().find(|s| !seen.contains(s.id.as_str())) {
        return Err(Error::Invalid(format!(
            "id mismatch: sentence {:?} has no translation record",
            missing.id
        )));
    }

    let lists_digest = match &options.stereotype_lists {
        Some(p) if suite == Suite::Winomt => {
            let lists = StereotypeLists::load(p)?;
            let changed = corpus::retag_stereotypes(&mut sources, &lists);
            if !changed.is_empty() {
                log::info!("{} stereotype tags recomputed from {}", changed.len(), p.display());
            }
            Some(digest_file(p)?)
        }
        Some(p) => {
            log::warn!("stereotype lists {} ignored for suite {suite}", p.display());
            None
        }
        None => None,
    };
    let (pronouns, pronoun_digest) = match &options.pronoun_sets {
        Some(p) => (PronounSets::load(p)?, Some(digest_file(p)?)),
        None if options.strict => (PronounSets::strict(), None),
        None => (PronounSets::default(), None),
    };
    let metric_options = MetricOptions {
        neutral_as_positive: options.neutral_as_positive,
        strict: options.strict,
    };

    let index = SourceIndex::new(&sources);
    let batch = classify_batch(&records, &index, &pronouns)?;
    let failed = batch.excluded.len();
    let result = match suite {
        Suite::Neutral => {
            let mut sets: BTreeMap<String, Vec<_>> = BTreeMap::new();
            for r in &batch.records {
                sets.entry(r.source.set_id.clone()).or_default().push(r.predicted);
            }
            let all_sets: HashSet<&str> = sources.iter().map(|s| s.set_id.as_str()).collect();
            for s in all_sets {
                if !sets.contains_key(s) {
                    log::warn!("set {s} has no successful translations and is left out of TGBI");
                }
            }
            SuiteResult::Neutral(tgbi_report(&sets)?)
        }
        Suite::Otsc => {
            let mut r = compute_otsc(&batch.records)?;
            r.excluded_failed = failed;
            SuiteResult::Otsc(r)
        }
        Suite::Winomt => {
            let mut r = compute_winomt(&batch.records, metric_options)?;
            r.excluded_failed = failed;
            SuiteResult::Winomt(Box::new(r))
        }
    };

    let backend = records
        .first()
        .map(|r| r.backend.clone())
        .unwrap_or_else(|| "unknown".into());
    let settings = EvaluationSettings {
        metrics: metric_options,
        strict_pronouns: options.strict,
        stereotype_lists: lists_digest,
        pronoun_sets: pronoun_digest,
    };
    let settings_json = serde_json::to_string(&settings)?;
    let id = run_id(
        "evaluate",
        &[suite.as_str(), &sentences_digest.sha256, &translations_digest.sha256, &settings_json],
    );
    let report = EvaluationReport {
        backend: backend.clone(),
        manifest: ManifestRef {
            run_id: id.clone(),
            file: file_name(&manifest_path(output)),
        },
        sentences: sentences_digest.clone(),
        translations: translations_digest.clone(),
        settings,
        counts: EvaluationCounts {
            sentences: sources.len(),
            translations: records.len(),
            classified: batch.records.len(),
            failed,
        },
        result,
    };
    let body = report.to_json();
    write_atomic(output, body.as_bytes())?;
    let manifest = RunManifest {
        run_id: id,
        command: "evaluate".into(),
        tool_version: TOOL_VERSION.into(),
        started_at,
        finished_at: now(),
        suite: Some(suite),
        backend: Some(backend),
        config_hash: None,
        inputs: BTreeMap::from([
            ("sentences".to_string(), sentences_digest),
            ("translations".to_string(), translations_digest),
        ]),
        output: digest_bytes(output, body.as_bytes()),
        counts: ManifestCounts {
            generated: sources.len(),
            translated: records.len() - failed,
            failed,
            classified: batch.records.len(),
        },
    };
    write_manifest(output, &manifest)?;
    Ok(report)
}

/// Side-by-side comparison of report files from one suite.
pub fn cmd_report(reports: &[PathBuf]) -> Result<String> {
    let loaded = reports
        .iter()
        .map(|p| EvaluationReport::load(p))
        .collect::<Result<Vec<_>>>()?;
    crate::report::comparison_table(&loaded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_names() {
        assert_eq!(manifest_path(Path::new("out/t.jsonl")), Path::new("out/t.jsonl.manifest.json"));
        assert_eq!(partial_path(Path::new("t.jsonl")), Path::new("t.jsonl.partial"));
    }

    #[test]
    fn run_id_is_content_derived() {
        assert_eq!(run_id("a", &["x", "y"]), run_id("a", &["x", "y"]));
        assert_ne!(run_id("a", &["x", "y"]), run_id("a", &["xy"]));
        assert_eq!(run_id("a", &[]).len(), 16);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
