use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::TranslationRecord;
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct ReplayLine {
    source_id: String,
    #[serde(default)]
    target_text: String,
    #[serde(default)]
    status: Option<String>,
    #[serde(default)]
    reason: Option<String>,
}

enum Entry {
    Text(String),
    Failed(String),
}

/// Pre-computed translations keyed by source id.
pub struct ReplayTable {
    entries: HashMap<String, Entry>,
}

impl ReplayTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, source_id: &str, backend: &str) -> TranslationRecord {
        match self.entries.get(source_id) {
            Some(Entry::Text(t)) => TranslationRecord::ok(source_id, t.clone(), backend),
            Some(Entry::Failed(reason)) => TranslationRecord::failed(source_id, reason.clone(), backend),
            None => TranslationRecord::failed(source_id, "missing translation", backend),
        }
    }
}

/// Reads `source_id` / `target_text` lines. A `status` of `failed` is replayed as a failure.
pub fn load_replay(path: &Path) -> Result<ReplayTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries = HashMap::new();
    let mut lines: HashMap<String, usize> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ReplayLine = serde_json::from_str(line)
            .map_err(|e| Error::schema(path, idx + 1, format!("malformed replay record: {e}")))?;
        if let Some(first) = lines.insert(rec.source_id.clone(), idx + 1) {
            return Err(Error::DuplicateId {
                path: path.into(),
                id: rec.source_id,
                first,
                second: idx + 1,
            });
        }
        let entry = match rec.status.as_deref() {
            Some("failed") => Entry::Failed(rec.reason.unwrap_or_else(|| "failed in replayed run".into())),
            _ => Entry::Text(rec.target_text),
        };
        entries.insert(rec.source_id, entry);
    }
    Ok(ReplayTable { entries })
}
