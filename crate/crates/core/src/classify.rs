//! Target-side gender detection by gendered-pronoun presence.
//!
//! An English translation is Male when only male pronouns occur, Female
//! when only female pronouns occur, Neutral when none occur and Ambiguous
//! when both do. Tokens come from Unicode word boundaries, so punctuation
//! never glues onto a pronoun and "therapist" never matches "he".

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::backends::{TranslationRecord, TranslationStatus};
use crate::corpus::{GenderLabel, SourceSentence};
use crate::error::{Error, Result};
use crate::lists;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PronounSets {
    pub male: BTreeSet<String>,
    pub female: BTreeSet<String>,
}

impl Default for PronounSets {
    fn default() -> Self {
        PronounSets::from_tokens(["he", "him", "his"], ["she", "her", "hers"])
    }
}

impl PronounSets {
    /// Exactly he/him/his and she/her.
    pub fn strict() -> Self {
        PronounSets::from_tokens(["he", "him", "his"], ["she", "her"])
    }

    fn from_tokens<'a>(male: impl IntoIterator<Item = &'a str>, female: impl IntoIterator<Item = &'a str>) -> Self {
        PronounSets {
            male: male.into_iter().map(str::to_string).collect(),
            female: female.into_iter().map(str::to_string).collect(),
        }
    }

    pub fn new(male: Vec<String>, female: Vec<String>) -> Result<Self> {
        let male: BTreeSet<String> = male.into_iter().map(|t| t.to_lowercase()).collect();
        let female: BTreeSet<String> = female.into_iter().map(|t| t.to_lowercase()).collect();
        if let Some(both) = male.intersection(&female).next() {
            return Err(Error::Invalid(format!("pronoun {both:?} listed under both genders")));
        }
        if male.is_empty() || female.is_empty() {
            return Err(Error::Invalid("pronoun sets must not be empty".into()));
        }
        Ok(PronounSets { male, female })
    }

    /// Loads `[male]` / `[female]` token lists.
    pub fn load(path: &Path) -> Result<Self> {
        let (male, female) = lists::male_female(lists::read_labeled_lists(path)?, path)?;
        Self::new(male, female)
    }

    pub fn classify(&self, text: &str) -> Classification {
        let mut matched = Vec::new();
        let (mut male, mut female) = (false, false);
        for token in pronoun_candidates(text) {
            if self.male.contains(&token) {
                male = true;
                matched.push(token);
            } else if self.female.contains(&token) {
                female = true;
                matched.push(token);
            }
        }
        let label = match (male, female) {
            (true, true) => GenderLabel::Ambiguous,
            (true, false) => GenderLabel::Male,
            (false, true) => GenderLabel::Female,
            (false, false) => GenderLabel::Neutral,
        };
        Classification { label, matched }
    }
}

/// Lowercased word tokens, with clitics after an apostrophe dropped ("he's" -> "he").
fn pronoun_candidates(text: &str) -> impl Iterator<Item = String> + '_ {
    text.unicode_words().map(|w| {
        let stem = w.split(['\'', '\u{2019}']).next().unwrap_or(w);
        stem.to_lowercase()
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub label: GenderLabel,
    /// Matched pronouns, lowercased, in text order.
    pub matched: Vec<String>,
}

/// Classifies with the default pronoun sets.
pub fn classify_gender(text: &str) -> Classification {
    PronounSets::default().classify(text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedRecord {
    pub source: SourceSentence,
    pub target_text: String,
    pub predicted: GenderLabel,
    pub matched_tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedItem {
    pub source_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassifiedBatch {
    pub records: Vec<ClassifiedRecord>,
    pub excluded: Vec<ExcludedItem>,
}

/// Id lookup over a loaded corpus.
pub struct SourceIndex<'a> {
    by_id: HashMap<&'a str, &'a SourceSentence>,
}

impl<'a> SourceIndex<'a> {
    pub fn new(sources: &'a [SourceSentence]) -> Self {
        SourceIndex {
            by_id: sources.iter().map(|s| (s.id.as_str(), s)).collect(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&'a SourceSentence> {
        self.by_id.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

/// Joins translations to their sources and classifies each Ok translation.
/// Failed translations become exclusions; an unknown source id aborts.
pub fn classify_batch(
    translations: &[TranslationRecord],
    sources: &SourceIndex<'_>,
    pronouns: &PronounSets,
) -> Result<ClassifiedBatch> {
    let mut batch = ClassifiedBatch::default();
    for t in translations {
        let source = sources
            .get(&t.source_id)
            .ok_or_else(|| Error::UnknownSource(t.source_id.clone()))?;
        match &t.status {
            TranslationStatus::Ok => {
                let c = pronouns.classify(&t.target_text);
                batch.records.push(ClassifiedRecord {
                    source: source.clone(),
                    target_text: t.target_text.clone(),
                    predicted: c.label,
                    matched_tokens: c.matched,
                });
            }
            TranslationStatus::Failed { reason } => batch.excluded.push(ExcludedItem {
                source_id: t.source_id.clone(),
                reason: reason.clone(),
            }),
        }
    }
    Ok(batch)
}
