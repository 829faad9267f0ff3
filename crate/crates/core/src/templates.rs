//! OTSC template expansion and WinoMT gender-cue checks.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;
use unicode_segmentation::UnicodeSegmentation;

use crate::corpus::{GenderLabel, Quadrant, SourceSentence, Suite};
use crate::error::{Error, Result};
use crate::lists;

pub const OCCUPATION_SLOT: &str = "occupation";

const DEFAULT_OTSC_TEMPLATE: &str = include_str!("../data/otsc_template.toml");

/// One template segment: literal text or a `{name}` placeholder.
enum Segment<'a> {
    Literal(&'a str),
    Slot(&'a str),
}

fn is_slot_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits on `{name}` placeholders. Braces that do not enclose a valid
/// name are literal text.
fn segments(template: &str) -> Vec<Segment<'_>> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if is_slot_name(&after[..close]) => {
                if open > 0 {
                    out.push(Segment::Literal(&rest[..open]));
                }
                out.push(Segment::Slot(&after[..close]));
                rest = &after[close + 1..];
            }
            _ => {
                out.push(Segment::Literal(&rest[..open + 1]));
                rest = after;
            }
        }
    }
    if !rest.is_empty() {
        out.push(Segment::Literal(rest));
    }
    out
}

/// Placeholder names in order of appearance (repeats included).
pub fn placeholders(template: &str) -> Vec<&str> {
    segments(template)
        .into_iter()
        .filter_map(|s| match s {
            Segment::Slot(name) => Some(name),
            Segment::Literal(_) => None,
        })
        .collect()
}

/// Single-pass slot substitution; bound values are never rescanned.
pub fn render_template<K, V>(template: &str, bindings: &HashMap<K, V>) -> Result<String>
where
    K: std::borrow::Borrow<str> + std::hash::Hash + Eq + AsRef<str>,
    V: AsRef<str>,
{
    let mut out = String::with_capacity(template.len());
    let mut used = HashSet::new();
    for seg in segments(template) {
        match seg {
            Segment::Literal(text) => out.push_str(text),
            Segment::Slot(name) => {
                let value = bindings
                    .get(name)
                    .ok_or_else(|| Error::UnboundPlaceholder(name.to_string()))?;
                out.push_str(value.as_ref());
                used.insert(name);
            }
        }
    }
    for key in bindings.keys() {
        if !used.contains(key.as_ref()) {
            log::warn!("binding {{{}}} is not used by the template", key.as_ref());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct GenderedForms {
    pub male: String,
    pub female: String,
}

impl GenderedForms {
    pub fn get(&self, gender: GenderLabel) -> &str {
        match gender {
            GenderLabel::Female => &self.female,
            _ => &self.male,
        }
    }
}

/// The OTSC sentence frame with its gender-inflected slots.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct OtscTemplate {
    pub skeleton: String,
    pub speaker_verb: GenderedForms,
    pub friend_possessive: GenderedForms,
    pub friend_verb: GenderedForms,
}

impl Default for OtscTemplate {
    fn default() -> Self {
        Self::parse(DEFAULT_OTSC_TEMPLATE).expect("bundled OTSC template is valid")
    }
}

impl OtscTemplate {
    pub fn parse(text: &str) -> Result<Self> {
        let template: OtscTemplate =
            toml::from_str(text).map_err(|e| Error::Template(e.to_string()))?;
        template.check()?;
        Ok(template)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Template(format!("{}: {e}", path.display())))
    }

    fn check(&self) -> Result<()> {
        let slots = placeholders(&self.skeleton);
        for required in ["speaker_verb", "friend_possessive", "friend_verb", OCCUPATION_SLOT] {
            let n = slots.iter().filter(|s| **s == required).count();
            if n != 1 {
                return Err(Error::Template(format!(
                    "skeleton must contain {{{required}}} exactly once, found {n}"
                )));
            }
        }
        if let Some(extra) = slots.iter().find(|s| {
            !["speaker_verb", "friend_possessive", "friend_verb", OCCUPATION_SLOT].contains(s)
        }) {
            return Err(Error::Template(format!("unknown placeholder {{{extra}}}")));
        }
        for (name, forms) in [
            ("speaker_verb", &self.speaker_verb),
            ("friend_possessive", &self.friend_possessive),
            ("friend_verb", &self.friend_verb),
        ] {
            if forms.male.trim().is_empty() || forms.female.trim().is_empty() || forms.male == forms.female {
                return Err(Error::Template(format!(
                    "{name} needs distinct, non-empty male and female forms"
                )));
            }
        }
        Ok(())
    }

    /// The quadrant's sentence with only `{occupation}` left open.
    pub fn quadrant_skeleton(&self, quadrant: Quadrant) -> String {
        let slot = format!("{{{OCCUPATION_SLOT}}}");
        let bindings = HashMap::from([
            ("speaker_verb", self.speaker_verb.get(quadrant.speaker())),
            ("friend_possessive", self.friend_possessive.get(quadrant.friend())),
            ("friend_verb", self.friend_verb.get(quadrant.friend())),
            (OCCUPATION_SLOT, slot.as_str()),
        ]);
        render_template(&self.skeleton, &bindings).expect("checked at load")
    }

    pub fn render(&self, quadrant: Quadrant, occupation: &str) -> String {
        let bindings = HashMap::from([
            ("speaker_verb", self.speaker_verb.get(quadrant.speaker())),
            ("friend_possessive", self.friend_possessive.get(quadrant.friend())),
            ("friend_verb", self.friend_verb.get(quadrant.friend())),
            (OCCUPATION_SLOT, occupation),
        ]);
        render_template(&self.skeleton, &bindings).expect("checked at load")
    }
}

pub fn otsc_id(quadrant: Quadrant, index: usize) -> String {
    format!("otsc-{}-{:05}", quadrant.as_str(), index + 1)
}

/// Expands every occupation into the four speaker x friend quadrants.
/// Output is quadrant-major (all FF, then FM, MF, MM), occupation order kept within each.
pub fn expand_otsc(occupations: &[String], template: &OtscTemplate) -> Result<Vec<SourceSentence>> {
    if occupations.is_empty() {
        return Err(Error::NoOccupations);
    }
    let mut seen = HashSet::new();
    for o in occupations {
        if !seen.insert(o.as_str()) {
            return Err(Error::Invalid(format!("duplicate occupation {o:?}")));
        }
    }
    let mut out = Vec::with_capacity(occupations.len() * 4);
    for quadrant in Quadrant::ALL {
        for (index, occupation) in occupations.iter().enumerate() {
            out.push(SourceSentence {
                id: otsc_id(quadrant, index),
                text: template.render(quadrant, occupation),
                suite: Suite::Otsc,
                set_id: quadrant.as_str().to_string(),
                gold_gender: Some(quadrant.friend()),
                speaker_gender: Some(quadrant.speaker()),
                occupation: Some(occupation.clone()),
                stereotype: None,
                referenced_entity: None,
            });
        }
    }
    Ok(out)
}

/// Gender-marking source tokens, one inventory per gender.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueInventory {
    pub male_cues: BTreeSet<String>,
    pub female_cues: BTreeSet<String>,
}

impl CueInventory {
    pub fn new<I, J, S, T>(male: I, female: J) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let male_cues: BTreeSet<String> = male.into_iter().map(Into::into).collect();
        let female_cues: BTreeSet<String> = female.into_iter().map(Into::into).collect();
        if let Some(both) = male_cues.intersection(&female_cues).next() {
            return Err(Error::Invalid(format!("cue {both:?} is listed under both genders")));
        }
        Ok(CueInventory { male_cues, female_cues })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (male, female) = lists::male_female(lists::read_labeled_lists(path)?, path)?;
        Self::new(male, female)
    }

    fn cues_for(&self, gender: GenderLabel) -> Option<&BTreeSet<String>> {
        match gender {
            GenderLabel::Male => Some(&self.male_cues),
            GenderLabel::Female => Some(&self.female_cues),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CueStatus {
    Pass,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueReport {
    pub status: CueStatus,
    /// Cue tokens found in the text, both genders, in text order.
    pub matched: Vec<String>,
    pub message: Option<String>,
}

impl CueReport {
    fn warn(matched: Vec<String>, message: impl Into<String>) -> Self {
        CueReport {
            status: CueStatus::Warn,
            matched,
            message: Some(message.into()),
        }
    }
}

/// Advisory check that a WinoMT record's text carries a cue for its gold gender
/// and none for the other gender.
pub fn validate_gender_cues(record: &SourceSentence, cues: &CueInventory) -> CueReport {
    if record.suite != Suite::Winomt {
        return CueReport::warn(Vec::new(), format!("record {} is not a WinoMT record", record.id));
    }
    let Some(gold) = record.gold_gender else {
        return CueReport::warn(Vec::new(), format!("record {} has no gold gender", record.id));
    };
    let own = cues.cues_for(gold).expect("gold is binary");
    let other = cues.cues_for(gold.opposite().expect("gold is binary")).expect("binary");

    let mut matched = Vec::new();
    let (mut own_hits, mut other_hits) = (0, 0);
    for word in record.text.unicode_words() {
        if own.contains(word) {
            own_hits += 1;
            matched.push(word.to_string());
        } else if other.contains(word) {
            other_hits += 1;
            matched.push(word.to_string());
        }
    }
    match (own_hits, other_hits) {
        (0, 0) => CueReport::warn(matched, "no cue found"),
        (_, 0) => CueReport {
            status: CueStatus::Pass,
            matched,
            message: None,
        },
        (0, _) => {
            let msg = format!("only {} cues present: {}", gold.opposite().unwrap(), matched.join(", "));
            CueReport::warn(matched, msg)
        }
        _ => {
            let msg = format!("cues of both genders present: {}", matched.join(", "));
            CueReport::warn(matched, msg)
        }
    }
}
