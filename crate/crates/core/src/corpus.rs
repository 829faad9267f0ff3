//! Test item data model and loaders for the three suites.
//!
//! Every pipeline file is line-delimited JSON, one record per line. The
//! WinoMT-Hindi corpus and the gender-neutral sets may omit the `suite`
//! key; the loader for that suite fills it in.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lists;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderLabel {
    Male,
    Female,
    Neutral,
    /// Only produced by the classifier: both genders' pronouns present.
    Ambiguous,
}

impl GenderLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GenderLabel::Male => "male",
            GenderLabel::Female => "female",
            GenderLabel::Neutral => "neutral",
            GenderLabel::Ambiguous => "ambiguous",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, GenderLabel::Male | GenderLabel::Female)
    }

    /// The other binary gender; `None` for Neutral/Ambiguous.
    pub fn opposite(self) -> Option<GenderLabel> {
        match self {
            GenderLabel::Male => Some(GenderLabel::Female),
            GenderLabel::Female => Some(GenderLabel::Male),
            _ => None,
        }
    }

    fn initial(self) -> char {
        match self {
            GenderLabel::Male => 'M',
            GenderLabel::Female => 'F',
            GenderLabel::Neutral => 'N',
            GenderLabel::Ambiguous => 'A',
        }
    }

    /// Parses a gold label; only `male` and `female` are accepted.
    pub fn parse_gold(token: &str) -> std::result::Result<GenderLabel, String> {
        match token.trim().to_ascii_lowercase().as_str() {
            "male" => Ok(GenderLabel::Male),
            "female" => Ok(GenderLabel::Female),
            other => Err(format!("gold gender must be \"male\" or \"female\", got {other:?}")),
        }
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Otsc,
    Winomt,
    Neutral,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Otsc => "otsc",
            Suite::Winomt => "winomt",
            Suite::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "otsc" => Ok(Suite::Otsc),
            "winomt" => Ok(Suite::Winomt),
            "neutral" | "tgbi" => Ok(Suite::Neutral),
            other => Err(format!("unknown suite {other:?} (expected otsc, winomt or neutral)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stereotype {
    Pro,
    Anti,
    Unlisted,
}

impl FromStr for Stereotype {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pro" => Ok(Stereotype::Pro),
            "anti" => Ok(Stereotype::Anti),
            "unlisted" => Ok(Stereotype::Unlisted),
            other => Err(format!(
                "stereotype must be \"pro\", \"anti\" or \"unlisted\", got {other:?}"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferencedEntity {
    Entity1,
    Entity2,
}

impl FromStr for ReferencedEntity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entity1" => Ok(ReferencedEntity::Entity1),
            "entity2" => Ok(ReferencedEntity::Entity2),
            other => Err(format!(
                "referenced_entity must be \"entity1\" or \"entity2\", got {other:?}"
            )),
        }
    }
}

/// OTSC quadrant, named (speaker gender, friend gender).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    FF,
    FM,
    MF,
    MM,
}

impl Quadrant {
    /// Row order of the OTSC table: female speaker first.
    pub const ALL: [Quadrant; 4] = [Quadrant::FF, Quadrant::FM, Quadrant::MF, Quadrant::MM];

    pub fn new(speaker: GenderLabel, friend: GenderLabel) -> Option<Quadrant> {
        use GenderLabel::*;
        match (speaker, friend) {
            (Female, Female) => Some(Quadrant::FF),
            (Female, Male) => Some(Quadrant::FM),
            (Male, Female) => Some(Quadrant::MF),
            (Male, Male) => Some(Quadrant::MM),
            _ => None,
        }
    }

    pub fn speaker(self) -> GenderLabel {
        match self {
            Quadrant::FF | Quadrant::FM => GenderLabel::Female,
            Quadrant::MF | Quadrant::MM => GenderLabel::Male,
        }
    }

    pub fn friend(self) -> GenderLabel {
        match self {
            Quadrant::FF | Quadrant::MF => GenderLabel::Female,
            Quadrant::FM | Quadrant::MM => GenderLabel::Male,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::FF => "FF",
            Quadrant::FM => "FM",
            Quadrant::MF => "MF",
            Quadrant::MM => "MM",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Quadrant::FF => "Female Speaker, Female Friend",
            Quadrant::FM => "Female Speaker, Male Friend",
            Quadrant::MF => "Male Speaker, Female Friend",
            Quadrant::MM => "Male Speaker, Male Friend",
        }
    }
}

impl FromStr for Quadrant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Quadrant::ALL
            .into_iter()
            .find(|q| q.as_str() == s.trim())
            .ok_or_else(|| format!("OTSC set_id must be one of FF, FM, MF, MM, got {s:?}"))
    }
}

pub const NEUTRAL_SET_IDS: [&str; 7] = ["S1", "S2", "S3", "S4", "S5", "S6", "S7"];

/// One Hindi test item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSentence {
    pub id: String,
    pub text: String,
    pub suite: Suite,
    pub set_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_gender: Option<GenderLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker_gender: Option<GenderLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stereotype: Option<Stereotype>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub referenced_entity: Option<ReferencedEntity>,
}

impl SourceSentence {
    /// Quadrant of an OTSC record.
    pub fn quadrant(&self) -> Option<Quadrant> {
        Quadrant::new(self.speaker_gender?, self.gold_gender?)
    }

    /// Checks the suite-specific invariants. Returns a human-readable reason on failure.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("id is empty".into());
        }
        if self.text.trim().is_empty() {
            return Err("text is empty".into());
        }
        if !contains_devanagari(&self.text) {
            return Err("text contains no Devanagari characters".into());
        }
        if matches!(self.gold_gender, Some(g) if !g.is_binary()) {
            return Err("gold_gender must be male or female".into());
        }
        match self.suite {
            Suite::Otsc => {
                let gold = self.gold_gender.ok_or("OTSC record needs gold_gender")?;
                let speaker = self.speaker_gender.ok_or("OTSC record needs speaker_gender")?;
                if !speaker.is_binary() {
                    return Err("speaker_gender must be male or female".into());
                }
                if self.occupation.as_deref().is_none_or(|o| o.trim().is_empty()) {
                    return Err("OTSC record needs occupation".into());
                }
                let quadrant: Quadrant = self.set_id.parse()?;
                let mut chars = quadrant.as_str().chars();
                if chars.next() != Some(speaker.initial()) || chars.next() != Some(gold.initial()) {
                    return Err(format!(
                        "set_id {} inconsistent with speaker_gender {speaker} and gold_gender {gold}",
                        self.set_id
                    ));
                }
            }
            Suite::Winomt => {
                if self.gold_gender.is_none() {
                    return Err("missing field gold_gender".into());
                }
                if self.stereotype.is_none() {
                    return Err("missing field stereotype".into());
                }
                if self.referenced_entity.is_none() {
                    return Err("missing field referenced_entity".into());
                }
                if self.set_id.trim().is_empty() {
                    return Err("missing field set_id".into());
                }
            }
            Suite::Neutral => {
                if self.gold_gender.is_some() {
                    return Err("gender-neutral record must not carry gold_gender".into());
                }
                if self.set_id.trim().is_empty() {
                    return Err("missing field set_id".into());
                }
            }
        }
        Ok(())
    }
}

pub fn contains_devanagari(text: &str) -> bool {
    text.chars().any(|c| ('\u{0900}'..='\u{097F}').contains(&c))
}

/// Loader result carrying non-fatal findings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loaded<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> Loaded<T> {
    pub fn into_value(self) -> T {
        for w in &self.warnings {
            log::warn!("{w}");
        }
        self.value
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Trimmed occupation terms in file order. `#` lines are comments.
pub fn parse_occupations(text: &str, path: &Path) -> Result<Loaded<Vec<String>>> {
    let mut terms = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut warnings = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let term = raw.trim().trim_start_matches('\u{feff}');
        if term.is_empty() || term.starts_with('#') {
            continue;
        }
        if let Some(&first) = seen.get(term) {
            return Err(Error::DuplicateOccupation {
                path: path.into(),
                term: term.to_string(),
                first,
                second: line_no,
            });
        }
        if !contains_devanagari(term) {
            warnings.push(format!(
                "{}:{line_no}: occupation {term:?} has no Devanagari content",
                path.display()
            ));
        }
        seen.insert(term.to_string(), line_no);
        terms.push(term.to_string());
    }
    if terms.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    Ok(Loaded {
        value: terms,
        warnings,
    })
}

pub fn load_occupations(path: &Path) -> Result<Loaded<Vec<String>>> {
    parse_occupations(&read(path)?, path)
}

/// Field-level view of one line, validated before it becomes a `SourceSentence`.
#[derive(Debug, Deserialize)]
struct RawRecord {
    id: Option<String>,
    text: Option<String>,
    suite: Option<String>,
    set_id: Option<String>,
    gold_gender: Option<String>,
    speaker_gender: Option<String>,
    occupation: Option<String>,
    stereotype: Option<String>,
    referenced_entity: Option<String>,
}

impl RawRecord {
    fn into_sentence(self, default_suite: Option<Suite>) -> std::result::Result<SourceSentence, String> {
        let suite = match (self.suite.as_deref(), default_suite) {
            (Some(s), Some(expected)) => {
                let s: Suite = s.parse()?;
                if s != expected {
                    return Err(format!("record belongs to suite {s}, expected {expected}"));
                }
                s
            }
            (Some(s), None) => s.parse()?,
            (None, Some(expected)) => expected,
            (None, None) => return Err("missing field suite".into()),
        };
        let id = self.id.ok_or("missing field id")?;
        let text = self.text.ok_or("missing field text")?;
        let set_id = self.set_id.ok_or("missing field set_id")?;
        let gold_gender = self.gold_gender.as_deref().map(GenderLabel::parse_gold).transpose()?;
        let speaker_gender = self
            .speaker_gender
            .as_deref()
            .map(|t| GenderLabel::parse_gold(t).map_err(|e| format!("speaker_gender: {e}")))
            .transpose()?;
        let stereotype = self.stereotype.as_deref().map(str::parse).transpose()?;
        let referenced_entity = self.referenced_entity.as_deref().map(str::parse).transpose()?;
        if suite == Suite::Winomt && self.occupation.is_none() {
            return Err("missing field occupation".into());
        }
        let sentence = SourceSentence {
            id,
            text,
            suite,
            set_id,
            gold_gender,
            speaker_gender,
            occupation: self.occupation,
            stereotype,
            referenced_entity,
        };
        sentence.validate()?;
        Ok(sentence)
    }
}

/// Parses a line-delimited record file. `default_suite` both fills in a
/// missing `suite` key and rejects records from any other suite.
pub fn parse_sentences(
    text: &str,
    path: &Path,
    default_suite: Option<Suite>,
) -> Result<Vec<SourceSentence>> {
    let mut out = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(line)
            .map_err(|e| Error::schema(path, line_no, format!("malformed record: {e}")))?;
        let label = raw.id.clone().unwrap_or_else(|| "<no id>".into());
        let sentence = raw
            .into_sentence(default_suite)
            .map_err(|m| Error::schema(path, line_no, format!("record {label:?}: {m}")))?;
        if let Some(&first) = ids.get(&sentence.id) {
            return Err(Error::DuplicateId {
                path: path.into(),
                id: sentence.id,
                first,
                second: line_no,
            });
        }
        ids.insert(sentence.id.clone(), line_no);
        out.push(sentence);
    }
    Ok(out)
}

pub fn load_sentences(path: &Path, default_suite: Option<Suite>) -> Result<Vec<SourceSentence>> {
    parse_sentences(&read(path)?, path, default_suite)
}

pub fn load_winomt_corpus(path: &Path) -> Result<Vec<SourceSentence>> {
    let records = load_sentences(path, Some(Suite::Winomt))?;
    if records.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    Ok(records)
}

/// Groups gender-neutral records by set. Set names outside S1..S7 are kept with a warning.
pub fn group_neutral_sets(
    records: Vec<SourceSentence>,
    path: &Path,
) -> Result<Loaded<BTreeMap<String, Vec<SourceSentence>>>> {
    let mut sets: BTreeMap<String, Vec<SourceSentence>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for r in records {
        if !NEUTRAL_SET_IDS.contains(&r.set_id.as_str()) && !sets.contains_key(&r.set_id) {
            warnings.push(format!(
                "{}: non-standard set name {:?}",
                path.display(),
                r.set_id
            ));
        }
        sets.entry(r.set_id.clone()).or_default().push(r);
    }
    if sets.is_empty() {
        return Err(Error::NoSets { path: path.into() });
    }
    Ok(Loaded {
        value: sets,
        warnings,
    })
}

pub fn load_neutral_sets(path: &Path) -> Result<Loaded<BTreeMap<String, Vec<SourceSentence>>>> {
    let records = load_sentences(path, Some(Suite::Neutral))?;
    group_neutral_sets(records, path)
}

/// Serializes records as line-delimited JSON.
pub fn to_jsonl(records: &[SourceSentence]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("SourceSentence serializes"));
        out.push('\n');
    }
    out
}

/// Occupations associated with each gender, used for the pro/anti split.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StereotypeLists {
    male_stereotyped: BTreeSet<String>,
    female_stereotyped: BTreeSet<String>,
}

impl StereotypeLists {
    pub fn new<I, J, S, T>(male: I, female: J) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let male_stereotyped: BTreeSet<String> = male.into_iter().map(Into::into).collect();
        let female_stereotyped: BTreeSet<String> = female.into_iter().map(Into::into).collect();
        if let Some(both) = male_stereotyped.intersection(&female_stereotyped).next() {
            return Err(Error::Invalid(format!(
                "occupation {both:?} is listed under both genders"
            )));
        }
        Ok(StereotypeLists {
            male_stereotyped,
            female_stereotyped,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (male, female) = lists::male_female(lists::read_labeled_lists(path)?, path)?;
        Self::new(male, female)
    }

    pub fn male(&self) -> &BTreeSet<String> {
        &self.male_stereotyped
    }

    pub fn female(&self) -> &BTreeSet<String> {
        &self.female_stereotyped
    }

    /// The gender an occupation is stereotypically associated with, if listed.
    pub fn associated_gender(&self, occupation: &str) -> Option<GenderLabel> {
        let occupation = occupation.trim();
        if self.male_stereotyped.contains(occupation) {
            Some(GenderLabel::Male)
        } else if self.female_stereotyped.contains(occupation) {
            Some(GenderLabel::Female)
        } else {
            None
        }
    }
}

pub fn assign_stereotype(occupation: &str, gold_gender: GenderLabel, lists: &StereotypeLists) -> Stereotype {
    match lists.associated_gender(occupation) {
        Some(g) if g == gold_gender => Stereotype::Pro,
        Some(_) => Stereotype::Anti,
        None => Stereotype::Unlisted,
    }
}

/// Overwrites each WinoMT record's stereotype tag from `lists`.
/// Returns the ids whose tag changed.
pub fn retag_stereotypes(records: &mut [SourceSentence], lists: &StereotypeLists) -> Vec<String> {
    let mut changed = Vec::new();
    for r in records.iter_mut().filter(|r| r.suite == Suite::Winomt) {
        let (Some(occupation), Some(gold)) = (r.occupation.as_deref(), r.gold_gender) else {
            continue;
        };
        let tag = assign_stereotype(occupation, gold, lists);
        if r.stereotype != Some(tag) {
            changed.push(r.id.clone());
            r.stereotype = Some(tag);
        }
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.jsonl")
    }

    fn winomt_line(id: &str, gold: &str) -> String {
        format!(
            r#"{{"id":"{id}","text":"सचिव मूवर से पूछता है","gold_gender":"{gold}","stereotype":"anti","occupation":"सचिव","referenced_entity":"entity1","set_id":"dev"}}"#
        )
    }

    #[test]
    fn single_occupation() {
        let got = parse_occupations("डॉक्टर\n", p()).unwrap();
        assert_eq!(got.value, vec!["डॉक्टर"]);
        assert!(got.warnings.is_empty());
    }

    #[test]
    fn occupations_crlf_and_comments() {
        let got = parse_occupations("# list\r\nडॉक्टर\r\n  नर्स  \r\n\r\n", p()).unwrap();
        assert_eq!(got.value, vec!["डॉक्टर", "नर्स"]);
    }

    #[test]
    fn duplicate_occupation_names_both_lines() {
        let err = parse_occupations("डॉक्टर\nनर्स\nडॉक्टर\n", p()).unwrap_err();
        match err {
            Error::DuplicateOccupation { term, first, second, .. } => {
                assert_eq!(term, "डॉक्टर");
                assert_eq!((first, second), (1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_occupation_file_errors() {
        assert!(matches!(parse_occupations("\n# only comment\n", p()), Err(Error::EmptyFile { .. })));
    }

    #[test]
    fn latin_occupation_is_kept_with_warning() {
        let got = parse_occupations("doctor\nनर्स\n", p()).unwrap();
        assert_eq!(got.value.len(), 2);
        assert_eq!(got.warnings.len(), 1);
        assert!(got.warnings[0].contains("doctor"));
    }

    #[test]
    fn winomt_neutral_gold_is_schema_error() {
        let err = parse_sentences(&winomt_line("w1", "neutral"), p(), Some(Suite::Winomt)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("w1") && msg.contains("gold gender"), "{msg}");
    }

    #[test]
    fn winomt_bad_stereotype_token() {
        let line = winomt_line("w1", "male").replace("\"anti\"", "\"maybe\"");
        let err = parse_sentences(&line, p(), Some(Suite::Winomt)).unwrap_err();
        assert!(err.to_string().contains("stereotype"));
    }

    #[test]
    fn winomt_missing_field_reports_line() {
        let line = winomt_line("w2", "male").replace(r#""referenced_entity":"entity1","#, "");
        let text = format!("{}\n{line}\n", winomt_line("w1", "male"));
        match parse_sentences(&text, p(), Some(Suite::Winomt)).unwrap_err() {
            Error::Schema { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("referenced_entity"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn winomt_duplicate_id() {
        let text = format!("{}\n{}\n", winomt_line("w1", "male"), winomt_line("w1", "female"));
        assert!(matches!(
            parse_sentences(&text, p(), Some(Suite::Winomt)),
            Err(Error::DuplicateId { first: 1, second: 2, .. })
        ));
    }

    #[test]
    fn neutral_record_with_gold_is_rejected() {
        let text = concat!(
            r#"{"id":"n1","text":"वह डॉक्टर है","set_id":"S1"}"#,
            "\n",
            r#"{"id":"n2","text":"वह नर्स है","set_id":"S1","gold_gender":"female"}"#,
            "\n"
        );
        let err = parse_sentences(text, p(), Some(Suite::Neutral)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n2") && msg.contains(":2:"), "{msg}");
    }

    #[test]
    fn empty_neutral_file_has_no_sets() {
        let err = group_neutral_sets(Vec::new(), p()).unwrap_err();
        assert_eq!(err.to_string(), "test.jsonl: no sets found");
    }

    #[test]
    fn non_standard_neutral_set_warns() {
        let text = r#"{"id":"n1","text":"वह डॉक्टर है","set_id":"S9"}"#;
        let records = parse_sentences(text, p(), Some(Suite::Neutral)).unwrap();
        let sets = group_neutral_sets(records, p()).unwrap();
        assert_eq!(sets.warnings.len(), 1);
        assert_eq!(sets.value["S9"].len(), 1);
    }

    #[test]
    fn text_without_devanagari_rejected() {
        let line = winomt_line("w1", "male").replace("सचिव मूवर से पूछता है", "secretary asks");
        assert!(parse_sentences(&line, p(), Some(Suite::Winomt)).is_err());
    }

    #[test]
    fn otsc_set_id_must_match_genders() {
        let mut s = SourceSentence {
            id: "o1".into(),
            text: "मैं".into(),
            suite: Suite::Otsc,
            set_id: "FM".into(),
            gold_gender: Some(GenderLabel::Male),
            speaker_gender: Some(GenderLabel::Female),
            occupation: Some("डॉक्टर".into()),
            stereotype: None,
            referenced_entity: None,
        };
        assert!(s.validate().is_ok());
        s.set_id = "MF".into();
        assert!(s.validate().unwrap_err().contains("inconsistent"));
    }

    #[test]
    fn suite_mismatch_rejected() {
        let line = winomt_line("w1", "male").replacen('{', r#"{"suite":"otsc","#, 1);
        let err = parse_sentences(&line, p(), Some(Suite::Winomt)).unwrap_err();
        assert!(err.to_string().contains("expected winomt"));
    }

    #[test]
    fn stereotype_assignment() {
        let lists = StereotypeLists::new(["मूवर"], ["सचिव"]).unwrap();
        assert_eq!(assign_stereotype("मूवर", GenderLabel::Male, &lists), Stereotype::Pro);
        assert_eq!(assign_stereotype("मूवर", GenderLabel::Female, &lists), Stereotype::Anti);
        assert_eq!(assign_stereotype("सचिव", GenderLabel::Female, &lists), Stereotype::Pro);
        assert_eq!(assign_stereotype("वकील", GenderLabel::Male, &lists), Stereotype::Unlisted);
    }

    #[test]
    fn stereotype_lists_must_be_disjoint() {
        assert!(StereotypeLists::new(["नर्स"], ["नर्स"]).is_err());
    }

    #[test]
    fn quadrant_roundtrip() {
        for q in Quadrant::ALL {
            assert_eq!(Quadrant::new(q.speaker(), q.friend()), Some(q));
            assert_eq!(q.as_str().parse::<Quadrant>().unwrap(), q);
        }
    }
}
