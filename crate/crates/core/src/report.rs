//! Evaluation report files and their plain-text tables.
//!
//! Report files carry full-precision numbers; tables print percentages
//! with one decimal and P / TGBI values with three.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Quadrant, Suite};
use crate::error::{Error, Result};
use crate::metrics::{MetricOptions, OtscReport, TgbiReport, WinomtReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "lowercase")]
pub enum SuiteResult {
    Neutral(TgbiReport),
    Otsc(OtscReport),
    Winomt(Box<WinomtReport>),
}

impl SuiteResult {
    pub fn suite(&self) -> Suite {
        match self {
            SuiteResult::Neutral(_) => Suite::Neutral,
            SuiteResult::Otsc(_) => Suite::Otsc,
            SuiteResult::Winomt(_) => Suite::Winomt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// File name only, so reports do not depend on where a run happened.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRef {
    pub run_id: String,
    pub file: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationCounts {
    pub sentences: usize,
    pub translations: usize,
    pub classified: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationSettings {
    pub metrics: MetricOptions,
    pub strict_pronouns: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stereotype_lists: Option<FileDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pronoun_sets: Option<FileDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub backend: String,
    pub manifest: ManifestRef,
    pub sentences: FileDigest,
    pub translations: FileDigest,
    pub settings: EvaluationSettings,
    pub counts: EvaluationCounts,
    pub result: SuiteResult,
}

impl EvaluationReport {
    pub fn suite(&self) -> Suite {
        self.result.suite()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::schema(path, e.line(), format!("not an evaluation report: {e}")))
    }
}

/// Percentage with one decimal; negative zero prints as `0.0`.
pub fn fmt_pct(v: f64) -> String {
    let s = format!("{v:.1}");
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

pub fn fmt_score(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Left-aligned first column, right-aligned others.
fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = vec![0usize; cols];
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (i, cell) in row.iter().enumerate() {
            width[i] = width[i].max(cell.chars().count());
        }
    }
    let line = |row: &[String]| -> String {
        let mut out = String::new();
        for (i, cell) in row.iter().enumerate() {
            let pad = width[i] - cell.chars().count();
            if i == 0 {
                out.push_str(cell);
                out.push_str(&" ".repeat(pad));
            } else {
                out.push_str("  ");
                out.push_str(&" ".repeat(pad));
                out.push_str(cell);
            }
        }
        out.trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (cols - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Sets as rows, one column per system, TGBI as the last row.
pub fn tgbi_table(systems: &[(&str, &TgbiReport)]) -> String {
    let sets: BTreeSet<&String> = systems.iter().flat_map(|(_, r)| r.per_set.keys()).collect();
    let mut header = vec!["Set".to_string()];
    header.extend(systems.iter().map(|(n, _)| n.to_string()));
    let mut rows: Vec<Vec<String>> = sets
        .iter()
        .map(|set| {
            let mut row = vec![set.to_string()];
            row.extend(systems.iter().map(|(_, r)| {
                r.per_set.get(*set).map(|s| fmt_score(s.p_s)).unwrap_or_else(|| "-".into())
            }));
            row
        })
        .collect();
    let mut last = vec!["TGBI".to_string()];
    last.extend(systems.iter().map(|(_, r)| fmt_score(r.tgbi)));
    rows.push(last);
    render_table(&header, &rows)
}

/// Quadrants as rows; p_m / p_w / p_n per system. `*` marks the friend's true gender.
pub fn otsc_table(systems: &[(&str, &OtscReport)]) -> String {
    let mut header = vec!["Sentence Set".to_string()];
    for (name, _) in systems {
        for col in ["p_m", "p_w", "p_n"] {
            header.push(if systems.len() == 1 {
                col.to_string()
            } else {
                format!("{name} {col}")
            });
        }
    }
    let rows: Vec<Vec<String>> = Quadrant::ALL
        .iter()
        .map(|q| {
            let mut row = vec![q.description().to_string()];
            for (_, r) in systems {
                match r.quadrants.get(q) {
                    Some(s) => {
                        let star = |is_true: bool| if is_true { "*" } else { "" };
                        let male_true = q.friend() == crate::corpus::GenderLabel::Male;
                        row.push(format!("{}{}", fmt_pct(s.p_m), star(male_true)));
                        row.push(format!("{}{}", fmt_pct(s.p_w), star(!male_true)));
                        row.push(fmt_pct(s.p_n));
                    }
                    None => row.extend(std::iter::repeat_n("-".to_string(), 3)),
                }
            }
            row
        })
        .collect();
    render_table(&header, &rows)
}

/// One row per system with Acc, ΔG, ΔS and N.
pub fn winomt_table(systems: &[(&str, &WinomtReport)]) -> String {
    let header: Vec<String> = ["System", "Acc", "ΔG", "ΔS", "N"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = systems
        .iter()
        .map(|(name, r)| {
            vec![
                name.to_string(),
                fmt_pct(r.acc),
                fmt_pct(r.delta_g),
                r.delta_s.map(fmt_pct).unwrap_or_else(|| "n/a".into()),
                fmt_pct(r.n),
            ]
        })
        .collect();
    render_table(&header, &rows)
}

/// Side-by-side table for reports of one suite.
pub fn comparison_table(reports: &[EvaluationReport]) -> Result<String> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Invalid("no report files given".into()))?;
    let suite = first.suite();
    if let Some(other) = reports.iter().find(|r| r.suite() != suite) {
        return Err(Error::Invalid(format!(
            "cannot compare a {} report with a {} report",
            suite,
            other.suite()
        )));
    }
    let table = match suite {
        Suite::Neutral => tgbi_table(
            &reports
                .iter()
                .filter_map(|r| match &r.result {
                    SuiteResult::Neutral(t) => Some((r.backend.as_str(), t)),
                    _ => None,
                })
                .collect::<Vec<_>>(),
        ),
        Suite::Otsc => otsc_table(
            &reports
                .iter()
                .filter_map(|r| match &r.result {
                    SuiteResult::Otsc(t) => Some((r.backend.as_str(), t)),
                    _ => None,
                })
                .collect::<Vec<_>>(),
        ),
        Suite::Winomt => winomt_table(
            &reports
                .iter()
                .filter_map(|r| match &r.result {
                    SuiteResult::Winomt(t) => Some((r.backend.as_str(), &**t)),
                    _ => None,
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok(table)
}

pub fn single_table(report: &EvaluationReport) -> String {
    comparison_table(std::slice::from_ref(report)).expect("one report is always comparable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{compute_ps, Proportions, SetScore};
    use std::collections::BTreeMap;

    #[test]
    fn percent_formatting() {
        assert_eq!(fmt_pct(66.666_666), "66.7");
        assert_eq!(fmt_pct(-0.04), "0.0");
        assert_eq!(fmt_pct(-3.8), "-3.8");
        assert_eq!(fmt_pct(100.0), "100.0");
        assert_eq!(fmt_score(0.74214), "0.742");
    }

    #[test]
    fn tgbi_table_has_tgbi_row() {
        let p = Proportions { p_m: 0.5, p_f: 0.5, p_n: 0.0 };
        let report = TgbiReport {
            per_set: BTreeMap::from([(
                "S1".to_string(),
                SetScore { count: 2, proportions: p, p_s: compute_ps(&p) },
            )]),
            tgbi: 0.5,
        };
        let t = tgbi_table(&[("IT", &report)]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "Set      IT");
        assert_eq!(lines[2], "S1    0.500");
        assert_eq!(lines[3], "TGBI  0.500");
    }
}
