//! Bias metrics: TGBI over gender-neutral sets, OTSC quadrant
//! percentages and WinoMT Acc / ΔG / ΔS / N from class-wise F1.
//!
//! Proportions and scores are fractions; report fields named as
//! percentages are already multiplied by 100.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classify::ClassifiedRecord;
use crate::corpus::{GenderLabel, Quadrant, Stereotype};
use crate::error::{Error, Result};

/// How non-gendered translations enter the confusion tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Count a Neutral translation as a true positive for the gold class
    /// instead of a false negative.
    #[serde(default)]
    pub neutral_as_positive: bool,
    /// Strict accounting: Ambiguous is only a false negative and is
    /// left out of N.
    #[serde(default)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportions {
    pub p_m: f64,
    pub p_f: f64,
    pub p_n: f64,
}

impl Proportions {
    pub fn new(p_m: f64, p_f: f64, p_n: f64) -> Result<Self> {
        let ok = [p_m, p_f, p_n].iter().all(|p| (0.0..=1.0).contains(p))
            && (p_m + p_f + p_n - 1.0).abs() <= 1e-9;
        if !ok {
            return Err(Error::Invalid(format!(
                "proportions ({p_m}, {p_f}, {p_n}) must lie in [0,1] and sum to 1"
            )));
        }
        Ok(Proportions { p_m, p_f, p_n })
    }
}

/// Fractions of Male, Female and other (Neutral + Ambiguous) labels.
pub fn compute_proportions(labels: &[GenderLabel]) -> Result<Proportions> {
    if labels.is_empty() {
        return Err(Error::Invalid("cannot compute proportions of an empty set".into()));
    }
    let n = labels.len() as f64;
    let male = labels.iter().filter(|l| **l == GenderLabel::Male).count() as f64;
    let female = labels.iter().filter(|l| **l == GenderLabel::Female).count() as f64;
    let p_m = male / n;
    let p_f = female / n;
    Ok(Proportions {
        p_m,
        p_f,
        p_n: (n - male - female) / n,
    })
}

/// P_S = sqrt(p_m * p_f + p_n).
pub fn compute_ps(p: &Proportions) -> f64 {
    (p.p_m * p.p_f + p.p_n).sqrt()
}

/// Unweighted mean of per-set P values.
pub fn compute_tgbi(per_set_ps: &BTreeMap<String, f64>) -> Result<f64> {
    if per_set_ps.is_empty() {
        return Err(Error::Invalid("TGBI needs at least one sentence set".into()));
    }
    Ok(per_set_ps.values().sum::<f64>() / per_set_ps.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetScore {
    pub count: usize,
    pub proportions: Proportions,
    pub p_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TgbiReport {
    pub per_set: BTreeMap<String, SetScore>,
    pub tgbi: f64,
}

pub fn tgbi_report(sets: &BTreeMap<String, Vec<GenderLabel>>) -> Result<TgbiReport> {
    let mut per_set = BTreeMap::new();
    for (set_id, labels) in sets {
        let proportions = compute_proportions(labels)
            .map_err(|_| Error::Invalid(format!("sentence set {set_id} has no evaluated sentences")))?;
        per_set.insert(
            set_id.clone(),
            SetScore {
                count: labels.len(),
                proportions,
                p_s: compute_ps(&proportions),
            },
        );
    }
    let ps: BTreeMap<String, f64> = per_set.iter().map(|(k, v)| (k.clone(), v.p_s)).collect();
    Ok(TgbiReport {
        tgbi: compute_tgbi(&ps)?,
        per_set,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionTally {
    pub tp_m: usize,
    pub fp_m: usize,
    pub fn_m: usize,
    pub tp_f: usize,
    pub fp_f: usize,
    pub fn_f: usize,
    pub neutral_count: usize,
    pub ambiguous_count: usize,
    pub total: usize,
}

impl ConfusionTally {
    fn counts(&self, class: GenderLabel) -> (usize, usize, usize) {
        match class {
            GenderLabel::Male => (self.tp_m, self.fp_m, self.fn_m),
            GenderLabel::Female => (self.tp_f, self.fp_f, self.fn_f),
            _ => (0, 0, 0),
        }
    }

    /// Predictions of the opposite binary gender.
    pub fn misgendered(&self) -> usize {
        self.fp_m + self.fp_f
    }
}

pub fn compute_confusion(records: &[ClassifiedRecord], options: MetricOptions) -> Result<ConfusionTally> {
    let mut t = ConfusionTally::default();
    for r in records {
        let gold = r
            .source
            .gold_gender
            .filter(|g| g.is_binary())
            .ok_or_else(|| Error::Invalid(format!("record {} has no gold gender", r.source.id)))?;
        t.total += 1;
        let hit = match r.predicted {
            GenderLabel::Neutral => {
                t.neutral_count += 1;
                options.neutral_as_positive
            }
            GenderLabel::Ambiguous => {
                t.ambiguous_count += 1;
                false
            }
            p if p == gold => true,
            _ => {
                match gold {
                    GenderLabel::Male => t.fp_f += 1,
                    _ => t.fp_m += 1,
                }
                false
            }
        };
        match (gold, hit) {
            (GenderLabel::Male, true) => t.tp_m += 1,
            (GenderLabel::Male, false) => t.fn_m += 1,
            (_, true) => t.tp_f += 1,
            (_, false) => t.fn_f += 1,
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 for one binary class; zero denominators give 0.
pub fn class_f1(tally: &ConfusionTally, class: GenderLabel) -> ClassScores {
    let (tp, fp, fn_) = tally.counts(class);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassScores { precision, recall, f1 }
}

fn macro_f1(tally: &ConfusionTally) -> f64 {
    (class_f1(tally, GenderLabel::Male).f1 + class_f1(tally, GenderLabel::Female).f1) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinomtReport {
    pub acc: f64,
    pub delta_g: f64,
    /// `None` when the pro or anti group is empty.
    pub delta_s: Option<f64>,
    pub n: f64,
    pub f1_male: f64,
    pub f1_female: f64,
    pub male: ClassScores,
    pub female: ClassScores,
    pub macro_f1_pro: Option<f64>,
    pub macro_f1_anti: Option<f64>,
    pub misgendered: f64,
    pub tally: ConfusionTally,
    pub pro_count: usize,
    pub anti_count: usize,
    pub excluded_unlisted: usize,
    pub excluded_failed: usize,
}

pub fn compute_winomt(records: &[ClassifiedRecord], options: MetricOptions) -> Result<WinomtReport> {
    if records.is_empty() {
        return Err(Error::Invalid("WinoMT evaluation needs at least one record".into()));
    }
    let tally = compute_confusion(records, options)?;
    let total = tally.total as f64;
    let male = class_f1(&tally, GenderLabel::Male);
    let female = class_f1(&tally, GenderLabel::Female);

    let group = |tag: Stereotype| -> Result<(usize, Option<f64>)> {
        let subset: Vec<ClassifiedRecord> = records
            .iter()
            .filter(|r| r.source.stereotype == Some(tag))
            .cloned()
            .collect();
        if subset.is_empty() {
            return Ok((0, None));
        }
        let t = compute_confusion(&subset, options)?;
        Ok((subset.len(), Some(100.0 * macro_f1(&t))))
    };
    let (pro_count, macro_f1_pro) = group(Stereotype::Pro)?;
    let (anti_count, macro_f1_anti) = group(Stereotype::Anti)?;
    let delta_s = match (macro_f1_pro, macro_f1_anti) {
        (Some(p), Some(a)) => Some(p - a),
        _ => {
            log::warn!("ΔS undefined: pro group has {pro_count} records, anti group {anti_count}");
            None
        }
    };

    let non_gendered = if options.strict {
        tally.neutral_count
    } else {
        tally.neutral_count + tally.ambiguous_count
    };
    Ok(WinomtReport {
        acc: 100.0 * (tally.tp_m + tally.tp_f) as f64 / total,
        delta_g: 100.0 * (male.f1 - female.f1),
        delta_s,
        n: 100.0 * non_gendered as f64 / total,
        f1_male: 100.0 * male.f1,
        f1_female: 100.0 * female.f1,
        male,
        female,
        macro_f1_pro,
        macro_f1_anti,
        misgendered: 100.0 * tally.misgendered() as f64 / total,
        tally,
        pro_count,
        anti_count,
        excluded_unlisted: records.len() - pro_count - anti_count,
        excluded_failed: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantScore {
    pub count: usize,
    pub p_m: f64,
    pub p_w: f64,
    pub p_n: f64,
    /// Percentage translated with the friend's true gender.
    pub true_label: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtscReport {
    pub quadrants: BTreeMap<Quadrant, QuadrantScore>,
    pub excluded_failed: usize,
}

pub fn compute_otsc(records: &[ClassifiedRecord]) -> Result<OtscReport> {
    let mut by_quadrant: BTreeMap<Quadrant, Vec<&ClassifiedRecord>> = BTreeMap::new();
    for r in records {
        let q = r
            .source
            .quadrant()
            .ok_or_else(|| Error::Invalid(format!("record {} is not an OTSC record", r.source.id)))?;
        by_quadrant.entry(q).or_default().push(r);
    }
    let mut quadrants = BTreeMap::new();
    for q in Quadrant::ALL {
        let rs = by_quadrant
            .get(&q)
            .ok_or_else(|| Error::Invalid(format!("OTSC quadrant {} has no evaluated sentences", q.as_str())))?;
        let n = rs.len() as f64;
        let count = |label: GenderLabel| rs.iter().filter(|r| r.predicted == label).count() as f64;
        let (male, female) = (count(GenderLabel::Male), count(GenderLabel::Female));
        let hits = rs.iter().filter(|r| Some(r.predicted) == r.source.gold_gender).count() as f64;
        quadrants.insert(
            q,
            QuadrantScore {
                count: rs.len(),
                p_m: 100.0 * male / n,
                p_w: 100.0 * female / n,
                p_n: 100.0 * (n - male - female) / n,
                true_label: 100.0 * hits / n,
            },
        );
    }
    Ok(OtscReport {
        quadrants,
        excluded_failed: 0,
    })
}
