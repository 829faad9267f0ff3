//! Deterministic synthetic translators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::corpus::{GenderLabel, SourceSentence, StereotypeLists, Suite};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MockSpec {
    AlwaysMale,
    AlwaysFemale,
    /// Pronouns follow the gold gender.
    EchoGold,
    /// No gendered pronoun at all.
    Neutralizing,
    /// Male with probability `p_male`, drawn per item from `(seed, id)`.
    CoinFlip { seed: u64, p_male: f64 },
    /// Gender the lists associate with the occupation; male when unlisted.
    StereotypeFollower(StereotypeLists),
}

/// Per-item generator keyed on the seed and the source id, so a draw does
/// not depend on which other items are in the batch or their order.
fn item_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn occupation(source: &SourceSentence) -> &str {
    source.occupation.as_deref().unwrap_or("worker")
}

/// English rendering for a source; `None` renders without gendered pronouns.
fn render(source: &SourceSentence, gender: Option<GenderLabel>) -> String {
    let (subject, object) = match gender {
        Some(GenderLabel::Male) => ("he", "him"),
        Some(GenderLabel::Female) => ("she", "her"),
        _ => ("", ""),
    };
    match (source.suite, gender.is_some()) {
        (Suite::Otsc, true) => format!(
            "I have known {object} for a long time, my friend works as a {}.",
            occupation(source)
        ),
        (Suite::Otsc, false) => format!(
            "I have known my friend for a long time, my friend works as a {}.",
            occupation(source)
        ),
        (Suite::Winomt, true) => format!("The {} said that {subject} would help.", occupation(source)),
        (Suite::Winomt, false) => format!("The {} asks what to do to help.", occupation(source)),
        (Suite::Neutral, true) => {
            let mut cap = subject.to_string();
            cap[..1].make_ascii_uppercase();
            format!("{cap} is a good person.")
        }
        (Suite::Neutral, false) => "This person is good.".to_string(),
    }
}

pub fn mock_translate(source: &SourceSentence, spec: &MockSpec) -> Result<String> {
    let gender = match spec {
        MockSpec::AlwaysMale => Some(GenderLabel::Male),
        MockSpec::AlwaysFemale => Some(GenderLabel::Female),
        MockSpec::Neutralizing => None,
        MockSpec::EchoGold => Some(
            source
                .gold_gender
                .filter(|g| g.is_binary())
                .ok_or_else(|| Error::Mock(format!("echo-gold needs a gold gender on record {}", source.id)))?,
        ),
        MockSpec::CoinFlip { seed, p_male } => {
            let male = item_rng(*seed, &source.id).random_bool(p_male.clamp(0.0, 1.0));
            Some(if male { GenderLabel::Male } else { GenderLabel::Female })
        }
        MockSpec::StereotypeFollower(lists) => {
            let occ = source.occupation.as_deref().ok_or_else(|| {
                Error::Mock(format!("stereotype-follower needs an occupation on record {}", source.id))
            })?;
            Some(lists.associated_gender(occ).unwrap_or(GenderLabel::Male))
        }
    };
    Ok(render(source, gender))
}
