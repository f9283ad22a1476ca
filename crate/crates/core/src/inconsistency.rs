//! Disagreements between a reviewer and their own preference model, and
//! unusual time allocation.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{AppId, Section};
use crate::stats::{box_stats, SectionDuration};

/// Default "close to" threshold, half a score step.
pub const DEFAULT_TAU: f64 = 0.5;
/// Fewest durations in a section for the fences to mean anything.
pub const MIN_DURATIONS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InconsistencyError {
    #[error("{ids} ids, {human} human scores and {preds} predictions")]
    LengthMismatch { ids: usize, human: usize, preds: usize },
    #[error("section {section} has {got} durations, need at least {min}", min = MIN_DURATIONS)]
    TooFewObservations { section: Section, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Human score above the prediction.
    Higher,
    Lower,
    Close,
}

impl Direction {
    pub fn mirrored(self) -> Direction {
        match self {
            Direction::Higher => Direction::Lower,
            Direction::Lower => Direction::Higher,
            Direction::Close => Direction::Close,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationClass {
    pub app_id: AppId,
    pub section: Section,
    pub class: Direction,
    /// Human score minus prediction.
    pub delta: f64,
}

fn cents(x: f64) -> i64 {
    libm::round(x * 100.0) as i64
}

/// Classifies `human − pred` against `tau`. Both sides are two-decimal
/// scores, so the difference is taken in hundredths to keep boundary cases
/// such as `3 − 3.50` exact. `|delta| == tau` is `Close`.
pub fn classify(human: f64, pred: f64, tau: f64) -> (Direction, f64) {
    let delta = (cents(human) - cents(pred)) as f64 / 100.0;
    let class = if delta > tau {
        Direction::Higher
    } else if delta < -tau {
        Direction::Lower
    } else {
        Direction::Close
    };
    (class, delta)
}

/// One class per scored application (human score nonzero).
pub fn classify_deviations(
    section: Section,
    ids: &[AppId],
    human: &[f64],
    preds: &[f64],
    tau: f64,
) -> Result<Vec<DeviationClass>, InconsistencyError> {
    if ids.len() != human.len() || human.len() != preds.len() {
        return Err(InconsistencyError::LengthMismatch { ids: ids.len(), human: human.len(), preds: preds.len() });
    }
    Ok(ids
        .iter()
        .zip(human)
        .zip(preds)
        .filter(|((_, h), _)| **h != 0.0)
        .map(|((id, h), p)| {
            let (class, delta) = classify(*h, *p, tau);
            DeviationClass { app_id: *id, section, class, delta }
        })
        .collect())
}

/// Share of scored applications classified `Close`.
pub fn close_share(classes: &[DeviationClass]) -> Option<f64> {
    if classes.is_empty() {
        return None;
    }
    let close = classes.iter().filter(|c| c.class == Direction::Close).count();
    Some(close as f64 / classes.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InversionPair {
    pub app_a: AppId,
    pub app_b: AppId,
}

/// Pairs whose human order and predicted order strictly disagree. Pairs
/// tied on either scale and unscored applications are skipped.
pub fn find_inversions(ids: &[AppId], human: &[f64], preds: &[f64]) -> Result<Vec<InversionPair>, InconsistencyError> {
    if ids.len() != human.len() || human.len() != preds.len() {
        return Err(InconsistencyError::LengthMismatch { ids: ids.len(), human: human.len(), preds: preds.len() });
    }
    let scored: Vec<usize> = (0..ids.len()).filter(|k| human[*k] != 0.0).collect();
    let mut out = Vec::new();
    for (n, &a) in scored.iter().enumerate() {
        for &b in &scored[n + 1..] {
            let dh = cents(human[a]) - cents(human[b]);
            let dp = cents(preds[a]) - cents(preds[b]);
            if (dh > 0 && dp < 0) || (dh < 0 && dp > 0) {
                out.push(InversionPair { app_a: ids[a], app_b: ids[b] });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnomalyKind {
    TooShort,
    TooLong,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAnomaly {
    pub app_id: AppId,
    pub section: Section,
    pub seconds: f64,
    pub kind: AnomalyKind,
}

/// Tukey-fence outliers among the durations of each section.
///
/// Every section present needs at least four durations. A section whose
/// durations have zero IQR yields no anomalies.
pub fn flag_time_anomalies(durations: &[SectionDuration]) -> Result<Vec<TimeAnomaly>, InconsistencyError> {
    let mut by_section: BTreeMap<Section, Vec<&SectionDuration>> = BTreeMap::new();
    for d in durations {
        by_section.entry(d.section).or_default().push(d);
    }
    for (section, ds) in &by_section {
        if ds.len() < MIN_DURATIONS {
            return Err(InconsistencyError::TooFewObservations { section: *section, got: ds.len() });
        }
    }
    let mut out = Vec::new();
    for (section, ds) in by_section {
        let secs: Vec<f64> = ds.iter().map(|d| d.seconds).collect();
        let stats = box_stats(&secs).expect("at least four finite durations");
        if stats.iqr() <= 0.0 {
            continue;
        }
        let (lo, hi) = stats.fences();
        for d in ds {
            let kind = if d.seconds < lo {
                AnomalyKind::TooShort
            } else if d.seconds > hi {
                AnomalyKind::TooLong
            } else {
                continue;
            };
            out.push(TimeAnomaly { app_id: d.app_id, section, seconds: d.seconds, kind });
        }
    }
    Ok(out)
}
