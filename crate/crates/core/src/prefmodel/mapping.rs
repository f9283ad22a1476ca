use alloc::vec::Vec;

use super::ModelError;
use crate::model::Score;

/// Rounds half-up to two decimals. The tiny bias absorbs binary
/// representation error of decimal inputs such as `2.675`.
pub fn round_cents(x: f64) -> f64 {
    libm::floor(x * 100.0 + 0.5 + 1e-9) / 100.0
}

/// Maps raw model values onto `[min(S) − 0.5, max(S) + 0.5]`, `S` being the
/// training scores.
///
/// The affine map sends the smallest value among scored applications to the
/// lower end and the largest to the upper end; other applications are
/// clamped into the interval. Unscored applications (`human[i] == 0`) get 0.
/// When every scored value is equal, scored applications get the midpoint.
pub fn map_to_scores(values: &[f64], human: &[Score], training_scores: &[Score]) -> Result<Vec<f64>, ModelError> {
    if values.len() != human.len() {
        return Err(ModelError::LengthMismatch { values: values.len(), scores: human.len() });
    }
    let assigned = training_scores.iter().filter(|s| s.is_scored()).map(|s| s.value());
    let (lo_s, hi_s) = assigned
        .fold(None, |acc: Option<(u8, u8)>, s| match acc {
            None => Some((s, s)),
            Some((lo, hi)) => Some((lo.min(s), hi.max(s))),
        })
        .ok_or(ModelError::EmptyTrainingScores)?;
    let lo = f64::from(lo_s) - 0.5;
    let hi = f64::from(hi_s) + 0.5;

    let scored = values.iter().zip(human).filter(|(_, h)| h.is_scored()).map(|(v, _)| *v);
    let (v_min, v_max) = scored.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));

    Ok(values
        .iter()
        .zip(human)
        .map(|(v, h)| {
            if !h.is_scored() {
                return 0.0;
            }
            let mapped = if v_max > v_min { lo + (v - v_min) / (v_max - v_min) * (hi - lo) } else { 0.5 * (lo + hi) };
            round_cents(mapped.clamp(lo, hi))
        })
        .collect())
}
