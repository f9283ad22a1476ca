//! Descriptive statistics for box plots, density curves, the kurtosis
//! report and per-section review durations.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{AppId, Section};
use crate::session::ScoreEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("series is empty")]
    EmptySeries,
    #[error("bandwidth must be positive")]
    NonPositiveBandwidth,
    #[error("series has zero variance or fewer than two values")]
    DegenerateSeries,
    #[error("series contains a non-finite value")]
    NonFinite,
}

/// Five-number summary plus Tukey whiskers and outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

impl BoxStats {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    /// Tukey fences `(q1 - 1.5 IQR, q3 + 1.5 IQR)`.
    pub fn fences(&self) -> (f64, f64) {
        let spread = 1.5 * self.iqr();
        (self.q1 - spread, self.q3 + spread)
    }
}

fn sorted_finite(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySeries);
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// Quantile of sorted data by linear interpolation between order
/// statistics (`h = (n - 1) p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats, StatsError> {
    let sorted = sorted_finite(values)?;
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let spread = 1.5 * (q3 - q1);
    let (lo_fence, hi_fence) = (q1 - spread, q3 + spread);
    let mut inside = sorted.iter().copied().filter(|x| *x >= lo_fence && *x <= hi_fence);
    let lower_whisker = inside.clone().next().unwrap_or(q1);
    let upper_whisker = inside.next_back().unwrap_or(q3);
    let outliers = sorted.iter().copied().filter(|x| *x < lo_fence || *x > hi_fence).collect();
    Ok(BoxStats {
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        lower_whisker,
        upper_whisker,
        outliers,
    })
}

/// Number of evaluation points of a density curve.
pub const KDE_GRID_POINTS: usize = 128;
/// The grid extends this many bandwidths beyond the data range.
pub const KDE_GRID_PAD: f64 = 3.0;
/// Bandwidth used for zero-variance series.
pub const KDE_FLOOR_BANDWIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Silverman's rule of thumb.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityCurve {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.grid.windows(2).zip(self.density.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
    }
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
fn sample_sd(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n < 2 {
        return 0.0;
    }
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let ss: f64 = sorted.iter().map(|x| (x - mean) * (x - mean)).sum();
    libm::sqrt(ss / (n - 1) as f64)
}

/// Silverman's rule `0.9 min(sd, IQR / 1.34) n^(-1/5)`. Falls back to the
/// standard deviation when the IQR is zero and to the floor bandwidth when
/// the series is constant.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let sd = sample_sd(sorted);
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        (true, false) => sd,
        _ => return KDE_FLOOR_BANDWIDTH,
    };
    0.9 * spread * libm::pow(sorted.len() as f64, -0.2)
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian kernel density estimate on a fixed grid, scaled so its
/// trapezoidal integral over the grid is 1.
pub fn kde(values: &[f64], bandwidth: Bandwidth) -> Result<DensityCurve, StatsError> {
    if let Bandwidth::Fixed(h) = bandwidth {
        if !(h.is_finite() && h > 0.0) {
            return Err(StatsError::NonPositiveBandwidth);
        }
    }
    let sorted = sorted_finite(values)?;
    let h = match bandwidth {
        Bandwidth::Auto => silverman_bandwidth(&sorted),
        Bandwidth::Fixed(h) => h,
    };
    let lo = sorted[0] - KDE_GRID_PAD * h;
    let hi = sorted[sorted.len() - 1] + KDE_GRID_PAD * h;
    let step = (hi - lo) / (KDE_GRID_POINTS - 1) as f64;
    let norm = INV_SQRT_2PI / (sorted.len() as f64 * h);
    let grid: Vec<f64> = (0..KDE_GRID_POINTS).map(|g| lo + step * g as f64).collect();
    let density = grid
        .iter()
        .map(|x| {
            let s: f64 = sorted
                .iter()
                .map(|xi| {
                    let z = (x - xi) / h;
                    libm::exp(-0.5 * z * z)
                })
                .sum();
            norm * s
        })
        .collect();
    let mut curve = DensityCurve { grid, density, bandwidth: h };
    // the grid truncates the tails and undersamples data spread far wider
    // than the bandwidth
    let mass = curve.integral();
    for d in &mut curve.density {
        *d /= mass;
    }
    Ok(curve)
}

/// Pearson (non-excess) kurtosis `m4 / m2^2` with population moments.
pub fn kurtosis(values: &[f64]) -> Result<f64, StatsError> {
    if values.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if values.len() < 2 {
        return Err(StatsError::DegenerateSeries);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in values {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if m2 <= 0.0 {
        return Err(StatsError::DegenerateSeries);
    }
    Ok(m4 / (m2 * m2))
}

/// Time spent on one (application, section), derived from the score log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionDuration {
    pub app_id: AppId,
    pub section: Section,
    pub millis: u64,
    pub seconds: f64,
}

/// Attributes the gap between consecutive scoring events to the earlier
/// event's (application, section); the first event is credited with the
/// time since session start. Output is sorted by key.
pub fn section_durations(log: &[ScoreEvent]) -> Vec<SectionDuration> {
    let mut totals: BTreeMap<(AppId, Section), u64> = BTreeMap::new();
    if let Some(first) = log.first() {
        *totals.entry((first.app_id, first.section)).or_default() += first.timestamp;
    }
    for pair in log.windows(2) {
        let gap = pair[1].timestamp.saturating_sub(pair[0].timestamp);
        *totals.entry((pair[0].app_id, pair[0].section)).or_default() += gap;
    }
    totals
        .into_iter()
        .map(|((app_id, section), millis)| SectionDuration { app_id, section, millis, seconds: millis as f64 / 1000.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Score;
    use crate::session::Origin;
    use proptest::prelude::*;

    /// Independent percentile oracle: position `p (n - 1)` on the sorted
    /// array, blended between its neighbours.
    fn oracle_quantile(values: &[f64], p: f64) -> f64 {
        let mut s = values.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pos = p * (s.len() as f64 - 1.0);
        let below = pos.floor();
        let above = pos.ceil();
        if below == above {
            return s[below as usize];
        }
        s[below as usize] * (above - pos) + s[above as usize] * (pos - below)
    }

    #[test]
    fn five_values() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert!(b.outliers.is_empty());
        assert_eq!((b.lower_whisker, b.upper_whisker), (1.0, 5.0));
    }

    #[test]
    fn singleton() {
        let b = box_stats(&[7.0]).unwrap();
        for v in [b.min, b.q1, b.median, b.q3, b.max, b.lower_whisker, b.upper_whisker] {
            assert_eq!(v, 7.0);
        }
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn outlier_listed() {
        let b = box_stats(&[1.0, 1.0, 1.0, 1.0, 100.0]).unwrap();
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.upper_whisker, 1.0);
        assert_eq!(b.q3, oracle_quantile(&[1.0, 1.0, 1.0, 1.0, 100.0], 0.75));
    }

    #[test]
    fn empty_series() {
        assert_eq!(box_stats(&[]), Err(StatsError::EmptySeries));
        assert_eq!(kde(&[], Bandwidth::Auto), Err(StatsError::EmptySeries));
    }

    #[test]
    fn kde_single_value_peaks_at_value() {
        let c = kde(&[2.5], Bandwidth::Fixed(0.5)).unwrap();
        assert_eq!(c.grid.len(), KDE_GRID_POINTS);
        let peak = c.density.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| c.grid[i]).unwrap();
        let step = c.grid[1] - c.grid[0];
        assert!((peak - 2.5).abs() <= step);
        assert!((c.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kde_two_distant_values_match_mixture() {
        let h = 1.0;
        let c = kde(&[0.0, 10.0], Bandwidth::Fixed(h)).unwrap();
        let gauss =
            |x: f64, mu: f64| (-(x - mu) * (x - mu) / (2.0 * h * h)).exp() / (h * (2.0 * core::f64::consts::PI).sqrt());
        let (lo, hi) = (c.grid[0], c.grid[KDE_GRID_POINTS - 1]);
        assert_eq!((lo, hi), (-3.0, 13.0));
        // the ±3h grid holds 99.73% of each kernel's mass
        let scale = c.density[0] / (0.5 * gauss(lo, 0.0) + 0.5 * gauss(lo, 10.0));
        assert!((scale - 1.0).abs() < 5e-3);
        for (x, d) in c.grid.iter().zip(&c.density) {
            let expected = 0.5 * gauss(*x, 0.0) + 0.5 * gauss(*x, 10.0);
            assert!((d - scale * expected).abs() < 1e-12);
        }
        assert!((c.integral() - 1.0).abs() < 1e-6);
        // bimodal: density at the midpoint is far below the peaks
        let mid = c.grid.iter().position(|x| *x >= 5.0).unwrap();
        let peak = c.density.iter().cloned().fold(0.0, f64::max);
        assert!(c.density[mid] < 0.01 * peak);
    }

    #[test]
    fn kde_rejects_zero_bandwidth() {
        assert_eq!(kde(&[1.0], Bandwidth::Fixed(0.0)), Err(StatsError::NonPositiveBandwidth));
    }

    #[test]
    fn kde_constant_series_uses_floor() {
        let c = kde(&[0.0; 12], Bandwidth::Auto).unwrap();
        assert_eq!(c.bandwidth, KDE_FLOOR_BANDWIDTH);
        assert!((c.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kde_wide_spread_still_unit_mass() {
        let c = kde(&[0.0, 0.3, 1000.0], Bandwidth::Fixed(0.5)).unwrap();
        assert!((c.integral() - 1.0).abs() < 1e-12);
        assert!(c.density.iter().all(|d| d.is_finite() && *d >= 0.0));
    }

    #[test]
    fn kurtosis_two_point() {
        let v: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        assert_eq!(kurtosis(&v).unwrap(), 1.0);
        assert_eq!(kurtosis(&[3.0; 5]), Err(StatsError::DegenerateSeries));
        assert_eq!(kurtosis(&[3.0]), Err(StatsError::DegenerateSeries));
    }

    fn ev(seq: u64, t: u64, app: u64, section: Section) -> ScoreEvent {
        ScoreEvent {
            seq,
            timestamp: t,
            app_id: AppId(app),
            section,
            score: Score::new(3).unwrap(),
            origin: Origin::Manual,
        }
    }

    #[test]
    fn durations_credit_earlier_event() {
        let d = section_durations(&[ev(1, 0, 1, Section::EB), ev(2, 30_000, 1, Section::Com)]);
        let eb = d.iter().find(|d| d.section == Section::EB).unwrap();
        assert_eq!(eb.seconds, 30.0);
        assert!(section_durations(&[]).is_empty());
    }

    #[test]
    fn durations_accumulate_per_key() {
        let log = [ev(1, 0, 1, Section::EB), ev(2, 10_000, 1, Section::EB), ev(3, 25_000, 2, Section::EB)];
        let d = section_durations(&log);
        // pairwise-difference oracle
        let mut oracle: BTreeMap<(AppId, Section), u64> = BTreeMap::new();
        *oracle.entry((log[0].app_id, log[0].section)).or_default() += log[0].timestamp;
        for i in 0..log.len() - 1 {
            *oracle.entry((log[i].app_id, log[i].section)).or_default() += log[i + 1].timestamp - log[i].timestamp;
        }
        for sd in &d {
            assert_eq!(sd.millis, oracle[&(sd.app_id, sd.section)]);
        }
        assert_eq!(d[0].seconds, 25.0);
    }

    proptest! {
        #[test]
        fn box_stats_match_oracle(values in proptest::collection::vec(-1e3f64..1e3, 1..200)) {
            let b = box_stats(&values).unwrap();
            prop_assert!((b.q1 - oracle_quantile(&values, 0.25)).abs() <= 1e-9);
            prop_assert!((b.median - oracle_quantile(&values, 0.5)).abs() <= 1e-9);
            prop_assert!((b.q3 - oracle_quantile(&values, 0.75)).abs() <= 1e-9);
            prop_assert!(b.min <= b.q1 && b.q1 <= b.median && b.median <= b.q3 && b.q3 <= b.max);
            prop_assert!(b.min <= b.lower_whisker && b.upper_whisker <= b.max);
            let (lo, hi) = b.fences();
            for o in &b.outliers {
                prop_assert!(*o < lo || *o > hi);
            }
        }

        #[test]
        fn kde_is_permutation_invariant(values in proptest::collection::vec(-50f64..50.0, 1..60), rot in 0usize..60) {
            let a = kde(&values, Bandwidth::Auto).unwrap();
            let mut shuffled = values.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let b = kde(&shuffled, Bandwidth::Auto).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!((a.integral() - 1.0).abs() < 1e-6);
            prop_assert!(a.density.iter().all(|d| *d >= 0.0));
        }

        #[test]
        fn kurtosis_affine_invariant(
            values in proptest::collection::vec(-100f64..100.0, 2..100),
            a in prop_oneof![-20f64..-0.1, 0.1f64..20.0],
            b in -1e3f64..1e3,
        ) {
            if let Ok(k) = kurtosis(&values) {
                let mapped: Vec<f64> = values.iter().map(|x| a * x + b).collect();
                let k2 = kurtosis(&mapped).unwrap();
                prop_assert!((k - k2).abs() <= 1e-9 * k.max(1.0));
            }
        }

        #[test]
        fn durations_sum_to_last_timestamp(gaps in proptest::collection::vec((0u64..100_000, 1u64..5, 0usize..4), 1..100)) {
            let mut t = 0;
            let log: Vec<ScoreEvent> = gaps.iter().enumerate().map(|(i, (g, app, s))| {
                t += g;
                ev(i as u64 + 1, t, *app, Section::ALL[*s])
            }).collect();
            let total: u64 = section_durations(&log).iter().map(|d| d.millis).sum();
            prop_assert_eq!(total, log.last().unwrap().timestamp);
        }
    }
}
