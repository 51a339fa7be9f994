//! Bootstrap confidence intervals for differences in mean.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hypothesis::mean;
use super::StatsError;
use crate::compliance::{ComplianceStatus, VideoComplianceRecord};

pub const MIN_BOOT: usize = 100;
pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    /// Empirical 2.5th and 97.5th percentiles of the resampled differences,
    /// linearly interpolated between order statistics.
    Percentile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    /// Set when the estimate is a compliance-status share difference.
    pub metric: Option<ComplianceStatus>,
    /// `mean(b) - mean(a)`.
    pub delta: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub interval_method: IntervalMethod,
    pub n_boot: usize,
    pub seed: u64,
    pub n_a: usize,
    pub n_b: usize,
    /// The interval excludes zero.
    pub significant: bool,
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn resample_mean(xs: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let n = xs.len();
    (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64
}

/// Resampled differences `mean(b*) - mean(a*)`, unsorted. Iteration `i`
/// uses ChaCha8 seeded with `seed` on stream `i`.
pub fn bootstrap_differences(a: &[f64], b: &[f64], n_boot: usize, seed: u64) -> Vec<f64> {
    (0..n_boot)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let ma = resample_mean(a, &mut rng);
            let mb = resample_mean(b, &mut rng);
            mb - ma
        })
        .collect()
}

pub fn bootstrap_mean_difference(
    a: &[f64],
    b: &[f64],
    n_boot: usize,
    seed: u64,
) -> Result<EffectEstimate, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if n_boot < MIN_BOOT {
        return Err(StatsError::TooFewResamples(n_boot));
    }
    let mut diffs = bootstrap_differences(a, b, n_boot, seed);
    diffs.sort_by(f64::total_cmp);
    let tail = (1.0 - CONFIDENCE) / 2.0;
    let ci_low = quantile_sorted(&diffs, tail);
    let ci_high = quantile_sorted(&diffs, 1.0 - tail);
    Ok(EffectEstimate {
        metric: None,
        delta: mean(b) - mean(a),
        ci_low,
        ci_high,
        confidence: CONFIDENCE,
        interval_method: IntervalMethod::Percentile,
        n_boot,
        seed,
        n_a: a.len(),
        n_b: b.len(),
        significant: ci_low > 0.0 || ci_high < 0.0,
    })
}

/// Percent of analyzed affiliate videos with `status == metric`, one 0/100
/// indicator per video.
pub fn status_indicators(records: &[VideoComplianceRecord], metric: ComplianceStatus) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.is_affiliate_video && r.disclosure_analyzed)
        .map(|r| if r.status == metric { 100.0 } else { 0.0 })
        .collect()
}

/// Effect of moving from group `a` to group `b` on the share (in percent)
/// of analyzed affiliate videos with the given status.
pub fn bootstrap_effect(
    a: &[VideoComplianceRecord],
    b: &[VideoComplianceRecord],
    metric: ComplianceStatus,
    n_boot: usize,
    seed: u64,
) -> Result<EffectEstimate, StatsError> {
    let xa = status_indicators(a, metric);
    let xb = status_indicators(b, metric);
    let mut e = bootstrap_mean_difference(&xa, &xb, n_boot, seed)?;
    e.metric = Some(metric);
    Ok(e)
}
