//! Two-proportion z-test, Welch's t-test and Pearson correlation.

use serde::{Deserialize, Serialize};

use super::dist::{normal_two_sided, t_two_sided};
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub p1: f64,
    pub p2: f64,
    pub z: f64,
    /// Two-sided.
    pub p_value: f64,
    /// Pooled proportion of 0 or 1: no variance, z is reported as 0.
    pub degenerate: bool,
}

/// Pooled two-proportion z-test of `x1/n1` against `x2/n2`.
pub fn ztest_proportions(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<ZTest, StatsError> {
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::EmptySample);
    }
    if x1 > n1 || x2 > n2 {
        return Err(StatsError::InvalidCounts(format!(
            "successes exceed trials ({x1}/{n1}, {x2}/{n2})"
        )));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let p1 = x1 as f64 / n1f;
    let p2 = x2 as f64 / n2f;
    let pooled = (x1 + x2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return Ok(ZTest {
            p1,
            p2,
            z: 0.0,
            p_value: 1.0,
            degenerate: true,
        });
    }
    let z = (p1 - p2) / se;
    Ok(ZTest {
        p1,
        p2,
        z,
        p_value: normal_two_sided(z),
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub df: f64,
    pub p_value: f64,
    /// Both samples constant.
    pub degenerate: bool,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn welch_ttest(a: &[f64], b: &[f64]) -> Result<WelchTest, StatsError> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(StatsError::TooFewObservations {
                needed: 2,
                got: s.len(),
            });
        }
    }
    let (ma, mb) = (mean(a), mean(b));
    let va = sample_variance(a, ma) / a.len() as f64;
    let vb = sample_variance(b, mb) / b.len() as f64;
    let se2 = va + vb;
    if se2 == 0.0 {
        let differ = ma != mb;
        return Ok(WelchTest {
            mean_a: ma,
            mean_b: mb,
            t: if differ {
                (ma - mb).signum() * f64::INFINITY
            } else {
                0.0
            },
            df: (a.len() + b.len() - 2) as f64,
            p_value: if differ { 0.0 } else { 1.0 },
            degenerate: true,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    Ok(WelchTest {
        mean_a: ma,
        mean_b: mb,
        t,
        df,
        p_value: t_two_sided(t, df),
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub n: usize,
    /// Two-sided, from `t = r sqrt((n-2)/(1-r^2))` on n-2 degrees of freedom.
    pub p_value: f64,
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<Correlation, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations { needed: 3, got: n });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok(Correlation { r, n, p_value })
}
