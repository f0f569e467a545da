//! Small statistics toolbox shared by the estimators: moments, bootstrap
//! resampling, (weighted) least squares, and an exact binomial tail.

use crate::rng::seeded_rng;
use crate::{Error, Result};
use rand::RngExt;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub fn mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "mean of empty slice");
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance (n−1 denominator). Zero for constant input.
pub fn sample_variance(values: &[f64]) -> f64 {
    assert!(values.len() >= 2, "variance needs at least 2 values");
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    let se = (sample_variance(values) / values.len() as f64).sqrt();
    (m, se)
}

/// Bootstrap standard error of `stat` over `resamples` with-replacement
/// resamples of `values`. Deterministic given `seed`.
pub fn bootstrap_stderr<F>(values: &[f64], stat: F, resamples: usize, seed: u64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    assert!(values.len() >= 2 && resamples >= 2);
    let mut rng = seeded_rng(seed);
    let mut scratch = vec![0.0; values.len()];
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for slot in scratch.iter_mut() {
            *slot = values[rng.random_range(0..values.len())];
        }
        stats.push(stat(&scratch));
    }
    sample_variance(&stats).sqrt()
}

/// One standard normal draw via Box–Muller (avoids an extra dependency for
/// the couple of places that need Gaussian noise).
pub fn normal01(rng: &mut impl RngExt) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // in (0, 1]
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Ordinary least squares line `y = intercept + slope·x`.
pub fn ols_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let w = vec![1.0; xs.len()];
    let (slope, intercept, _) = wls_line(xs, ys, &w)?;
    Ok((slope, intercept))
}

/// Weighted least squares line fit.
///
/// Weights are inverse variances of the `ys`; the returned `slope_stderr`
/// is the usual 1/√Σw(x−x̄)² expression, exact when weights are correct.
/// Returns `(slope, intercept, slope_stderr)`.
pub fn wls_line(xs: &[f64], ys: &[f64], ws: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() < 3 || xs.len() != ys.len() || xs.len() != ws.len() {
        return Err(Error::Estimation(format!(
            "line fit needs >= 3 points with matching weights, got {}",
            xs.len()
        )));
    }
    if ws.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(Error::Estimation("nonpositive fit weight".into()));
    }
    let sw: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ybar = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        sxx += w * (x - xbar) * (x - xbar);
        sxy += w * (x - xbar) * (y - ybar);
    }
    if sxx <= 0.0 {
        return Err(Error::Estimation("degenerate abscissa in line fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    Ok((slope, intercept, (1.0 / sxx).sqrt()))
}

/// Exact upper tail P(Bin(m, p) >= j0).
///
/// Stable multiplicative recurrence over the pmf; fine for the m values the
/// model uses (hundreds at most).
pub fn binom_tail_geq(m: usize, p: f64, j0: usize) -> f64 {
    assert!((0.0..=1.0).contains(&p));
    if j0 == 0 {
        return 1.0;
    }
    if j0 > m {
        return 0.0;
    }
    if p == 0.0 {
        return 0.0; // j0 >= 1 unreachable
    }
    if p == 1.0 {
        return 1.0; // mass at m >= j0
    }
    // pmf(0), then pmf(j+1) = pmf(j) * (m-j)/(j+1) * p/(1-p)
    let ratio = p / (1.0 - p);
    let mut pmf = (1.0 - p).powi(m as i32);
    let mut tail = if j0 == 0 { pmf } else { 0.0 };
    for j in 0..m {
        pmf *= (m - j) as f64 / (j + 1) as f64 * ratio;
        if j + 1 >= j0 {
            tail += pmf;
        }
    }
    tail.clamp(0.0, 1.0)
}
