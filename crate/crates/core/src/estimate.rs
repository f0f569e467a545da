//! Monte Carlo estimators: the mean-LCS curve and its limiting constant,
//! the one-block replacement gain, variance scaling in the string length,
//! and empirical event frequencies for the typical-partition machinery.
//!
//! Every estimator derives one RNG stream per replicate from its seed, so
//! results are independent of worker count and scheduling. Replicates run
//! under rayon and are aggregated in index order.

use crate::align::{optima_all_typical, optimal_partition, partition_diagnostics, Partition};
use crate::lcs::{lcs_bitparallel, MatchMasks};
use crate::model::{build_coupling_chain, place_blocks, sample_pair, ModelParams, StringSample};
use crate::rng::{derive_seed, seeded_rng, stream_rng, uniform_letters};
use crate::stats::{
    binom_tail_geq, bootstrap_stderr, mean, mean_and_stderr, normal01, sample_variance, wls_line,
    Z95,
};
use crate::{Error, Result};
use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One grid point of the mean-LCS curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCurvePoint {
    /// Length-asymmetry ratio in [-1, 1]; the pair has lengths
    /// `n - trunc(n·q)` and `n + trunc(n·q)`.
    pub q: f64,
    pub n: usize,
    pub reps: usize,
    /// Mean of LCS/n.
    pub gamma_hat: f64,
    /// Standard error of `gamma_hat`.
    pub stderr: f64,
}

/// One-sided difference quotients of the curve at 0 for one grid step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeProbe {
    pub step: f64,
    /// `(gamma(step) - gamma(0)) / step`.
    pub right: f64,
    /// `(gamma(0) - gamma(-step)) / step`.
    pub left: f64,
}

/// Mean-LCS curve over a symmetric q-grid, with the limiting constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurveEstimate {
    pub points: Vec<MeanCurvePoint>,
    /// Fitted n→∞ value at q=0 when an n-grid was supplied; otherwise the
    /// q=0 grid point itself (single-n stand-in, see `estimate_mean_curve`).
    pub gamma_star_hat: f64,
    pub gamma_star_stderr: f64,
    pub derivative_probe: Vec<SlopeProbe>,
}

/// Extrapolation of the q=0 mean toward n→∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaStarFit {
    pub k: usize,
    /// q=0 points, one per grid length.
    pub points: Vec<MeanCurvePoint>,
    /// Fitted limit of the form `gamma* - b·sqrt(log n / n)`.
    pub gamma_star_hat: f64,
    /// Parametric bootstrap standard error of the intercept.
    pub gamma_star_stderr: f64,
    /// Fitted finite-size coefficient `b` (convergence-rate diagnostic).
    pub rate_coeff: f64,
}

/// Mean one-window replacement gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub d: usize,
    pub reps: usize,
    pub inner_reps: usize,
    /// Mean over samples of the inner-averaged score change.
    pub mean_delta: f64,
    /// Normal 95% confidence interval for `mean_delta`.
    pub ci95: (f64, f64),
    /// `mean_delta / d^beta`: the gain per unit of run length.
    pub bias_rate: f64,
    /// Samples discarded for having no run (conditioning on ≥ 1).
    pub rejections: usize,
}

/// Sample variance of the LCS under a chosen string law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub n: usize,
    pub reps: usize,
    pub var_hat: f64,
    /// Bootstrap standard error of `var_hat`.
    pub stderr: f64,
}

/// Which law `estimate_variance` draws from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum VarianceSource {
    /// The planted-run model.
    LongBlock(ModelParams),
    /// Plain iid uniform pairs of equal length.
    Iid { k: usize, n: usize },
}

/// Empirical frequencies of the run-count, typical-optimum, and gain events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventFrequencies {
    pub reps: usize,
    pub eps: f64,
    /// Band asymmetry ratio used for the gap interval.
    pub q: f64,
    /// Fraction of samples with at least `m·p/2` runs present.
    pub freq_enough_blocks: f64,
    /// Exact P(Bin(m, p) ≥ ⌈m·p/2⌉) for comparison.
    pub exact_tail: f64,
    /// Fraction of samples where every best-scoring partition is typical.
    pub freq_optima_typical: f64,
    /// Fraction of samples whose estimated conditional gain at the observed
    /// optimal partition exceeds `d^beta·(rate·(1-2eps) - 2eps)`.
    pub freq_gain_at_opt: f64,
    /// The gain rate used in that threshold (from `estimate_bias`).
    pub bias_rate: f64,
}

/// Mean LCS against an independent partner at one chain level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    /// Number of runs present at this level.
    pub level: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Per-level LCS means along the revert chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPathStats {
    pub reps: usize,
    /// Indexed by level 0..=m.
    pub levels: Vec<LevelStat>,
    /// `increments[l-1]` = mean of LCS(level l-1) - LCS(level l), paired.
    pub increments: Vec<f64>,
    /// Paired mean and stderr of LCS(level 0) - LCS(level m).
    pub drop_mean: f64,
    pub drop_stderr: f64,
    /// Reported diagnostic `(mean per-step increment)^2 · m · p · (1-p)`;
    /// a back-of-envelope lower-bound shape for the LCS variance.
    pub variance_floor: f64,
}

/// Log-log regression of variance against length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

fn check_alphabet(k: usize) -> Result<()> {
    if !(2..=256).contains(&k) {
        return Err(Error::InvalidParam {
            name: "k",
            reason: format!("alphabet size must be in [2, 256], got {k}"),
        });
    }
    Ok(())
}

fn d_pow_beta(d: usize, beta: f64) -> f64 {
    (d as f64).powf(beta)
}

/// Mean and stderr of LCS/n for iid pairs with lengths `n ∓ trunc(n·q)`
/// (rounding toward zero keeps the q ↔ -q symmetry exact).
pub fn estimate_gamma_point(
    k: usize,
    n: usize,
    q: f64,
    reps: usize,
    seed: u64,
) -> Result<MeanCurvePoint> {
    check_alphabet(k)?;
    if n < 1 {
        return Err(Error::InvalidParam {
            name: "n",
            reason: "length scale must be positive".into(),
        });
    }
    if !(-1.0..=1.0).contains(&q) {
        return Err(Error::InvalidParam {
            name: "q",
            reason: format!("asymmetry must lie in [-1, 1], got {q}"),
        });
    }
    if reps < 2 {
        return Err(Error::InvalidParam {
            name: "reps",
            reason: "need at least 2 replicates for a standard error".into(),
        });
    }
    let shift = (n as f64 * q).trunc() as i64;
    let len_a = (n as i64 - shift) as usize;
    let len_b = (n as i64 + shift) as usize;
    let values: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let a = uniform_letters(&mut rng, len_a, k);
            let b = uniform_letters(&mut rng, len_b, k);
            lcs_bitparallel(&a, &b, k) as f64 / n as f64
        })
        .collect();
    let (gamma_hat, stderr) = mean_and_stderr(&values);
    debug_assert!(gamma_hat * n as f64 <= len_a.min(len_b) as f64 + 1e-9);
    Ok(MeanCurvePoint {
        q,
        n,
        reps,
        gamma_hat,
        stderr,
    })
}

/// Pure fit of `gamma(n) = gamma* - b·sqrt(log n / n)` through given points.
/// Returns `(gamma_star, b)`. Exact on noiseless data of that form.
pub fn fit_star_form(ns: &[usize], gammas: &[f64]) -> Result<(f64, f64)> {
    if ns.len() < 3 || ns.len() != gammas.len() {
        return Err(Error::Estimation(format!(
            "limit fit needs >= 3 grid points, got {}",
            ns.len()
        )));
    }
    let feats: Vec<f64> = ns
        .iter()
        .map(|&n| ((n as f64).ln() / n as f64).sqrt())
        .collect();
    let w = vec![1.0; feats.len()];
    let (slope, intercept, _) = wls_line(&feats, gammas, &w)?;
    Ok((intercept, -slope))
}

/// Estimates the q=0 mean at each grid length and extrapolates to n→∞
/// along `gamma* - b·sqrt(log n / n)`.
///
/// The intercept's standard error comes from a parametric bootstrap:
/// each grid point is redrawn from Normal(gamma_hat, stderr) and the fit is
/// repeated (200 rounds).
pub fn fit_gamma_star(k: usize, n_grid: &[usize], reps: usize, seed: u64) -> Result<GammaStarFit> {
    if n_grid.len() < 3 {
        return Err(Error::Estimation(format!(
            "limit fit needs >= 3 grid points, got {}",
            n_grid.len()
        )));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam {
            name: "n_grid",
            reason: "grid lengths must be strictly increasing".into(),
        });
    }
    let points: Vec<MeanCurvePoint> = n_grid
        .iter()
        .enumerate()
        .map(|(j, &n)| estimate_gamma_point(k, n, 0.0, reps, derive_seed(seed, j as u64)))
        .collect::<Result<_>>()?;
    let gammas: Vec<f64> = points.iter().map(|p| p.gamma_hat).collect();
    let (gamma_star_hat, rate_coeff) = fit_star_form(n_grid, &gammas)?;

    const BOOT_ROUNDS: usize = 200;
    let mut rng = seeded_rng(derive_seed(seed, 0xB007));
    let mut intercepts = Vec::with_capacity(BOOT_ROUNDS);
    for _ in 0..BOOT_ROUNDS {
        let resampled: Vec<f64> = points
            .iter()
            .map(|p| p.gamma_hat + p.stderr * normal01(&mut rng))
            .collect();
        let (star, _) = fit_star_form(n_grid, &resampled)?;
        intercepts.push(star);
    }
    let gamma_star_stderr = sample_variance(&intercepts).sqrt();
    Ok(GammaStarFit {
        k,
        points,
        gamma_star_hat,
        gamma_star_stderr,
        rate_coeff,
    })
}

/// Scans the curve over a symmetric q-grid at fixed `n`.
///
/// `n_grid` (when given) drives a [`fit_gamma_star`] run that fills the
/// limiting constant; without it the q=0 point stands in, which is only a
/// single-length proxy.
pub fn estimate_mean_curve(
    k: usize,
    n: usize,
    q_grid: &[f64],
    n_grid: Option<&[usize]>,
    reps: usize,
    seed: u64,
) -> Result<MeanCurveEstimate> {
    if q_grid.is_empty() {
        return Err(Error::InvalidParam {
            name: "q_grid",
            reason: "grid must not be empty".into(),
        });
    }
    let mut sorted = q_grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    if sorted.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam {
            name: "q_grid",
            reason: "grid values must be strictly increasing".into(),
        });
    }
    // symmetric about 0, 0 included
    let symmetric = sorted.iter().all(|&q| {
        sorted
            .iter()
            .any(|&other| (other + q).abs() < 1e-12)
    });
    if !symmetric || !sorted.iter().any(|&q| q.abs() < 1e-12) {
        return Err(Error::InvalidParam {
            name: "q_grid",
            reason: "grid must be symmetric about 0 and include 0".into(),
        });
    }
    let points: Vec<MeanCurvePoint> = sorted
        .iter()
        .enumerate()
        .map(|(j, &q)| estimate_gamma_point(k, n, q, reps, derive_seed(seed, j as u64)))
        .collect::<Result<_>>()?;

    let zero_idx = sorted.iter().position(|&q| q.abs() < 1e-12).expect("0 in grid");
    let (gamma_star_hat, gamma_star_stderr) = match n_grid {
        Some(grid) => {
            let fit = fit_gamma_star(k, grid, reps, derive_seed(seed, 0x57A2))?;
            (fit.gamma_star_hat, fit.gamma_star_stderr)
        }
        None => (points[zero_idx].gamma_hat, points[zero_idx].stderr),
    };

    let zero = &points[zero_idx];
    let derivative_probe = points
        .iter()
        .filter(|p| p.q > 1e-12)
        .map(|p| {
            let neg = points
                .iter()
                .find(|o| (o.q + p.q).abs() < 1e-12)
                .expect("grid symmetric");
            SlopeProbe {
                step: p.q,
                right: (p.gamma_hat - zero.gamma_hat) / p.q,
                left: (zero.gamma_hat - neg.gamma_hat) / p.q,
            }
        })
        .collect();

    Ok(MeanCurveEstimate {
        points,
        gamma_star_hat,
        gamma_star_stderr,
        derivative_probe,
    })
}

/// Inverts the decreasing q ≥ 0 branch of the curve at level `gamma_target`
/// by monotone linear interpolation between grid points.
pub fn solve_asymmetry(curve: &MeanCurveEstimate, gamma_target: f64) -> Result<f64> {
    if gamma_target >= curve.gamma_star_hat {
        return Err(Error::Estimation(format!(
            "target level {gamma_target} is not below the limiting value {}",
            curve.gamma_star_hat
        )));
    }
    let branch: Vec<&MeanCurvePoint> = curve.points.iter().filter(|p| p.q >= -1e-12).collect();
    if branch.len() < 2 {
        return Err(Error::Estimation("curve has no q >= 0 branch to invert".into()));
    }
    for pair in branch.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.gamma_hat >= gamma_target && gamma_target >= b.gamma_hat {
            let denom = a.gamma_hat - b.gamma_hat;
            if denom <= 0.0 {
                return Ok(b.q); // flat segment: take the knot
            }
            let t = (a.gamma_hat - gamma_target) / denom;
            return Ok(a.q + t * (b.q - a.q));
        }
    }
    Err(Error::Estimation(format!(
        "curve does not reach down to level {gamma_target} on the grid"
    )))
}

/// Draws a sample conditioned on at least one run being present,
/// counting discarded attempts. Deterministic in `seed`.
fn sample_with_blocks(params: &ModelParams, seed: u64) -> (StringSample, usize) {
    for attempt in 0..10_000_000u64 {
        let s = sample_pair(params, derive_seed(seed, attempt));
        if s.block_count() > 0 {
            return (s, attempt as usize);
        }
    }
    unreachable!("rejection sampling failed 10^7 times; p = {} is too small", params.p)
}

/// Mean score gain from reverting one uniformly chosen run to fresh iid
/// letters, conditioned on at least one run existing.
///
/// Outer replicates draw (x, y) by rejection; the inner loop redraws the
/// reverted window's rank *and* content each time, which is exactly the
/// conditional law of the one-run revert given (x, y). The per-sample inner
/// means are averaged and given a normal 95% CI.
pub fn estimate_bias(
    params: &ModelParams,
    reps: usize,
    inner_reps: usize,
    seed: u64,
) -> Result<BiasEstimate> {
    if reps < 1 {
        return Err(Error::InvalidParam {
            name: "reps",
            reason: "need at least one replicate".into(),
        });
    }
    if inner_reps < 1 {
        return Err(Error::InvalidParam {
            name: "inner_reps",
            reason: "need at least one inner draw".into(),
        });
    }
    let per_outer: Vec<(f64, usize)> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let outer_seed = derive_seed(seed, i);
            let (s, rejected) = sample_with_blocks(params, derive_seed(outer_seed, 0));
            let base = lcs_bitparallel(&s.x, &s.y, params.k) as i64;
            let blocked = s.blocked_windows();
            let inner_master = derive_seed(outer_seed, 1);
            let mut acc = 0i64;
            for j in 0..inner_reps as u64 {
                let mut rng = stream_rng(inner_master, j);
                let w = blocked[rng.random_range(0..blocked.len())];
                let mut x_tilde = s.x.clone();
                for pos in params.window_span(w) {
                    x_tilde[pos] = rng.random_range(0..params.k) as u8;
                }
                let delta = lcs_bitparallel(&x_tilde, &s.y, params.k) as i64 - base;
                debug_assert!(delta.unsigned_abs() as usize <= params.ell + 1);
                acc += delta;
            }
            (acc as f64 / inner_reps as f64, rejected)
        })
        .collect();
    let values: Vec<f64> = per_outer.iter().map(|(v, _)| *v).collect();
    let rejections = per_outer.iter().map(|(_, r)| r).sum();
    let (mean_delta, se) = if values.len() >= 2 {
        mean_and_stderr(&values)
    } else {
        (values[0], 0.0)
    };
    Ok(BiasEstimate {
        d: params.d,
        reps,
        inner_reps,
        mean_delta,
        ci95: (mean_delta - Z95 * se, mean_delta + Z95 * se),
        bias_rate: mean_delta / d_pow_beta(params.d, params.beta),
        rejections,
    })
}

/// Frequency that reverting a single forced run (length-2d string, one
/// centered window) raises the LCS against a length-`j` iid partner by at
/// least `rate_guess · d^beta`.
pub fn estimate_one_block_bias(
    d: usize,
    k: usize,
    beta: f64,
    j: usize,
    rate_guess: f64,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    // placeholder run probability: the single run is forced, p is unused
    let params = ModelParams::new(k, d, beta, 0.5, 1)?;
    if reps < 1 {
        return Err(Error::InvalidParam {
            name: "reps",
            reason: "need at least one replicate".into(),
        });
    }
    let threshold = rate_guess * d_pow_beta(d, beta);
    let hits: usize = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let x_base = uniform_letters(&mut rng, params.n, k);
            let sym = rng.random_range(0..k) as u8;
            let x = place_blocks(&x_base, &[true], &[sym], &params)
                .expect("internally consistent shapes");
            let y = uniform_letters(&mut rng, j, k);
            let gain = lcs_bitparallel(&x_base, &y, k) as i64 - lcs_bitparallel(&x, &y, k) as i64;
            usize::from(gain as f64 >= threshold - 1e-12)
        })
        .sum();
    Ok(hits as f64 / reps as f64)
}

/// Unbiased sample variance of the LCS under `source`, with a bootstrap
/// standard error (200 resamples).
pub fn estimate_variance(
    source: &VarianceSource,
    reps: usize,
    seed: u64,
) -> Result<VarianceEstimate> {
    if reps < 30 {
        return Err(Error::InvalidParam {
            name: "reps",
            reason: format!("variance estimation needs >= 30 replicates, got {reps}"),
        });
    }
    let n = match source {
        VarianceSource::LongBlock(params) => params.n,
        VarianceSource::Iid { k, n } => {
            check_alphabet(*k)?;
            if *n < 1 {
                return Err(Error::InvalidParam {
                    name: "n",
                    reason: "length must be positive".into(),
                });
            }
            *n
        }
    };
    let values: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|i| match source {
            VarianceSource::LongBlock(params) => {
                let s = sample_pair(params, derive_seed(seed, i));
                lcs_bitparallel(&s.x, &s.y, params.k) as f64
            }
            VarianceSource::Iid { k, n } => {
                let mut rng = stream_rng(seed, i);
                let a = uniform_letters(&mut rng, *n, *k);
                let b = uniform_letters(&mut rng, *n, *k);
                lcs_bitparallel(&a, &b, *k) as f64
            }
        })
        .collect();
    let var_hat = sample_variance(&values);
    let stderr = bootstrap_stderr(&values, sample_variance, 200, derive_seed(seed, 0x5EB0));
    Ok(VarianceEstimate {
        n,
        reps,
        var_hat,
        stderr,
    })
}

/// Number of inner revert draws behind `freq_gain_at_opt`.
const GAIN_INNER_DRAWS: usize = 8;
/// Outer × inner sizes of the internal `estimate_bias` call that supplies
/// the gain rate for the threshold.
const GAIN_RATE_REPS: usize = 100;
const GAIN_RATE_INNER: usize = 8;

/// Empirical frequencies of the three per-sample events.
///
/// The gain event compares a small Monte Carlo mean (8 fresh revert draws at
/// the observed optimal partition) against `d^beta·(rate·(1-2eps) - 2eps)`,
/// strict inequality, with the rate taken from an internal 100×8
/// [`estimate_bias`] run. Samples without any run count the gain event as
/// false.
pub fn event_frequencies(
    params: &ModelParams,
    q: f64,
    eps: f64,
    reps: usize,
    seed: u64,
) -> Result<EventFrequencies> {
    if reps < 1 {
        return Err(Error::InvalidParam {
            name: "reps",
            reason: "need at least one replicate".into(),
        });
    }
    // validates q and eps ranges up front against the even partition
    let even = Partition::new((0..=params.m).map(|i| i * 2 * params.d).collect())?;
    partition_diagnostics(&even, params, q, eps)?;

    let rate = estimate_bias(
        params,
        GAIN_RATE_REPS,
        GAIN_RATE_INNER,
        derive_seed(seed, 0xB1A5),
    )?
    .bias_rate;
    let gain_threshold = d_pow_beta(params.d, params.beta) * (rate * (1.0 - 2.0 * eps) - 2.0 * eps);
    let need = params.m as f64 * params.p / 2.0;

    let outcomes: Vec<(bool, bool, bool)> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let rep_seed = derive_seed(seed, i);
            let s = sample_pair(params, derive_seed(rep_seed, 0));
            let enough = s.block_count() as f64 >= need - 1e-9;
            let typical = optima_all_typical(&s.x, &s.y, params, q, eps)
                .expect("parameters validated above");
            let gain = if s.block_count() == 0 {
                false
            } else {
                let (_, r_hat) = optimal_partition(&s.x, &s.y, params.d);
                let blocked = s.blocked_windows();
                let inner_master = derive_seed(rep_seed, 1);
                let mut acc = 0i64;
                for jd in 0..GAIN_INNER_DRAWS as u64 {
                    let mut rng = stream_rng(inner_master, jd);
                    let w = blocked[rng.random_range(0..blocked.len())];
                    acc += fresh_revert_delta(&s, w, &r_hat, &mut rng);
                }
                acc as f64 / GAIN_INNER_DRAWS as f64 > gain_threshold
            };
            (enough, typical, gain)
        })
        .collect();

    let frac = |sel: fn(&(bool, bool, bool)) -> bool| {
        outcomes.iter().filter(|o| sel(o)).count() as f64 / reps as f64
    };
    let j0 = (need - 1e-9).ceil() as usize;
    Ok(EventFrequencies {
        reps,
        eps,
        q,
        freq_enough_blocks: frac(|o| o.0),
        exact_tail: binom_tail_geq(params.m, params.p, j0),
        freq_optima_typical: frac(|o| o.1),
        freq_gain_at_opt: frac(|o| o.2),
        bias_rate: rate,
    })
}

/// Score change at partition `part` when window `w` is refilled with fresh
/// iid letters. Only the stretch containing `w` is rescored.
fn fresh_revert_delta(
    sample: &StringSample,
    w: usize,
    part: &Partition,
    rng: &mut impl RngExt,
) -> i64 {
    let params = &sample.params;
    let stretch = params.stretch_span(w);
    let piece = &sample.y[part.r[w]..part.r[w + 1]];
    let mut after_window = sample.x[stretch.clone()].to_vec();
    let offset = stretch.start;
    for pos in params.window_span(w) {
        after_window[pos - offset] = rng.random_range(0..params.k) as u8;
    }
    let before = MatchMasks::new(&sample.x[stretch]).score(piece) as i64;
    let after = MatchMasks::new(&after_window).score(piece) as i64;
    after - before
}

/// Mean LCS against an independent partner at every chain level, plus the
/// paired per-step increments and endpoint drop.
pub fn coupling_path_stats(
    params: &ModelParams,
    reps: usize,
    seed: u64,
) -> Result<CouplingPathStats> {
    if reps < 30 {
        return Err(Error::InvalidParam {
            name: "reps",
            reason: format!("path statistics need >= 30 replicates, got {reps}"),
        });
    }
    let m = params.m;
    let per_rep: Vec<Vec<i64>> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let rep_seed = derive_seed(seed, i);
            let chain = build_coupling_chain(params, derive_seed(rep_seed, 0));
            let mut rng = stream_rng(rep_seed, 1);
            let y = uniform_letters(&mut rng, params.n, params.k);
            chain
                .levels
                .iter()
                .map(|level| lcs_bitparallel(level, &y, params.k) as i64)
                .collect()
        })
        .collect();

    let levels: Vec<LevelStat> = (0..=m)
        .map(|l| {
            let vals: Vec<f64> = per_rep.iter().map(|r| r[l] as f64).collect();
            let (mean, stderr) = mean_and_stderr(&vals);
            LevelStat { level: l, mean, stderr }
        })
        .collect();
    let increments: Vec<f64> = (1..=m)
        .map(|l| {
            let diffs: Vec<f64> = per_rep.iter().map(|r| (r[l - 1] - r[l]) as f64).collect();
            mean(&diffs)
        })
        .collect();
    let drops: Vec<f64> = per_rep.iter().map(|r| (r[0] - r[m]) as f64).collect();
    let (drop_mean, drop_stderr) = mean_and_stderr(&drops);
    let step = drop_mean / m as f64;
    let variance_floor = step * step * m as f64 * params.p * (1.0 - params.p);
    Ok(CouplingPathStats {
        reps,
        levels,
        increments,
        drop_mean,
        drop_stderr,
        variance_floor,
    })
}

/// Weighted log-log regression of variance against length.
///
/// Points are `(n, var_hat, stderr)`. Weights come from the delta method,
/// `se(log var) = stderr / var`; when any stderr is zero (noiseless
/// synthetic input) the fit falls back to equal weights.
pub fn fit_scaling_slope(points: &[(usize, f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Estimation(format!(
            "scaling fit needs >= 3 points, got {}",
            points.len()
        )));
    }
    if let Some((n, v, _)) = points.iter().find(|(_, v, _)| *v <= 0.0) {
        return Err(Error::Estimation(format!(
            "nonpositive variance {v} at n = {n} cannot be log-fitted"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v, _)| v.ln()).collect();
    let exact = points.iter().any(|(_, _, se)| *se <= 0.0);
    let ws: Vec<f64> = if exact {
        vec![1.0; points.len()]
    } else {
        points
            .iter()
            .map(|(_, v, se)| {
                let se_log = se / v;
                1.0 / (se_log * se_log)
            })
            .collect()
    };
    let (slope, intercept, slope_stderr) = wls_line(&xs, &ys, &ws)?;
    Ok(ScalingFit {
        slope,
        intercept,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_point_degenerate_asymmetry() {
        // q = 1: one string is empty, the mean is exactly 0
        let p = estimate_gamma_point(2, 50, 1.0, 10, 3).unwrap();
        assert_eq!(p.gamma_hat, 0.0);
        assert_eq!(p.stderr, 0.0);
    }

    #[test]
    fn gamma_point_validation() {
        assert!(estimate_gamma_point(1, 10, 0.0, 10, 1).is_err());
        assert!(estimate_gamma_point(2, 0, 0.0, 10, 1).is_err());
        assert!(estimate_gamma_point(2, 10, 1.5, 10, 1).is_err());
        assert!(estimate_gamma_point(2, 10, 0.0, 1, 1).is_err());
    }

    #[test]
    fn gamma_point_matches_exact_tiny_enumeration() {
        // n=2, k=2: enumerating all 16 ordered pairs of 2-bit strings gives
        // E LCS = 18/16, so E LCS/n = 0.5625. 4000 reps, 4-sigma slack.
        let p = estimate_gamma_point(2, 2, 0.0, 4000, 99).unwrap();
        let exact = 0.5625;
        assert!(
            (p.gamma_hat - exact).abs() < 4.0 * p.stderr + 1e-12,
            "gamma_hat={} exact={exact} stderr={}",
            p.gamma_hat,
            p.stderr
        );
    }

    #[test]
    fn gamma_point_is_deterministic() {
        let a = estimate_gamma_point(3, 64, 0.2, 20, 7).unwrap();
        let b = estimate_gamma_point(3, 64, 0.2, 20, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn star_fit_recovers_noiseless_form() {
        let ns = [500usize, 1000, 2000, 4000, 8000];
        let (a, b) = (0.8123, 0.31);
        let gammas: Vec<f64> = ns
            .iter()
            .map(|&n| a - b * ((n as f64).ln() / n as f64).sqrt())
            .collect();
        let (star, rate) = fit_star_form(&ns, &gammas).unwrap();
        assert!((star - a).abs() < 1e-10, "star={star}");
        assert!((rate - b).abs() < 1e-10, "rate={rate}");
    }

    #[test]
    fn star_fit_needs_three_points() {
        assert!(fit_star_form(&[100, 200], &[0.5, 0.6]).is_err());
        assert!(fit_gamma_star(2, &[100, 200], 10, 1).is_err());
        assert!(matches!(
            fit_gamma_star(2, &[100, 200, 150], 10, 1),
            Err(Error::InvalidParam { name: "n_grid", .. })
        ));
    }

    #[test]
    fn mean_curve_rejects_asymmetric_grids() {
        assert!(estimate_mean_curve(2, 32, &[0.0, 0.1], None, 5, 1).is_err());
        assert!(estimate_mean_curve(2, 32, &[-0.1, 0.1], None, 5, 1).is_err());
        assert!(estimate_mean_curve(2, 32, &[-0.1, 0.0, 0.1], None, 5, 1).is_ok());
    }

    fn synthetic_curve(qs: &[f64], f: impl Fn(f64) -> f64) -> MeanCurveEstimate {
        let points: Vec<MeanCurvePoint> = qs
            .iter()
            .map(|&q| MeanCurvePoint {
                q,
                n: 1000,
                reps: 1,
                gamma_hat: f(q),
                stderr: 0.0,
            })
            .collect();
        let star = f(0.0);
        MeanCurveEstimate {
            points,
            gamma_star_hat: star,
            gamma_star_stderr: 0.0,
            derivative_probe: vec![],
        }
    }

    #[test]
    fn asymmetry_solution_on_synthetic_curve() {
        let qs = [-0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6];
        let curve = synthetic_curve(&qs, |q| 0.8 - 0.5 * q.abs());
        // exact interior value
        let q = solve_asymmetry(&curve, 0.675).unwrap();
        assert!((q - 0.25).abs() < 1e-12, "q={q}");
        // knot hit returns the knot
        let q = solve_asymmetry(&curve, 0.8 - 0.5 * 0.4).unwrap();
        assert!((q - 0.4).abs() < 1e-12, "q={q}");
        // monotone: deeper levels give larger q
        let q1 = solve_asymmetry(&curve, 0.7).unwrap();
        let q2 = solve_asymmetry(&curve, 0.6).unwrap();
        assert!(q2 > q1);
        // level above the limit: no solution
        assert!(solve_asymmetry(&curve, 0.85).is_err());
        // level below the grid's reach: no solution
        assert!(solve_asymmetry(&curve, 0.1).is_err());
    }

    #[test]
    fn bias_estimate_small_run_behaves() {
        let params = ModelParams::new(2, 8, 0.75, 0.6, 4).unwrap();
        let b = estimate_bias(&params, 24, 4, 11).unwrap();
        assert_eq!(b.reps, 24);
        assert!(b.ci95.0 <= b.mean_delta && b.mean_delta <= b.ci95.1);
        assert!(b.mean_delta.abs() <= (params.ell + 1) as f64);
        let again = estimate_bias(&params, 24, 4, 11).unwrap();
        assert_eq!(b, again);
        assert!(estimate_bias(&params, 0, 4, 11).is_err());
        assert!(estimate_bias(&params, 4, 0, 11).is_err());
    }

    #[test]
    fn one_block_bias_monotone_in_threshold() {
        let f0 = estimate_one_block_bias(8, 2, 0.75, 16, 0.0, 400, 5).unwrap();
        let f5 = estimate_one_block_bias(8, 2, 0.75, 16, 0.5, 400, 5).unwrap();
        let f9 = estimate_one_block_bias(8, 2, 0.75, 16, 0.9, 400, 5).unwrap();
        assert!((0.0..=1.0).contains(&f0));
        assert!(f0 >= f5 && f5 >= f9, "f0={f0} f5={f5} f9={f9}");
    }

    #[test]
    fn variance_estimate_validation_and_determinism() {
        let src = VarianceSource::Iid { k: 2, n: 64 };
        assert!(estimate_variance(&src, 29, 1).is_err());
        let a = estimate_variance(&src, 40, 1).unwrap();
        let b = estimate_variance(&src, 40, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.var_hat >= 0.0);
        assert_eq!(a.n, 64);
    }

    #[test]
    fn scaling_fit_exact_linear() {
        let pts: Vec<(usize, f64, f64)> =
            [100usize, 200, 400, 800].iter().map(|&n| (n, 0.35 * n as f64, 0.0)).collect();
        let fit = fit_scaling_slope(&pts).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-10, "slope={}", fit.slope);
        assert!((fit.intercept - 0.35f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn scaling_fit_exact_power_two_thirds() {
        let pts: Vec<(usize, f64, f64)> = [128usize, 256, 512, 1024]
            .iter()
            .map(|&n| (n, 2.0 * (n as f64).powf(2.0 / 3.0), 0.0))
            .collect();
        let fit = fit_scaling_slope(&pts).unwrap();
        assert!((fit.slope - 2.0 / 3.0).abs() < 1e-10, "slope={}", fit.slope);
    }

    #[test]
    fn scaling_fit_noisy_recovery() {
        // var = 0.4 n with 5% multiplicative noise; slope within 3 stderr
        let mut rng = seeded_rng(31);
        let pts: Vec<(usize, f64, f64)> = [256usize, 512, 1024, 2048, 4096]
            .iter()
            .map(|&n| {
                let v = 0.4 * n as f64;
                let noisy = v * (1.0 + 0.05 * normal01(&mut rng));
                (n, noisy, 0.05 * v)
            })
            .collect();
        let fit = fit_scaling_slope(&pts).unwrap();
        assert!(
            (fit.slope - 1.0).abs() <= 3.0 * fit.slope_stderr,
            "slope={} stderr={}",
            fit.slope,
            fit.slope_stderr
        );
    }

    #[test]
    fn scaling_fit_rejects_bad_input() {
        assert!(fit_scaling_slope(&[(10, 1.0, 0.1), (20, 2.0, 0.1)]).is_err());
        assert!(fit_scaling_slope(&[(10, 1.0, 0.1), (20, 0.0, 0.1), (40, 2.0, 0.1)]).is_err());
    }

    #[test]
    fn coupling_stats_consistency() {
        let params = ModelParams::new(2, 6, 0.75, 0.5, 4).unwrap();
        let st = coupling_path_stats(&params, 40, 17).unwrap();
        assert_eq!(st.levels.len(), params.m + 1);
        assert_eq!(st.increments.len(), params.m);
        // telescoping: per-step increments sum to the endpoint drop
        let total: f64 = st.increments.iter().sum();
        assert!((total - st.drop_mean).abs() < 1e-9);
        // per-sample increments are window-Lipschitz
        assert!(st
            .increments
            .iter()
            .all(|v| v.abs() <= (params.ell + 1) as f64));
        assert!(coupling_path_stats(&params, 10, 17).is_err());
    }

    #[test]
    fn event_frequencies_tiny_run() {
        let params = ModelParams::new(2, 4, 0.75, 0.5, 4).unwrap();
        let ev = event_frequencies(&params, 0.5, 0.2, 40, 23).unwrap();
        for f in [
            ev.freq_enough_blocks,
            ev.freq_optima_typical,
            ev.freq_gain_at_opt,
        ] {
            assert!((0.0..=1.0).contains(&f), "frequency {f} out of range");
        }
        assert!((0.0..=1.0).contains(&ev.exact_tail));
        // huge eps: threshold reaches m, every partition typical, always true
        let ev2 = event_frequencies(&params, 0.5, 10.0, 40, 23).unwrap();
        assert_eq!(ev2.freq_optima_typical, 1.0);
    }
}
