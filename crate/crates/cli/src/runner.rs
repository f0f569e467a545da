//! Experiment dispatch: builds validated core parameters from the resolved
//! config, runs the matching estimator pipeline inside the requested worker
//! pool, and assembles the report.

use crate::config::{Command, ResolvedConfig};
use crate::error::{usage, CliError};
use crate::report::{
    BiasRow, ExperimentReport, GammaStarRow, Manifest, Rows, StarFitSummary, Summary,
};
use crate::selftest;
use chrono::{SecondsFormat, Utc};
use lcsfluct_core::estimate::{
    coupling_path_stats, estimate_bias, estimate_mean_curve, estimate_variance,
    event_frequencies, fit_gamma_star, fit_scaling_slope, solve_asymmetry, VarianceSource,
};
use lcsfluct_core::rng::derive_seed;

/// Runs the configured experiment and returns the full report. Rows are a
/// pure function of (config, master_seed); the worker pool size only
/// affects wall-clock time.
pub fn run_experiment(cfg: &ResolvedConfig) -> Result<ExperimentReport, CliError> {
    let (rows, summary) = if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| usage(format!("cannot build a {}-worker pool: {e}", cfg.threads)))?;
        pool.install(|| dispatch(cfg))?
    } else {
        dispatch(cfg)?
    };
    Ok(ExperimentReport {
        manifest: Manifest {
            command: cfg.command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            master_seed: cfg.master_seed,
            config: cfg.clone(),
        },
        rows,
        summary,
    })
}

fn require<T: Copy>(field: Option<T>, name: &str) -> Result<T, CliError> {
    field.ok_or_else(|| usage(format!("missing required config field '{name}'")))
}

fn dispatch(cfg: &ResolvedConfig) -> Result<(Rows, Summary), CliError> {
    let seed = cfg.master_seed;
    match cfg.command {
        Command::GammaCurve => {
            let k = require(cfg.k, "k")?;
            let n = require(cfg.n, "n")?;
            let q_grid = cfg
                .q_grid
                .as_deref()
                .ok_or_else(|| usage("missing required config field 'q_grid'"))?;
            let curve =
                estimate_mean_curve(k, n, q_grid, cfg.n_grid.as_deref(), cfg.reps, seed)?;
            let solved_q = cfg
                .gamma_e
                .map(|target| solve_asymmetry(&curve, target))
                .transpose()?;
            let summary = Summary::GammaCurve {
                gamma_star_hat: curve.gamma_star_hat,
                gamma_star_stderr: curve.gamma_star_stderr,
                gamma_e: cfg.gamma_e,
                solved_q,
            };
            Ok((Rows::GammaCurve(curve.points), summary))
        }
        Command::GammaStar => {
            let k_grid = cfg
                .k_grid
                .as_deref()
                .ok_or_else(|| usage("missing required config field 'k_grid'"))?;
            let n_grid = cfg
                .n_grid
                .as_deref()
                .ok_or_else(|| usage("missing required config field 'n_grid'"))?;
            let mut rows = Vec::new();
            let mut fits = Vec::new();
            for (i, &k) in k_grid.iter().enumerate() {
                let fit = fit_gamma_star(k, n_grid, cfg.reps, derive_seed(seed, i as u64))?;
                rows.extend(fit.points.iter().map(|p| GammaStarRow {
                    k,
                    n: p.n,
                    reps: p.reps,
                    gamma_hat: p.gamma_hat,
                    stderr: p.stderr,
                }));
                fits.push(StarFitSummary {
                    k,
                    gamma_star_hat: fit.gamma_star_hat,
                    gamma_star_stderr: fit.gamma_star_stderr,
                    rate_coeff: fit.rate_coeff,
                });
            }
            Ok((Rows::GammaStar(rows), Summary::GammaStar { fits }))
        }
        Command::VarianceScan => {
            let n_grid = cfg
                .n_grid
                .as_deref()
                .ok_or_else(|| usage("missing required config field 'n_grid'"))?;
            let mut rows = Vec::new();
            for (i, &n) in n_grid.iter().enumerate() {
                let source = if let Some(iid) = cfg.iid {
                    VarianceSource::Iid { k: iid.k, n }
                } else {
                    let spec = cfg
                        .model
                        .ok_or_else(|| usage("variance-scan needs 'model' or 'iid'"))?;
                    let m = n / (2 * spec.d);
                    VarianceSource::LongBlock(spec.with_m(m).build()?)
                };
                rows.push(estimate_variance(&source, cfg.reps, derive_seed(seed, i as u64))?);
            }
            let points: Vec<(usize, f64, f64)> =
                rows.iter().map(|r| (r.n, r.var_hat, r.stderr)).collect();
            let fit = fit_scaling_slope(&points)?;
            let summary = Summary::VarianceScan {
                slope: fit.slope,
                intercept: fit.intercept,
                slope_stderr: fit.slope_stderr,
            };
            Ok((Rows::VarianceScan(rows), summary))
        }
        Command::BiasScan => {
            let spec = cfg
                .model
                .ok_or_else(|| usage("missing required config field 'model'"))?;
            let d_grid = cfg
                .d_grid
                .as_deref()
                .ok_or_else(|| usage("missing required config field 'd_grid'"))?;
            let mut rows = Vec::new();
            let mut rates = Vec::new();
            for (i, &d) in d_grid.iter().enumerate() {
                let params = spec.with_d(d).build()?;
                let b = estimate_bias(&params, cfg.reps, cfg.inner_reps, derive_seed(seed, i as u64))?;
                rates.push((d, b.bias_rate));
                rows.push(BiasRow {
                    d,
                    reps: b.reps,
                    inner_reps: b.inner_reps,
                    mean_delta: b.mean_delta,
                    ci_lo: b.ci95.0,
                    ci_hi: b.ci95.1,
                    bias_rate: b.bias_rate,
                    rejections: b.rejections,
                });
            }
            Ok((Rows::BiasScan(rows), Summary::BiasScan { rates }))
        }
        Command::Events => {
            let spec = cfg
                .model
                .ok_or_else(|| usage("missing required config field 'model'"))?;
            let q = require(cfg.q, "q")?;
            let eps = require(cfg.eps, "eps")?;
            let params = spec.build()?;
            let ev = event_frequencies(&params, q, eps, cfg.reps, seed)?;
            let envelope = (-(params.m as f64) * params.p * params.p / 2.0).exp();
            Ok((Rows::Events(vec![ev]), Summary::Events { envelope }))
        }
        Command::CouplingPath => {
            let spec = cfg
                .model
                .ok_or_else(|| usage("missing required config field 'model'"))?;
            let params = spec.build()?;
            let st = coupling_path_stats(&params, cfg.reps, seed)?;
            let summary = Summary::CouplingPath {
                drop_mean: st.drop_mean,
                drop_stderr: st.drop_stderr,
                variance_floor: st.variance_floor,
                increments: st.increments,
            };
            Ok((Rows::CouplingPath(st.levels), summary))
        }
        Command::Selftest => {
            let (rows, failures) = selftest::run();
            for f in &failures {
                eprintln!("selftest failure: {f}");
            }
            let failed = failures.len();
            let summary = Summary::Selftest {
                passed: rows.len() - failed,
                failed,
            };
            Ok((Rows::Selftest(rows), summary))
        }
    }
}
