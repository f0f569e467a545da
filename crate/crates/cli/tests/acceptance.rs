//! Acceptance battery: twelve checked claims about the toolkit, printed one
//! PASS/FAIL line each. The process exits nonzero if any claim fails.
//!
//! Every tolerance is pinned here as a constant next to the check that uses
//! it. Statistical checks use fixed seeds, so a pass is reproducible and a
//! failure is a real defect (or a genuinely false claim), not flakiness.

use lcsfluct_core::align::{self, reference};
use lcsfluct_core::estimate::{
    coupling_path_stats, estimate_bias, estimate_mean_curve, estimate_variance,
    event_frequencies, fit_gamma_star, fit_scaling_slope, VarianceEstimate, VarianceSource,
};
use lcsfluct_core::lcs::{lcs_bitparallel, lcs_dp, lcs_lpp_oracle, lcs_oracle};
use lcsfluct_core::model::{gen_iid, sample_pair, ModelParams};
use lcsfluct_core::rng::{derive_seed, stream_rng};
use lcsfluct_core::stats::Z95;
use rand::RngExt;
use std::path::Path;
use std::sync::OnceLock;

type Criterion = (&'static str, fn() -> Result<String, String>);

const CRITERIA: &[Criterion] = &[
    ("limit constants k=2,3,4", c01_limit_constants),
    ("worked examples exact", c02_worked_examples),
    ("engine agreement", c03_engine_agreement),
    ("partition oracle equivalence", c04_partition_oracles),
    ("partition-maximum identity", c05_partition_maximum),
    ("variance upper bound", c06_variance_bound),
    ("variance linear scaling", c07_variance_scaling),
    ("revert gain positivity", c08_gain_positivity),
    ("mean-curve shape", c09_curve_shape),
    ("event frequencies", c10_event_frequencies),
    ("interpolation-chain drop", c11_chain_drop),
    ("worker-count reproducibility", c12_reproducibility),
];

fn main() {
    let mut failed = 0usize;
    for (idx, (name, run)) in CRITERIA.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:02} PASS {name}: {detail}", idx + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:02} FAIL {name}: {detail}", idx + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} acceptance criteria failed", CRITERIA.len());
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- criterion 1

/// Known limit constants per alphabet size, with the tolerance split as
/// 0.01 source precision + 0.005 Monte Carlo slack.
const STAR_TARGETS: [(usize, f64); 3] = [(2, 0.812), (3, 0.717), (4, 0.654)];
const STAR_TOL: f64 = 0.015;
const STAR_GRID: [usize; 4] = [1000, 2000, 5000, 10000];
const STAR_REPS: usize = 200;

fn c01_limit_constants() -> Result<String, String> {
    let mut parts = Vec::new();
    for (i, &(k, target)) in STAR_TARGETS.iter().enumerate() {
        let fit = fit_gamma_star(k, &STAR_GRID, STAR_REPS, derive_seed(0xAC01, i as u64))
            .map_err(|e| e.to_string())?;
        let err = (fit.gamma_star_hat - target).abs();
        if err > STAR_TOL {
            return Err(format!(
                "k={k}: fitted {:.4}, target {target} +- {STAR_TOL}, off by {err:.4}",
                fit.gamma_star_hat
            ));
        }
        parts.push(format!("k={k} -> {:.4} (target {target})", fit.gamma_star_hat));
    }
    Ok(parts.join(", "))
}

// ---------------------------------------------------------------- criterion 2

fn c02_worked_examples() -> Result<String, String> {
    let words = lcs_dp(b"heinrich", b"enerico");
    if words != 5 {
        return Err(format!("word pair scored {words}, want 5"));
    }
    let x: Vec<u8> = "101010111111".bytes().map(|c| c - b'0').collect();
    let y: Vec<u8> = "001010011110".bytes().map(|c| c - b'0').collect();
    let bits = lcs_dp(&x, &y);
    if bits != 9 {
        return Err(format!("bit pair scored {bits}, want 9"));
    }
    let part = align::Partition::new(vec![0, 2, 12]).map_err(|e| e.to_string())?;
    let pinned = align::score_partition(&x, &y, &part, 3).map_err(|e| e.to_string())?;
    if pinned != 8 {
        return Err(format!("pinned split scored {pinned}, want 8"));
    }
    let (best, _) = align::optimal_partition(&x, &y, 3);
    if best != 9 {
        return Err(format!("optimal split scored {best}, want 9"));
    }
    Ok("word pair 5, bit pair 9, pinned split 8, optimal split 9".into())
}

// ---------------------------------------------------------------- criterion 3

const ENGINE_PAIRS: usize = 1000;
const ENGINE_MAX_LEN: usize = 512;
const ORACLE_PAIRS: usize = 1000;
const ORACLE_MAX_LEN: usize = 12;

fn c03_engine_agreement() -> Result<String, String> {
    let alphabets = [2usize, 4, 20];
    for i in 0..ENGINE_PAIRS as u64 {
        let mut rng = stream_rng(0xAC03, i);
        let k = alphabets[rng.random_range(0..alphabets.len())];
        let a = gen_iid(rng.random_range(0..=ENGINE_MAX_LEN), k, derive_seed(0xAC13, i))
            .map_err(|e| e.to_string())?;
        let b = gen_iid(rng.random_range(0..=ENGINE_MAX_LEN), k, derive_seed(0xAC23, i))
            .map_err(|e| e.to_string())?;
        let dp = lcs_dp(&a, &b);
        let bp = lcs_bitparallel(&a, &b, k);
        let lpp = lcs_lpp_oracle(&a, &b);
        if dp != bp || dp != lpp {
            return Err(format!(
                "pair {i} (k={k}, {}x{}): dp={dp} bitparallel={bp} lattice={lpp}",
                a.len(),
                b.len()
            ));
        }
    }
    for i in 0..ORACLE_PAIRS as u64 {
        let mut rng = stream_rng(0xAC33, i);
        let k = alphabets[rng.random_range(0..alphabets.len())];
        let a = gen_iid(rng.random_range(0..=ORACLE_MAX_LEN), k, derive_seed(0xAC43, i))
            .map_err(|e| e.to_string())?;
        let b = gen_iid(rng.random_range(0..=ORACLE_MAX_LEN), k, derive_seed(0xAC53, i))
            .map_err(|e| e.to_string())?;
        let dp = lcs_dp(&a, &b);
        let rec = lcs_oracle(&a, &b).map_err(|e| e.to_string())?;
        if dp != rec {
            return Err(format!("pair {i}: dp={dp} recursive={rec}"));
        }
    }
    Ok(format!(
        "{ENGINE_PAIRS} pairs up to {ENGINE_MAX_LEN} letters across 3 engines, \
         {ORACLE_PAIRS} pairs up to {ORACLE_MAX_LEN} letters vs the recursive oracle"
    ))
}

// ---------------------------------------------------------------- criterion 4

const PARTITION_INSTANCES: usize = 200;

fn c04_partition_oracles() -> Result<String, String> {
    for i in 0..PARTITION_INSTANCES as u64 {
        let mut rng = stream_rng(0xAC04, i);
        let m = rng.random_range(1..=3usize);
        let d = rng.random_range(2..=3usize);
        let n = 2 * d * m; // <= 18
        let x = gen_iid(n, 2, derive_seed(0xAC14, i)).map_err(|e| e.to_string())?;
        let y = gen_iid(n, 2, derive_seed(0xAC24, i)).map_err(|e| e.to_string())?;

        let (score, part) = align::optimal_partition(&x, &y, d);
        let (brute_score, brute_part) = reference::brute_optimal(&x, &y, d);
        if score != brute_score || part.r != brute_part.r {
            return Err(format!(
                "instance {i}: dp ({score}, {:?}) vs brute ({brute_score}, {:?})",
                part.r, brute_part.r
            ));
        }

        let params = ModelParams::new(2, d, 0.75, 0.5, m).map_err(|e| e.to_string())?;
        let q = rng.random_range(0.2..0.8);
        let eps = rng.random_range(0.05..0.6);
        let atypical =
            align::max_atypical_score(&x, &y, &params, q, eps).map_err(|e| e.to_string())?;
        let brute_atypical = reference::brute_max_atypical(&x, &y, &params, q, eps);
        if atypical != brute_atypical {
            return Err(format!(
                "instance {i}: atypical dp {atypical:?} vs brute {brute_atypical:?}"
            ));
        }

        let decision =
            align::optima_all_typical(&x, &y, &params, q, eps).map_err(|e| e.to_string())?;
        let brute_decision = reference::brute_optima_all_typical(&x, &y, &params, q, eps);
        if decision != brute_decision {
            return Err(format!(
                "instance {i}: decision {decision} vs brute {brute_decision}"
            ));
        }
    }
    Ok(format!(
        "{PARTITION_INSTANCES} instances (m <= 3, n <= 18, k=2) across split score, \
         atypical-split score, and the all-typical decision"
    ))
}

// ---------------------------------------------------------------- criterion 5

const IDENTITY_SAMPLES: usize = 500;

fn c05_partition_maximum() -> Result<String, String> {
    for i in 0..IDENTITY_SAMPLES as u64 {
        let mut rng = stream_rng(0xAC05, i);
        let m = rng.random_range(1..=8usize);
        let params = ModelParams::new(2, 4, 0.75, 0.5, m).map_err(|e| e.to_string())?;
        let s = sample_pair(&params, derive_seed(0xAC15, i));
        let (best, _) = align::optimal_partition(&s.x, &s.y, 4);
        let full = lcs_dp(&s.x, &s.y);
        if best != full {
            return Err(format!(
                "sample {i} (m={m}): best split {best} vs full score {full}"
            ));
        }
    }
    Ok(format!(
        "best split score equals the full score on {IDENTITY_SAMPLES} planted-run samples (d=4, m <= 8)"
    ))
}

// ------------------------------------------------------- criteria 6 and 7

const VARIANCE_GRID: [usize; 4] = [512, 1024, 2048, 4096];
const VARIANCE_REPS: usize = 2000;
const SLOPE_RANGE: (f64, f64) = (0.8, 1.2);
const SLOPE_SE_MAX: f64 = 0.05;

static VARIANCE_SCAN: OnceLock<Result<Vec<VarianceEstimate>, String>> = OnceLock::new();

/// One shared scan: planted-run model, k=2, d=16, beta=0.75, p=0.5, with the
/// window count scaled so each grid length is covered exactly.
fn variance_scan() -> &'static Result<Vec<VarianceEstimate>, String> {
    VARIANCE_SCAN.get_or_init(|| {
        VARIANCE_GRID
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let params =
                    ModelParams::new(2, 16, 0.75, 0.5, n / 32).map_err(|e| e.to_string())?;
                estimate_variance(
                    &VarianceSource::LongBlock(params),
                    VARIANCE_REPS,
                    derive_seed(0xAC06, i as u64),
                )
                .map_err(|e| e.to_string())
            })
            .collect()
    })
}

fn c06_variance_bound() -> Result<String, String> {
    let points = variance_scan().as_ref().map_err(Clone::clone)?;
    let mut max_ratio: f64 = 0.0;
    for p in points {
        let bound = p.n as f64 + 3.0 * p.stderr;
        if p.var_hat > bound {
            return Err(format!(
                "n={}: var {:.2} exceeds n + 3se = {:.2}",
                p.n, p.var_hat, bound
            ));
        }
        max_ratio = max_ratio.max(p.var_hat / p.n as f64);
    }
    Ok(format!(
        "var <= n + 3se at every scan point (max var/n = {max_ratio:.3})"
    ))
}

fn c07_variance_scaling() -> Result<String, String> {
    let points = variance_scan().as_ref().map_err(Clone::clone)?;
    let triples: Vec<(usize, f64, f64)> =
        points.iter().map(|p| (p.n, p.var_hat, p.stderr)).collect();
    let fit = fit_scaling_slope(&triples).map_err(|e| e.to_string())?;
    if fit.slope < SLOPE_RANGE.0 || fit.slope > SLOPE_RANGE.1 {
        // Known systematic shortfall, kept honest: at d=16 each planted run
        // shifts the score by only ~1 letter, so the plain-string background
        // (effective exponent ~0.74 over these lengths) dominates the
        // linear-in-window-count term until n ~ 16k, beyond this grid.
        return Err(format!(
            "log-log slope {:.4} (se {:.4}) outside [{}, {}]; background-only scans \
             measure ~0.74 here and the planted-run excess (~0.4-0.6 per window) \
             overtakes it only past this grid",
            fit.slope, fit.slope_stderr, SLOPE_RANGE.0, SLOPE_RANGE.1
        ));
    }
    if fit.slope_stderr > SLOPE_SE_MAX {
        return Err(format!(
            "slope stderr {:.4} exceeds {SLOPE_SE_MAX}",
            fit.slope_stderr
        ));
    }
    Ok(format!(
        "slope {:.3} (se {:.3}) over n in {VARIANCE_GRID:?} at {VARIANCE_REPS} reps",
        fit.slope, fit.slope_stderr
    ))
}

// ---------------------------------------------------------------- criterion 8

const BIAS_D_GRID: [usize; 3] = [16, 32, 64];
const BIAS_REPS: usize = 200;
const BIAS_INNER: usize = 8;

fn c08_gain_positivity() -> Result<String, String> {
    let mut rates = Vec::new();
    for (i, &d) in BIAS_D_GRID.iter().enumerate() {
        let params = ModelParams::new(2, d, 0.75, 0.5, 16).map_err(|e| e.to_string())?;
        let b = estimate_bias(&params, BIAS_REPS, BIAS_INNER, derive_seed(0xAC08, i as u64))
            .map_err(|e| e.to_string())?;
        if d == 64 {
            if b.mean_delta <= 0.0 || b.ci95.0 <= 0.0 {
                return Err(format!(
                    "d=64: mean gain {:.3} with CI [{:.3}, {:.3}] does not exclude 0",
                    b.mean_delta, b.ci95.0, b.ci95.1
                ));
            }
        }
        let rate_se = (b.ci95.1 - b.ci95.0) / (2.0 * Z95) / (d as f64).powf(params.beta);
        rates.push((d, b.bias_rate, rate_se));
    }
    for w in rates.windows(2) {
        let (d0, r0, s0) = w[0];
        let (d1, r1, s1) = w[1];
        let band = 3.0 * (s0 * s0 + s1 * s1).sqrt();
        if r1 < r0 - band {
            return Err(format!(
                "gain rate drops from {r0:.4} (d={d0}) to {r1:.4} (d={d1}), beyond 3 sigma = {band:.4}"
            ));
        }
    }
    let shown: Vec<String> = rates
        .iter()
        .map(|(d, r, _)| format!("d={d} -> {r:.4}"))
        .collect();
    Ok(format!(
        "mean gain positive with CI off 0 at d=64; rate non-decreasing: {}",
        shown.join(", ")
    ))
}

// ---------------------------------------------------------------- criterion 9

const CURVE_N: usize = 2000;
const CURVE_REPS: usize = 200;

fn c09_curve_shape() -> Result<String, String> {
    let grid: Vec<f64> = (-6..=6).map(|i| i as f64 / 10.0).collect();
    let curve = estimate_mean_curve(2, CURVE_N, &grid, None, CURVE_REPS, 0xAC09)
        .map_err(|e| e.to_string())?;
    let at = |q: f64| {
        curve
            .points
            .iter()
            .find(|p| (p.q - q).abs() < 1e-12)
            .expect("grid point present")
    };

    // mirror symmetry across q = 0, within 3 combined standard errors
    for i in 1..=6 {
        let q = i as f64 / 10.0;
        let (pos, neg) = (at(q), at(-q));
        let gap = (pos.gamma_hat - neg.gamma_hat).abs();
        let band = 3.0 * (pos.stderr + neg.stderr);
        if gap > band {
            return Err(format!("asymmetry {gap:.5} at q={q} exceeds {band:.5}"));
        }
    }

    // concavity: every interior grid point sits at or above the chord of
    // its neighbours, up to 3 sigma of the midpoint-minus-chord statistic
    for w in curve.points.windows(3) {
        let (lo, mid, hi) = (&w[0], &w[1], &w[2]);
        let chord = 0.5 * (lo.gamma_hat + hi.gamma_hat);
        let sigma = (mid.stderr * mid.stderr
            + 0.25 * (lo.stderr * lo.stderr + hi.stderr * hi.stderr))
            .sqrt();
        if mid.gamma_hat < chord - 3.0 * sigma {
            return Err(format!(
                "dip at q={}: mid {:.5} below chord {:.5} - 3 sigma",
                mid.q, mid.gamma_hat, chord
            ));
        }
    }

    // one-sided difference quotients at 0: non-increasing to the right,
    // non-decreasing to the left, up to the same noise band
    for probe in &curve.derivative_probe {
        let slack = 3.0 * (at(0.0).stderr + at(probe.step).stderr) / probe.step;
        if probe.right > slack {
            return Err(format!(
                "right slope {:.5} at step {} above noise band {slack:.5}",
                probe.right, probe.step
            ));
        }
        if probe.left < -slack {
            return Err(format!(
                "left slope {:.5} at step {} below noise band -{slack:.5}",
                probe.left, probe.step
            ));
        }
    }
    Ok(format!(
        "symmetric and concave on the 13-point grid at n={CURVE_N}, {CURVE_REPS} reps"
    ))
}

// --------------------------------------------------------------- criterion 10

const EVENT_REPS: usize = 300;

fn c10_event_frequencies() -> Result<String, String> {
    let params = ModelParams::new(2, 8, 0.75, 0.5, 16).map_err(|e| e.to_string())?;
    let ev = event_frequencies(&params, 0.5, 0.1, EVENT_REPS, 0xAC0A).map_err(|e| e.to_string())?;

    let sigma = (ev.exact_tail * (1.0 - ev.exact_tail) / EVENT_REPS as f64).sqrt();
    let gap = (ev.freq_enough_blocks - ev.exact_tail).abs();
    if gap > 4.0 * sigma + 1e-12 {
        return Err(format!(
            "run-count frequency {:.4} vs exact tail {:.4}: gap {gap:.4} exceeds 4 sigma = {:.4}",
            ev.freq_enough_blocks,
            ev.exact_tail,
            4.0 * sigma
        ));
    }

    let m = 16.0_f64;
    let envelope = (-m * 0.5 * 0.5 / 2.0).exp();
    let shortfall = 1.0 - ev.freq_enough_blocks;
    if shortfall > envelope + 4.0 * sigma {
        return Err(format!(
            "run-count shortfall {shortfall:.4} exceeds envelope {envelope:.4} + 4 sigma"
        ));
    }

    // a loose enough gap band admits every split, so the typicality
    // frequency must be exactly one
    let ev_loose =
        event_frequencies(&params, 0.5, 10.0, EVENT_REPS, 0xAC1A).map_err(|e| e.to_string())?;
    if ev_loose.freq_optima_typical != 1.0 {
        return Err(format!(
            "typicality frequency {} under an all-admitting band, want exactly 1",
            ev_loose.freq_optima_typical
        ));
    }

    Ok(format!(
        "run-count freq {:.4} vs exact {:.4} (4 sigma = {:.4}); shortfall {:.4} <= envelope {:.4}; loose-band typicality = 1",
        ev.freq_enough_blocks, ev.exact_tail, 4.0 * sigma, shortfall, envelope
    ))
}

// --------------------------------------------------------------- criterion 11

const CHAIN_REPS: usize = 200;

fn c11_chain_drop() -> Result<String, String> {
    let params = ModelParams::new(2, 64, 0.75, 0.5, 16).map_err(|e| e.to_string())?;
    let st = coupling_path_stats(&params, CHAIN_REPS, 0xAC0B).map_err(|e| e.to_string())?;
    if st.drop_mean < 3.0 * st.drop_stderr {
        return Err(format!(
            "end-to-end drop {:.3} is not 3 sigma above 0 (se {:.3})",
            st.drop_mean, st.drop_stderr
        ));
    }
    Ok(format!(
        "no-runs mean exceeds all-runs mean by {:.2} (se {:.2}, z = {:.1})",
        st.drop_mean,
        st.drop_stderr,
        st.drop_mean / st.drop_stderr
    ))
}

// --------------------------------------------------------------- criterion 12

fn c12_reproducibility() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_lcsfluct");
    let base = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-repro");
    let _ = std::fs::remove_dir_all(&base);
    for (sub, threads) in [("w1", "1"), ("w8", "8")] {
        let out = base.join(sub);
        let status = std::process::Command::new(bin)
            .args([
                "coupling-path",
                "--reps",
                "200",
                "--seed",
                "31415",
                "--threads",
                threads,
                "--out",
            ])
            .arg(&out)
            .status()
            .map_err(|e| format!("cannot spawn the binary: {e}"))?;
        if !status.success() {
            return Err(format!("run with {threads} workers exited {status}"));
        }
    }
    let read = |sub: &str| {
        std::fs::read(base.join(sub).join("coupling-path.rows.csv"))
            .map_err(|e| format!("missing rows file for {sub}: {e}"))
    };
    let (a, b) = (read("w1")?, read("w8")?);
    if a != b {
        return Err("rows files differ between 1 and 8 workers".into());
    }
    Ok(format!(
        "identical rows bytes ({} bytes) from the binary at 1 and 8 workers, same seed",
        a.len()
    ))
}
