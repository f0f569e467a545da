//! Built-in verification battery: worked examples, engine cross-checks,
//! brute-force oracle equivalence, model invariants, and determinism —
//! a condensed version of the test suite, runnable in the field.

use crate::report::SelftestRow;
use lcsfluct_core::align::{self, reference, GapInterval, Partition};
use lcsfluct_core::estimate::{estimate_gamma_point, fit_star_form};
use lcsfluct_core::lcs::{lcs_bitparallel, lcs_dp, lcs_lpp_oracle, lcs_oracle};
use lcsfluct_core::model::{
    build_coupling_chain, gen_iid, place_blocks, replace_random_block, sample_pair, ModelParams,
};
use lcsfluct_core::rng::{derive_seed, stream_rng};
use lcsfluct_core::stats::binom_tail_geq;
use lcsfluct_core::Error;
use rand::RngExt;

type Check = (&'static str, fn() -> Result<(), String>);

const CHECKS: &[Check] = &[
    ("worked-example-words", worked_example_words),
    ("worked-example-bits", worked_example_bits),
    ("worked-example-partition", worked_example_partition),
    ("worked-example-placement", worked_example_placement),
    ("engine-agreement", engine_agreement),
    ("recursive-oracle-agreement", recursive_oracle_agreement),
    ("partition-brute-equivalence", partition_brute_equivalence),
    ("sample-invariants", sample_invariants),
    ("replacement-invariants", replacement_invariants),
    ("coupling-invariants", coupling_invariants),
    ("estimator-determinism", estimator_determinism),
    ("worker-count-independence", worker_count_independence),
    ("binomial-tail-values", binomial_tail_values),
    ("gap-interval-band", gap_interval_band),
    ("limit-fit-exact", limit_fit_exact),
];

/// Runs every check; returns the per-check rows and failure details.
pub fn run() -> (Vec<SelftestRow>, Vec<String>) {
    let mut rows = Vec::with_capacity(CHECKS.len());
    let mut failures = Vec::new();
    for (name, check) in CHECKS {
        let result = check();
        rows.push(SelftestRow {
            check: name.to_string(),
            passed: result.is_ok(),
        });
        if let Err(detail) = result {
            failures.push(format!("{name}: {detail}"));
        }
    }
    (rows, failures)
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn all_engines(a: &[u8], b: &[u8], k: usize) -> Result<usize, String> {
    let dp = lcs_dp(a, b);
    let bp = lcs_bitparallel(a, b, k);
    let lpp = lcs_lpp_oracle(a, b);
    if dp != bp || dp != lpp {
        return Err(format!("engines disagree: dp={dp} bitparallel={bp} lpp={lpp}"));
    }
    Ok(dp)
}

fn worked_example_words() -> Result<(), String> {
    let a = b"heinrich";
    let b = b"enerico";
    expect("word-pair score", all_engines(a, b, 256)?, 5)
}

fn worked_example_bits() -> Result<(), String> {
    let a: Vec<u8> = "101010111111".bytes().map(|c| c - b'0').collect();
    let b: Vec<u8> = "001010011110".bytes().map(|c| c - b'0').collect();
    expect("bit-pair score", all_engines(&a, &b, 2)?, 9)
}

fn worked_example_partition() -> Result<(), String> {
    let x: Vec<u8> = "101010111111".bytes().map(|c| c - b'0').collect();
    let y: Vec<u8> = "001010011110".bytes().map(|c| c - b'0').collect();
    let part = Partition::new(vec![0, 2, 12]).map_err(|e| e.to_string())?;
    let s = align::score_partition(&x, &y, &part, 3).map_err(|e| e.to_string())?;
    expect("pinned split score", s, 8)?;
    let (best, _) = align::optimal_partition(&x, &y, 3);
    expect("optimal split score", best, 9)
}

fn worked_example_placement() -> Result<(), String> {
    let params = ModelParams::new(2, 5, 0.8, 0.5, 2).map_err(|e| e.to_string())?;
    let x_base: Vec<u8> = "01010100010100101110".bytes().map(|c| c - b'0').collect();
    let x = place_blocks(&x_base, &[true, false], &[0, 0], &params).map_err(|e| e.to_string())?;
    let want: Vec<u8> = "01000000010100101110".bytes().map(|c| c - b'0').collect();
    expect("run placement", x, want)
}

fn engine_agreement() -> Result<(), String> {
    for i in 0..150u64 {
        let mut rng = stream_rng(0xE1, i);
        let k = *[2usize, 4, 20].iter().nth(rng.random_range(0..3)).unwrap();
        let la = rng.random_range(0..=256);
        let lb = rng.random_range(0..=256);
        let a = gen_iid(la, k, derive_seed(0xE2, i)).map_err(|e| e.to_string())?;
        let b = gen_iid(lb, k, derive_seed(0xE3, i)).map_err(|e| e.to_string())?;
        all_engines(&a, &b, k).map_err(|e| format!("case {i}: {e}"))?;
    }
    Ok(())
}

fn recursive_oracle_agreement() -> Result<(), String> {
    for i in 0..150u64 {
        let mut rng = stream_rng(0xF1, i);
        let la = rng.random_range(0..=10);
        let lb = rng.random_range(0..=10);
        let a = gen_iid(la, 3, derive_seed(0xF2, i)).map_err(|e| e.to_string())?;
        let b = gen_iid(lb, 3, derive_seed(0xF3, i)).map_err(|e| e.to_string())?;
        let slow = lcs_oracle(&a, &b).map_err(|e| e.to_string())?;
        expect(&format!("case {i}"), lcs_dp(&a, &b), slow)?;
    }
    Ok(())
}

fn partition_brute_equivalence() -> Result<(), String> {
    for i in 0..40u64 {
        let mut rng = stream_rng(0xA1, i);
        let m = rng.random_range(1..=3usize);
        let d = rng.random_range(2..=3usize);
        let n = 2 * d * m;
        let x = gen_iid(n, 2, derive_seed(0xA2, i)).map_err(|e| e.to_string())?;
        let y = gen_iid(n, 2, derive_seed(0xA3, i)).map_err(|e| e.to_string())?;
        let (score, part) = align::optimal_partition(&x, &y, d);
        let (bs, bp) = reference::brute_optimal(&x, &y, d);
        expect(&format!("case {i} score"), score, bs)?;
        expect(&format!("case {i} split"), part.r.clone(), bp.r)?;
        let params = ModelParams::new(2, d, 0.75, 0.5, m).map_err(|e| e.to_string())?;
        let q = rng.random_range(0.2..0.8);
        let eps = rng.random_range(0.05..0.6);
        let dp_at = align::max_atypical_score(&x, &y, &params, q, eps).map_err(|e| e.to_string())?;
        expect(
            &format!("case {i} atypical"),
            dp_at,
            reference::brute_max_atypical(&x, &y, &params, q, eps),
        )?;
        let dec = align::optima_all_typical(&x, &y, &params, q, eps).map_err(|e| e.to_string())?;
        expect(
            &format!("case {i} decision"),
            dec,
            reference::brute_optima_all_typical(&x, &y, &params, q, eps),
        )?;
    }
    Ok(())
}

fn sample_invariants() -> Result<(), String> {
    let params = ModelParams::new(4, 8, 0.75, 0.5, 6).map_err(|e| e.to_string())?;
    for seed in 0..40u64 {
        let s = sample_pair(&params, seed);
        let diffs = s
            .x
            .iter()
            .zip(&s.x_base)
            .filter(|(a, b)| a != b)
            .count();
        if diffs > s.block_count() * (params.ell + 1) {
            return Err(format!("seed {seed}: {diffs} changed letters exceed the cap"));
        }
        for w in 0..params.m {
            let span = params.window_span(w);
            if s.block_flags[w] {
                let sym = s.block_symbols[w];
                if s.x[span.clone()].iter().any(|&c| c != sym) {
                    return Err(format!("seed {seed}: window {w} is not a constant run"));
                }
            } else if s.x[span.clone()] != s.x_base[span] {
                return Err(format!("seed {seed}: unflagged window {w} was modified"));
            }
        }
    }
    Ok(())
}

fn replacement_invariants() -> Result<(), String> {
    let params = ModelParams::new(2, 8, 0.75, 0.9, 4).map_err(|e| e.to_string())?;
    for seed in 0..40u64 {
        let s = sample_pair(&params, seed);
        if s.block_count() == 0 {
            continue;
        }
        let draw = replace_random_block(&s, derive_seed(seed, 9)).map_err(|e| e.to_string())?;
        if draw.block_rank == 0 || draw.block_rank > s.block_count() {
            return Err(format!("seed {seed}: rank {} out of range", draw.block_rank));
        }
        let span = params.window_span(draw.window_index);
        if draw.x_reverted[span.clone()] != s.x_base[span] {
            return Err(format!("seed {seed}: revert does not match the baseline"));
        }
    }
    // a blockless sample must refuse replacement
    let none = ModelParams::new(2, 8, 0.75, 0.0001, 2).map_err(|e| e.to_string())?;
    for seed in 0..200u64 {
        let s = sample_pair(&none, seed);
        if s.block_count() == 0 {
            return match replace_random_block(&s, 1) {
                Err(Error::NoBlocks) => Ok(()),
                other => Err(format!("expected the no-runs error, got {other:?}")),
            };
        }
    }
    Err("never saw a blockless sample at p=1e-4".to_string())
}

fn coupling_invariants() -> Result<(), String> {
    let params = ModelParams::new(2, 6, 0.75, 0.5, 5).map_err(|e| e.to_string())?;
    for seed in 0..20u64 {
        let chain = build_coupling_chain(&params, seed);
        if chain.levels.len() != params.m + 1 {
            return Err(format!("seed {seed}: wrong level count"));
        }
        let mut order = chain.removal_order.clone();
        order.sort_unstable();
        if order != (0..params.m).collect::<Vec<_>>() {
            return Err(format!("seed {seed}: removal order is not a permutation"));
        }
        for l in 0..params.m {
            let hi = &chain.levels[l + 1];
            let lo = &chain.levels[l];
            let w = chain.removal_order[params.m - 1 - l];
            let span = params.window_span(w);
            for (pos, (a, b)) in hi.iter().zip(lo).enumerate() {
                let inside = span.contains(&pos);
                if a != b && !inside {
                    return Err(format!(
                        "seed {seed}: levels {} and {} differ outside window {w}",
                        l + 1,
                        l
                    ));
                }
            }
        }
    }
    Ok(())
}

fn estimator_determinism() -> Result<(), String> {
    let a = estimate_gamma_point(2, 128, 0.2, 24, 42).map_err(|e| e.to_string())?;
    let b = estimate_gamma_point(2, 128, 0.2, 24, 42).map_err(|e| e.to_string())?;
    expect("same seed, same result", a, b)
}

fn worker_count_independence() -> Result<(), String> {
    let run = |threads: usize| -> Result<_, String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| estimate_gamma_point(2, 128, 0.0, 32, 7))
            .map_err(|e| e.to_string())
    };
    expect("1 vs 4 workers", run(1)?, run(4)?)
}

fn binomial_tail_values() -> Result<(), String> {
    let cases = [
        (2, 0.5, 1, 0.75),
        (2, 0.5, 2, 0.25),
        (3, 0.3, 2, 0.216),
        (16, 0.5, 4, 64_839.0 / 65_536.0),
    ];
    for (m, p, j0, want) in cases {
        let got = binom_tail_geq(m, p, j0);
        if (got - want).abs() > 1e-12 {
            return Err(format!("tail({m},{p},{j0}) = {got}, want {want}"));
        }
    }
    Ok(())
}

fn gap_interval_band() -> Result<(), String> {
    let band = GapInterval::new(3, 1.0 / 3.0).map_err(|e| e.to_string())?;
    if !(band.contains(3) && band.contains(12) && !band.contains(2) && !band.contains(13)) {
        return Err(format!("band [{}, {}] misplaced", band.lo, band.hi));
    }
    Ok(())
}

fn limit_fit_exact() -> Result<(), String> {
    let ns = [500usize, 1000, 2000, 4000];
    let gammas: Vec<f64> = ns
        .iter()
        .map(|&n| 0.77 - 0.29 * ((n as f64).ln() / n as f64).sqrt())
        .collect();
    let (star, rate) = fit_star_form(&ns, &gammas).map_err(|e| e.to_string())?;
    if (star - 0.77).abs() > 1e-10 || (rate - 0.29).abs() > 1e-10 {
        return Err(format!("fit returned ({star}, {rate}), want (0.77, 0.29)"));
    }
    Ok(())
}
