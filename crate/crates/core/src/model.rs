//! Planted-run string model.
//!
//! Strings have even length `n = 2·d·m` over the alphabet `{0, .., k-1}`.
//! The baseline string is iid uniform. Inside each of `m` evenly spaced
//! windows, independently with probability `p`, the baseline letters are
//! overwritten by a constant run of one uniformly drawn symbol. The partner
//! string `y` is iid uniform of the same length, independent of everything.
//!
//! Window `w` (0-based) covers positions `(2w+1)·d − ell/2 − 1` up to and
//! including `(2w+1)·d + ell/2 − 1`: `ell + 1` positions centered in the
//! `w`-th stretch of `2d` letters. `ell` is the smallest even integer at
//! least `d^beta`, so runs sit strictly inside their stretch.

use crate::rng::{seeded_rng, uniform_letters};
use crate::{Error, Result};
use rand::RngExt;
use serde::Serialize;
use std::ops::Range;

/// Validated model parameters. Construct via [`ModelParams::new`]; the
/// derived fields (`n`, `ell`) are filled in there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    /// Alphabet size, ≥ 2 (letters are stored as bytes, so ≤ 256).
    pub k: usize,
    /// Half-spacing of window centers; window `w` is centered at `(2w+1)·d`.
    pub d: usize,
    /// Run-length exponent in (1/2, 1).
    pub beta: f64,
    /// Probability that a window receives a constant run.
    pub p: f64,
    /// Number of windows.
    pub m: usize,
    /// Total string length, `2·d·m`.
    pub n: usize,
    /// Smallest even integer ≥ `d^beta`; each run spans `ell + 1` positions.
    pub ell: usize,
}

impl ModelParams {
    pub fn new(k: usize, d: usize, beta: f64, p: f64, m: usize) -> Result<Self> {
        fn bad(name: &'static str, reason: String) -> Error {
            Error::InvalidParam { name, reason }
        }
        if !(2..=256).contains(&k) {
            return Err(bad("k", format!("alphabet size must be in [2, 256], got {k}")));
        }
        if d < 2 {
            return Err(bad("d", format!("half-spacing must be >= 2, got {d}")));
        }
        if !(beta > 0.5 && beta < 1.0) {
            return Err(bad("beta", format!("exponent must lie in (1/2, 1), got {beta}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(bad("p", format!("run probability must lie in (0, 1), got {p}")));
        }
        if m < 1 {
            return Err(bad("m", "need at least one window".into()));
        }
        let n = 2usize
            .checked_mul(d)
            .and_then(|v| v.checked_mul(m))
            .ok_or_else(|| bad("m", format!("2*{d}*{m} overflows usize")))?;
        let raw = (d as f64).powf(beta);
        let mut ell = raw.ceil() as usize;
        if ell % 2 == 1 {
            ell += 1;
        }
        debug_assert!(ell >= 2);
        if ell >= 2 * d {
            // unreachable for beta < 1, kept as a guard for the invariant
            return Err(bad("beta", format!("run span {ell} does not fit in stretch {}", 2 * d)));
        }
        Ok(ModelParams { k, d, beta, p, m, n, ell })
    }

    /// Positions eligible for window `w`'s run (0-based, half-open).
    /// `ell + 1` positions centered at index `(2w+1)·d − 1`.
    pub fn window_span(&self, w: usize) -> Range<usize> {
        assert!(w < self.m, "window {w} out of range (m={})", self.m);
        let start = (2 * w + 1) * self.d - self.ell / 2 - 1;
        start..start + self.ell + 1
    }

    /// The `w`-th stretch of `2d` consecutive positions (0-based, half-open).
    /// Window `w` lies strictly inside it.
    pub fn stretch_span(&self, w: usize) -> Range<usize> {
        assert!(w < self.m);
        2 * self.d * w..2 * self.d * (w + 1)
    }
}

/// One draw from the model.
#[derive(Debug, Clone, PartialEq)]
pub struct StringSample {
    pub params: ModelParams,
    /// Baseline iid string, before any run is written.
    pub x_base: Vec<u8>,
    /// Which windows carry a run.
    pub block_flags: Vec<bool>,
    /// Symbol written into window `w` when `block_flags[w]`; filler zero
    /// otherwise (never read).
    pub block_symbols: Vec<u8>,
    /// The string after run placement.
    pub x: Vec<u8>,
    /// Independent iid partner string, same length.
    pub y: Vec<u8>,
}

impl StringSample {
    /// Number of windows that carry a run.
    pub fn block_count(&self) -> usize {
        self.block_flags.iter().filter(|&&f| f).count()
    }

    /// Indices of windows that carry a run, ascending.
    pub fn blocked_windows(&self) -> Vec<usize> {
        self.block_flags
            .iter()
            .enumerate()
            .filter_map(|(w, &f)| f.then_some(w))
            .collect()
    }

    /// Plain-text dump: three lines (`x_base`, `x`, `y`), letters printed as
    /// base-k digits (`0-9a-z`) for k ≤ 36, space-separated decimal beyond.
    pub fn dump_text(&self) -> String {
        let render = |s: &[u8]| -> String {
            if self.params.k <= 36 {
                s.iter()
                    .map(|&c| char::from_digit(c as u32, 36).expect("letter below 36"))
                    .collect()
            } else {
                s.iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        };
        format!(
            "{}\n{}\n{}\n",
            render(&self.x_base),
            render(&self.x),
            render(&self.y)
        )
    }
}

/// One single-window revert of a sample's string `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplacementDraw {
    /// 1-based rank of the chosen run among the sample's present runs.
    pub block_rank: usize,
    /// Index of the reverted window.
    pub window_index: usize,
    /// Position span of the reverted window.
    pub window: Range<usize>,
    /// `x` with that one window restored to the baseline letters.
    pub x_reverted: Vec<u8>,
}

/// Nested strings obtained by starting from a run in every window and
/// reverting one uniformly chosen remaining run per step.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingChain {
    pub params: ModelParams,
    /// `levels[l]` has exactly `l` runs present; `levels[0]` is the baseline
    /// and `levels[m]` has a run in every window.
    pub levels: Vec<Vec<u8>>,
    /// `removal_order[i]` is the window reverted in the step from
    /// `levels[m-i]` down to `levels[m-i-1]`.
    pub removal_order: Vec<usize>,
}

/// `length` iid uniform letters over `{0, .., k-1}`. Deterministic in `seed`.
pub fn gen_iid(length: usize, k: usize, seed: u64) -> Result<Vec<u8>> {
    if !(2..=256).contains(&k) {
        return Err(Error::InvalidParam {
            name: "k",
            reason: format!("alphabet size must be in [2, 256], got {k}"),
        });
    }
    let mut rng = seeded_rng(seed);
    Ok(uniform_letters(&mut rng, length, k))
}

/// Writes the constant runs dictated by `flags`/`symbols` over a copy of
/// `x_base`. Pure; the sampled strings in [`StringSample`] come from here.
pub fn place_blocks(
    x_base: &[u8],
    block_flags: &[bool],
    block_symbols: &[u8],
    params: &ModelParams,
) -> Result<Vec<u8>> {
    if x_base.len() != params.n {
        return Err(Error::ShapeMismatch {
            what: "x_base",
            expected: params.n,
            got: x_base.len(),
        });
    }
    if block_flags.len() != params.m {
        return Err(Error::ShapeMismatch {
            what: "block_flags",
            expected: params.m,
            got: block_flags.len(),
        });
    }
    if block_symbols.len() != params.m {
        return Err(Error::ShapeMismatch {
            what: "block_symbols",
            expected: params.m,
            got: block_symbols.len(),
        });
    }
    let mut x = x_base.to_vec();
    for w in 0..params.m {
        if block_flags[w] {
            let sym = block_symbols[w];
            if sym as usize >= params.k {
                return Err(Error::InvalidParam {
                    name: "block_symbols",
                    reason: format!("symbol {sym} outside alphabet of size {}", params.k),
                });
            }
            x[params.window_span(w)].fill(sym);
        }
    }
    Ok(x)
}

/// Draws a full sample: baseline, run flags, run symbols, partner string.
/// All four sources are independent; deterministic in `seed`.
pub fn sample_pair(params: &ModelParams, seed: u64) -> StringSample {
    let mut rng = seeded_rng(seed);
    let x_base = uniform_letters(&mut rng, params.n, params.k);
    let block_flags: Vec<bool> = (0..params.m).map(|_| rng.random_bool(params.p)).collect();
    let mut block_symbols = vec![0u8; params.m];
    for w in 0..params.m {
        if block_flags[w] {
            block_symbols[w] = rng.random_range(0..params.k) as u8;
        }
    }
    let y = uniform_letters(&mut rng, params.n, params.k);
    let x = place_blocks(&x_base, &block_flags, &block_symbols, params)
        .expect("internally consistent shapes");
    StringSample {
        params: params.clone(),
        x_base,
        block_flags,
        block_symbols,
        x,
        y,
    }
}

/// Picks one present run uniformly at random and reverts the letters of its
/// window to the baseline. Errors when the sample has no runs.
pub fn replace_random_block(sample: &StringSample, seed: u64) -> Result<ReplacementDraw> {
    let blocked = sample.blocked_windows();
    if blocked.is_empty() {
        return Err(Error::NoBlocks);
    }
    let mut rng = seeded_rng(seed);
    let block_rank = rng.random_range(1..=blocked.len());
    let window_index = blocked[block_rank - 1];
    let window = sample.params.window_span(window_index);
    let mut x_reverted = sample.x.clone();
    x_reverted[window.clone()].copy_from_slice(&sample.x_base[window.clone()]);
    Ok(ReplacementDraw {
        block_rank,
        window_index,
        window,
        x_reverted,
    })
}

/// Builds the full revert chain: start with a run in every window, then
/// revert one uniformly chosen remaining run per step until the baseline is
/// reached. Never consults `p`.
pub fn build_coupling_chain(params: &ModelParams, seed: u64) -> CouplingChain {
    let mut rng = seeded_rng(seed);
    let x_base = uniform_letters(&mut rng, params.n, params.k);
    let all_flags = vec![true; params.m];
    let block_symbols: Vec<u8> = (0..params.m)
        .map(|_| rng.random_range(0..params.k) as u8)
        .collect();
    let top = place_blocks(&x_base, &all_flags, &block_symbols, params)
        .expect("internally consistent shapes");

    let mut levels = vec![Vec::new(); params.m + 1];
    levels[params.m] = top;
    let mut remaining: Vec<usize> = (0..params.m).collect();
    let mut removal_order = Vec::with_capacity(params.m);
    for level in (0..params.m).rev() {
        let pick = rng.random_range(0..remaining.len());
        let w = remaining.swap_remove(pick);
        removal_order.push(w);
        let span = params.window_span(w);
        let mut next = levels[level + 1].clone();
        next[span.clone()].copy_from_slice(&x_base[span]);
        levels[level] = next;
    }
    debug_assert_eq!(levels[0], x_base);
    CouplingChain {
        params: params.clone(),
        levels,
        removal_order,
    }
}
