//! Windowed alignment scores over partitions of the partner string.
//!
//! `x` is cut into `m` consecutive stretches of `2d` letters; a partition
//! `r = (r_0, .., r_m)` with `0 = r_0 ≤ r_1 ≤ .. ≤ r_m = n` assigns the
//! piece `y[r_i..r_{i+1}]` to stretch `i`, and the partition's score is the
//! sum of per-stretch LCS values. The unconstrained LCS is recovered as the
//! maximum over all partitions.
//!
//! A partition is *typical* when at most `2·m·p·eps` of its piece lengths
//! fall outside the gap band [`GapInterval`]; the capped-counter DP in
//! [`max_atypical_score`] maximizes the score over non-typical partitions
//! only, which decides whether any optimal partition escapes the band.

use crate::lcs::{lcs_bitparallel, MatchMasks, PrefixScorer};
use crate::model::{ModelParams, ReplacementDraw, StringSample};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

const NEG_INF: i64 = i64::MIN / 4;

/// Endpoint vector `(r_0, .., r_m)` cutting `y` into `m` pieces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub r: Vec<usize>,
}

impl Partition {
    /// Requires `r_0 = 0`, a nondecreasing sequence, and at least one piece.
    /// The final endpoint is checked against the string length at use sites
    /// via [`Partition::validate_for`].
    pub fn new(r: Vec<usize>) -> Result<Self> {
        if r.len() < 2 {
            return Err(Error::BadPartition(format!(
                "need at least 2 endpoints, got {}",
                r.len()
            )));
        }
        if r[0] != 0 {
            return Err(Error::BadPartition(format!("first endpoint must be 0, got {}", r[0])));
        }
        if r.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::BadPartition("endpoints must be nondecreasing".into()));
        }
        Ok(Partition { r })
    }

    pub fn pieces(&self) -> usize {
        self.r.len() - 1
    }

    /// Piece lengths `r_{i+1} - r_i`.
    pub fn gaps(&self) -> Vec<usize> {
        self.r.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn validate_for(&self, n: usize) -> Result<()> {
        if *self.r.last().expect("nonempty") != n {
            return Err(Error::BadPartition(format!(
                "last endpoint must equal the string length {n}, got {}",
                self.r.last().unwrap()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Partition {
    /// Comma-separated endpoints.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.r {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::BadPartition(format!("endpoint `{tok}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(r)
    }
}

/// Admissible piece-length band `[2d(1−q)/(1+q), 2d(1+q)/(1−q)]` for the
/// asymmetry ratio `q ∈ (0, 1)`. Always straddles the nominal gap `2d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapInterval {
    pub lo: f64,
    pub hi: f64,
    pub q: f64,
}

impl GapInterval {
    pub fn new(d: usize, q: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParam {
                name: "d",
                reason: "half-spacing must be positive".into(),
            });
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParam {
                name: "q",
                reason: format!("asymmetry ratio must lie in (0, 1), got {q}"),
            });
        }
        let td = 2.0 * d as f64;
        let lo = td * (1.0 - q) / (1.0 + q);
        let hi = td * (1.0 + q) / (1.0 - q);
        debug_assert!(lo < td && td < hi);
        Ok(GapInterval { lo, hi, q })
    }

    /// Closed-interval membership of an integer gap, with a relative 1e-9
    /// slack so rational endpoints that land on integers (e.g. d=3, q=1/3
    /// giving [3, 12]) are not lost to float rounding.
    pub fn contains(&self, gap: usize) -> bool {
        let g = gap as f64;
        let tol = 1e-9 * self.hi.max(1.0);
        g >= self.lo - tol && g <= self.hi + tol
    }
}

/// Band verdict for one partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionDiagnostics {
    /// Number of piece lengths outside the band.
    pub bad_count: usize,
    /// Largest bad count still considered typical: `2·m·p·eps`.
    pub threshold: f64,
    /// `bad_count ≤ threshold`.
    pub typical: bool,
}

/// Per-stretch score changes caused by one window revert.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaBreakdown {
    /// Score change per stretch; every entry except the reverted window's is 0.
    pub per_piece: Vec<i64>,
    /// Sum of `per_piece`.
    pub total: i64,
}

fn check_pair_shape(x: &[u8], y: &[u8], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::ShapeMismatch {
            what: "x",
            expected: n,
            got: x.len(),
        });
    }
    if y.len() != n {
        return Err(Error::ShapeMismatch {
            what: "y",
            expected: n,
            got: y.len(),
        });
    }
    Ok(())
}

/// Score of a partition: sum over stretches of `lcs(x-stretch_i, y-piece_i)`.
pub fn score_partition(x: &[u8], y: &[u8], part: &Partition, d: usize) -> Result<usize> {
    let m = part.pieces();
    let n = 2 * d * m;
    check_pair_shape(x, y, n)?;
    part.validate_for(n)?;
    let mut total = 0usize;
    for i in 0..m {
        let stretch = &x[2 * d * i..2 * d * (i + 1)];
        let piece = &y[part.r[i]..part.r[i + 1]];
        total += MatchMasks::new(stretch).score(piece);
    }
    Ok(total)
}

/// Best score over all partitions, with one maximizing partition.
///
/// The maximum always equals the unconstrained LCS of `x` and `y`. Ties are
/// broken toward the lexicographically smallest endpoint vector, which makes
/// the returned partition reproducible. DP over (stretch, y-endpoint).
pub fn optimal_partition(x: &[u8], y: &[u8], d: usize) -> (usize, Partition) {
    assert!(d >= 1, "half-spacing must be positive");
    assert_eq!(x.len(), y.len(), "inputs must have equal length");
    assert!(
        x.len() % (2 * d) == 0 && !x.is_empty(),
        "length {} is not a positive multiple of 2d = {}",
        x.len(),
        2 * d
    );
    let n = x.len();
    let m = n / (2 * d);

    // suffix[i][r]: best score of stretches i.. when y is consumed up to r
    let mut suffix = vec![vec![NEG_INF; n + 1]; m + 1];
    suffix[m][n] = 0;
    for i in (0..m).rev() {
        let masks = MatchMasks::new(&x[2 * d * i..2 * d * (i + 1)]);
        let mut scorer = PrefixScorer::new(&masks);
        for r in 0..=n {
            scorer.reset();
            let mut best = suffix[i + 1][r]; // empty piece
            for rp in r + 1..=n {
                scorer.push(y[rp - 1]);
                let nxt = suffix[i + 1][rp];
                if nxt > NEG_INF / 2 {
                    best = best.max(scorer.score() as i64 + nxt);
                }
            }
            suffix[i][r] = best;
        }
    }

    // greedy forward walk: smallest feasible endpoint at each stretch gives
    // the lexicographically smallest argmax
    let mut r_vec = Vec::with_capacity(m + 1);
    r_vec.push(0usize);
    let mut cur = 0usize;
    for i in 0..m {
        let target = suffix[i][cur];
        let masks = MatchMasks::new(&x[2 * d * i..2 * d * (i + 1)]);
        let mut scorer = PrefixScorer::new(&masks);
        let mut chosen = None;
        if suffix[i + 1][cur] == target {
            chosen = Some(cur);
        } else {
            for rp in cur + 1..=n {
                scorer.push(y[rp - 1]);
                let nxt = suffix[i + 1][rp];
                if nxt > NEG_INF / 2 && scorer.score() as i64 + nxt == target {
                    chosen = Some(rp);
                    break;
                }
            }
        }
        cur = chosen.expect("suffix table guarantees an achieving endpoint");
        r_vec.push(cur);
    }
    debug_assert_eq!(*r_vec.last().unwrap(), n);
    (suffix[0][0] as usize, Partition { r: r_vec })
}

/// Counts piece lengths outside the band and applies the `2·m·p·eps`
/// threshold. The comparison carries a 1e-9 nudge so an exactly-integral
/// threshold keeps integer bad counts on the typical side.
pub fn partition_diagnostics(
    part: &Partition,
    params: &ModelParams,
    q: f64,
    eps: f64,
) -> Result<PartitionDiagnostics> {
    if eps <= 0.0 {
        return Err(Error::InvalidParam {
            name: "eps",
            reason: format!("must be positive, got {eps}"),
        });
    }
    part.validate_for(params.n)?;
    if part.pieces() != params.m {
        return Err(Error::ShapeMismatch {
            what: "partition pieces",
            expected: params.m,
            got: part.pieces(),
        });
    }
    let band = GapInterval::new(params.d, q)?;
    let bad_count = part.gaps().iter().filter(|&&g| !band.contains(g)).count();
    let threshold = 2.0 * params.m as f64 * params.p * eps;
    let typical = (bad_count as f64) <= threshold + 1e-9;
    Ok(PartitionDiagnostics {
        bad_count,
        threshold,
        typical,
    })
}

/// Maximum partition score over NON-typical partitions only; `None` when no
/// partition is atypical (band so wide, or threshold so high, that every
/// partition passes).
///
/// Same DP as [`optimal_partition`] with the state augmented by a bad-gap
/// counter capped at `floor(2·m·p·eps) + 1`: reaching the cap is the
/// atypicality certificate, so deeper counts need not be distinguished.
pub fn max_atypical_score(
    x: &[u8],
    y: &[u8],
    params: &ModelParams,
    q: f64,
    eps: f64,
) -> Result<Option<usize>> {
    if eps <= 0.0 {
        return Err(Error::InvalidParam {
            name: "eps",
            reason: format!("must be positive, got {eps}"),
        });
    }
    check_pair_shape(x, y, params.n)?;
    let band = GapInterval::new(params.d, q)?;
    let (n, m, d) = (params.n, params.m, params.d);
    let threshold = 2.0 * m as f64 * params.p * eps;
    let cap = (threshold + 1e-9).floor() as usize + 1;
    if cap > m {
        // a partition has only m pieces, so `cap` bad gaps can never occur
        return Ok(None);
    }

    let lanes = cap + 1;
    let mut cur = vec![NEG_INF; (n + 1) * lanes];
    let mut nxt = vec![NEG_INF; (n + 1) * lanes];
    cur[0] = 0;
    for i in 0..m {
        nxt.fill(NEG_INF);
        let masks = MatchMasks::new(&x[2 * d * i..2 * d * (i + 1)]);
        let mut scorer = PrefixScorer::new(&masks);
        for r in 0..=n {
            let base = r * lanes;
            if cur[base..base + lanes].iter().all(|&v| v <= NEG_INF / 2) {
                continue;
            }
            scorer.reset();
            for rp in r..=n {
                if rp > r {
                    scorer.push(y[rp - 1]);
                }
                let piece = scorer.score() as i64;
                let bad = usize::from(!band.contains(rp - r));
                for c in 0..lanes {
                    let v = cur[base + c];
                    if v <= NEG_INF / 2 {
                        continue;
                    }
                    let slot = rp * lanes + (c + bad).min(cap);
                    let cand = v + piece;
                    if cand > nxt[slot] {
                        nxt[slot] = cand;
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut nxt);
    }
    let v = cur[n * lanes + cap];
    Ok((v > NEG_INF / 2).then_some(v as usize))
}

/// True when every best-scoring partition is typical: the atypical maximum
/// falls strictly below the unconstrained LCS (vacuously true when no
/// partition is atypical).
pub fn optima_all_typical(
    x: &[u8],
    y: &[u8],
    params: &ModelParams,
    q: f64,
    eps: f64,
) -> Result<bool> {
    match max_atypical_score(x, y, params, q, eps)? {
        None => Ok(true),
        Some(s) => Ok(s < lcs_bitparallel(x, y, params.k)),
    }
}

/// Per-stretch score change when `draw` reverts one window of `sample.x`.
///
/// Only the stretch containing the reverted window can change, so the other
/// entries are zero by construction (debug builds verify the slices agree).
pub fn delta_scores(
    sample: &StringSample,
    draw: &ReplacementDraw,
    part: &Partition,
) -> Result<DeltaBreakdown> {
    let params = &sample.params;
    part.validate_for(params.n)?;
    if part.pieces() != params.m {
        return Err(Error::ShapeMismatch {
            what: "partition pieces",
            expected: params.m,
            got: part.pieces(),
        });
    }
    if draw.x_reverted.len() != params.n {
        return Err(Error::ShapeMismatch {
            what: "x_reverted",
            expected: params.n,
            got: draw.x_reverted.len(),
        });
    }
    let w = draw.window_index;
    let mut per_piece = vec![0i64; params.m];
    let stretch = params.stretch_span(w);
    let piece = &sample.y[part.r[w]..part.r[w + 1]];
    let before = MatchMasks::new(&sample.x[stretch.clone()]).score(piece) as i64;
    let after = MatchMasks::new(&draw.x_reverted[stretch]).score(piece) as i64;
    per_piece[w] = after - before;
    debug_assert!(per_piece[w].unsigned_abs() as usize <= params.ell + 1);
    #[cfg(debug_assertions)]
    for i in 0..params.m {
        if i != w {
            let s = params.stretch_span(i);
            debug_assert_eq!(&sample.x[s.clone()], &draw.x_reverted[s]);
        }
    }
    let total = per_piece.iter().sum();
    Ok(DeltaBreakdown { per_piece, total })
}

/// Exhaustive reference implementations. Exponential in `m`; meant for
/// cross-checking the DPs on tiny instances, not for production use.
pub mod reference {
    use super::*;

    /// Calls `f` with every valid endpoint vector for length `n`, `m` pieces,
    /// in lexicographic order.
    pub fn for_each_partition<F: FnMut(&[usize])>(n: usize, m: usize, mut f: F) {
        let mut r = vec![0usize; m + 1];
        r[m] = n;
        fn rec<F: FnMut(&[usize])>(r: &mut Vec<usize>, idx: usize, n: usize, m: usize, f: &mut F) {
            if idx == m {
                f(r);
                return;
            }
            for v in r[idx - 1]..=n {
                r[idx] = v;
                rec(r, idx + 1, n, m, f);
            }
        }
        if m == 0 {
            return;
        }
        if m == 1 {
            f(&r);
            return;
        }
        rec(&mut r, 1, n, m, &mut f);
    }

    /// Brute-force maximum with the same lex-smallest tie rule as the DP.
    pub fn brute_optimal(x: &[u8], y: &[u8], d: usize) -> (usize, Partition) {
        let n = x.len();
        let m = n / (2 * d);
        let mut best: Option<(usize, Vec<usize>)> = None;
        for_each_partition(n, m, |r| {
            let part = Partition { r: r.to_vec() };
            let s = score_partition(x, y, &part, d).expect("enumerated partitions are valid");
            // lexicographic enumeration: first strict improvement keeps the
            // lex-smallest argmax
            if best.as_ref().is_none_or(|(bs, _)| s > *bs) {
                best = Some((s, r.to_vec()));
            }
        });
        let (s, r) = best.expect("at least one partition exists");
        (s, Partition { r })
    }

    /// Brute-force maximum over non-typical partitions.
    pub fn brute_max_atypical(
        x: &[u8],
        y: &[u8],
        params: &ModelParams,
        q: f64,
        eps: f64,
    ) -> Option<usize> {
        let mut best: Option<usize> = None;
        for_each_partition(params.n, params.m, |r| {
            let part = Partition { r: r.to_vec() };
            let diag = partition_diagnostics(&part, params, q, eps).expect("valid partition");
            if !diag.typical {
                let s = score_partition(x, y, &part, params.d).expect("valid partition");
                if best.is_none_or(|b| s > b) {
                    best = Some(s);
                }
            }
        });
        best
    }

    /// Brute-force version of [`optima_all_typical`]: enumerate every argmax
    /// partition and check each one's diagnostics.
    pub fn brute_optima_all_typical(
        x: &[u8],
        y: &[u8],
        params: &ModelParams,
        q: f64,
        eps: f64,
    ) -> bool {
        let (best, _) = brute_optimal(x, y, params.d);
        let mut all_typical = true;
        for_each_partition(params.n, params.m, |r| {
            let part = Partition { r: r.to_vec() };
            let s = score_partition(x, y, &part, params.d).expect("valid partition");
            if s == best {
                let diag = partition_diagnostics(&part, params, q, eps).expect("valid partition");
                if !diag.typical {
                    all_typical = false;
                }
            }
        });
        all_typical
    }
}
