//! LCS engines.
//!
//! Four independent routes to the same number: a rolling-row quadratic DP
//! (`lcs_dp`), a bit-parallel engine for the Monte Carlo hot path
//! (`lcs_bitparallel`), a plain recursive reference with a hard size cap
//! (`lcs_oracle`), and a heaviest-path formulation on the alignment grid
//! (`lcs_lpp_oracle`). The fast engines are only trusted because the test
//! suite holds them against the slow ones.

use crate::{Error, Result};

/// LCS length. Always within `[0, min(|a|, |b|)]`.
pub type LcsScore = usize;

/// Quadratic DP with memory linear in the shorter input.
pub fn lcs_dp(a: &[u8], b: &[u8]) -> LcsScore {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 0;
    }
    let mut row = vec![0usize; short.len() + 1];
    for &cl in long {
        let mut diag = 0; // previous row's value one column to the left
        for j in 1..=short.len() {
            let up = row[j];
            row[j] = if cl == short[j - 1] {
                diag + 1
            } else {
                up.max(row[j - 1])
            };
            diag = up;
        }
    }
    row[short.len()]
}

/// Per-letter match masks for a fixed pattern string.
///
/// Bit `i` of `mask(c)` is set iff `pattern[i] == c`. Built once, then any
/// number of partner strings can be scored against the pattern; scoring is
/// O(|partner| · ⌈|pattern|/64⌉).
#[derive(Debug, Clone)]
pub struct MatchMasks {
    len: usize,
    words: usize,
    /// letter -> dense slot id; slot 0 is a shared all-zero mask for letters
    /// absent from the pattern.
    slot: [u16; 256],
    masks: Vec<u64>,
}

impl MatchMasks {
    pub fn new(pattern: &[u8]) -> Self {
        let len = pattern.len();
        let words = len.div_ceil(64).max(1);
        let mut slot = [0u16; 256];
        let mut masks = vec![0u64; words]; // slot 0: absent letters
        let mut next = 1u16;
        for (i, &c) in pattern.iter().enumerate() {
            if slot[c as usize] == 0 {
                slot[c as usize] = next;
                masks.resize(masks.len() + words, 0);
                next += 1;
            }
            let s = slot[c as usize] as usize;
            masks[s * words + i / 64] |= 1u64 << (i % 64);
        }
        MatchMasks {
            len,
            words,
            slot,
            masks,
        }
    }

    pub fn pattern_len(&self) -> usize {
        self.len
    }

    fn mask_of(&self, c: u8) -> &[u64] {
        let s = self.slot[c as usize] as usize;
        &self.masks[s * self.words..(s + 1) * self.words]
    }

    /// LCS of the pattern against `partner`.
    pub fn score(&self, partner: &[u8]) -> LcsScore {
        if self.len == 0 || partner.is_empty() {
            return 0;
        }
        let mut state = vec![!0u64; self.words];
        for &c in partner {
            advance(&mut state, self.mask_of(c));
        }
        self.zeros_in_state(&state)
    }

    /// Zeros among the low `len` bits of the row state = matches so far.
    fn zeros_in_state(&self, state: &[u64]) -> usize {
        let mut zeros = 0usize;
        let mut remaining = self.len;
        for &sw in state {
            let bits = remaining.min(64);
            let mask = if bits == 64 { !0u64 } else { (1u64 << bits) - 1 };
            zeros += bits - (sw & mask).count_ones() as usize;
            remaining -= bits;
            if remaining == 0 {
                break;
            }
        }
        zeros
    }
}

/// One row step of the bit-parallel recurrence.
///
/// Invariant: `u = state & mask` is a submask of `state`, so the per-word
/// subtraction never borrows; only the addition needs a carry chain.
#[inline]
fn advance(state: &mut [u64], mask: &[u64]) {
    let mut carry = 0u64;
    for (sw, &mw) in state.iter_mut().zip(mask) {
        let s = *sw;
        let u = s & mw;
        let (sum, c1) = s.overflowing_add(u);
        let (sum, c2) = sum.overflowing_add(carry);
        carry = u64::from(c1 | c2);
        *sw = sum | (s - u);
    }
}

/// Streaming variant: feed partner letters one at a time and read off the
/// LCS of the pattern against the prefix consumed so far. Used by the
/// partition DP, which needs scores against every prefix of a window.
pub struct PrefixScorer<'m> {
    masks: &'m MatchMasks,
    state: Vec<u64>,
}

impl<'m> PrefixScorer<'m> {
    pub fn new(masks: &'m MatchMasks) -> Self {
        PrefixScorer {
            masks,
            state: vec![!0u64; masks.words],
        }
    }

    pub fn reset(&mut self) {
        self.state.fill(!0u64);
    }

    pub fn push(&mut self, c: u8) {
        advance(&mut self.state, self.masks.mask_of(c));
    }

    pub fn score(&self) -> LcsScore {
        if self.masks.len == 0 {
            return 0;
        }
        self.masks.zeros_in_state(&self.state)
    }
}

/// Bit-parallel LCS. Agrees exactly with `lcs_dp`; the speed engine for
/// Monte Carlo work.
///
/// `k` is the declared alphabet size (asserted ≥ 2). The mask table adapts
/// to whatever byte values actually occur, so letters are not required to
/// lie below `k`; plain ASCII inputs work unchanged.
pub fn lcs_bitparallel(a: &[u8], b: &[u8], k: usize) -> LcsScore {
    assert!(k >= 2, "alphabet size must be at least 2");
    // mask the shorter side: cost is |longer| * words(shorter)
    let (pattern, partner) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    MatchMasks::new(pattern).score(partner)
}

/// Exhaustive recursive reference, no memoization. Exponential; refuses
/// inputs where the shorter string exceeds 14 letters.
pub fn lcs_oracle(a: &[u8], b: &[u8]) -> Result<LcsScore> {
    const CAP: usize = 14;
    let min_len = a.len().min(b.len());
    if min_len > CAP {
        return Err(Error::OverCap {
            what: "recursive LCS reference",
            cap: CAP,
            got: min_len,
        });
    }
    fn rec(a: &[u8], b: &[u8]) -> usize {
        match (a.split_last(), b.split_last()) {
            (Some((&x, ra)), Some((&y, rb))) => {
                if x == y {
                    rec(ra, rb) + 1
                } else {
                    rec(ra, b).max(rec(a, rb))
                }
            }
            _ => 0,
        }
    }
    Ok(rec(a, b))
}

/// Heaviest-path reference on the alignment grid.
///
/// Vertices are `(i, j)` for `0 ≤ i ≤ |a|`, `0 ≤ j ≤ |b|`; step-right and
/// step-down edges carry weight 0, and the diagonal edge into `(i, j)`
/// exists with weight 1 exactly when `a[i-1] == b[j-1]` (a non-match
/// diagonal is simply never taken). Returns the heaviest path weight from
/// `(0,0)` to `(|a|,|b|)`; equals the LCS length.
pub fn lcs_lpp_oracle(a: &[u8], b: &[u8]) -> LcsScore {
    let (h, w) = (a.len() + 1, b.len() + 1);
    let mut best = vec![0u32; h * w];
    for i in 0..h {
        for j in 0..w {
            if i == 0 && j == 0 {
                continue;
            }
            let mut v = 0u32;
            if i > 0 {
                v = v.max(best[(i - 1) * w + j]);
            }
            if j > 0 {
                v = v.max(best[i * w + j - 1]);
            }
            if i > 0 && j > 0 && a[i - 1] == b[j - 1] {
                v = v.max(best[(i - 1) * w + (j - 1)] + 1);
            }
            best[i * w + j] = v;
        }
    }
    best[h * w - 1] as usize
}
