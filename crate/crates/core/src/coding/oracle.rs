//! Exhaustive search over complete codes, used as a test oracle.

use crate::analysis::paoi_ideal;
use crate::coding::{moments, CodeMoments, PenaltyWeights};
use crate::error::{Error, Result};
use crate::source_model::{ArrivalSpec, SourcePmf};

/// What the brute-force search minimizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    MeanLength,
    Penalty(PenaltyWeights),
    /// Peak age of the ideal (empty-buffer signaling) system at this rate.
    /// Unstable codes are skipped.
    PaoiAt(ArrivalSpec),
}

impl Objective {
    fn eval(&self, m: &CodeMoments) -> Option<f64> {
        match *self {
            Objective::MeanLength => Some(m.mean_len),
            Objective::Penalty(w) => Some(m.penalty(w)),
            Objective::PaoiAt(a) => paoi_ideal(a.q(), m).ok(),
        }
    }
}

const MAX_SYMBOLS: usize = 8;
const MAX_DEPTH: usize = 8;

/// All non-decreasing length vectors of size `n` with Kraft sum exactly one
/// and every length at most `max_len`.
pub(crate) fn complete_sorted_lengths(n: usize, max_len: usize) -> Vec<Vec<u32>> {
    fn rec(
        remaining: usize,
        min_len: u32,
        max_len: u32,
        budget: u64,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if remaining == 0 {
            if budget == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for l in min_len..=max_len {
            let w = 1u64 << (max_len - l);
            // The remaining codewords are at least this long, so each uses
            // at most `w` units, and at most `max_len` long, so each uses at
            // least one.
            if w > budget || w * (remaining as u64) < budget {
                continue;
            }
            if budget - w < remaining as u64 - 1 {
                continue;
            }
            cur.push(l);
            rec(remaining - 1, l, max_len, budget - w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let max_len = max_len as u32;
    rec(n, 1, max_len, 1u64 << max_len, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Minimizer of `objective` over every complete code with lengths at most
/// `max_len`, together with its objective value.
///
/// Sorted lengths are assigned to symbols in [`SourcePmf::rank_order`].
/// Ties keep the first minimizer in enumeration order.
pub fn brute_force_optimum(pmf: &SourcePmf, objective: Objective, max_len: usize) -> Result<(Vec<u32>, f64)> {
    let n = pmf.len();
    if n > MAX_SYMBOLS || max_len > MAX_DEPTH {
        return Err(Error::OracleTooLarge { symbols: n, max_len });
    }
    let rank = pmf.rank_order();
    let mut best: Option<(Vec<u32>, f64)> = None;
    for sorted in complete_sorted_lengths(n, max_len) {
        let mut lengths = vec![0u32; n];
        for (&sym, &l) in rank.iter().zip(&sorted) {
            lengths[sym] = l;
        }
        let m = moments(pmf, &lengths)?;
        let Some(value) = objective.eval(&m) else { continue };
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((lengths, value));
        }
    }
    match best {
        Some(b) => Ok(b),
        None if complete_sorted_lengths(n, max_len).is_empty() => {
            Err(Error::Infeasible { symbols: n, max_len })
        }
        None => {
            let q = match objective {
                Objective::PaoiAt(a) => a.q(),
                _ => unreachable!("only the PAoI objective can reject codes"),
            };
            let min_mean = brute_force_optimum(pmf, Objective::MeanLength, max_len)?.1;
            Err(Error::Unstable { mean_service: min_mean, inv_q: 1.0 / q })
        }
    }
}

/// Length vector part of [`brute_force_optimum`].
pub fn brute_force_optimal_lengths(
    pmf: &SourcePmf,
    objective: Objective,
    max_len: usize,
) -> Result<Vec<u32>> {
    brute_force_optimum(pmf, objective, max_len).map(|(l, _)| l)
}
