//! Minimum linear-penalty codes via Package-Merge.
//!
//! The penalty `sum p_i (alpha l_i + beta l_i^2)` is additive over levels:
//! growing symbol `i` from `l - 1` to `l` bits costs
//! `p_i (alpha + beta (2l - 1))` and consumes width `2^-l`. A complete code
//! is a selection of such coins with total width `n - 1`, which is a binary
//! coin collector's problem. Package-Merge solves it greedily from the
//! deepest level upward.

use crate::coding::PenaltyWeights;
use crate::error::{Error, Result};
use crate::source_model::SourcePmf;

/// Smallest `L` with `n <= 2^L`.
pub(crate) fn min_feasible_len(n: usize) -> usize {
    let mut l = 0;
    while (1usize << l) < n {
        l += 1;
    }
    l.max(1)
}

/// Effective depth bound: no complete code on `n` symbols is deeper than
/// `n - 1`, so larger bounds are clamped.
pub(crate) fn effective_max_len(n: usize, max_len: usize) -> Result<usize> {
    if max_len < min_feasible_len(n) {
        return Err(Error::Infeasible { symbols: n, max_len });
    }
    Ok(max_len.min(n - 1).max(1))
}

/// Length vector (aligned with `pmf`) of a complete prefix code minimizing
/// `alpha E[L] + beta E[L²]` subject to every length being at most
/// `max_len`.
///
/// Lengths are handed out in [`SourcePmf::rank_order`]: the shortest
/// lengths go to the most probable symbols, ties to the earlier symbol.
pub fn min_linear_penalty_lengths(pmf: &SourcePmf, w: PenaltyWeights, max_len: usize) -> Result<Vec<u32>> {
    let n = pmf.len();
    let depth = effective_max_len(n, max_len)?;

    // Coin order inside every level: ascending probability, ties by index.
    // The per-level factor `level_cost` is positive, so this is also
    // ascending cost, identically at every level.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pmf.probs()[a].total_cmp(&pmf.probs()[b]).then(a.cmp(&b)));
    let probs: Vec<f64> = order.iter().map(|&i| pmf.probs()[i]).collect();

    // is_package[level - 1][k]: whether entry k of that level's merged list
    // is a package (vs. an individual coin).
    let mut is_package: Vec<Vec<bool>> = vec![Vec::new(); depth];
    let mut costs: Vec<f64> = probs.iter().map(|p| p * w.level_cost(depth as u32)).collect();
    is_package[depth - 1] = vec![false; n];

    for level in (1..depth).rev() {
        let factor = w.level_cost(level as u32);
        let packages: Vec<f64> = costs.chunks_exact(2).map(|c| c[0] + c[1]).collect();
        let mut merged = Vec::with_capacity(n + packages.len());
        let mut flags = Vec::with_capacity(n + packages.len());
        let (mut i, mut j) = (0, 0);
        while i < n || j < packages.len() {
            let take_item = match (probs.get(i), packages.get(j)) {
                // Items win ties.
                (Some(p), Some(&pkg)) => p * factor <= pkg,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if take_item {
                merged.push(probs[i] * factor);
                flags.push(false);
                i += 1;
            } else {
                merged.push(packages[j]);
                flags.push(true);
                j += 1;
            }
        }
        costs = merged;
        is_package[level - 1] = flags;
    }

    // Select the 2(n - 1) cheapest level-1 entries and expand packages
    // downward. Items at each level keep `order`, so the selected items are
    // always a prefix of it.
    let mut sorted_lengths = vec![0u32; n];
    let mut take = 2 * (n - 1);
    for flags in &is_package {
        let selected = &flags[..take];
        let packages = selected.iter().filter(|&&f| f).count();
        let items = take - packages;
        for len in &mut sorted_lengths[..items] {
            *len += 1;
        }
        take = 2 * packages;
        if take == 0 {
            break;
        }
    }

    // sorted_lengths[k] belongs to the k-th least probable symbol; reassign
    // so ties in probability go shortest-first in rank order.
    let mut by_length = sorted_lengths;
    by_length.sort_unstable();
    let mut lengths = vec![0u32; n];
    for (&sym, &len) in pmf.rank_order().iter().zip(&by_length) {
        lengths[sym] = len;
    }
    Ok(lengths)
}

/// Optimal (minimum `E[L]`) code lengths, unconstrained in depth.
pub fn huffman_lengths(pmf: &SourcePmf) -> Vec<u32> {
    min_linear_penalty_lengths(pmf, PenaltyWeights::MEAN, pmf.len() - 1)
        .expect("depth n - 1 is always feasible")
}
