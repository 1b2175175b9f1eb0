//! Lower-left boundary of the achievable `(E[L], E[L²])` region and the
//! age-optimal code on it.
//!
//! Every boundary vertex minimizes some linear penalty
//! `alpha E[L] + beta E[L²]`. Starting from the two extremes `(1, 0)` and
//! `(0, 1)`, each segment between adjacent known codes is probed with the
//! weights normal to it; a code strictly below the segment splits it in
//! two, otherwise the segment is final.

use std::collections::BTreeMap;

use crate::analysis::paoi_ideal;
use crate::coding::package_merge::effective_max_len;
use crate::coding::{
    canonical_assign, min_linear_penalty_lengths, moments, CodeMoments, Codebook, PenaltyWeights,
};
use crate::error::{Error, Result};
use crate::source_model::{ArrivalSpec, SourcePmf};

/// Relative margin by which a probe must beat a segment to split it.
const SPLIT_TOLERANCE: f64 = 1e-9;

/// A code on the boundary: lengths aligned with the PMF and their moments.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCode {
    pub lengths: Vec<u32>,
    pub moments: CodeMoments,
}

impl BoundaryCode {
    fn solve(pmf: &SourcePmf, w: PenaltyWeights, max_len: usize) -> Result<Self> {
        let lengths = min_linear_penalty_lengths(pmf, w, max_len)?;
        let moments = moments(pmf, &lengths)?;
        Ok(Self { lengths, moments })
    }

    fn multiset(&self) -> Vec<u32> {
        let mut k = self.lengths.clone();
        k.sort_unstable();
        k
    }

    fn x(&self) -> f64 {
        self.moments.mean_len
    }

    fn y(&self) -> f64 {
        self.moments.second_moment
    }
}

/// All distinct length multisets on the lower-left convex boundary,
/// sorted by ascending `E[L]` (and therefore strictly descending `E[L²]`).
pub fn boundary_codes(pmf: &SourcePmf, max_len: usize) -> Result<Vec<BoundaryCode>> {
    let max_len = effective_max_len(pmf.len(), max_len)?;
    let mut found: BTreeMap<Vec<u32>, BoundaryCode> = BTreeMap::new();

    let left = BoundaryCode::solve(pmf, PenaltyWeights::MEAN, max_len)?;
    let right = BoundaryCode::solve(pmf, PenaltyWeights::SECOND_MOMENT, max_len)?;
    found.insert(left.multiset(), left.clone());
    found.insert(right.multiset(), right.clone());

    let mut segments = vec![(left, right)];
    while let Some((a, b)) = segments.pop() {
        let alpha = a.y() - b.y();
        let beta = b.x() - a.x();
        // Degenerate or dominated pair: nothing lies strictly between.
        let Ok(w) = PenaltyWeights::new(alpha, beta) else { continue };
        let probe = BoundaryCode::solve(pmf, w, max_len)?;
        let bar = a.moments.penalty(w);
        if probe.moments.penalty(w) < bar - SPLIT_TOLERANCE * bar.abs() {
            let key = probe.multiset();
            if found.insert(key, probe.clone()).is_none() {
                segments.push((a, probe.clone()));
                segments.push((probe, b));
            }
        }
    }

    Ok(lower_left_chain(found.into_values().collect()))
}

/// Keeps the strictly convex, strictly decreasing lower-left chain.
fn lower_left_chain(mut codes: Vec<BoundaryCode>) -> Vec<BoundaryCode> {
    codes.sort_by(|a, b| a.x().total_cmp(&b.x()).then(a.y().total_cmp(&b.y())));
    // Lowest second moment per mean length.
    codes.dedup_by(|later, earlier| later.x() == earlier.x());

    let mut hull: Vec<BoundaryCode> = Vec::with_capacity(codes.len());
    for c in codes {
        while hull.len() >= 2 {
            let (o, a) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            let cross = (a.x() - o.x()) * (c.y() - o.y()) - (a.y() - o.y()) * (c.x() - o.x());
            let scale = (a.x() - o.x()).abs().max(1.0) * (c.y() - o.y()).abs().max(1.0);
            if cross <= 1e-12 * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(c);
    }
    // Past the minimum of E[L²] the lower hull climbs again; that part is
    // not on the lower-left boundary.
    let lowest =
        hull.iter().enumerate().min_by(|(_, a), (_, b)| a.y().total_cmp(&b.y())).map(|(i, _)| i).unwrap_or(0);
    hull.truncate(lowest + 1);
    hull
}

/// Minimizes `objective` over boundary codes for which it is defined.
///
/// Codes are visited by ascending `E[L]` and only a strictly smaller value
/// replaces the incumbent, so ties go to the smaller mean length.
pub fn select_on_boundary<F>(codes: &[BoundaryCode], objective: F) -> Option<(usize, f64)>
where
    F: Fn(&CodeMoments) -> Option<f64>,
{
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in codes.iter().enumerate() {
        if let Some(v) = objective(&c.moments) {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    best
}

/// The boundary code minimizing `objective`, or an instability error
/// carrying the smallest achievable mean length when no code qualifies.
pub fn age_optimal_code_by<F>(
    pmf: &SourcePmf,
    max_len: usize,
    inv_q: f64,
    objective: F,
) -> Result<BoundaryCode>
where
    F: Fn(&CodeMoments) -> Option<f64>,
{
    let codes = boundary_codes(pmf, max_len)?;
    match select_on_boundary(&codes, objective) {
        Some((i, _)) => Ok(codes[i].clone()),
        None => Err(Error::Unstable { mean_service: codes[0].moments.mean_len, inv_q }),
    }
}

/// The boundary code with the lowest ideal-framing peak age at `arrival`.
pub fn age_optimal_code(pmf: &SourcePmf, arrival: ArrivalSpec, max_len: usize) -> Result<Codebook> {
    let q = arrival.q();
    let code = age_optimal_code_by(pmf, max_len, 1.0 / q, |m| paoi_ideal(q, m).ok())?;
    canonical_assign(pmf, &code.lengths)
}
