//! Closed-form peak-age results for the streaming system.
//!
//! With Bernoulli(q) arrivals and a codeword of `L` bits taking `L` slots,
//! the encoder buffer is a discrete-time Geo/G/1 queue with service time
//! `S = L`. Each age peak is `W_k + S_k + Y_k` (wait, service and the
//! preceding interarrival), so the average peak age is
//! `E[W] + E[L] + 1/q` with the Geo/G/1 mean wait
//! `E[W] = (E[L²] - E[L]) / (2 (1/q - E[L]))`.
//!
//! All functions take the arrival probability as a plain `f64` so that they
//! can be evaluated on grids that include the boundary; instability is a
//! typed error rather than an infinity.

use crate::coding::CodeMoments;
use crate::error::{Error, Result};

/// The queue is stable iff `E[L] < 1/q`.
pub fn is_stable(q: f64, m: &CodeMoments) -> bool {
    m.mean_len < 1.0 / q
}

fn check_stable(q: f64, m: &CodeMoments) -> Result<()> {
    if is_stable(q, m) {
        Ok(())
    } else {
        Err(Error::Unstable { mean_service: m.mean_len, inv_q: 1.0 / q })
    }
}

/// Mean waiting time in the buffer, in slots.
pub fn expected_waiting(q: f64, m: &CodeMoments) -> Result<f64> {
    check_stable(q, m)?;
    Ok((m.second_moment - m.mean_len) / (2.0 * (1.0 / q - m.mean_len)))
}

/// Average peak age with free empty-buffer signaling.
pub fn paoi_ideal(q: f64, m: &CodeMoments) -> Result<f64> {
    Ok(expected_waiting(q, m)? + m.mean_len + 1.0 / q)
}

/// Average peak age when every codeword carries a leading `1` flag bit and
/// an idle buffer sends a lone `0`.
///
/// Stable iff `E[L] + 1 < 1/q`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must count as unstable
pub fn paoi_naive(q: f64, m: &CodeMoments) -> Result<f64> {
    let z = 1.0 / q;
    if !(m.mean_len + 1.0 < z) {
        return Err(Error::Unstable { mean_service: m.mean_len + 1.0, inv_q: z });
    }
    Ok((m.second_moment + m.mean_len) / (2.0 * (z - m.mean_len - 1.0)) + m.mean_len + 1.0 + z)
}

/// Arrival rate minimizing [`paoi_ideal`] for fixed code moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalRate {
    /// Unconstrained minimizer; may exceed one for moments no real code has.
    pub q_star: f64,
    /// Peak age at `q_star`.
    pub paoi: f64,
    /// `q_star <= 1`.
    pub feasible: bool,
    /// The closest admissible rate, `min(q_star, 1)`.
    pub q_clamped: f64,
}

/// `1/q* = sqrt((E[L²] - E[L]) / 2) + E[L]` and
/// `PAoI(q*) = sqrt(2 (E[L²] - E[L])) + 2 E[L]`.
pub fn optimal_arrival_rate(m: &CodeMoments) -> OptimalRate {
    let spread = (m.second_moment - m.mean_len).max(0.0);
    let inv_q = (spread / 2.0).sqrt() + m.mean_len;
    let q_star = 1.0 / inv_q;
    OptimalRate {
        q_star,
        paoi: (2.0 * spread).sqrt() + 2.0 * m.mean_len,
        feasible: q_star <= 1.0,
        q_clamped: q_star.min(1.0),
    }
}

/// Which closed form an [`AnalyticReport`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Framing {
    /// Empty-buffer signal costs nothing.
    Ideal,
    /// One flag bit per message plus a `0` per idle slot.
    Naive,
}

/// Peak age together with its decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticReport {
    pub q: f64,
    pub moments: CodeMoments,
    /// `E[W] + E[S] + E[Y]`; infinite when unstable.
    pub paoi: f64,
    /// Infinite when unstable.
    pub waiting: f64,
    pub service: f64,
    pub interarrival: f64,
    pub load: f64,
    pub stable: bool,
    /// Optimal rate for the service-time moments of this framing.
    pub q_star: Option<OptimalRate>,
}

impl AnalyticReport {
    pub fn evaluate(q: f64, m: &CodeMoments, framing: Framing) -> Self {
        let service_moments = match framing {
            Framing::Ideal => *m,
            Framing::Naive => m.plus_one(),
        };
        let service = service_moments.mean_len;
        let interarrival = 1.0 / q;
        let (stable, waiting) = match expected_waiting(q, &service_moments) {
            Ok(w) => (true, w),
            Err(_) => (false, f64::INFINITY),
        };
        Self {
            q,
            moments: *m,
            paoi: waiting + service + interarrival,
            waiting,
            service,
            interarrival,
            load: q * service,
            stable,
            q_star: Some(optimal_arrival_rate(&service_moments)),
        }
    }
}
