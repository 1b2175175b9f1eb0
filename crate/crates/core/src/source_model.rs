//! Discrete memoryless sources and the Bernoulli arrival process.
//!
//! A [`SourcePmf`] is an ordered alphabet with strictly positive
//! probabilities. The order of the symbols is significant: it is the
//! canonical tie-break order used by every code construction downstream.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Tolerance on `|sum(p) - 1|` accepted when validating a PMF.
pub const PMF_SUM_TOLERANCE: f64 = 1e-12;

/// Probabilities below this are rejected outright.
pub const MIN_PROBABILITY: f64 = 1e-12;

/// Identifier reserved for the empty-buffer (null) symbol in serialized
/// schemes. Sources may not use it.
pub const NULL_SYMBOL: &str = "NULL";

/// A finite alphabet together with its probability mass function.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePmf {
    symbols: Vec<String>,
    probs: Vec<f64>,
}

impl SourcePmf {
    /// Validates and builds a PMF.
    ///
    /// Requires at least two symbols, unique whitespace-free identifiers,
    /// every probability at least [`MIN_PROBABILITY`] and a total within
    /// [`PMF_SUM_TOLERANCE`] of one.
    pub fn new(symbols: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if symbols.len() != probs.len() {
            return Err(Error::InvalidPmf(format!(
                "{} symbols but {} probabilities",
                symbols.len(),
                probs.len()
            )));
        }
        if symbols.len() < 2 {
            return Err(Error::InvalidAlphabet(format!("need at least 2 symbols, got {}", symbols.len())));
        }
        let mut seen = HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if s.is_empty() || s.chars().any(char::is_whitespace) || s.starts_with('#') {
                return Err(Error::InvalidAlphabet(format!("bad symbol identifier {s:?}")));
            }
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {s:?}")));
            }
        }
        for (s, &p) in symbols.iter().zip(&probs) {
            if !p.is_finite() || p < MIN_PROBABILITY {
                return Err(Error::InvalidPmf(format!("probability of {s:?} is {p}")));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(Error::InvalidPmf(format!("probabilities sum to {total}")));
        }
        Ok(Self { symbols, probs })
    }

    /// Builds a PMF over the symbols `x1, x2, ...`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let symbols = (1..=probs.len()).map(|i| format!("x{i}")).collect();
        Self::new(symbols, probs)
    }

    /// Normalizes non-negative weights and labels them `x1, x2, ...`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects a NaN sum too
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidPmf("weights must have a positive sum".into()));
        }
        Self::from_probs(weights.iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Always false; kept for the `len`/`is_empty` pairing clippy expects.
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Shannon entropy in bits per symbol.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().map(|&p| p * p.log2()).sum::<f64>()
    }

    /// Symbol indices ordered by descending probability, ties by ascending
    /// index. Shorter codewords go to the front of this order.
    pub fn rank_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.probs[b].total_cmp(&self.probs[a]).then(a.cmp(&b)));
        order
    }
}

impl fmt::Display for SourcePmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, p) in self.symbols.iter().zip(&self.probs) {
            writeln!(f, "{s} {p}")?;
        }
        Ok(())
    }
}

/// The uniform distribution over `n` symbols.
pub fn uniform_pmf(n: usize) -> Result<SourcePmf> {
    if n < 2 {
        return Err(Error::InvalidAlphabet(format!("need at least 2 symbols, got {n}")));
    }
    SourcePmf::from_probs(vec![1.0 / n as f64; n])
}

/// The Zipf distribution: rank `x` has probability proportional to `x^-s`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN exponents too
pub fn zipf_pmf(n: usize, s: f64) -> Result<SourcePmf> {
    if n < 2 {
        return Err(Error::InvalidAlphabet(format!("need at least 2 symbols, got {n}")));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidPmf(format!("zipf exponent must be finite and >= 0, got {s}")));
    }
    let weights: Vec<f64> = (1..=n).map(|x| (x as f64).powf(-s)).collect();
    let norm: f64 = weights.iter().sum();
    SourcePmf::from_probs(weights.into_iter().map(|w| w / norm).collect())
}

/// Free-function form of [`SourcePmf::entropy`].
pub fn entropy(pmf: &SourcePmf) -> f64 {
    pmf.entropy()
}

/// Per-slot Bernoulli arrival probability `q`, with `0 < q < 1`.
///
/// Interarrival times are Geometric(q) with mean `1/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalSpec {
    q: f64,
}

impl ArrivalSpec {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(Self { q })
        } else {
            Err(Error::InvalidArrival(q))
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mean_interarrival(&self) -> f64 {
        1.0 / self.q
    }
}
