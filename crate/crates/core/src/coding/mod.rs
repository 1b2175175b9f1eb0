//! Prefix-free code construction.
//!
//! The pipeline is: choose codeword *lengths* (Huffman, a minimum linear
//! penalty code via Package-Merge, or the age-optimal code picked from the
//! lower-left boundary of the `(E[L], E[L²])` region), then turn the lengths
//! into bits with [`canonical_assign`].

mod hull;
mod oracle;
mod package_merge;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

pub use hull::{age_optimal_code, age_optimal_code_by, boundary_codes, select_on_boundary, BoundaryCode};
pub use oracle::{brute_force_optimal_lengths, brute_force_optimum, Objective};
pub use package_merge::{huffman_lengths, min_linear_penalty_lengths};

use crate::error::{Error, Result};
use crate::source_model::SourcePmf;

/// A binary codeword.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Codeword(Vec<bool>);

impl Codeword {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True if `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Codeword) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Codeword {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit {other:?} in codeword {s:?}")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .and_then(
                |bits| {
                    if bits.is_empty() {
                        Err("empty codeword".to_string())
                    } else {
                        Ok(Codeword(bits))
                    }
                },
            )
    }
}

/// A prefix-free codeword table, aligned with the source's symbol order.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    symbols: Vec<String>,
    codewords: Vec<Codeword>,
}

impl Codebook {
    /// Builds a codebook from explicit codewords, checking that every
    /// codeword is non-empty and that no codeword is a prefix of another.
    pub fn new(symbols: Vec<String>, codewords: Vec<Codeword>) -> Result<Self> {
        if symbols.len() != codewords.len() {
            return Err(Error::Alignment { symbols: symbols.len(), lengths: codewords.len() });
        }
        if codewords.iter().any(Codeword::is_empty) {
            return Err(Error::ZeroLength);
        }
        let book = Self { symbols, codewords };
        if let Some((a, b)) = book.prefix_violation() {
            return Err(Error::InvalidAlphabet(format!(
                "codeword of {} is a prefix of the codeword of {}",
                book.symbols[a], book.symbols[b]
            )));
        }
        Ok(book)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn lengths(&self) -> Vec<u32> {
        self.codewords.iter().map(|c| c.len() as u32).collect()
    }

    pub fn codeword(&self, symbol: &str) -> Option<&Codeword> {
        self.symbols.iter().position(|s| s == symbol).map(|i| &self.codewords[i])
    }

    pub fn max_len(&self) -> usize {
        self.codewords.iter().map(Codeword::len).max().unwrap_or(0)
    }

    pub fn kraft_sum(&self) -> f64 {
        kraft_sum(&self.lengths())
    }

    /// Exact comparison of the Kraft sum against one.
    pub fn kraft_status(&self) -> Ordering {
        kraft_cmp(&self.lengths())
    }

    /// First pair `(a, b)` with codeword `a` a prefix of codeword `b`.
    pub fn prefix_violation(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.codewords[a].cmp(&self.codewords[b]));
        // In lexicographic order a prefix sorts immediately before some
        // extension of it, so adjacent pairs suffice.
        order
            .windows(2)
            .find(|w| self.codewords[w[0]].is_prefix_of(&self.codewords[w[1]]))
            .map(|w| (w[0], w[1]))
    }

    /// Moments of the codeword length under `pmf`.
    pub fn moments(&self, pmf: &SourcePmf) -> Result<CodeMoments> {
        moments(pmf, &self.lengths())
    }
}

/// `E[L]` and `E[L²]` of a code under a source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeMoments {
    pub mean_len: f64,
    pub second_moment: f64,
}

impl CodeMoments {
    pub fn new(mean_len: f64, second_moment: f64) -> Self {
        Self { mean_len, second_moment }
    }

    /// Moments of `L + 1`, the on-wire length when a flag bit is prepended.
    pub fn plus_one(&self) -> Self {
        Self { mean_len: self.mean_len + 1.0, second_moment: self.second_moment + 2.0 * self.mean_len + 1.0 }
    }

    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean_len * self.mean_len
    }

    /// `alpha E[L] + beta E[L²]`.
    pub fn penalty(&self, w: PenaltyWeights) -> f64 {
        w.alpha() * self.mean_len + w.beta() * self.second_moment
    }
}

/// Weights of the linear penalty `alpha E[L] + beta E[L²]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyWeights {
    alpha: f64,
    beta: f64,
}

impl PenaltyWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha >= 0.0 && beta >= 0.0 && alpha + beta > 0.0 && (alpha + beta).is_finite() {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::InvalidWeights { alpha, beta })
        }
    }

    /// `(1, 0)`: minimize the mean length.
    pub const MEAN: Self = Self { alpha: 1.0, beta: 0.0 };
    /// `(0, 1)`: minimize the second moment.
    pub const SECOND_MOMENT: Self = Self { alpha: 0.0, beta: 1.0 };

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Cost of growing a codeword from `level - 1` to `level` bits, per unit
    /// of probability.
    pub(crate) fn level_cost(&self, level: u32) -> f64 {
        self.alpha + self.beta * (2 * level - 1) as f64
    }
}

/// `sum 2^-l` in floating point.
pub fn kraft_sum(lengths: &[u32]) -> f64 {
    lengths.iter().map(|&l| 2f64.powi(-(l as i32))).sum()
}

/// Exact comparison of `sum 2^-l` against one.
///
/// Counts are carried from the deepest level upward, rounding up, so the
/// count left at the root is `ceil(sum)`; the sum equals one exactly iff no
/// rounding ever happened and that count is one.
pub fn kraft_cmp(lengths: &[u32]) -> Ordering {
    let Some(&deepest) = lengths.iter().max() else {
        return Ordering::Less;
    };
    let mut counts = vec![0u64; deepest as usize + 1];
    for &l in lengths {
        counts[l as usize] += 1;
    }
    let mut exact = true;
    let mut carry = 0u64;
    for level in (1..=deepest as usize).rev() {
        let units = counts[level] + carry;
        exact &= units.is_multiple_of(2);
        carry = units.div_ceil(2);
    }
    let root = carry + counts[0];
    match root.cmp(&1) {
        Ordering::Equal if !exact => Ordering::Less,
        other => other,
    }
}

/// Moments of the codeword length; `lengths` is aligned with the PMF.
pub fn moments(pmf: &SourcePmf, lengths: &[u32]) -> Result<CodeMoments> {
    if lengths.len() != pmf.len() {
        return Err(Error::Alignment { symbols: pmf.len(), lengths: lengths.len() });
    }
    let (mut m1, mut m2) = (0.0, 0.0);
    for (&p, &l) in pmf.probs().iter().zip(lengths) {
        let l = l as f64;
        m1 += p * l;
        m2 += p * l * l;
    }
    Ok(CodeMoments::new(m1, m2))
}

/// Canonical code for the given lengths.
///
/// Symbols are ordered by (length, position in the PMF) and receive
/// lexicographically increasing codewords.
pub fn canonical_assign(pmf: &SourcePmf, lengths: &[u32]) -> Result<Codebook> {
    canonical_assign_symbols(pmf.symbols(), lengths)
}

pub(crate) fn canonical_assign_symbols(symbols: &[String], lengths: &[u32]) -> Result<Codebook> {
    if lengths.len() != symbols.len() {
        return Err(Error::Alignment { symbols: symbols.len(), lengths: lengths.len() });
    }
    if lengths.contains(&0) {
        return Err(Error::ZeroLength);
    }
    if kraft_cmp(lengths) == Ordering::Greater {
        return Err(Error::KraftViolation);
    }
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| (lengths[i], i));

    let mut codewords = vec![Codeword::default(); lengths.len()];
    // Binary counter, most significant bit first.
    let mut next: Vec<bool> = Vec::new();
    for &i in &order {
        next.resize(lengths[i] as usize, false);
        codewords[i] = Codeword(next.clone());
        increment(&mut next);
    }
    Codebook::new(symbols.to_vec(), codewords)
}

fn increment(bits: &mut [bool]) {
    for b in bits.iter_mut().rev() {
        if *b {
            *b = false;
        } else {
            *b = true;
            return;
        }
    }
}
