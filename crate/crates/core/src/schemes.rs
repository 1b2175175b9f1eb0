//! Empty-buffer framing schemes.
//!
//! A scheme fixes what goes on the wire for each message and what the
//! encoder sends when its buffer is empty at a codeword boundary:
//!
//! | kind        | message on wire | empty buffer            |
//! |-------------|-----------------|-------------------------|
//! | Ideal       | `E(x)`          | free signal φ (no bit)  |
//! | Naive       | `1 E(x)`        | `0`                     |
//! | Predictive  | `E(x)`          | `E(∅)`                  |
//! | Adaptive    | `E(x)`          | `E(∅)`, preemptible     |
//!
//! For the last two, `E(∅)` is an ordinary codeword of one prefix-free
//! complete code over the alphabet extended with the null symbol.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::analysis::{paoi_ideal, paoi_naive};
use crate::coding::{
    age_optimal_code, boundary_codes, canonical_assign, select_on_boundary, Codebook, Codeword,
};
use crate::error::{Error, Result};
use crate::source_model::{ArrivalSpec, SourcePmf, NULL_SYMBOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Ideal,
    Naive,
    Predictive,
    Adaptive,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] =
        [SchemeKind::Ideal, SchemeKind::Naive, SchemeKind::Predictive, SchemeKind::Adaptive];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Ideal => "ideal",
            SchemeKind::Naive => "naive",
            SchemeKind::Predictive => "predictive",
            SchemeKind::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}

/// A framing scheme with its codebook(s).
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    kind: SchemeKind,
    message_codebook: Codebook,
    null_codeword: Option<Codeword>,
    null_prob_used: Option<f64>,
}

impl SchemeSpec {
    /// Validates the per-kind invariants: Ideal and Naive carry no null
    /// codeword; Predictive and Adaptive carry one which, together with the
    /// message codewords, forms a complete prefix-free code.
    pub fn new(
        kind: SchemeKind,
        message_codebook: Codebook,
        null_codeword: Option<Codeword>,
        null_prob_used: Option<f64>,
    ) -> Result<Self> {
        if let Some(p) = null_prob_used {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::DegenerateLoad { p_null: p });
            }
        }
        match (kind, &null_codeword) {
            (SchemeKind::Ideal | SchemeKind::Naive, Some(_)) => {
                return Err(Error::InvalidAlphabet(format!("{kind} scheme does not use a null codeword")))
            }
            (SchemeKind::Predictive | SchemeKind::Adaptive, None) => return Err(Error::MissingNullCodeword),
            _ => {}
        }
        if message_codebook.codeword(NULL_SYMBOL).is_some() {
            return Err(Error::InvalidAlphabet(format!("{NULL_SYMBOL} is reserved")));
        }
        let spec = Self { kind, message_codebook, null_codeword, null_prob_used };
        if let Some(union) = spec.union_codebook()? {
            if union.kraft_status() != Ordering::Equal {
                return Err(Error::KraftViolation);
            }
        }
        Ok(spec)
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn message_codebook(&self) -> &Codebook {
        &self.message_codebook
    }

    pub fn null_codeword(&self) -> Option<&Codeword> {
        self.null_codeword.as_ref()
    }

    pub fn null_prob_used(&self) -> Option<f64> {
        self.null_prob_used
    }

    /// Whether an in-progress null codeword may be abandoned for a message.
    pub fn preemptible(&self) -> bool {
        self.kind == SchemeKind::Adaptive
    }

    /// Message codewords plus `NULL`, for schemes that have a null codeword.
    pub fn union_codebook(&self) -> Result<Option<Codebook>> {
        let Some(null) = &self.null_codeword else { return Ok(None) };
        let mut symbols = self.message_codebook.symbols().to_vec();
        let mut words = self.message_codebook.codewords().to_vec();
        symbols.push(NULL_SYMBOL.to_string());
        words.push(null.clone());
        Codebook::new(symbols, words).map(Some)
    }

    /// Bits sent for message symbol `index`.
    pub fn message_bits(&self, index: usize) -> Vec<bool> {
        let word = self.message_codebook.codewords()[index].bits();
        match self.kind {
            SchemeKind::Naive => std::iter::once(true).chain(word.iter().copied()).collect(),
            _ => word.to_vec(),
        }
    }

    /// Bits sent when the buffer is empty at a codeword boundary; `None`
    /// means a free idle signal.
    pub fn idle_bits(&self) -> Option<Vec<bool>> {
        match self.kind {
            SchemeKind::Ideal => None,
            SchemeKind::Naive => Some(vec![false]),
            SchemeKind::Predictive | SchemeKind::Adaptive => {
                self.null_codeword.as_ref().map(|c| c.bits().to_vec())
            }
        }
    }

    /// Number of bits a message of symbol `index` occupies on the wire.
    pub fn service_bits(&self, index: usize) -> usize {
        self.message_codebook.codewords()[index].len() + usize::from(self.kind == SchemeKind::Naive)
    }

    /// Length of the longest codeword that can appear on the wire.
    pub fn max_wire_len(&self) -> usize {
        let msg = self.message_codebook.max_len() + usize::from(self.kind == SchemeKind::Naive);
        msg.max(self.null_codeword.as_ref().map_or(0, Codeword::len))
    }

    /// Mean on-wire message length under `pmf`.
    pub fn mean_service(&self, pmf: &SourcePmf) -> Result<f64> {
        let m = self.message_codebook.moments(pmf)?;
        Ok(m.mean_len + f64::from(u8::from(self.kind == SchemeKind::Naive)))
    }
}

/// The preemption rule: with `sent` bits of the null codeword already on
/// the wire, a message whose codeword strictly extends them takes over.
pub fn can_switch(sent: &[bool], message: &Codeword) -> bool {
    sent.len() < message.len() && message.bits().starts_with(sent)
}

/// Ideal scheme: the age-optimal code, φ on empty.
pub fn build_ideal(pmf: &SourcePmf, arrival: ArrivalSpec, max_len: usize) -> Result<SchemeSpec> {
    let book = age_optimal_code(pmf, arrival, max_len)?;
    SchemeSpec::new(SchemeKind::Ideal, book, None, None)
}

/// Options for [`build_naive_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NaiveOptions {
    /// Pick the boundary code minimizing the naive peak age instead of
    /// reusing the ideal age-optimal code.
    pub reoptimize: bool,
}

/// Naive scheme with the ideal age-optimal code and a flag bit.
pub fn build_naive(pmf: &SourcePmf, arrival: ArrivalSpec, max_len: usize) -> Result<SchemeSpec> {
    build_naive_with(pmf, arrival, max_len, NaiveOptions::default())
}

pub fn build_naive_with(
    pmf: &SourcePmf,
    arrival: ArrivalSpec,
    max_len: usize,
    options: NaiveOptions,
) -> Result<SchemeSpec> {
    let q = arrival.q();
    let book = if options.reoptimize {
        let codes = boundary_codes(pmf, max_len)?;
        let (i, _) = select_on_boundary(&codes, |m| paoi_naive(q, m).ok())
            .ok_or(Error::Unstable { mean_service: codes[0].moments.mean_len + 1.0, inv_q: 1.0 / q })?;
        canonical_assign(pmf, &codes[i].lengths)?
    } else {
        age_optimal_code(pmf, arrival, max_len)?
    };
    let m = book.moments(pmf)?;
    paoi_naive(q, &m)?;
    SchemeSpec::new(SchemeKind::Naive, book, None, None)
}

/// Null-symbol probability and extended source used by the predictive
/// scheme. The null symbol comes first in the extended order.
pub fn predictive_source(pmf: &SourcePmf, arrival: ArrivalSpec, max_len: usize) -> Result<(f64, SourcePmf)> {
    if pmf.index_of(NULL_SYMBOL).is_some() {
        return Err(Error::InvalidAlphabet(format!("{NULL_SYMBOL} is reserved")));
    }
    let ideal = age_optimal_code(pmf, arrival, max_len)?;
    let mean = ideal.moments(pmf)?.mean_len;
    let p_null = 1.0 - arrival.q() * mean;
    if !(p_null > 0.0 && p_null < 1.0) {
        return Err(Error::DegenerateLoad { p_null });
    }
    let mut symbols = vec![NULL_SYMBOL.to_string()];
    symbols.extend(pmf.symbols().iter().cloned());
    let mut probs = vec![p_null];
    probs.extend(pmf.probs().iter().map(|p| (1.0 - p_null) * p));
    let extended = SourcePmf::new(symbols, probs).map_err(|_| Error::DegenerateLoad { p_null })?;
    Ok((p_null, extended))
}

/// Predictive scheme.
///
/// 1. age-optimal code `E` with free empty signaling;
/// 2. `p_null = 1 - q E[L(E)]`, every source probability scaled by
///    `1 - p_null`;
/// 3. age-optimal code for the extended source at the same `q`.
///
/// The extended source has one more symbol, so its depth bound is
/// `max_len + 1`. Among boundary codes with equal peak age the one with
/// the shorter null codeword wins.
pub fn build_predictive(pmf: &SourcePmf, arrival: ArrivalSpec, max_len: usize) -> Result<SchemeSpec> {
    let q = arrival.q();
    let (p_null, extended) = predictive_source(pmf, arrival, max_len)?;
    let codes = boundary_codes(&extended, max_len + 1)?;
    let (_, best) = select_on_boundary(&codes, |m| paoi_ideal(q, m).ok())
        .ok_or(Error::Unstable { mean_service: codes[0].moments.mean_len, inv_q: 1.0 / q })?;
    let chosen = codes
        .iter()
        .filter(|c| paoi_ideal(q, &c.moments).is_ok_and(|v| v <= best * (1.0 + 1e-12)))
        .min_by_key(|c| c.lengths[0])
        .expect("the minimizer itself qualifies");
    let union = canonical_assign(&extended, &chosen.lengths)?;
    let null = union.codewords()[0].clone();
    let messages = Codebook::new(pmf.symbols().to_vec(), union.codewords()[1..].to_vec())?;
    SchemeSpec::new(SchemeKind::Predictive, messages, Some(null), Some(p_null))
}

/// Same code as `base`, with null-codeword preemption enabled.
pub fn build_adaptive(base: &SchemeSpec) -> Result<SchemeSpec> {
    let null = base.null_codeword.clone().ok_or(Error::MissingNullCodeword)?;
    SchemeSpec::new(SchemeKind::Adaptive, base.message_codebook.clone(), Some(null), base.null_prob_used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::moments;
    use crate::source_model::uniform_pmf;

    fn cw(s: &str) -> Codeword {
        s.parse().unwrap()
    }

    /// Table II: A=0, B=100, NULL=101, C=110, D=111.
    pub(crate) fn table_two() -> SchemeSpec {
        let book = Codebook::new(
            ["A", "B", "C", "D"].map(String::from).to_vec(),
            ["0", "100", "110", "111"].map(cw).to_vec(),
        )
        .unwrap();
        SchemeSpec::new(SchemeKind::Predictive, book, Some(cw("101")), Some(0.5)).unwrap()
    }

    #[test]
    fn table_two_is_valid_predictive() {
        let s = table_two();
        let union = s.union_codebook().unwrap().unwrap();
        assert_eq!(union.kraft_status(), Ordering::Equal);
        assert_eq!(s.idle_bits().unwrap(), vec![true, false, true]);
    }

    #[test]
    fn kind_invariants() {
        let t = table_two();
        let book = t.message_codebook().clone();
        assert!(SchemeSpec::new(SchemeKind::Ideal, book.clone(), Some(cw("101")), None).is_err());
        assert!(SchemeSpec::new(SchemeKind::Predictive, book.clone(), None, None).is_err());
        // Null clashing with A's codeword.
        assert!(SchemeSpec::new(SchemeKind::Predictive, book.clone(), Some(cw("01")), None).is_err());
        // Incomplete union code.
        assert!(SchemeSpec::new(SchemeKind::Predictive, book.clone(), Some(cw("1010")), None).is_err());
        assert!(matches!(
            SchemeSpec::new(SchemeKind::Predictive, book, Some(cw("101")), Some(1.0)),
            Err(Error::DegenerateLoad { .. })
        ));
    }

    #[test]
    fn ideal_uniform_four() {
        let s = build_ideal(&uniform_pmf(4).unwrap(), ArrivalSpec::new(0.25).unwrap(), 3).unwrap();
        let words: Vec<_> = s.message_codebook().codewords().iter().map(|c| c.to_string()).collect();
        assert_eq!(words, ["00", "01", "10", "11"]);
        assert_eq!(s.idle_bits(), None);
    }

    #[test]
    fn ideal_uniform_twenty() {
        let pmf = uniform_pmf(20).unwrap();
        let s = build_ideal(&pmf, ArrivalSpec::new(0.15).unwrap(), 19).unwrap();
        let l = s.message_codebook().lengths();
        assert_eq!(l.iter().filter(|&&x| x == 4).count(), 12);
        assert_eq!(l.iter().filter(|&&x| x == 5).count(), 8);
    }

    #[test]
    fn naive_framing() {
        let pmf =
            SourcePmf::new(["A", "B", "C", "D"].map(String::from).to_vec(), vec![0.5, 0.25, 0.125, 0.125])
                .unwrap();
        let s = build_naive(&pmf, ArrivalSpec::new(0.1).unwrap(), 3).unwrap();
        assert_eq!(s.message_codebook().lengths(), vec![1, 2, 3, 3]);
        assert_eq!(s.message_bits(2), vec![true, true, true, false]);
        assert_eq!(s.service_bits(2), 4);
        assert_eq!(s.idle_bits(), Some(vec![false]));
    }

    #[test]
    fn naive_uniform_four_paoi() {
        let pmf = uniform_pmf(4).unwrap();
        let s = build_naive(&pmf, ArrivalSpec::new(0.2).unwrap(), 3).unwrap();
        let m = s.message_codebook().moments(&pmf).unwrap();
        assert!((paoi_naive(0.2, &m).unwrap() - 9.5).abs() < 1e-12);
        assert!(matches!(build_naive(&pmf, ArrivalSpec::new(0.34).unwrap(), 3), Err(Error::Unstable { .. })));
    }

    #[test]
    fn naive_reoptimize_never_worse() {
        let pmf = SourcePmf::from_weights(&[30.0, 20.0, 15.0, 12.0, 10.0, 7.0, 4.0, 2.0]).unwrap();
        for q in [0.05, 0.1, 0.15] {
            let a = ArrivalSpec::new(q).unwrap();
            let plain = build_naive(&pmf, a, 7).unwrap();
            let re = build_naive_with(&pmf, a, 7, NaiveOptions { reoptimize: true }).unwrap();
            let pa = paoi_naive(q, &plain.message_codebook().moments(&pmf).unwrap()).unwrap();
            let pr = paoi_naive(q, &re.message_codebook().moments(&pmf).unwrap()).unwrap();
            assert!(pr <= pa + 1e-12);
        }
    }

    #[test]
    fn predictive_uniform_four() {
        let pmf = uniform_pmf(4).unwrap();
        let a = ArrivalSpec::new(0.25).unwrap();
        let (p_null, ext) = predictive_source(&pmf, a, 3).unwrap();
        assert_eq!(p_null, 0.5);
        assert_eq!(ext.probs(), &[0.5, 0.125, 0.125, 0.125, 0.125]);
        let s = build_predictive(&pmf, a, 3).unwrap();
        assert_eq!(s.null_prob_used(), Some(0.5));
        assert_eq!(s.null_codeword().unwrap().len(), 1);
        let union = s.union_codebook().unwrap().unwrap();
        assert_eq!(union.kraft_status(), Ordering::Equal);
    }

    #[test]
    fn predictive_low_load_matches_naive_lengths() {
        let pmf = uniform_pmf(20).unwrap();
        let a = ArrivalSpec::new(0.01).unwrap();
        let s = build_predictive(&pmf, a, 19).unwrap();
        assert_eq!(s.null_codeword().unwrap().len(), 1);
        let naive = build_naive(&pmf, a, 19).unwrap();
        let mut wire: Vec<usize> = (0..20).map(|i| s.service_bits(i)).collect();
        let mut flag: Vec<usize> = (0..20).map(|i| naive.service_bits(i)).collect();
        wire.sort_unstable();
        flag.sort_unstable();
        assert_eq!(wire, flag);
    }

    #[test]
    fn predictive_high_load_shortens_messages() {
        let pmf = uniform_pmf(20).unwrap();
        let a = ArrivalSpec::new(0.19).unwrap();
        let s = build_predictive(&pmf, a, 19).unwrap();
        assert!(s.null_codeword().unwrap().len() > 1);
        let m = s.message_codebook().moments(&pmf).unwrap();
        assert!(m.mean_len + 0.0 < 1.0 / 0.19);
        assert!(build_naive(&pmf, a, 19).is_err());
    }

    #[test]
    fn predictive_rejects_reserved_symbol() {
        let pmf = SourcePmf::new(vec!["NULL".into(), "b".into()], vec![0.5, 0.5]).unwrap();
        assert!(build_predictive(&pmf, ArrivalSpec::new(0.1).unwrap(), 1).is_err());
    }

    #[test]
    fn adaptive_from_predictive() {
        let s = build_adaptive(&table_two()).unwrap();
        assert!(s.preemptible());
        assert_eq!(s.kind(), SchemeKind::Adaptive);
        let ideal = build_ideal(&uniform_pmf(4).unwrap(), ArrivalSpec::new(0.25).unwrap(), 3).unwrap();
        assert_eq!(build_adaptive(&ideal), Err(Error::MissingNullCodeword));
    }

    #[test]
    fn switch_rule() {
        // "10" of NULL=101 sent: B=100 continues, A=0 does not.
        assert!(can_switch(&[true, false], &cw("100")));
        assert!(!can_switch(&[true, false], &cw("0")));
        assert!(!can_switch(&[true, false], &cw("110")));
        // Nothing sent yet: always switch.
        assert!(can_switch(&[], &cw("0")));
        assert!(can_switch(&[], &cw("111")));
    }

    #[test]
    fn scheme_names_roundtrip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("bogus".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn one_bit_null_when_it_dominates() {
        // p_null >= 1/2 puts the null symbol at depth one.
        for q in [0.02, 0.05, 0.1] {
            let pmf = SourcePmf::from_weights(&[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
            let a = ArrivalSpec::new(q).unwrap();
            let s = build_predictive(&pmf, a, 4).unwrap();
            assert!(s.null_prob_used().unwrap() >= 0.5);
            assert_eq!(s.null_codeword().unwrap().len(), 1, "q={q}");
            let m = moments(&pmf, &s.message_codebook().lengths()).unwrap();
            assert!(m.mean_len >= 1.0);
        }
    }
}
