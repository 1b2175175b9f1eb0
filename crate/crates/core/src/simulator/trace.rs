//! A fully recorded run.

use std::fmt::Write as _;

use super::{BitKind, Delivery, SimStats, SlotRecord};

/// Every slot and every delivery of a run, plus its statistics.
#[derive(Debug, Clone)]
pub struct Trace {
    symbols: Vec<String>,
    warmup: u64,
    slots: Vec<SlotRecord>,
    deliveries: Vec<Delivery>,
    stats: SimStats,
}

impl Trace {
    pub(crate) fn new(
        symbols: Vec<String>,
        warmup: u64,
        slots: Vec<SlotRecord>,
        deliveries: Vec<Delivery>,
        stats: SimStats,
    ) -> Self {
        Self { symbols, warmup, slots, deliveries, stats }
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn warmup(&self) -> u64 {
        self.warmup
    }

    pub fn slots(&self) -> &[SlotRecord] {
        &self.slots
    }

    pub fn deliveries(&self) -> &[Delivery] {
        &self.deliveries
    }

    pub fn stats(&self) -> &SimStats {
        &self.stats
    }

    /// Per-slot wire bits; `None` is φ.
    pub fn bits(&self) -> Vec<Option<bool>> {
        self.slots.iter().map(|r| r.bit).collect()
    }

    /// Number of slots whose bit belongs to a null codeword or idle flag.
    pub fn filler_slots(&self) -> usize {
        self.slots.iter().filter(|r| matches!(r.kind, BitKind::Null | BitKind::IdleFlag)).count()
    }

    /// CSV with header `t,pending_bits,bit,decoded,age,u,N`: `bit` is `0`,
    /// `1` or `-` for φ; `decoded` is the symbol id decoded at `t` (empty
    /// if none); `u` is the newest decoded timestamp (empty before the
    /// first decode); `N` counts symbols observed up to `t`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,pending_bits,bit,decoded,age,u,N\n");
        for r in &self.slots {
            let bit = match r.bit {
                Some(true) => "1",
                Some(false) => "0",
                None => "-",
            };
            let decoded = r.decoded.map_or("", |i| self.symbols[i].as_str());
            let u = r.u.map(|u| u.to_string()).unwrap_or_default();
            writeln!(s, "{},{},{},{},{},{},{}", r.t, r.pending_bits, bit, decoded, r.age, u, r.observed)
                .expect("writing to a String cannot fail");
        }
        s
    }
}
