//! The slot loop shared by [`run`](super::run) and
//! [`run_trace`](super::run_trace).
//!
//! At every integer time `t`:
//! 1. at most one symbol arrives and joins the buffer, timestamped `t`;
//!    under a preemptible scheme it may take over an in-progress null
//!    codeword;
//! 2. at a codeword boundary the framing chooses what to send next;
//! 3. one bit goes out over `(t, t + 1]`; a codeword whose last bit this
//!    is decodes at `t + 1`.

use std::collections::VecDeque;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimConfig;
use crate::schemes::can_switch;

/// What the bit sent in a slot belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitKind {
    /// Part of a message on the wire, including the naive flag `1`.
    Message,
    /// The naive scheme's lone `0`.
    IdleFlag,
    /// Part of a null codeword.
    Null,
    /// No bit: the free empty-buffer signal φ.
    Phi,
}

impl BitKind {
    /// Slots in which the channel serves no message.
    pub fn is_idle(&self) -> bool {
        !matches!(self, BitKind::Message)
    }
}

/// One slot as seen at integer time `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotRecord {
    pub t: u64,
    /// Symbol (index) arriving at `t`.
    pub arrival: Option<usize>,
    /// Message bits in the buffer after the arrival at `t`, including the
    /// unsent bits of a message being transmitted.
    pub pending_bits: u64,
    /// Bit sent over `(t, t + 1]`; `None` is φ.
    pub bit: Option<bool>,
    pub kind: BitKind,
    /// Symbol (index) decoded at `t`.
    pub decoded: Option<usize>,
    /// `Δ(t)`, after any decode at `t`.
    pub age: u64,
    /// Timestamp of the newest decoded symbol.
    pub u: Option<u64>,
    /// Symbols observed by the encoder up to and including `t`.
    pub observed: u64,
}

/// A decoded message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub symbol: usize,
    pub arrival: u64,
    /// Slot in which its first wire bit (as this message) went out. For a
    /// preempting message, the slot of the switch.
    pub service_start: u64,
    pub decoded_at: u64,
    /// Arrival time of the previously decoded symbol.
    pub previous_arrival: Option<u64>,
}

impl Delivery {
    pub fn wait(&self) -> u64 {
        self.service_start - self.arrival
    }

    pub fn service(&self) -> u64 {
        self.decoded_at - self.service_start
    }

    /// Age just before this decode resets it; undefined for the first
    /// decode, whose peak sits on the initial ramp.
    pub fn peak(&self) -> Option<u64> {
        self.previous_arrival.map(|u| self.decoded_at - u)
    }

    pub fn interarrival(&self) -> Option<u64> {
        self.previous_arrival.map(|u| self.arrival - u)
    }
}

pub(crate) trait Observer {
    fn slot(&mut self, rec: &SlotRecord);
    fn delivery(&mut self, d: &Delivery);
}

/// End-of-run facts needed by the statistics.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Outcome {
    pub arrivals: u64,
    pub decoded: u64,
    pub pending_bits: u64,
    pub switches: u64,
    /// Post-warm-up offered message bits: count, sum and sum of squares
    /// of the per-slot offered bits.
    pub offered_slots: u64,
    pub offered_sum: f64,
    pub offered_sq: f64,
}

enum Payload {
    Message { symbol: usize, arrival: u64, start: u64 },
    Null,
    Flag,
}

struct InFlight {
    bits: Vec<bool>,
    sent: usize,
    payload: Payload,
}

// Built once per run; boxing the random variant would buy nothing.
#[allow(clippy::large_enum_variant)]
enum Arrivals<'a> {
    Random { coin: ChaCha8Rng, symbols: ChaCha8Rng, dist: WeightedIndex<f64>, q: f64 },
    Scripted { script: &'a [(u64, usize)], next: usize },
}

impl Arrivals<'_> {
    fn draw(&mut self, t: u64) -> Option<usize> {
        match self {
            Arrivals::Random { coin, symbols, dist, q } => coin.random_bool(*q).then(|| dist.sample(symbols)),
            Arrivals::Scripted { script, next } => match script.get(*next) {
                Some(&(slot, sym)) if slot == t => {
                    *next += 1;
                    Some(sym)
                }
                _ => None,
            },
        }
    }
}

/// Independent generators for the arrival coin and the symbol draw, so
/// that changing the codebook never perturbs the arrival sample path.
pub(crate) fn streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let coin = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols = ChaCha8Rng::seed_from_u64(seed);
    symbols.set_stream(1);
    (coin, symbols)
}

pub(crate) fn simulate<O: Observer>(cfg: &SimConfig, obs: &mut O) -> Outcome {
    let scheme = &cfg.scheme;
    let book = scheme.message_codebook();
    let mut arrivals = match &cfg.scripted_arrivals {
        Some(script) => Arrivals::Scripted { script, next: 0 },
        None => {
            let (coin, symbols) = streams(cfg.seed);
            let dist = WeightedIndex::new(cfg.source.probs()).expect("validated PMF");
            Arrivals::Random { coin, symbols, dist, q: cfg.arrival.q() }
        }
    };
    let idle_bits = scheme.idle_bits();
    let idle_kind = match scheme.kind() {
        crate::schemes::SchemeKind::Naive => BitKind::IdleFlag,
        _ => BitKind::Null,
    };

    let mut queue: VecDeque<(usize, u64)> = VecDeque::new();
    let mut queued_bits: u64 = 0;
    let mut current: Option<InFlight> = None;
    let mut last_arrival: Option<u64> = None;
    let mut u: Option<u64> = None;
    let mut decoded_now: Option<usize> = None;
    let mut out = Outcome::default();

    for t in 0..cfg.horizon {
        // 1. arrival
        let arrival = arrivals.draw(t);
        if let Some(sym) = arrival {
            let bits = scheme.service_bits(sym) as u64;
            queue.push_back((sym, t));
            queued_bits += bits;
            out.arrivals += 1;
            if t >= cfg.warmup {
                let b = bits as f64;
                out.offered_sum += b;
                out.offered_sq += b * b;
            }
            if scheme.preemptible() {
                if let Some(f) = current.as_mut() {
                    let (head, head_arrival) = queue[0];
                    if matches!(f.payload, Payload::Null)
                        && can_switch(&f.bits[..f.sent], &book.codewords()[head])
                    {
                        queue.pop_front();
                        queued_bits -= scheme.service_bits(head) as u64;
                        f.bits = scheme.message_bits(head);
                        f.payload = Payload::Message { symbol: head, arrival: head_arrival, start: t };
                        out.switches += 1;
                    }
                }
            }
        }
        if t >= cfg.warmup {
            out.offered_slots += 1;
        }

        // 2. framing at a codeword boundary
        if current.is_none() {
            if let Some((sym, a)) = queue.pop_front() {
                queued_bits -= scheme.service_bits(sym) as u64;
                current = Some(InFlight {
                    bits: scheme.message_bits(sym),
                    sent: 0,
                    payload: Payload::Message { symbol: sym, arrival: a, start: t },
                });
            } else if let Some(bits) = &idle_bits {
                let payload = if idle_kind == BitKind::IdleFlag { Payload::Flag } else { Payload::Null };
                current = Some(InFlight { bits: bits.clone(), sent: 0, payload });
            }
        }

        let in_flight_msg_bits = match &current {
            Some(InFlight { bits, sent, payload: Payload::Message { .. } }) => (bits.len() - sent) as u64,
            _ => 0,
        };

        // 3. one bit over (t, t + 1]
        let (bit, kind) = match current.as_mut() {
            Some(f) => {
                let b = f.bits[f.sent];
                f.sent += 1;
                let kind = match f.payload {
                    Payload::Message { .. } => BitKind::Message,
                    Payload::Flag => BitKind::IdleFlag,
                    Payload::Null => BitKind::Null,
                };
                (Some(b), kind)
            }
            None => (None, BitKind::Phi),
        };

        let age = match u {
            Some(u) => t - u,
            None => cfg.initial_age + t,
        };
        obs.slot(&SlotRecord {
            t,
            arrival,
            pending_bits: queued_bits + in_flight_msg_bits,
            bit,
            kind,
            decoded: decoded_now.take(),
            age,
            u,
            observed: out.arrivals,
        });

        if current.as_ref().is_some_and(|f| f.sent == f.bits.len()) {
            if let Some(InFlight { payload: Payload::Message { symbol, arrival, start }, .. }) =
                current.take()
            {
                let d = Delivery {
                    symbol,
                    arrival,
                    service_start: start,
                    decoded_at: t + 1,
                    previous_arrival: last_arrival,
                };
                last_arrival = Some(arrival);
                u = Some(arrival);
                decoded_now = Some(symbol);
                out.decoded += 1;
                obs.delivery(&d);
            }
        }
    }

    out.pending_bits = queued_bits
        + match &current {
            Some(InFlight { bits, sent, payload: Payload::Message { .. } }) => (bits.len() - sent) as u64,
            _ => 0,
        };
    out
}
