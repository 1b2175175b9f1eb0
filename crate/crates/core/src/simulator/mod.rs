//! Bit-exact discrete-time simulation of source, encoder, FIFO bit pipe and
//! decoder.
//!
//! Conventions:
//!
//! - an arrival at integer `t` joins the buffer before the bit for
//!   `(t, t + 1]` is chosen, so it can start service immediately;
//! - a codeword whose last bit occupies `(t, t + 1]` is decoded at `t + 1`,
//!   and the age drops to `(t + 1)` minus that symbol's timestamp;
//! - before the first decode the age is `Δ0 + t`; that ramp never counts
//!   as a peak;
//! - peaks are averaged over decodes whose preceding symbol arrived at or
//!   after the warm-up, so every counted peak lies wholly inside the
//!   measured window.

mod decoder;
mod engine;
mod trace;

pub use decoder::{decode_stream, StreamDecoder};
pub use engine::{BitKind, Delivery, SlotRecord};
pub use trace::Trace;

use engine::{simulate, Observer, Outcome};

use crate::error::{Error, Result};
use crate::schemes::SchemeSpec;
use crate::source_model::{ArrivalSpec, SourcePmf};

/// Pending message bits above `DIVERGENCE_FACTOR * E[S]` at the horizon
/// mark a run as divergent.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

/// Below this many measured slots the load test is not applied.
pub const LOAD_TEST_MIN_SLOTS: u64 = 10_000;

/// Default number of post-warm-up slots.
pub const DEFAULT_MEASURED_SLOTS: u64 = 1_000_000;

/// `max(10^4, 100 * longest wire codeword)`.
pub fn default_warmup(scheme: &SchemeSpec) -> u64 {
    (100 * scheme.max_wire_len() as u64).max(10_000)
}

/// Everything a simulation run needs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub scheme: SchemeSpec,
    /// Source the random arrivals are drawn from; aligned with the
    /// scheme's message codebook.
    pub source: SourcePmf,
    pub arrival: ArrivalSpec,
    pub horizon: u64,
    pub warmup: u64,
    pub seed: u64,
    /// `Δ0`.
    pub initial_age: u64,
    /// `(slot, symbol index)` pairs replacing the random source; slots
    /// strictly increasing.
    pub scripted_arrivals: Option<Vec<(u64, usize)>>,
}

impl SimConfig {
    /// Defaults: seed 0, `Δ0 = 1`, [`default_warmup`] and
    /// [`DEFAULT_MEASURED_SLOTS`] measured slots after it.
    pub fn new(scheme: SchemeSpec, source: SourcePmf, arrival: ArrivalSpec) -> Self {
        let warmup = default_warmup(&scheme);
        Self {
            scheme,
            source,
            arrival,
            horizon: warmup + DEFAULT_MEASURED_SLOTS,
            warmup,
            seed: 0,
            initial_age: 1,
            scripted_arrivals: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sets the warm-up and the horizon as `warmup + measured`.
    pub fn with_window(mut self, warmup: u64, measured: u64) -> Self {
        self.warmup = warmup;
        self.horizon = warmup + measured;
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_script(mut self, script: Vec<(u64, usize)>) -> Self {
        self.scripted_arrivals = Some(script);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.warmup >= self.horizon {
            return Err(Error::Config(format!(
                "warm-up ({}) must be shorter than the horizon ({})",
                self.warmup, self.horizon
            )));
        }
        let min_horizon = 10 * self.scheme.max_wire_len() as u64;
        if self.horizon < min_horizon {
            return Err(Error::Config(format!(
                "horizon {} is below 10 x longest codeword = {min_horizon}",
                self.horizon
            )));
        }
        if self.source.symbols() != self.scheme.message_codebook().symbols() {
            return Err(Error::Config("source and codebook symbols differ".into()));
        }
        if let Some(script) = &self.scripted_arrivals {
            if script.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Config("scripted arrival slots must increase".into()));
            }
            if let Some(&(_, s)) = script.iter().find(|&&(_, s)| s >= self.source.len()) {
                return Err(Error::Config(format!("scripted symbol index {s} out of range")));
            }
        }
        Ok(())
    }
}

/// Why a run was flagged divergent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Divergence {
    /// Pending message bits at the horizon exceed `1000 E[S]`.
    pub backlog: bool,
    /// The measured offered load is within three standard errors of one
    /// (or above).
    pub load: bool,
}

impl Divergence {
    pub fn any(&self) -> bool {
        self.backlog || self.load
    }
}

/// Summary statistics of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    /// Mean age peak; NaN when no peak was measured.
    pub empirical_paoi: f64,
    /// Time average of `Δ(t)` over measured slots after the first decode.
    pub mean_age: f64,
    /// Fraction of measured slots in which no message bit was sent.
    pub idle_fraction: f64,
    pub mean_wait: f64,
    pub mean_service: f64,
    pub mean_interarrival: f64,
    pub peaks_count: u64,
    pub decoded_count: u64,
    pub arrivals: u64,
    pub pending_bits: u64,
    /// Adaptive preemptions.
    pub switches: u64,
    /// Measured message bits offered per slot.
    pub offered_load: f64,
    pub divergence: Divergence,
}

impl SimStats {
    pub fn diverged(&self) -> bool {
        self.divergence.any()
    }
}

#[derive(Default)]
struct Accumulator {
    warmup: u64,
    peaks: u64,
    sum_wait: u64,
    sum_service: u64,
    sum_inter: u64,
    idle_slots: u64,
    measured_slots: u64,
    age_sum: u128,
    age_slots: u64,
}

impl Accumulator {
    fn counts(&self, d: &Delivery) -> bool {
        d.previous_arrival.is_some_and(|u| u >= self.warmup)
    }
}

impl Observer for Accumulator {
    fn slot(&mut self, rec: &SlotRecord) {
        if rec.t < self.warmup {
            return;
        }
        self.measured_slots += 1;
        self.idle_slots += u64::from(rec.kind.is_idle());
        if rec.u.is_some() {
            self.age_sum += u128::from(rec.age);
            self.age_slots += 1;
        }
    }

    fn delivery(&mut self, d: &Delivery) {
        if self.counts(d) {
            self.peaks += 1;
            self.sum_wait += d.wait();
            self.sum_service += d.service();
            self.sum_inter += d.interarrival().expect("counted deliveries have a predecessor");
        }
    }
}

fn ratio(num: f64, den: u64) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num / den as f64
    }
}

fn finish(cfg: &SimConfig, acc: &Accumulator, out: &Outcome) -> Result<SimStats> {
    let mean_service_bits = cfg.scheme.mean_service(&cfg.source)?;
    let backlog = out.pending_bits as f64 > DIVERGENCE_FACTOR * mean_service_bits;
    let offered_load = ratio(out.offered_sum, out.offered_slots);
    let load = out.offered_slots >= LOAD_TEST_MIN_SLOTS && {
        let n = out.offered_slots as f64;
        let var = (out.offered_sq / n - offered_load * offered_load).max(0.0);
        offered_load + 3.0 * (var / n).sqrt() >= 1.0
    };
    let (w, s, y) = (
        ratio(acc.sum_wait as f64, acc.peaks),
        ratio(acc.sum_service as f64, acc.peaks),
        ratio(acc.sum_inter as f64, acc.peaks),
    );
    Ok(SimStats {
        empirical_paoi: w + s + y,
        mean_age: ratio(acc.age_sum as f64, acc.age_slots),
        idle_fraction: ratio(acc.idle_slots as f64, acc.measured_slots),
        mean_wait: w,
        mean_service: s,
        mean_interarrival: y,
        peaks_count: acc.peaks,
        decoded_count: out.decoded,
        arrivals: out.arrivals,
        pending_bits: out.pending_bits,
        switches: out.switches,
        offered_load,
        divergence: Divergence { backlog, load },
    })
}

/// Runs the simulation and returns summary statistics.
pub fn run(cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    let mut acc = Accumulator { warmup: cfg.warmup, ..Default::default() };
    let out = simulate(cfg, &mut acc);
    finish(cfg, &acc, &out)
}

struct Recorder {
    acc: Accumulator,
    slots: Vec<SlotRecord>,
    deliveries: Vec<Delivery>,
}

impl Observer for Recorder {
    fn slot(&mut self, rec: &SlotRecord) {
        self.acc.slot(rec);
        self.slots.push(rec.clone());
    }

    fn delivery(&mut self, d: &Delivery) {
        self.acc.delivery(d);
        self.deliveries.push(*d);
    }
}

/// Runs the simulation keeping every slot and every delivery.
pub fn run_trace(cfg: &SimConfig) -> Result<Trace> {
    cfg.validate()?;
    let mut rec = Recorder {
        acc: Accumulator { warmup: cfg.warmup, ..Default::default() },
        slots: Vec::with_capacity(cfg.horizon as usize),
        deliveries: Vec::new(),
    };
    let out = simulate(cfg, &mut rec);
    let stats = finish(cfg, &rec.acc, &out)?;
    Ok(Trace::new(cfg.source.symbols().to_vec(), cfg.warmup, rec.slots, rec.deliveries, stats))
}

/// Sample means of waiting, service and interarrival times over the
/// measured deliveries of a trace.
pub fn empirical_moments(trace: &Trace) -> Result<(f64, f64, f64)> {
    let counted: Vec<&Delivery> = trace
        .deliveries()
        .iter()
        .filter(|d| d.previous_arrival.is_some_and(|u| u >= trace.warmup()))
        .collect();
    if counted.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = counted.len() as f64;
    let mean = |f: &dyn Fn(&Delivery) -> u64| counted.iter().map(|d| f(d) as f64).sum::<f64>() / n;
    Ok((mean(&|d| d.wait()), mean(&|d| d.service()), mean(&|d| d.interarrival().unwrap_or(0))))
}

/// Fraction of measured slots in which no message bit was sent.
pub fn idle_fraction(trace: &Trace) -> f64 {
    let measured: Vec<&SlotRecord> = trace.slots().iter().filter(|r| r.t >= trace.warmup()).collect();
    ratio(measured.iter().filter(|r| r.kind.is_idle()).count() as f64, measured.len() as u64)
}
