//! Peak-age-optimal prefix-free coding for randomly arriving symbols.
//!
//! Symbols arrive as a Bernoulli process, are encoded with a prefix-free
//! code and leave through a FIFO bit pipe at one bit per slot. The crate
//! covers:
//!
//! - [`source_model`]: sources and the arrival process;
//! - [`coding`]: Package-Merge for linear length penalties, the convex
//!   boundary of achievable `(E[L], E[L²])` pairs and the age-optimal code;
//! - [`analysis`]: stability, Geo/G/1 waiting time and closed-form peak age;
//! - [`schemes`]: how an empty buffer is signalled (ideal, naive flag bit,
//!   predictive null codeword, adaptive preemption);
//! - [`simulator`]: a bit-exact slot simulator and standalone decoder;
//! - [`format`]: the plain-text file formats.
//!
//! ```
//! use timely_coding::{analysis, coding, source_model::{uniform_pmf, ArrivalSpec}};
//!
//! let pmf = uniform_pmf(20)?;
//! let arrival = ArrivalSpec::new(0.15)?;
//! let book = coding::age_optimal_code(&pmf, arrival, pmf.len() - 1)?;
//! let m = book.moments(&pmf)?;
//! assert!((m.mean_len - 4.4).abs() < 1e-12);
//! let paoi = analysis::paoi_ideal(arrival.q(), &m)?;
//! assert!((paoi - 14.4196).abs() < 1e-4);
//! # Ok::<(), timely_coding::Error>(())
//! ```

pub mod analysis;
pub mod coding;
mod error;
pub mod format;
pub mod schemes;
pub mod simulator;
pub mod source_model;

pub use error::{Error, Result};

/// The chapters of the guide in `book/` and the README, compiled so that
/// their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sources.md")]
    mod sources {}
    #[doc = include_str!("../../../book/src/coding.md")]
    mod coding {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/schemes.md")]
    mod schemes {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
