use thiserror::Error;

/// Everything that can go wrong while building sources, codes, schemes or
/// simulations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("arrival probability must lie strictly between 0 and 1, got {0}")]
    InvalidArrival(f64),

    #[error("penalty weights must be non-negative and not both zero, got alpha={alpha}, beta={beta}")]
    InvalidWeights { alpha: f64, beta: f64 },

    #[error("{lengths} codeword lengths given for {symbols} symbols")]
    Alignment { symbols: usize, lengths: usize },

    #[error("no complete prefix code on {symbols} symbols fits within {max_len} bits")]
    Infeasible { symbols: usize, max_len: usize },

    #[error("codeword lengths violate the Kraft inequality")]
    KraftViolation,

    #[error("codeword lengths must be at least 1")]
    ZeroLength,

    #[error("unstable system: mean service {mean_service} bits is not below 1/q = {inv_q}")]
    Unstable { mean_service: f64, inv_q: f64 },

    #[error("degenerate load: null probability 1 - q E[L] = {p_null} is outside (0, 1)")]
    DegenerateLoad { p_null: f64 },

    #[error("scheme has no null codeword")]
    MissingNullCodeword,

    #[error("brute-force oracle limited to n <= 8 and max_len <= 8 (got n={symbols}, max_len={max_len})")]
    OracleTooLarge { symbols: usize, max_len: usize },

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("no decoded symbols after warm-up")]
    EmptySample,

    #[error("undecodable bit stream at slot {slot}: {msg}")]
    Decode { slot: u64, msg: String },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
