//! The `timely` command-line tool.
//!
//! Subcommands:
//!
//! - `code`: build a code (or a full scheme) for a source at rate `q` and
//!   report its moments and closed-form peak age;
//! - `simulate`: run the slot simulator and print one CSV row of statistics;
//! - `trace`: run the simulator and export every slot as CSV;
//! - `sweep`: simulate every scheme over a grid of rates, write
//!   `sweep.csv` and `sweep.svg`;
//! - `verify`: run the oracle checks and report pass/fail per check.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or
//! configuration error.

pub mod checks;
mod cli;
pub mod plot;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use timely_coding::coding::{canonical_assign, min_linear_penalty_lengths, Codebook, PenaltyWeights};
use timely_coding::format::{parse_codebook, parse_scheme, parse_source};
use timely_coding::schemes::{
    build_adaptive, build_ideal, build_naive, build_predictive, SchemeKind, SchemeSpec,
};
use timely_coding::source_model::{ArrivalSpec, SourcePmf};

pub use cli::{Cli, Command};

/// Failures of a CLI invocation.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] timely_coding::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parses `args` and runs the command, mapping the outcome to an exit
/// code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    match cli::run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub(crate) fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub(crate) fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

pub fn load_source(path: &Path) -> CliResult<SourcePmf> {
    Ok(parse_source(&read_file(path)?)?)
}

/// Builds the scheme of `kind` for `pmf` at rate `arrival`.
pub fn build_scheme(
    kind: SchemeKind,
    pmf: &SourcePmf,
    arrival: ArrivalSpec,
    max_len: usize,
) -> timely_coding::Result<SchemeSpec> {
    match kind {
        SchemeKind::Ideal => build_ideal(pmf, arrival, max_len),
        SchemeKind::Naive => build_naive(pmf, arrival, max_len),
        SchemeKind::Predictive => build_predictive(pmf, arrival, max_len),
        SchemeKind::Adaptive => build_adaptive(&build_predictive(pmf, arrival, max_len)?),
    }
}

/// The length-limited minimum-mean-length code; used to simulate rates at
/// which no code is stable.
pub fn min_mean_code(pmf: &SourcePmf, max_len: usize) -> timely_coding::Result<Codebook> {
    canonical_assign(pmf, &min_linear_penalty_lengths(pmf, PenaltyWeights::MEAN, max_len)?)
}

/// A scheme given on the command line: either a file (scheme file, or a
/// bare codebook which means the ideal scheme) or a scheme name to build.
pub fn resolve_scheme(arg: &str, pmf: &SourcePmf, q: Option<f64>, max_len: usize) -> CliResult<SchemeSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = read_file(path)?;
        let scheme = if text.lines().any(|l| l.trim_start().starts_with("# scheme=")) {
            parse_scheme(&text)?
        } else {
            SchemeSpec::new(SchemeKind::Ideal, parse_codebook(&text)?, None, None)?
        };
        if scheme.message_codebook().symbols() != pmf.symbols() {
            return Err(CliError::Usage(format!("{arg}: codebook symbols do not match the source")));
        }
        return Ok(scheme);
    }
    let kind: SchemeKind =
        arg.parse().map_err(|_| CliError::Usage(format!("{arg:?} is neither a file nor a scheme name")))?;
    let q = q.ok_or_else(|| CliError::Usage(format!("--q is required to build a {kind} scheme")))?;
    Ok(build_scheme(kind, pmf, ArrivalSpec::new(q)?, max_len)?)
}

/// Shortest round-trip decimal; `inf` for infinities, empty for NaN.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}
