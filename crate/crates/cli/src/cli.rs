//! Argument definitions and the `code`, `simulate` and `trace` commands.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use timely_coding::analysis::{AnalyticReport, Framing};
use timely_coding::format::{parse_script, write_scheme};
use timely_coding::schemes::SchemeKind;
use timely_coding::simulator::{
    self, default_warmup, run_trace, SimConfig, SimStats, DEFAULT_MEASURED_SLOTS,
};
use timely_coding::source_model::{ArrivalSpec, SourcePmf};

use crate::{
    checks, emit, fmt_f64, load_source, read_file, resolve_scheme, sweep, write_file, CliError, CliResult,
};

#[derive(Debug, Parser)]
#[command(name = "timely", version, about = "Peak-age-optimal coding for randomly arriving symbols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the age-optimal code (or a full scheme) and report its peak age.
    Code(CodeArgs),
    /// Simulate a scheme and print one CSV row of statistics.
    Simulate(SimArgs),
    /// Simulate a scheme and export the per-slot trace as CSV.
    Trace(SimArgs),
    /// Sweep the arrival rate for several schemes; writes sweep.csv and sweep.svg.
    Sweep(SweepArgs),
    /// Run the oracle checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    /// Source spec file (`id probability` lines).
    #[arg(long)]
    pub source: PathBuf,
    /// Arrival probability per slot.
    #[arg(long)]
    pub q: f64,
    /// ideal, naive, predictive or adaptive.
    #[arg(long, default_value = "ideal")]
    pub scheme: String,
    /// Longest allowed message codeword (default: unconstrained).
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Write the scheme file here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Source spec file (`id probability` lines).
    #[arg(long)]
    pub source: PathBuf,
    /// Scheme or codebook file, or a scheme name to build at `--q`.
    #[arg(long, default_value = "ideal")]
    pub scheme: String,
    /// Arrival probability per slot (required unless `--arrivals` is given).
    #[arg(long)]
    pub q: Option<f64>,
    /// Total number of slots simulated.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Slots discarded before measuring.
    #[arg(long)]
    pub warmup: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Longest allowed message codeword when building a scheme.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Scripted arrivals (`slot,symbol` CSV) replacing the random source.
    #[arg(long)]
    pub arrivals: Option<PathBuf>,
    /// Initial age at t = 0.
    #[arg(long, default_value_t = 1)]
    pub initial_age: u64,
    /// simulate: also write the trace here; trace: write the trace here
    /// instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep spec file (`key = value` lines).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Source spec file; overrides the spec's `source`.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Comma-separated scheme names; overrides the spec's `schemes`.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Comma-separated rates; overrides the spec's grid.
    #[arg(long)]
    pub q: Option<String>,
    /// Total slots per point with `--warmup`, otherwise measured slots
    /// after each scheme's default warm-up.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Slots discarded before measuring.
    #[arg(long)]
    pub warmup: Option<u64>,
    /// Seed shared by every point, so schemes see the same arrivals.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Longest allowed message codeword.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Concurrent simulations (default: number of CPUs).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    /// Codebook or scheme files to check for completeness and prefix-freeness.
    #[arg(long)]
    pub fixture: Vec<PathBuf>,
    /// Source for checking the fixtures' moment headers.
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Concurrent simulations (default: number of CPUs).
    #[arg(long)]
    pub jobs: Option<usize>,
}

pub(crate) fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Code(a) => cmd_code(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Trace(a) => cmd_trace(&a, out),
        Command::Sweep(a) => sweep::cmd_sweep(&a, out),
        Command::Verify(a) => checks::cmd_verify(&a, out),
    }
}

fn max_len_or_default(pmf: &SourcePmf, max_len: Option<usize>) -> usize {
    max_len.unwrap_or(pmf.len() - 1)
}

fn cmd_code(a: &CodeArgs, out: &mut dyn Write) -> CliResult<()> {
    let pmf = load_source(&a.source)?;
    let arrival = ArrivalSpec::new(a.q)?;
    let max_len = max_len_or_default(&pmf, a.max_len);
    let kind: SchemeKind = a.scheme.parse().map_err(CliError::Usage)?;
    let scheme = crate::build_scheme(kind, &pmf, arrival, max_len)?;
    let m = scheme.message_codebook().moments(&pmf)?;

    let mut report = String::new();
    let mut kv = |k: &str, v: String| writeln!(report, "{k}={v}").unwrap();
    kv("scheme", kind.to_string());
    kv("q", fmt_f64(a.q));
    kv("mean_len", fmt_f64(m.mean_len));
    kv("second_moment", fmt_f64(m.second_moment));
    kv("max_codeword_len", scheme.message_codebook().max_len().to_string());
    let framing = match kind {
        SchemeKind::Ideal => Some(Framing::Ideal),
        SchemeKind::Naive => Some(Framing::Naive),
        _ => None,
    };
    if let Some(framing) = framing {
        let r = AnalyticReport::evaluate(a.q, &m, framing);
        kv("load", fmt_f64(r.load));
        kv("stable", r.stable.to_string());
        kv("mean_wait", fmt_f64(r.waiting));
        kv("paoi", fmt_f64(r.paoi));
        if let Some(opt) = r.q_star {
            kv("q_star", fmt_f64(opt.q_star));
            kv("paoi_at_q_star", fmt_f64(opt.paoi));
        }
    }
    if let (Some(p), Some(null)) = (scheme.null_prob_used(), scheme.null_codeword()) {
        kv("p_null", fmt_f64(p));
        kv("null_codeword", null.to_string());
        kv("load", fmt_f64(a.q * m.mean_len));
    }
    let file = write_scheme(&scheme, Some(&pmf))?;
    match &a.out {
        Some(path) => {
            write_file(path, &file)?;
            emit(out, &report)
        }
        None => emit(out, &(report + &file)),
    }
}

fn sim_config(a: &SimArgs, tracing: bool) -> CliResult<SimConfig> {
    let pmf = load_source(&a.source)?;
    let max_len = max_len_or_default(&pmf, a.max_len);
    let scheme = resolve_scheme(&a.scheme, &pmf, a.q, max_len)?;
    let script = match &a.arrivals {
        Some(path) => Some(parse_script(&read_file(path)?, &pmf)?),
        None => None,
    };
    let q = match (a.q, &script) {
        (Some(q), _) => q,
        // Scripted runs never draw arrivals; any valid rate will do.
        (None, Some(_)) => 0.5,
        (None, None) => return Err(CliError::Usage("--q is required without --arrivals".into())),
    };
    let min_horizon = 10 * scheme.max_wire_len() as u64;
    let (warmup, horizon) = if tracing {
        let warmup = a.warmup.unwrap_or(0);
        let last_arrival = script.as_ref().and_then(|s| s.last()).map_or(0, |&(t, _)| t);
        (warmup, a.horizon.unwrap_or((warmup + 100).max(min_horizon).max(last_arrival + min_horizon)))
    } else {
        let warmup = a.warmup.unwrap_or_else(|| default_warmup(&scheme));
        (warmup, a.horizon.unwrap_or(warmup + DEFAULT_MEASURED_SLOTS))
    };
    let mut cfg = SimConfig::new(scheme, pmf, ArrivalSpec::new(q)?).with_seed(a.seed);
    cfg.warmup = warmup;
    cfg.horizon = horizon;
    cfg.initial_age = a.initial_age;
    cfg.scripted_arrivals = script;
    cfg.validate()?;
    Ok(cfg)
}

pub const STATS_HEADER: &str = "scheme,q,horizon,warmup,seed,empirical_paoi,mean_age,idle_fraction,\
mean_wait,mean_service,mean_interarrival,peaks,decoded,arrivals,pending_bits,switches,\
offered_load,diverged,backlog_trip,load_trip";

pub fn stats_row(cfg: &SimConfig, s: &SimStats) -> String {
    let fields = [
        cfg.scheme.kind().to_string(),
        fmt_f64(cfg.arrival.q()),
        cfg.horizon.to_string(),
        cfg.warmup.to_string(),
        cfg.seed.to_string(),
        fmt_f64(s.empirical_paoi),
        fmt_f64(s.mean_age),
        fmt_f64(s.idle_fraction),
        fmt_f64(s.mean_wait),
        fmt_f64(s.mean_service),
        fmt_f64(s.mean_interarrival),
        s.peaks_count.to_string(),
        s.decoded_count.to_string(),
        s.arrivals.to_string(),
        s.pending_bits.to_string(),
        s.switches.to_string(),
        fmt_f64(s.offered_load),
        s.diverged().to_string(),
        s.divergence.backlog.to_string(),
        s.divergence.load.to_string(),
    ];
    fields.join(",")
}

fn cmd_simulate(a: &SimArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = sim_config(a, false)?;
    let stats = match &a.out {
        Some(path) => {
            let trace = run_trace(&cfg)?;
            write_file(path, &trace.to_csv())?;
            trace.stats().clone()
        }
        None => simulator::run(&cfg)?,
    };
    emit(out, &format!("{STATS_HEADER}\n{}\n", stats_row(&cfg, &stats)))
}

fn cmd_trace(a: &SimArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = sim_config(a, true)?;
    let csv = run_trace(&cfg)?.to_csv();
    match &a.out {
        Some(path) => write_file(path, &csv),
        None => emit(out, &csv),
    }
}
