//! Arrival-rate sweeps.
//!
//! Each `(q, scheme)` point builds the scheme for that rate, evaluates the
//! closed form where one exists (ideal and naive) and runs an independent
//! simulation with the common seed, so all schemes see the same arrival
//! sample path. Points run concurrently; rows come out in q-then-scheme
//! order regardless.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use timely_coding::analysis::{paoi_ideal, paoi_naive};
use timely_coding::coding::age_optimal_code;
use timely_coding::schemes::{SchemeKind, SchemeSpec};
use timely_coding::simulator::{default_warmup, run, SimConfig, DEFAULT_MEASURED_SLOTS};
use timely_coding::source_model::{ArrivalSpec, SourcePmf};

use crate::cli::SweepArgs;
use crate::plot::render_sweep_svg;
use crate::{
    build_scheme, emit, fmt_f64, load_source, min_mean_code, read_file, write_file, CliError, CliResult,
};

/// Number of points in the default rate grid.
pub const DEFAULT_GRID_POINTS: usize = 50;

/// Lowest rate of the default grid.
pub const DEFAULT_GRID_MIN: f64 = 0.01;

/// Default grid upper end cap, keeping `q < 1` for low-entropy sources.
pub const DEFAULT_GRID_CAP: f64 = 0.99;

/// A fully resolved sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub source: SourcePmf,
    pub schemes: Vec<SchemeKind>,
    /// Strictly increasing rates in `(0, 1)`.
    pub q_grid: Vec<f64>,
    /// Post-warm-up slots per point.
    pub measured: u64,
    /// `None`: the simulator's default for each scheme.
    pub warmup: Option<u64>,
    pub seed: u64,
    /// Include closed forms where they exist.
    pub analytic: bool,
    pub max_len: usize,
}

impl SweepSpec {
    /// All four schemes over the default grid.
    pub fn new(source: SourcePmf) -> Self {
        let q_grid = default_grid(&source);
        let max_len = source.len() - 1;
        Self {
            source,
            schemes: SchemeKind::ALL.to_vec(),
            q_grid,
            measured: DEFAULT_MEASURED_SLOTS,
            warmup: None,
            seed: 0,
            analytic: true,
            max_len,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schemes.is_empty() {
            return Err(CliError::Usage("sweep needs at least one scheme".into()));
        }
        if self.q_grid.is_empty() {
            return Err(CliError::Usage("sweep needs at least one rate".into()));
        }
        if let Some(q) = self.q_grid.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
            return Err(CliError::Usage(format!("rate {q} outside (0, 1)")));
        }
        if self.q_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Usage("rates must be strictly increasing".into()));
        }
        if self.measured == 0 {
            return Err(CliError::Usage("sweep needs at least one measured slot".into()));
        }
        Ok(())
    }
}

/// `DEFAULT_GRID_POINTS` evenly spaced rates from 0.01 to `1/H(X)`
/// (capped below one).
pub fn default_grid(pmf: &SourcePmf) -> Vec<f64> {
    let hi = (1.0 / pmf.entropy()).min(DEFAULT_GRID_CAP);
    let n = DEFAULT_GRID_POINTS;
    (0..n).map(|k| DEFAULT_GRID_MIN + (hi - DEFAULT_GRID_MIN) * k as f64 / (n - 1) as f64).collect()
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: SchemeKind,
    pub q: f64,
    /// `None` where no closed form exists (or analytic output is off);
    /// infinite when the closed form says unstable.
    pub analytic_paoi: Option<f64>,
    /// `None` when the scheme cannot be built at this rate.
    pub empirical_paoi: Option<f64>,
    pub idle_fraction: Option<f64>,
    pub diverged: bool,
}

pub const SWEEP_HEADER: &str = "scheme,q,analytic_paoi,empirical_paoi,idle_fraction,diverged";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.scheme,
            fmt_f64(self.q),
            opt(self.analytic_paoi),
            opt(self.empirical_paoi),
            opt(self.idle_fraction),
            self.diverged
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        writeln!(s, "{}", r.to_csv()).unwrap();
    }
    s
}

/// The scheme simulated at an unstable rate: the same framing around the
/// smallest-mean-length code, so the run shows the divergence.
fn unstable_stand_in(kind: SchemeKind, pmf: &SourcePmf, max_len: usize) -> Option<SchemeSpec> {
    match kind {
        SchemeKind::Ideal | SchemeKind::Naive => {
            SchemeSpec::new(kind, min_mean_code(pmf, max_len).ok()?, None, None).ok()
        }
        // Without a positive null probability there is no null codeword.
        SchemeKind::Predictive | SchemeKind::Adaptive => None,
    }
}

fn analytic(kind: SchemeKind, pmf: &SourcePmf, arrival: ArrivalSpec, max_len: usize) -> Option<f64> {
    let q = arrival.q();
    let moments = match age_optimal_code(pmf, arrival, max_len) {
        Ok(book) => book.moments(pmf).ok()?,
        Err(_) => return matches!(kind, SchemeKind::Ideal | SchemeKind::Naive).then_some(f64::INFINITY),
    };
    match kind {
        SchemeKind::Ideal => Some(paoi_ideal(q, &moments).unwrap_or(f64::INFINITY)),
        SchemeKind::Naive => Some(paoi_naive(q, &moments).unwrap_or(f64::INFINITY)),
        SchemeKind::Predictive | SchemeKind::Adaptive => None,
    }
}

/// Evaluates one grid point.
pub fn run_point(spec: &SweepSpec, kind: SchemeKind, q: f64) -> CliResult<SweepRow> {
    let pmf = &spec.source;
    let arrival = ArrivalSpec::new(q)?;
    let closed_form = analytic(kind, pmf, arrival, spec.max_len);
    let closed_form_unstable = closed_form.is_some_and(f64::is_infinite);
    let analytic_paoi = closed_form.filter(|_| spec.analytic);
    let scheme = match build_scheme(kind, pmf, arrival, spec.max_len) {
        Ok(s) => Some(s),
        Err(timely_coding::Error::Unstable { .. } | timely_coding::Error::DegenerateLoad { .. }) => {
            unstable_stand_in(kind, pmf, spec.max_len)
        }
        Err(e) => return Err(e.into()),
    };
    let Some(scheme) = scheme else {
        return Ok(SweepRow {
            scheme: kind,
            q,
            analytic_paoi,
            empirical_paoi: None,
            idle_fraction: None,
            diverged: true,
        });
    };
    let warmup = spec.warmup.unwrap_or_else(|| default_warmup(&scheme));
    let cfg =
        SimConfig::new(scheme, pmf.clone(), arrival).with_window(warmup, spec.measured).with_seed(spec.seed);
    let stats = run(&cfg)?;
    Ok(SweepRow {
        scheme: kind,
        q,
        analytic_paoi,
        empirical_paoi: Some(stats.empirical_paoi).filter(|x| !x.is_nan()),
        idle_fraction: Some(stats.idle_fraction),
        diverged: closed_form_unstable || stats.diverged(),
    })
}

/// Runs every point on up to `jobs` threads (all CPUs when `None`).
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> CliResult<Vec<SweepRow>> {
    spec.validate()?;
    let points: Vec<(f64, SchemeKind)> =
        spec.q_grid.iter().flat_map(|&q| spec.schemes.iter().map(move |&k| (q, k))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    // `collect` keeps input order, whatever the completion order.
    pool.install(|| points.par_iter().map(|&(q, k)| run_point(spec, k, q)).collect())
}

fn parse_list<T>(value: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> CliResult<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).ok_or_else(|| CliError::Usage(format!("bad {what} {s:?}"))))
        .collect()
}

/// Parses `key = value` lines. Keys: `source` (path, relative to the spec
/// file), `schemes`, `q_grid` (comma list) or `q_min`/`q_max`/`points`,
/// `horizon` (total slots when `warmup` is also set, else measured slots),
/// `measured`, `warmup`, `seed`, `analytic`, `max_len`.
fn parse_spec_file(path: &Path, a: &SweepArgs) -> CliResult<SweepSpec> {
    let text = match path.as_os_str().is_empty() {
        true => String::new(),
        false => read_file(path)?,
    };
    let mut kv = std::collections::BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let source_path = match (&a.source, kv.get("source")) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => path.parent().unwrap_or(Path::new(".")).join(p),
        (None, None) => return Err(CliError::Usage("sweep needs a source".into())),
    };
    let mut spec = SweepSpec::new(load_source(&source_path)?);
    let num = |k: &str| -> CliResult<Option<f64>> {
        kv.get(k).map(|v| v.parse::<f64>().map_err(|_| CliError::Usage(format!("bad {k} {v:?}")))).transpose()
    };
    let int = |k: &str| -> CliResult<Option<u64>> {
        kv.get(k).map(|v| v.parse::<u64>().map_err(|_| CliError::Usage(format!("bad {k} {v:?}")))).transpose()
    };
    if let Some(v) = kv.get("schemes") {
        spec.schemes = parse_list(v, "scheme", |s| s.parse().ok())?;
    }
    if let Some(v) = kv.get("q_grid") {
        spec.q_grid = parse_list(v, "rate", |s| s.parse().ok())?;
    } else if kv.contains_key("q_min") || kv.contains_key("q_max") || kv.contains_key("points") {
        let lo = num("q_min")?.unwrap_or(DEFAULT_GRID_MIN);
        let hi = num("q_max")?.unwrap_or_else(|| (1.0 / spec.source.entropy()).min(DEFAULT_GRID_CAP));
        let n = int("points")?.unwrap_or(DEFAULT_GRID_POINTS as u64).max(1) as usize;
        spec.q_grid = if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        };
    }
    if let Some(v) = kv.get("analytic") {
        spec.analytic =
            v.parse().map_err(|_| CliError::Usage(format!("analytic must be true or false, got {v:?}")))?;
    }
    spec.seed = int("seed")?.unwrap_or(0);
    if let Some(m) = int("max_len")? {
        spec.max_len = m as usize;
    }
    apply_window(&mut spec, int("warmup")?, int("horizon")?, int("measured")?)?;
    Ok(spec)
}

/// `horizon` counts all slots, so the measured window is
/// `horizon - warmup`; without an explicit warm-up the per-scheme default
/// applies and `horizon` is taken as the measured window.
fn apply_window(
    spec: &mut SweepSpec,
    warmup: Option<u64>,
    horizon: Option<u64>,
    measured: Option<u64>,
) -> CliResult<()> {
    if warmup.is_some() {
        spec.warmup = warmup;
    }
    if let Some(m) = measured {
        spec.measured = m;
    }
    if let Some(h) = horizon {
        spec.measured = match spec.warmup {
            Some(w) if h <= w => return Err(CliError::Usage(format!("horizon {h} must exceed warm-up {w}"))),
            Some(w) => h - w,
            None => h,
        };
    }
    Ok(())
}

pub fn resolve_spec(a: &SweepArgs) -> CliResult<SweepSpec> {
    let path = a.spec.clone().unwrap_or_default();
    let mut spec = parse_spec_file(&path, a)?;
    if let Some(s) = &a.scheme {
        spec.schemes = parse_list(s, "scheme", |s| s.parse().ok())?;
    }
    if let Some(q) = &a.q {
        spec.q_grid = parse_list(q, "rate", |s| s.parse().ok())?;
    }
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if let Some(m) = a.max_len {
        spec.max_len = m;
    }
    apply_window(&mut spec, a.warmup, a.horizon, None)?;
    spec.validate()?;
    Ok(spec)
}

pub(crate) fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let spec = resolve_spec(a)?;
    let rows = run_sweep(&spec, a.jobs)?;
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let csv_path = a.out.join("sweep.csv");
    let svg_path = a.out.join("sweep.svg");
    write_file(&csv_path, &sweep_csv(&rows))?;
    write_file(&svg_path, &render_sweep_svg(&rows))?;
    let diverged = rows.iter().filter(|r| r.diverged).count();
    emit(
        out,
        &format!(
            "wrote {} and {} ({} points, {diverged} diverged)\n",
            csv_path.display(),
            svg_path.display(),
            rows.len()
        ),
    )
}
