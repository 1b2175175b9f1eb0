//! Slot simulator: golden traces, decoder inversion, determinism and
//! statistical agreement with the closed forms.

use std::path::PathBuf;

use proptest::prelude::*;
use timely_coding::analysis::paoi_ideal;
use timely_coding::coding::{Codebook, Codeword};
use timely_coding::schemes::{
    build_adaptive, build_ideal, build_naive, build_predictive, SchemeKind, SchemeSpec,
};
use timely_coding::simulator::{decode_stream, empirical_moments, idle_fraction, run, run_trace, SimConfig};
use timely_coding::source_model::{uniform_pmf, zipf_pmf, ArrivalSpec, SourcePmf};

fn abcd() -> SourcePmf {
    SourcePmf::new(["A", "B", "C", "D"].map(String::from).to_vec(), vec![0.5, 0.25, 0.125, 0.125]).unwrap()
}

fn book(words: [&str; 4]) -> Codebook {
    Codebook::new(
        ["A", "B", "C", "D"].map(String::from).to_vec(),
        words.map(|w| w.parse::<Codeword>().unwrap()).to_vec(),
    )
    .unwrap()
}

/// A=0, B=10, C=110, D=111 with free empty signaling.
fn table_one() -> SchemeSpec {
    SchemeSpec::new(SchemeKind::Ideal, book(["0", "10", "110", "111"]), None, None).unwrap()
}

/// A=0, B=100, NULL=101, C=110, D=111.
fn table_two(kind: SchemeKind) -> SchemeSpec {
    SchemeSpec::new(kind, book(["0", "100", "110", "111"]), Some("101".parse().unwrap()), Some(0.5)).unwrap()
}

fn scripted(scheme: SchemeSpec, script: Vec<(u64, usize)>) -> SimConfig {
    SimConfig::new(scheme, abcd(), ArrivalSpec::new(0.3).unwrap()).with_window(0, 30).with_script(script)
}

/// Compares with `tests/golden/<name>.csv`; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, csv: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.csv"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, csv).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(csv, want, "trace {name} differs from {}", path.display());
}

/// `(decode time, symbol, age after decode)` for every decode.
fn decodes(cfg: &SimConfig) -> Vec<(u64, usize, u64)> {
    run_trace(cfg).unwrap().slots().iter().filter_map(|r| r.decoded.map(|s| (r.t, s, r.age))).collect()
}

#[test]
fn golden_table_one_free_signal() {
    let cfg = scripted(table_one(), vec![(0, 2), (2, 1), (8, 0)]);
    assert_eq!(decodes(&cfg), vec![(3, 2, 3), (5, 1, 3), (9, 0, 1)]);
    let trace = run_trace(&cfg).unwrap();
    assert_eq!(trace.slots()[0].age, 1);
    assert_eq!(trace.slots()[2].age, 3);
    check_golden("table_one", &trace.to_csv());
}

#[test]
fn golden_predictive_null_codeword() {
    let cfg = scripted(table_two(SchemeKind::Predictive), vec![(0, 2), (2, 1), (8, 0)]);
    // B waits for C, then a full null codeword occupies slots 6..=8, so A
    // (arriving at 8) starts at 9.
    assert_eq!(decodes(&cfg), vec![(3, 2, 3), (6, 1, 4), (10, 0, 2)]);
    let trace = run_trace(&cfg).unwrap();
    let bits: String = trace.bits()[..10]
        .iter()
        .map(|b| match b {
            Some(true) => '1',
            Some(false) => '0',
            None => '-',
        })
        .collect();
    assert_eq!(bits, "1101001010");
    check_golden("predictive", &trace.to_csv());
}

#[test]
fn golden_adaptive_switch() {
    let cfg = scripted(table_two(SchemeKind::Adaptive), vec![(2, 1)]);
    assert_eq!(decodes(&cfg), vec![(3, 1, 1)]);
    let trace = run_trace(&cfg).unwrap();
    assert_eq!(trace.stats().switches, 1);
    let d = trace.deliveries()[0];
    assert_eq!((d.arrival, d.service_start, d.decoded_at), (2, 2, 3));
    check_golden("adaptive", &trace.to_csv());
    // Without preemption B waits for the null codeword to finish.
    let cfg = scripted(table_two(SchemeKind::Predictive), vec![(2, 1)]);
    assert_eq!(decodes(&cfg), vec![(6, 1, 4)]);
}

#[test]
fn config_validation() {
    let base = scripted(table_one(), vec![]);
    assert!(base.clone().with_horizon(29).validate().is_err());
    assert!(base.clone().with_window(40, 0).validate().is_err());
    assert!(base.clone().with_script(vec![(3, 0), (3, 1)]).validate().is_err());
    assert!(base.clone().with_script(vec![(3, 7)]).validate().is_err());
    assert!(base.validate().is_ok());
}

fn all_schemes(pmf: &SourcePmf, q: f64, max_len: usize) -> Vec<SchemeSpec> {
    let a = ArrivalSpec::new(q).unwrap();
    let p = build_predictive(pmf, a, max_len).unwrap();
    vec![
        build_ideal(pmf, a, max_len).unwrap(),
        build_naive(pmf, a, max_len).unwrap(),
        build_adaptive(&p).unwrap(),
        p,
    ]
}

#[test]
fn decoder_inverts_encoder_all_schemes() {
    let pmf = zipf_pmf(12, 1.0).unwrap();
    for scheme in all_schemes(&pmf, 0.2, 11) {
        let kind = scheme.kind();
        let cfg = SimConfig::new(scheme.clone(), pmf.clone(), ArrivalSpec::new(0.2).unwrap())
            .with_window(1_000, 50_000)
            .with_seed(7);
        let trace = run_trace(&cfg).unwrap();
        let got = decode_stream(&scheme, &trace.bits()).unwrap();
        let want: Vec<(u64, usize)> = trace.deliveries().iter().map(|d| (d.decoded_at, d.symbol)).collect();
        assert_eq!(got, want, "{kind}");
        // Every decoded symbol is, in order, the arrival sequence.
        assert!(trace.deliveries().windows(2).all(|w| w[0].arrival < w[1].arrival));
        if kind == SchemeKind::Adaptive {
            assert!(trace.stats().switches > 0);
        }
    }
}

#[test]
fn runs_are_deterministic_and_paired() {
    let pmf = uniform_pmf(6).unwrap();
    let schemes = all_schemes(&pmf, 0.2, 5);
    let cfg = |s: &SchemeSpec, seed| {
        SimConfig::new(s.clone(), pmf.clone(), ArrivalSpec::new(0.2).unwrap())
            .with_window(100, 5_000)
            .with_seed(seed)
    };
    assert_eq!(run(&cfg(&schemes[0], 3)).unwrap(), run(&cfg(&schemes[0], 3)).unwrap());
    assert_ne!(run(&cfg(&schemes[0], 3)).unwrap(), run(&cfg(&schemes[0], 4)).unwrap());
    // Same seed, different scheme: identical arrival sample path.
    let arrivals = |s: &SchemeSpec| -> Vec<Option<usize>> {
        run_trace(&cfg(s, 11)).unwrap().slots().iter().map(|r| r.arrival).collect()
    };
    let first = arrivals(&schemes[0]);
    for s in &schemes[1..] {
        assert_eq!(arrivals(s), first);
    }
}

#[test]
fn arrival_rate_within_three_sigma() {
    let pmf = uniform_pmf(4).unwrap();
    let q = 0.1;
    let n = 200_000u64;
    let scheme = build_ideal(&pmf, ArrivalSpec::new(q).unwrap(), 3).unwrap();
    for seed in 0..5 {
        let cfg = SimConfig::new(scheme.clone(), pmf.clone(), ArrivalSpec::new(q).unwrap())
            .with_window(0, n)
            .with_seed(seed);
        let stats = run(&cfg).unwrap();
        let rate = stats.arrivals as f64 / n as f64;
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((rate - q).abs() < 3.0 * sigma, "seed {seed}: {rate}");
    }
}

#[test]
fn per_delivery_age_law() {
    // Peak = W + S + Y exactly, delivery by delivery; the age right after
    // a decode equals that message's system time W + S.
    let pmf = zipf_pmf(8, 1.2).unwrap();
    let scheme = build_ideal(&pmf, ArrivalSpec::new(0.3).unwrap(), 7).unwrap();
    let cfg = SimConfig::new(scheme, pmf, ArrivalSpec::new(0.3).unwrap()).with_window(0, 20_000);
    let trace = run_trace(&cfg).unwrap();
    for d in trace.deliveries() {
        if let (Some(peak), Some(y)) = (d.peak(), d.interarrival()) {
            assert_eq!(peak, d.wait() + d.service() + y);
        }
        if let Some(row) = trace.slots().get(d.decoded_at as usize) {
            assert_eq!(row.age, d.wait() + d.service());
        }
    }
    let (w, s, y) = empirical_moments(&trace).unwrap();
    assert!((w + s + y - trace.stats().empirical_paoi).abs() < 1e-9);
}

#[test]
fn ideal_matches_closed_form() {
    let pmf = zipf_pmf(10, 1.0).unwrap();
    let a = ArrivalSpec::new(0.2).unwrap();
    let scheme = build_ideal(&pmf, a, 9).unwrap();
    let m = scheme.message_codebook().moments(&pmf).unwrap();
    let cfg = SimConfig::new(scheme, pmf, a).with_window(10_000, 400_000).with_seed(1);
    let trace = run_trace(&cfg).unwrap();
    let stats = trace.stats();
    let analytic = paoi_ideal(0.2, &m).unwrap();
    assert!((stats.empirical_paoi / analytic - 1.0).abs() < 0.02, "{} vs {analytic}", stats.empirical_paoi);
    assert!((stats.mean_service - m.mean_len).abs() < 0.02 * m.mean_len);
    assert!((idle_fraction(&trace) - (1.0 - 0.2 * m.mean_len)).abs() < 0.01);
    assert!(!stats.diverged());
}

#[test]
fn empty_sample_is_an_error() {
    let cfg = scripted(table_one(), vec![(1, 0)]);
    assert!(empirical_moments(&run_trace(&cfg).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decoder_roundtrip_random(
        weights in prop::collection::vec(0.05f64..1.0, 2..=7),
        load in 0.1f64..0.9,
        seed in any::<u64>(),
    ) {
        let pmf = SourcePmf::from_weights(&weights).unwrap();
        let n = pmf.len();
        let q = load / pmf.len().next_power_of_two().trailing_zeros().max(1) as f64;
        let a = ArrivalSpec::new(q.min(0.9)).unwrap();
        let Ok(p) = build_predictive(&pmf, a, n - 1) else { return Ok(()) };
        let mut schemes = vec![build_ideal(&pmf, a, n - 1).unwrap(), build_adaptive(&p).unwrap(), p];
        if let Ok(naive) = build_naive(&pmf, a, n - 1) {
            schemes.push(naive);
        }
        for s in schemes {
            let cfg = SimConfig::new(s.clone(), pmf.clone(), a).with_window(0, 3_000).with_seed(seed);
            let trace = run_trace(&cfg).unwrap();
            let got = decode_stream(&s, &trace.bits()).unwrap();
            let want: Vec<(u64, usize)> =
                trace.deliveries().iter().map(|d| (d.decoded_at, d.symbol)).collect();
            prop_assert_eq!(got, want);
        }
    }
}
