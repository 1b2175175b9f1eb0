//! Package-Merge, boundary search and age-optimal selection checked
//! against exhaustive enumeration on small alphabets.

use std::cmp::Ordering;

use proptest::prelude::*;
use timely_coding::analysis::paoi_ideal;
use timely_coding::coding::{
    age_optimal_code, boundary_codes, brute_force_optimum, canonical_assign, huffman_lengths, kraft_cmp,
    min_linear_penalty_lengths, moments, Objective, PenaltyWeights,
};
use timely_coding::source_model::{uniform_pmf, ArrivalSpec, SourcePmf};

/// All complete sorted length vectors, enumerated independently of the
/// crate's own oracle (plain odometer over lengths, filtered by Kraft).
fn all_complete(n: usize, max_len: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![1u32; n];
    loop {
        if cur.windows(2).all(|w| w[0] <= w[1]) {
            let units: u64 = cur.iter().map(|&l| 1u64 << (max_len - l)).sum();
            if units == 1u64 << max_len {
                out.push(cur.clone());
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < max_len {
                cur[i] += 1;
                for j in i + 1..n {
                    cur[j] = cur[i];
                }
                break;
            }
        }
    }
}

/// Moments of every complete code, sorted lengths paired with descending
/// probabilities.
fn all_points(pmf: &SourcePmf, max_len: u32) -> Vec<(f64, f64)> {
    let mut probs = pmf.probs().to_vec();
    probs.sort_by(|a, b| b.total_cmp(a));
    all_complete(pmf.len(), max_len)
        .into_iter()
        .map(|l| {
            let m1: f64 = probs.iter().zip(&l).map(|(p, &x)| p * x as f64).sum();
            let m2: f64 = probs.iter().zip(&l).map(|(p, &x)| p * (x * x) as f64).sum();
            (m1, m2)
        })
        .collect()
}

/// Lower-left hull vertices via monotone chain over all points.
fn hull_oracle(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|b, a| (b.0 - a.0).abs() < 1e-12);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 1e-10 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let lowest = (0..hull.len()).min_by(|&i, &j| hull[i].1.total_cmp(&hull[j].1)).unwrap();
    hull.truncate(lowest + 1);
    hull
}

fn pmf_strategy(max_n: usize) -> impl Strategy<Value = SourcePmf> {
    prop::collection::vec(0.01f64..1.0, 2..=max_n).prop_map(|w| SourcePmf::from_weights(&w).unwrap())
}

#[test]
fn frozen_brute_force_examples() {
    let dyadic = SourcePmf::from_probs(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
    assert_eq!(min_linear_penalty_lengths(&dyadic, PenaltyWeights::MEAN, 4).unwrap(), vec![1, 2, 3, 3]);
    let u4 = uniform_pmf(4).unwrap();
    assert_eq!(min_linear_penalty_lengths(&u4, PenaltyWeights::SECOND_MOMENT, 3).unwrap(), vec![2, 2, 2, 2]);
    // Exhaustive PAoI argmin for the dyadic source at q = 0.4 is the
    // Huffman code: (1.75, 3.75) dominates every other complete code.
    let (l, v) = brute_force_optimum(&dyadic, Objective::PaoiAt(ArrivalSpec::new(0.4).unwrap()), 4).unwrap();
    assert_eq!(l, vec![1, 2, 3, 3]);
    let book = age_optimal_code(&dyadic, ArrivalSpec::new(0.4).unwrap(), 4).unwrap();
    assert_eq!(book.lengths(), l);
    let m = book.moments(&dyadic).unwrap();
    assert!((paoi_ideal(0.4, &m).unwrap() - v).abs() < 1e-12);
    // 2/(2(2.5-1.75)) + 1.75 + 2.5
    assert!((v - (2.0 / 1.5 + 4.25)).abs() < 1e-12);
}

#[test]
fn uniform_twenty_boundary_matches_enumeration() {
    // Uniform: moments depend only on the multiset, so enumeration over
    // multisets with lengths <= 6 covers every complete code.
    let pmf = uniform_pmf(20).unwrap();
    let oracle = hull_oracle(&all_points(&pmf, 6));
    let found: Vec<(f64, f64)> = boundary_codes(&pmf, 19)
        .unwrap()
        .iter()
        .map(|c| (c.moments.mean_len, c.moments.second_moment))
        .collect();
    assert_eq!(found.len(), oracle.len());
    for (a, b) in found.iter().zip(&oracle) {
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }
    assert!(found.iter().any(|p| (p.0 - 4.4).abs() < 1e-12 && (p.1 - 19.6).abs() < 1e-12));
}

#[test]
fn strict_improvement_fixture() {
    // A skewed source whose boundary has several vertices; at a high load
    // the age-optimal code beats Huffman strictly.
    let pmf = SourcePmf::from_weights(&[0.4, 0.2, 0.1, 0.1, 0.08, 0.06, 0.04, 0.02]).unwrap();
    let codes = boundary_codes(&pmf, 7).unwrap();
    assert!(codes.len() >= 2, "{codes:?}");
    let h = moments(&pmf, &huffman_lengths(&pmf)).unwrap();
    let q = 0.95 / h.mean_len;
    let best = age_optimal_code(&pmf, ArrivalSpec::new(q).unwrap(), 7).unwrap();
    let pb = paoi_ideal(q, &best.moments(&pmf).unwrap()).unwrap();
    let ph = paoi_ideal(q, &h).unwrap();
    assert!(pb < ph, "{pb} vs {ph}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn huffman_matches_brute_force(pmf in pmf_strategy(8)) {
        let max_len = pmf.len().min(8);
        let pm = min_linear_penalty_lengths(&pmf, PenaltyWeights::MEAN, max_len).unwrap();
        let (_, best) = brute_force_optimum(&pmf, Objective::MeanLength, max_len).unwrap();
        let m = moments(&pmf, &pm).unwrap();
        prop_assert!((m.mean_len - best).abs() < 1e-12);
        prop_assert!(m.mean_len >= pmf.entropy() - 1e-12);
    }

    #[test]
    fn penalty_matches_brute_force(
        pmf in pmf_strategy(6),
        alpha in 0.0f64..1.0,
        beta in 0.0f64..1.0,
        max_len in 3usize..=6,
    ) {
        prop_assume!(alpha + beta > 1e-6);
        let w = PenaltyWeights::new(alpha, beta).unwrap();
        let pm = min_linear_penalty_lengths(&pmf, w, max_len).unwrap();
        prop_assert_eq!(kraft_cmp(&pm), Ordering::Equal);
        prop_assert!(pm.iter().all(|&l| l as usize <= max_len));
        let (_, best) = brute_force_optimum(&pmf, Objective::Penalty(w), max_len).unwrap();
        let got = moments(&pmf, &pm).unwrap().penalty(w);
        prop_assert!((got - best).abs() <= 1e-12 * best.max(1.0), "{} vs {}", got, best);
    }

    #[test]
    fn penalty_argmin_scale_invariant(
        pmf in pmf_strategy(8),
        alpha in 0.0f64..1.0,
        beta in 0.01f64..1.0,
        scale in prop::sample::select(vec![0.125, 0.5, 2.0, 8.0, 1024.0]),
    ) {
        let n = pmf.len();
        let a = min_linear_penalty_lengths(&pmf, PenaltyWeights::new(alpha, beta).unwrap(), n - 1).unwrap();
        let b = min_linear_penalty_lengths(
            &pmf, PenaltyWeights::new(alpha * scale, beta * scale).unwrap(), n - 1).unwrap();
        let (mut a, mut b) = (a, b);
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn boundary_is_convex_chain_and_matches_hull(pmf in pmf_strategy(7)) {
        let max_len = pmf.len() - 1;
        let codes = boundary_codes(&pmf, max_len).unwrap();
        for c in &codes {
            prop_assert_eq!(kraft_cmp(&c.lengths), Ordering::Equal);
            let book = canonical_assign(&pmf, &c.lengths).unwrap();
            prop_assert!(book.prefix_violation().is_none());
            prop_assert!(c.moments.mean_len >= pmf.entropy() - 1e-12);
        }
        for w in codes.windows(2) {
            prop_assert!(w[0].moments.mean_len < w[1].moments.mean_len);
            prop_assert!(w[0].moments.second_moment > w[1].moments.second_moment);
        }
        for t in codes.windows(3) {
            let (o, a, b) = (&t[0].moments, &t[1].moments, &t[2].moments);
            let cross = (a.mean_len - o.mean_len) * (b.second_moment - o.second_moment)
                - (a.second_moment - o.second_moment) * (b.mean_len - o.mean_len);
            prop_assert!(cross > 0.0);
        }
        let oracle = hull_oracle(&all_points(&pmf, max_len as u32));
        prop_assert_eq!(codes.len(), oracle.len());
        for (c, o) in codes.iter().zip(&oracle) {
            prop_assert!((c.moments.mean_len - o.0).abs() < 1e-9);
            prop_assert!((c.moments.second_moment - o.1).abs() < 1e-9);
        }
    }

    #[test]
    fn age_optimal_dominates_huffman(pmf in pmf_strategy(8), load in 0.05f64..0.99) {
        let h = moments(&pmf, &huffman_lengths(&pmf)).unwrap();
        let q = load / h.mean_len;
        prop_assume!(q < 1.0);
        let book = age_optimal_code(&pmf, ArrivalSpec::new(q).unwrap(), pmf.len() - 1).unwrap();
        let pa = paoi_ideal(q, &book.moments(&pmf).unwrap()).unwrap();
        let ph = paoi_ideal(q, &h).unwrap();
        prop_assert!(pa <= ph + 1e-12 * ph);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// The boundary restriction loses nothing against exhaustive search.
    #[test]
    fn age_optimal_matches_global_brute_force(pmf in pmf_strategy(8), load in 0.02f64..0.999) {
        let n = pmf.len();
        let h = moments(&pmf, &huffman_lengths(&pmf)).unwrap();
        let a = ArrivalSpec::new(load / h.mean_len).unwrap();
        let book = age_optimal_code(&pmf, a, n - 1).unwrap();
        let got = paoi_ideal(a.q(), &book.moments(&pmf).unwrap()).unwrap();
        let (_, best) = brute_force_optimum(&pmf, Objective::PaoiAt(a), n - 1).unwrap();
        prop_assert!((got - best).abs() <= 1e-12 * best);
    }
}
