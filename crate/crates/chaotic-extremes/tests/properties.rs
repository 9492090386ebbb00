//! Property-style checks of the structural invariants: recurrence exactness,
//! partition geometry, free-period expansion, quantile/CDF consistency and
//! the exceedance/deep-return correspondence.

use proptest::prelude::*;

use chaotic_extremes::evt;
use chaotic_extremes::map::{self, BoundPeriod, Depth, MapParameter, ReturnKind};
use chaotic_extremes::measure::MeasureModel;
use chaotic_extremes::rng::{substream, uniform01, StreamTag};

fn a2() -> MapParameter<f64> {
    MapParameter::new(2.0).unwrap()
}

proptest! {
    #[test]
    fn recurrence_is_bit_exact(
        x0 in -1.0f64..1.0,
        a in 0.5f64..2.0,
        n in 2usize..200,
    ) {
        let params = MapParameter::new(a).unwrap();
        let orbit = map::iterate(&params, x0, n).unwrap();
        let s = orbit.states();
        for k in 0..n - 1 {
            prop_assert_eq!(s[k + 1], 1.0 - a * s[k] * s[k]);
        }
    }

    #[test]
    fn depth_matches_ring_membership(t in 5.0f64..45.0) {
        // x = e^{-t} sweeps the critical region; depth m must mean
        // |x| in (e^{-(m+1)}, e^{-m}].
        let params = a2();
        let x = (-t).exp();
        if x < params.delta() {
            let m = match map::depth(x, &params).unwrap() {
                Some(Depth::Finite(m)) => m,
                other => return Err(TestCaseError::fail(format!("expected finite depth, got {other:?}"))),
            };
            prop_assert!(x <= (-(m as f64)).exp());
            prop_assert!(x > (-(m as f64 + 1.0)).exp());
        }
    }

    #[test]
    fn analytic_cdf_quantile_are_monotone(
        x1 in -1.0f64..1.0, x2 in -1.0f64..1.0,
        y1 in 0.0f64..1.0, y2 in 0.0f64..1.0,
    ) {
        let m = MeasureModel::<f64>::analytic_a2();
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        prop_assert!(m.cdf(lo).unwrap() <= m.cdf(hi).unwrap());
        let (lo, hi) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
        prop_assert!(m.quantile(lo).unwrap() <= m.quantile(hi).unwrap());
    }

    #[test]
    fn empirical_quantile_roundtrip_gap(y in 0.0001f64..0.9999) {
        let params = a2();
        let model = MeasureModel::build_empirical(&params, 2000, 100, 5).unwrap();
        let c = model.cdf(model.quantile(y).unwrap()).unwrap();
        prop_assert!(c >= y);
        prop_assert!(c - y <= 1.0 / 2000.0 + 1e-12);
    }

    #[test]
    fn ecdf_invariant_under_sample_permutation(seed in 0u64..1000) {
        let mut rng = substream(seed, StreamTag::Maxima, 7);
        let sample: Vec<f64> = (0..50).map(|_| -uniform01::<f64, _>(&mut rng) * 5.0).collect();
        let mut shuffled = sample.clone();
        shuffled.reverse();
        let grid = vec![-4.0, -2.0, -1.0, -0.5, -0.1];
        let mk = |normalized: Vec<f64>| evt::MaximaExperiment {
            n: 2, seed, a_n: 1.0, b_n: 1.0, normalized,
        };
        prop_assert_eq!(
            evt::ecdf_at(&mk(sample), &grid).unwrap(),
            evt::ecdf_at(&mk(shuffled), &grid).unwrap()
        );
    }
}

#[test]
fn normalizer_is_strictly_increasing_and_unbounded() {
    let m = MeasureModel::<f64>::analytic_a2();
    let mut prev = 0.0;
    for n in [2u64, 3, 5, 10, 100, 1000, 100_000] {
        let a_n = m.normalizer(n).unwrap();
        assert!(a_n > prev);
        prev = a_n;
    }
    assert!(prev > 1e9);
}

#[test]
fn free_segments_expand() {
    // Over random a=2 orbits, every maximal free stretch of length >= 10
    // ending in a free return carries positive average log-derivative.
    let params = a2();
    let mut checked = 0usize;
    for i in 0..1000u64 {
        let mut rng = substream(1234, StreamTag::Maxima, i);
        let x0 = 2.0 * uniform01::<f64, _>(&mut rng) - 1.0;
        let orbit = map::iterate(&params, x0, 10_000).unwrap();
        let events = map::classify_returns(&orbit, &params);
        let mut free_from = 0usize; // first instant past every bound window
        for e in &events {
            if let ReturnKind::Free { bound_period } = e.kind {
                let k = e.time - free_from;
                if k >= 10 {
                    let growth = orbit.log_deriv()[e.time] - orbit.log_deriv()[free_from];
                    assert!(
                        growth > 0.0,
                        "free segment [{}, {}) contracts: {growth}",
                        free_from,
                        e.time
                    );
                    checked += 1;
                }
                if let BoundPeriod::Finite { p, .. } = bound_period {
                    free_from = free_from.max(e.time + p as usize + 1);
                }
            }
        }
    }
    assert!(checked > 100, "only {checked} long free segments found");
}

#[test]
fn bound_returns_lie_in_exactly_one_window() {
    let params = a2();
    for i in 0..200u64 {
        let mut rng = substream(77, StreamTag::Maxima, i);
        let x0 = 2.0 * uniform01::<f64, _>(&mut rng) - 1.0;
        let orbit = map::iterate(&params, x0, 5_000).unwrap();
        let events = map::classify_returns(&orbit, &params);
        let windows: Vec<(usize, usize)> = events
            .iter()
            .filter_map(|e| match e.kind {
                ReturnKind::Free { bound_period: BoundPeriod::Finite { p, .. } } => {
                    Some((e.time, e.time + p as usize))
                }
                _ => None,
            })
            .collect();
        // No free return starts inside another free return's window.
        for (s, _) in &windows {
            let covering = windows.iter().filter(|(s2, e2)| s2 < s && s <= e2).count();
            assert_eq!(covering, 0, "free return at {s} inside a window");
        }
        for e in &events {
            if e.kind == ReturnKind::Bound {
                let covering =
                    windows.iter().filter(|(s, end)| *s < e.time && e.time <= *end).count();
                assert_eq!(covering, 1, "bound return at {} covered by {covering} windows", e.time);
            }
        }
    }
}

#[test]
fn exceedance_implies_deep_previous_state() {
    // X_j > u_n forces depth(X_{j-1}) >= Theta(n), exactly.
    let params = a2();
    let model = MeasureModel::<f64>::analytic_a2();
    let spec = model.level(100_000, 1.0, &params).unwrap();
    let mut exceedances = 0;
    for i in 0..50u64 {
        let mut rng = substream(4242, StreamTag::Maxima, i);
        let z = model.sample_initial(&mut rng);
        let orbit = map::iterate(&params, z, 200_000).unwrap();
        let states = orbit.states();
        for j in 1..states.len() {
            if states[j] > spec.u_n {
                exceedances += 1;
                let d = map::depth(states[j - 1], &params).unwrap();
                match d {
                    Some(Depth::Finite(m)) => assert!(m >= spec.theta, "depth {m} < {}", spec.theta),
                    Some(Depth::Infinite) => {}
                    None => panic!("exceedance at {j} not preceded by a critical entry"),
                }
            }
        }
    }
    assert!(exceedances > 10, "level too high to observe exceedances");
}

#[test]
fn theta_tracks_log_n() {
    // Theta(n) ~ ln n: the unfloored exponent stays within 10% of ln n
    // across four decades (the floored integer dips further at small n).
    let params = a2();
    let model = MeasureModel::<f64>::analytic_a2();
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let spec = model.level(n, 1.0, &params).unwrap();
        let ratio = spec.theta_exact() / (n as f64).ln();
        assert!((ratio - 1.0).abs() < 0.10, "n={n}: ratio {ratio}");
        assert!((spec.theta as f64) <= spec.theta_exact());
    }
}

#[test]
fn empirical_supdist_scales_like_inverse_sqrt_n() {
    // Average over seeds: a single sup-distance fluctuates by a factor
    // comparable to its mean.
    let params = a2();
    let mut dists = Vec::new();
    for n in [10_000usize, 100_000, 1_000_000] {
        let mean: f64 = (0..8)
            .map(|seed| {
                MeasureModel::build_empirical(&params, n, 1000, 2024 + seed)
                    .unwrap()
                    .sup_distance_to_analytic()
                    .unwrap()
            })
            .sum::<f64>()
            / 8.0;
        dists.push(mean);
    }
    for w in dists.windows(2) {
        let ratio = w[0] / w[1];
        let expected = 10.0f64.sqrt();
        assert!(
            ratio > expected / 2.0 && ratio < expected * 2.0,
            "decay ratio {ratio} outside [{}, {}]",
            expected / 2.0,
            expected * 2.0
        );
    }
}

#[test]
fn maxima_deterministic_across_pool_sizes() {
    let params = a2();
    let model = MeasureModel::<f64>::analytic_a2();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evt::sample_maxima(&params, &model, 500, 4000, 99).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
}

#[test]
fn dprime_surrogate_matches_iid_oracle() {
    // Independent draws make the D' sum concentrate at n*floor(n/k)*(1-G(u))^2.
    let params = a2();
    let model = MeasureModel::<f64>::analytic_a2();
    let (n, k, tau) = (2000u64, 4u64, 2.0f64);
    let est = evt::dprime_estimate(
        &params, &model, n, k, tau, 50_000, 31, evt::DprimeMode::IidSurrogate,
    )
    .unwrap();
    let p = 1.0 - model.cdf(est.u_n).unwrap();
    let oracle = (n as f64) * ((n / k) as f64) * p * p;
    assert!(
        (est.estimate - oracle).abs() <= 3.0 * est.std_error,
        "estimate {} vs oracle {oracle} (3se = {})",
        est.estimate,
        3.0 * est.std_error
    );
}

#[test]
fn correlation_decay_rate_is_a_probability_contraction() {
    let params = a2();
    let model = MeasureModel::<f64>::analytic_a2();
    let u = model.quantile(0.8).unwrap();
    let points = evt::indicator_correlation(&params, &model, u, 30, 400_000, 61).unwrap();
    // Large-lag covariances drown in noise while small lags stand out.
    if let Some(rate) = evt::fit_decay_rate(&points) {
        assert!(rate > 0.0 && rate < 1.0);
        let t = evt::turning_time(rate, 1000).unwrap();
        assert!(t >= 1);
    }
}
