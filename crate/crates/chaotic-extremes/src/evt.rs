//! Block-maxima Monte Carlo and the statistical checks around the
//! half-Weibull limit law `H(x) = exp(-sqrt(-x))`, `x <= 0`.
//!
//! All stochastic operations draw stationary starts `z ~ G_a` through a
//! [`MeasureModel`](crate::measure::MeasureModel) and derive one pseudo-random
//! substream per replica, so outputs are bit-identical for a given seed
//! regardless of how replicas are scheduled.

use std::collections::BTreeMap;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::map::MapParameter;
use crate::measure::{least_squares_slope, MeasureError, MeasureModel};
use crate::rng::{substream, StreamTag};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvtError {
    #[error("block length must be at least 2")]
    BlockTooShort,
    #[error("need at least {0} replicas for this statistic")]
    TooFewReplicas(usize),
    #[error("lag divisor k must be at least 2")]
    BadLagDivisor,
    #[error("decay constant {0} must lie in (0, 1)")]
    BadDecayConstant(f64),
    #[error("threshold {0} must be below 1")]
    BadThreshold(f64),
    #[error("standardized sums have zero empirical variance")]
    DegenerateVariance,
    #[error("grid must be sorted ascending")]
    UnsortedGrid,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// The type III limit law of the normalized maxima:
/// `H(x) = exp(-sqrt(-x))` for `x <= 0`, `1` for `x > 0`.
pub fn weibull_h<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        F::one()
    } else {
        (-(-x).sqrt()).exp()
    }
}

/// A seeded block-maxima run: `replicas` independent draws of
/// `a_n (M_n - b_n)` where `M_n = max{X_0, ..., X_{n-1}}` starts from
/// `z ~ G_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximaExperiment<F> {
    pub n: u64,
    pub seed: u64,
    pub a_n: F,
    pub b_n: F,
    /// One value per replica, in replica order.
    pub normalized: Vec<F>,
}

impl<F: Scalar> MaximaExperiment<F> {
    pub fn replicas(&self) -> usize {
        self.normalized.len()
    }
}

/// Runs the block-maxima experiment. The maximum includes the starting point
/// itself (`X_0 .. X_{n-1}`, i.e. `n - 1` map applications).
pub fn sample_maxima<F: Scalar>(
    params: &MapParameter<F>,
    model: &MeasureModel<F>,
    n: u64,
    replicas: usize,
    seed: u64,
) -> Result<MaximaExperiment<F>, EvtError> {
    if n < 2 {
        return Err(EvtError::BlockTooShort);
    }
    if replicas == 0 {
        return Err(EvtError::TooFewReplicas(1));
    }
    let a_n = model.normalizer(n)?;
    let b_n = model.shift();
    let normalized: Vec<F> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, StreamTag::Maxima, i);
            let mut x = model.sample_initial(&mut rng);
            let mut max = x;
            for _ in 1..n {
                x = params.apply(x);
                if x > max {
                    max = x;
                }
            }
            a_n * (max - b_n)
        })
        .collect();
    Ok(MaximaExperiment { n, seed, a_n, b_n, normalized })
}

/// Empirical CDF of the normalized sample at each grid point; the grid must
/// be sorted ascending.
pub fn ecdf_at<F: Scalar>(exp: &MaximaExperiment<F>, grid: &[F]) -> Result<Vec<F>, EvtError> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(EvtError::UnsortedGrid);
    }
    let mut sorted = exp.normalized.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = F::from_usize(sorted.len()).unwrap();
    Ok(grid
        .iter()
        .map(|&x| F::from_usize(sorted.partition_point(|&v| v <= x)).unwrap() / m)
        .collect())
}

/// Two-sided Kolmogorov-Smirnov distance of the normalized sample to `H`.
pub fn ks_distance<F: Scalar>(exp: &MaximaExperiment<F>) -> Result<F, EvtError> {
    if exp.replicas() < 10 {
        return Err(EvtError::TooFewReplicas(10));
    }
    let mut sorted = exp.normalized.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ks_statistic(&sorted, |x| weibull_h(x)))
}

/// Sup over the sorted sample of `max(|F(x_i) - G(x_i)|, |F(x_i^-) - G(x_i)|)`
/// for the sample ECDF `F` against a reference CDF `G`.
pub(crate) fn ks_statistic<F: Scalar>(sorted: &[F], reference: impl Fn(F) -> F) -> F {
    let m = F::from_usize(sorted.len()).unwrap();
    let mut sup = F::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let g = reference(x);
        let hi = (F::from_usize(i + 1).unwrap() / m - g).abs();
        let lo = (g - F::from_usize(i).unwrap() / m).abs();
        sup = sup.max(hi).max(lo);
    }
    sup
}

/// Pair-counting scheme for the D'(u_n) estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DprimeMode {
    /// One orbit of length `2 L` per trial; every pair `(X_t, X_{t+j})` with
    /// `t < L`, `1 <= j <= L` contributes (overlapping windows).
    Orbit,
    /// Pairs `(X_0, X_j)` only, one orbit of length `L + 1` per trial.
    Strict,
    /// Same counting as `Orbit` but over i.i.d. draws from the model instead
    /// of an orbit; oracle for the independent-sequence value
    /// `n floor(n/k) (1 - G(u_n))^2`.
    IidSurrogate,
}

/// Monte-Carlo estimate of `n * sum_{j=1}^{floor(n/k)} P{X_0 > u_n, X_j > u_n}`
/// with a standard error from the spread of per-trial contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DprimeEstimate<F> {
    pub estimate: F,
    pub std_error: F,
    pub u_n: F,
    /// `floor(n/k)`, the number of lags summed.
    pub lags: u64,
}

pub fn dprime_estimate<F: Scalar>(
    params: &MapParameter<F>,
    model: &MeasureModel<F>,
    n: u64,
    k: u64,
    tau: F,
    trials: usize,
    seed: u64,
    mode: DprimeMode,
) -> Result<DprimeEstimate<F>, EvtError> {
    if k < 2 {
        return Err(EvtError::BadLagDivisor);
    }
    if trials == 0 {
        return Err(EvtError::TooFewReplicas(1));
    }
    let spec = model.level(n, tau, params)?;
    let u = spec.u_n;
    let lags = (n / k) as usize;
    if lags == 0 {
        return Err(EvtError::BadLagDivisor);
    }
    let windows = match mode {
        DprimeMode::Strict => 1usize,
        DprimeMode::Orbit | DprimeMode::IidSurrogate => lags,
    };
    let len = windows + lags;

    // Per-trial statistic: (1/windows) * #{(t, t+j) pairs with both states
    // above u}; exceedances are rare, so pairs are counted over the
    // exceedance times only.
    let per_trial: Vec<F> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, StreamTag::Dprime, i);
            let mut exceed_times: Vec<usize> = Vec::new();
            match mode {
                DprimeMode::Orbit | DprimeMode::Strict => {
                    let mut x = model.sample_initial(&mut rng);
                    for t in 0..len {
                        if x > u {
                            exceed_times.push(t);
                        }
                        x = params.apply(x);
                    }
                }
                DprimeMode::IidSurrogate => {
                    for t in 0..len {
                        let x = model.sample_initial(&mut rng);
                        if x > u {
                            exceed_times.push(t);
                        }
                    }
                }
            }
            let mut pairs = 0u64;
            for (idx, &s) in exceed_times.iter().enumerate() {
                if s >= windows {
                    break;
                }
                for &t in &exceed_times[idx + 1..] {
                    let j = t - s;
                    if j > lags {
                        break;
                    }
                    pairs += 1;
                }
            }
            F::from_u64(pairs).unwrap() / F::from_usize(windows).unwrap()
        })
        .collect();

    let nt = F::from_usize(trials).unwrap();
    let mean = per_trial.iter().fold(F::zero(), |s, &v| s + v) / nt;
    let var = per_trial
        .iter()
        .fold(F::zero(), |s, &v| s + (v - mean) * (v - mean))
        / (nt - F::one()).max(F::one());
    let n_f = F::from_u64(n).unwrap();
    Ok(DprimeEstimate {
        estimate: n_f * mean,
        std_error: n_f * (var / nt).sqrt(),
        u_n: u,
        lags: lags as u64,
    })
}

/// One lag of the indicator autocovariance
/// `C(j) = P{X_0 > u, X_j > u} - P{X_0 > u}^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationPoint<F> {
    pub lag: u64,
    pub p_joint: F,
    pub p_marginal_sq: F,
    pub corr: F,
    /// Binomial standard error of the joint probability.
    pub std_error: F,
}

/// Indicator autocovariance of the exceedance set `(u, 1]` at lags
/// `0 ..= j_max`, from `trials` stationary orbits of length `j_max + 1`.
pub fn indicator_correlation<F: Scalar>(
    params: &MapParameter<F>,
    model: &MeasureModel<F>,
    u: F,
    j_max: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<CorrelationPoint<F>>, EvtError> {
    if u >= F::one() {
        return Err(EvtError::BadThreshold(u.to_f64().unwrap_or(f64::NAN)));
    }
    if trials == 0 {
        return Err(EvtError::TooFewReplicas(1));
    }
    // Exact per-replica joint counts, reduced in fixed lag order.
    let counts: Vec<u64> = (0..trials as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; j_max + 2],
            |mut acc, i| {
                let mut rng = substream(seed, StreamTag::Correlation, i);
                let mut x = model.sample_initial(&mut rng);
                let first = x > u;
                if first {
                    acc[j_max + 1] += 1; // marginal counter
                    if x > u {
                        acc[0] += 1;
                    }
                    for j in 1..=j_max {
                        x = params.apply(x);
                        if x > u {
                            acc[j] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; j_max + 2],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let nt = F::from_usize(trials).unwrap();
    let p_marginal = F::from_u64(counts[j_max + 1]).unwrap() / nt;
    let p_sq = p_marginal * p_marginal;
    Ok((0..=j_max)
        .map(|j| {
            let p_joint = F::from_u64(counts[j]).unwrap() / nt;
            CorrelationPoint {
                lag: j as u64,
                p_joint,
                p_marginal_sq: p_sq,
                corr: p_joint - p_sq,
                std_error: (p_joint * (F::one() - p_joint) / nt).sqrt(),
            }
        })
        .collect())
}

/// Log-linear fit of the decay rate over lags whose covariance is
/// statistically distinguishable from zero (3 standard errors). `None` when
/// fewer than two such lags exist or the fit does not decay: mixing is then
/// indistinguishable from immediate.
pub fn fit_decay_rate<F: Scalar>(points: &[CorrelationPoint<F>]) -> Option<F> {
    let three = F::from_f64(3.0).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in points.iter().filter(|p| p.lag >= 1) {
        if p.corr.abs() > three * p.std_error && p.corr.abs() > F::zero() {
            xs.push(F::from_u64(p.lag).unwrap());
            ys.push(p.corr.abs().ln());
        }
    }
    if xs.len() < 2 {
        return None;
    }
    let slope = least_squares_slope(&xs, &ys);
    let rate = slope.exp();
    (rate > F::zero() && rate < F::one()).then_some(rate)
}

/// Turning instant `T(n) = ceil(4 ln n / ln(1/varsigma))` after which the
/// correlation term of the blocking argument is negligible.
pub fn turning_time<F: Scalar>(varsigma: F, n: u64) -> Result<u64, EvtError> {
    if !(varsigma > F::zero() && varsigma < F::one()) {
        return Err(EvtError::BadDecayConstant(varsigma.to_f64().unwrap_or(f64::NAN)));
    }
    if n < 2 {
        return Err(EvtError::BlockTooShort);
    }
    let four = F::from_f64(4.0).unwrap();
    let t = four * F::from_u64(n).unwrap().ln() / varsigma.recip().ln();
    Ok(t.ceil().to_u64().unwrap())
}

/// Empirical distribution of return depths at a stationary instant: the
/// frequency, per ring index `gamma >= theta_min`, that an orbit state lies
/// in `I_gamma` or its mirror image.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthHistogram {
    pub theta_min: u32,
    pub trials: usize,
    pub horizon: u64,
    /// Observed states per depth; depths never observed are absent.
    pub counts: BTreeMap<u32, u64>,
}

impl DepthHistogram {
    pub fn frequency(&self, gamma: u32) -> f64 {
        *self.counts.get(&gamma).unwrap_or(&0) as f64 / self.trials as f64
    }

    /// Total observed frequency of the region `{|x| < e^{-theta_min}}`.
    pub fn critical_fraction(&self) -> f64 {
        self.counts.values().sum::<u64>() as f64 / self.trials as f64
    }
}

/// Closed-form arcsine probability of `I_gamma` together with its mirror
/// image, `2 (arcsin(e^{-gamma}) - arcsin(e^{-(gamma+1)})) / pi`.
pub fn analytic_ring_probability_a2<F: Scalar>(gamma: u32) -> F {
    let g = F::from_u32(gamma).unwrap();
    let two = F::from_f64(2.0).unwrap();
    two * ((-g).exp().asin() - (-(g + F::one())).exp().asin()) / F::PI()
}

/// Samples the depth of one stationary orbit state per trial: a start
/// `z ~ G_a` iterated a uniformly chosen number of steps in `[0, horizon]`.
pub fn depth_histogram<F: Scalar>(
    params: &MapParameter<F>,
    model: &MeasureModel<F>,
    theta_min: u32,
    trials: usize,
    horizon: u64,
    seed: u64,
) -> Result<DepthHistogram, EvtError> {
    if theta_min < params.delta_exp() {
        return Err(EvtError::Measure(MeasureError::LevelTooShallow {
            n: 0,
            tau: 0.0,
            theta: theta_min as i64,
            delta_exp: params.delta_exp(),
        }));
    }
    if trials == 0 {
        return Err(EvtError::TooFewReplicas(1));
    }
    let threshold = (-F::from_u32(theta_min).unwrap()).exp();
    let counts = (0..trials as u64)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<u32, u64>, i| {
            let mut rng = substream(seed, StreamTag::DepthHistogram, i);
            let mut x = model.sample_initial(&mut rng);
            let steps = rand::Rng::random_range(&mut rng, 0..=horizon);
            for _ in 0..steps {
                x = params.apply(x);
            }
            // Exact critical hits are measure-zero and skipped.
            if x != F::zero() && x.abs() < threshold {
                if let Some(crate::map::Depth::Finite(m)) =
                    crate::map::depth(x, params).expect("orbit state in domain")
                {
                    *acc.entry(m).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(DepthHistogram { theta_min, trials, horizon, counts })
}

/// Result of the central-limit check on standardized Birkhoff sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltReport<F> {
    /// KS distance of the standardized sums to the standard normal law.
    pub ks: F,
    pub mean_of_sums: F,
    pub sd_of_sums: F,
}

/// Standardizes `trials` Birkhoff sums `sum_{i<n} X_i` (centered by the model
/// mean, scaled by the empirical standard deviation of the sums) and measures
/// their KS distance to the standard normal.
pub fn clt_check<F: Scalar>(
    params: &MapParameter<F>,
    model: &MeasureModel<F>,
    n: u64,
    trials: usize,
    seed: u64,
) -> Result<CltReport<F>, EvtError> {
    if n < 2 {
        return Err(EvtError::BlockTooShort);
    }
    if trials < 2 {
        return Err(EvtError::TooFewReplicas(2));
    }
    let center = model.mean() * F::from_u64(n).unwrap();
    let sums: Vec<F> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, StreamTag::Clt, i);
            let mut x = model.sample_initial(&mut rng);
            let mut sum = x;
            for _ in 1..n {
                x = params.apply(x);
                sum = sum + x;
            }
            sum - center
        })
        .collect();
    let nt = F::from_usize(trials).unwrap();
    let mean = sums.iter().fold(F::zero(), |s, &v| s + v) / nt;
    let var = sums.iter().fold(F::zero(), |s, &v| s + (v - mean) * (v - mean)) / (nt - F::one());
    if var <= F::zero() {
        return Err(EvtError::DegenerateVariance);
    }
    let sd = var.sqrt();
    let mut standardized: Vec<F> = sums.iter().map(|&s| s / sd).collect();
    standardized.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let ks = ks_statistic(&standardized, |z| {
        F::from_f64(normal.cdf(z.to_f64().unwrap())).unwrap()
    });
    Ok(CltReport { ks, mean_of_sums: mean, sd_of_sums: sd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::MapParameter;
    use crate::measure::MeasureModel;
    use crate::rng::uniform01;

    fn a2() -> MapParameter<f64> {
        MapParameter::new(2.0).unwrap()
    }

    fn analytic() -> MeasureModel<f64> {
        MeasureModel::analytic_a2()
    }

    #[test]
    fn weibull_closed_form() {
        assert_eq!(weibull_h(0.0_f64), 1.0);
        assert_eq!(weibull_h(0.5_f64), 1.0);
        assert!((weibull_h(-1.0_f64) - 0.3679).abs() < 5e-5);
        assert!((weibull_h(-0.1_f64) - 0.7289).abs() < 5e-5);
        // Nondecreasing on a grid, vanishing far left.
        let mut prev = 0.0;
        let mut x = -100.0;
        while x <= 1.0 {
            let h = weibull_h(x);
            assert!(h >= prev);
            prev = h;
            x += 0.25;
        }
        assert!(weibull_h(-1e6_f64) < 1e-300);
    }

    #[test]
    fn maxima_are_nonpositive_at_a2() {
        let exp = sample_maxima(&a2(), &analytic(), 100, 2000, 11).unwrap();
        assert_eq!(exp.replicas(), 2000);
        assert!(exp.normalized.iter().all(|&v| v <= 0.0));
        assert_eq!(exp.b_n, 1.0);
    }

    #[test]
    fn single_replica_matches_composition_oracle() {
        let params = a2();
        let model = analytic();
        let exp = sample_maxima(&params, &model, 50, 1, 99).unwrap();

        let mut rng = substream(99, StreamTag::Maxima, 0);
        let u: f64 = uniform01(&mut rng);
        let z = -(std::f64::consts::PI * u).cos();
        let orbit = crate::map::iterate(&params, z, 50).unwrap();
        let max = orbit.states().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let a_n = model.normalizer(50).unwrap();
        assert_eq!(exp.normalized[0], a_n * (max - 1.0));
    }

    #[test]
    fn orbit_hitting_one_gives_zero() {
        // z = 0 maps to 1 at the first step, so M_n = 1 exactly.
        let params = a2();
        let model = analytic();
        let orbit = crate::map::iterate(&params, 0.0, 10).unwrap();
        let max = orbit.states().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let a_n = model.normalizer(10).unwrap();
        assert_eq!(a_n * (max - 1.0), 0.0);
    }

    #[test]
    fn ecdf_direct_count() {
        let exp = MaximaExperiment {
            n: 10,
            seed: 0,
            a_n: 1.0,
            b_n: 1.0,
            normalized: vec![-3.0, -1.0, -0.5, -0.1],
        };
        let vals = ecdf_at(&exp, &[-0.9]).unwrap();
        assert_eq!(vals, vec![0.5]);
        // Above the sample maximum the ECDF is 1.
        assert_eq!(ecdf_at(&exp, &[5.0]).unwrap(), vec![1.0]);
        // Nondecreasing along a grid.
        let grid = vec![-4.0, -2.0, -0.7, -0.2, 0.0];
        let vals = ecdf_at(&exp, &grid).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(ecdf_at(&exp, &[0.0, -1.0]).is_err());
    }

    #[test]
    fn ks_of_exact_inverse_transform_sample() {
        // Invert H: x = -(ln y)^2 for y ~ U(0,1).
        let mut rng = substream(5, StreamTag::Maxima, 123);
        let m = 100_000;
        let normalized: Vec<f64> = (0..m)
            .map(|_| {
                let y: f64 = uniform01(&mut rng);
                -(y.ln() * y.ln())
            })
            .collect();
        let exp = MaximaExperiment { n: 2, seed: 5, a_n: 1.0, b_n: 1.0, normalized };
        let d = ks_distance(&exp).unwrap();
        assert!(d <= 0.01, "KS {d}");
    }

    #[test]
    fn ks_single_point_convention() {
        // A 10-point sample all at x with H(x) = 0.3679 has distance ~0.632.
        let exp = MaximaExperiment {
            n: 2,
            seed: 0,
            a_n: 1.0,
            b_n: 1.0,
            normalized: vec![-1.0; 10],
        };
        let d = ks_distance(&exp).unwrap();
        assert!((d - (1.0 - weibull_h(-1.0_f64))).abs() < 1e-12);
        let tiny = MaximaExperiment { normalized: vec![-1.0; 3], ..exp };
        assert!(ks_distance(&tiny).is_err());
    }

    #[test]
    fn turning_time_values() {
        assert_eq!(turning_time(0.5_f64, 1000).unwrap(), 40);
        assert_eq!(turning_time(0.9_f64, 1_000_000).unwrap(), 525);
        // varsigma = e^{-4} cancels the 4: T = ceil(ln n).
        for n in [10u64, 100, 12345] {
            assert_eq!(
                turning_time((-4.0_f64).exp(), n).unwrap(),
                (n as f64).ln().ceil() as u64
            );
        }
        assert!(turning_time(1.5_f64, 100).is_err());
    }

    #[test]
    fn dprime_zero_without_exceedances() {
        // u so high that no double-precision sample exceeds it.
        let params = a2();
        let model = analytic();
        // tau tiny makes u_n ~ 1; estimate must be 0 when nothing exceeds.
        let est =
            dprime_estimate(&params, &model, 200, 4, 1e-5, 100, 3, DprimeMode::Orbit).unwrap();
        assert_eq!(est.estimate, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn analytic_ring_probability_value() {
        let p: f64 = analytic_ring_probability_a2(5);
        assert!((p - 2.711e-3).abs() < 2e-6, "got {p}");
    }

    #[test]
    fn depth_histogram_counts_sum_to_critical_fraction() {
        let params = a2();
        let model = analytic();
        let h = depth_histogram(&params, &model, 5, 200_000, 64, 17).unwrap();
        let total: u64 = h.counts.values().sum();
        assert_eq!(h.critical_fraction(), total as f64 / 200_000.0);
        // Against the analytic critical-region mass 2 arcsin(e^-5)/pi.
        let expected = 2.0 * (-5.0_f64).exp().asin() / std::f64::consts::PI;
        let se = (expected / 200_000.0).sqrt();
        assert!((h.critical_fraction() - expected).abs() < 5.0 * se);
        assert!(h.counts.keys().all(|&g| g >= 5));
    }

    #[test]
    fn correlation_lag_zero_is_variance() {
        let params = a2();
        let model = analytic();
        let u = model.quantile(0.95).unwrap();
        let pts = indicator_correlation(&params, &model, u, 5, 100_000, 23).unwrap();
        let p = pts[0].p_joint;
        assert!((pts[0].corr - (p - p * p)).abs() < 1e-12);
        // p_joint at lag 0 equals the marginal.
        assert!((p - 0.05).abs() < 0.005);
    }

    #[test]
    fn clt_zero_centering_at_a2() {
        assert_eq!(analytic().mean(), 0.0);
    }
}
