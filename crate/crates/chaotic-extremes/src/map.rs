//! Deterministic dynamics of the quadratic map `f_a(x) = 1 - a x^2` on
//! `[-1, 1]`: orbit iteration, the derivative cocycle in log scale,
//! critical-region geometry (return depth, bound periods, free/bound
//! classification) and finite-horizon checks of the exponential-growth (EG)
//! and basic-assumption (BA) conditions.
//!
//! The critical region is the open interval `(-delta, delta)` with
//! `delta = exp(-delta_exp)`, partitioned into rings
//! `I_m = (exp(-(m+1)), exp(-m)]` and their mirror images. All logarithms are
//! natural.

use thiserror::Error;

use crate::Scalar;

/// Default cap on bound-period iteration.
pub const DEFAULT_BOUND_PERIOD_CAP: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("map parameter a = {0} outside (0, 2]")]
    ParameterOutOfRange(f64),
    #[error("initial state {0} outside [-1, 1]")]
    StateOutOfDomain(f64),
    #[error("orbit length must be at least 1")]
    EmptyOrbit,
    #[error("point {0} lies outside the critical region")]
    OutsideCriticalRegion(f64),
    #[error("depth threshold {theta} is below the critical exponent {delta_exp}")]
    ThetaBelowDelta { theta: u32, delta_exp: u32 },
}

/// Quadratic map parameter `a` together with the critical-region and
/// bound-period configuration `(delta_exp, alpha, beta)`.
///
/// Defaults: `delta_exp = 5`, `alpha = 0.01` and the coupling
/// `beta = 14 * alpha`. `beta` can be overridden independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapParameter<F> {
    a: F,
    delta_exp: u32,
    alpha: F,
    beta: F,
}

impl<F: Scalar> MapParameter<F> {
    pub fn new(a: F) -> Result<Self, MapError> {
        if !(a > F::zero() && a <= F::from_f64(2.0).unwrap()) {
            return Err(MapError::ParameterOutOfRange(a.to_f64().unwrap_or(f64::NAN)));
        }
        let alpha = F::from_f64(0.01).unwrap();
        Ok(Self {
            a,
            delta_exp: 5,
            alpha,
            beta: F::from_f64(14.0).unwrap() * alpha,
        })
    }

    pub fn with_delta_exp(mut self, delta_exp: u32) -> Self {
        self.delta_exp = delta_exp;
        self
    }

    /// Sets `alpha` and re-applies the coupling `beta = 14 * alpha`.
    pub fn with_alpha(mut self, alpha: F) -> Self {
        self.alpha = alpha;
        self.beta = F::from_f64(14.0).unwrap() * alpha;
        self
    }

    /// Overrides `beta`, decoupling it from `alpha`.
    pub fn with_beta(mut self, beta: F) -> Self {
        self.beta = beta;
        self
    }

    pub fn a(&self) -> F {
        self.a
    }

    pub fn delta_exp(&self) -> u32 {
        self.delta_exp
    }

    /// Critical-region half-width `delta = exp(-delta_exp)`.
    pub fn delta(&self) -> F {
        (-F::from_u32(self.delta_exp).unwrap()).exp()
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn beta(&self) -> F {
        self.beta
    }

    /// True when `a < 2` and `delta` is not comfortably larger than `2 - a`
    /// (factor 10). A violated gap does not invalidate the parameter, it only
    /// voids the bound-period heuristics.
    pub fn delta_gap_violated(&self) -> bool {
        let two = F::from_f64(2.0).unwrap();
        if self.a >= two {
            return false;
        }
        self.delta() < F::from_f64(10.0).unwrap() * (two - self.a)
    }

    /// One step of the map.
    pub fn apply(&self, x: F) -> F {
        F::one() - self.a * x * x
    }

    /// `log|Df_a(x)| = log(2 a |x|)`; `-inf` at the critical point.
    pub fn log_abs_derivative(&self, x: F) -> F {
        (F::from_f64(2.0).unwrap() * self.a * x.abs()).ln()
    }
}

/// Return depth `m = floor(-ln|x|)`, with a sentinel for the critical point
/// itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    Finite(u32),
    /// `x = 0`: every ring is above this point.
    Infinite,
}

impl Depth {
    pub fn finite(self) -> Option<u32> {
        match self {
            Depth::Finite(m) => Some(m),
            Depth::Infinite => None,
        }
    }
}

/// Depth of `x` inside the critical region, or `None` outside it.
///
/// Membership is decided by `|x| < exp(-delta_exp)` first; within the region
/// the ring index follows the half-open convention `I_m = (e^{-(m+1)}, e^{-m}]`,
/// so `|x| = e^{-m}` lands in `I_m` even when the floating-point log rounds
/// the wrong way.
pub fn depth<F: Scalar>(x: F, params: &MapParameter<F>) -> Result<Option<Depth>, MapError> {
    if x.abs() > F::one() {
        return Err(MapError::StateOutOfDomain(x.to_f64().unwrap_or(f64::NAN)));
    }
    if x == F::zero() {
        return Ok(Some(Depth::Infinite));
    }
    let ax = x.abs();
    if ax >= params.delta() {
        return Ok(None);
    }
    let mut m = (-ax.ln()).floor().to_i64().unwrap();
    // Ring correction for boundary rounding: enforce e^{-(m+1)} < |x| <= e^{-m}.
    while ax <= (-F::from_i64(m + 1).unwrap()).exp() {
        m += 1;
    }
    while ax > (-F::from_i64(m).unwrap()).exp() {
        m -= 1;
    }
    Ok(Some(Depth::Finite(m as u32)))
}

/// Bound period of a critical-region point: iterations during which the orbit
/// shadows the critical orbit within `e^{-beta k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundPeriod {
    Finite {
        p: u64,
        /// True when the iteration hit the horizon cap before the shadowing
        /// envelope was violated; `p` is then only a lower bound.
        capped: bool,
    },
    /// `x = 0` shadows the critical orbit forever.
    Infinite,
}

impl BoundPeriod {
    pub fn value(self) -> Option<u64> {
        match self {
            BoundPeriod::Finite { p, .. } => Some(p),
            BoundPeriod::Infinite => None,
        }
    }
}

/// Largest `p` such that `|f_a^k(x) - f_a^k(0)| < e^{-beta k}` for all
/// `1 <= k < p`, by parallel iteration of `x` and `0`, with the default
/// horizon cap.
pub fn bound_period<F: Scalar>(params: &MapParameter<F>, x: F) -> Result<BoundPeriod, MapError> {
    bound_period_capped(params, x, DEFAULT_BOUND_PERIOD_CAP)
}

pub fn bound_period_capped<F: Scalar>(
    params: &MapParameter<F>,
    x: F,
    cap: u64,
) -> Result<BoundPeriod, MapError> {
    if x.abs() >= params.delta() {
        return Err(MapError::OutsideCriticalRegion(x.to_f64().unwrap_or(f64::NAN)));
    }
    if x == F::zero() {
        return Ok(BoundPeriod::Infinite);
    }
    // Parallel iteration of x and 0, carrying the difference
    // d_k = f^k(x) - f^k(0) through its own recursion
    //   d_{k+1} = -a (2 z_k + d_k) d_k
    // alongside the critical orbit z_k. Forming f^k(x) - f^k(0) by
    // subtraction instead would round a deep point's difference to zero
    // (1 - a x^2 collapses to 1 in double precision for |x| ~ e^{-19} and
    // below) and the shadowing envelope would never be crossed.
    let two = F::from_f64(2.0).unwrap();
    let mut z = F::zero();
    let mut d = x;
    for k in 1..=cap {
        d = -params.a() * (two * z + d) * d;
        z = params.apply(z);
        let envelope = (-params.beta() * F::from_u64(k).unwrap()).exp();
        if d.abs() >= envelope {
            return Ok(BoundPeriod::Finite { p: k, capped: false });
        }
    }
    Ok(BoundPeriod::Finite { p: cap, capped: true })
}

/// Whether a critical-region entry is free or trapped in the bound window of
/// an earlier free return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnKind {
    Free { bound_period: BoundPeriod },
    Bound,
}

/// A classified entry of the orbit into the critical region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnEvent {
    pub time: usize,
    pub depth: Depth,
    /// Sign of the state: true when `x < 0`.
    pub negative: bool,
    pub kind: ReturnKind,
}

/// A finite orbit with the running log-derivative cocycle.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord<F> {
    x0: F,
    states: Vec<F>,
    log_deriv: Vec<F>,
    singular_from: Option<usize>,
}

impl<F: Scalar> OrbitRecord<F> {
    pub fn x0(&self) -> F {
        self.x0
    }

    /// States `x_0 .. x_{n-1}`.
    pub fn states(&self) -> &[F] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `log_deriv[k] = sum_{i<k} log|Df_a(x_i)| = log|Df_a^k(x_0)|`,
    /// for `k = 0 .. n-1`.
    pub fn log_deriv(&self) -> &[F] {
        &self.log_deriv
    }

    /// Index of the first exact hit of the critical point, if any; the
    /// cocycle is singular from there on.
    pub fn singular_from(&self) -> Option<usize> {
        self.singular_from
    }
}

/// Iterates `f_a` from `x0` for `n` states (including `x0` itself).
pub fn iterate<F: Scalar>(
    params: &MapParameter<F>,
    x0: F,
    n: usize,
) -> Result<OrbitRecord<F>, MapError> {
    if x0.abs() > F::one() {
        return Err(MapError::StateOutOfDomain(x0.to_f64().unwrap_or(f64::NAN)));
    }
    if n == 0 {
        return Err(MapError::EmptyOrbit);
    }
    let mut states = Vec::with_capacity(n);
    let mut log_deriv = Vec::with_capacity(n);
    let mut singular_from = None;
    let mut x = x0;
    let mut acc = F::zero();
    for k in 0..n {
        states.push(x);
        log_deriv.push(acc);
        if x == F::zero() && singular_from.is_none() {
            singular_from = Some(k);
        }
        acc = acc + params.log_abs_derivative(x);
        x = params.apply(x);
    }
    Ok(OrbitRecord { x0, states, log_deriv, singular_from })
}

/// Log-derivative cocycle `log|Df_a^k(x0)|` for `k = 1 .. n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeCocycle<F> {
    pub values: Vec<F>,
    /// Set when the orbit hits the critical point exactly; entries past that
    /// index are `-inf`.
    pub singular: bool,
}

pub fn log_derivative<F: Scalar>(
    params: &MapParameter<F>,
    x0: F,
    n: usize,
) -> Result<DerivativeCocycle<F>, MapError> {
    let orbit = iterate(params, x0, n)?;
    let mut values = Vec::with_capacity(n);
    let mut acc = F::zero();
    for &x in orbit.states() {
        acc = acc + params.log_abs_derivative(x);
        values.push(acc);
    }
    Ok(DerivativeCocycle { values, singular: orbit.singular_from().is_some() })
}

/// Scans an orbit for critical-region entries and classifies each one as free
/// or bound.
///
/// A free return at time `s` with bound period `p` opens the window
/// `(s, s+p]`; any later return inside an open window is bound. Free returns
/// get their bound period attached (computed with the default cap).
pub fn classify_returns<F: Scalar>(
    orbit: &OrbitRecord<F>,
    params: &MapParameter<F>,
) -> Vec<ReturnEvent> {
    let mut events = Vec::new();
    // Largest bound-window end seen so far; usize::MAX marks an infinite
    // window (exact critical hit).
    let mut window_end: usize = 0;
    for (t, &x) in orbit.states().iter().enumerate() {
        let Some(d) = depth(x, params).expect("orbit states stay in [-1, 1]") else {
            continue;
        };
        let kind = if t > 0 && t <= window_end {
            ReturnKind::Bound
        } else {
            let bp = match d {
                Depth::Infinite => BoundPeriod::Infinite,
                Depth::Finite(_) => bound_period(params, x).expect("state is in the critical region"),
            };
            let end = match bp {
                BoundPeriod::Infinite => usize::MAX,
                BoundPeriod::Finite { p, .. } => t.saturating_add(p as usize),
            };
            window_end = window_end.max(end);
            ReturnKind::Free { bound_period: bp }
        };
        events.push(ReturnEvent { time: t, depth: d, negative: x < F::zero(), kind });
    }
    events
}

/// Finite-horizon margins for the exponential-growth condition
/// `|Df_a^n(f_a(0))| >= e^{c n}` and the basic assumption
/// `|f_a^n(0)| >= e^{-alpha sqrt(n)}`.
///
/// This is a heuristic: double-precision trajectories shadow true orbits only
/// statistically, so a green report exhibits finite-horizon margins and does
/// not certify membership in the Benedicks-Carleson parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport<F> {
    /// `log|Df_a^n(f_a(0))| - c n` for `n = 1 .. N`.
    pub eg_margins: Vec<F>,
    /// `log|f_a^n(0)| + alpha sqrt(n)` for `n = 1 .. N`.
    pub ba_margins: Vec<F>,
    pub eg_pass: bool,
    pub ba_pass: bool,
    pub eg_first_failure: Option<usize>,
    pub ba_first_failure: Option<usize>,
}

pub fn verify_growth_conditions<F: Scalar>(
    params: &MapParameter<F>,
    c: F,
    horizon: usize,
) -> Result<GrowthReport<F>, MapError> {
    if horizon == 0 {
        return Err(MapError::EmptyOrbit);
    }
    let critical_value = params.apply(F::zero());
    let cocycle = log_derivative(params, critical_value, horizon)?;
    let eg_margins: Vec<F> = cocycle
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| v - c * F::from_usize(i + 1).unwrap())
        .collect();

    let critical_orbit = iterate(params, F::zero(), horizon + 1)?;
    let ba_margins: Vec<F> = critical_orbit.states()[1..]
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let n = F::from_usize(i + 1).unwrap();
            x.abs().ln() + params.alpha() * n.sqrt()
        })
        .collect();

    let eg_first_failure = eg_margins.iter().position(|&m| m < F::zero()).map(|i| i + 1);
    let ba_first_failure = ba_margins.iter().position(|&m| m < F::zero()).map(|i| i + 1);
    Ok(GrowthReport {
        eg_pass: eg_first_failure.is_none(),
        ba_pass: ba_first_failure.is_none(),
        eg_margins,
        ba_margins,
        eg_first_failure,
        ba_first_failure,
    })
}

/// Times `t` with `|x_t| < e^{-theta}`.
pub fn deep_return_times<F: Scalar>(
    orbit: &OrbitRecord<F>,
    theta: u32,
    params: &MapParameter<F>,
) -> Result<Vec<usize>, MapError> {
    if theta < params.delta_exp() {
        return Err(MapError::ThetaBelowDelta { theta, delta_exp: params.delta_exp() });
    }
    let threshold = (-F::from_u32(theta).unwrap()).exp();
    Ok(orbit
        .states()
        .iter()
        .enumerate()
        .filter(|(_, x)| x.abs() < threshold)
        .map(|(t, _)| t)
        .collect())
}

/// Consecutive gaps between returns deeper than `theta`; empty when fewer
/// than two such returns occur.
pub fn deep_return_gaps<F: Scalar>(
    orbit: &OrbitRecord<F>,
    theta: u32,
    params: &MapParameter<F>,
) -> Result<Vec<usize>, MapError> {
    let times = deep_return_times(orbit, theta, params)?;
    Ok(times.windows(2).map(|w| w[1] - w[0]).collect())
}
