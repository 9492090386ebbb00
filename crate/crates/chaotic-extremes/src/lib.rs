//! Extreme value statistics for the quadratic family `f_a(x) = 1 - a x^2`.
//!
//! The crate has three layers:
//!
//! * [`map`] — deterministic orbits of `f_a`, the derivative cocycle,
//!   critical-region geometry (return depth, bound periods) and finite-horizon
//!   checks of the exponential-growth and basic-assumption conditions.
//! * [`measure`] — the marginal law `G_a` of a stationary orbit point: the
//!   closed-form arcsine law at `a = 2` and empirical Birkhoff models for
//!   general `a`, with quantiles, normalizing sequences and threshold levels.
//! * [`evt`] — block-maxima Monte Carlo against the half-Weibull limit
//!   `H(x) = exp(-sqrt(-x))`, plus the anti-clustering (D') estimator,
//!   indicator-correlation decay, deep-return depth statistics and a CLT check.
//!
//! Core numerics are generic over the scalar type through [`Scalar`]; the
//! aliases below fix the default `f64` instantiation used by the CLI.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

pub mod cli;
pub mod evt;
pub mod map;
pub mod measure;
pub mod rng;

/// Scalar type the numerics are generic over. Blanket-implemented for any
/// float with the required num-traits capabilities (`f32`, `f64`).
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {}

/// Default working precision.
pub type Real = f64;

/// Map parameter at the default precision.
pub type MapParameter = map::MapParameter<Real>;
/// Orbit record at the default precision.
pub type OrbitRecord = map::OrbitRecord<Real>;
/// Measure model at the default precision.
pub type MeasureModel = measure::MeasureModel<Real>;
/// Threshold level at the default precision.
pub type LevelSpec = measure::LevelSpec<Real>;
/// Block-maxima experiment at the default precision.
pub type MaximaExperiment = evt::MaximaExperiment<Real>;
