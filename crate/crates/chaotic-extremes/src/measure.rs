//! The marginal law `G_a` of a stationary orbit point.
//!
//! At `a = 2` the invariant density is the arcsine law,
//! `G_2(x) = 1/2 + arcsin(x)/pi`, with closed-form quantiles. For general `a`
//! the law is approximated by an empirical model: the sorted states of one
//! long Birkhoff orbit. Both kinds serve the same downstream surface — CDF,
//! generalized-inverse quantile, the normalizing sequence
//! `a_n = (1 - G_a^{-1}(1 - 1/n))^{-1}` (with `b_n = 1`), threshold levels
//! `u_n` with their deep-return exponent `Theta(n)`, and a tail-exponent fit.

use std::io::{self, BufRead, Write};

use rand::Rng;
use thiserror::Error;

use crate::map::MapParameter;
use crate::rng::{substream, uniform01, StreamTag};
use crate::Scalar;

/// Below this sample count an empirical model carries a warning flag.
pub const EMPIRICAL_SAMPLE_FLOOR: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("argument {0} outside [-1, 1]")]
    OutOfDomain(f64),
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("block length must be at least 2")]
    BlockTooShort,
    #[error("empirical model is degenerate: quantile(1 - 1/n) = 1")]
    DegenerateModel,
    #[error("empirical model has no samples")]
    EmptyModel,
    #[error("n = {n} too small for tau = {tau}: Theta = {theta} is below the critical exponent {delta_exp}")]
    LevelTooShallow { n: u64, tau: f64, theta: i64, delta_exp: u32 },
    #[error("tau = {0} must satisfy 0 < tau < n")]
    BadTau(f64),
    #[error("bad tail grid: require 0 < s_min < s_max < 1")]
    BadTailGrid,
    #[error("empirical model has no mass above 1 - s_max; tail fit impossible")]
    InsufficientTail,
    #[error("model file is malformed: {0}")]
    MalformedModel(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<io::Error> for MeasureError {
    fn from(e: io::Error) -> Self {
        MeasureError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    AnalyticA2,
    Empirical,
}

/// The marginal law `G_a`, either in closed form (`a = 2`) or as a sorted
/// Birkhoff sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureModel<F> {
    a: F,
    kind: MeasureKind,
    /// Sorted ascending; empty for the analytic kind.
    samples: Vec<F>,
    burn_in: u64,
    seed: u64,
    /// Empirical model built from fewer than [`EMPIRICAL_SAMPLE_FLOOR`] samples.
    undersampled: bool,
}

/// A threshold record for block length `n`: the level `u_n` with
/// `n (1 - G_a(u_n)) ~ tau`, the deep-return exponent `Theta(n)` and the
/// half-width of the pre-image of the exceedance set around the critical
/// point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSpec<F> {
    pub tau: F,
    pub n: u64,
    pub u_n: F,
    pub theta: u32,
    pub preimage_halfwidth: F,
}

impl<F: Scalar> LevelSpec<F> {
    /// `-1/2 ln((1 - u_n)/a)` before flooring to the integer `theta`.
    pub fn theta_exact(&self) -> F {
        -self.preimage_halfwidth.ln()
    }
}

impl<F: Scalar> MeasureModel<F> {
    /// The closed-form arcsine law of `a = 2`.
    pub fn analytic_a2() -> Self {
        MeasureModel {
            a: F::from_f64(2.0).unwrap(),
            kind: MeasureKind::AnalyticA2,
            samples: Vec::new(),
            burn_in: 0,
            seed: 0,
            undersampled: false,
        }
    }

    /// Empirical model from the sorted states of one seeded Birkhoff orbit:
    /// the start is uniform on `(-1, 1)`, `burn_in` steps are discarded, and
    /// the next `n_samples` states are kept. Deterministic in
    /// `(params, n_samples, burn_in, seed)`.
    pub fn build_empirical(
        params: &MapParameter<F>,
        n_samples: usize,
        burn_in: u64,
        seed: u64,
    ) -> Result<Self, MeasureError> {
        if n_samples == 0 {
            return Err(MeasureError::EmptyModel);
        }
        let mut rng = substream(seed, StreamTag::Measure, 0);
        let u: F = uniform01(&mut rng);
        let mut x = F::from_f64(2.0).unwrap() * u - F::one();
        for _ in 0..burn_in {
            x = params.apply(x);
        }
        let mut samples = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            samples.push(x);
            x = params.apply(x);
        }
        samples.sort_by(|p, q| p.partial_cmp(q).unwrap());
        Ok(MeasureModel {
            a: params.a(),
            kind: MeasureKind::Empirical,
            samples,
            burn_in,
            seed,
            undersampled: n_samples < EMPIRICAL_SAMPLE_FLOOR,
        })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn a(&self) -> F {
        self.a
    }

    pub fn samples(&self) -> &[F] {
        &self.samples
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn undersampled(&self) -> bool {
        self.undersampled
    }

    /// Support of the invariant measure, `[f_a^2(0), f_a(0)]`.
    pub fn support(&self) -> (F, F) {
        let top = F::one();
        (F::one() - self.a, top)
    }

    /// Mean of the law; zero in closed form for `a = 2` (even density).
    pub fn mean(&self) -> F {
        match self.kind {
            MeasureKind::AnalyticA2 => F::zero(),
            MeasureKind::Empirical => {
                let sum = self.samples.iter().fold(F::zero(), |s, &x| s + x);
                sum / F::from_usize(self.samples.len()).unwrap()
            }
        }
    }

    /// `P{X_0 <= x}`.
    pub fn cdf(&self, x: F) -> Result<F, MeasureError> {
        if x.abs() > F::one() {
            return Err(MeasureError::OutOfDomain(x.to_f64().unwrap_or(f64::NAN)));
        }
        match self.kind {
            MeasureKind::AnalyticA2 => {
                Ok(F::from_f64(0.5).unwrap() + x.asin() / F::PI())
            }
            MeasureKind::Empirical => {
                let count = self.samples.partition_point(|&s| s <= x);
                Ok(F::from_usize(count).unwrap() / F::from_usize(self.samples.len()).unwrap())
            }
        }
    }

    /// Generalized inverse `inf{x : G_a(x) >= y}`; for the empirical kind the
    /// result is always an attained sample point.
    pub fn quantile(&self, y: F) -> Result<F, MeasureError> {
        if !(y >= F::zero() && y <= F::one()) {
            return Err(MeasureError::BadProbability(y.to_f64().unwrap_or(f64::NAN)));
        }
        match self.kind {
            MeasureKind::AnalyticA2 => Ok(-(F::PI() * y).cos()),
            MeasureKind::Empirical => {
                if self.samples.is_empty() {
                    return Err(MeasureError::EmptyModel);
                }
                let n = self.samples.len();
                // Smallest index i with (i+1)/n >= y.
                let target = y * F::from_usize(n).unwrap();
                let mut idx = target.ceil().to_usize().unwrap_or(0);
                if F::from_usize(idx).unwrap() < target {
                    idx += 1; // ceil under-rounded
                }
                idx = idx.saturating_sub(1).min(n - 1);
                Ok(self.samples[idx])
            }
        }
    }

    /// Normalizing constant `a_n = (1 - G_a^{-1}(1 - 1/n))^{-1}`.
    pub fn normalizer(&self, n: u64) -> Result<F, MeasureError> {
        if n < 2 {
            return Err(MeasureError::BlockTooShort);
        }
        let q = self.quantile(F::one() - F::from_u64(n).unwrap().recip())?;
        if q >= F::one() {
            return Err(MeasureError::DegenerateModel);
        }
        Ok((F::one() - q).recip())
    }

    /// Shift constant of the normalization `a_n (M_n - b_n)`.
    pub fn shift(&self) -> F {
        F::one()
    }

    /// Level `u_n` with `n (1 - G_a(u_n)) ~ tau`, plus the deep-return
    /// exponent `Theta(n) = floor(-1/2 ln((1 - u_n)/a))`. Rejected when
    /// `Theta` falls below the critical exponent of `params`.
    pub fn level(
        &self,
        n: u64,
        tau: F,
        params: &MapParameter<F>,
    ) -> Result<LevelSpec<F>, MeasureError> {
        if !(tau > F::zero() && tau < F::from_u64(n).unwrap()) {
            return Err(MeasureError::BadTau(tau.to_f64().unwrap_or(f64::NAN)));
        }
        let u_n = self.quantile(F::one() - tau / F::from_u64(n).unwrap())?;
        let ratio = (F::one() - u_n) / self.a;
        if !(ratio > F::zero()) {
            return Err(MeasureError::DegenerateModel);
        }
        let theta_exact = -F::from_f64(0.5).unwrap() * ratio.ln();
        // Theta is the largest integer with ratio <= e^{-2 Theta}; correct the
        // floored log against boundary rounding, with a few ulps of slack for
        // the 1 - u_n round trip.
        let mut theta = theta_exact.floor().to_i64().unwrap_or(i64::MIN);
        if theta > i64::MIN {
            let two = F::from_f64(2.0).unwrap();
            let tol = F::one() + F::from_f64(8.0).unwrap() * F::epsilon();
            while ratio <= (-two * F::from_i64(theta + 1).unwrap()).exp() * tol {
                theta += 1;
            }
            while theta > 0 && ratio > (-two * F::from_i64(theta).unwrap()).exp() * tol {
                theta -= 1;
            }
        }
        if theta < params.delta_exp() as i64 {
            return Err(MeasureError::LevelTooShallow {
                n,
                tau: tau.to_f64().unwrap_or(f64::NAN),
                theta,
                delta_exp: params.delta_exp(),
            });
        }
        Ok(LevelSpec { tau, n, u_n, theta: theta as u32, preimage_halfwidth: ratio.sqrt() })
    }

    /// Least-squares slope of `log(1 - G_a(1 - s))` against `log s` over a
    /// log-spaced grid of `points` values of `s`; near `1/2` when the tail is
    /// of square-root type.
    pub fn tail_exponent(&self, s_min: F, s_max: F, points: usize) -> Result<F, MeasureError> {
        if !(s_min > F::zero() && s_min < s_max && s_max < F::one()) || points < 2 {
            return Err(MeasureError::BadTailGrid);
        }
        let mut xs = Vec::with_capacity(points);
        let mut ys = Vec::with_capacity(points);
        let log_min = s_min.ln();
        let step = (s_max.ln() - log_min) / F::from_usize(points - 1).unwrap();
        for i in 0..points {
            let log_s = log_min + step * F::from_usize(i).unwrap();
            let s = log_s.exp();
            let tail = F::one() - self.cdf(F::one() - s)?;
            if tail <= F::zero() {
                return Err(MeasureError::InsufficientTail);
            }
            xs.push(log_s);
            ys.push(tail.ln());
        }
        Ok(least_squares_slope(&xs, &ys))
    }

    /// Inverse-transform draw `z ~ G_a`.
    pub fn sample_initial<R: Rng>(&self, rng: &mut R) -> F {
        let u: F = uniform01(rng);
        match self.kind {
            MeasureKind::AnalyticA2 => -(F::PI() * u).cos(),
            MeasureKind::Empirical => self.quantile(u).expect("u is a probability"),
        }
    }

    /// Writes the model as a small header line `kind,a,N,burn_in,seed`
    /// followed by one sample per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), MeasureError> {
        let kind = match self.kind {
            MeasureKind::AnalyticA2 => "analytic-a2",
            MeasureKind::Empirical => "empirical",
        };
        writeln!(
            w,
            "{},{},{},{},{}",
            kind,
            self.a.to_f64().unwrap(),
            self.samples.len(),
            self.burn_in,
            self.seed
        )?;
        for s in &self.samples {
            writeln!(w, "{}", s.to_f64().unwrap())?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, MeasureError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| MeasureError::MalformedModel("empty file".into()))??;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 5 {
            return Err(MeasureError::MalformedModel(format!(
                "expected 5 header fields, got {}",
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, MeasureError> {
            s.parse::<f64>()
                .map_err(|e| MeasureError::MalformedModel(format!("bad header number {s:?}: {e}")))
        };
        let a = F::from_f64(parse(fields[1])?).unwrap();
        let n = parse(fields[2])? as usize;
        let burn_in = parse(fields[3])? as u64;
        let seed = parse(fields[4])? as u64;
        match fields[0] {
            "analytic-a2" => Ok(MeasureModel::analytic_a2()),
            "empirical" => {
                let mut samples = Vec::with_capacity(n);
                for line in lines {
                    let line = line?;
                    let t = line.trim();
                    if t.is_empty() {
                        continue;
                    }
                    let v = t.parse::<f64>().map_err(|e| {
                        MeasureError::MalformedModel(format!("bad sample {t:?}: {e}"))
                    })?;
                    samples.push(F::from_f64(v).unwrap());
                }
                if samples.len() != n {
                    return Err(MeasureError::MalformedModel(format!(
                        "header says {n} samples, file has {}",
                        samples.len()
                    )));
                }
                Ok(MeasureModel {
                    a,
                    kind: MeasureKind::Empirical,
                    samples,
                    burn_in,
                    seed,
                    undersampled: n < EMPIRICAL_SAMPLE_FLOOR,
                })
            }
            other => Err(MeasureError::MalformedModel(format!("unknown kind {other:?}"))),
        }
    }

    /// Sup-distance of the model's CDF to the analytic arcsine law, evaluated
    /// at the empirical sample points (both step sides). Only meaningful for
    /// `a = 2`.
    pub fn sup_distance_to_analytic(&self) -> Result<F, MeasureError> {
        if self.samples.is_empty() {
            return Err(MeasureError::EmptyModel);
        }
        let analytic = MeasureModel::<F>::analytic_a2();
        let n = F::from_usize(self.samples.len()).unwrap();
        let mut sup = F::zero();
        for (i, &x) in self.samples.iter().enumerate() {
            let g = analytic.cdf(x.max(-F::one()).min(F::one()))?;
            let hi = (F::from_usize(i + 1).unwrap() / n - g).abs();
            let lo = (g - F::from_usize(i).unwrap() / n).abs();
            sup = sup.max(hi).max(lo);
        }
        Ok(sup)
    }
}

pub(crate) fn least_squares_slope<F: Scalar>(xs: &[F], ys: &[F]) -> F {
    let n = F::from_usize(xs.len()).unwrap();
    let mx = xs.iter().fold(F::zero(), |s, &x| s + x) / n;
    let my = ys.iter().fold(F::zero(), |s, &y| s + y) / n;
    let mut num = F::zero();
    let mut den = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        num = num + (x - mx) * (y - my);
        den = den + (x - mx) * (x - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map;

    fn a2() -> MapParameter<f64> {
        MapParameter::new(2.0).unwrap()
    }

    #[test]
    fn analytic_cdf_values() {
        let m = MeasureModel::<f64>::analytic_a2();
        assert_eq!(m.cdf(0.0).unwrap(), 0.5);
        assert_eq!(m.cdf(1.0).unwrap(), 1.0);
        let sqrt2_2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.cdf(sqrt2_2).unwrap() - 0.75).abs() < 1e-15);
        assert!(m.cdf(1.5).is_err());
    }

    #[test]
    fn analytic_quantile_values() {
        let m = MeasureModel::<f64>::analytic_a2();
        assert!(m.quantile(0.5).unwrap().abs() < 1e-16);
        assert!((m.quantile(0.75).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(m.quantile(1.5).is_err());
    }

    #[test]
    fn normalizer_closed_form() {
        let m = MeasureModel::<f64>::analytic_a2();
        assert!((m.normalizer(2).unwrap() - 1.0).abs() < 1e-15);
        let expected = 1.0 / (1.0 - std::f64::consts::FRAC_1_SQRT_2);
        assert!((m.normalizer(4).unwrap() - expected).abs() < 1e-12);
        assert_eq!(m.shift(), 1.0);
        assert!(m.normalizer(1).is_err());

        // a_n ~ 2 n^2 / pi^2 for large n.
        let n = 1_000_000u64;
        let asymptotic = 2.0 * (n as f64).powi(2) / std::f64::consts::PI.powi(2);
        let ratio = m.normalizer(n).unwrap() / asymptotic;
        assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn empirical_is_deterministic_and_supported() {
        let p = a2();
        let m1 = MeasureModel::build_empirical(&p, 10_000, 1000, 42).unwrap();
        let m2 = MeasureModel::build_empirical(&p, 10_000, 1000, 42).unwrap();
        assert_eq!(m1, m2);

        let p199 = MapParameter::new(1.99).unwrap();
        let m = MeasureModel::build_empirical(&p199, 100_000, 1000, 7).unwrap();
        let (lo, hi) = m.support();
        assert_eq!((lo, hi), (1.0 - 1.99, 1.0));
        assert!(m.samples().iter().all(|&x| x >= lo && x <= hi));
    }

    #[test]
    fn empirical_warning_flag() {
        let p = a2();
        let m = MeasureModel::build_empirical(&p, 2000, 100, 1).unwrap();
        assert!(m.undersampled());
        let m = MeasureModel::build_empirical(&p, 20_000, 100, 1).unwrap();
        assert!(!m.undersampled());
    }

    #[test]
    fn empirical_quantile_is_generalized_inverse() {
        let p = a2();
        let m = MeasureModel::build_empirical(&p, 5000, 100, 3).unwrap();
        for &y in &[0.0, 1e-6, 0.1, 0.5, 0.9, 1.0] {
            let q = m.quantile(y).unwrap();
            assert!(m.cdf(q).unwrap() >= y);
            // q is an attained sample point.
            assert!(m.samples().binary_search_by(|s| s.partial_cmp(&q).unwrap()).is_ok());
        }
    }

    #[test]
    fn level_examples() {
        let p = a2();
        let m = MeasureModel::<f64>::analytic_a2();
        let spec = m.level(10_000, 1.0, &p).unwrap();
        let expected_u = (std::f64::consts::PI / 1e4).cos();
        assert!((spec.u_n - expected_u).abs() < 1e-14);
        assert_eq!(spec.theta, 8);

        // An empirical model whose top quantile forces (1 - u_n)/2 onto
        // e^{-20} gives Theta = 10. The level 1 - 2 e^{-20} itself is not
        // representable; take the nearest double whose exact ratio does not
        // exceed e^{-20}.
        let top = (1.0 - 2.0 * (-20.0_f64).exp()).next_up();
        assert!((1.0 - top) / 2.0 <= (-20.0_f64).exp());
        let file = format!("empirical,2,4,0,0\n-0.5\n0\n0.5\n{top}\n");
        let forced = MeasureModel::<f64>::read_from(file.as_bytes()).unwrap();
        let spec = forced.level(8, 1.0, &p).unwrap();
        assert_eq!(spec.u_n, top);
        assert_eq!(spec.theta, 10);

        // n too small for tau: Theta below delta_exp.
        assert!(matches!(
            m.level(10, 1.0, &p),
            Err(MeasureError::LevelTooShallow { .. })
        ));
    }

    #[test]
    fn exceedance_equals_preimage_membership() {
        // X_j > u_n iff |X_{j-1}| < sqrt((1 - u_n)/a), exactly.
        let p = a2();
        let m = MeasureModel::<f64>::analytic_a2();
        let spec = m.level(5000, 2.0, &p).unwrap();
        let orbit = map::iterate(&p, 0.8137, 20_000).unwrap();
        let states = orbit.states();
        for j in 1..states.len() {
            let exceeds = states[j] > spec.u_n;
            let inside = states[j - 1].abs() < spec.preimage_halfwidth;
            assert_eq!(exceeds, inside, "j={j}");
        }
    }

    #[test]
    fn tail_exponent_analytic() {
        let m = MeasureModel::<f64>::analytic_a2();
        let slope = m.tail_exponent(1e-8, 1e-2, 20).unwrap();
        assert!((slope - 0.5).abs() < 0.005, "slope {slope}");

        // 1 - G_2(1 - s) = arccos(1 - s)/pi ~ sqrt(2 s)/pi.
        let s = 1e-6_f64;
        let tail = 1.0 - m.cdf(1.0 - s).unwrap();
        assert!((tail - (2.0 * s).sqrt() / std::f64::consts::PI).abs() < 1e-7);
        assert!((tail - 4.502e-4).abs() < 1e-6);

        // Slope invariant under rescaling the grid by a constant factor.
        let slope2 = m.tail_exponent(3e-8, 3e-2, 20).unwrap();
        assert!((slope - slope2).abs() < 0.01);
    }

    #[test]
    fn model_roundtrip_through_file_format() {
        let p = a2();
        let m = MeasureModel::build_empirical(&p, 500, 50, 9).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let back = MeasureModel::<f64>::read_from(buf.as_slice()).unwrap();
        assert_eq!(m, back);

        let analytic = MeasureModel::<f64>::analytic_a2();
        let mut buf = Vec::new();
        analytic.write_to(&mut buf).unwrap();
        let back = MeasureModel::<f64>::read_from(buf.as_slice()).unwrap();
        assert_eq!(analytic, back);
    }
}
