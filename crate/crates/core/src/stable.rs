//! Alpha-stable distributions S(alpha, beta, gamma, delta).
//!
//! Parameterization: for `alpha != 1` the characteristic function is
//!
//! ```text
//! E exp(itX) = exp(i delta t - gamma^alpha |t|^alpha (1 - i beta sign(t) tan(pi alpha / 2)))
//! ```
//!
//! and for `alpha == 1` it is
//!
//! ```text
//! E exp(itX) = exp(i delta t - gamma |t| (1 + i beta (2/pi) sign(t) ln |t|))
//! ```
//!
//! so `alpha = 2` is Gaussian with variance `2 gamma^2`, `alpha = 1, beta = 0`
//! is Cauchy with scale `gamma`, and `alpha = 1/2, beta = 1` is the Levy
//! distribution with scale `gamma`. Sampling uses the Chambers-Mallows-Stuck
//! transformation of a uniform angle and an exponential variate.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::stats::ks_two_sample;

/// Parameters of a stable law: stability index `alpha`, skewness `beta`,
/// scale `gamma`, location `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Outcome of the n-fold convolution stability check: summing `n_fold`
/// independent copies matches `n_fold^(1/alpha) X + shift_d` in distribution,
/// tested by a two-sample KS test after inverting that map.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub n_fold: usize,
    pub shift_d: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        if !alpha.is_finite() || !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::ParameterDomain(format!(
                "stability index alpha = {alpha} outside (0, 2]"
            )));
        }
        if !beta.is_finite() || !(-1.0..=1.0).contains(&beta) {
            return Err(Error::ParameterDomain(format!(
                "skewness beta = {beta} outside [-1, 1]"
            )));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "scale gamma = {gamma} must be nonnegative"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "location delta = {delta} must be finite"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    /// One draw using the supplied generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.gamma == 0.0 {
            return self.delta;
        }
        let theta = PI * (rng.gen::<f64>() - 0.5);
        let w = -(1.0 - rng.gen::<f64>()).ln();
        let x = standard_stable(self.alpha, self.beta, theta, w);
        if self.alpha == 1.0 {
            self.gamma * x + self.delta + self.beta * (2.0 / PI) * self.gamma * self.gamma.ln()
        } else {
            self.gamma * x + self.delta
        }
    }

    /// `count` independent draws from the deterministic stream of `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::ParameterDomain("sample count must be >= 1".into()));
        }
        let mut rng = substream(seed, 0);
        Ok((0..count).map(|_| self.sample_with(&mut rng)).collect())
    }

    /// Closed-form CDF where one exists: Gaussian (`alpha = 2`), Cauchy
    /// (`alpha = 1, beta = 0`), Levy (`alpha = 1/2, beta = 1`). Returns
    /// `None` for every other parameter combination.
    pub fn cdf(&self, x: f64) -> Result<Option<f64>> {
        if !x.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "CDF argument {x} must be finite"
            )));
        }
        if self.gamma == 0.0 {
            return Ok(None);
        }
        if self.alpha == 2.0 {
            return Ok(Some(0.5 * erfc(-(x - self.delta) / (2.0 * self.gamma))));
        }
        if self.alpha == 1.0 && self.beta == 0.0 {
            return Ok(Some(0.5 + ((x - self.delta) / self.gamma).atan() / PI));
        }
        if self.alpha == 0.5 && self.beta == 1.0 {
            if x <= self.delta {
                return Ok(Some(0.0));
            }
            return Ok(Some(erfc((self.gamma / (2.0 * (x - self.delta))).sqrt())));
        }
        Ok(None)
    }

    /// Whether `E |X|^p` is finite: true iff `p < alpha`, or `alpha = 2`
    /// (all moments), or `gamma = 0` (point mass).
    pub fn moment_finite(&self, p: f64) -> Result<bool> {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "moment order p = {p} must be positive"
            )));
        }
        Ok(self.gamma == 0.0 || self.alpha == 2.0 || p < self.alpha)
    }

    /// Monte Carlo estimate of `E |X|^p`. Rejects orders whose moment
    /// diverges rather than returning a meaningless average.
    pub fn fractional_moment(&self, p: f64, count: usize, seed: u64) -> Result<f64> {
        if !self.moment_finite(p)? {
            return Err(Error::DivergingMoment {
                order: p,
                alpha: self.alpha,
            });
        }
        let samples = self.sample(count, seed)?;
        Ok(samples.iter().map(|x| x.abs().powf(p)).sum::<f64>() / count as f64)
    }

    /// Convolution stability check for symmetric laws (`beta = 0`): draws
    /// `count` sums of `n_fold` copies, inverts the closed-form rescaling
    /// `sum = n^(1/alpha) X + shift_d`, and KS-tests against fresh draws.
    pub fn stability_check(
        &self,
        n_fold: usize,
        count: usize,
        seed: u64,
    ) -> Result<StabilityReport> {
        if n_fold < 2 {
            return Err(Error::ParameterDomain("n_fold must be >= 2".into()));
        }
        if count < 1000 {
            return Err(Error::ParameterDomain(
                "stability check needs count >= 1000".into(),
            ));
        }
        if self.beta != 0.0 {
            return Err(Error::Unsupported(
                "stability check covers symmetric laws (beta = 0) only".into(),
            ));
        }
        let n = n_fold as f64;
        let scale = n.powf(1.0 / self.alpha);
        let shift_d = (n - scale) * self.delta;

        let mut sum_rng = substream(seed, 0);
        let rescaled: Vec<f64> = (0..count)
            .map(|_| {
                let s: f64 = (0..n_fold).map(|_| self.sample_with(&mut sum_rng)).sum();
                (s - shift_d) / scale
            })
            .collect();
        let mut fresh_rng = substream(seed, 1);
        let fresh: Vec<f64> = (0..count)
            .map(|_| self.sample_with(&mut fresh_rng))
            .collect();

        let (ks_statistic, ks_p_value) = ks_two_sample(&rescaled, &fresh)?;
        Ok(StabilityReport {
            n_fold,
            shift_d,
            ks_statistic,
            ks_p_value,
        })
    }
}

/// Standard draw (gamma = 1, delta = 0) from the angle `theta` in
/// (-pi/2, pi/2) and the exponential variate `w`.
fn standard_stable(alpha: f64, beta: f64, theta: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        let a = FRAC_PI_2 + beta * theta;
        (2.0 / PI) * (a * theta.tan() - beta * ((FRAC_PI_2 * w * theta.cos()) / a).ln())
    } else {
        let tan_half = (FRAC_PI_2 * alpha).tan();
        let b = (beta * tan_half).atan() / alpha;
        let s = (1.0 + beta * beta * tan_half * tan_half).powf(1.0 / (2.0 * alpha));
        let c = theta.cos();
        s * (alpha * (theta + b)).sin() / c.powf(1.0 / alpha)
            * ((theta - alpha * (theta + b)).cos() / w).powf((1.0 - alpha) / alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_statistic;
    use approx::assert_relative_eq;

    /// Composite Simpson rule with `panels` even subintervals.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        assert!(panels.is_multiple_of(2));
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    const KS_COUNT: usize = 100_000;
    const KS_TOL: f64 = 0.006;

    #[test]
    fn gaussian_sampler_matches_closed_form_cdf() {
        let p = StableParams::new(2.0, 0.0, 1.0, 0.0).unwrap();
        let xs = p.sample(KS_COUNT, 20_01).unwrap();
        let d = ks_statistic(&xs, |x| p.cdf(x).unwrap().unwrap()).unwrap();
        assert!(d < KS_TOL, "KS = {d}");
    }

    #[test]
    fn cauchy_sampler_matches_closed_form_cdf() {
        let p = StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        let xs = p.sample(KS_COUNT, 20_02).unwrap();
        let d = ks_statistic(&xs, |x| p.cdf(x).unwrap().unwrap()).unwrap();
        assert!(d < KS_TOL, "KS = {d}");
    }

    #[test]
    fn levy_sampler_matches_closed_form_cdf() {
        let p = StableParams::new(0.5, 1.0, 1.0, 0.0).unwrap();
        let xs = p.sample(KS_COUNT, 20_03).unwrap();
        let d = ks_statistic(&xs, |x| p.cdf(x).unwrap().unwrap()).unwrap();
        assert!(d < KS_TOL, "KS = {d}");
    }

    #[test]
    fn shifted_scaled_laws_match_closed_form_cdfs() {
        for (p, seed) in [
            (StableParams::new(2.0, 0.0, 0.7, -1.2).unwrap(), 31u64),
            (StableParams::new(1.0, 0.0, 2.5, 4.0).unwrap(), 32),
            (StableParams::new(0.5, 1.0, 1.5, -0.5).unwrap(), 33),
        ] {
            let xs = p.sample(KS_COUNT, seed).unwrap();
            let d = ks_statistic(&xs, |x| p.cdf(x).unwrap().unwrap()).unwrap();
            assert!(d < KS_TOL, "KS = {d} for {p:?}");
        }
    }

    #[test]
    fn levy_cdf_agrees_with_density_quadrature() {
        // Levy(1, 0) density: (2 pi)^(-1/2) t^(-3/2) exp(-1/(2t)) on t > 0.
        let density = |t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                (2.0 * PI).sqrt().recip() * t.powf(-1.5) * (-0.5 / t).exp()
            }
        };
        let by_quadrature = simpson(density, 0.0, 1.0, 40_000);
        let p = StableParams::new(0.5, 1.0, 1.0, 0.0).unwrap();
        let closed = p.cdf(1.0).unwrap().unwrap();
        assert_relative_eq!(closed, by_quadrature, epsilon = 1e-8);
        assert_relative_eq!(closed, 0.3173105078629141, epsilon = 1e-9);
    }

    #[test]
    fn point_mass_samples_are_constant() {
        let p = StableParams::new(1.7, 0.3, 0.0, 3.5).unwrap();
        let xs = p.sample(10, 7).unwrap();
        assert!(xs.iter().all(|&x| x == 3.5));
        assert_eq!(p.cdf(0.0).unwrap(), None);
    }

    #[test]
    fn cauchy_half_moment_matches_quadrature_constant() {
        // E |X|^(1/2) for standard Cauchy: (2/pi) int_0^inf sqrt(x)/(1+x^2) dx.
        // Substituting x = t^2 on [0,1] removes the root kink; the far tail
        // integrates analytically as int x^(-3/2) (1 - x^(-2) + ...) dx.
        let head = simpson(|t| 2.0 * t * t / (1.0 + t.powi(4)), 0.0, 1.0, 20_000);
        let mid = simpson(|x| x.sqrt() / (1.0 + x * x), 1.0, 1e4, 400_000);
        let x0: f64 = 1e4;
        let tail = 2.0 * x0.powf(-0.5) - 0.4 * x0.powf(-2.5);
        let by_quadrature = (2.0 / PI) * (head + mid + tail);
        assert_relative_eq!(by_quadrature, 2f64.sqrt(), epsilon = 1e-7);

        let p = StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        let est = p.fractional_moment(0.5, 1_000_000, 40).unwrap();
        assert!(
            (est - 2f64.sqrt()).abs() / 2f64.sqrt() < 0.02,
            "estimate {est}"
        );
    }

    #[test]
    fn gaussian_second_moment_is_twice_gamma_squared() {
        let p = StableParams::new(2.0, 0.0, 1.0, 0.0).unwrap();
        let est = p.fractional_moment(2.0, 1_000_000, 41).unwrap();
        assert!((est - 2.0).abs() / 2.0 < 0.02, "estimate {est}");
    }

    #[test]
    fn moment_finiteness_boundary() {
        let cauchy = StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(cauchy.moment_finite(0.99).unwrap());
        assert!(!cauchy.moment_finite(1.0).unwrap());
        assert!(!cauchy.moment_finite(1.5).unwrap());

        let gauss = StableParams::new(2.0, 0.0, 1.0, 0.0).unwrap();
        assert!(gauss.moment_finite(7.0).unwrap());

        let point = StableParams::new(0.3, 0.0, 0.0, 1.0).unwrap();
        assert!(point.moment_finite(10.0).unwrap());

        assert!(cauchy.moment_finite(0.0).is_err());
        assert!(matches!(
            cauchy.fractional_moment(1.0, 100, 1),
            Err(Error::DivergingMoment { .. })
        ));
    }

    #[test]
    fn stability_shift_matches_characteristic_function_algebra() {
        // For beta = 0 the n-fold sum is S(alpha, 0, n^(1/alpha) gamma, n delta),
        // so sum = n^(1/alpha) X + d requires d = (n - n^(1/alpha)) delta.
        for alpha in [0.7, 1.0, 1.3, 2.0] {
            let p = StableParams::new(alpha, 0.0, 1.0, 1.0).unwrap();
            let rep = p.stability_check(2, 1000, 5).unwrap();
            assert_relative_eq!(rep.shift_d, 2.0 - 2f64.powf(1.0 / alpha), epsilon = 1e-15);
        }
    }

    #[test]
    fn stability_check_accepts_true_stable_laws() {
        let cauchy = StableParams::new(1.0, 0.0, 1.0, 0.5).unwrap();
        let rep = cauchy.stability_check(3, 20_000, 60).unwrap();
        assert!(rep.ks_p_value > 0.01, "p = {}", rep.ks_p_value);

        let gauss = StableParams::new(2.0, 0.0, 1.0, -0.3).unwrap();
        let rep = gauss.stability_check(5, 20_000, 61).unwrap();
        assert!(rep.ks_p_value > 0.01, "p = {}", rep.ks_p_value);
    }

    #[test]
    fn stability_check_rejects_skewed_laws_and_small_counts() {
        let p = StableParams::new(1.5, 0.5, 1.0, 0.0).unwrap();
        assert!(matches!(
            p.stability_check(2, 2000, 1),
            Err(Error::Unsupported(_))
        ));
        let q = StableParams::new(1.5, 0.0, 1.0, 0.0).unwrap();
        assert!(q.stability_check(2, 999, 1).is_err());
        assert!(q.stability_check(1, 2000, 1).is_err());
    }

    #[test]
    fn samples_are_scale_location_equivariant_under_shared_seed() {
        for (alpha, beta) in [(1.5, 0.3), (0.8, -0.6), (1.0, 0.0), (2.0, 0.0)] {
            let base = StableParams::new(alpha, beta, 1.0, 0.0).unwrap();
            let moved = StableParams::new(alpha, beta, 2.0, -1.0).unwrap();
            let xs = base.sample(100, 99).unwrap();
            let ys = moved.sample(100, 99).unwrap();
            for (x, y) in xs.iter().zip(&ys) {
                assert_eq!(2.0 * x - 1.0, *y);
            }
        }
    }

    #[test]
    fn identical_seeds_reproduce_and_distinct_seeds_differ() {
        let p = StableParams::new(1.2, 0.1, 1.0, 0.0).unwrap();
        assert_eq!(p.sample(50, 123).unwrap(), p.sample(50, 123).unwrap());
        assert_ne!(p.sample(50, 123).unwrap(), p.sample(50, 124).unwrap());
    }

    #[test]
    fn parameter_validation_rejects_bad_values() {
        assert!(StableParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(2.1, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.0, 1.5, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.0, 0.0, -1.0, 0.0).is_err());
        assert!(StableParams::new(1.0, 0.0, 1.0, f64::NAN).is_err());
        let p = StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(p.sample(0, 1).is_err());
        assert!(p.cdf(f64::INFINITY).is_err());
    }
}
