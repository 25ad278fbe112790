//! Hellinger and total-variation distance estimation between two
//! posteriors that reweight one common set of prior draws, plus the
//! square-integrable quantity-of-interest bound they control.
//!
//! Convention: `hellinger` returns `1 - BC` where `BC` is the
//! Bhattacharyya coefficient. This is the squared Hellinger distance of
//! other conventions; `MetricEstimate::root` exposes the square-rooted
//! value for reporting. Both metrics take values in [0, 1] and satisfy the
//! sandwich `d_H <= TV <= sqrt(d_H (2 - d_H))`.

use crate::error::{Error, Result};
use crate::posterior::WeightedPosterior;
use crate::series_prior::FunctionDraw;

/// A Monte Carlo metric estimate. `clamp_magnitude` records how far the
/// raw estimator fell outside [0, 1] before clamping; healthy runs keep it
/// below 1e-6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub value: f64,
    pub std_error: f64,
    pub sample_count: usize,
    pub clamp_magnitude: f64,
}

impl MetricEstimate {
    /// The square-rooted value (the other common Hellinger convention).
    pub fn root(&self) -> f64 {
        self.value.sqrt()
    }
}

fn clamp_unit(raw: f64) -> (f64, f64) {
    if raw < 0.0 {
        (0.0, -raw)
    } else if raw > 1.0 {
        (1.0, raw - 1.0)
    } else {
        (raw, 0.0)
    }
}

fn shared_reference(
    post_mu: &WeightedPosterior,
    post_nu: &WeightedPosterior,
) -> Result<Vec<(f64, f64)>> {
    if post_mu.sample_count() != post_nu.sample_count() {
        return Err(Error::ReferenceMismatch);
    }
    if post_mu
        .draws
        .iter()
        .zip(&post_nu.draws)
        .any(|(a, b): (&FunctionDraw, &FunctionDraw)| a != b)
    {
        return Err(Error::ReferenceMismatch);
    }
    let m = post_mu.sample_count() as f64;
    Ok(post_mu
        .weights
        .iter()
        .zip(&post_nu.weights)
        .map(|(wa, wb)| (m * wa, m * wb))
        .collect())
}

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Hellinger distance `1 - sum_i sqrt(w_mu_i w_nu_i)` over the shared
/// prior reference sample, with a delta-method standard error accounting
/// for the two estimated normalising constants.
pub fn hellinger(
    post_mu: &WeightedPosterior,
    post_nu: &WeightedPosterior,
) -> Result<MetricEstimate> {
    let ab = shared_reference(post_mu, post_nu)?;
    let m = ab.len() as f64;
    let rho = ab.iter().map(|(a, b)| (a * b).sqrt()).sum::<f64>() / m;
    let influence: Vec<f64> = ab
        .iter()
        .map(|(a, b)| (a * b).sqrt() - rho * ((a + b) / 2.0))
        .collect();
    let std_error = sample_sd(&influence) / m.sqrt();
    let (value, clamp_magnitude) = clamp_unit(1.0 - rho);
    Ok(MetricEstimate {
        value,
        std_error,
        sample_count: ab.len(),
        clamp_magnitude,
    })
}

/// Total variation distance `(1/2) E_r |dmu/dr - dnu/dr|` over the shared
/// prior reference sample.
pub fn total_variation(
    post_mu: &WeightedPosterior,
    post_nu: &WeightedPosterior,
) -> Result<MetricEstimate> {
    let ab = shared_reference(post_mu, post_nu)?;
    let m = ab.len() as f64;
    let raw = ab.iter().map(|(a, b)| (a - b).abs()).sum::<f64>() / (2.0 * m);
    let c_f = ab.iter().map(|(a, b)| (a - b).signum() * a).sum::<f64>() / (2.0 * m);
    let c_g = ab.iter().map(|(a, b)| (a - b).signum() * b).sum::<f64>() / (2.0 * m);
    let influence: Vec<f64> = ab
        .iter()
        .map(|(a, b)| {
            let t1 = c_g * (b - 1.0);
            let t2 = c_f * (a - 1.0);
            (a - b).abs() / 2.0 + (t1 - t2)
        })
        .collect();
    let std_error = sample_sd(&influence) / m.sqrt();
    let (value, clamp_magnitude) = clamp_unit(raw);
    Ok(MetricEstimate {
        value,
        std_error,
        sample_count: ab.len(),
        clamp_magnitude,
    })
}

/// Outcome of checking the quantity-of-interest bound
/// `|E_mu f - E_nu f| <= 2 sqrt(E_mu f^2 + E_nu f^2) sqrt(d_H)`,
/// allowing `slack` (three combined standard errors) for the Monte Carlo
/// estimates on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QoiBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Verifies the Hellinger control of a square-integrable quantity of
/// interest on two posteriors over the same reference sample.
pub fn qoi_bound_check(
    f: impl Fn(&FunctionDraw) -> f64,
    post_mu: &WeightedPosterior,
    post_nu: &WeightedPosterior,
) -> Result<QoiBoundCheck> {
    let d_h = hellinger(post_mu, post_nu)?;
    let values: Vec<f64> = post_mu.draws.iter().map(&f).collect();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::ParameterDomain(format!(
            "quantity of interest produced {bad}"
        )));
    }
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    let (mean_mu, se_mu) = post_mu.mean_and_se(&values)?;
    let (mean_nu, se_nu) = post_nu.mean_and_se(&values)?;
    let (s_mu, se_s_mu) = post_mu.mean_and_se(&squares)?;
    let (s_nu, se_s_nu) = post_nu.mean_and_se(&squares)?;
    let lhs = (mean_mu - mean_nu).abs();
    let s_total = (s_mu + s_nu).max(0.0);
    let rhs = 2.0 * s_total.sqrt() * d_h.value.sqrt();
    let se_lhs = (se_mu * se_mu + se_nu * se_nu).sqrt();
    let se_rhs_dh = 2.0 * s_total.sqrt() * ((d_h.value + d_h.std_error).sqrt() - d_h.value.sqrt());
    let se_rhs_s = if s_total > 0.0 {
        (d_h.value / s_total).sqrt() * (se_s_mu + se_s_nu)
    } else {
        0.0
    };
    let slack = 3.0 * (se_lhs + se_rhs_dh + se_rhs_s);
    Ok(QoiBoundCheck {
        lhs,
        rhs,
        slack,
        holds: lhs <= rhs + slack,
    })
}
