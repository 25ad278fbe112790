//! Shared statistical utilities: Kolmogorov-Smirnov tests, empirical
//! quantiles, and running-mean helpers used across the crate.

use crate::error::{Error, Result};

/// One-sample Kolmogorov-Smirnov statistic of `samples` against the CDF `cdf`.
///
/// Returns `sup_x |F_n(x) - F(x)|` computed at the sample points, which is
/// where the supremum of the difference against a continuous CDF is attained.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("ks_statistic needs samples".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample"));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let hi = ((i + 1) as f64 / n - f).abs();
        let lo = (i as f64 / n - f).abs();
        d = d.max(hi).max(lo);
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov test. Returns `(statistic, p_value)` where
/// the p-value uses the asymptotic Kolmogorov distribution at
/// `sqrt(m n / (m + n)) * D`.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyInput("ks_two_sample needs two samples".into()));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).expect("non-finite sample"));
    b.sort_by(|p, q| p.partial_cmp(q).expect("non-finite sample"));
    let (m, n) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < m && j < n {
        let x = a[i].min(b[j]);
        while i < m && a[i] <= x {
            i += 1;
        }
        while j < n && b[j] <= x {
            j += 1;
        }
        let fa = i as f64 / m as f64;
        let fb = j as f64 / n as f64;
        d = d.max((fa - fb).abs());
    }
    let en = ((m as f64 * n as f64) / (m as f64 + n as f64)).sqrt();
    Ok((d, kolmogorov_sf(en * d)))
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * x * x).exp();
        if term < 1e-18 {
            break;
        }
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Empirical quantile with linear interpolation between order statistics:
/// at rank `h = (n - 1) q`, interpolate between `floor(h)` and `ceil(h)`.
pub fn quantile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("quantile needs samples".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::ParameterDomain(format!(
            "quantile level {q} outside [0, 1]"
        )));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample"));
    Ok(quantile_sorted(&xs, q))
}

/// Same as [`quantile`] for data that is already sorted ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = lo.min(n - 2) + 1;
    let w = h - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

/// Weighted quantile: smallest value whose cumulative normalized weight
/// reaches `q`. Weights must be nonnegative with a positive sum.
pub fn weighted_quantile(values: &[f64], weights: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("weighted_quantile needs values".into()));
    }
    if values.len() != weights.len() {
        return Err(Error::Shape(format!(
            "{} values vs {} weights",
            values.len(),
            weights.len()
        )));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::ParameterDomain(format!(
            "quantile level {q} outside [0, 1]"
        )));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("non-finite value"));
    let total: f64 = weights.iter().sum();
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(total > 0.0) {
        return Err(Error::ParameterDomain(
            "weighted_quantile needs a positive weight sum".into(),
        ));
    }
    let mut cum = 0.0;
    for &i in &idx {
        cum += weights[i] / total;
        if cum >= q {
            return Ok(values[i]);
        }
    }
    Ok(values[*idx.last().expect("nonempty")])
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}
