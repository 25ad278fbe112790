//! Forward models, misfit potentials with declared envelope bounds, and
//! posterior construction by self-normalized reweighting of prior draws.
//!
//! The posterior has density `exp(-Phi(u; y)) / Z(y)` with respect to the
//! prior, so a weighted prior sample represents it directly: weights
//! proportional to `exp(-Phi)`, normalized with the log-sum-exp shift.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::series_prior::FunctionDraw;

/// Dense linear observation operator from grid functions to data vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardModel {
    pub matrix: DMatrix<f64>,
    pub description: String,
}

impl ForwardModel {
    pub fn from_row_major(
        rows: usize,
        cols: usize,
        entries: &[f64],
        description: &str,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("forward model must be nonempty".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} operator",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "operator entry {bad} is not finite"
            )));
        }
        Ok(Self {
            matrix: DMatrix::from_row_slice(rows, cols, entries),
            description: description.to_string(),
        })
    }

    pub fn observation_count(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn grid_size(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.grid_size() {
            return Err(Error::Shape(format!(
                "input length {} does not match grid size {}",
                u.len(),
                self.grid_size()
            )));
        }
        Ok((&self.matrix * DVector::from_column_slice(u))
            .iter()
            .copied()
            .collect())
    }
}

/// Centred Gaussian observational noise with SPD covariance.
pub struct NoiseModel {
    covariance: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    min_eigenvalue: f64,
}

impl NoiseModel {
    pub fn new(covariance: DMatrix<f64>) -> Result<Self> {
        if covariance.nrows() != covariance.ncols() || covariance.nrows() == 0 {
            return Err(Error::Shape(
                "covariance must be square and nonempty".into(),
            ));
        }
        let n = covariance.nrows();
        for i in 0..n {
            for j in 0..n {
                let a = covariance[(i, j)];
                if !a.is_finite() {
                    return Err(Error::ParameterDomain(format!(
                        "covariance entry {a} is not finite"
                    )));
                }
                if (a - covariance[(j, i)]).abs() > 1e-12 {
                    return Err(Error::ParameterDomain(format!(
                        "covariance asymmetric at ({i}, {j}): {a} vs {}",
                        covariance[(j, i)]
                    )));
                }
            }
        }
        let chol = Cholesky::new(covariance.clone()).ok_or_else(|| {
            Error::Factorization("noise covariance is not positive definite".into())
        })?;
        let min_eigenvalue = covariance
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eigenvalue <= 0.0 {
            return Err(Error::Factorization(format!(
                "covariance minimum eigenvalue {min_eigenvalue} is not positive"
            )));
        }
        Ok(Self {
            covariance,
            chol,
            min_eigenvalue,
        })
    }

    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Shape(format!(
                "{} entries for a {n}x{n} covariance",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn isotropic(n: usize, variance: f64) -> Result<Self> {
        if !variance.is_finite() || variance <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "noise variance {variance} must be positive"
            )));
        }
        Self::new(DMatrix::from_diagonal_element(n, n, variance))
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }

    /// Maps a residual `r` to `L^{-1} r` where `Gamma = L L^T`, so that
    /// `|L^{-1} r|^2 = r^T Gamma^{-1} r`.
    pub fn whiten(&self, residual: &[f64]) -> Result<Vec<f64>> {
        if residual.len() != self.dim() {
            return Err(Error::Shape(format!(
                "residual length {} does not match noise dimension {}",
                residual.len(),
                self.dim()
            )));
        }
        let r = DVector::from_column_slice(residual);
        let z = self
            .chol
            .l()
            .solve_lower_triangular(&r)
            .ok_or_else(|| Error::Factorization("triangular solve failed".into()))?;
        Ok(z.iter().copied().collect())
    }

    /// Spectral norm of `Gamma^{-1/2}`, i.e. `1 / sqrt(lambda_min(Gamma))`.
    pub fn inv_sqrt_spectral_norm(&self) -> f64 {
        1.0 / self.min_eigenvalue.sqrt()
    }
}

impl std::fmt::Debug for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseModel")
            .field("dim", &self.dim())
            .field("min_eigenvalue", &self.min_eigenvalue)
            .finish()
    }
}

type EvalFn = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type BoundFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A misfit potential `Phi(u; y)` together with its declared envelope
/// bounds: `Phi(u; y) >= bound_m1(r, |u|)` whenever `|y| < r`, and
/// `|Phi(u; y) - Phi(u; y')| <= exp(bound_m2(r, |u|)) |y - y'|` whenever
/// both data vectors lie inside the radius.
pub struct Potential {
    evaluate: EvalFn,
    bound_m1: BoundFn,
    bound_m2: BoundFn,
}

impl Potential {
    pub fn new(evaluate: EvalFn, bound_m1: BoundFn, bound_m2: BoundFn) -> Self {
        Self {
            evaluate,
            bound_m1,
            bound_m2,
        }
    }

    /// The zero potential: posterior equals prior.
    pub fn zero() -> Self {
        Self {
            evaluate: Box::new(|_, _| 0.0),
            bound_m1: Box::new(|_, _| 0.0),
            bound_m2: Box::new(|_, _| f64::NEG_INFINITY),
        }
    }

    pub fn evaluate(&self, u: &[f64], y: &[f64]) -> f64 {
        (self.evaluate)(u, y)
    }

    pub fn bound_m1(&self, radius: f64, norm: f64) -> f64 {
        (self.bound_m1)(radius, norm)
    }

    pub fn bound_m2(&self, radius: f64, norm: f64) -> f64 {
        (self.bound_m2)(radius, norm)
    }
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Potential")
    }
}

/// Weighted least squares misfit `Phi(u; y) = |L^{-1}(Gu - y)|^2 / 2`.
///
/// The declared bounds: `Phi >= 0`, so `bound_m1` is identically zero. For
/// the data-Lipschitz envelope, with `kappa = |Gamma^{-1/2}|` and `R` an
/// upper bound on the sup-norm-to-data operator norm of `Gamma^{-1/2} G`,
/// `|Phi(u; y) - Phi(u; y')| <= kappa (R |u|_sup + kappa r) |y - y'|`,
/// so `bound_m2(r, s) = ln(c1 s + c2)` with `c1 = kappa R` and
/// `c2 = r kappa^2`.
pub fn gaussian_potential(model: &ForwardModel, noise: &NoiseModel) -> Result<Potential> {
    if model.observation_count() != noise.dim() {
        return Err(Error::Shape(format!(
            "operator has {} rows but noise dimension is {}",
            model.observation_count(),
            noise.dim()
        )));
    }
    let kappa = noise.inv_sqrt_spectral_norm();
    let mut whitened = DMatrix::zeros(model.observation_count(), model.grid_size());
    for j in 0..model.grid_size() {
        let col: Vec<f64> = model.matrix.column(j).iter().copied().collect();
        let w = noise.whiten(&col)?;
        for (i, v) in w.iter().enumerate() {
            whitened[(i, j)] = *v;
        }
    }
    let sup_to_data_norm = whitened
        .row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt();
    let c1 = kappa * sup_to_data_norm;
    let matrix = model.matrix.clone();
    let l = noise.chol.l();
    let grid = model.grid_size();
    let obs = model.observation_count();
    let evaluate: EvalFn = Box::new(move |u: &[f64], y: &[f64]| {
        assert_eq!(u.len(), grid, "grid function length mismatch");
        assert_eq!(y.len(), obs, "data length mismatch");
        let residual = &matrix * DVector::from_column_slice(u) - DVector::from_column_slice(y);
        let z = l
            .solve_lower_triangular(&residual)
            .expect("validated Cholesky factor");
        0.5 * z.norm_squared()
    });
    let bound_m1: BoundFn = Box::new(|_, _| 0.0);
    let bound_m2: BoundFn =
        Box::new(move |radius: f64, s: f64| (c1 * s + radius * kappa * kappa).ln());
    Ok(Potential::new(evaluate, bound_m1, bound_m2))
}

/// Monte Carlo estimate of the normalising constant
/// `Z(y) = E_prior[exp(-Phi(u; y))]`: sample mean and standard error,
/// computed under a max shift so large misfits cannot overflow.
pub fn estimate_z(draws: &[FunctionDraw], potential: &Potential, y: &[f64]) -> Result<(f64, f64)> {
    if draws.len() < 2 {
        return Err(Error::EmptyInput(
            "normalising constant estimation needs at least 2 draws".into(),
        ));
    }
    let log_vals: Vec<f64> = draws
        .iter()
        .map(|d| -potential.evaluate(&d.grid_values, y))
        .collect();
    Ok(shifted_mean_se(&log_vals))
}

fn shifted_mean_se(log_vals: &[f64]) -> (f64, f64) {
    let m = log_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_vals.iter().map(|lv| (lv - m).exp()).collect();
    let n = scaled.len() as f64;
    let mean = scaled.iter().sum::<f64>() / n;
    let var = scaled.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let scale = m.exp();
    (scale * mean, scale * (var / n).sqrt())
}

/// A posterior represented as reweighted prior draws.
#[derive(Debug, Clone)]
pub struct WeightedPosterior {
    pub draws: Vec<FunctionDraw>,
    pub log_weights: Vec<f64>,
    pub weights: Vec<f64>,
    pub z_estimate: f64,
    pub z_std_error: f64,
    pub ess: f64,
    pub data: Vec<f64>,
}

impl WeightedPosterior {
    pub fn sample_count(&self) -> usize {
        self.draws.len()
    }

    /// Self-normalized importance estimate of the posterior mean of the
    /// given per-draw values, with its weighted standard error.
    pub fn mean_and_se(&self, values: &[f64]) -> Result<(f64, f64)> {
        if values.len() != self.draws.len() {
            return Err(Error::Shape(format!(
                "{} values for {} draws",
                values.len(),
                self.draws.len()
            )));
        }
        let mean: f64 = self.weights.iter().zip(values).map(|(w, v)| w * v).sum();
        let se = self
            .weights
            .iter()
            .zip(values)
            .map(|(w, v)| (w * (v - mean)).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok((mean, se))
    }
}

/// Reweights the prior draws by `exp(-Phi(u_i; y))`, normalized with the
/// log-sum-exp shift. Errors if the shifted weights are degenerate: a gap
/// above 700 between the two largest log-weights means every draw but one
/// underflows to zero relative weight and the posterior sample has
/// collapsed to a single atom.
pub fn build_posterior(
    draws: &[FunctionDraw],
    potential: &Potential,
    y: &[f64],
) -> Result<WeightedPosterior> {
    if draws.len() < 2 {
        return Err(Error::EmptyInput(
            "posterior construction needs at least 2 draws".into(),
        ));
    }
    let log_weights: Vec<f64> = draws
        .iter()
        .map(|d| -potential.evaluate(&d.grid_values, y))
        .collect();
    if let Some(bad) = log_weights.iter().find(|lw| lw.is_nan()) {
        return Err(Error::ParameterDomain(format!(
            "potential produced log-weight {bad}"
        )));
    }
    let mut top = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &lw in &log_weights {
        if lw > top {
            second = top;
            top = lw;
        } else if lw > second {
            second = lw;
        }
    }
    let gap = top - second;
    if gap > 700.0 {
        return Err(Error::DegenerateWeights { gap });
    }
    let mut weights: Vec<f64> = log_weights.iter().map(|lw| (lw - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    let (z_estimate, z_std_error) = shifted_mean_se(&log_weights);
    Ok(WeightedPosterior {
        draws: draws.to_vec(),
        log_weights,
        weights,
        z_estimate,
        z_std_error,
        ess,
        data: y.to_vec(),
    })
}

/// One recorded failure of the declared lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundViolation {
    pub draw: usize,
    pub data_index: usize,
    pub potential: f64,
    pub bound: f64,
}

/// One recorded failure of the declared data-Lipschitz bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzViolation {
    pub draw: usize,
    pub data_a: usize,
    pub data_b: usize,
    pub difference: f64,
    pub bound: f64,
}

/// Outcome of checking a potential's declared bounds on concrete draws and
/// data vectors. Violations are data, not errors; an empty report is a pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViolationReport {
    pub lower_bound: Vec<LowerBoundViolation>,
    pub lipschitz: Vec<LipschitzViolation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.lower_bound.is_empty() && self.lipschitz.is_empty()
    }
}

fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Checks the declared `bound_m1` lower bound and `bound_m2` Lipschitz
/// bound of a potential against brute-force evaluation on every draw and
/// every pair of data vectors inside the radius.
pub fn verify_bounds(
    potential: &Potential,
    draws: &[FunctionDraw],
    y_set: &[Vec<f64>],
    r: f64,
) -> Result<ViolationReport> {
    if draws.is_empty() || y_set.is_empty() {
        return Err(Error::EmptyInput(
            "bound verification needs draws and data vectors".into(),
        ));
    }
    for y in y_set {
        let norm = euclidean_norm(y);
        if norm >= r {
            return Err(Error::RadiusExceeded { norm, radius: r });
        }
    }
    let mut report = ViolationReport::default();
    for (di, draw) in draws.iter().enumerate() {
        let s = sup_norm(&draw.grid_values);
        let m1 = potential.bound_m1(r, s);
        let lip = potential.bound_m2(r, s).exp();
        let phis: Vec<f64> = y_set
            .iter()
            .map(|y| potential.evaluate(&draw.grid_values, y))
            .collect();
        for (yi, &phi) in phis.iter().enumerate() {
            if phi < m1 {
                report.lower_bound.push(LowerBoundViolation {
                    draw: di,
                    data_index: yi,
                    potential: phi,
                    bound: m1,
                });
            }
        }
        for i in 0..y_set.len() {
            for j in (i + 1)..y_set.len() {
                let diff = (phis[i] - phis[j]).abs();
                let step: Vec<f64> = y_set[i].iter().zip(&y_set[j]).map(|(a, b)| a - b).collect();
                let bound = lip * euclidean_norm(&step);
                if diff > bound {
                    report.lipschitz.push(LipschitzViolation {
                        draw: di,
                        data_a: i,
                        data_b: j,
                        difference: diff,
                        bound,
                    });
                }
            }
        }
    }
    Ok(report)
}
