//! The canonical one-dimensional deconvolution experiment: a piecewise
//! constant continuum scene observed through a Gaussian blur kernel at
//! fixed physical points, with additive Gaussian noise, reconstructed on
//! an `n`-cell grid under a difference prior on increments.

use stable_bayes::error::Error;
use stable_bayes::posterior::{ForwardModel, NoiseModel};
use stable_bayes::quasi_banach::{BasisFamily, BasisSpec};
use stable_bayes::series_prior::{ExpansionSpec, SequenceSpec};
use stable_bayes::stable::StableParams;
use stable_bayes::Result;

/// Grid resolution used to generate observations of the continuum scene,
/// deliberately finer than any reconstruction grid in the experiments.
const REFERENCE_GRID: usize = 1024;

/// The fixed test scene: piecewise constant with jumps of varying height,
/// the shape that difference priors are meant to preserve.
pub fn continuum_truth(t: f64) -> f64 {
    if t < 0.2 {
        0.1
    } else if t < 0.45 {
        1.0
    } else if t < 0.6 {
        0.3
    } else if t < 0.85 {
        0.7
    } else {
        0.0
    }
}

fn check_geometry(n: usize, observation_count: usize, kernel_width: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::ParameterDomain("grid size must be positive".into()));
    }
    if observation_count == 0 {
        return Err(Error::ParameterDomain(
            "observation count must be positive".into(),
        ));
    }
    if observation_count > n {
        return Err(Error::Shape(format!(
            "observation count {observation_count} exceeds grid size {n}"
        )));
    }
    if !kernel_width.is_finite() || kernel_width < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "kernel width {kernel_width} must be finite and nonnegative"
        )));
    }
    if kernel_width >= 1.0 {
        return Err(Error::ParameterDomain(format!(
            "kernel width {kernel_width} spans the whole unit domain"
        )));
    }
    Ok(())
}

/// Observation points fixed in physical coordinates, independent of any
/// reconstruction grid.
pub fn observation_points(observation_count: usize) -> Vec<f64> {
    (0..observation_count)
        .map(|k| (k as f64 + 0.5) / observation_count as f64)
        .collect()
}

/// One row of the blur-and-sample operator on an `n`-cell grid: Gaussian
/// kernel weights at the cell centres, normalised to sum to one so the
/// row is a quadrature of a probability kernel. Width zero degenerates to
/// point evaluation at the nearest cell.
fn kernel_row(t: f64, n: usize, kernel_width: f64) -> Vec<f64> {
    let mut row = vec![0.0; n];
    if kernel_width == 0.0 {
        let j = ((t * n as f64).floor() as usize).min(n - 1);
        row[j] = 1.0;
        return row;
    }
    let mut total = 0.0;
    for (j, w) in row.iter_mut().enumerate() {
        let s = (j as f64 + 0.5) / n as f64;
        *w = (-(t - s).powi(2) / (2.0 * kernel_width * kernel_width)).exp();
        total += *w;
    }
    for w in &mut row {
        *w /= total;
    }
    row
}

/// The blur-and-sample forward operator for an `n`-cell reconstruction
/// grid.
pub fn convolution_model(
    n: usize,
    observation_count: usize,
    kernel_width: f64,
) -> Result<ForwardModel> {
    check_geometry(n, observation_count, kernel_width)?;
    let mut entries = Vec::with_capacity(observation_count * n);
    for t in observation_points(observation_count) {
        entries.extend(kernel_row(t, n, kernel_width));
    }
    ForwardModel::from_row_major(
        observation_count,
        n,
        &entries,
        &format!("gaussian blur (width {kernel_width}) sampled at {observation_count} points"),
    )
}

/// Cauchy difference prior plus blur model at resolution `n`. The
/// increment scale is `1 / n`, the scaling under which the discrete
/// prior keeps a continuum interpretation as the grid refines.
pub fn make_deconvolution_family(
    n: usize,
    observation_count: usize,
    kernel_width: f64,
    noise_scale: f64,
) -> Result<(ExpansionSpec, ForwardModel, NoiseModel)> {
    let model = convolution_model(n, observation_count, kernel_width)?;
    let basis = BasisSpec::new(BasisFamily::Difference, n)?;
    let spec = ExpansionSpec::new(
        1.0,
        vec![0.0; n],
        SequenceSpec::Explicit {
            values: vec![1.0 / n as f64; n],
        },
        SequenceSpec::Zero,
        basis,
        n,
        1.0,
    )?;
    let noise = NoiseModel::isotropic(observation_count, noise_scale * noise_scale)?;
    Ok((spec, model, noise))
}

/// Gaussian difference prior with increment variance `1 / n`, the
/// light-tailed control for the invariance experiments. Its posterior is
/// available exactly through the conjugate oracle.
pub fn gaussian_control_family(
    n: usize,
    observation_count: usize,
    kernel_width: f64,
    noise_scale: f64,
) -> Result<(ExpansionSpec, ForwardModel, NoiseModel)> {
    let model = convolution_model(n, observation_count, kernel_width)?;
    let basis = BasisSpec::new(BasisFamily::Difference, n)?;
    let spec = ExpansionSpec::new(
        2.0,
        vec![0.0; n],
        SequenceSpec::Explicit {
            values: vec![(2.0 * n as f64).sqrt().recip(); n],
        },
        SequenceSpec::Zero,
        basis,
        n,
        2.0,
    )?;
    let noise = NoiseModel::isotropic(observation_count, noise_scale * noise_scale)?;
    Ok((spec, model, noise))
}

/// Observes the continuum scene through the kernel on the reference grid
/// and adds seeded Gaussian noise of standard deviation `noise_scale`.
pub fn observe_truth(
    observation_count: usize,
    kernel_width: f64,
    noise_scale: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_geometry(REFERENCE_GRID, observation_count, kernel_width)?;
    if !noise_scale.is_finite() || noise_scale < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "noise scale {noise_scale} must be finite and nonnegative"
        )));
    }
    let truth: Vec<f64> = (0..REFERENCE_GRID)
        .map(|j| continuum_truth((j as f64 + 0.5) / REFERENCE_GRID as f64))
        .collect();
    let clean: Vec<f64> = observation_points(observation_count)
        .into_iter()
        .map(|t| {
            kernel_row(t, REFERENCE_GRID, kernel_width)
                .iter()
                .zip(&truth)
                .map(|(w, u)| w * u)
                .sum()
        })
        .collect();
    let noise_law = StableParams::new(2.0, 0.0, noise_scale / std::f64::consts::SQRT_2, 0.0)?;
    let noise = noise_law.sample(observation_count, seed)?;
    Ok(clean.iter().zip(&noise).map(|(c, e)| c + e).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_kernel_is_the_identity_on_a_matching_grid() {
        let model = convolution_model(4, 4, 0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(model.matrix[(i, j)], expected);
            }
        }
    }

    #[test]
    fn unit_noise_scale_gives_identity_covariance() {
        let (_, _, noise) = make_deconvolution_family(64, 16, 0.05, 1.0).unwrap();
        let cov = noise.covariance();
        for i in 0..16 {
            for j in 0..16 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(cov[(i, j)], expected);
            }
        }
    }

    #[test]
    fn rows_are_normalised_quadratures() {
        let model = convolution_model(64, 16, 3.0 / 64.0).unwrap();
        for i in 0..16 {
            let sum: f64 = (0..64).map(|j| model.matrix[(i, j)]).sum();
            assert!((sum - 1.0).abs() < 1e-12, "row {i} sums to {sum}");
        }
    }

    fn refinement_change(f: impl Fn(f64) -> f64) -> f64 {
        let apply = |n: usize| {
            let model = convolution_model(n, 16, 0.05).unwrap();
            let grid: Vec<f64> = (0..n).map(|j| f((j as f64 + 0.5) / n as f64)).collect();
            model.apply(&grid).unwrap()
        };
        let coarse = apply(64);
        let fine = apply(128);
        let diff: f64 = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = fine.iter().map(|x| x * x).sum::<f64>().sqrt();
        diff / norm
    }

    #[test]
    fn refinement_changes_blurred_observations_by_under_two_percent() {
        let smooth = refinement_change(|t| (2.0 * std::f64::consts::PI * t).sin() + 0.5 * t + 1.0);
        assert!(smooth < 0.02, "smooth scene changed by {smooth}");
        // Jump discontinuities are the worst case for the midpoint
        // quadrature; the change still shrinks with the cell width.
        let steps = refinement_change(continuum_truth);
        assert!(steps < 0.05, "step scene changed by {steps}");
    }

    #[test]
    fn geometry_violations_are_rejected() {
        assert!(matches!(
            convolution_model(8, 16, 0.05),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            convolution_model(16, 8, 1.0),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            convolution_model(16, 8, -0.1),
            Err(Error::ParameterDomain(_))
        ));
    }

    #[test]
    fn family_prior_passes_its_own_gate_at_every_resolution() {
        for n in [16, 32, 64, 128] {
            let (spec, model, noise) = make_deconvolution_family(n, 16, 0.05, 0.1).unwrap();
            assert!(spec.validate_convergence().unwrap().overall);
            assert_eq!(model.grid_size(), n);
            assert_eq!(noise.dim(), 16);
        }
    }

    #[test]
    fn noiseless_observations_are_deterministic_and_bounded_by_the_scene() {
        let a = observe_truth(16, 0.05, 0.0, 7).unwrap();
        let b = observe_truth(16, 0.05, 0.0, 8).unwrap();
        assert_eq!(a, b);
        for y in &a {
            assert!((0.0..=1.0).contains(y), "blurred value {y}");
        }
    }

    #[test]
    fn observation_noise_is_seeded() {
        let a = observe_truth(16, 0.05, 0.1, 7).unwrap();
        let b = observe_truth(16, 0.05, 0.1, 7).unwrap();
        let c = observe_truth(16, 0.05, 0.1, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
