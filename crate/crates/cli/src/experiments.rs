//! One runner per experiment kind. Each runner assembles its inputs from
//! the validated configuration, calls into the library, and renders CSV
//! artifacts; `run` dispatches and writes the output tree.

use stable_bayes::inference::{chain_summary, map_estimate, mh_sample, ChainConfig};
use stable_bayes::metrics::{hellinger, total_variation, MetricEstimate};
use stable_bayes::posterior::{build_posterior, gaussian_potential, Potential};
use stable_bayes::quasi_banach::synthesis;
use stable_bayes::series_prior::{draw_prior_many, ExpansionSpec, FunctionDraw};
use stable_bayes::stable::StableParams;
use stable_bayes::wellposedness::{
    discretisation_invariance_study, hellinger_lipschitz_scan, PhysicalObservation,
    SummaryStatistic,
};

use crate::config::{ExperimentConfig, ExperimentKind, FamilyKind, ModelConfig};
use crate::deconv::{
    convolution_model, gaussian_control_family, make_deconvolution_family, observe_truth,
};
use crate::output::{csv_table, float_cell, write_run, Artifact};
use crate::CliError;

fn data_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x9e37_79b9_7f4a_7c15)
}

/// The observations for a run: explicit data when the config carries it,
/// otherwise the built-in scene observed with seeded noise.
fn data_vector(model: &ModelConfig, seed: u64) -> Result<Vec<f64>, CliError> {
    match &model.data {
        Some(data) => Ok(data.clone()),
        None => Ok(observe_truth(
            model.observation_count,
            model.kernel_width,
            model.noise_scale,
            data_seed(seed),
        )?),
    }
}

struct PosteriorProblem {
    spec: ExpansionSpec,
    potential: Potential,
    data: Vec<f64>,
}

fn build_problem(
    config: &ExperimentConfig,
    zero_potential: bool,
) -> Result<PosteriorProblem, CliError> {
    let prior = config.prior.as_ref().expect("validated");
    let model = config.model.as_ref().expect("validated");
    let spec = prior.build()?;
    let forward = convolution_model(prior.grid_size, model.observation_count, model.kernel_width)?;
    let noise = stable_bayes::posterior::NoiseModel::isotropic(
        model.observation_count,
        model.noise_scale * model.noise_scale,
    )?;
    let potential = if zero_potential {
        Potential::zero()
    } else {
        gaussian_potential(&forward, &noise)?
    };
    Ok(PosteriorProblem {
        spec,
        potential,
        data: data_vector(model, config.seed)?,
    })
}

fn run_sample_stable(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let stable = config.stable.as_ref().expect("validated");
    let count = config.sampling.as_ref().expect("validated").count;
    let law = StableParams::new(stable.alpha, stable.beta, stable.gamma, stable.delta)?;
    let samples = law.sample(count, config.seed)?;
    let rows = samples
        .iter()
        .enumerate()
        .map(|(i, x)| vec![i.to_string(), float_cell(*x)]);
    Ok(vec![Artifact::new(
        "samples.csv",
        csv_table("index,value", rows),
    )])
}

fn run_sample_prior(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let prior = config.prior.as_ref().expect("validated");
    let count = config.sampling.as_ref().expect("validated").count;
    let spec = prior.build()?;
    let draws = draw_prior_many(&spec, count, config.seed)?;
    let mut rows = Vec::new();
    for (d, draw) in draws.iter().enumerate() {
        for (j, value) in draw.grid_values.iter().enumerate() {
            rows.push(vec![
                d.to_string(),
                j.to_string(),
                float_cell(spec.basis.grid_point(j)),
                float_cell(*value),
            ]);
        }
    }
    Ok(vec![Artifact::new(
        "draws.csv",
        csv_table("draw,grid_index,grid_point,value", rows),
    )])
}

fn posterior_draws(
    config: &ExperimentConfig,
    spec: &ExpansionSpec,
) -> Result<Vec<FunctionDraw>, CliError> {
    let count = config.sampling.as_ref().expect("validated").count;
    Ok(draw_prior_many(spec, count, config.seed)?)
}

fn run_posterior(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let zero = config.posterior.as_ref().is_some_and(|p| p.zero_potential);
    let problem = build_problem(config, zero)?;
    let draws = posterior_draws(config, &problem.spec)?;
    let post = build_posterior(&draws, &problem.potential, &problem.data)?;
    let weight_rows = (0..post.sample_count()).map(|i| {
        vec![
            i.to_string(),
            float_cell(post.log_weights[i]),
            float_cell(post.weights[i]),
        ]
    });
    let summary_rows = vec![vec![
        float_cell(post.z_estimate),
        float_cell(post.z_std_error),
        float_cell(post.ess),
        post.sample_count().to_string(),
    ]];
    Ok(vec![
        Artifact::new(
            "weights.csv",
            csv_table("draw,log_weight,weight", weight_rows),
        ),
        Artifact::new(
            "posterior_summary.csv",
            csv_table("z_estimate,z_std_error,ess,sample_count", summary_rows),
        ),
    ])
}

fn metric_row(name: &str, est: &MetricEstimate) -> Vec<String> {
    vec![
        name.to_string(),
        float_cell(est.value),
        float_cell(est.std_error),
        est.sample_count.to_string(),
        float_cell(est.clamp_magnitude),
    ]
}

fn run_hellinger(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let metric = config.metric.as_ref().expect("validated");
    let problem = build_problem(config, false)?;
    let draws = posterior_draws(config, &problem.spec)?;
    let shifted: Vec<f64> = problem
        .data
        .iter()
        .zip(&metric.perturbation)
        .map(|(y, p)| y + p)
        .collect();
    let mu = build_posterior(&draws, &problem.potential, &problem.data)?;
    let nu = build_posterior(&draws, &problem.potential, &shifted)?;
    let h = hellinger(&mu, &nu)?;
    let tv = total_variation(&mu, &nu)?;
    let rows = vec![
        metric_row("hellinger", &h),
        metric_row("total_variation", &tv),
    ];
    Ok(vec![Artifact::new(
        "metrics.csv",
        csv_table("metric,value,std_error,sample_count,clamp_magnitude", rows),
    )])
}

fn run_lipschitz_scan(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let scan_cfg = config.scan.as_ref().expect("validated");
    let problem = build_problem(config, false)?;
    let draws = posterior_draws(config, &problem.spec)?;
    let scan = hellinger_lipschitz_scan(
        &draws,
        &problem.potential,
        &problem.data,
        std::slice::from_ref(&scan_cfg.direction),
        &scan_cfg.steps,
        scan_cfg.radius,
    )?;
    let rows = (0..scan.steps.len()).map(|i| {
        let est = &scan.hellinger_values[i];
        let ratio = if scan.distances[i] > 0.0 {
            float_cell(est.value / scan.distances[i])
        } else {
            String::new()
        };
        vec![
            float_cell(scan.steps[i]),
            float_cell(scan.distances[i]),
            float_cell(est.value),
            float_cell(est.std_error),
            ratio,
        ]
    });
    let summary = vec![vec![float_cell(scan.sup_ratio), float_cell(scan.radius_r)]];
    Ok(vec![
        Artifact::new(
            "scan.csv",
            csv_table("step,distance,d_h,std_error,ratio", rows),
        ),
        Artifact::new("scan_summary.csv", csv_table("sup_ratio,radius", summary)),
    ])
}

fn run_invariance(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let model = config.model.as_ref().expect("validated");
    let inv = config.invariance.as_ref().expect("validated");
    let observation = PhysicalObservation {
        data: data_vector(model, config.seed)?,
        eval_points: inv.eval_points.clone(),
    };
    let obs_count = model.observation_count;
    let width = model.kernel_width;
    let noise = model.noise_scale;
    let family = |n: usize| match inv.family {
        FamilyKind::Cauchy => make_deconvolution_family(n, obs_count, width, noise),
        FamilyKind::Gaussian => gaussian_control_family(n, obs_count, width, noise),
    };
    let table = discretisation_invariance_study(
        &family,
        &inv.sizes,
        &observation,
        SummaryStatistic::Median,
        inv.engine.build(),
        config.seed,
    )?;
    let mut rows = Vec::new();
    for (n, medians) in &table {
        for (t, m) in inv.eval_points.iter().zip(medians) {
            rows.push(vec![n.to_string(), float_cell(*t), float_cell(*m)]);
        }
    }
    Ok(vec![Artifact::new(
        "invariance.csv",
        csv_table("n,eval_point,median", rows),
    )])
}

fn run_map(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let map_cfg = config.map.as_ref().expect("validated");
    let problem = build_problem(config, false)?;
    let init = vec![0.0; problem.spec.truncation];
    let coefficients = map_estimate(
        &problem.potential,
        map_cfg.regulariser.build(),
        &problem.data,
        &init,
        &problem.spec.basis,
        map_cfg.tolerance,
    )?;
    let reconstruction = synthesis(&coefficients, &problem.spec.basis)?;
    let coeff_rows = coefficients
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), float_cell(*v)]);
    let grid_rows = reconstruction.iter().enumerate().map(|(j, v)| {
        vec![
            j.to_string(),
            float_cell(problem.spec.basis.grid_point(j)),
            float_cell(*v),
        ]
    });
    Ok(vec![
        Artifact::new("coefficients.csv", csv_table("index,value", coeff_rows)),
        Artifact::new(
            "reconstruction.csv",
            csv_table("grid_index,grid_point,value", grid_rows),
        ),
    ])
}

fn quantile_label(q: f64) -> String {
    format!("q{}", 100.0 * q)
}

fn run_mcmc(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let chain = config.chain.as_ref().expect("validated");
    let problem = build_problem(config, false)?;
    let chain_config = ChainConfig {
        steps: chain.steps,
        burn_in: chain.burn_in,
        proposal: chain.proposal.build(),
        rw_scale: chain.rw_scale,
        seed: config.seed,
    };
    let result = mh_sample(
        &problem.spec,
        &problem.potential,
        &problem.data,
        &chain_config,
    )?;
    let table = chain_summary(&result, &problem.spec.basis, &chain.quantiles)?;
    let mut header = String::from("grid_index,grid_point");
    for q in &chain.quantiles {
        header.push(',');
        header.push_str(&quantile_label(*q));
    }
    let rows = table.iter().enumerate().map(|(j, row)| {
        let mut cells = vec![j.to_string(), float_cell(problem.spec.basis.grid_point(j))];
        cells.extend(row.iter().map(|v| float_cell(*v)));
        cells
    });
    let ess_min = result
        .ess_per_coordinate
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let ess_mean =
        result.ess_per_coordinate.iter().sum::<f64>() / result.ess_per_coordinate.len() as f64;
    let stats = vec![vec![
        float_cell(result.acceptance_rate),
        result.states.len().to_string(),
        float_cell(ess_min),
        float_cell(ess_mean),
    ]];
    Ok(vec![
        Artifact::new("chain_summary.csv", csv_table(&header, rows)),
        Artifact::new(
            "chain_stats.csv",
            csv_table("acceptance_rate,recorded_states,min_ess,mean_ess", stats),
        ),
    ])
}

/// Validates the configuration, runs the selected experiment, and writes
/// all artifacts plus the manifest into the output directory.
pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    config.validate().map_err(CliError::Validation)?;
    let artifacts = match config.experiment {
        ExperimentKind::SampleStable => run_sample_stable(config)?,
        ExperimentKind::SamplePrior => run_sample_prior(config)?,
        ExperimentKind::Posterior => run_posterior(config)?,
        ExperimentKind::Hellinger => run_hellinger(config)?,
        ExperimentKind::LipschitzScan => run_lipschitz_scan(config)?,
        ExperimentKind::Invariance => run_invariance(config)?,
        ExperimentKind::Map => run_map(config)?,
        ExperimentKind::Mcmc => run_mcmc(config)?,
    };
    write_run(&config.output_dir, config, &artifacts).map_err(CliError::from)
}
