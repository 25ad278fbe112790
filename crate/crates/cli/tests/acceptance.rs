//! End-to-end acceptance checks. Each test exercises one release gate,
//! prints a single PASS/FAIL line, and enforces its runtime budget.
//! Seeds are frozen so every run is reproducible.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use stable_bayes::inference::{map_estimate, mh_sample, ChainConfig, Proposal, Regulariser};
use stable_bayes::metrics::{hellinger, qoi_bound_check, total_variation};
use stable_bayes::posterior::{
    build_posterior, estimate_z, gaussian_potential, ForwardModel, NoiseModel, Potential,
};
use stable_bayes::quasi_banach::{BasisFamily, BasisSpec};
use stable_bayes::series_prior::{
    draw_prior_many_unchecked, ConvergenceVerdict, ExpansionSpec, FunctionDraw, SequenceSpec,
};
use stable_bayes::stable::StableParams;
use stable_bayes::stats::{ks_statistic, normal_cdf};
use stable_bayes::wellposedness::{
    conjugate_posterior, discretisation_invariance_study, hellinger_lipschitz_scan,
    scalar_evidence, PhysicalObservation, StudyEngine, SummaryStatistic,
};
use stable_bayes_cli::deconv::{gaussian_control_family, make_deconvolution_family, observe_truth};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn report(number: u8, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {number:02} {name}: {verdict} ({detail})");
    assert!(pass, "acceptance {number:02} {name}: {detail}");
}

fn within_budget(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn standard_normal_draws(count: usize, seed: u64) -> Vec<FunctionDraw> {
    let law = StableParams::new(2.0, 0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0).unwrap();
    law.sample(count, seed)
        .unwrap()
        .into_iter()
        .map(|x| FunctionDraw {
            coefficients: vec![x],
            grid_values: vec![x],
            seed,
        })
        .collect()
}

fn mean_shift_potential(mean: f64) -> Potential {
    Potential::new(
        Box::new(move |u: &[f64], _: &[f64]| 0.5 * (u[0] - mean).powi(2) - 0.5 * u[0] * u[0]),
        Box::new(|_, _| f64::NEG_INFINITY),
        Box::new(|_, _| 0.0),
    )
}

fn gaussian_spec(means: &[f64], variances: &[f64]) -> ExpansionSpec {
    let dim = means.len();
    let gammas: Vec<f64> = variances.iter().map(|v| (v / 2.0).sqrt()).collect();
    ExpansionSpec::new(
        2.0,
        vec![0.0; dim],
        SequenceSpec::Explicit { values: gammas },
        SequenceSpec::Explicit {
            values: means.to_vec(),
        },
        BasisSpec::new(BasisFamily::Canonical, dim).unwrap(),
        dim,
        2.0,
    )
    .unwrap()
}

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = a.iter().map(|x| x * x).sum();
    (num / den).sqrt()
}

type CdfCase = (&'static str, StableParams, Box<dyn Fn(f64) -> f64>);

#[test]
fn acceptance_01_stable_sampler_ks() {
    let cases: [CdfCase; 3] = [
        (
            "gaussian",
            StableParams::new(2.0, 0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0).unwrap(),
            Box::new(|x: f64| normal_cdf(x)),
        ),
        (
            "cauchy",
            StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap(),
            Box::new(|x: f64| 0.5 + x.atan() / std::f64::consts::PI),
        ),
        (
            "levy",
            StableParams::new(0.5, 1.0, 1.0, 0.0).unwrap(),
            Box::new(|x: f64| {
                if x <= 0.0 {
                    0.0
                } else {
                    statrs::function::erf::erfc((0.5 / x).sqrt())
                }
            }),
        ),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (i, (name, law, cdf)) in cases.iter().enumerate() {
        let start = Instant::now();
        let samples = law.sample(100_000, 11 + i as u64).unwrap();
        let ks = ks_statistic(&samples, cdf).unwrap();
        let elapsed = start.elapsed();
        pass &= ks < 0.006 && within_budget(elapsed, Duration::from_secs(5));
        detail.push_str(&format!("{name} ks {ks:.5} in {elapsed:.2?}; "));
    }
    report(1, "stable sampler vs closed-form cdfs", pass, &detail);
}

#[test]
fn acceptance_02_stability_law() {
    let start = Instant::now();
    let laws = [
        ("cauchy", StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap()),
        (
            "gaussian",
            StableParams::new(2.0, 0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0).unwrap(),
        ),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (name, law) in &laws {
        for n_fold in [2usize, 3, 5] {
            let rep = law.stability_check(n_fold, 100_000, 21).unwrap();
            pass &= rep.ks_p_value > 0.01;
            detail.push_str(&format!("{name} n{n_fold} p {:.3}; ", rep.ks_p_value));
        }
    }
    let elapsed = start.elapsed();
    pass &= within_budget(elapsed, Duration::from_secs(30));
    detail.push_str(&format!("total {elapsed:.2?}"));
    report(2, "n-fold sums keep the stable law", pass, &detail);
}

#[test]
fn acceptance_03_moment_boundary() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for alpha in [0.8f64, 1.0, 1.5] {
        let law = StableParams::new(alpha, 0.0, 1.0, 0.0).unwrap();
        let xs = law.sample(2_000_000, 343).unwrap();
        let p_ok = 0.9 * alpha;
        let batch_a = xs[..1_000_000]
            .iter()
            .map(|x| x.abs().powf(p_ok))
            .sum::<f64>()
            / 1e6;
        let batch_b = xs[1_000_000..]
            .iter()
            .map(|x| x.abs().powf(p_ok))
            .sum::<f64>()
            / 1e6;
        let rel = (batch_a - batch_b).abs() / batch_a.min(batch_b);
        let p_div = 1.1 * alpha;
        let head = xs[..10_000]
            .iter()
            .map(|x| x.abs().powf(p_div))
            .sum::<f64>()
            / 1e4;
        let full = xs[..1_000_000]
            .iter()
            .map(|x| x.abs().powf(p_div))
            .sum::<f64>()
            / 1e6;
        let ratio = full / head;
        pass &= rel < 0.05 && ratio > 3.0;
        detail.push_str(&format!("a{alpha}: batch rel {rel:.3} ratio {ratio:.1}; "));
    }
    let cauchy = StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
    let half = cauchy.fractional_moment(0.5, 1_000_000, 101).unwrap();
    let half_rel = (half - SQRT_2).abs() / SQRT_2;
    pass &= half_rel < 0.02;
    let elapsed = start.elapsed();
    pass &= within_budget(elapsed, Duration::from_secs(60));
    detail.push_str(&format!(
        "cauchy half {half:.4} rel {half_rel:.4} in {elapsed:.2?}"
    ));
    report(
        3,
        "moments finite below alpha, diverging above",
        pass,
        &detail,
    );
}

#[test]
fn acceptance_04_convergence_verdicts() {
    let start = Instant::now();
    let power = |s: f64| SequenceSpec::PowerLaw {
        scale: 1.0,
        exponent: s,
    };
    let verdict = |g: bool, d: bool, req: bool, orl: Option<bool>| ConvergenceVerdict {
        gamma_in_l_alpha: g,
        delta_in_l_q: d,
        orlicz_required: req,
        orlicz_finite: orl,
        truncation_level: false,
        overall: g && d && orl.unwrap_or(true),
    };
    let cases: Vec<(f64, f64, f64, ConvergenceVerdict)> = vec![
        (1.0, 2.0, 2.0, verdict(true, true, true, Some(true))),
        (1.0, 2.0, 1.0, verdict(true, false, true, Some(true))),
        (1.0, 1.0, 2.0, verdict(false, true, true, Some(false))),
        (1.0, 1.0, 1.0, verdict(false, false, true, Some(false))),
        (0.5, 2.0, 3.0, verdict(true, true, true, Some(true))),
        (0.5, 2.0, 1.0, verdict(true, false, true, Some(true))),
        (0.5, 1.0, 3.0, verdict(false, true, true, Some(false))),
        (0.5, 1.0, 1.0, verdict(false, false, true, Some(false))),
        (3.0, 2.0, 1.0, verdict(true, true, false, None)),
        (3.0, 2.0, 0.2, verdict(true, false, false, None)),
        (3.0, 1.0, 1.0, verdict(false, true, false, None)),
        (3.0, 1.0, 0.2, verdict(false, false, false, None)),
    ];
    let mut pass = true;
    for (q, gamma_exp, delta_exp, expected) in &cases {
        let spec = ExpansionSpec::new(
            1.0,
            vec![0.0; 8],
            power(*gamma_exp),
            power(*delta_exp),
            BasisSpec::new(BasisFamily::Canonical, 8).unwrap(),
            8,
            *q,
        )
        .unwrap();
        let got = spec.validate_convergence().unwrap();
        if got != *expected {
            pass = false;
            println!("case q={q} gamma n^-{gamma_exp} delta n^-{delta_exp}: got {got:?}");
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        "convergence gate verdict table",
        pass,
        &format!("12 cases exact in {elapsed:.2?}"),
    );
}

#[test]
fn acceptance_05_hellinger_and_tv_estimators() {
    let start = Instant::now();
    let draws = standard_normal_draws(100_000, 51);
    let mu = build_posterior(&draws, &mean_shift_potential(0.0), &[0.0]).unwrap();
    let nu = build_posterior(&draws, &mean_shift_potential(0.5), &[0.0]).unwrap();
    let h = hellinger(&mu, &nu).unwrap();
    let tv = total_variation(&mu, &nu).unwrap();
    let h_exact = 1.0 - (-1.0f64 / 32.0).exp();
    let tv_exact = 2.0 * normal_cdf(0.25) - 1.0;
    let h_gap = (h.value - h_exact).abs();
    let tv_gap = (tv.value - tv_exact).abs();
    let elapsed = start.elapsed();
    let pass = h_gap <= 3.0 * h.std_error
        && tv_gap <= 3.0 * tv.std_error
        && within_budget(elapsed, Duration::from_secs(10));
    report(
        5,
        "hellinger and tv match the gaussian pair",
        pass,
        &format!(
            "h {:.5} vs {h_exact:.5} (se {:.5}), tv {:.5} vs {tv_exact:.5} (se {:.5}), {elapsed:.2?}",
            h.value, h.std_error, tv.value, tv.std_error
        ),
    );
}

#[test]
fn acceptance_06_qoi_bound() {
    let start = Instant::now();
    let pilot_law = StableParams::new(2.0, 0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0).unwrap();
    let mut violations = 0usize;
    for trial in 0..50u64 {
        let pilot = pilot_law.sample(4, 7000 + trial).unwrap();
        let draws = standard_normal_draws(4000, 7100 + trial);
        let shift_a = 0.8 * pilot[0];
        let shift_b = shift_a + 0.5 * pilot[1];
        let mu = build_posterior(&draws, &mean_shift_potential(shift_a), &[0.0]).unwrap();
        let nu = build_posterior(&draws, &mean_shift_potential(shift_b), &[0.0]).unwrap();
        let c0 = 0.3 * pilot[2];
        let c1 = pilot[3];
        let check = qoi_bound_check(
            |d: &FunctionDraw| c0 + c1 * d.grid_values[0] + 0.2 * d.grid_values[0].powi(2),
            &mu,
            &nu,
        )
        .unwrap();
        if !check.holds {
            violations += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && within_budget(elapsed, Duration::from_secs(60));
    report(
        6,
        "quantity-of-interest bound on random triples",
        pass,
        &format!("{violations} violations over 50 trials in {elapsed:.2?}"),
    );
}

#[test]
fn acceptance_07_importance_sampling_vs_oracle() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for (trial, &dim) in [2usize, 4, 5, 7, 8].iter().enumerate() {
        let mut stream = StableParams::new(2.0, 0.0, 1.0, 0.0)
            .unwrap()
            .sample(dim * dim + 3 * dim, 7600 + trial as u64)
            .unwrap()
            .into_iter();
        let means: Vec<f64> = (0..dim).map(|_| 0.4 * stream.next().unwrap()).collect();
        let variances: Vec<f64> = (0..dim)
            .map(|_| 0.4 + 0.2 * stream.next().unwrap().abs().min(2.0))
            .collect();
        let mut entries = vec![0.0; dim * dim];
        for (i, e) in entries.iter_mut().enumerate() {
            let diag = i / dim == i % dim;
            *e = 0.25 * stream.next().unwrap() + if diag { 1.0 } else { 0.0 };
        }
        let y: Vec<f64> = (0..dim).map(|_| 0.6 * stream.next().unwrap()).collect();
        let spec = gaussian_spec(&means, &variances);
        let model = ForwardModel::from_row_major(dim, dim, &entries, "random problem").unwrap();
        let noise = NoiseModel::isotropic(dim, 1.0).unwrap();
        let potential = gaussian_potential(&model, &noise).unwrap();
        let draws = draw_prior_many_unchecked(&spec, 20_000, 7700 + trial as u64).unwrap();
        let post = build_posterior(&draws, &potential, &y).unwrap();
        let prior_cov =
            DMatrix::from_diagonal(&DVector::from_iterator(dim, variances.iter().copied()));
        let oracle = conjugate_posterior(&model, &means, &prior_cov, &noise, &y).unwrap();
        let mut worst_mean = 0.0f64;
        let mut worst_var = 0.0f64;
        for i in 0..dim {
            let coords: Vec<f64> = post.draws.iter().map(|d| d.coefficients[i]).collect();
            let (m, se) = post.mean_and_se(&coords).unwrap();
            worst_mean = worst_mean.max((m - oracle.posterior_mean[i]).abs() / se);
            let centred: Vec<f64> = coords.iter().map(|x| (x - m).powi(2)).collect();
            let (v, se_v) = post.mean_and_se(&centred).unwrap();
            worst_var = worst_var.max((v - oracle.posterior_covariance[(i, i)]).abs() / se_v);
        }
        pass &= worst_mean <= 3.0 && worst_var <= 3.0;
        detail.push_str(&format!(
            "d{dim}: mean z {worst_mean:.2} var z {worst_var:.2}; "
        ));
    }
    let spec = gaussian_spec(&[0.3], &[1.5]);
    let model = ForwardModel::from_row_major(1, 1, &[0.9], "scalar problem").unwrap();
    let noise = NoiseModel::isotropic(1, 0.5).unwrap();
    let potential = gaussian_potential(&model, &noise).unwrap();
    let draws = draw_prior_many_unchecked(&spec, 50_000, 7800).unwrap();
    let (z, se_z) = estimate_z(&draws, &potential, &[1.2]).unwrap();
    let z_exact = scalar_evidence(0.3, 1.5, 0.9, 0.5, 1.2);
    let z_score = (z - z_exact).abs() / se_z;
    let elapsed = start.elapsed();
    pass &= z_score <= 3.0 && within_budget(elapsed, Duration::from_secs(30));
    detail.push_str(&format!("scalar z-score {z_score:.2} in {elapsed:.2?}"));
    report(
        7,
        "posterior pipeline matches the conjugate oracle",
        pass,
        &detail,
    );
}

#[test]
fn acceptance_08_lipschitz_scan() {
    let start = Instant::now();
    let spec = gaussian_spec(&[0.0], &[2.0]);
    let model = ForwardModel::from_row_major(1, 1, &[1.0], "identity").unwrap();
    let noise = NoiseModel::isotropic(1, 2.0).unwrap();
    let potential = gaussian_potential(&model, &noise).unwrap();
    let draws = draw_prior_many_unchecked(&spec, 40_000, 820).unwrap();
    let steps = [0.4, 0.2, 0.1, 0.05];
    let scan =
        hellinger_lipschitz_scan(&draws, &potential, &[0.0], &[vec![1.0]], &steps, 1.0).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for (i, est) in scan.hellinger_values.iter().enumerate() {
        let exact = 1.0 - (-steps[i] * steps[i] / 32.0f64).exp();
        let gap = (est.value - exact).abs();
        pass &= gap <= 3.0 * est.std_error;
        detail.push_str(&format!("d{}: z {:.2}; ", steps[i], gap / est.std_error));
    }
    let fd_slope = (1.0 - (-0.4f64 * 0.4 / 32.0).exp()) / 0.4;
    let monotone = scan.ratios.windows(2).all(|w| w[1] <= w[0]);
    let elapsed = start.elapsed();
    pass &= scan.sup_ratio <= 1.1 * fd_slope
        && monotone
        && within_budget(elapsed, Duration::from_secs(60));
    detail.push_str(&format!(
        "sup_ratio {:.5} vs {:.5}, monotone {monotone}, {elapsed:.2?}",
        scan.sup_ratio,
        1.1 * fd_slope
    ));
    report(
        8,
        "data-continuity scan against the closed form",
        pass,
        &detail,
    );
}

#[test]
fn acceptance_09_chain_validity() {
    let start = Instant::now();
    let prior_spec = ExpansionSpec::new(
        1.0,
        vec![0.0; 2],
        SequenceSpec::Explicit {
            values: vec![1.0, 0.5],
        },
        SequenceSpec::Zero,
        BasisSpec::new(BasisFamily::Canonical, 2).unwrap(),
        2,
        1.0,
    )
    .unwrap();
    let cfg = ChainConfig {
        steps: 420_000,
        burn_in: 20_000,
        proposal: Proposal::CoefficientRw,
        rw_scale: 2.0,
        seed: 91,
    };
    let run = mh_sample(&prior_spec, &Potential::zero(), &[], &cfg).unwrap();
    let n = run.states.len() as f64;
    let bound = 1.36 / n.sqrt() + 0.01;
    let mut pass = true;
    let mut detail = String::new();
    for (j, scale) in [(0usize, 1.0f64), (1, 0.5)] {
        let series: Vec<f64> = run.states.iter().map(|s| s[j]).collect();
        let ks =
            ks_statistic(&series, |x| 0.5 + (x / scale).atan() / std::f64::consts::PI).unwrap();
        pass &= ks < bound;
        detail.push_str(&format!("prior coord {j} ks {ks:.5} < {bound:.5}; "));
    }

    let means = [0.3, -0.2];
    let variances = [1.0, 0.5];
    let spec = gaussian_spec(&means, &variances);
    let model = ForwardModel::from_row_major(2, 2, &[1.0, 0.4, 0.0, 0.8], "blur").unwrap();
    let noise = NoiseModel::isotropic(2, 0.25).unwrap();
    let potential = gaussian_potential(&model, &noise).unwrap();
    let y = [0.7, -0.3];
    let prior_cov = DMatrix::from_diagonal(&DVector::from_column_slice(&variances));
    let oracle = conjugate_posterior(&model, &means, &prior_cov, &noise, &y).unwrap();
    let cfg2 = ChainConfig {
        steps: 320_000,
        burn_in: 20_000,
        proposal: Proposal::CoefficientRw,
        rw_scale: 1.0,
        seed: 94,
    };
    let run2 = mh_sample(&spec, &potential, &y, &cfg2).unwrap();
    for j in 0..2 {
        let series: Vec<f64> = run2.states.iter().map(|s| s[j]).collect();
        let (m, var) = stable_bayes::stats::mean_var(&series);
        let se = (var / run2.ess_per_coordinate[j]).sqrt();
        let z = (m - oracle.posterior_mean[j]).abs() / se;
        pass &= z <= 3.0;
        detail.push_str(&format!("posterior coord {j} z {z:.2}; "));
    }
    let elapsed = start.elapsed();
    pass &= within_budget(elapsed, Duration::from_secs(120));
    detail.push_str(&format!("{elapsed:.2?}"));
    report(
        9,
        "chains target prior and conjugate posterior",
        pass,
        &detail,
    );
}

#[test]
fn acceptance_10_map_oracles() {
    let start = Instant::now();
    let dim = 3;
    let entries = [1.0, 0.2, 0.0, 0.1, 0.9, 0.3, 0.0, 0.2, 1.1];
    let model = ForwardModel::from_row_major(dim, dim, &entries, "tikhonov").unwrap();
    let noise = NoiseModel::isotropic(dim, 0.25).unwrap();
    let potential = gaussian_potential(&model, &noise).unwrap();
    let y = [1.0, 0.5, -0.3];
    let weight = 0.7;
    let basis = BasisSpec::new(BasisFamily::Canonical, dim).unwrap();
    let est = map_estimate(
        &potential,
        Regulariser::Quadratic { weight },
        &y,
        &[0.0; 3],
        &basis,
        1e-14,
    )
    .unwrap();
    let g = DMatrix::from_row_slice(dim, dim, &entries);
    let gram = g.transpose() * &g / 0.25 + DMatrix::identity(dim, dim) * weight;
    let rhs = g.transpose() * DVector::from_column_slice(&y) / 0.25;
    let exact = gram.cholesky().unwrap().solve(&rhs);
    let tik_err = est
        .iter()
        .zip(exact.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    let basis1 = BasisSpec::new(BasisFamily::Canonical, 1).unwrap();
    let model1 = ForwardModel::from_row_major(1, 1, &[1.3], "scalar").unwrap();
    let noise1 = NoiseModel::isotropic(1, 0.04).unwrap();
    let pot1 = gaussian_potential(&model1, &noise1).unwrap();
    let mut soft_err = 0.0f64;
    for (y0, lam) in [(0.9f64, 0.5f64), (0.012, 0.5), (-0.7, 0.3)] {
        let est = map_estimate(
            &pot1,
            Regulariser::OneNorm { weight: lam },
            &[y0],
            &[0.0],
            &basis1,
            1e-14,
        )
        .unwrap();
        let threshold = lam * 0.04 / (1.3 * 1.3);
        let centre = y0 / 1.3;
        let exact = centre.signum() * (centre.abs() - threshold).max(0.0);
        soft_err = soft_err.max((est[0] - exact).abs());
    }
    let elapsed = start.elapsed();
    let pass = tik_err < 1e-6 && soft_err < 1e-6 && within_budget(elapsed, Duration::from_secs(10));
    report(
        10,
        "map estimates match the closed forms",
        pass,
        &format!("tikhonov err {tik_err:.2e}, soft-threshold err {soft_err:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn acceptance_11_discretisation_invariance() {
    let start = Instant::now();
    let obs_count = 16;
    let width = 0.05;
    let sigma = 0.15;
    let data = observe_truth(obs_count, width, sigma, 1100).unwrap();
    let eval_points: Vec<f64> = (0..16).map(|k| (k as f64 + 0.5) / 16.0).collect();
    let observation = PhysicalObservation { data, eval_points };

    let cauchy = |n: usize| make_deconvolution_family(n, obs_count, width, sigma);
    let table = discretisation_invariance_study(
        &cauchy,
        &[16, 32, 64, 128],
        &observation,
        SummaryStatistic::Median,
        StudyEngine::Chain {
            steps: 1_000_000,
            burn_in: 500_000,
            rw_scale: 2.0,
            replicates: 24,
        },
        1101,
    )
    .unwrap();
    let coarse = relative_l2(&table[0].1, &table[1].1);
    let fine = relative_l2(&table[2].1, &table[3].1);

    let gaussian = |n: usize| gaussian_control_family(n, obs_count, width, sigma);
    let control = discretisation_invariance_study(
        &gaussian,
        &[32, 64, 128],
        &observation,
        SummaryStatistic::Median,
        StudyEngine::Importance { draws: 2 },
        1101,
    )
    .unwrap();
    let control_drifts: Vec<f64> = control
        .windows(2)
        .map(|w| relative_l2(&w[0].1, &w[1].1))
        .collect();
    let elapsed = start.elapsed();
    let pass = fine < coarse
        && control_drifts.iter().all(|d| *d < 0.05)
        && within_budget(elapsed, Duration::from_secs(600));
    report(
        11,
        "posterior summaries stabilise under refinement",
        pass,
        &format!(
            "cauchy drift 64->128 {fine:.4} < 16->32 {coarse:.4}; gaussian control drifts {:?}; {elapsed:.2?}",
            control_drifts
                .iter()
                .map(|d| format!("{d:.4}"))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn acceptance_12_cli_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_stable-bayes");
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/canonical.json");
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("golden/canonical_checksums.json");
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        let status = Command::new(bin)
            .args([
                "--config",
                config.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "mcmc",
            ])
            .status()
            .unwrap();
        assert!(status.success(), "canonical run failed");
    }
    let mut names: Vec<String> = std::fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    let mut pass = !names.is_empty();
    let mut checksums = std::collections::BTreeMap::new();
    for name in &names {
        let body_a = std::fs::read(out_a.join(name)).unwrap();
        let body_b = std::fs::read(out_b.join(name)).unwrap();
        pass &= body_a == body_b;
        checksums.insert(name.clone(), stable_bayes_cli::output::sha256_hex(&body_a));
    }
    let golden_detail = if golden_path.exists() {
        let golden: std::collections::BTreeMap<String, String> =
            serde_json::from_str(&std::fs::read_to_string(&golden_path).unwrap()).unwrap();
        pass &= golden == checksums;
        format!("golden match {}", golden == checksums)
    } else {
        pass = false;
        "golden checksums missing".to_string()
    };
    let elapsed = start.elapsed();
    report(
        12,
        "canonical cli runs are byte-identical",
        pass,
        &format!(
            "{} csv files identical; {golden_detail}; {elapsed:.2?}",
            names.len()
        ),
    );
}
