//! One replicate of each experiment family.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tensorinf_core::inference::{
    default_holdout, entrywise_ci, entrywise_statistic, estimate_lambda_sigma_pca, estimate_sigma,
    fourth_power_norm, inverse_norms, orth_component_statistic, pca_confidence_region_radius, pca_subspace_statistic,
    rank1_linear_form_statistic, rank1_subgaussian_statistic, regression_lambda_hat, regression_statistic_and_region,
    sigma_split_estimate, z_alpha, EntryFloor, LinearFormQuery,
};
use tensorinf_core::pca::{default_rank1_iterations, hooi, orth_init_deflation, orth_refine, pca_refine, rank1_power, Rank1Fit};
use tensorinf_core::regression::{regression_two_step, sgd_init, SgdConfig};
use tensorinf_core::{match_components, sin_theta, Matrix, Mode, OrthFactors, RankTriple, Tensor3, TuckerFactors};

use crate::config::{ExperimentKind, InitMode, SimConfig, TruthMode};
use crate::error::{SimError, SimResult};
use crate::generate::{
    first_basis_vector, flat_vector, gen_observation, gen_orth_instance, gen_regression, gen_tucker_instance,
    perturb_frame, random_orthonormal,
};
use crate::rng::{substream, Stream};

/// HOOI sweeps used to produce the data-driven Tucker start before the
/// two refinement sweeps.
pub const SPECTRAL_INIT_SWEEPS: usize = 2;

/// Everything recorded for one replicate. Fields that do not apply to an
/// experiment stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Statistic standardized with the true noise level and signal strength.
    pub oracle: Option<f64>,
    /// The same statistic with estimated quantities plugged in.
    pub plug_in: Option<f64>,
    /// Unstandardized quantity (`||sinΘ||_F^2`, squared overlap, or entry error).
    pub raw: Option<f64>,
    /// Whether the plug-in region or interval contains the truth.
    pub covered: Option<bool>,
    /// `sigma_hat^2 / sigma^2`.
    pub sigma_ratio: Option<f64>,
    /// Largest spectral `sinΘ` between estimated and true factors.
    pub max_sin_theta: Option<f64>,
    /// Experiment-specific extras: the three linear-form values, the oracle
    /// `(center, scale)` of subspace statistics, or the fourth-power norms
    /// `(||v||_4^4, ||w||_4^4)` in the sub-Gaussian experiment.
    pub components: Option<Vec<f64>>,
    /// Matching of estimated to true components.
    pub permutation: Option<Vec<usize>>,
}

/// Runs replicate `index` of a resolved configuration.
pub fn run_replicate(config: &SimConfig, index: u64) -> SimResult<Outcome> {
    let truth_index = match config.truth {
        TruthMode::Redraw => index,
        TruthMode::Fixed => 0,
    };
    let mut streams = Streams {
        truth: substream(config.seed, truth_index, Stream::Truth),
        noise: substream(config.seed, index, Stream::Noise),
        init: substream(config.seed, index, Stream::Init),
        design: substream(config.seed, index, Stream::Design),
    };
    match config.kind {
        ExperimentKind::PcaNormal | ExperimentKind::PcaPlugin | ExperimentKind::CoverageSubspace => {
            tucker_pca(config, &mut streams)
        }
        ExperimentKind::Orth => orthogonal(config, &mut streams),
        ExperimentKind::Rank1Linear
        | ExperimentKind::Rank1Entry
        | ExperimentKind::CoverageEntry
        | ExperimentKind::Rank1Subgaussian => rank_one(config, &mut streams),
        ExperimentKind::Regression => regression(config, &mut streams),
    }
}

struct Streams {
    truth: ChaCha8Rng,
    noise: ChaCha8Rng,
    init: ChaCha8Rng,
    design: ChaCha8Rng,
}

fn perturbation(config: &SimConfig, default: f64) -> SimResult<Option<f64>> {
    match config.init {
        InitMode::Spectral => Ok(None),
        InitMode::OraclePerturbed { epsilon } => {
            let eps = epsilon.unwrap_or(default);
            if !(0.0..1.0).contains(&eps) {
                return Err(SimError::Config(format!(
                    "oracle init perturbation {eps:.4} is not below 1; raise gamma or pass an explicit epsilon"
                )));
            }
            Ok(Some(eps))
        }
    }
}

fn frame_distance(est: &Matrix, truth: &Matrix) -> SimResult<tensorinf_core::SubspaceDistance> {
    Ok(sin_theta(est, truth)?)
}

fn ratio(sigma_hat: f64, sigma: f64) -> Option<f64> {
    (sigma > 0.0).then(|| (sigma_hat / sigma).powi(2))
}

fn tucker_pca(config: &SimConfig, s: &mut Streams) -> SimResult<Outcome> {
    let (p, r, sigma) = (config.p, config.r, config.sigma);
    let truth = gen_tucker_instance(p, r, config.gamma, &mut s.truth)?;
    let a = gen_observation(&truth.reconstruct(), sigma, config.noise, &mut s.noise);
    let default_eps = (p as f64).sqrt() * sigma / truth.lambda_min();
    let init = match perturbation(config, default_eps)? {
        None => hooi(&a, RankTriple::uniform(r), SPECTRAL_INIT_SWEEPS)?.factors,
        Some(eps) => perturbed_tucker(&truth, eps, &mut s.init)?,
    };
    let fit = pca_refine(&a, &init)?.factors;

    let mut max_sin: f64 = 0.0;
    for mode in Mode::ALL {
        max_sin = max_sin.max(frame_distance(fit.factor(mode), truth.factor(mode))?.spectral);
    }
    let sin2 = frame_distance(&fit.factors[0], &truth.factors[0])?.frobenius.powi(2);
    let mut out = Outcome { raw: Some(sin2), max_sin_theta: Some(max_sin), ..Outcome::default() };

    if sigma > 0.0 {
        let (f2, f) = inverse_norms(&truth.mode_singular_values(Mode::One))?;
        let report = pca_subspace_statistic(sin2, p, sigma, f2, f, false)?;
        out.oracle = report.statistic;
        out.components = Some(vec![report.center, report.scale]);
    }
    let est = estimate_lambda_sigma_pca(&a, &fit)?;
    out.sigma_ratio = ratio(est.sigma_hat, sigma);
    if est.sigma_hat > 0.0 {
        let (f2, f) = inverse_norms(&est.lambda_hat[0])?;
        out.plug_in = pca_subspace_statistic(sin2, p, est.sigma_hat, f2, f, true)?.statistic;
        let radius = pca_confidence_region_radius(p, est.sigma_hat, f2, f, config.alpha)?;
        out.covered = (radius > 0.0).then_some(sin2 <= radius);
    }
    Ok(out)
}

fn perturbed_tucker(truth: &TuckerFactors, eps: f64, rng: &mut ChaCha8Rng) -> SimResult<TuckerFactors> {
    let f = &truth.factors;
    let frames = [perturb_frame(&f[0], eps, rng)?, perturb_frame(&f[1], eps, rng)?, perturb_frame(&f[2], eps, rng)?];
    Ok(TuckerFactors::new(truth.core.clone(), frames)?)
}

fn orthogonal(config: &SimConfig, s: &mut Streams) -> SimResult<Outcome> {
    let (p, r, sigma) = (config.p, config.r, config.sigma);
    let truth = gen_orth_instance(p, r, config.lambda(), &mut s.truth)?;
    let a = gen_observation(&truth.reconstruct(), sigma, config.noise, &mut s.noise);
    let default_eps = (p as f64).sqrt() * sigma / config.lambda();
    let init = match perturbation(config, default_eps)? {
        None => orth_init_deflation(&a, r, default_rank1_iterations(a.dims()))?,
        Some(eps) => OrthFactors::new(
            truth.lambdas.clone(),
            perturb_frame(&truth.u, eps, &mut s.init)?,
            perturb_frame(&truth.v, eps, &mut s.init)?,
            perturb_frame(&truth.w, eps, &mut s.init)?,
        )?,
    };
    let fit = orth_refine(&a, &init)?;
    let matched = match_components(&fit, &truth)?;
    let aligned = matched.align(&fit);

    let overlap = |mode: Mode, j: usize| aligned.factor(mode).column(j).dot(&truth.factor(mode).column(j));
    let mut max_sin: f64 = 0.0;
    for mode in Mode::ALL {
        for j in 0..r {
            let (e, t) = (aligned.factor(mode).column(j), truth.factor(mode).column(j));
            max_sin = max_sin.max(unit_sine(e.as_slice(), t.as_slice()));
        }
    }
    let c = config.component.unwrap_or(r) - 1;
    let overlap2 = overlap(Mode::One, c).powi(2);
    let mut out = Outcome {
        raw: Some(overlap2),
        max_sin_theta: Some(max_sin),
        permutation: Some(matched.permutation.clone()),
        ..Outcome::default()
    };
    if sigma > 0.0 {
        out.oracle = orth_component_statistic(overlap2, p, sigma, truth.lambdas[c], config.alpha, false)?.statistic;
    }
    let sigma_hat = estimate_sigma(&a, [&fit.u, &fit.v, &fit.w])?;
    out.sigma_ratio = ratio(sigma_hat, sigma);
    let lambda_hat = aligned.lambdas[c];
    if sigma_hat > 0.0 && lambda_hat > 0.0 {
        let report = orth_component_statistic(overlap2, p, sigma_hat, lambda_hat, config.alpha, true)?;
        out.plug_in = report.statistic;
        out.covered = report.radius.filter(|_| !report.degenerate).map(|t| overlap2 >= t);
    }
    Ok(out)
}

fn column(m: &Matrix) -> Vec<f64> {
    m.column(0).iter().copied().collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sine of the angle between unit vectors, from the residual `a - <a,b> b`
/// rather than `sqrt(1 - <a,b>^2)`, which bottoms out near 1.5e-8.
fn unit_sine(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b);
    a.iter().zip(b).map(|(x, y)| (x - c * y).powi(2)).sum::<f64>().sqrt().min(1.0)
}

fn rank_one(config: &SimConfig, s: &mut Streams) -> SimResult<Outcome> {
    let (p, sigma, lambda) = (config.p, config.sigma, config.lambda());
    let haar = |rng: &mut ChaCha8Rng| random_orthonormal(p, 1, rng);
    let (u, v, w) = match config.kind {
        ExperimentKind::Rank1Entry => (flat_vector(p), flat_vector(p), flat_vector(p)),
        ExperimentKind::Rank1Subgaussian if config.localized => {
            (haar(&mut s.truth)?, first_basis_vector(p), first_basis_vector(p))
        }
        _ => (haar(&mut s.truth)?, haar(&mut s.truth)?, haar(&mut s.truth)?),
    };
    let truth = OrthFactors::new(vec![lambda], u, v, w)?;
    let a = gen_observation(&truth.reconstruct(), sigma, config.noise, &mut s.noise);

    let fit = match perturbation(config, (p as f64).sqrt() * sigma / lambda)? {
        None => rank1_power(&a, default_rank1_iterations(a.dims()))?,
        Some(eps) => {
            let init = OrthFactors::new(
                vec![lambda],
                perturb_frame(&truth.u, eps, &mut s.init)?,
                perturb_frame(&truth.v, eps, &mut s.init)?,
                perturb_frame(&truth.w, eps, &mut s.init)?,
            )?;
            let refined = orth_refine(&a, &init)?;
            let lambda_hat = refined.lambdas[0];
            Rank1Fit { factors: refined, lambda_hat, updates: 2 }
        }
    };
    let est = [fit.u(), fit.v(), fit.w()];
    let tru = [column(&truth.u), column(&truth.v), column(&truth.w)];
    let sines: Vec<f64> = (0..3).map(|j| unit_sine(&est[j], &tru[j])).collect();
    let max_sin = sines.iter().copied().fold(0.0, f64::max);
    let sigma_hat = estimate_sigma(&a, [&fit.factors.u, &fit.factors.v, &fit.factors.w])?;
    let mut out = Outcome { max_sin_theta: Some(max_sin), sigma_ratio: ratio(sigma_hat, sigma), ..Outcome::default() };
    let usable = |sd: f64| sd > 0.0 && fit.lambda_hat > 0.0;

    match config.kind {
        ExperimentKind::Rank1Linear => {
            let query = |t: &[f64]| {
                let mut q: Vec<f64> = t.iter().map(|x| -x * t[0]).collect();
                q[0] += 1.0;
                let n = dot(&q, &q).sqrt();
                q.iter().map(|x| x / n).collect::<Vec<f64>>()
            };
            let queries = LinearFormQuery::new(query(&tru[0]), query(&tru[1]), query(&tru[2]))?;
            let truth_refs = [tru[0].as_slice(), tru[1].as_slice(), tru[2].as_slice()];
            out.raw = Some(dot(&queries.q[0], &est[0]));
            if sigma > 0.0 {
                let values = rank1_linear_form_statistic(&fit, truth_refs, &queries, lambda, sigma)?;
                out.oracle = Some(values[0]);
                out.components = Some(values.to_vec());
            }
            if usable(sigma_hat) {
                let values = rank1_linear_form_statistic(&fit, truth_refs, &queries, fit.lambda_hat, sigma_hat)?;
                out.plug_in = Some(values[0]);
                out.covered = Some(values[0].abs() <= z_alpha(config.alpha / 2.0)?);
            }
        }
        ExperimentKind::Rank1Entry | ExperimentKind::CoverageEntry => {
            let target = lambda * tru[0][0] * tru[1][0] * tru[2][0];
            out.raw = Some(fit.entry(0, 0, 0) - target);
            if sigma > 0.0 {
                out.oracle = Some(entrywise_statistic(&fit, target, sigma, (0, 0, 0)));
            }
            if usable(sigma_hat) {
                out.plug_in = Some(entrywise_statistic(&fit, target, sigma_hat, (0, 0, 0)));
                let floor = config.floor.unwrap_or(EntryFloor::LogP);
                let ci = entrywise_ci(&fit, sigma_hat, config.alpha, (0, 0, 0), floor)?;
                out.covered = Some(ci.contains(target));
            }
        }
        ExperimentKind::Rank1Subgaussian => {
            let sin2 = sines[0].powi(2);
            let (l4v, l4w) = (fourth_power_norm(&tru[1]), fourth_power_norm(&tru[2]));
            let nu = config.noise.kurtosis();
            out.raw = Some(sin2);
            out.components = Some(vec![l4v, l4w]);
            if 2.0 + (nu - 3.0) * l4v * l4w > 0.0 {
                if sigma > 0.0 {
                    out.oracle = rank1_subgaussian_statistic(sin2, p, lambda, sigma, nu, l4v, l4w)?.statistic;
                }
                if usable(sigma_hat) {
                    let (e4v, e4w) = (fourth_power_norm(&est[1]), fourth_power_norm(&est[2]));
                    out.plug_in = rank1_subgaussian_statistic(sin2, p, fit.lambda_hat, sigma_hat, nu, e4v, e4w)?.statistic;
                }
            }
        }
        _ => unreachable!("rank-one pipeline called for {}", config.kind),
    }
    Ok(out)
}

fn regression(config: &SimConfig, s: &mut Streams) -> SimResult<Outcome> {
    let (p, r, sigma) = (config.p, config.r, config.sigma);
    let n = config.n.ok_or_else(|| SimError::Config("regression needs a resolved sample size".into()))?;
    let truth = gen_tucker_instance(p, r, config.gamma, &mut s.truth)?;
    let t = truth.reconstruct();
    let data = gen_regression(&t, n, sigma, config.noise, &mut s.design, &mut s.noise)?;
    let default_eps = (p as f64 / n as f64).sqrt() * sigma / truth.lambda_min();
    let init = match perturbation(config, default_eps)? {
        None => sgd_init(&data, RankTriple::uniform(r), &SgdConfig::default())?.factors,
        Some(eps) => perturbed_tucker(&truth, eps, &mut s.init)?,
    };
    let fit = regression_two_step(&data, &init)?.factors;

    let mut max_sin: f64 = 0.0;
    for mode in Mode::ALL {
        max_sin = max_sin.max(frame_distance(fit.factor(mode), truth.factor(mode))?.spectral);
    }
    let sin2 = frame_distance(&fit.factors[0], &truth.factors[0])?.frobenius.powi(2);
    let mut out = Outcome { raw: Some(sin2), max_sin_theta: Some(max_sin), ..Outcome::default() };
    if sigma > 0.0 {
        let (f2, f) = inverse_norms(&truth.mode_singular_values(Mode::One))?;
        let report = regression_statistic_and_region(sin2, p, n, sigma, f2, f, config.alpha, false)?;
        out.oracle = report.statistic;
        out.components = Some(vec![report.center, report.scale]);
    }

    // noise level from held-out observations, with the estimate refit on the rest
    let holdout = default_holdout(data.dims());
    if holdout < n {
        let (_, rest) = data.split_at(holdout)?;
        let t_tilde: Tensor3 = regression_two_step(&rest, &init)?.factors.reconstruct();
        let sigma_hat = sigma_split_estimate(&data, holdout, &t_tilde)?;
        out.sigma_ratio = ratio(sigma_hat, sigma);
        let lambda_hat = regression_lambda_hat(&fit.core, Mode::One);
        if sigma_hat > 0.0 {
            let (f2, f) = inverse_norms(&lambda_hat)?;
            let report = regression_statistic_and_region(sin2, p, n, sigma_hat, f2, f, config.alpha, true)?;
            out.plug_in = report.statistic;
            out.covered = report.radius.filter(|&x| x > 0.0).map(|x| sin2 <= x);
        }
    }
    Ok(out)
}

