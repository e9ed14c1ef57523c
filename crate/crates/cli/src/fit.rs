use std::io::Write;

use serde::Serialize;
use tensorinf_core::inference::{
    default_holdout, entrywise_ci, estimate_lambda_sigma_pca, estimate_sigma, inverse_norms, orth_region_report,
    pca_region_report, regression_lambda_hat, regression_region_report, sigma_split_estimate, EntryFloor, EntryInterval,
    InferenceReport,
};
use tensorinf_core::io::{read_dataset, read_tensor};
use tensorinf_core::pca::{default_rank1_iterations, hooi, orth_init_deflation, orth_refine, pca_refine, rank1_power};
use tensorinf_core::regression::{loss_tucker, regression_two_step, sgd_init, SgdConfig};
use tensorinf_core::{Matrix, Mode, RankTriple};
use tensorinf_simlab::GENERATOR_ID;

use crate::args::{CommonFitArgs, FitCommand};
use crate::error::{CliError, CliResult};
use crate::output::{emit, json_bytes};
use crate::sim::parse_floor;

fn parse_ranks(s: &str) -> CliResult<RankTriple> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Result<Vec<usize>, _> = parts.iter().map(|x| x.parse::<usize>()).collect();
    match nums.as_deref() {
        Ok([r]) => Ok(RankTriple::uniform(*r)),
        Ok([a, b, c]) => Ok(RankTriple::new(*a, *b, *c)),
        _ => Err(CliError::argument(format!("invalid rank '{s}' (one value or r1,r2,r3)"))),
    }
}

fn parse_entry(s: &str) -> CliResult<(usize, usize, usize)> {
    let nums: Result<Vec<usize>, _> = s.split(',').map(|x| x.trim().parse::<usize>()).collect();
    match nums.as_deref() {
        Ok([i, j, k]) => Ok((*i, *j, *k)),
        _ => Err(CliError::argument(format!("invalid entry '{s}' (expected i,j,k)"))),
    }
}

fn check_sigma(sigma: Option<f64>) -> CliResult<()> {
    match sigma {
        Some(s) if !(s > 0.0 && s.is_finite()) => Err(CliError::argument(format!("sigma must be positive, got {s}"))),
        _ => Ok(()),
    }
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn column(m: &Matrix, j: usize) -> Vec<f64> {
    m.column(j).iter().copied().collect()
}

#[derive(Serialize)]
struct FitReport<C: Serialize, R: Serialize> {
    generator: &'static str,
    seed: u64,
    command: String,
    input: String,
    dims: [usize; 3],
    config: C,
    sigma_hat: f64,
    /// `estimated` or `given`.
    sigma_source: &'static str,
    result: R,
}

#[derive(Serialize)]
struct ModeRegion {
    mode: usize,
    lambda_hat: Vec<f64>,
    region: InferenceReport,
    factor: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct TuckerConfig {
    model: &'static str,
    r: [usize; 3],
    alpha: f64,
    sweeps: Option<usize>,
    n: Option<usize>,
    holdout: Option<usize>,
}

#[derive(Serialize)]
struct TuckerResult {
    modes: Vec<ModeRegion>,
    core: Vec<f64>,
    objective: f64,
}

#[derive(Serialize)]
struct OrthConfig {
    model: &'static str,
    r: usize,
    alpha: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct Component {
    index: usize,
    lambda_hat: f64,
    /// Lower region for the squared overlap `<u_hat, u>^2` in mode 1.
    region: InferenceReport,
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
}

#[derive(Serialize)]
struct OrthResult {
    components: Vec<Component>,
}

#[derive(Serialize)]
struct Rank1Config {
    model: &'static str,
    alpha: f64,
    iterations: usize,
    floor: EntryFloor,
    entries: Vec<[usize; 3]>,
}

#[derive(Serialize)]
struct EntryReport {
    index: [usize; 3],
    interval: EntryInterval,
}

#[derive(Serialize)]
struct Rank1Result {
    lambda_hat: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    entries: Vec<EntryReport>,
}

pub fn run(cmd: &FitCommand, stdout: &mut dyn Write) -> CliResult<()> {
    let (bytes, common) = match cmd {
        FitCommand::Pca { common, r, sweeps, sigma } => (fit_pca(common, r, *sweeps, *sigma)?, common),
        FitCommand::Orth { common, r, sigma } => (fit_orth(common, *r, *sigma)?, common),
        FitCommand::Rank1 { common, entries, iters, floor, sigma } => {
            (fit_rank1(common, entries, *iters, floor, *sigma)?, common)
        }
        FitCommand::Regression { common, r, holdout, sigma } => (fit_regression(common, r, *holdout, *sigma)?, common),
    };
    emit(&bytes, common.out.as_deref(), stdout)
}

fn fit_pca(common: &CommonFitArgs, r: &str, sweeps: usize, sigma: Option<f64>) -> CliResult<Vec<u8>> {
    check_sigma(sigma)?;
    let ranks = parse_ranks(r)?;
    let a = read_tensor(&common.input)?;
    let start = hooi(&a, ranks, sweeps.max(1))?;
    let fit = pca_refine(&a, &start.factors)?;
    let est = estimate_lambda_sigma_pca(&a, &fit.factors)?;
    let sigma_hat = sigma.unwrap_or(est.sigma_hat);
    let mut modes = Vec::new();
    for mode in Mode::ALL {
        let j = mode.index();
        let (f2, f) = inverse_norms(&est.lambda_hat[j])?;
        let region = pca_region_report(a.dim(mode), sigma_hat, f2, f, common.alpha)?
            .with_estimates(sigma_hat, &est.lambda_hat[j]);
        modes.push(ModeRegion {
            mode: j + 1,
            lambda_hat: est.lambda_hat[j].clone(),
            region,
            factor: rows(fit.factors.factor(mode)),
        });
    }
    let report = FitReport {
        generator: GENERATOR_ID,
        seed: common.seed,
        command: "fit pca".into(),
        input: common.input.display().to_string(),
        dims: a.dims(),
        config: TuckerConfig { model: "pca", r: ranks.0, alpha: common.alpha, sweeps: Some(sweeps.max(1)), n: None, holdout: None },
        sigma_hat,
        sigma_source: if sigma.is_some() { "given" } else { "estimated" },
        result: TuckerResult {
            modes,
            core: fit.factors.core.data().to_vec(),
            objective: fit.diagnostics.objective,
        },
    };
    json_bytes(&report)
}

fn fit_orth(common: &CommonFitArgs, r: usize, sigma: Option<f64>) -> CliResult<Vec<u8>> {
    check_sigma(sigma)?;
    let a = read_tensor(&common.input)?;
    let iterations = default_rank1_iterations(a.dims());
    let fit = orth_refine(&a, &orth_init_deflation(&a, r, iterations)?)?;
    let sigma_hat = match sigma {
        Some(s) => s,
        None => estimate_sigma(&a, [&fit.u, &fit.v, &fit.w])?,
    };
    let mut components = Vec::new();
    for j in 0..r {
        let region = orth_region_report(a.dim(Mode::One), sigma_hat, fit.lambdas[j], common.alpha)?
            .with_estimates(sigma_hat, &[fit.lambdas[j]]);
        components.push(Component {
            index: j + 1,
            lambda_hat: fit.lambdas[j],
            region,
            u: column(&fit.u, j),
            v: column(&fit.v, j),
            w: column(&fit.w, j),
        });
    }
    let report = FitReport {
        generator: GENERATOR_ID,
        seed: common.seed,
        command: "fit orth".into(),
        input: common.input.display().to_string(),
        dims: a.dims(),
        config: OrthConfig { model: "orth", r, alpha: common.alpha, iterations },
        sigma_hat,
        sigma_source: if sigma.is_some() { "given" } else { "estimated" },
        result: OrthResult { components },
    };
    json_bytes(&report)
}

fn fit_rank1(
    common: &CommonFitArgs,
    entries: &[String],
    iters: Option<usize>,
    floor: &str,
    sigma: Option<f64>,
) -> CliResult<Vec<u8>> {
    check_sigma(sigma)?;
    let floor = parse_floor(floor)?;
    let mut index: Vec<(usize, usize, usize)> = entries.iter().map(|e| parse_entry(e)).collect::<CliResult<_>>()?;
    if index.is_empty() {
        index.push((0, 0, 0));
    }
    let a = read_tensor(&common.input)?;
    let iterations = iters.unwrap_or_else(|| default_rank1_iterations(a.dims()));
    let fit = rank1_power(&a, iterations)?;
    let f = &fit.factors;
    let sigma_hat = match sigma {
        Some(s) => s,
        None => estimate_sigma(&a, [&f.u, &f.v, &f.w])?,
    };
    let mut reports = Vec::new();
    for &(i, j, k) in &index {
        let interval = entrywise_ci(&fit, sigma_hat, common.alpha, (i, j, k), floor)?;
        reports.push(EntryReport { index: [i, j, k], interval });
    }
    let report = FitReport {
        generator: GENERATOR_ID,
        seed: common.seed,
        command: "fit rank1".into(),
        input: common.input.display().to_string(),
        dims: a.dims(),
        config: Rank1Config {
            model: "rank1",
            alpha: common.alpha,
            iterations,
            floor,
            entries: index.iter().map(|&(i, j, k)| [i, j, k]).collect(),
        },
        sigma_hat,
        sigma_source: if sigma.is_some() { "given" } else { "estimated" },
        result: Rank1Result { lambda_hat: fit.lambda_hat, u: fit.u(), v: fit.v(), w: fit.w(), entries: reports },
    };
    json_bytes(&report)
}

fn fit_regression(common: &CommonFitArgs, r: &str, holdout: Option<usize>, sigma: Option<f64>) -> CliResult<Vec<u8>> {
    check_sigma(sigma)?;
    let ranks = parse_ranks(r)?;
    let data = read_dataset(&common.input)?;
    let n = data.n();
    let start = sgd_init(&data, ranks, &SgdConfig::default())?;
    let fit = regression_two_step(&data, &start.factors)?.factors;
    let (sigma_hat, holdout_used) = match sigma {
        Some(s) => (s, None),
        None => {
            let h = holdout.unwrap_or_else(|| default_holdout(data.dims()));
            if h == 0 || h >= n {
                return Err(CliError::argument(format!(
                    "holdout {h} leaves no observations to fit on (n = {n}); pass --holdout or --sigma"
                )));
            }
            let (_, rest) = data.split_at(h)?;
            let rest_start = sgd_init(&rest, ranks, &SgdConfig::default())?;
            let t_tilde = regression_two_step(&rest, &rest_start.factors)?.factors.reconstruct();
            (sigma_split_estimate(&data, h, &t_tilde)?, Some(h))
        }
    };
    let mut modes = Vec::new();
    for mode in Mode::ALL {
        let lambda_hat = regression_lambda_hat(&fit.core, mode);
        let (f2, f) = inverse_norms(&lambda_hat)?;
        let region = regression_region_report(data.dims()[mode.index()], n, sigma_hat, f2, f, common.alpha)?
            .with_estimates(sigma_hat, &lambda_hat);
        modes.push(ModeRegion { mode: mode.index() + 1, lambda_hat, region, factor: rows(fit.factor(mode)) });
    }
    let report = FitReport {
        generator: GENERATOR_ID,
        seed: common.seed,
        command: "fit regression".into(),
        input: common.input.display().to_string(),
        dims: data.dims(),
        config: TuckerConfig {
            model: "regression",
            r: ranks.0,
            alpha: common.alpha,
            sweeps: None,
            n: Some(n),
            holdout: holdout_used,
        },
        sigma_hat,
        sigma_source: if sigma.is_some() { "given" } else { "estimated" },
        result: TuckerResult { modes, core: fit.core.data().to_vec(), objective: loss_tucker(&fit, &data)? },
    };
    json_bytes(&report)
}
