//! Low-rank tensor regression `Y_i = <T, X_i> + xi_i`: loss, exact block
//! solvers, two-iteration alternating minimization and a gradient-descent
//! initializer.

use serde::{Deserialize, Serialize};

use crate::error::{arg, numeric, Result};
use crate::factors::TuckerFactors;
use crate::linalg::{least_squares, top_left_singular};
use crate::pca::hooi;
use crate::tensor::{matricize, multilinear_product, project_core, project_except, Matrix, Mode, RankTriple, Tensor3};

/// Condition-number ceiling for the linear subproblems.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    pub covariates: Vec<Tensor3>,
    pub responses: Vec<f64>,
    pub sigma: Option<f64>,
}

impl RegressionDataset {
    pub fn new(covariates: Vec<Tensor3>, responses: Vec<f64>, sigma: Option<f64>) -> Result<Self> {
        if covariates.is_empty() {
            return arg("a regression dataset needs at least one observation");
        }
        if covariates.len() != responses.len() {
            return arg(format!(
                "{} covariates but {} responses",
                covariates.len(),
                responses.len()
            ));
        }
        let dims = covariates[0].dims();
        if let Some(i) = covariates.iter().position(|x| x.dims() != dims) {
            return arg(format!("covariate {i} has dims {:?}, expected {dims:?}", covariates[i].dims()));
        }
        if responses.iter().any(|y| !y.is_finite()) {
            return numeric("non-finite response");
        }
        if let Some(s) = sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return arg(format!("noise level must be finite and nonnegative, got {s}"));
            }
        }
        Ok(RegressionDataset { covariates, responses, sigma })
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn dims(&self) -> [usize; 3] {
        self.covariates[0].dims()
    }

    /// First `k` observations and the rest, as two datasets.
    pub fn split_at(&self, k: usize) -> Result<(RegressionDataset, RegressionDataset)> {
        if k == 0 || k >= self.n() {
            return arg(format!("cannot split {} observations at {k}", self.n()));
        }
        let head = RegressionDataset {
            covariates: self.covariates[..k].to_vec(),
            responses: self.responses[..k].to_vec(),
            sigma: self.sigma,
        };
        let tail = RegressionDataset {
            covariates: self.covariates[k..].to_vec(),
            responses: self.responses[k..].to_vec(),
            sigma: self.sigma,
        };
        Ok((head, tail))
    }

    fn check_dims(&self, dims: [usize; 3]) -> Result<()> {
        if self.dims() != dims {
            return arg(format!("dataset dims {:?} do not match {dims:?}", self.dims()));
        }
        Ok(())
    }

    /// `Y_i - <X_i, t>` for every observation.
    pub fn residuals(&self, t: &Tensor3) -> Result<Vec<f64>> {
        self.check_dims(t.dims())?;
        self.covariates
            .iter()
            .zip(&self.responses)
            .map(|(x, y)| Ok(y - x.inner(t)?))
            .collect()
    }
}

/// `(1/n) sum_i (Y_i - <X_i, t>)^2`.
pub fn loss(t: &Tensor3, data: &RegressionDataset) -> Result<f64> {
    let r = data.residuals(t)?;
    Ok(r.iter().map(|e| e * e).sum::<f64>() / data.n() as f64)
}

pub fn loss_tucker(t: &TuckerFactors, data: &RegressionDataset) -> Result<f64> {
    loss(&t.reconstruct(), data)
}

fn check_frames(data: &RegressionDataset, factors: [&Matrix; 3]) -> Result<()> {
    let dims = data.dims();
    for mode in Mode::ALL {
        let u = factors[mode.index()];
        if u.nrows() != dims[mode.index()] {
            return arg(format!(
                "factor {mode} has {} rows, dataset dimension is {}",
                u.nrows(),
                dims[mode.index()]
            ));
        }
    }
    Ok(())
}

/// Least-squares core with the factors held fixed.
pub fn solve_core(data: &RegressionDataset, factors: [&Matrix; 3]) -> Result<Tensor3> {
    check_frames(data, factors)?;
    let ranks = factors.map(|u| u.ncols());
    let k: usize = ranks.iter().product();
    let n = data.n();
    if n < k {
        return numeric(format!(
            "core solve needs at least {k} observations, have {n}; increase the sample size"
        ));
    }
    let mut design = Matrix::zeros(n, k);
    for (i, x) in data.covariates.iter().enumerate() {
        let proj = project_core(x, factors[0], factors[1], factors[2])?;
        design.row_mut(i).copy_from_slice(proj.data());
    }
    let g = least_squares(&design, &data.responses, MAX_CONDITION)?;
    Tensor3::from_vec(ranks, g)
}

/// Both stages of a factor update.
#[derive(Debug, Clone)]
pub struct FactorSolve {
    /// Unconstrained minimizer of the loss in the mode factor.
    pub unconstrained: Matrix,
    /// Its top `r_j` left singular vectors.
    pub frame: Matrix,
}

/// Solves for the mode-`mode` factor with the core and the two other factors
/// fixed (`others` in increasing mode order), then projects to an orthonormal
/// frame.
pub fn solve_factor(
    data: &RegressionDataset,
    mode: Mode,
    core: &Tensor3,
    others: [&Matrix; 2],
) -> Result<FactorSolve> {
    let (m1, m2) = mode.others();
    let dims = data.dims();
    for (m, u) in [(m1, others[0]), (m2, others[1])] {
        if u.nrows() != dims[m.index()] || u.ncols() != core.dim(m) {
            return arg(format!(
                "factor {m} is {}x{}, expected {}x{}",
                u.nrows(),
                u.ncols(),
                dims[m.index()],
                core.dim(m)
            ));
        }
    }
    let p = dims[mode.index()];
    let r = core.dim(mode);
    let k = p * r;
    let n = data.n();
    if n < k {
        return numeric(format!(
            "factor {mode} solve needs at least {k} observations, have {n}; increase the sample size"
        ));
    }
    // <X, U G_j (U_l ⊗ U_m)^T> = <M_j(X ×_l U_l^T ×_m U_m^T) G_j^T, U>.
    let gj_t = matricize(core, mode).transpose();
    let mut design = Matrix::zeros(n, k);
    for (i, x) in data.covariates.iter().enumerate() {
        let proj = project_except(x, mode, others[0], others[1])?;
        let row = matricize(&proj, mode) * &gj_t;
        // row-major flattening of the p x r coefficient
        for a in 0..p {
            for b in 0..r {
                design[(i, a * r + b)] = row[(a, b)];
            }
        }
    }
    let sol = least_squares(&design, &data.responses, MAX_CONDITION)?;
    let unconstrained = Matrix::from_row_slice(p, r, &sol);
    let frame = top_left_singular(&unconstrained, r)?.vectors;
    Ok(FactorSolve { unconstrained, frame })
}

#[derive(Debug, Clone)]
pub struct RegressionFit {
    /// Final factors and the core re-solved at them.
    pub factors: TuckerFactors,
    /// Core solved at the initial factors.
    pub initial_core: Tensor3,
}

/// Two iterations of alternating minimization. The core of `init` is ignored:
/// it is re-solved at the initial factors. Within an iteration every factor
/// solve uses the previous iteration's factors and core; the core is then
/// re-solved at the new factors.
pub fn regression_two_step(data: &RegressionDataset, init: &TuckerFactors) -> Result<RegressionFit> {
    init.check_conforms(data.dims())?;
    let mut u = init.factors.clone();
    let initial_core = solve_core(data, [&u[0], &u[1], &u[2]])?;
    let mut g = initial_core.clone();
    for _ in 0..2 {
        let prev = u.clone();
        for mode in Mode::ALL {
            let (m1, m2) = mode.others();
            let solved = solve_factor(data, mode, &g, [&prev[m1.index()], &prev[m2.index()]])?;
            u[mode.index()] = solved.frame;
        }
        g = solve_core(data, [&u[0], &u[1], &u[2]])?;
    }
    Ok(RegressionFit { factors: TuckerFactors::new(g, u)?, initial_core })
}

/// Tuning for [`sgd_init`]. `None` selects a data-driven default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    /// Weight of the balance penalty `a U (U^T U - b^2 I)`.
    pub a: f64,
    /// Balance scale; defaults to `||T_0||_F^{1/4}` of the warm start.
    pub b: Option<f64>,
    /// Step size; defaults to `0.2 / (2 s^2 b^6 + a b^2)` with `s^2` the mean
    /// squared design entry.
    pub eta: Option<f64>,
    pub t_max: usize,
    /// HOOI sweeps for the warm start.
    pub warm_start_sweeps: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { a: 1.0, b: None, eta: None, t_max: 200, warm_start_sweeps: 5 }
    }
}

#[derive(Debug, Clone)]
pub struct SgdFit {
    pub factors: TuckerFactors,
    pub b: f64,
    pub eta: f64,
    pub initial_loss: f64,
    pub final_loss: f64,
}

/// `(1/n) sum_i Y_i X_i`.
pub fn moment_tensor(data: &RegressionDataset) -> Tensor3 {
    let mut acc = Tensor3::zeros(data.dims());
    for (x, y) in data.covariates.iter().zip(&data.responses) {
        acc.axpy(*y, x).expect("shared dims");
    }
    acc.scaled(1.0 / data.n() as f64)
}

/// Simultaneous gradient descent on factors and core from a HOOI warm start,
/// then re-extraction of orthonormal factors from the final reconstruction.
pub fn sgd_init(data: &RegressionDataset, ranks: RankTriple, config: &SgdConfig) -> Result<SgdFit> {
    ranks.validate_for(data.dims())?;
    if !(config.a > 0.0) || config.t_max == 0 || config.warm_start_sweeps == 0 {
        return arg("sgd config needs a > 0, t_max >= 1 and at least one warm-start sweep");
    }
    if let Some(b) = config.b {
        if !(b > 0.0 && b.is_finite()) {
            return arg(format!("balance scale b must be positive, got {b}"));
        }
    }
    if let Some(eta) = config.eta {
        if !(eta >= 0.0 && eta.is_finite()) {
            return arg(format!("step size must be nonnegative, got {eta}"));
        }
    }
    let warm = hooi(&moment_tensor(data), ranks, config.warm_start_sweeps)?.factors;
    let t0 = warm.reconstruct().frobenius_norm();
    let b = config.b.unwrap_or_else(|| if t0 > 0.0 { t0.powf(0.25) } else { 1.0 });
    let s2 = data.covariates.iter().map(|x| x.frobenius_norm().powi(2)).sum::<f64>()
        / (data.n() * data.covariates[0].len()) as f64;
    let a = config.a;
    let eta = config.eta.unwrap_or(0.2 / (2.0 * s2 * b.powi(6) + a * b * b));

    let mut u: [Matrix; 3] = warm.factors.clone().map(|f| f * b);
    let mut g = warm.core.scaled(b.powi(-3));
    let n = data.n() as f64;
    let mut t = multilinear_product(&g, &u[0], &u[1], &u[2])?;
    let initial_loss = loss(&t, data)?;
    let limit = 1e6 * initial_loss.max(f64::MIN_POSITIVE);
    for _ in 0..config.t_max {
        let resid = data.residuals(&t)?;
        // gradient of the loss with respect to the full tensor
        let mut d = Tensor3::zeros(data.dims());
        for (x, e) in data.covariates.iter().zip(&resid) {
            d.axpy(-2.0 * e / n, x)?;
        }
        let mut next = u.clone();
        for mode in Mode::ALL {
            let (m1, m2) = mode.others();
            let proj = project_except(&d, mode, &u[m1.index()], &u[m2.index()])?;
            let grad = matricize(&proj, mode) * matricize(&g, mode).transpose();
            let uj = &u[mode.index()];
            let gram = uj.transpose() * uj - Matrix::identity(uj.ncols(), uj.ncols()) * (b * b);
            let penalty = uj * gram * a;
            next[mode.index()] = uj - (grad + penalty) * eta;
        }
        let grad_g = project_core(&d, &u[0], &u[1], &u[2])?;
        g.axpy(-eta, &grad_g)?;
        u = next;
        t = multilinear_product(&g, &u[0], &u[1], &u[2])?;
        let l = loss(&t, data)?;
        if !(l <= limit) {
            return numeric(format!(
                "gradient descent diverged (loss {l:.3e} from {initial_loss:.3e}); use a smaller eta"
            ));
        }
    }
    let final_loss = loss(&t, data)?;
    let mut frames: [Matrix; 3] = Default::default();
    for mode in Mode::ALL {
        frames[mode.index()] = top_left_singular(&matricize(&t, mode), ranks.get(mode))?.vectors;
    }
    let core = project_core(&t, &frames[0], &frames[1], &frames[2])?;
    Ok(SgdFit { factors: TuckerFactors::new(core, frames)?, b, eta, initial_loss, final_loss })
}
