//! Standardized statistics, plug-in estimates and confidence sets for the
//! estimators in [`crate::pca`] and [`crate::regression`].

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{arg, Result};
use crate::factors::TuckerFactors;
use crate::linalg::{qr_orthonormalize, singular_values, top_left_singular};
use crate::pca::Rank1Fit;
use crate::regression::RegressionDataset;
use crate::tensor::{dot, matricize, multilinear_product, project_core, project_except, Matrix, Mode, Tensor3};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse standard normal CDF.
///
/// Acklam's rational approximation (relative error about 1.15e-9) followed by
/// one Halley step against the erfc-based CDF, which brings the error to the
/// level of double rounding over `(1e-300, 1 - 1e-16)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return arg(format!("normal quantile needs a probability in (0, 1), got {p}"));
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    Ok(x - u / (1.0 + x * u / 2.0))
}

/// Upper-tail quantile `z_alpha = Phi^{-1}(1 - alpha)`.
pub fn z_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(-normal_quantile(alpha)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return arg(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Gaussian,
    Subgaussian,
}

/// Noise level and kurtosis `nu = E[Z^4] / sigma^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub nu: f64,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, sigma, 3.0)
    }

    pub fn new(kind: NoiseKind, sigma: f64, nu: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return arg(format!("sigma must be positive, got {sigma}"));
        }
        match kind {
            NoiseKind::Gaussian if nu != 3.0 => arg("gaussian noise has kurtosis 3"),
            _ if !(nu >= 1.0 && nu.is_finite()) => arg(format!("kurtosis must be at least 1, got {nu}")),
            _ => Ok(NoiseModel { kind, sigma, nu }),
        }
    }
}

/// A standardized statistic together with the parts it was built from.
///
/// `statistic = (raw - center) / scale` whenever `raw` is known and the scale
/// is not degenerate. `radius` is the region boundary for `raw` at level
/// `alpha`: an upper bound for `sinΘ` statistics and a lower bound for
/// squared overlaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub statistic: Option<f64>,
    pub raw: Option<f64>,
    pub center: f64,
    pub scale: f64,
    pub radius: Option<f64>,
    pub alpha: Option<f64>,
    pub plug_in: bool,
    pub sigma_hat: Option<f64>,
    pub lambda_hat: Vec<f64>,
    /// Set when the scale underflowed to zero and no statistic is defined.
    pub degenerate: bool,
}

impl InferenceReport {
    fn build(raw: Option<f64>, center: f64, scale: f64, plug_in: bool) -> Self {
        let degenerate = !(scale > 0.0);
        let statistic = match raw {
            Some(x) if !degenerate => Some((x - center) / scale),
            _ => None,
        };
        InferenceReport {
            statistic,
            raw,
            center,
            scale,
            radius: None,
            alpha: None,
            plug_in,
            sigma_hat: None,
            lambda_hat: Vec::new(),
            degenerate,
        }
    }

    /// Records the estimates used for a plug-in report.
    pub fn with_estimates(mut self, sigma_hat: f64, lambda_hat: &[f64]) -> Self {
        self.sigma_hat = Some(sigma_hat);
        self.lambda_hat = lambda_hat.to_vec();
        self
    }

    /// Upper region boundary `center + z_alpha * scale`.
    pub fn with_upper_region(mut self, alpha: f64) -> Result<Self> {
        self.radius = Some(self.center + z_alpha(alpha)? * self.scale);
        self.alpha = Some(alpha);
        Ok(self)
    }

    /// Lower region boundary `center - z_alpha * scale`.
    pub fn with_lower_region(mut self, alpha: f64) -> Result<Self> {
        self.radius = Some(self.center - z_alpha(alpha)? * self.scale);
        self.alpha = Some(alpha);
        Ok(self)
    }
}

/// `(||L^{-1}||_F^2, ||L^{-2}||_F)` for the diagonal `L = diag(lambdas)`.
pub fn inverse_norms(lambdas: &[f64]) -> Result<(f64, f64)> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return arg(format!("singular values must be positive and finite, got {lambdas:?}"));
    }
    let inv_f2 = lambdas.iter().map(|l| l.powi(-2)).sum();
    let inv2_f = lambdas.iter().map(|l| l.powi(-4)).sum::<f64>().sqrt();
    Ok((inv_f2, inv2_f))
}

/// Plug-in singular values and noise level for a Tucker fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaPlugIn {
    pub lambda_hat: [Vec<f64>; 3],
    pub sigma_hat: f64,
}

/// `Lambda_hat_j` = top `r_j` singular values of `M_j(A ×_{j+1} U_{j+1}^T ×_{j+2} U_{j+2}^T)`;
/// `sigma_hat = ||A - A ×1 P1 ×2 P2 ×3 P3||_F / sqrt(p1 p2 p3)`.
pub fn estimate_lambda_sigma_pca(a: &Tensor3, fit: &TuckerFactors) -> Result<PcaPlugIn> {
    fit.check_conforms(a.dims())?;
    let f = &fit.factors;
    let mut lambda_hat: [Vec<f64>; 3] = Default::default();
    for mode in Mode::ALL {
        let (m1, m2) = mode.others();
        let proj = project_except(a, mode, &f[m1.index()], &f[m2.index()])?;
        lambda_hat[mode.index()] = top_left_singular(&matricize(&proj, mode), f[mode.index()].ncols())?.values;
    }
    let sigma_hat = estimate_sigma(a, [&f[0], &f[1], &f[2]])?;
    Ok(PcaPlugIn { lambda_hat, sigma_hat })
}

/// Residuals smaller than this fraction of the data norm are rounding error
/// and count as an exact fit.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// Residual noise level after projecting onto the given frames. Frames are
/// orthonormalized first, so approximately orthogonal component matrices may
/// be passed directly. Returns exactly 0 when the residual is below
/// [`RESIDUAL_FLOOR`] relative to `||A||_F`.
pub fn estimate_sigma(a: &Tensor3, frames: [&Matrix; 3]) -> Result<f64> {
    let q = frames.map(qr_orthonormalize);
    let core = project_core(a, &q[0], &q[1], &q[2])?;
    let fitted = multilinear_product(&core, &q[0], &q[1], &q[2])?;
    let resid = a.sub(&fitted)?.frobenius_norm();
    if resid <= RESIDUAL_FLOOR * a.frobenius_norm() {
        return Ok(0.0);
    }
    Ok(resid / (a.len() as f64).sqrt())
}

fn check_dim(p: usize) -> Result<()> {
    if p == 0 {
        return arg("dimension must be positive");
    }
    Ok(())
}

fn subspace_report(
    sin2_frob: Option<f64>,
    p: usize,
    noise_var: f64,
    inv_f2: f64,
    inv2_f: f64,
    plug_in: bool,
) -> Result<InferenceReport> {
    check_dim(p)?;
    let center = p as f64 * noise_var * inv_f2;
    let scale = (2.0 * p as f64).sqrt() * noise_var * inv2_f;
    if !(scale > 0.0 && scale.is_finite()) {
        return arg(format!("statistic scale must be positive, got {scale}"));
    }
    Ok(InferenceReport::build(sin2_frob, center, scale, plug_in))
}

/// `(||sinΘ||_F^2 - p sigma^2 ||L^{-1}||_F^2) / (sqrt(2p) sigma^2 ||L^{-2}||_F)`.
pub fn pca_subspace_statistic(
    sin2_frob: f64,
    p: usize,
    sigma: f64,
    lambda_inv_f2: f64,
    lambda_inv2_f: f64,
    plug_in: bool,
) -> Result<InferenceReport> {
    subspace_report(Some(sin2_frob), p, sigma * sigma, lambda_inv_f2, lambda_inv2_f, plug_in)
}

/// Radius for `||sinΘ(U_hat, V)||_F^2` of the level `1 - alpha` region.
pub fn pca_confidence_region_radius(
    p: usize,
    sigma_hat: f64,
    lambda_hat_inv_f2: f64,
    lambda_hat_inv2_f: f64,
    alpha: f64,
) -> Result<f64> {
    let report = pca_region_report(p, sigma_hat, lambda_hat_inv_f2, lambda_hat_inv2_f, alpha)?;
    Ok(report.radius.expect("region set"))
}

/// Plug-in subspace region without a statistic, for data where the truth is unknown.
pub fn pca_region_report(
    p: usize,
    sigma_hat: f64,
    lambda_hat_inv_f2: f64,
    lambda_hat_inv2_f: f64,
    alpha: f64,
) -> Result<InferenceReport> {
    check_alpha(alpha)?;
    subspace_report(None, p, sigma_hat * sigma_hat, lambda_hat_inv_f2, lambda_hat_inv2_f, true)?.with_upper_region(alpha)
}

/// Regression counterpart of [`pca_region_report`] with `sigma_hat^2 / n`.
pub fn regression_region_report(
    p: usize,
    n: usize,
    sigma_hat: f64,
    lambda_hat_inv_f2: f64,
    lambda_hat_inv2_f: f64,
    alpha: f64,
) -> Result<InferenceReport> {
    if n == 0 {
        return arg("sample size must be positive");
    }
    check_alpha(alpha)?;
    let var = sigma_hat * sigma_hat / n as f64;
    subspace_report(None, p, var, lambda_hat_inv_f2, lambda_hat_inv2_f, true)?.with_upper_region(alpha)
}

/// Region `<u_hat, v>^2 >= radius` for one orthogonal component, from plug-in estimates.
pub fn orth_region_report(p: usize, sigma_hat: f64, lambda_hat: f64, alpha: f64) -> Result<InferenceReport> {
    check_dim(p)?;
    check_alpha(alpha)?;
    if !(lambda_hat > 0.0) {
        return arg(format!("lambda must be positive, got {lambda_hat}"));
    }
    let ratio = sigma_hat * sigma_hat / (lambda_hat * lambda_hat);
    let center = 1.0 - p as f64 * ratio;
    let scale = (2.0 * p as f64).sqrt() * ratio;
    InferenceReport::build(None, center, scale, true).with_lower_region(alpha)
}

/// Regression analogue of the PCA statistic with `sigma^2` replaced by `sigma^2 / n`.
#[allow(clippy::too_many_arguments)]
pub fn regression_statistic_and_region(
    sin2_frob: f64,
    p: usize,
    n: usize,
    sigma: f64,
    lambda_inv_f2: f64,
    lambda_inv2_f: f64,
    alpha: f64,
    plug_in: bool,
) -> Result<InferenceReport> {
    if n == 0 {
        return arg("sample size must be positive");
    }
    subspace_report(Some(sin2_frob), p, sigma * sigma / n as f64, lambda_inv_f2, lambda_inv2_f, plug_in)?
        .with_upper_region(alpha)
}

/// Singular values of `M_j(G_hat)` used as the plug-in `Lambda_hat_j` for regression.
pub fn regression_lambda_hat(core: &Tensor3, mode: Mode) -> Vec<f64> {
    let mut s = singular_values(&matricize(core, mode));
    s.truncate(core.dim(mode));
    s
}

/// `ceil(p^{3/2})` with `p` the largest dimension.
pub fn default_holdout(dims: [usize; 3]) -> usize {
    let p = *dims.iter().max().expect("three dims") as f64;
    p.powf(1.5).ceil() as usize
}

/// Noise level from the first `holdout` observations:
/// `sigma_hat^2 = (1/holdout) sum_k (Y_k - <t_tilde, X_k>)^2`, where `t_tilde`
/// must have been fit without those observations.
pub fn sigma_split_estimate(data: &RegressionDataset, holdout: usize, t_tilde: &Tensor3) -> Result<f64> {
    if holdout == 0 || holdout > data.n() {
        return arg(format!("holdout must be in 1..={}, got {holdout}", data.n()));
    }
    let mut acc = 0.0;
    let mut scale = 0.0;
    for (x, y) in data.covariates[..holdout].iter().zip(&data.responses) {
        if x.dims() != t_tilde.dims() {
            return arg(format!("estimate dims {:?} do not match data {:?}", t_tilde.dims(), x.dims()));
        }
        let e = y - x.inner(t_tilde)?;
        acc += e * e;
        scale += y * y;
    }
    if acc <= RESIDUAL_FLOOR * RESIDUAL_FLOOR * scale {
        return Ok(0.0);
    }
    Ok((acc / holdout as f64).sqrt())
}

/// `(<u_hat, u>^2 - (1 - p sigma^2 / lambda^2)) / (sqrt(2p) sigma^2 / lambda^2)`,
/// with the lower region threshold `center - z_alpha * scale`.
pub fn orth_component_statistic(
    overlap2: f64,
    p: usize,
    sigma: f64,
    lambda: f64,
    alpha: f64,
    plug_in: bool,
) -> Result<InferenceReport> {
    check_dim(p)?;
    if !(lambda > 0.0) {
        return arg(format!("lambda must be positive, got {lambda}"));
    }
    let ratio = sigma * sigma / (lambda * lambda);
    let center = 1.0 - p as f64 * ratio;
    let scale = (2.0 * p as f64).sqrt() * ratio;
    InferenceReport::build(Some(overlap2), center, scale, plug_in).with_lower_region(alpha)
}

/// Unit query vectors for the linear-form statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFormQuery {
    pub q: [Vec<f64>; 3],
}

impl LinearFormQuery {
    pub fn new(q1: Vec<f64>, q2: Vec<f64>, q3: Vec<f64>) -> Result<Self> {
        for (j, q) in [&q1, &q2, &q3].into_iter().enumerate() {
            let n = dot(q, q).sqrt();
            if (n - 1.0).abs() > 1e-10 {
                return arg(format!("query vector {} has norm {n}, expected 1", j + 1));
            }
        }
        Ok(LinearFormQuery { q: [q1, q2, q3] })
    }
}

/// Studentized `<q, u_hat - u>` for one mode with `snr = lambda / sigma`.
/// `u_hat` is sign-aligned with `u` first.
pub fn linear_form_value(q: &[f64], u_hat: &[f64], u: &[f64], snr: f64) -> Result<f64> {
    if q.len() != u.len() || u_hat.len() != u.len() {
        return arg("query, estimate and truth must have equal lengths");
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return arg(format!("signal-to-noise ratio must be positive, got {snr}"));
    }
    let sign = if dot(u_hat, u) < 0.0 { -1.0 } else { 1.0 };
    let p = u.len() as f64;
    let qu = dot(q, u);
    let q_diff: f64 = q.iter().zip(u_hat.iter().zip(u)).map(|(qi, (a, b))| qi * (sign * a - b)).sum();
    let snr2 = snr * snr;
    let num = q_diff + p * qu / (2.0 * snr2);
    let den = (p * qu * qu / (2.0 * snr2 * snr2) + (1.0 - qu * qu) / snr2).sqrt();
    Ok(num / den)
}

/// The three linear-form statistics for a rank-one fit.
pub fn rank1_linear_form_statistic(
    fit: &Rank1Fit,
    truth: [&[f64]; 3],
    query: &LinearFormQuery,
    lambda: f64,
    sigma: f64,
) -> Result<[f64; 3]> {
    let snr = lambda / sigma;
    let est = [fit.u(), fit.v(), fit.w()];
    let mut out = [0.0; 3];
    for j in 0..3 {
        out[j] = linear_form_value(&query.q[j], &est[j], truth[j], snr)?;
    }
    Ok(out)
}

/// Lower threshold applied to squared loadings in the entrywise interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryFloor {
    /// `log(p) sigma^2 / lambda_hat^2` with `p` the largest dimension.
    LogP,
    /// A fixed floor.
    Fixed(f64),
    /// No thresholding.
    Off,
}

/// `s(t) = max(t, floor)`.
pub fn threshold(t: f64, floor: f64) -> f64 {
    t.max(floor)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntryInterval {
    pub estimate: f64,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
    /// Half-width with the floor switched off.
    pub raw_half_width: f64,
    pub floor: f64,
}

impl EntryInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// `z_{alpha/2} sigma sqrt(s(a^2) s(b^2) + s(b^2) s(c^2) + s(c^2) s(a^2))`.
pub fn entrywise_half_width(a: f64, b: f64, c: f64, sigma: f64, alpha: f64, floor: f64) -> Result<f64> {
    let z = z_alpha(alpha / 2.0)?;
    let (sa, sb, sc) = (threshold(a * a, floor), threshold(b * b, floor), threshold(c * c, floor));
    Ok(z * sigma * (sa * sb + sb * sc + sc * sa).sqrt())
}

/// Interval for `T(i, j, k)` centered at the rank-one fit.
pub fn entrywise_ci(
    fit: &Rank1Fit,
    sigma: f64,
    alpha: f64,
    index: (usize, usize, usize),
    floor: EntryFloor,
) -> Result<EntryInterval> {
    check_alpha(alpha)?;
    let dims = fit.factors.dims();
    let (i, j, k) = index;
    if i >= dims[0] || j >= dims[1] || k >= dims[2] {
        return arg(format!("index {index:?} out of range for dims {dims:?}"));
    }
    let floor = match floor {
        EntryFloor::LogP => {
            let p = *dims.iter().max().expect("three dims") as f64;
            p.ln() * sigma * sigma / (fit.lambda_hat * fit.lambda_hat)
        }
        EntryFloor::Fixed(f) => f,
        EntryFloor::Off => 0.0,
    };
    let (a, b, c) = (fit.factors.u[(i, 0)], fit.factors.v[(j, 0)], fit.factors.w[(k, 0)]);
    let half_width = entrywise_half_width(a, b, c, sigma, alpha, floor)?;
    let raw_half_width = entrywise_half_width(a, b, c, sigma, alpha, 0.0)?;
    let estimate = fit.entry(i, j, k);
    Ok(EntryInterval {
        estimate,
        half_width,
        lower: estimate - half_width,
        upper: estimate + half_width,
        raw_half_width,
        floor,
    })
}

/// `(T_hat(i,j,k) - T(i,j,k)) / (sigma sqrt(u^2 v^2 + v^2 w^2 + w^2 u^2))` at the estimated loadings.
pub fn entrywise_statistic(fit: &Rank1Fit, truth_entry: f64, sigma: f64, index: (usize, usize, usize)) -> f64 {
    let (i, j, k) = index;
    let (a, b, c) = (fit.factors.u[(i, 0)], fit.factors.v[(j, 0)], fit.factors.w[(k, 0)]);
    let (a2, b2, c2) = (a * a, b * b, c * c);
    (fit.entry(i, j, k) - truth_entry) / (sigma * (a2 * b2 + b2 * c2 + c2 * a2).sqrt())
}

/// `sum_i x_i^4`.
pub fn fourth_power_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v.powi(4)).sum()
}

/// Rank-one `||sinΘ||_F^2` statistic under noise with kurtosis `nu`: center
/// `p sigma^2 / lambda^2`, scale `sigma^2 / lambda^2 sqrt(p (2 + (nu - 3) l4_v l4_w))`.
pub fn rank1_subgaussian_statistic(
    sin2_frob: f64,
    p: usize,
    lambda: f64,
    sigma: f64,
    nu: f64,
    l4_v: f64,
    l4_w: f64,
) -> Result<InferenceReport> {
    check_dim(p)?;
    if !(lambda > 0.0) {
        return arg(format!("lambda must be positive, got {lambda}"));
    }
    let factor = 2.0 + (nu - 3.0) * l4_v * l4_w;
    if !(factor > 0.0) {
        return arg(format!(
            "variance factor 2 + (nu - 3) l4_v l4_w = {factor} is not positive; the statistic is undefined"
        ));
    }
    let ratio = sigma * sigma / (lambda * lambda);
    let center = p as f64 * ratio;
    let scale = ratio * (p as f64 * factor).sqrt();
    if !(scale > 0.0) {
        return arg(format!("statistic scale must be positive, got {scale}"));
    }
    Ok(InferenceReport::build(Some(sin2_frob), center, scale, false))
}
