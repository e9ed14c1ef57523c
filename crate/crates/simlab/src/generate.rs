//! Synthetic signals, observations and regression designs.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use tensorinf_core::linalg::qr_orthonormalize;
use tensorinf_core::{Matrix, OrthFactors, RegressionDataset, Tensor3, TuckerFactors};

use crate::config::NoiseKind;
use crate::error::{SimError, SimResult};

fn std_normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| std_normal(rng))
}

/// Haar-distributed `p x r` frame: the Q factor of an i.i.d. normal matrix
/// with the diagonal of R made positive.
pub fn random_orthonormal(p: usize, r: usize, rng: &mut impl Rng) -> SimResult<Matrix> {
    if r == 0 || r > p {
        return Err(SimError::Config(format!("cannot draw {r} orthonormal columns in dimension {p}")));
    }
    Ok(qr_orthonormalize(&gaussian_matrix(p, r, rng)))
}

/// Tucker signal with Haar factors and a Gaussian core rescaled so that
/// `lambda_min = p^gamma`.
pub fn gen_tucker_instance(p: usize, r: usize, gamma: f64, rng: &mut impl Rng) -> SimResult<TuckerFactors> {
    let factors = [random_orthonormal(p, r, rng)?, random_orthonormal(p, r, rng)?, random_orthonormal(p, r, rng)?];
    let target = (p as f64).powf(gamma);
    loop {
        let raw = Tensor3::from_fn([r, r, r], |_, _, _| std_normal(rng));
        let check = TuckerFactors::new(raw, factors.clone())?;
        let lmin = check.lambda_min();
        // a singular core has probability zero; redraw if it happens
        if lmin > 0.0 && lmin.is_finite() {
            let core = check.core.scaled(target / lmin);
            return Ok(TuckerFactors::new(core, factors)?);
        }
    }
}

/// Orthogonally decomposable signal with `lambda_j = (r + 1 - j) lambda`.
pub fn gen_orth_instance(p: usize, r: usize, lambda: f64, rng: &mut impl Rng) -> SimResult<OrthFactors> {
    let lambdas = (0..r).map(|j| (r - j) as f64 * lambda).collect();
    let (u, v, w) = (random_orthonormal(p, r, rng)?, random_orthonormal(p, r, rng)?, random_orthonormal(p, r, rng)?);
    Ok(OrthFactors::new(lambdas, u, v, w)?)
}

/// Unit vector with all entries `1/sqrt(p)`.
pub fn flat_vector(p: usize) -> Matrix {
    Matrix::from_element(p, 1, 1.0 / (p as f64).sqrt())
}

/// `e_1` in dimension `p` as a column.
pub fn first_basis_vector(p: usize) -> Matrix {
    Matrix::from_fn(p, 1, |i, _| if i == 0 { 1.0 } else { 0.0 })
}

/// Adds i.i.d. noise with variance `sigma^2`. Rademacher noise takes the
/// values `±sigma`.
pub fn gen_observation(truth: &Tensor3, sigma: f64, noise: NoiseKind, rng: &mut impl Rng) -> Tensor3 {
    let mut a = truth.clone();
    if sigma == 0.0 {
        return a;
    }
    match noise {
        NoiseKind::Gaussian => a.data_mut().iter_mut().for_each(|x| *x += sigma * std_normal(rng)),
        NoiseKind::Rademacher => {
            a.data_mut().iter_mut().for_each(|x| *x += if rng.random::<bool>() { sigma } else { -sigma })
        }
    }
    a
}

/// `Y_i = <T, X_i> + xi_i` with standard normal design entries. The design
/// and the response noise come from separate generators.
pub fn gen_regression(
    truth: &Tensor3,
    n: usize,
    sigma: f64,
    noise: NoiseKind,
    design_rng: &mut impl Rng,
    noise_rng: &mut impl Rng,
) -> SimResult<RegressionDataset> {
    let dims = truth.dims();
    let mut covariates = Vec::with_capacity(n);
    let mut responses = Vec::with_capacity(n);
    for _ in 0..n {
        let x = Tensor3::from_fn(dims, |_, _, _| std_normal(design_rng));
        let xi = match noise {
            _ if sigma == 0.0 => 0.0,
            NoiseKind::Gaussian => sigma * std_normal(noise_rng),
            NoiseKind::Rademacher => {
                if noise_rng.random::<bool>() {
                    sigma
                } else {
                    -sigma
                }
            }
        };
        responses.push(x.inner(truth)? + xi);
        covariates.push(x);
    }
    Ok(RegressionDataset::new(covariates, responses, Some(sigma))?)
}

/// Orthonormal frame at spectral `sinΘ` distance exactly `eps` from `u`:
/// every column is rotated by angle `asin(eps)` towards a random direction
/// in the orthogonal complement.
pub fn perturb_frame(u: &Matrix, eps: f64, rng: &mut impl Rng) -> SimResult<Matrix> {
    let (p, r) = u.shape();
    if !(0.0..1.0).contains(&eps) {
        return Err(SimError::Config(format!("perturbation must lie in [0, 1), got {eps}")));
    }
    if eps == 0.0 {
        return Ok(u.clone());
    }
    if 2 * r > p {
        return Err(SimError::Config(format!("cannot perturb {r} columns in dimension {p}")));
    }
    let g = gaussian_matrix(p, r, rng);
    let d = qr_orthonormalize(&(&g - u * (u.transpose() * &g)));
    let c = (1.0 - eps * eps).sqrt();
    Ok(u * c + d * eps)
}
