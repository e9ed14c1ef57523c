#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tensorinf_core::linalg::qr_orthonormalize;
use tensorinf_core::{Matrix, OrthFactors, RegressionDataset, Tensor3, TuckerFactors};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn gauss(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| normal(rng))
}

pub fn gauss_tensor(rng: &mut ChaCha8Rng, dims: [usize; 3]) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| normal(rng))
}

pub fn haar(rng: &mut ChaCha8Rng, p: usize, r: usize) -> Matrix {
    qr_orthonormalize(&gauss(rng, p, r))
}

pub fn tucker(rng: &mut ChaCha8Rng, dims: [usize; 3], r: usize, scale: f64) -> TuckerFactors {
    let g = gauss_tensor(rng, [r, r, r]).scaled(scale);
    let f = [haar(rng, dims[0], r), haar(rng, dims[1], r), haar(rng, dims[2], r)];
    TuckerFactors::new(g, f).unwrap()
}

pub fn orth(rng: &mut ChaCha8Rng, p: usize, lambdas: Vec<f64>) -> OrthFactors {
    let r = lambdas.len();
    OrthFactors::new(lambdas, haar(rng, p, r), haar(rng, p, r), haar(rng, p, r)).unwrap()
}

/// Orthonormal frame at `sinΘ` distance about `eps` from `u`.
pub fn perturb(rng: &mut ChaCha8Rng, u: &Matrix, eps: f64) -> Matrix {
    let d = gauss(rng, u.nrows(), u.ncols());
    let d = &d - u * (u.transpose() * &d);
    qr_orthonormalize(&(u + d.scale(eps / d.norm())))
}

pub fn regression_data(rng: &mut ChaCha8Rng, t: &Tensor3, n: usize, sigma: f64) -> RegressionDataset {
    let xs: Vec<Tensor3> = (0..n).map(|_| gauss_tensor(rng, t.dims())).collect();
    let ys = xs.iter().map(|x| x.inner(t).unwrap() + sigma * normal(rng)).collect();
    RegressionDataset::new(xs, ys, Some(sigma)).unwrap()
}
