//! Principal-angle distances, Procrustes alignment and component matching.

use serde::Serialize;

use crate::error::{arg, Result};
use crate::factors::{OrthFactors, ORTHONORMAL_TOL};
use crate::linalg::{check_orthonormal, singular_values, thin_svd};
use crate::tensor::{Matrix, Mode};

/// `sinΘ` distances between two `r`-dimensional subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubspaceDistance {
    /// `||sinΘ||`, the sine of the largest principal angle.
    pub spectral: f64,
    /// `||sinΘ||_F`.
    pub frobenius: f64,
}

fn check_pair(u: &Matrix, v: &Matrix) -> Result<()> {
    if u.shape() != v.shape() {
        return arg(format!("frames have different shapes: {:?} vs {:?}", u.shape(), v.shape()));
    }
    check_orthonormal(u, ORTHONORMAL_TOL, "first frame")?;
    check_orthonormal(v, ORTHONORMAL_TOL, "second frame")
}

/// Principal-angle distances between the column spaces of `u` and `v`.
///
/// Computed from the residual `(I - v v^T) u`, whose singular values are the
/// sines of the principal angles; this stays accurate when the angles are tiny.
pub fn sin_theta(u: &Matrix, v: &Matrix) -> Result<SubspaceDistance> {
    check_pair(u, v)?;
    let resid = u - v * (v.transpose() * u);
    let frobenius = resid.norm().min((u.ncols() as f64).sqrt());
    let spectral = singular_values(&resid).first().copied().unwrap_or(0.0).min(1.0);
    Ok(SubspaceDistance { spectral, frobenius })
}

/// Best rotation `R = L W^T` from the SVD `û^T u = L S W^T`.
pub fn procrustes_align(u_hat: &Matrix, u: &Matrix) -> Result<Matrix> {
    check_pair(u_hat, u)?;
    let svd = thin_svd(&(u_hat.transpose() * u))?;
    Ok(svd.u * svd.v.transpose())
}

/// Optimal assignment between estimated and true components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    /// `permutation[j]` is the estimated component matched to true component `j`.
    pub permutation: Vec<usize>,
    /// Sign flips `(u, v, w)` that make each matched inner product nonnegative.
    pub signs: Vec<[i8; 3]>,
    /// `|<û_{π(j)}, u_j>|`.
    pub overlaps: Vec<f64>,
}

impl MatchResult {
    /// Estimated factors reordered to the true labelling with signs applied.
    pub fn align(&self, est: &OrthFactors) -> OrthFactors {
        let r = self.permutation.len();
        let pick = |mode: Mode, m: &Matrix| {
            let mut out = Matrix::zeros(m.nrows(), r);
            for (j, &src) in self.permutation.iter().enumerate() {
                let s = f64::from(self.signs[j][mode.index()]);
                out.set_column(j, &(m.column(src) * s));
            }
            out
        };
        OrthFactors {
            lambdas: self.permutation.iter().map(|&i| est.lambdas[i]).collect(),
            u: pick(Mode::One, &est.u),
            v: pick(Mode::Two, &est.v),
            w: pick(Mode::Three, &est.w),
        }
    }
}

/// Matches estimated to true components by maximizing `Σ_j |<û_{π(j)}, u_j>|`.
pub fn match_components(est: &OrthFactors, truth: &OrthFactors) -> Result<MatchResult> {
    let r = truth.rank();
    if est.rank() != r {
        return arg(format!("estimate has {} components, truth has {r}", est.rank()));
    }
    if est.dims() != truth.dims() {
        return arg(format!("dims differ: {:?} vs {:?}", est.dims(), truth.dims()));
    }
    // gain[j][i] = |<û_i, u_j>|
    let cross = truth.u.transpose() * &est.u;
    let gain: Vec<Vec<f64>> = (0..r).map(|j| (0..r).map(|i| cross[(j, i)].abs()).collect()).collect();
    let permutation = max_weight_assignment(&gain);

    let mut signs = Vec::with_capacity(r);
    let mut overlaps = Vec::with_capacity(r);
    for (j, &i) in permutation.iter().enumerate() {
        let mut s = [1i8; 3];
        for mode in Mode::ALL {
            let ip = est.factor(mode).column(i).dot(&truth.factor(mode).column(j));
            if ip < 0.0 {
                s[mode.index()] = -1;
            }
        }
        signs.push(s);
        overlaps.push(gain[j][i]);
    }
    Ok(MatchResult { permutation, signs, overlaps })
}

/// Hungarian algorithm on a square gain matrix; returns `assign[row] = col`
/// maximizing the total gain.
pub fn max_weight_assignment(gain: &[Vec<f64>]) -> Vec<usize> {
    let n = gain.len();
    if n == 0 {
        return Vec::new();
    }
    let big = gain.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    // minimize cost = big - gain, potentials u (rows) and v (cols), 1-based
    let cost = |i: usize, j: usize| big - gain[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}
