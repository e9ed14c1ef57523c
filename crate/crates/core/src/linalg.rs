//! Dense linear-algebra helpers on top of nalgebra: truncated SVD with a fixed
//! sign convention, orthonormalization and least squares.

use faer::{Mat, Side};
use nalgebra::DVector;

use crate::error::{arg, numeric, Result};
use crate::tensor::Matrix;

/// Leading left singular subspace of a matrix.
#[derive(Debug, Clone)]
pub struct LeadingSingular {
    /// `rows x r`, orthonormal columns.
    pub vectors: Matrix,
    /// The `r` largest singular values, descending.
    pub values: Vec<f64>,
    /// `sigma_r - sigma_{r+1}` (or `sigma_r` when `r` is the full rank bound).
    pub gap: f64,
}

/// Wide inputs go through the Gram matrix once the aspect ratio passes this.
const GRAM_ASPECT: usize = 4;

/// Leading `r` left singular vectors and values of `m`.
///
/// Columns are sign-normalized so that each column's entry of largest
/// magnitude (first one on ties) is nonnegative.
pub fn top_left_singular(m: &Matrix, r: usize) -> Result<LeadingSingular> {
    let (rows, cols) = m.shape();
    let full = rows.min(cols);
    if r == 0 || r > full {
        return arg(format!("requested {r} singular vectors of a {rows}x{cols} matrix"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return numeric("non-finite entry in matrix passed to SVD");
    }

    let (mut vectors, all_values) = if cols >= GRAM_ASPECT * rows {
        let gram = to_faer(&(m * m.transpose()));
        let eig = gram
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| crate::error::Error::Numeric(format!("eigendecomposition failed: {e:?}")))?;
        let (vecs, vals) = (eig.U(), eig.S().column_vector());
        let mut order: Vec<usize> = (0..rows).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let values = order.iter().map(|&i| vals[i].max(0.0).sqrt()).collect();
        (Matrix::from_fn(rows, r, |i, j| vecs[(i, order[j])]), values)
    } else {
        let svd = thin_svd(m)?;
        (svd.u.columns(0, r).into_owned(), svd.s)
    };

    fix_signs(&mut vectors);
    let gap = if r < all_values.len() {
        all_values[r - 1] - all_values[r]
    } else {
        all_values[r - 1]
    };
    Ok(LeadingSingular { vectors, values: all_values[..r].to_vec(), gap })
}

/// Thin SVD `m = u diag(s) v^T` with `s` descending.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

fn to_faer(m: &Matrix) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD through faer. nalgebra's bidiagonal SVD is not used: it can
/// return a wrong factorization for exactly rank-deficient inputs.
pub fn thin_svd(m: &Matrix) -> Result<ThinSvd> {
    if m.iter().any(|x| !x.is_finite()) {
        return numeric("non-finite entry in matrix passed to SVD");
    }
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Ok(ThinSvd { u: Matrix::zeros(m.nrows(), 0), s: Vec::new(), v: Matrix::zeros(m.ncols(), 0) });
    }
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| crate::error::Error::Numeric(format!("SVD failed to converge: {e:?}")))?;
    let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| fs[b].total_cmp(&fs[a]));
    Ok(ThinSvd {
        u: Matrix::from_fn(m.nrows(), k, |i, j| fu[(i, order[j])]),
        s: order.iter().map(|&i| fs[i]).collect(),
        v: Matrix::from_fn(m.ncols(), k, |i, j| fv[(i, order[j])]),
    })
}

/// All singular values, descending. Non-finite input yields NaNs.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    match thin_svd(m) {
        Ok(svd) => svd.s,
        Err(_) => vec![f64::NAN; m.nrows().min(m.ncols())],
    }
}

/// Flips each column so its largest-magnitude entry is nonnegative. Entries
/// within a relative `1e-10` of the maximum count as ties and the first wins,
/// so rounding noise cannot change the choice.
pub fn fix_signs(m: &mut Matrix) {
    for mut col in m.column_iter_mut() {
        let top = col.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if let Some(i) = col.iter().position(|x| x.abs() >= top * (1.0 - 1e-10)) {
            if col[i] < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// `max |U^T U - I|` entrywise.
pub fn orthonormality_defect(u: &Matrix) -> f64 {
    let g = u.transpose() * u;
    let r = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

pub fn check_orthonormal(u: &Matrix, tol: f64, what: &str) -> Result<()> {
    if u.ncols() > u.nrows() {
        return arg(format!("{what} has more columns than rows ({}x{})", u.nrows(), u.ncols()));
    }
    let defect = orthonormality_defect(u);
    if !(defect <= tol) {
        return arg(format!("{what} does not have orthonormal columns (defect {defect:.3e})"));
    }
    Ok(())
}

/// Q factor of a thin QR decomposition, with columns flipped so that
/// `diag(R) >= 0`. Applied to an i.i.d. Gaussian matrix this is Haar
/// distributed on the Stiefel manifold.
pub fn qr_orthonormalize(m: &Matrix) -> Matrix {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Nearest matrix with orthonormal columns in Frobenius norm (polar factor).
pub fn polar_orthonormalize(m: &Matrix) -> Result<Matrix> {
    let svd = thin_svd(m)?;
    Ok(svd.u * svd.v.transpose())
}

/// Solution of `min ||design x - rhs||_2` by Householder QR.
///
/// Fails with a numeric error when the design is rank deficient, measured by
/// the condition number of its triangular factor exceeding `max_condition`.
pub fn least_squares(design: &Matrix, rhs: &[f64], max_condition: f64) -> Result<Vec<f64>> {
    let (n, k) = design.shape();
    if rhs.len() != n {
        return arg(format!("right-hand side has length {}, design has {n} rows", rhs.len()));
    }
    if n < k {
        return arg(format!("least squares with {n} equations and {k} unknowns is underdetermined"));
    }
    if design.iter().chain(rhs.iter()).any(|x| !x.is_finite()) {
        return numeric("non-finite entry in least-squares system");
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let sv = singular_values(&r);
    let (smax, smin) = (sv[0], *sv.last().unwrap());
    if smax == 0.0 || smin <= smax / max_condition {
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        return numeric(format!(
            "least-squares system is rank deficient (condition {cond:.3e}); increase the sample size"
        ));
    }
    let mut qtb = DVector::from_column_slice(rhs);
    qr.q_tr_mul(&mut qtb);
    let qtb = qtb.rows(0, k).into_owned();
    let x = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| crate::error::Error::Numeric("singular triangular factor".into()))?;
    Ok(x.iter().copied().collect())
}
