//! Dense third-order tensors and the multilinear algebra built on them.
//!
//! Storage is lexicographic with the last mode varying fastest, so the entry
//! `(i1, i2, i3)` (0-based) lives at `(i1 * p2 + i2) * p3 + i3`. Matricization
//! orders columns over the two remaining modes with the later mode fastest,
//! which makes `M1((U1, U2, U3) . G) = U1 M1(G) (U2 ⊗ U3)^T` hold with the
//! factors in their natural order.

use nalgebra::{DMatrix, DMatrixView};
use std::fmt;

use crate::error::{arg, Error, Result};

pub type Matrix = DMatrix<f64>;

/// One of the three tensor modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    /// Zero-based axis index.
    pub fn index(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }

    /// The two other modes in increasing order (the order used for Kronecker factors).
    pub fn others(self) -> (Mode, Mode) {
        match self {
            Mode::One => (Mode::Two, Mode::Three),
            Mode::Two => (Mode::One, Mode::Three),
            Mode::Three => (Mode::One, Mode::Two),
        }
    }

    /// The two other modes in cyclic order `(j+1, j+2)`.
    pub fn cyclic_others(self) -> (Mode, Mode) {
        match self {
            Mode::One => (Mode::Two, Mode::Three),
            Mode::Two => (Mode::Three, Mode::One),
            Mode::Three => (Mode::One, Mode::Two),
        }
    }
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    /// Converts a 1-based mode number.
    fn try_from(mode: usize) -> Result<Self> {
        match mode {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            other => arg(format!("mode must be 1, 2 or 3, got {other}")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// Tucker ranks `(r1, r2, r3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RankTriple(pub [usize; 3]);

impl RankTriple {
    pub fn new(r1: usize, r2: usize, r3: usize) -> Self {
        RankTriple([r1, r2, r3])
    }

    pub fn uniform(r: usize) -> Self {
        RankTriple([r, r, r])
    }

    pub fn get(&self, mode: Mode) -> usize {
        self.0[mode.index()]
    }

    pub fn product(&self) -> usize {
        self.0.iter().product()
    }

    /// Checks the ranks against tensor dimensions: positive, `r_j <= p_j`, and
    /// `r_j <= r_k r_l` so every projected matricization can carry rank `r_j`.
    pub fn validate_for(&self, dims: [usize; 3]) -> Result<()> {
        let [r1, r2, r3] = self.0;
        for (j, (&r, &p)) in self.0.iter().zip(dims.iter()).enumerate() {
            if r == 0 {
                return arg(format!("rank r{} must be positive", j + 1));
            }
            if r > p {
                return arg(format!("rank r{} = {r} exceeds dimension p{} = {p}", j + 1, j + 1));
            }
        }
        if r1 > r2 * r3 || r2 > r1 * r3 || r3 > r1 * r2 {
            return arg(format!(
                "ranks ({r1}, {r2}, {r3}) are not a valid Tucker rank: each must be at most the product of the other two"
            ));
        }
        Ok(())
    }
}

/// Dense `p1 x p2 x p3` real array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Tensor3 { dims, data: vec![0.0; dims.iter().product()] }
    }

    /// Builds a tensor from data in linear order; rejects wrong lengths,
    /// zero dimensions and non-finite entries.
    pub fn from_vec(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return arg(format!("tensor dimensions must be positive, got {dims:?}"));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return arg(format!(
                "tensor of dims {dims:?} needs {len} entries, got {}",
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("non-finite tensor entry at linear index {pos}")));
        }
        Ok(Tensor3 { dims, data })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { dims, data }
    }

    /// `lambda * u ⊗ v ⊗ w`.
    pub fn rank_one(lambda: f64, u: &[f64], v: &[f64], w: &[f64]) -> Self {
        let dims = [u.len(), v.len(), w.len()];
        let mut data = Vec::with_capacity(dims.iter().product());
        for &a in u {
            for &b in v {
                let ab = lambda * a * b;
                data.extend(w.iter().map(|&c| ab * c));
            }
        }
        Tensor3 { dims, data }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self, mode: Mode) -> usize {
        self.dims[mode.index()]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.linear_index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.linear_index(i, j, k);
        self.data[idx] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Tensor3) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        self.check_same_dims(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Tensor3 { dims: self.dims, data })
    }

    pub fn add(&self, other: &Tensor3) -> Result<Tensor3> {
        self.check_same_dims(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Tensor3 { dims: self.dims, data })
    }

    pub fn scaled(&self, c: f64) -> Tensor3 {
        Tensor3 { dims: self.dims, data: self.data.iter().map(|x| c * x).collect() }
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: f64, other: &Tensor3) -> Result<()> {
        self.check_same_dims(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    /// Relabels axes: output axis `a` is input axis `perm[a]`.
    pub fn permute_axes(&self, perm: [usize; 3]) -> Result<Tensor3> {
        let mut seen = [false; 3];
        for &p in &perm {
            if p > 2 || seen[p] {
                return arg(format!("{perm:?} is not a permutation of the three axes"));
            }
            seen[p] = true;
        }
        let dims = [self.dims[perm[0]], self.dims[perm[1]], self.dims[perm[2]]];
        Ok(Tensor3::from_fn(dims, |a, b, c| {
            let mut idx = [0usize; 3];
            idx[perm[0]] = a;
            idx[perm[1]] = b;
            idx[perm[2]] = c;
            self.get(idx[0], idx[1], idx[2])
        }))
    }

    fn check_same_dims(&self, other: &Tensor3) -> Result<()> {
        if self.dims != other.dims {
            return arg(format!("dimension mismatch: {:?} vs {:?}", self.dims, other.dims));
        }
        Ok(())
    }
}

/// Mode-`j` unfolding `M_j(t)`, of size `p_j x (p1 p2 p3 / p_j)`.
pub fn matricize(t: &Tensor3, mode: Mode) -> Matrix {
    let [p1, p2, p3] = t.dims;
    let d = &t.data;
    match mode {
        // Row-major p1 x (p2 p3) is exactly the storage order.
        Mode::One => Matrix::from_row_slice(p1, p2 * p3, d),
        Mode::Two => Matrix::from_fn(p2, p1 * p3, |j, col| {
            let (i, k) = (col / p3, col % p3);
            d[(i * p2 + j) * p3 + k]
        }),
        Mode::Three => Matrix::from_fn(p3, p1 * p2, |k, col| d[col * p3 + k]),
    }
}

/// Inverse of [`matricize`].
pub fn fold(m: &Matrix, mode: Mode, dims: [usize; 3]) -> Result<Tensor3> {
    if dims.iter().any(|&d| d == 0) {
        return arg(format!("tensor dimensions must be positive, got {dims:?}"));
    }
    let rows = dims[mode.index()];
    let cols = dims.iter().product::<usize>() / rows;
    if m.nrows() != rows || m.ncols() != cols {
        return arg(format!(
            "cannot fold a {}x{} matrix along mode {mode} into dims {dims:?} (expected {rows}x{cols})",
            m.nrows(),
            m.ncols()
        ));
    }
    let [_, p2, p3] = dims;
    let t = match mode {
        Mode::One => Tensor3::from_fn(dims, |i, j, k| m[(i, j * p3 + k)]),
        Mode::Two => Tensor3::from_fn(dims, |i, j, k| m[(j, i * p3 + k)]),
        Mode::Three => Tensor3::from_fn(dims, |i, j, k| m[(k, i * p2 + j)]),
    };
    Ok(t)
}

/// Mode-`j` product `t ×_j a`: contracts axis `j` of `t` with the columns of `a`.
pub fn mode_product(t: &Tensor3, mode: Mode, a: &Matrix) -> Result<Tensor3> {
    let [p1, p2, p3] = t.dims;
    let pj = t.dim(mode);
    if a.ncols() != pj {
        return arg(format!(
            "mode-{mode} product needs a matrix with {pj} columns, got {}x{}",
            a.nrows(),
            a.ncols()
        ));
    }
    let q = a.nrows();
    // A row-major (m x n) buffer read as column-major is the (n x m) transpose.
    let out = match mode {
        Mode::One => {
            let y = DMatrixView::from_slice(&t.data, p2 * p3, p1);
            let r = y * a.transpose();
            Tensor3 { dims: [q, p2, p3], data: r.as_slice().to_vec() }
        }
        Mode::Two => {
            let at = a.transpose();
            let mut data = Vec::with_capacity(p1 * q * p3);
            for slab in t.data.chunks_exact(p2 * p3) {
                let s = DMatrixView::from_slice(slab, p3, p2);
                let r = s * &at;
                data.extend_from_slice(r.as_slice());
            }
            Tensor3 { dims: [p1, q, p3], data }
        }
        Mode::Three => {
            let x = DMatrixView::from_slice(&t.data, p3, p1 * p2);
            let r = a * x;
            Tensor3 { dims: [p1, p2, q], data: r.as_slice().to_vec() }
        }
    };
    Ok(out)
}

/// `(a1, a2, a3) . g = g ×_1 a1 ×_2 a2 ×_3 a3`.
pub fn multilinear_product(g: &Tensor3, a1: &Matrix, a2: &Matrix, a3: &Matrix) -> Result<Tensor3> {
    let t = mode_product(g, Mode::One, a1)?;
    let t = mode_product(&t, Mode::Two, a2)?;
    mode_product(&t, Mode::Three, a3)
}

/// `t ×_1 u1^T ×_2 u2^T ×_3 u3^T`, the projection onto the factor frames.
pub fn project_core(t: &Tensor3, u1: &Matrix, u2: &Matrix, u3: &Matrix) -> Result<Tensor3> {
    multilinear_product(t, &u1.transpose(), &u2.transpose(), &u3.transpose())
}

/// Contracts `t` with `b^T` and `c^T` along the two modes other than `keep`,
/// returning the tensor whose `keep` axis is untouched.
pub fn project_except(t: &Tensor3, keep: Mode, b: &Matrix, c: &Matrix) -> Result<Tensor3> {
    let (m1, m2) = keep.others();
    let s = mode_product(t, m2, &c.transpose())?;
    mode_product(&s, m1, &b.transpose())
}

/// Kronecker product `a ⊗ b`.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Vector contraction leaving mode `keep` free: e.g. for `Mode::One`,
/// `out_i = sum_{j,k} t(i,j,k) x_j y_k` with `(x, y)` matched to the other
/// modes in increasing order.
pub fn contract_vectors(t: &Tensor3, keep: Mode, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let [p1, p2, p3] = t.dims;
    let (a, b) = keep.others();
    if x.len() != t.dim(a) || y.len() != t.dim(b) {
        return arg(format!(
            "vector lengths ({}, {}) do not match modes {a} and {b} of a {:?} tensor",
            x.len(),
            y.len(),
            t.dims
        ));
    }
    let d = &t.data;
    let out = match keep {
        Mode::One => (0..p1)
            .map(|i| {
                let slab = &d[i * p2 * p3..(i + 1) * p2 * p3];
                slab.chunks_exact(p3)
                    .zip(x)
                    .map(|(row, &xj)| xj * dot(row, y))
                    .sum()
            })
            .collect(),
        Mode::Two => {
            let mut out = vec![0.0; p2];
            for (i, &xi) in x.iter().enumerate() {
                let slab = &d[i * p2 * p3..(i + 1) * p2 * p3];
                for (o, row) in out.iter_mut().zip(slab.chunks_exact(p3)) {
                    *o += xi * dot(row, y);
                }
            }
            out
        }
        Mode::Three => {
            let mut out = vec![0.0; p3];
            for (i, &xi) in x.iter().enumerate() {
                let slab = &d[i * p2 * p3..(i + 1) * p2 * p3];
                for (row, &yj) in slab.chunks_exact(p3).zip(y) {
                    let c = xi * yj;
                    for (o, &v) in out.iter_mut().zip(row) {
                        *o += c * v;
                    }
                }
            }
            out
        }
    };
    Ok(out)
}

/// `t ×_1 u^T ×_2 v^T ×_3 w^T` for vectors.
pub fn trilinear(t: &Tensor3, u: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
    let first = contract_vectors(t, Mode::One, v, w)?;
    if first.len() != u.len() {
        return arg(format!("vector of length {} does not match mode 1 ({})", u.len(), first.len()));
    }
    Ok(dot(&first, u))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
