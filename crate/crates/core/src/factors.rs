//! Low-rank tensor representations shared by the estimators.

use crate::error::{arg, Result};
use crate::linalg::{check_orthonormal, singular_values};
use crate::tensor::{matricize, multilinear_product, Matrix, Mode, RankTriple, Tensor3};

/// Orthonormality tolerance for factor frames.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Tucker decomposition `(U1, U2, U3) . G`.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerFactors {
    pub core: Tensor3,
    pub factors: [Matrix; 3],
}

impl TuckerFactors {
    pub fn new(core: Tensor3, factors: [Matrix; 3]) -> Result<Self> {
        for mode in Mode::ALL {
            let u = &factors[mode.index()];
            if u.ncols() != core.dim(mode) {
                return arg(format!(
                    "factor {mode} has {} columns but the core has dimension {}",
                    u.ncols(),
                    core.dim(mode)
                ));
            }
            check_orthonormal(u, ORTHONORMAL_TOL, &format!("factor {mode}"))?;
        }
        Ok(TuckerFactors { core, factors })
    }

    pub fn factor(&self, mode: Mode) -> &Matrix {
        &self.factors[mode.index()]
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.factors[0].nrows(), self.factors[1].nrows(), self.factors[2].nrows()]
    }

    pub fn ranks(&self) -> RankTriple {
        RankTriple(self.core.dims())
    }

    pub fn reconstruct(&self) -> Tensor3 {
        multilinear_product(&self.core, &self.factors[0], &self.factors[1], &self.factors[2])
            .expect("factor shapes validated at construction")
    }

    /// Singular values of `M_j(G)`, descending (the diagonal of `Lambda_j`).
    pub fn mode_singular_values(&self, mode: Mode) -> Vec<f64> {
        let mut s = singular_values(&matricize(&self.core, mode));
        s.truncate(self.core.dim(mode));
        s
    }

    /// Smallest positive singular value over all matricizations.
    pub fn lambda_min(&self) -> f64 {
        Mode::ALL
            .iter()
            .map(|&m| *self.mode_singular_values(m).last().expect("nonempty"))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        Mode::ALL
            .iter()
            .map(|&m| self.mode_singular_values(m)[0])
            .fold(0.0, f64::max)
    }

    /// Condition number `lambda_max / lambda_min`.
    pub fn kappa(&self) -> f64 {
        self.lambda_max() / self.lambda_min()
    }

    pub(crate) fn check_conforms(&self, dims: [usize; 3]) -> Result<()> {
        if self.dims() != dims {
            return arg(format!("factors of dims {:?} do not conform to a tensor of dims {dims:?}", self.dims()));
        }
        Ok(())
    }
}

/// Orthogonally decomposable signal `sum_j lambda_j u_j ⊗ v_j ⊗ w_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthFactors {
    pub lambdas: Vec<f64>,
    pub u: Matrix,
    pub v: Matrix,
    pub w: Matrix,
}

impl OrthFactors {
    /// Validates component counts, unit columns and positive weights. Mutual
    /// orthogonality is not required since estimates are only approximately
    /// orthogonal.
    pub fn new(lambdas: Vec<f64>, u: Matrix, v: Matrix, w: Matrix) -> Result<Self> {
        let r = lambdas.len();
        if r == 0 {
            return arg("an orthogonal decomposition needs at least one component");
        }
        for (name, m) in [("u", &u), ("v", &v), ("w", &w)] {
            if m.ncols() != r {
                return arg(format!("{name} has {} columns, expected {r}", m.ncols()));
            }
            for (j, col) in m.column_iter().enumerate() {
                let n = col.norm();
                if (n - 1.0).abs() > ORTHONORMAL_TOL {
                    return arg(format!("column {j} of {name} has norm {n}, expected 1"));
                }
            }
        }
        if let Some(j) = lambdas.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
            return arg(format!("lambda_{j} = {} must be positive", lambdas[j]));
        }
        Ok(OrthFactors { lambdas, u, v, w })
    }

    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.u.nrows(), self.v.nrows(), self.w.nrows()]
    }

    pub fn factor(&self, mode: Mode) -> &Matrix {
        match mode {
            Mode::One => &self.u,
            Mode::Two => &self.v,
            Mode::Three => &self.w,
        }
    }

    pub fn factor_mut(&mut self, mode: Mode) -> &mut Matrix {
        match mode {
            Mode::One => &mut self.u,
            Mode::Two => &mut self.v,
            Mode::Three => &mut self.w,
        }
    }

    /// Column `j` of the given factor as an owned vector.
    pub fn vector(&self, mode: Mode, j: usize) -> Vec<f64> {
        self.factor(mode).column(j).iter().copied().collect()
    }

    pub fn reconstruct(&self) -> Tensor3 {
        let mut t = Tensor3::zeros(self.dims());
        for j in 0..self.rank() {
            let term = Tensor3::rank_one(
                self.lambdas[j],
                &self.vector(Mode::One, j),
                &self.vector(Mode::Two, j),
                &self.vector(Mode::Three, j),
            );
            t.axpy(1.0, &term).expect("same dims");
        }
        t
    }
}
