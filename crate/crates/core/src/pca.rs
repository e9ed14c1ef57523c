//! Tensor PCA estimators: HOOI, two-sweep refinement, per-component power
//! iterations for orthogonally decomposable signals, and rank-one power
//! iteration.

use serde::Serialize;

use crate::error::{arg, numeric, Result};
use crate::factors::{OrthFactors, TuckerFactors};
use crate::linalg::{polar_orthonormalize, top_left_singular};
use crate::tensor::{
    contract_vectors, dot, matricize, project_core, project_except, Matrix, Mode, RankTriple, Tensor3,
};

/// Order in which the three factor updates of a sweep see each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// Every update in sweep `t + 1` reads only sweep-`t` factors.
    #[default]
    Jacobi,
    /// Each update reads the factors already refreshed earlier in the sweep.
    GaussSeidel,
}

/// Gap below which the leading singular subspace is reported as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepDiagnostics {
    /// `||A ×1 U1^T ×2 U2^T ×3 U3^T||_F` at the returned factors.
    pub objective: f64,
    /// Objective after the initialization and after each sweep.
    pub objective_trace: Vec<f64>,
    /// Some mode had (numerically) fewer than `r_j` nonzero singular values.
    pub rank_deficient: bool,
    /// Smallest `sigma_{r_j} - sigma_{r_j + 1}` seen in the final sweep.
    pub min_gap: f64,
}

impl SweepDiagnostics {
    pub fn degenerate(&self) -> bool {
        self.min_gap < DEGENERATE_GAP
    }
}

#[derive(Debug, Clone)]
pub struct PcaFit {
    pub factors: TuckerFactors,
    pub diagnostics: SweepDiagnostics,
}

struct ModeUpdate {
    frame: Matrix,
    gap: f64,
    deficient: bool,
}

fn leading_frame(m: &Matrix, r: usize, scale: f64) -> Result<ModeUpdate> {
    let lead = top_left_singular(m, r)?;
    let last = lead.values[r - 1];
    let deficient = scale == 0.0 || last <= 1e-12 * scale;
    Ok(ModeUpdate { frame: lead.vectors, gap: lead.gap, deficient })
}

/// Top-`r_j` left singular vectors of each `M_j(A)`.
pub fn spectral_init(a: &Tensor3, ranks: RankTriple) -> Result<[Matrix; 3]> {
    ranks.validate_for(a.dims())?;
    let scale = a.frobenius_norm();
    let mut out: [Matrix; 3] = Default::default();
    for mode in Mode::ALL {
        out[mode.index()] = leading_frame(&matricize(a, mode), ranks.get(mode), scale)?.frame;
    }
    Ok(out)
}

fn objective(a: &Tensor3, f: &[Matrix; 3]) -> Result<f64> {
    Ok(project_core(a, &f[0], &f[1], &f[2])?.frobenius_norm())
}

/// Runs `sweeps` power sweeps from `init`, each mode update taking the top
/// left singular vectors of `M_j(A ×_k U_k^T ×_l U_l^T)`.
pub fn power_sweeps(
    a: &Tensor3,
    init: &[Matrix; 3],
    sweeps: usize,
    schedule: Schedule,
) -> Result<PcaFit> {
    for mode in Mode::ALL {
        let u = &init[mode.index()];
        if u.nrows() != a.dim(mode) {
            return arg(format!(
                "initial factor {mode} has {} rows but the tensor has dimension {}",
                u.nrows(),
                a.dim(mode)
            ));
        }
    }
    let ranks = RankTriple([init[0].ncols(), init[1].ncols(), init[2].ncols()]);
    ranks.validate_for(a.dims())?;
    let scale = a.frobenius_norm();

    let mut current = init.clone();
    let mut trace = vec![objective(a, &current)?];
    let mut min_gap = f64::INFINITY;
    let mut deficient = false;
    for _ in 0..sweeps {
        let prev = current.clone();
        min_gap = f64::INFINITY;
        deficient = false;
        for mode in Mode::ALL {
            let (m1, m2) = mode.others();
            let src = match schedule {
                Schedule::Jacobi => &prev,
                Schedule::GaussSeidel => &current,
            };
            let proj = project_except(a, mode, &src[m1.index()], &src[m2.index()])?;
            let upd = leading_frame(&matricize(&proj, mode), ranks.get(mode), scale)?;
            min_gap = min_gap.min(upd.gap);
            deficient |= upd.deficient;
            current[mode.index()] = upd.frame;
        }
        trace.push(objective(a, &current)?);
    }
    if sweeps == 0 {
        min_gap = 0.0;
        deficient = scale == 0.0;
    }
    let core = project_core(a, &current[0], &current[1], &current[2])?;
    let diagnostics = SweepDiagnostics {
        objective: *trace.last().expect("nonempty"),
        objective_trace: trace,
        rank_deficient: deficient,
        min_gap,
    };
    Ok(PcaFit { factors: TuckerFactors::new(core, current)?, diagnostics })
}

/// Higher-order orthogonal iteration with `t_max` Jacobi sweeps.
pub fn hooi(a: &Tensor3, ranks: RankTriple, t_max: usize) -> Result<PcaFit> {
    hooi_with_schedule(a, ranks, t_max, Schedule::Jacobi)
}

pub fn hooi_with_schedule(a: &Tensor3, ranks: RankTriple, t_max: usize, schedule: Schedule) -> Result<PcaFit> {
    if t_max == 0 {
        return arg("HOOI needs at least one sweep");
    }
    let init = spectral_init(a, ranks)?;
    power_sweeps(a, &init, t_max, schedule)
}

/// Exactly two Jacobi sweeps from `init`; the core is recomputed from `a`.
pub fn pca_refine(a: &Tensor3, init: &TuckerFactors) -> Result<PcaFit> {
    init.check_conforms(a.dims())?;
    power_sweeps(a, &init.factors, 2, Schedule::Jacobi)
}

fn normalize(v: Vec<f64>, component: usize, mode: Mode) -> Result<Vec<f64>> {
    let n = dot(&v, &v).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return numeric(format!(
            "component {} collapsed to a zero vector in mode {mode} during normalization",
            component + 1
        ));
    }
    Ok(v.into_iter().map(|x| x / n).collect())
}

/// One Jacobi update of a single rank-one triple.
fn rank_one_step(a: &Tensor3, u: &[f64], v: &[f64], w: &[f64], component: usize) -> Result<[Vec<f64>; 3]> {
    Ok([
        normalize(contract_vectors(a, Mode::One, v, w)?, component, Mode::One)?,
        normalize(contract_vectors(a, Mode::Two, u, w)?, component, Mode::Two)?,
        normalize(contract_vectors(a, Mode::Three, u, v)?, component, Mode::Three)?,
    ])
}

fn check_orth_conforms(a: &Tensor3, f: &OrthFactors) -> Result<()> {
    if f.dims() != a.dims() {
        return arg(format!("factors of dims {:?} do not conform to a tensor of dims {:?}", f.dims(), a.dims()));
    }
    Ok(())
}

/// Two power sweeps per component, then `lambda_j = ||A ×2 v_j^T ×3 w_j^T||`.
pub fn orth_refine(a: &Tensor3, init: &OrthFactors) -> Result<OrthFactors> {
    check_orth_conforms(a, init)?;
    let r = init.rank();
    let mut out = init.clone();
    for j in 0..r {
        let mut u = init.vector(Mode::One, j);
        let mut v = init.vector(Mode::Two, j);
        let mut w = init.vector(Mode::Three, j);
        for _ in 0..2 {
            [u, v, w] = rank_one_step(a, &u, &v, &w, j)?;
        }
        let fitted = contract_vectors(a, Mode::One, &v, &w)?;
        let lambda = dot(&fitted, &fitted).sqrt();
        if !(lambda > 0.0) {
            return numeric(format!("component {} has zero fitted weight", j + 1));
        }
        out.lambdas[j] = lambda;
        out.u.column_mut(j).copy_from_slice(&u);
        out.v.column_mut(j).copy_from_slice(&v);
        out.w.column_mut(j).copy_from_slice(&w);
    }
    Ok(out)
}

/// Output of [`rank1_power`].
#[derive(Debug, Clone)]
pub struct Rank1Fit {
    /// Single-component factors; the weight is `|lambda_hat|`.
    pub factors: OrthFactors,
    /// `A ×1 u^T ×2 v^T ×3 w^T`, made nonnegative by flipping `u` if needed.
    pub lambda_hat: f64,
    /// Number of power updates performed (`t_max - 1`).
    pub updates: usize,
}

impl Rank1Fit {
    pub fn u(&self) -> Vec<f64> {
        self.factors.vector(Mode::One, 0)
    }

    pub fn v(&self) -> Vec<f64> {
        self.factors.vector(Mode::Two, 0)
    }

    pub fn w(&self) -> Vec<f64> {
        self.factors.vector(Mode::Three, 0)
    }

    /// `lambda_hat (u ⊗ v ⊗ w)`.
    pub fn t_hat(&self) -> Tensor3 {
        Tensor3::rank_one(self.lambda_hat, &self.u(), &self.v(), &self.w())
    }

    pub fn entry(&self, i: usize, j: usize, k: usize) -> f64 {
        self.lambda_hat * self.factors.u[(i, 0)] * self.factors.v[(j, 0)] * self.factors.w[(k, 0)]
    }
}

/// `max(10, ceil(2 ln p))` with `p` the largest dimension.
pub fn default_rank1_iterations(dims: [usize; 3]) -> usize {
    let p = *dims.iter().max().expect("three dims") as f64;
    ((2.0 * p.ln()).ceil() as usize).max(10)
}

/// Rank-one power iteration: spectral initialization, then Jacobi updates
/// while `t < t_max` starting from `t = 1`.
pub fn rank1_power(a: &Tensor3, t_max: usize) -> Result<Rank1Fit> {
    if t_max == 0 {
        return arg("rank-one power iteration needs t_max >= 1");
    }
    let init = spectral_init(a, RankTriple::uniform(1))?;
    let col = |m: &Matrix| m.column(0).iter().copied().collect::<Vec<f64>>();
    let (mut u, mut v, mut w) = (col(&init[0]), col(&init[1]), col(&init[2]));
    for _ in 1..t_max {
        [u, v, w] = rank_one_step(a, &u, &v, &w, 0)?;
    }
    let mut lambda = dot(&contract_vectors(a, Mode::One, &v, &w)?, &u);
    if lambda < 0.0 {
        lambda = -lambda;
        u.iter_mut().for_each(|x| *x = -*x);
    }
    if !(lambda > 0.0) {
        return numeric("rank-one fit has zero weight; the input carries no signal");
    }
    let as_col = |x: &[f64]| Matrix::from_column_slice(x.len(), 1, x);
    let factors = OrthFactors::new(vec![lambda], as_col(&u), as_col(&v), as_col(&w))?;
    Ok(Rank1Fit { factors, lambda_hat: lambda, updates: t_max - 1 })
}

/// Initialization for [`orth_refine`] by successive rank-one extraction and
/// deflation, followed by a polar re-orthogonalization of each factor.
pub fn orth_init_deflation(a: &Tensor3, r: usize, t_max: usize) -> Result<OrthFactors> {
    let dims = a.dims();
    if r == 0 || dims.iter().any(|&d| r > d) {
        return arg(format!("cannot extract {r} orthogonal components from a {dims:?} tensor"));
    }
    let mut residual = a.clone();
    let mut cols: [Matrix; 3] = [Matrix::zeros(dims[0], r), Matrix::zeros(dims[1], r), Matrix::zeros(dims[2], r)];
    for j in 0..r {
        let fit = rank1_power(&residual, t_max)?;
        residual.axpy(-1.0, &fit.t_hat())?;
        for mode in Mode::ALL {
            cols[mode.index()].set_column(j, &fit.factors.factor(mode).column(0));
        }
    }
    let [u, v, w] = cols;
    let (u, v, w) = (polar_orthonormalize(&u)?, polar_orthonormalize(&v)?, polar_orthonormalize(&w)?);
    let mut lambdas = Vec::with_capacity(r);
    let mut u = u;
    for j in 0..r {
        let uj: Vec<f64> = u.column(j).iter().copied().collect();
        let vj: Vec<f64> = v.column(j).iter().copied().collect();
        let wj: Vec<f64> = w.column(j).iter().copied().collect();
        let l = dot(&contract_vectors(a, Mode::One, &vj, &wj)?, &uj);
        if l < 0.0 {
            u.column_mut(j).neg_mut();
        }
        if l == 0.0 {
            return numeric(format!("component {} has zero weight after deflation", j + 1));
        }
        lambdas.push(l.abs());
    }
    OrthFactors::new(lambdas, u, v, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr_orthonormalize;
    use crate::subspace::sin_theta;
    use crate::tensor::multilinear_product;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gauss(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
    }

    fn tucker(rng: &mut ChaCha8Rng, p: usize, r: usize, scale: f64) -> TuckerFactors {
        let g = Tensor3::from_fn([r, r, r], |_, _, _| scale * { let z: f64 = StandardNormal.sample(&mut *rng); z });
        let f = [
            qr_orthonormalize(&gauss(rng, p, r)),
            qr_orthonormalize(&gauss(rng, p, r)),
            qr_orthonormalize(&gauss(rng, p, r)),
        ];
        TuckerFactors::new(g, f).unwrap()
    }

    fn noise(rng: &mut ChaCha8Rng, dims: [usize; 3], sigma: f64) -> Tensor3 {
        Tensor3::from_fn(dims, |_, _, _| sigma * { let z: f64 = StandardNormal.sample(&mut *rng); z })
    }

    fn perturb(rng: &mut ChaCha8Rng, u: &Matrix, eps: f64) -> Matrix {
        let d = gauss(rng, u.nrows(), u.ncols());
        let d = &d - u * (u.transpose() * &d);
        let d = d.scale(eps / d.norm());
        qr_orthonormalize(&(u + d))
    }

    #[test]
    fn hooi_exact_low_rank_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = tucker(&mut rng, 12, 3, 5.0);
        let a = t.reconstruct();
        let fit = hooi(&a, RankTriple::uniform(3), 3).unwrap();
        for mode in Mode::ALL {
            let d = sin_theta(fit.factors.factor(mode), t.factor(mode)).unwrap();
            assert!(d.spectral <= 1e-8, "{mode}: {}", d.spectral);
        }
        assert!((fit.factors.reconstruct().sub(&a).unwrap().frobenius_norm()) < 1e-9 * a.frobenius_norm());
    }

    #[test]
    fn hooi_zero_tensor_flags_rank_deficiency() {
        let a = Tensor3::zeros([4, 5, 6]);
        let fit = hooi(&a, RankTriple::uniform(2), 2).unwrap();
        assert_eq!(fit.diagnostics.objective, 0.0);
        assert!(fit.diagnostics.rank_deficient);
        assert!(fit.diagnostics.degenerate());
    }

    #[test]
    fn hooi_rejects_oversized_rank() {
        let a = Tensor3::zeros([2, 5, 6]);
        assert!(matches!(hooi(&a, RankTriple::uniform(3), 1), Err(crate::Error::Argument(_))));
    }

    #[test]
    fn hooi_objective_beats_random_restarts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = noise(&mut rng, [6, 6, 6], 1.0);
        let ranks = RankTriple::uniform(2);
        let fit = hooi_with_schedule(&a, ranks, 200, Schedule::GaussSeidel).unwrap();
        let mut best: f64 = 0.0;
        for _ in 0..50 {
            let init = [0, 1, 2].map(|_| qr_orthonormalize(&gauss(&mut rng, 6, 2)));
            let restart = power_sweeps(&a, &init, 200, Schedule::GaussSeidel).unwrap();
            best = best.max(restart.diagnostics.objective);
        }
        assert!(fit.diagnostics.objective >= best - 1e-6, "{} vs {best}", fit.diagnostics.objective);
    }

    #[test]
    fn gauss_seidel_objective_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let t = tucker(&mut rng, 10, 2, 3.0);
            let a = t.reconstruct().add(&noise(&mut rng, [10, 10, 10], 1.0)).unwrap();
            let init = [0, 1, 2].map(|_| qr_orthonormalize(&gauss(&mut rng, 10, 2)));
            let fit = power_sweeps(&a, &init, 15, Schedule::GaussSeidel).unwrap();
            for w in fit.diagnostics.objective_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-10, "{:?}", fit.diagnostics.objective_trace);
            }
        }
    }

    #[test]
    fn refine_fixed_point_and_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let t = tucker(&mut rng, 15, 2, 4.0);
            let a = t.reconstruct();
            let fixed = pca_refine(&a, &t).unwrap();
            let per = [0, 1, 2].map(|j| perturb(&mut rng, &t.factors[j], 0.3));
            let core = project_core(&a, &per[0], &per[1], &per[2]).unwrap();
            let init = TuckerFactors::new(core, per).unwrap();
            let out = pca_refine(&a, &init).unwrap();
            for mode in Mode::ALL {
                assert!(sin_theta(fixed.factors.factor(mode), t.factor(mode)).unwrap().spectral <= 1e-10);
                assert!(sin_theta(out.factors.factor(mode), t.factor(mode)).unwrap().spectral <= 1e-8);
                assert!(sin_theta(init.factor(mode), t.factor(mode)).unwrap().spectral <= 0.3 + 1e-12);
            }
        }
    }

    #[test]
    fn refine_from_spectral_init_equals_two_sweep_hooi() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = tucker(&mut rng, 9, 2, 3.0);
        let a = t.reconstruct().add(&noise(&mut rng, [9, 9, 9], 0.5)).unwrap();
        let ranks = RankTriple::uniform(2);
        let f0 = spectral_init(&a, ranks).unwrap();
        let init = TuckerFactors::new(project_core(&a, &f0[0], &f0[1], &f0[2]).unwrap(), f0).unwrap();
        let refined = pca_refine(&a, &init).unwrap();
        let h = hooi(&a, ranks, 2).unwrap();
        assert_eq!(refined.factors, h.factors);
    }

    #[test]
    fn outputs_are_orthonormal_and_permutation_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let dims = [7, 8, 9];
        let g = Tensor3::from_fn([2, 2, 2], |_, _, _| 4.0 * { let z: f64 = StandardNormal.sample(&mut rng); z });
        let fs = [0, 1, 2].map(|j| qr_orthonormalize(&gauss(&mut rng, dims[j], 2)));
        let a = multilinear_product(&g, &fs[0], &fs[1], &fs[2])
            .unwrap()
            .add(&noise(&mut rng, dims, 0.3))
            .unwrap();
        let fit = hooi(&a, RankTriple::uniform(2), 4).unwrap();
        for mode in Mode::ALL {
            assert!(crate::linalg::orthonormality_defect(fit.factors.factor(mode)) <= 1e-10);
        }
        let perm = [2, 0, 1];
        let b = a.permute_axes(perm).unwrap();
        let fit_b = hooi(&b, RankTriple::uniform(2), 4).unwrap();
        for (out_axis, &in_axis) in perm.iter().enumerate() {
            let d = sin_theta(&fit_b.factors.factors[out_axis], &fit.factors.factors[in_axis]).unwrap();
            assert!(d.spectral < 1e-8);
        }
    }

    fn orth_truth(rng: &mut ChaCha8Rng, p: usize, lambdas: Vec<f64>) -> OrthFactors {
        let r = lambdas.len();
        OrthFactors::new(
            lambdas,
            qr_orthonormalize(&gauss(rng, p, r)),
            qr_orthonormalize(&gauss(rng, p, r)),
            qr_orthonormalize(&gauss(rng, p, r)),
        )
        .unwrap()
    }

    #[test]
    fn orth_refine_rank_one_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let truth = orth_truth(&mut rng, 8, vec![3.5]);
        let out = orth_refine(&truth.reconstruct(), &truth).unwrap();
        assert!((&out.u - &truth.u).norm() < 1e-12);
        assert!((&out.v - &truth.v).norm() < 1e-12);
        assert!((out.lambdas[0] - 3.5).abs() < 1e-12);
    }

    #[test]
    fn orth_refine_separates_two_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = 40;
        let truth = orth_truth(&mut rng, p, vec![2.0, 1.0]);
        let a = truth.reconstruct();
        let mut init = truth.clone();
        for mode in Mode::ALL {
            let f = init.factor_mut(mode);
            for j in 0..2 {
                let col = Matrix::from_column_slice(p, 1, f.column(j).as_slice());
                f.set_column(j, &perturb(&mut rng, &col, 0.1).column(0));
            }
        }
        let out = orth_refine(&a, &init).unwrap();
        for mode in Mode::ALL {
            let cross = out.factor(mode).transpose() * truth.factor(mode);
            assert!(cross[(0, 1)].abs() <= 1e-6 && cross[(1, 0)].abs() <= 1e-6, "{cross}");
            assert!((cross[(0, 0)].abs() - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn orth_refine_sign_flip_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let truth = orth_truth(&mut rng, 10, vec![5.0]);
        let a = truth.reconstruct().add(&noise(&mut rng, [10, 10, 10], 0.3)).unwrap();
        let base = orth_refine(&a, &truth).unwrap();
        let mut flipped = truth.clone();
        flipped.u.neg_mut();
        let out = orth_refine(&a, &flipped).unwrap();
        for mode in Mode::ALL {
            let s = out.factor(mode).dot(base.factor(mode)).signum();
            assert!((out.factor(mode) - base.factor(mode) * s).norm() < 1e-12);
        }
        assert!((out.lambdas[0] - base.lambdas[0]).abs() < 1e-12);
    }

    #[test]
    fn orth_refine_zero_vector_names_component() {
        let u = Matrix::identity(3, 1);
        let init = OrthFactors::new(vec![1.0], u.clone(), u.clone(), u).unwrap();
        let a = Tensor3::zeros([3, 3, 3]);
        match orth_refine(&a, &init) {
            Err(crate::Error::Numeric(m)) => assert!(m.contains("component 1"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rank1_canonical_spike() {
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let a = Tensor3::rank_one(5.0, &e1, &e1, &e1);
        let fit = rank1_power(&a, 10).unwrap();
        assert_eq!(fit.lambda_hat, 5.0);
        assert_eq!(fit.u(), e1.to_vec());
        assert_eq!(fit.w(), e1.to_vec());
        assert_eq!(fit.t_hat(), a);
        assert_eq!(fit.updates, 9);
    }

    #[test]
    fn rank1_noiseless_random_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let truth = orth_truth(&mut rng, 12, vec![2.0]);
        let a = truth.reconstruct();
        let fit = rank1_power(&a, 3).unwrap();
        for mode in Mode::ALL {
            let ip = fit.factors.factor(mode).dot(truth.factor(mode)).abs();
            assert!((1.0 - ip).abs() < 1e-10);
        }
        assert!((fit.lambda_hat - 2.0).abs() < 1e-10);
        assert!(fit.t_hat().sub(&a).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn rank1_noisy_overlap_rate() {
        let p = 50usize;
        let lambda = (p as f64).powf(0.9);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let truth = orth_truth(&mut rng, p, vec![lambda]);
            let a = truth.reconstruct().add(&noise(&mut rng, [p, p, p], 1.0)).unwrap();
            let fit = rank1_power(&a, default_rank1_iterations(a.dims())).unwrap();
            let ip = fit.factors.u.dot(&truth.u);
            assert!(ip * ip >= 1.0 - 3.0 * p as f64 / (lambda * lambda), "seed {seed}: {ip}");
        }
    }

    #[test]
    fn default_iterations() {
        assert_eq!(default_rank1_iterations([5, 5, 5]), 10);
        assert_eq!(default_rank1_iterations([1000, 3, 3]), 14);
    }

    #[test]
    fn deflation_init_finds_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = 20;
        let truth = orth_truth(&mut rng, p, vec![30.0, 20.0, 10.0]);
        let a = truth.reconstruct().add(&noise(&mut rng, [p, p, p], 0.05)).unwrap();
        let init = orth_init_deflation(&a, 3, 15).unwrap();
        let m = crate::subspace::match_components(&init, &truth).unwrap();
        assert!(m.overlaps.iter().all(|&o| o > 0.99), "{:?}", m.overlaps);
        assert!(crate::linalg::orthonormality_defect(&init.u) < 1e-10);
    }
}
