mod support;

use proptest::prelude::*;
use support::*;
use tensorinf_core::linalg::{singular_values, top_left_singular};
use tensorinf_core::subspace::max_weight_assignment;
use tensorinf_core::{
    fold, kronecker, match_components, matricize, multilinear_product, procrustes_align, sin_theta, Matrix, Mode,
    OrthFactors,
};

fn dims_strategy() -> impl Strategy<Value = [usize; 3]> {
    [1usize..6, 1usize..6, 1usize..6]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matricize_fold_bit_exact(dims in dims_strategy(), seed in any::<u64>()) {
        let t = gauss_tensor(&mut rng(seed), dims);
        for mode in Mode::ALL {
            let back = fold(&matricize(&t, mode), mode, dims).unwrap();
            prop_assert_eq!(back.data(), t.data());
        }
    }

    #[test]
    fn kronecker_identity_and_norms(dims in [2usize..6, 2usize..6, 2usize..6], r in 1usize..3, seed in any::<u64>()) {
        let mut g = rng(seed);
        let r = r.min(*dims.iter().min().unwrap());
        let core = gauss_tensor(&mut g, [r, r, r]);
        let u = [haar(&mut g, dims[0], r), haar(&mut g, dims[1], r), haar(&mut g, dims[2], r)];
        let t = multilinear_product(&core, &u[0], &u[1], &u[2]).unwrap();
        let tol = 1e-10 * core.frobenius_norm().max(1.0);
        for mode in Mode::ALL {
            let (a, b) = mode.others();
            let rhs = &u[mode.index()] * matricize(&core, mode) * kronecker(&u[a.index()], &u[b.index()]).transpose();
            prop_assert!((matricize(&t, mode) - rhs).norm() <= tol);
            prop_assert!((matricize(&t, mode).norm() - t.frobenius_norm()).abs() <= tol);
        }
    }

    #[test]
    fn sin_theta_identities(p in 3usize..12, r in 1usize..3, seed in any::<u64>()) {
        let mut g = rng(seed);
        let u = haar(&mut g, p, r);
        let v = haar(&mut g, p, r);
        let d = sin_theta(&u, &v).unwrap();
        let back = sin_theta(&v, &u).unwrap();
        prop_assert!((d.frobenius - back.frobenius).abs() < 1e-10);
        prop_assert!(d.spectral <= d.frobenius + 1e-12);
        prop_assert!(d.frobenius <= (r as f64).sqrt() * d.spectral + 1e-12);
        let proj = &u * u.transpose() - &v * v.transpose();
        prop_assert!((d.frobenius.powi(2) - 0.5 * proj.norm_squared()).abs() <= 1e-9);
        let q = haar(&mut g, r, r);
        let rot = sin_theta(&(&u * &q), &v).unwrap();
        prop_assert!((rot.spectral - d.spectral).abs() <= 1e-10);
        prop_assert!((rot.frobenius - d.frobenius).abs() <= 1e-10);
        // definition through the singular values of u^T v
        let s = singular_values(&(u.transpose() * &v));
        let smin = s[r - 1].min(1.0);
        prop_assert!((d.spectral - (1.0 - smin * smin).max(0.0).sqrt()).abs() <= 1e-7);
    }

    #[test]
    fn procrustes_bound(p in 4usize..15, r in 1usize..4, eps in 0.01f64..0.5, seed in any::<u64>()) {
        let mut g = rng(seed);
        let u = haar(&mut g, p, r);
        let u_hat = perturb(&mut g, &u, eps);
        let rot = procrustes_align(&u_hat, &u).unwrap();
        let gap = singular_values(&(u_hat.transpose() * &u - &rot))[0];
        let spectral = sin_theta(&u_hat, &u).unwrap().spectral;
        prop_assert!(gap <= spectral * spectral + 1e-12);
    }

    #[test]
    fn top_singular_matches_full_svd(seed in any::<u64>(), r in 1usize..5) {
        let m = gauss(&mut rng(seed), 5, 7);
        // independent oracle: eigen-decomposition of the Gram matrix
        let eig = (&m * m.transpose()).symmetric_eigen();
        let mut order: Vec<usize> = (0..5).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
        let lead = top_left_singular(&m, r).unwrap();
        for j in 0..r {
            prop_assert!((lead.values[j] - vals[j]).abs() < 1e-9);
        }
        if r == 5 || vals[r - 1] - vals[r] > 1e-6 {
            let oracle = Matrix::from_fn(5, r, |i, j| eig.eigenvectors[(i, order[j])]);
            prop_assert!(sin_theta(&lead.vectors, &oracle).unwrap().spectral <= 1e-8);
        }
        prop_assert!(tensorinf_core::linalg::orthonormality_defect(&lead.vectors) <= 1e-10);
    }

    #[test]
    fn assignment_is_optimal(seed in any::<u64>(), r in 1usize..6) {
        let mut g = rng(seed);
        let gain: Vec<Vec<f64>> = (0..r).map(|_| (0..r).map(|_| normal(&mut g).abs()).collect()).collect();
        let assign = max_weight_assignment(&gain);
        let total: f64 = assign.iter().enumerate().map(|(i, &j)| gain[i][j]).sum();
        let mut best = f64::NEG_INFINITY;
        for perm in permutations(r) {
            best = best.max(perm.iter().enumerate().map(|(i, &j)| gain[i][j]).sum());
        }
        prop_assert!(total >= best - 1e-12);
        let mut seen = assign.clone();
        seen.sort();
        prop_assert_eq!(seen, (0..r).collect::<Vec<_>>());
    }
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(r - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, r - 1);
            out.push(p);
        }
    }
    out
}

#[test]
fn matching_recovers_shuffles() {
    for seed in 0..40 {
        let mut g = rng(seed);
        let r = 2 + (seed as usize % 4);
        let p = 12;
        let truth = orth(&mut g, p, (0..r).map(|j| (r - j) as f64).collect());
        let shuffle = {
            let all = permutations(r);
            all[seed as usize % all.len()].clone()
        };
        let noisy = |m: &Matrix, g: &mut _| {
            let mut out = Matrix::zeros(p, r);
            for (j, &src) in shuffle.iter().enumerate() {
                let col = Matrix::from_column_slice(p, 1, m.column(src).as_slice());
                let sign = if (seed + j as u64) % 3 == 0 { -1.0 } else { 1.0 };
                out.set_column(j, &(perturb(g, &col, 0.2).column(0) * sign));
            }
            out
        };
        let (u, v, w) = (noisy(&truth.u, &mut g), noisy(&truth.v, &mut g), noisy(&truth.w, &mut g));
        let est = OrthFactors::new(shuffle.iter().map(|&s| truth.lambdas[s]).collect(), u, v, w).unwrap();
        let m = match_components(&est, &truth).unwrap();
        // est component j came from truth component shuffle[j]
        for (j, &src) in shuffle.iter().enumerate() {
            assert_eq!(m.permutation[src], j, "seed {seed}");
        }
        assert!(m.overlaps.iter().all(|&o| o > 0.9));
        let aligned = m.align(&est);
        for mode in Mode::ALL {
            for j in 0..r {
                assert!(aligned.factor(mode).column(j).dot(&truth.factor(mode).column(j)) > 0.0);
            }
        }
        // brute force agrees on the objective
        let cross = truth.u.transpose() * &est.u;
        let best = permutations(r)
            .into_iter()
            .map(|perm| (0..r).map(|j| cross[(j, perm[j])].abs()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((m.overlaps.iter().sum::<f64>() - best).abs() < 1e-12);
    }
}

#[test]
fn kronecker_examples() {
    assert_eq!(kronecker(&Matrix::identity(2, 2), &Matrix::identity(3, 3)), Matrix::identity(6, 6));
    let e = kronecker(&Matrix::from_column_slice(2, 1, &[1.0, 0.0]), &Matrix::from_column_slice(2, 1, &[0.0, 1.0]));
    assert_eq!(e.as_slice(), &[0.0, 1.0, 0.0, 0.0]);
}
