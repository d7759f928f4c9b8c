mod common;

use common::*;
use nalgebra::DMatrix;
use ris_chanest::tensor::{dominant_svd, hosvd3, left_singular_basis, norm2, svd, ComplexMatrix, DenseTensor};
use ris_chanest::{Complex64, Error};

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn oracle_singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_nalgebra(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Dominant eigenpair of the Hermitian PSD matrix `m^H m` by power iteration.
fn power_iteration(m: &ComplexMatrix) -> (f64, Vec<Complex64>) {
    let gram = naive_matmul(&m.adjoint(), m);
    let n = gram.cols();
    let mut v: Vec<Complex64> = (0..n).map(|i| c(1.0 + i as f64 * 0.1, 0.3 - i as f64 * 0.05)).collect();
    let mut lambda = 0.0;
    for _ in 0..20000 {
        let w: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| gram[(i, j)] * v[j]).sum()).collect();
        lambda = norm2(&w);
        let next: Vec<Complex64> = w.iter().map(|z| z / lambda).collect();
        let step = rel_err(&next, &v);
        v = next;
        if step <= 1e-15 {
            break;
        }
    }
    (lambda, v)
}

#[test]
fn dominant_sigma_matches_power_iteration_oracle() {
    let mut r = rng(31);
    for _ in 0..10 {
        let m = random_matrix(4, 6, &mut r);
        let t = dominant_svd(&m).unwrap();
        let (lambda, _) = power_iteration(&m);
        assert!((t.sigma - lambda.sqrt()).abs() <= 1e-10 * t.sigma, "{} vs {}", t.sigma, lambda.sqrt());
    }
}

#[test]
fn dominant_triple_vectors_are_unit_norm() {
    let mut r = rng(32);
    for &(rows, cols) in &[(4, 6), (6, 4), (1, 3), (3, 1), (8, 8)] {
        let t = dominant_svd(&random_matrix(rows, cols, &mut r)).unwrap();
        assert!((norm2(&t.u) - 1.0).abs() <= 1e-12);
        assert!((norm2(&t.v) - 1.0).abs() <= 1e-12);
        assert!(t.sigma >= 0.0);
    }
}

#[test]
fn dominant_triple_is_optimal_rank_one_approximation() {
    let mut r = rng(33);
    for rows in 1..=8 {
        for cols in 1..=8 {
            let m = random_matrix(rows, cols, &mut r);
            let t = dominant_svd(&m).unwrap();
            let approx = ComplexMatrix::from_fn(rows, cols, |i, j| t.u[i] * t.sigma * t.v[j].conj());
            let resid = m.sub(&approx).unwrap().frobenius_norm();
            let sv = oracle_singular_values(&m);
            let trailing = sv[1..].iter().map(|s| s * s).sum::<f64>().sqrt();
            assert!((t.sigma - sv[0]).abs() <= 1e-10 * sv[0]);
            assert!((resid - trailing).abs() <= 1e-10 * sv[0], "{rows}x{cols}: {resid} vs {trailing}");
        }
    }
}

#[test]
fn singular_values_match_full_oracle_at_64() {
    let mut r = rng(34);
    for &(rows, cols) in &[(64, 64), (64, 40), (40, 64)] {
        let m = random_matrix(rows, cols, &mut r);
        let ours = svd(&m).sigma;
        let oracle = oracle_singular_values(&m);
        assert_eq!(ours.len(), oracle.len());
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-10 * oracle[0], "{a} vs {b}");
        }
        let t = dominant_svd(&m).unwrap();
        assert!((t.sigma - oracle[0]).abs() <= 1e-10 * oracle[0]);
    }
}

#[test]
fn zero_inputs_are_rejected() {
    assert!(matches!(dominant_svd(&ComplexMatrix::zeros(4, 4)), Err(Error::Degenerate(_))));
    assert!(matches!(left_singular_basis(&ComplexMatrix::zeros(3, 5)), Err(Error::Degenerate(_))));
    assert!(matches!(hosvd3(&DenseTensor::zeros(&[3, 4, 5]).unwrap()), Err(Error::Degenerate(_))));
}

fn unitary_defect(u: &ComplexMatrix) -> f64 {
    let gram = naive_matmul(&u.adjoint(), u);
    gram.sub(&ComplexMatrix::identity(u.cols())).unwrap().frobenius_norm()
}

#[test]
fn hosvd_reconstructs_and_factors_are_unitary() {
    let mut r = rng(35);
    for dims in [[3, 4, 5], [4, 4, 5], [2, 8, 3], [5, 1, 2], [6, 2, 2]] {
        let len = dims.iter().product();
        let t = DenseTensor::from_vec(&dims, random_vec(len, &mut r)).unwrap();
        let hs = hosvd3(&t).unwrap();
        let rec = hs.reconstruct().unwrap();
        assert!(rel_err(rec.as_slice(), t.as_slice()) <= 1e-10);
        for (mode, u) in hs.factors.iter().enumerate() {
            assert_eq!(u.shape(), (dims[mode], dims[mode]));
            assert!(unitary_defect(u) < 1e-12);
            assert!(hs.mode_singular_values[mode].windows(2).all(|w| w[0] >= w[1]));
        }
    }
}

#[test]
fn hosvd_rejects_orders_other_than_three() {
    let t = DenseTensor::zeros(&[2, 2, 2, 2]).unwrap();
    assert!(matches!(hosvd3(&t), Err(Error::Argument(_))));
}

#[test]
fn hosvd_mode_factor_matches_deflation_oracle_up_to_phase() {
    let mut r = rng(36);
    let t = DenseTensor::from_vec(&[3, 4, 5], random_vec(60, &mut r)).unwrap();
    let hs = hosvd3(&t).unwrap();
    for mode in 0..3 {
        let mut residual = t.unfold(mode).unwrap();
        let u = &hs.factors[mode];
        for col in 0..u.cols() {
            // independent oracle: power iteration on R R^H of the deflated unfolding
            let (lambda, w) = power_iteration(&residual.adjoint());
            if lambda.sqrt() <= 1e-8 {
                break;
            }
            let ov: Complex64 = u.col(col).iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            assert!((ov.norm() - 1.0).abs() < 1e-8, "mode {mode} column {col}: |overlap| = {}", ov.norm());
            let rank_one = ComplexMatrix::from_fn(residual.rows(), residual.cols(), |i, j| {
                w[i] * (0..residual.rows()).map(|k| w[k].conj() * residual[(k, j)]).sum::<Complex64>()
            });
            residual = residual.sub(&rank_one).unwrap();
        }
    }
}

#[test]
fn rank_one_hosvd_concentrates_energy() {
    let mut r = rng(37);
    let g = random_vec(3, &mut r);
    let h = random_vec(4, &mut r);
    let e = random_vec(5, &mut r);
    let t = DenseTensor::from_fn(&[3, 4, 5], |i| g[i[0]] * h[i[1]] * e[i[2]]).unwrap();
    let hs = hosvd3(&t).unwrap();
    let expect = norm2(&g) * norm2(&h) * norm2(&e);
    let core = hs.core.as_slice();
    assert!((core[0].norm() - expect).abs() <= 1e-12 * expect);
    assert!(core[1..].iter().all(|z| z.norm() <= 1e-12 * expect));
}
