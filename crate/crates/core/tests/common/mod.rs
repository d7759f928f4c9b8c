#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_chanest::scenario::complex_gaussian;
use ris_chanest::tensor::ComplexMatrix;
use ris_chanest::Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_col_major(rows, cols, data).unwrap()
}

pub fn random_vec(len: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..len).map(|_| complex_gaussian(rng)).collect()
}

pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(Complex64::norm_sqr).sum();
    (num / den).sqrt()
}

pub fn mat_rel_err(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    rel_err(a.as_slice(), b.as_slice())
}

/// Naive triple-loop product.
pub fn naive_matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.cols(), b.rows());
    ComplexMatrix::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).map(|t| a[(i, t)] * b[(t, j)]).sum())
}

/// Column-wise Kronecker product written out entry by entry.
pub fn naive_khatri_rao(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (i_n, j_n) = (a.rows(), b.rows());
    ComplexMatrix::from_fn(i_n * j_n, a.cols(), |row, q| a[(row / j_n, q)] * b[(row % j_n, q)])
}

/// Solves `min ||A x - b||` through the normal equations `A^H A x = A^H b`
/// with Gaussian elimination and partial pivoting.
pub fn normal_equations(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let ata = naive_matmul(&a.adjoint(), a);
    let atb = naive_matmul(&a.adjoint(), b);
    solve_square(&ata, &atb)
}

pub fn solve_square(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n).map(|r| a.row(r)).collect();
    let mut rhs: Vec<Vec<Complex64>> = (0..n).map(|r| b.row(r)).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm())).unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[r][k] -= f * v;
            }
            for k in 0..rhs[r].len() {
                let v = rhs[col][k];
                rhs[r][k] -= f * v;
            }
        }
    }
    let cols = b.cols();
    let mut x = ComplexMatrix::zeros(n, cols);
    for j in 0..cols {
        for r in (0..n).rev() {
            let mut acc = rhs[r][j];
            for k in r + 1..n {
                acc -= m[r][k] * x[(k, j)];
            }
            x[(r, j)] = acc / m[r][r];
        }
    }
    x
}
