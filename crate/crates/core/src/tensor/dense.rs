use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 4;

/// Dense complex tensor of order 2 to 4, linearized with the first index
/// varying fastest.
///
/// Modes are zero-based throughout the API: mode `0` of an `L x M x K x P`
/// received-signal tensor is the receive-antenna mode.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl DenseTensor {
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self { dims: dims.to_vec(), data: vec![Complex64::new(0.0, 0.0); dims.iter().product()] })
    }

    pub fn from_vec(dims: &[usize], data: Vec<Complex64>) -> Result<Self> {
        check_dims(dims)?;
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "{} entries supplied for dims {dims:?} ({expected} expected)",
                data.len()
            )));
        }
        Ok(Self { dims: dims.to_vec(), data })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> Complex64) -> Result<Self> {
        check_dims(dims)?;
        let total: usize = dims.iter().product();
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(total);
        for _ in 0..total {
            data.push(f(&idx));
            increment(&mut idx, dims);
        }
        Ok(Self { dims: dims.to_vec(), data })
    }

    /// The order-`order` identity (superdiagonal) tensor of side `n`.
    pub fn identity(order: usize, n: usize) -> Result<Self> {
        let dims = vec![n; order];
        let mut t = Self::zeros(&dims)?;
        for i in 0..n {
            let idx = vec![i; order];
            *t.get_mut(&idx) = Complex64::new(1.0, 0.0);
        }
        Ok(t)
    }

    /// Sum of rank-one terms `Σ_n a1[:,n] ∘ a2[:,n] ∘ ...`, assembled from the
    /// mode-0 unfolding `A1 (A_last ⋄ ... ⋄ A2)^T`.
    pub fn from_cp_factors(factors: &[&ComplexMatrix]) -> Result<Self> {
        if factors.len() < MIN_ORDER || factors.len() > MAX_ORDER {
            return Err(Error::Argument(format!("CP order {} not in 2..=4", factors.len())));
        }
        let rank = factors[0].cols();
        if factors.iter().any(|f| f.cols() != rank) {
            return Err(Error::Dimension("CP factors must share a column count".into()));
        }
        let mut kr = factors[factors.len() - 1].clone();
        for f in factors[1..factors.len() - 1].iter().rev() {
            kr = kr.khatri_rao(f)?;
        }
        let unfolded = factors[0].matmul(&kr.transpose())?;
        let dims: Vec<usize> = factors.iter().map(|f| f.rows()).collect();
        Self::fold(&unfolded, 0, &dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut lin = 0;
        let mut stride = 1;
        for (&i, &d) in idx.iter().zip(&self.dims) {
            debug_assert!(i < d);
            lin += i * stride;
            stride *= d;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.linear_index(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut Complex64 {
        let lin = self.linear_index(idx);
        &mut self.data[lin]
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dims: self.dims.clone(), data })
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(Error::Argument(format!(
                "mode {mode} out of range for an order-{} tensor",
                self.order()
            )));
        }
        Ok(())
    }

    /// Mode-`mode` matricization. Rows index `dims[mode]`; columns enumerate
    /// the remaining modes with the lowest remaining mode varying fastest.
    pub fn unfold(&self, mode: usize) -> Result<ComplexMatrix> {
        self.check_mode(mode)?;
        let rows = self.dims[mode];
        let cols = self.data.len() / rows;
        // stride of `mode` in the linear layout, and the block it spans
        let inner: usize = self.dims[..mode].iter().product();
        let outer = cols / inner;
        let mut out = ComplexMatrix::zeros(rows, cols);
        for o in 0..outer {
            for r in 0..rows {
                let src = &self.data[(o * rows + r) * inner..(o * rows + r + 1) * inner];
                for (i, &z) in src.iter().enumerate() {
                    out[(r, o * inner + i)] = z;
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`unfold`](Self::unfold).
    pub fn fold(matrix: &ComplexMatrix, mode: usize, dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        if mode >= dims.len() {
            return Err(Error::Argument(format!("mode {mode} out of range for dims {dims:?}")));
        }
        let rows = dims[mode];
        let total: usize = dims.iter().product();
        if matrix.rows() != rows || matrix.rows() * matrix.cols() != total {
            return Err(Error::Dimension(format!(
                "cannot fold a {}x{} matrix along mode {mode} into {dims:?}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let inner: usize = dims[..mode].iter().product();
        let outer = matrix.cols() / inner;
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        for o in 0..outer {
            for r in 0..rows {
                let dst = &mut data[(o * rows + r) * inner..(o * rows + r + 1) * inner];
                for (i, z) in dst.iter_mut().enumerate() {
                    *z = matrix[(r, o * inner + i)];
                }
            }
        }
        Ok(Self { dims: dims.to_vec(), data })
    }

    /// Mode-`mode` product `self ×_mode m`.
    pub fn mode_product(&self, m: &ComplexMatrix, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        if m.cols() != self.dims[mode] {
            return Err(Error::Dimension(format!(
                "mode-{mode} product needs {} matrix columns, got {}",
                self.dims[mode],
                m.cols()
            )));
        }
        let product = m.matmul(&self.unfold(mode)?)?;
        let mut dims = self.dims.clone();
        dims[mode] = m.rows();
        Self::fold(&product, mode, &dims)
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < MIN_ORDER || dims.len() > MAX_ORDER {
        return Err(Error::Argument(format!("tensor order {} not in 2..=4", dims.len())));
    }
    if dims.contains(&0) {
        return Err(Error::Argument(format!("zero-length dimension in {dims:?}")));
    }
    Ok(())
}

fn increment(idx: &mut [usize], dims: &[usize]) {
    for (i, &d) in idx.iter_mut().zip(dims) {
        *i += 1;
        if *i < d {
            return;
        }
        *i = 0;
    }
}
