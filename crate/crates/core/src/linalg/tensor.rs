use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{singular_values, DenseMatrix, RankPolicy};
use crate::error::{Error, Result};

/// Dense `D`-way array of reals.
///
/// Entries are stored row-major: the last index varies fastest. Modes are
/// 0-based throughout the API.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::DimensionMismatch("tensor needs at least one mode".into()));
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need {len} entries, got {}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tensor entries".into()));
        }
        Ok(DenseTensor { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        DenseTensor {
            dims,
            data: vec![0.0; len],
        }
    }

    /// Builds a tensor from a function of the multi-index.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let len: usize = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, &dims);
        }
        DenseTensor { dims, data }
    }

    /// `a_1 ⊗ a_2 ⊗ … ⊗ a_D`.
    pub fn outer(vectors: &[&[f64]]) -> Self {
        let dims: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
        DenseTensor::from_fn(dims, |idx| {
            idx.iter().zip(vectors).map(|(&i, v)| v[i]).product()
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
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

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let off = self.offset(idx);
        self.data[off] = value;
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        DenseTensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &DenseTensor) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: f64, other: &DenseTensor) -> Result<Self> {
        self.zip_with(other, |a, b| a + c * b)
    }

    fn zip_with(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "tensor dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(DenseTensor {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn distance(&self, other: &DenseTensor) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Mode-`mode` flattening, `dims[mode] × Π_{j≠mode} dims[j]`.
    ///
    /// Column index enumerates the remaining modes in increasing mode order with
    /// the earliest remaining mode varying slowest, so for `D = 2`
    /// `unfold(0) = S` and `unfold(1) = Sᵀ`.
    pub fn unfold(&self, mode: usize) -> Result<DenseMatrix> {
        self.check_mode(mode)?;
        let rows = self.dims[mode];
        let cols = self.len().checked_div(rows).unwrap_or(0);
        let mut out = DMatrix::zeros(rows, cols);
        let col_strides = remaining_strides(&self.dims, mode);
        let mut idx = vec![0usize; self.dims.len()];
        for &v in &self.data {
            let col: usize = idx
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != mode)
                .map(|(j, &i)| i * col_strides[j])
                .sum();
            out[(idx[mode], col)] = v;
            increment(&mut idx, &self.dims);
        }
        Ok(out)
    }

    /// `self ×_mode m`: replaces mode `mode` by `m · (mode-fibres)`.
    pub fn mode_product(&self, mode: usize, m: &DenseMatrix) -> Result<DenseTensor> {
        self.check_mode(mode)?;
        if m.ncols() != self.dims[mode] {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} factor has {} columns, tensor mode size is {}",
                m.ncols(),
                self.dims[mode]
            )));
        }
        let product = m * self.unfold(mode)?;
        let mut dims = self.dims.clone();
        dims[mode] = m.nrows();
        fold(&product, mode, &dims)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.dims.len() {
            Err(Error::OutOfRange(format!(
                "mode {mode} for a tensor of order {}",
                self.dims.len()
            )))
        } else {
            Ok(())
        }
    }
}

/// Inverse of [`DenseTensor::unfold`].
pub fn fold(m: &DenseMatrix, mode: usize, dims: &[usize]) -> Result<DenseTensor> {
    if mode >= dims.len() {
        return Err(Error::OutOfRange(format!("mode {mode} for order {}", dims.len())));
    }
    let len: usize = dims.iter().product();
    if m.nrows() != dims[mode] || m.nrows() * m.ncols() != len {
        return Err(Error::DimensionMismatch(format!(
            "cannot fold {}x{} into {dims:?} along mode {mode}",
            m.nrows(),
            m.ncols()
        )));
    }
    let col_strides = remaining_strides(dims, mode);
    let mut data = Vec::with_capacity(len);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..len {
        let col: usize = idx
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != mode)
            .map(|(j, &i)| i * col_strides[j])
            .sum();
        data.push(m[(idx[mode], col)]);
        increment(&mut idx, dims);
    }
    Ok(DenseTensor {
        dims: dims.to_vec(),
        data,
    })
}

/// `(U_1 ⊗ … ⊗ U_D) t`, applied one mode at a time.
pub fn multilinear_multiply(factors: &[DenseMatrix], t: &DenseTensor) -> Result<DenseTensor> {
    if factors.len() != t.ndim() {
        return Err(Error::DimensionMismatch(format!(
            "{} factors for a tensor of order {}",
            factors.len(),
            t.ndim()
        )));
    }
    let mut out = t.clone();
    for (mode, u) in factors.iter().enumerate() {
        out = out.mode_product(mode, u)?;
    }
    Ok(out)
}

/// Ranks of every flattening under `policy`.
pub fn multilinear_rank(t: &DenseTensor, policy: RankPolicy) -> Result<Vec<usize>> {
    (0..t.ndim())
        .map(|mode| {
            let sv = singular_values(&t.unfold(mode)?)?;
            policy.accepted_rank(&sv)
        })
        .collect()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for j in (0..dims.len().saturating_sub(1)).rev() {
        s[j] = s[j + 1] * dims[j + 1];
    }
    s
}

/// Row-major strides over the modes other than `mode`; the entry at `mode` is unused.
fn remaining_strides(dims: &[usize], mode: usize) -> Vec<usize> {
    let mut s = vec![0usize; dims.len()];
    let mut acc = 1usize;
    for j in (0..dims.len()).rev() {
        if j == mode {
            continue;
        }
        s[j] = acc;
        acc *= dims[j];
    }
    s
}

fn increment(idx: &mut [usize], dims: &[usize]) {
    for j in (0..dims.len()).rev() {
        idx[j] += 1;
        if idx[j] < dims[j] {
            return;
        }
        idx[j] = 0;
    }
}
