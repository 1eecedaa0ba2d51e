//! Dense complex tensors in row-major layout.
//!
//! Every contraction is reduced to a single matrix product: the contracted
//! axes of the left operand are permuted to the back, those of the right
//! operand to the front, and both are reshaped into matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("data length {len} does not match shape {shape:?}")]
    DataLength { shape: Vec<usize>, len: usize },

    #[error("shape {0:?} contains a zero-sized index")]
    ZeroDimension(Vec<usize>),

    #[error("axis {axis} out of range for tensor of rank {rank}")]
    AxisOutOfRange { axis: usize, rank: usize },

    #[error("axis {axis} listed twice")]
    DuplicateAxis { axis: usize },

    #[error("contraction axis lists differ in length ({0} vs {1})")]
    AxisCountMismatch(usize, usize),

    #[error("cannot contract axis {axis_a} (dim {dim_a}) with axis {axis_b} (dim {dim_b})")]
    ShapeMismatch {
        axis_a: usize,
        axis_b: usize,
        dim_a: usize,
        dim_b: usize,
    },

    #[error("{order:?} is not a permutation of 0..{rank}")]
    InvalidPermutation { order: Vec<usize>, rank: usize },

    #[error("cannot reshape {from:?} into {to:?}")]
    InvalidReshape { from: Vec<usize>, to: Vec<usize> },

    #[error("expected a rank-{expected} tensor, found rank {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("operation produced non-finite entries")]
    NonFinite,

    #[error("singular value decomposition failed to converge")]
    DecompositionFailed,
}

pub type TensorResult<T> = Result<T, TensorError>;

/// Dense multi-index array of complex numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    strides
}

fn check_axes(axes: &[usize], rank: usize) -> TensorResult<()> {
    let mut seen = vec![false; rank];
    for &axis in axes {
        if axis >= rank {
            return Err(TensorError::AxisOutOfRange { axis, rank });
        }
        if seen[axis] {
            return Err(TensorError::DuplicateAxis { axis });
        }
        seen[axis] = true;
    }
    Ok(())
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> TensorResult<Self> {
        if shape.iter().any(|&d| d == 0) {
            return Err(TensorError::ZeroDimension(shape));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(TensorError::DataLength {
                shape,
                len: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TensorError::NonFinite);
        }
        Ok(Self { shape, data })
    }

    pub fn from_real(shape: Vec<usize>, data: &[f64]) -> TensorResult<Self> {
        Self::new(shape, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(vec![n, n]);
        for i in 0..n {
            t.data[i * n + i] = C64::new(1.0, 0.0);
        }
        t
    }

    pub fn scalar(value: C64) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: C64) {
        let off = self.offset(index);
        self.data[off] = value;
    }

    fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.rank(), "index rank mismatch");
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| {
            assert!(i < d, "index {i} out of bounds for dimension {d}");
            acc * d + i
        })
    }

    pub fn reshape(&self, shape: Vec<usize>) -> TensorResult<Self> {
        let len: usize = shape.iter().product();
        if len != self.data.len() || shape.iter().any(|&d| d == 0) {
            return Err(TensorError::InvalidReshape {
                from: self.shape.clone(),
                to: shape,
            });
        }
        Ok(Self {
            shape,
            data: self.data.clone(),
        })
    }

    /// Reorders axes so that new axis `i` is old axis `order[i]`.
    pub fn permute(&self, order: &[usize]) -> TensorResult<Self> {
        let rank = self.rank();
        if order.len() != rank || check_axes(order, rank).is_err() {
            return Err(TensorError::InvalidPermutation {
                order: order.to_vec(),
                rank,
            });
        }
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return Ok(self.clone());
        }
        let old_strides = strides_of(&self.shape);
        let new_shape: Vec<usize> = order.iter().map(|&o| self.shape[o]).collect();
        let src_strides: Vec<usize> = order.iter().map(|&o| old_strides[o]).collect();

        let mut data = Vec::with_capacity(self.data.len());
        let mut counter = vec![0usize; rank];
        let mut src = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[src]);
            // odometer increment over the new index order
            for ax in (0..rank).rev() {
                counter[ax] += 1;
                src += src_strides[ax];
                if counter[ax] < new_shape[ax] {
                    break;
                }
                src -= src_strides[ax] * new_shape[ax];
                counter[ax] = 0;
            }
        }
        Ok(Self {
            shape: new_shape,
            data,
        })
    }

    /// Tensor-dot over paired axes. Free axes of `self` come first, then
    /// the free axes of `other`, each in their original order.
    pub fn contract(
        &self,
        axes_a: &[usize],
        other: &Tensor,
        axes_b: &[usize],
    ) -> TensorResult<Self> {
        if axes_a.len() != axes_b.len() {
            return Err(TensorError::AxisCountMismatch(axes_a.len(), axes_b.len()));
        }
        check_axes(axes_a, self.rank())?;
        check_axes(axes_b, other.rank())?;
        for (&a, &b) in axes_a.iter().zip(axes_b) {
            if self.shape[a] != other.shape[b] {
                return Err(TensorError::ShapeMismatch {
                    axis_a: a,
                    axis_b: b,
                    dim_a: self.shape[a],
                    dim_b: other.shape[b],
                });
            }
        }

        let free_a: Vec<usize> = (0..self.rank()).filter(|i| !axes_a.contains(i)).collect();
        let free_b: Vec<usize> = (0..other.rank()).filter(|i| !axes_b.contains(i)).collect();

        let order_a: Vec<usize> = free_a.iter().chain(axes_a).copied().collect();
        let order_b: Vec<usize> = axes_b.iter().chain(&free_b).copied().collect();
        let pa = self.permute(&order_a)?;
        let pb = other.permute(&order_b)?;

        let rows: usize = free_a.iter().map(|&i| self.shape[i]).product();
        let inner: usize = axes_a.iter().map(|&i| self.shape[i]).product();
        let cols: usize = free_b.iter().map(|&i| other.shape[i]).product();

        let data = matmul(&pa.data, &pb.data, rows, inner, cols);
        let shape: Vec<usize> = free_a
            .iter()
            .map(|&i| self.shape[i])
            .chain(free_b.iter().map(|&i| other.shape[i]))
            .collect();
        Ok(Self { shape, data })
    }

    /// Outer product; axes of `self` first.
    pub fn outer(&self, other: &Tensor) -> Self {
        let mut data = Vec::with_capacity(self.len() * other.len());
        for &a in &self.data {
            for &b in &other.data {
                data.push(a * b);
            }
        }
        let shape = self.shape.iter().chain(&other.shape).copied().collect();
        Self { shape, data }
    }

    /// Multiplies every slice along `axis` by the matching entry of `weights`.
    pub fn scale_axis(&self, axis: usize, weights: &[f64]) -> TensorResult<Self> {
        if axis >= self.rank() {
            return Err(TensorError::AxisOutOfRange {
                axis,
                rank: self.rank(),
            });
        }
        if weights.len() != self.shape[axis] {
            return Err(TensorError::ShapeMismatch {
                axis_a: axis,
                axis_b: 0,
                dim_a: self.shape[axis],
                dim_b: weights.len(),
            });
        }
        let stride = strides_of(&self.shape)[axis];
        let dim = self.shape[axis];
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &z)| z * weights[(i / stride) % dim])
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn add(&self, other: &Tensor) -> TensorResult<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> TensorResult<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Tensor, f: impl Fn(C64, C64) -> C64) -> TensorResult<Self> {
        if self.shape != other.shape {
            return Err(TensorError::InvalidReshape {
                from: other.shape.clone(),
                to: self.shape.clone(),
            });
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Matrix product of two rank-2 tensors.
    pub fn matmul(&self, other: &Tensor) -> TensorResult<Self> {
        self.expect_rank(2)?;
        other.expect_rank(2)?;
        self.contract(&[1], other, &[0])
    }

    /// Conjugate transpose of a rank-2 tensor.
    pub fn adjoint(&self) -> TensorResult<Self> {
        self.expect_rank(2)?;
        Ok(self.permute(&[1, 0])?.conj())
    }

    pub fn trace(&self) -> TensorResult<C64> {
        self.expect_rank(2)?;
        let n = self.shape[0].min(self.shape[1]);
        Ok((0..n).map(|i| self.data[i * self.shape[1] + i]).sum())
    }

    /// Kronecker product of two matrices: `(a ⊗ b)[(i,k),(j,l)] = a[i,j] b[k,l]`.
    pub fn kron(&self, other: &Tensor) -> TensorResult<Self> {
        self.expect_rank(2)?;
        other.expect_rank(2)?;
        let (r1, c1) = (self.shape[0], self.shape[1]);
        let (r2, c2) = (other.shape[0], other.shape[1]);
        self.outer(other)
            .permute(&[0, 2, 1, 3])?
            .reshape(vec![r1 * r2, c1 * c2])
    }

    pub fn expect_rank(&self, rank: usize) -> TensorResult<()> {
        if self.rank() != rank {
            return Err(TensorError::RankMismatch {
                expected: rank,
                found: self.rank(),
            });
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> TensorResult<DMatrix<C64>> {
        self.expect_rank(2)?;
        Ok(DMatrix::from_row_slice(
            self.shape[0],
            self.shape[1],
            &self.data,
        ))
    }

    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Self {
            shape: vec![rows, cols],
            data,
        }
    }
}

fn matmul(a: &[C64], b: &[C64], rows: usize, inner: usize, cols: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    for i in 0..rows {
        let row = &mut out[i * cols..(i + 1) * cols];
        for k in 0..inner {
            let aik = a[i * inner + k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            let brow = &b[k * cols..(k + 1) * cols];
            for (o, &bkj) in row.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    out
}

/// Result of a truncated singular value decomposition of a matrix `m ≈ left · diag(s) · right`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Isometry of shape `(rows, kept)`.
    pub left: Tensor,
    /// Kept singular values, descending.
    pub singular_values: Vec<f64>,
    /// Isometry of shape `(kept, cols)`.
    pub right: Tensor,
    /// `sqrt(Σ_discarded s² / Σ_all s²)`.
    pub truncation_error: f64,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `left · diag(s) · right`.
    pub fn reconstruct(&self) -> Tensor {
        let scaled = self
            .left
            .scale_axis(1, &self.singular_values)
            .expect("consistent svd factors");
        scaled.matmul(&self.right).expect("consistent svd factors")
    }
}

pub fn svd_truncate(m: &Tensor, d_max: usize) -> TensorResult<SvdResult> {
    svd_truncate_with_cutoff(m, d_max, 0.0)
}

/// Truncated SVD that also drops singular values below `rel_cutoff · s_max`.
///
/// At least one singular value is always kept.
pub fn svd_truncate_with_cutoff(
    m: &Tensor,
    d_max: usize,
    rel_cutoff: f64,
) -> TensorResult<SvdResult> {
    m.expect_rank(2)?;
    assert!(d_max >= 1, "d_max must be positive");
    let mat = m.to_matrix()?;
    let (rows, cols) = mat.shape();
    let svd = mat
        .try_svd(true, true, 1e-15, 10_000)
        .ok_or(TensorError::DecompositionFailed)?;
    let u = svd.u.ok_or(TensorError::DecompositionFailed)?;
    let v_t = svd.v_t.ok_or(TensorError::DecompositionFailed)?;
    let s = svd.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

    let total: f64 = s.iter().map(|x| x * x).sum();
    let s_max = s[order[0]];
    let mut kept = order
        .iter()
        .take(d_max)
        .take_while(|&&i| s[i] > rel_cutoff * s_max)
        .count();
    kept = kept.max(1);

    let discarded: f64 = order[kept..].iter().map(|&i| s[i] * s[i]).sum();
    let truncation_error = if total > 0.0 {
        (discarded / total).sqrt().clamp(0.0, 1.0)
    } else {
        0.0
    };

    let mut left = Tensor::zeros(vec![rows, kept]);
    let mut right = Tensor::zeros(vec![kept, cols]);
    let mut singular_values = Vec::with_capacity(kept);
    for (c, &i) in order[..kept].iter().enumerate() {
        singular_values.push(s[i]);
        for r in 0..rows {
            left.data[r * kept + c] = u[(r, i)];
        }
        for col in 0..cols {
            right.data[c * cols + col] = v_t[(i, col)];
        }
    }
    if !left.is_finite() || !right.is_finite() {
        return Err(TensorError::NonFinite);
    }
    Ok(SvdResult {
        left,
        singular_values,
        right,
        truncation_error,
    })
}

/// Thin QR decomposition of a matrix: `m = q · r` with `q` an isometry of
/// shape `(rows, min)` and `r` of shape `(min, cols)`.
pub fn qr(m: &Tensor) -> TensorResult<(Tensor, Tensor)> {
    let mat = m.to_matrix()?;
    let decomposition = mat.qr();
    let q = Tensor::from_matrix(&decomposition.q());
    let r = Tensor::from_matrix(&decomposition.r());
    if !q.is_finite() || !r.is_finite() {
        return Err(TensorError::NonFinite);
    }
    Ok((q, r))
}
