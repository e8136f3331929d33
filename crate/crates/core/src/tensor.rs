//! Dense N-th order tensors, observation masks and mode-n unfolding.
//!
//! Storage is first-index-fastest: element `(i₁, …, i_N)` (1-based) lives at
//! flat offset `Σ (i_k − 1)·I₁⋯I_{k−1}`. Under this layout the mode-n
//! unfolding maps `(i₁, …, i_N)` to row `i_n` and column
//! `1 + Σ_{k≠n} (i_k − 1)·J_k`, `J_k = Π_{m<k, m≠n} I_m`, so the columns of
//! the unfolding are consecutive "fibres" of the tensor.
//!
//! Modes and element indices in the public API are 1-based. Matrices use
//! ordinary 0-based `(row, col)` indexing.

use crate::error::{invalid, mismatch, Result};
use crate::matrix::{axpy, dot, max_abs_diff_slices, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T = f64> {
    dims: Vec<usize>,
    data: Vec<T>,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(invalid("tensor order must be at least 1"));
    }
    if dims.contains(&0) {
        return Err(invalid(format!(
            "every extent must be positive, got {dims:?}"
        )));
    }
    Ok(dims.iter().product())
}

/// Sizes of the index blocks before and after `mode` (0-based here).
fn split_extents(dims: &[usize], mode0: usize) -> (usize, usize, usize) {
    let left: usize = dims[..mode0].iter().product();
    let right: usize = dims[mode0 + 1..].iter().product();
    (left, dims[mode0], right)
}

impl<T: Scalar> DenseTensor<T> {
    /// Wraps first-index-fastest `data`.
    pub fn new(dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(mismatch(&[len], &[data.len()]));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Self::filled(dims, T::zero())
    }

    pub fn filled(dims: &[usize], value: T) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            data: vec![value; len],
        })
    }

    /// Builds a tensor from a function of the 1-based multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let len = check_dims(dims)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![1usize; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            for (k, i) in idx.iter_mut().enumerate() {
                if *i < dims[k] {
                    *i += 1;
                    break;
                }
                *i = 1;
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of modes `N`.
    #[inline]
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Flat offset of a 1-based multi-index.
    pub fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return Err(mismatch(&[self.dims.len()], &[index.len()]));
        }
        let mut off = 0;
        let mut stride = 1;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i == 0 || i > d {
                return Err(invalid(format!("index {index:?} outside {:?}", self.dims)));
            }
            off += (i - 1) * stride;
            stride *= d;
        }
        Ok(off)
    }

    /// Element at a 1-based multi-index.
    pub fn get(&self, index: &[usize]) -> Result<T> {
        Ok(self.data[self.offset(index)?])
    }

    pub fn set(&mut self, index: &[usize], value: T) -> Result<()> {
        let off = self.offset(index)?;
        self.data[off] = value;
        Ok(())
    }

    fn mode_index(&self, mode: usize) -> Result<usize> {
        if mode == 0 || mode > self.order() {
            return Err(invalid(format!(
                "mode {mode} outside 1..={} for dims {:?}",
                self.order(),
                self.dims
            )));
        }
        Ok(mode - 1)
    }

    /// Mode-`mode` unfolding, an `I_mode × Π_{k≠mode} I_k` matrix.
    pub fn unfold(&self, mode: usize) -> Result<Matrix<T>> {
        let m0 = self.mode_index(mode)?;
        let (left, rows, right) = split_extents(&self.dims, m0);
        let cols = left * right;
        let mut out = vec![T::zero(); rows * cols];
        if left == 1 {
            // mode 1 (or all leading extents 1): storage is already column-major
            out.copy_from_slice(&self.data);
        } else {
            for r in 0..right {
                for i in 0..rows {
                    let src = &self.data[left * (i + rows * r)..][..left];
                    for (l, &v) in src.iter().enumerate() {
                        out[(l + left * r) * rows + i] = v;
                    }
                }
            }
        }
        Matrix::from_col_major(rows, cols, out)
    }

    /// Inverse of [`DenseTensor::unfold`] for the same `mode` and `dims`.
    pub fn fold(matrix: &Matrix<T>, mode: usize, dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        if mode == 0 || mode > dims.len() {
            return Err(invalid(format!("mode {mode} outside 1..={}", dims.len())));
        }
        let (left, rows, right) = split_extents(dims, mode - 1);
        if matrix.shape() != (rows, left * right) {
            return Err(mismatch(
                &[rows, left * right],
                &[matrix.rows(), matrix.cols()],
            ));
        }
        let src = matrix.as_slice();
        let mut data = vec![T::zero(); len];
        if left == 1 {
            data.copy_from_slice(src);
        } else {
            for r in 0..right {
                for i in 0..rows {
                    let dst = &mut data[left * (i + rows * r)..][..left];
                    for (l, v) in dst.iter_mut().enumerate() {
                        *v = src[(l + left * r) * rows + i];
                    }
                }
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    /// `self ×_mode u`, where `u` is `J × I_mode`; the result has `I_mode`
    /// replaced by `J`.
    pub fn mode_n_product(&self, u: &Matrix<T>, mode: usize) -> Result<Self> {
        let m0 = self.mode_index(mode)?;
        if u.cols() != self.dims[m0] {
            return Err(mismatch(&[self.dims[m0]], &[u.cols()]));
        }
        let product = u.matmul(&self.unfold(mode)?)?;
        let mut dims = self.dims.clone();
        dims[m0] = u.rows();
        Self::fold(&product, mode, &dims)
    }

    /// Removes the slab `index` (1-based) along `mode`, returning the
    /// remaining modes as an `I_first × (rest)` matrix. For a third-order
    /// tensor sliced along mode 3 this is the ordinary `I₁ × I₂` band image.
    pub fn slice(&self, mode: usize, index: usize) -> Result<Matrix<T>> {
        let m0 = self.mode_index(mode)?;
        if index == 0 || index > self.dims[m0] {
            return Err(invalid(format!(
                "slice index {index} outside 1..={} along mode {mode}",
                self.dims[m0]
            )));
        }
        let (left, size, right) = split_extents(&self.dims, m0);
        let mut out = Vec::with_capacity(left * right);
        for r in 0..right {
            out.extend_from_slice(&self.data[left * ((index - 1) + size * r)..][..left]);
        }
        let rest: Vec<usize> = self
            .dims
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != m0)
            .map(|(_, &d)| d)
            .collect();
        let rows = rest.first().copied().unwrap_or(1);
        Matrix::from_col_major(rows, out.len() / rows, out)
    }

    pub fn frobenius_norm(&self) -> T {
        dot(&self.data, &self.data).sqrt()
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(mismatch(&self.dims, &other.dims));
        }
        Ok(())
    }

    pub fn inner_product(&self, other: &Self) -> Result<T> {
        self.check_same_dims(other)?;
        Ok(dot(&self.data, &other.data))
    }

    /// `‖self − other‖_∞`
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_dims(other)?;
        Ok(max_abs_diff_slices(&self.data, &other.data))
    }

    /// Keeps entries where the mask is set and zeroes the rest.
    pub fn project(&self, mask: &Mask) -> Result<Self> {
        if self.dims != mask.dims {
            return Err(mismatch(&self.dims, &mask.dims));
        }
        Ok(Self {
            dims: self.dims.clone(),
            data: self
                .data
                .iter()
                .zip(&mask.data)
                .map(|(&v, &m)| if m { v } else { T::zero() })
                .collect(),
        })
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: T, other: &Self) -> Result<()> {
        self.check_same_dims(other)?;
        axpy(alpha, &other.data, &mut self.data);
        Ok(())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Binary observation pattern Ω, stored densely with the tensor layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    dims: Vec<usize>,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(dims: Vec<usize>, data: Vec<bool>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(mismatch(&[len], &[data.len()]));
        }
        Ok(Self { dims, data })
    }

    /// Every entry observed.
    pub fn full(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            data: vec![true; len],
        })
    }

    /// Nothing observed.
    pub fn empty(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            data: vec![false; len],
        })
    }

    /// Mask from a 0/1 valued tensor; any other value is rejected.
    pub fn from_indicator<T: Scalar>(t: &DenseTensor<T>) -> Result<Self> {
        let data = t
            .as_slice()
            .iter()
            .map(|&v| {
                if v == T::one() {
                    Ok(true)
                } else if v == T::zero() {
                    Ok(false)
                } else {
                    Err(invalid(format!("mask entry {v} is not 0 or 1")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(t.dims().to_vec(), data)
    }

    pub fn to_indicator<T: Scalar>(&self) -> DenseTensor<T> {
        DenseTensor {
            dims: self.dims.clone(),
            data: self
                .data
                .iter()
                .map(|&b| if b { T::one() } else { T::zero() })
                .collect(),
        }
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of observed entries, `|Ω|`.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Observed values together with the pattern Ω they were sampled on.
/// Values are zero wherever the mask is unset.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T = f64> {
    values: DenseTensor<T>,
    mask: Mask,
}

impl<T: Scalar> Observation<T> {
    /// Samples `ground_truth` on `mask`.
    pub fn sample(ground_truth: &DenseTensor<T>, mask: Mask) -> Result<Self> {
        let values = ground_truth.project(&mask)?;
        Ok(Self { values, mask })
    }

    /// Accepts already-sampled values; they must vanish off the mask.
    pub fn from_parts(values: DenseTensor<T>, mask: Mask) -> Result<Self> {
        if values.dims() != mask.dims() {
            return Err(mismatch(values.dims(), mask.dims()));
        }
        let stray = values
            .as_slice()
            .iter()
            .zip(mask.as_slice())
            .any(|(&v, &m)| !m && v != T::zero());
        if stray {
            return Err(invalid("observed values must be zero outside the mask"));
        }
        if !values.is_finite() {
            return Err(invalid("observed values must be finite"));
        }
        Ok(Self { values, mask })
    }

    #[inline]
    pub fn values(&self) -> &DenseTensor<T> {
        &self.values
    }

    #[inline]
    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        self.values.dims()
    }

    /// `‖X_Ω − T_Ω‖_F`
    pub fn fidelity_residual(&self, x: &DenseTensor<T>) -> Result<T> {
        if x.dims() != self.dims() {
            return Err(mismatch(self.dims(), x.dims()));
        }
        Ok(x.as_slice()
            .iter()
            .zip(self.values.as_slice())
            .zip(self.mask.as_slice())
            .filter(|(_, &m)| m)
            .map(|((&a, &b), _)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt())
    }
}
