//! Matrix kernels behind the solvers: a deterministic thin Householder QR,
//! the QR-only approximate SVD (`X ≈ L·D·R`), the L2,1 and nuclear norms,
//! and the two proximal operators (column shrinkage and singular value
//! thresholding).
//!
//! The solvers only ever touch [`qr_thin`], [`csvd_sweep`], [`l21_norm`] and
//! [`lnms_prox`]. [`nuclear_norm`] and [`svt_prox`] need a full SVD and are
//! kept for oracles and the SVD baseline.

use nalgebra::{DMatrix, RealField};

use crate::error::{invalid, Result};
use crate::matrix::{dot, Matrix};
use crate::scalar::Scalar;

/// Thin QR of `a` (`m × k`) truncated to its first `keep` columns.
///
/// Returns `Q` (`m × keep`, orthonormal columns) and `T` (`keep × k`, upper
/// trapezoidal) with a nonnegative diagonal, so `Q·T` is the projection of
/// `a` onto `span(Q)`. Columns whose remaining norm falls below
/// [`Scalar::pivot_tolerance`]`·‖a‖_F` get no reflector; the matching column
/// of `Q` is then the next orthonormal completion vector and the pivot of
/// `T` is zero.
pub fn qr_thin<T: Scalar>(a: &Matrix<T>, keep: usize) -> Result<(Matrix<T>, Matrix<T>)> {
    let (m, k) = a.shape();
    if keep == 0 || keep > m.min(k) {
        return Err(invalid(format!(
            "qr rank {keep} outside 1..={} for a {m}x{k} matrix",
            m.min(k)
        )));
    }
    if !a.is_finite() {
        return Err(invalid("qr input contains non-finite entries"));
    }

    let tol = T::pivot_tolerance() * a.frobenius_norm();
    let mut work = a.clone();
    // unit Householder vectors, stored for rows i.. of step i
    let mut reflectors: Vec<Option<Vec<T>>> = Vec::with_capacity(keep);

    for i in 0..keep {
        let x = &work.col(i)[i..];
        let norm = dot(x, x).sqrt();
        if norm <= tol {
            work.col_mut(i)[i + 1..]
                .iter_mut()
                .for_each(|v| *v = T::zero());
            reflectors.push(None);
            continue;
        }
        let alpha = if x[0] >= T::zero() { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|e| *e /= vnorm);

        for j in i + 1..k {
            reflect(&v, &mut work.col_mut(j)[i..]);
        }
        let col = work.col_mut(i);
        col[i] = alpha;
        col[i + 1..].iter_mut().for_each(|e| *e = T::zero());
        reflectors.push(Some(v));
    }

    let mut q = Matrix::eye(m, keep);
    for (i, v) in reflectors.iter().enumerate().rev() {
        if let Some(v) = v {
            for j in 0..keep {
                reflect(v, &mut q.col_mut(j)[i..]);
            }
        }
    }

    let mut t = Matrix::from_fn(
        keep,
        k,
        |p, j| if j >= p { work[(p, j)] } else { T::zero() },
    );
    for p in 0..keep {
        if t[(p, p)] < T::zero() {
            for j in p..k {
                t[(p, j)] = -t[(p, j)];
            }
            q.col_mut(p).iter_mut().for_each(|e| *e = -*e);
        }
    }
    Ok((q, t))
}

/// `w ← (I − 2vvᵀ)w` for unit `v`.
#[inline]
fn reflect<T: Scalar>(v: &[T], w: &mut [T]) {
    let s = (T::one() + T::one()) * dot(v, w);
    for (wi, &vi) in w.iter_mut().zip(v) {
        *wi -= s * vi;
    }
}

/// Factors `L` (`m × r`, orthonormal columns), `D` (`r × r`) and `R`
/// (`r × n`, orthonormal rows) of an approximation `X ≈ L·D·R`. `D` is in
/// general not diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LdrFactors<T = f64> {
    pub left: Matrix<T>,
    pub core: Matrix<T>,
    pub right: Matrix<T>,
}

impl<T: Scalar> LdrFactors<T> {
    /// `L = eye(m, r)`, `D = eye(r, r)`, `R = eye(r, n)`.
    pub fn identity(rows: usize, cols: usize, rank: usize) -> Result<Self> {
        check_rank(rows, cols, rank)?;
        Ok(Self {
            left: Matrix::eye(rows, rank),
            core: Matrix::identity(rank),
            right: Matrix::eye(rank, cols),
        })
    }

    pub fn rank(&self) -> usize {
        self.core.rows()
    }

    /// Shape `(m, n)` of the approximated matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.left.rows(), self.right.cols())
    }

    /// `L·D·R`
    pub fn reconstruct(&self) -> Matrix<T> {
        self.left
            .matmul(&self.core)
            .and_then(|ld| ld.matmul(&self.right))
            .expect("factor shapes are consistent by construction")
    }

    /// `‖X − L·D·R‖_F`
    pub fn residual(&self, x: &Matrix<T>) -> Result<T> {
        Ok(x.zip_map(&self.reconstruct(), |a, b| a - b)?
            .frobenius_norm())
    }
}

fn check_rank(rows: usize, cols: usize, rank: usize) -> Result<()> {
    if rank == 0 || rank > rows.min(cols) {
        return Err(invalid(format!(
            "rank {rank} outside 1..={} for a {rows}x{cols} matrix",
            rows.min(cols)
        )));
    }
    Ok(())
}

/// One alternating sweep of the QR-based factorization on `x`:
///
/// * `[Q, T] = qr(x·Rᵀ)`, `L ← Q(:, 1..r)`
/// * `[Q, T] = qr(xᵀ·L)`, `R ← Q(:, 1..r)ᵀ`
/// * `D ← T(1..r, 1..r)ᵀ`, which equals `Lᵀ·x·Rᵀ`
///
/// Works for any starting `R` with orthonormal rows; `L` and `D` are
/// overwritten.
pub fn csvd_sweep<T: Scalar>(x: &Matrix<T>, factors: &mut LdrFactors<T>) -> Result<()> {
    let r = factors.rank();
    if factors.shape() != x.shape() {
        return Err(crate::error::mismatch(
            &[factors.shape().0, factors.shape().1],
            &[x.rows(), x.cols()],
        ));
    }
    let (l, _) = qr_thin(&x.matmul_t(&factors.right)?, r)?;
    let (q, t) = qr_thin(&x.t_matmul(&l)?, r)?;
    factors.left = l;
    factors.right = q.transpose();
    factors.core = t.top_left(r, r).transpose();
    Ok(())
}

/// Iterates [`csvd_sweep`] from the identity start until
/// `‖x − L·D·R‖²_F ≤ tol` or `itmax` sweeps have run. Returns the factors
/// and the number of sweeps performed; hitting `itmax` is not an error.
pub fn csvd_qr<T: Scalar>(
    x: &Matrix<T>,
    rank: usize,
    tol: T,
    itmax: usize,
) -> Result<(LdrFactors<T>, usize)> {
    if !x.is_finite() {
        return Err(invalid("csvd-qr input contains non-finite entries"));
    }
    let mut factors = LdrFactors::identity(x.rows(), x.cols(), rank)?;
    let mut iters = 0;
    while iters < itmax {
        csvd_sweep(x, &mut factors)?;
        iters += 1;
        let res = factors.residual(x)?;
        if res * res <= tol {
            break;
        }
    }
    Ok((factors, iters))
}

/// [`csvd_qr`] with the standalone defaults: `ε₀ = 1e−10·‖x‖²_F`, 100 sweeps.
pub fn csvd_qr_default<T: Scalar>(x: &Matrix<T>, rank: usize) -> Result<(LdrFactors<T>, usize)> {
    let norm = x.frobenius_norm();
    csvd_qr(x, rank, T::lit(1e-10) * norm * norm, 100)
}

/// `‖a‖_{2,1}`, the sum of the Euclidean norms of the columns.
pub fn l21_norm<T: Scalar>(a: &Matrix<T>) -> T {
    a.column_norms().into_iter().sum()
}

/// Column shrinkage, the proximal operator of `tau·‖·‖_{2,1}`:
/// column `j` is scaled by `max(‖c_j‖ − tau, 0) / ‖c_j‖`.
pub fn lnms_prox<T: Scalar>(c: &Matrix<T>, tau: T) -> Result<Matrix<T>> {
    if tau < T::zero() || tau.is_nan() {
        return Err(invalid(format!(
            "shrinkage threshold must be >= 0, got {tau}"
        )));
    }
    let mut out = c.clone();
    for (j, norm) in c.column_norms().into_iter().enumerate() {
        let factor = if norm > tau {
            (norm - tau) / norm
        } else {
            T::zero()
        };
        out.col_mut(j).iter_mut().for_each(|v| *v *= factor);
    }
    Ok(out)
}

fn to_dmatrix<T: Scalar + RealField>(a: &Matrix<T>) -> DMatrix<T> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice())
}

/// Sum of singular values via a full SVD. Oracle and baseline only.
pub fn nuclear_norm<T: Scalar + RealField>(a: &Matrix<T>) -> T {
    if a.rows() == 0 || a.cols() == 0 {
        return <T as num_traits::Zero>::zero();
    }
    to_dmatrix(a).singular_values().iter().copied().sum()
}

/// Singular values in descending order via a full SVD.
pub fn singular_values<T: Scalar + RealField>(a: &Matrix<T>) -> Vec<T> {
    let mut s: Vec<T> = to_dmatrix(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Singular value thresholding `U·diag(max(σ − mu, 0))·Vᵀ`, the proximal
/// operator of `mu·‖·‖_*`. Computes a full SVD.
pub fn svt_prox<T: Scalar + RealField>(y: &Matrix<T>, mu: T) -> Result<Matrix<T>> {
    if mu < <T as num_traits::Zero>::zero() || num_traits::Float::is_nan(mu) {
        return Err(invalid(format!("svt threshold must be >= 0, got {mu}")));
    }
    if !y.is_finite() {
        return Err(invalid("svt input contains non-finite entries"));
    }
    let svd = to_dmatrix(y).svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let mut out = Matrix::zeros(y.rows(), y.cols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let shrunk = s - mu;
        if shrunk <= <T as num_traits::Zero>::zero() {
            continue;
        }
        // out += shrunk · u_k v_kᵀ
        for j in 0..y.cols() {
            let w = shrunk * v_t[(k, j)];
            let col = out.col_mut(j);
            for (i, c) in col.iter_mut().enumerate() {
                *c += w * u[(i, k)];
            }
        }
    }
    Ok(out)
}
