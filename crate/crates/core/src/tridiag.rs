//! Symmetric positive definite tridiagonal systems, solved by an `LDLᵀ`
//! factorization (bandwidth one, so `O(n)` per right-hand side).

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Symmetric tridiagonal matrix given by its diagonal and first
/// off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T = f64> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

/// `LDLᵀ` factors: unit lower bidiagonal `L` with subdiagonal `lower`, and
/// positive pivots `pivots`.
#[derive(Debug, Clone)]
pub struct TridiagonalLdl<T = f64> {
    lower: Vec<T>,
    pivots: Vec<T>,
}

impl<T: Scalar> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(invalid(format!(
                "tridiagonal needs n diagonal and n-1 off-diagonal entries, got {} and {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    /// `mu_tv·FᵀF + mu_id·I` for the `(n−1) × n` first-difference matrix `F`.
    pub fn difference_normal(n: usize, mu_tv: T, mu_id: T) -> Result<Self> {
        if n == 0 {
            return Err(invalid("system size must be positive"));
        }
        let two = T::one() + T::one();
        let diag = (0..n)
            .map(|i| {
                let d = if n == 1 {
                    T::zero()
                } else if i == 0 || i == n - 1 {
                    T::one()
                } else {
                    two
                };
                mu_tv * d + mu_id
            })
            .collect();
        Self::new(diag, vec![-mu_tv; n - 1])
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn factor(&self) -> Result<TridiagonalLdl<T>> {
        let n = self.size();
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n - 1);
        pivots.push(self.diag[0]);
        for i in 1..n {
            let prev = pivots[i - 1];
            if !(prev > T::zero()) {
                return Err(invalid("tridiagonal system is not positive definite"));
            }
            let l = self.off[i - 1] / prev;
            lower.push(l);
            pivots.push(self.diag[i] - l * self.off[i - 1]);
        }
        if !(pivots[n - 1] > T::zero()) {
            return Err(invalid("tridiagonal system is not positive definite"));
        }
        Ok(TridiagonalLdl { lower, pivots })
    }

    /// `y = A·x`
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }
}

impl<T: Scalar> TridiagonalLdl<T> {
    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.pivots.len();
        debug_assert_eq!(rhs.len(), n);
        for i in 1..n {
            let prev = rhs[i - 1];
            rhs[i] -= self.lower[i - 1] * prev;
        }
        for (r, &p) in rhs.iter_mut().zip(&self.pivots) {
            *r /= p;
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.lower[i] * next;
        }
    }
}
