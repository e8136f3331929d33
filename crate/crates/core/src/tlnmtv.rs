//! ADMM solver for the L2,1 completion model with anisotropic total
//! variation along selected modes:
//!
//! ```text
//! min Σ α_n ‖D_n‖_{2,1} + λ Σ β_n |Q_n|
//! s.t. Z_n = X,  X_Ω = T_Ω,  Q_n = F_n A_n,  A_n = X_(n),
//!      unfold_n(Z_n) = L_n D_n R_n
//! ```
//!
//! `F_n` is the `(I_n − 1) × I_n` first-difference matrix and `|·|` the
//! entrywise absolute sum. Five penalties `μ₁..μ₅` belong to the five
//! constraint blocks (consensus, TV slack, unfolding copy, fidelity,
//! factorization) and all grow by the same `ρ`.
//!
//! Modes with `β_n = 0` carry no TV slack: their `Q_n` stays zero, `Λ_n`
//! and `Γ_n` are frozen, and their unfolding copy `A_n` is left out of the
//! `X` update entirely.

use std::time::Instant;

use crate::error::{invalid, Result};
use crate::lowrank::{l21_norm, LdrFactors};
use crate::matrix::Matrix;
use crate::report::{IterationRecord, SolverReport};
use crate::scalar::Scalar;
use crate::tensor::{DenseTensor, Observation};
use crate::tlnm::{
    any_nonzero_core, attach_report, low_rank_step, nonfinite, unfold_shape, validate_common,
    TlnmConfig,
};
use crate::tridiag::SymTridiagonal;

/// Hyperparameters of [`solve_tlnmtv`].
#[derive(Debug, Clone, PartialEq)]
pub struct TlnmTvConfig<T = f64> {
    pub alphas: Vec<T>,
    pub ranks: Vec<usize>,
    /// TV weight `λ ≥ 0`.
    pub lambda: T,
    /// Per-mode TV switch `β_n`.
    pub betas: Vec<bool>,
    /// Initial penalties `μ₁..μ₅`: consensus, TV slack, unfolding copy,
    /// fidelity, factorization.
    pub mus: [T; 5],
    pub rho: T,
    pub eps: T,
    pub max_iters: usize,
}

impl<T: Scalar> TlnmTvConfig<T> {
    /// TLNM defaults, `λ = 1`, all five penalties `1e−4`, TV on the first
    /// two modes.
    pub fn defaults(dims: &[usize]) -> Self {
        let betas = (0..dims.len()).map(|k| k < 2 && dims[k] >= 2).collect();
        Self::from_tlnm(TlnmConfig::defaults(dims), T::one(), betas)
    }

    /// Shares weights, ranks, growth and stopping rule with a TLNM config;
    /// every penalty starts at its `mu0`.
    pub fn from_tlnm(base: TlnmConfig<T>, lambda: T, betas: Vec<bool>) -> Self {
        Self {
            alphas: base.alphas,
            ranks: base.ranks,
            lambda,
            betas,
            mus: [base.mu0; 5],
            rho: base.rho,
            eps: base.eps,
            max_iters: base.max_iters,
        }
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        validate_common(dims, &self.alphas, &self.ranks, self.rho, self.eps)?;
        if self.betas.len() != dims.len() {
            return Err(invalid(format!(
                "expected {} TV flags, got {}",
                dims.len(),
                self.betas.len()
            )));
        }
        for (k, (&b, &d)) in self.betas.iter().zip(dims).enumerate() {
            if b && d < 2 {
                return Err(invalid(format!(
                    "TV along mode {} needs extent >= 2, got {d}",
                    k + 1
                )));
            }
        }
        if self.mus.iter().any(|&m| !(m > T::zero()) || !m.is_finite()) {
            return Err(invalid("all five penalties must be positive"));
        }
        if self.lambda < T::zero() || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// The `(I − 1) × I` first-difference matrix: `F(i,i) = 1`, `F(i,i+1) = −1`.
pub fn difference_matrix<T: Scalar>(size: usize) -> Result<Matrix<T>> {
    if size < 2 {
        return Err(invalid(format!(
            "difference matrix needs size >= 2, got {size}"
        )));
    }
    let mut f = Matrix::zeros(size - 1, size);
    for i in 0..size - 1 {
        f[(i, i)] = T::one();
        f[(i, i + 1)] = -T::one();
    }
    Ok(f)
}

/// `F·a` without forming `F`: row `i` is `a(i,:) − a(i+1,:)`.
pub fn apply_difference<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let rows = a.rows();
    let mut out = Matrix::zeros(rows.saturating_sub(1), a.cols());
    for j in 0..a.cols() {
        let src = a.col(j);
        for (i, o) in out.col_mut(j).iter_mut().enumerate() {
            *o = src[i] - src[i + 1];
        }
    }
    out
}

/// `Fᵀ·b` without forming `F`, for `b` with `I − 1` rows.
pub fn apply_difference_t<T: Scalar>(b: &Matrix<T>) -> Matrix<T> {
    let n = b.rows() + 1;
    let mut out = Matrix::zeros(n, b.cols());
    for j in 0..b.cols() {
        let src = b.col(j);
        let dst = out.col_mut(j);
        for (i, &v) in src.iter().enumerate() {
            dst[i] += v;
            dst[i + 1] -= v;
        }
    }
    out
}

/// Entrywise soft threshold `sign(x)·max(|x| − alpha, 0)`.
pub fn shrinkage<T: Scalar>(x: &Matrix<T>, alpha: T) -> Result<Matrix<T>> {
    if alpha < T::zero() || alpha.is_nan() {
        return Err(invalid(format!(
            "shrinkage threshold must be >= 0, got {alpha}"
        )));
    }
    Ok(x.map(|v| soft_threshold(v, alpha)))
}

#[inline]
fn soft_threshold<T: Scalar>(v: T, alpha: T) -> T {
    if v > alpha {
        v - alpha
    } else if v < -alpha {
        v + alpha
    } else {
        T::zero()
    }
}

/// Per-mode variables.
#[derive(Debug, Clone)]
pub struct TlnmTvMode<T = f64> {
    pub tv: bool,
    /// Consensus copy `Z_n`.
    pub aux: DenseTensor<T>,
    /// Unfolding copy `A_n`.
    pub unfolding: Matrix<T>,
    /// TV slack `Q_n = F_n A_n`, `(I_n − 1) × t_n` (empty without TV).
    pub slack: Matrix<T>,
    pub factors: LdrFactors<T>,
    pub low_rank: Matrix<T>,
    /// `𝒢_n`
    pub consensus_dual: DenseTensor<T>,
    /// `Λ_n`
    pub slack_dual: Matrix<T>,
    /// `Γ_n`
    pub unfolding_dual: Matrix<T>,
    /// `Φ_n`
    pub factor_dual: Matrix<T>,
    /// Right-hand side of the latest `A_n` solve, kept for residual checks.
    pub last_rhs: Option<Matrix<T>>,
}

#[derive(Debug, Clone)]
pub struct TlnmTvState<T = f64> {
    pub x: DenseTensor<T>,
    pub modes: Vec<TlnmTvMode<T>>,
    pub fidelity_dual: DenseTensor<T>,
    /// Current `μ₁..μ₅`.
    pub mus: [T; 5],
    pub alphas: Vec<T>,
    pub lambda: T,
    pub iteration: usize,
}

impl<T: Scalar> TlnmTvState<T> {
    pub fn new(observation: &Observation<T>, config: &TlnmTvConfig<T>) -> Result<Self> {
        let dims = observation.dims();
        config.validate(dims)?;
        let x = observation.values().clone();
        let zeros = DenseTensor::zeros(dims)?;
        let modes = (1..=dims.len())
            .map(|mode| {
                let (rows, cols) = unfold_shape(dims, mode);
                let tv = config.betas[mode - 1];
                let slack_rows = if tv { rows - 1 } else { 0 };
                let factors = LdrFactors::identity(rows, cols, config.ranks[mode - 1])?;
                Ok(TlnmTvMode {
                    tv,
                    aux: x.clone(),
                    unfolding: x.unfold(mode)?,
                    slack: Matrix::zeros(slack_rows, cols),
                    low_rank: factors.reconstruct(),
                    factors,
                    consensus_dual: zeros.clone(),
                    slack_dual: Matrix::zeros(slack_rows, cols),
                    unfolding_dual: Matrix::zeros(rows, cols),
                    factor_dual: Matrix::zeros(rows, cols),
                    last_rhs: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x,
            modes,
            fidelity_dual: zeros,
            mus: config.mus,
            alphas: config.alphas.clone(),
            lambda: config.lambda,
            iteration: 0,
        })
    }

    fn order(&self) -> usize {
        self.modes.len()
    }

    /// `Q_n = shrinkage(F_n A_n − Λ_n/μ₂, λ/μ₂)` on TV modes, zero elsewhere.
    pub fn update_tv_slack(&mut self, mode: usize) -> Result<()> {
        let mu2 = self.mus[1];
        let st = &mut self.modes[mode - 1];
        if !st.tv {
            return Ok(());
        }
        let mut diff = apply_difference(&st.unfolding);
        diff.add_scaled(-T::one() / mu2, &st.slack_dual)?;
        st.slack = shrinkage(&diff, self.lambda / mu2)?;
        Ok(())
    }

    /// Same QR sweep and column shrinkage as TLNM, on
    /// `B_n = unfold_n(Z_n) + Φ_n/μ₅` with threshold `α_n/μ₅`.
    pub fn update_factors(&mut self, mode: usize) -> Result<Matrix<T>> {
        let (mu5, alpha, it) = (self.mus[4], self.alphas[mode - 1], self.iteration + 1);
        let st = &mut self.modes[mode - 1];
        let mut b = st.aux.unfold(mode)?;
        b.add_scaled(T::one() / mu5, &st.factor_dual)?;
        if !b.is_finite() {
            return Err(nonfinite(it, format!("factor target of mode {mode}")));
        }
        let core_t = low_rank_step(&b, &mut st.factors, alpha, mu5)?;
        st.low_rank = st.factors.reconstruct();
        Ok(core_t)
    }

    /// `unfold_n(Z_n) = (μ₁X_(n) − 𝒢_n(n) + μ₅L_nD_nR_n − Φ_n) / (μ₁ + μ₅)`
    pub fn update_consensus(&mut self, mode: usize) -> Result<()> {
        let [mu1, _, _, _, mu5] = self.mus;
        let st = &mut self.modes[mode - 1];
        let mut target = self.x.map(|v| v * mu1);
        target.add_scaled(-T::one(), &st.consensus_dual)?;
        let mut z = target.unfold(mode)?;
        z.add_scaled(mu5, &st.low_rank)?;
        z.add_scaled(-T::one(), &st.factor_dual)?;
        let inv = T::one() / (mu1 + mu5);
        z.as_mut_slice().iter_mut().for_each(|v| *v *= inv);
        st.aux = DenseTensor::fold(&z, mode, self.x.dims())?;
        Ok(())
    }

    /// Solves `(μ₂FᵀF + μ₃I)A_n = FᵀΛ_n + μ₂FᵀQ_n + μ₃X_(n) − Γ_n` on TV
    /// modes; elsewhere `A_n = X_(n) − Γ_n/μ₃`.
    pub fn update_unfolding_copy(&mut self, mode: usize) -> Result<()> {
        let [_, mu2, mu3, _, _] = self.mus;
        let xn = self.x.unfold(mode)?;
        let st = &mut self.modes[mode - 1];
        if !st.tv {
            let mut a = xn;
            a.add_scaled(-T::one() / mu3, &st.unfolding_dual)?;
            st.unfolding = a;
            return Ok(());
        }
        let mut rhs = apply_difference_t(&st.slack_dual);
        rhs.add_scaled(mu2, &apply_difference_t(&st.slack))?;
        rhs.add_scaled(mu3, &xn)?;
        rhs.add_scaled(-T::one(), &st.unfolding_dual)?;
        let system = SymTridiagonal::difference_normal(xn.rows(), mu2, mu3)?.factor()?;
        let mut a = rhs.clone();
        for j in 0..a.cols() {
            system.solve_in_place(a.col_mut(j));
        }
        st.unfolding = a;
        st.last_rhs = Some(rhs);
        Ok(())
    }

    /// Relative residual `‖(μ₂FᵀF + μ₃I)A_n − rhs‖_F / ‖rhs‖_F` of the
    /// latest solve, or `None` when the mode has no TV term. Evaluated with
    /// the penalties the solve used, so call it before the multiplier step.
    pub fn unfolding_residual(&self, mode: usize) -> Option<T> {
        let st = &self.modes[mode - 1];
        let rhs = st.last_rhs.as_ref()?;
        let [_, mu2, mu3, _, _] = self.mus;
        let system = SymTridiagonal::difference_normal(rhs.rows(), mu2, mu3).ok()?;
        let mut err = T::zero();
        for j in 0..rhs.cols() {
            let lhs = system.apply(st.unfolding.col(j));
            err += lhs
                .iter()
                .zip(rhs.col(j))
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>();
        }
        let scale = rhs.frobenius_norm();
        Some(if scale > T::zero() {
            err.sqrt() / scale
        } else {
            err.sqrt()
        })
    }

    /// Closed-form `X` update with `S₁ = Σ(μ₁Z_n + 𝒢_n)` and
    /// `S₂ = Σ_{β_n=1} fold_n(μ₃A_n + Γ_n)`.
    pub fn update_global(&mut self, observation: &Observation<T>) -> Result<()> {
        let [mu1, _, mu3, mu4, _] = self.mus;
        let dims = self.x.dims().to_vec();
        let mut s = DenseTensor::zeros(&dims)?;
        let mut tv_modes = 0;
        for (k, st) in self.modes.iter().enumerate() {
            s.add_scaled(mu1, &st.aux)?;
            s.add_scaled(T::one(), &st.consensus_dual)?;
            if st.tv {
                tv_modes += 1;
                let mut a = st.unfolding.scaled(mu3);
                a.add_scaled(T::one(), &st.unfolding_dual)?;
                s.add_scaled(T::one(), &DenseTensor::fold(&a, k + 1, &dims)?)?;
            }
        }
        let off = T::from_count(self.order()) * mu1 + T::from_count(tv_modes) * mu3;
        let (inv_on, inv_off) = (T::one() / (off + mu4), T::one() / off);
        let t = observation.values().as_slice();
        let p = self.fidelity_dual.as_slice();
        let mask = observation.mask().as_slice();
        for (i, (x, &si)) in self
            .x
            .as_mut_slice()
            .iter_mut()
            .zip(s.as_slice())
            .enumerate()
        {
            *x = if mask[i] {
                (si + mu4 * t[i] - p[i]) * inv_on
            } else {
                si * inv_off
            };
        }
        Ok(())
    }

    /// Dual ascent on `𝒢_n`, `Λ_n`, `Γ_n`, `P`, `Φ_n`, then every `μ_i ← ρμ_i`.
    /// Returns the per-mode factorization residuals.
    pub fn update_multipliers(&mut self, observation: &Observation<T>, rho: T) -> Result<Vec<T>> {
        let [mu1, mu2, mu3, mu4, mu5] = self.mus;
        let mut residuals = Vec::with_capacity(self.order());
        for (k, st) in self.modes.iter_mut().enumerate() {
            let mode = k + 1;
            let gap = st.aux.zip_map(&self.x, |z, x| z - x)?;
            st.consensus_dual.add_scaled(mu1, &gap)?;
            if st.tv {
                let sgap = st
                    .slack
                    .zip_map(&apply_difference(&st.unfolding), |q, fa| q - fa)?;
                st.slack_dual.add_scaled(mu2, &sgap)?;
                let agap = st.unfolding.zip_map(&self.x.unfold(mode)?, |a, x| a - x)?;
                st.unfolding_dual.add_scaled(mu3, &agap)?;
            }
            let fgap = st.aux.unfold(mode)?.zip_map(&st.low_rank, |z, l| z - l)?;
            st.factor_dual.add_scaled(mu5, &fgap)?;
            residuals.push(fgap.frobenius_norm());
        }
        let mask = observation.mask().as_slice();
        let t = observation.values().as_slice();
        let x = self.x.as_slice();
        for (i, p) in self.fidelity_dual.as_mut_slice().iter_mut().enumerate() {
            if mask[i] {
                *p += mu4 * (x[i] - t[i]);
            }
        }
        self.mus.iter_mut().for_each(|m| *m *= rho);
        Ok(residuals)
    }

    /// See [`crate::TlnmState::low_rank_engaged`].
    pub fn low_rank_engaged(&self) -> bool {
        any_nonzero_core(self.modes.iter().map(|st| &st.factors.core))
    }

    /// `Σ α_n ‖D_n‖_{2,1} + λ Σ β_n |Q_n|`
    pub fn objective(&self) -> T {
        self.modes
            .iter()
            .zip(&self.alphas)
            .map(|(st, &a)| a * l21_norm(&st.factors.core) + self.lambda * tv_term(st))
            .sum()
    }

    pub fn step(&mut self, observation: &Observation<T>, rho: T) -> Result<IterationRecord> {
        let previous = self.x.clone();
        let penalty = self.mus[0];
        for mode in 1..=self.order() {
            self.update_tv_slack(mode)?;
            self.update_factors(mode)?;
            self.update_consensus(mode)?;
            self.update_unfolding_copy(mode)?;
        }
        self.update_global(observation)?;
        if !self.x.is_finite() {
            return Err(nonfinite(self.iteration + 1, "estimate"));
        }
        let residuals = self.update_multipliers(observation, rho)?;
        self.iteration += 1;
        Ok(IterationRecord {
            max_change: self.x.max_abs_diff(&previous)?.as_f64(),
            factor_residuals: residuals.into_iter().map(T::as_f64).collect(),
            fidelity_residual: observation.fidelity_residual(&self.x)?.as_f64(),
            objective: self.objective().as_f64(),
            penalty: penalty.as_f64(),
        })
    }
}

/// `β_n |Q_n|`: entrywise absolute sum of the slack, zero without TV.
pub fn tv_term<T: Scalar>(mode: &TlnmTvMode<T>) -> T {
    if mode.tv {
        mode.slack.as_slice().iter().map(|v| v.abs()).sum()
    } else {
        T::zero()
    }
}

/// Runs the TV-augmented ADMM until `‖X^{k+1} − X^k‖_∞ ≤ ε` or `max_iters`,
/// with the same zero-core guard as [`crate::solve_tlnm`].
pub fn solve_tlnmtv<T: Scalar>(
    observation: &Observation<T>,
    config: &TlnmTvConfig<T>,
) -> Result<(DenseTensor<T>, SolverReport)> {
    let start = Instant::now();
    let mut state = TlnmTvState::new(observation, config)?;
    let mut report = SolverReport::default();
    while state.iteration < config.max_iters {
        let record = match state.step(observation, config.rho) {
            Ok(r) => r,
            Err(e) => return Err(attach_report(e, report, start)),
        };
        // a stall before any core is nonzero is not a solution
        let done = record.max_change <= config.eps.as_f64() && state.low_rank_engaged();
        report.push(record);
        if done {
            report.converged = true;
            break;
        }
    }
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((state.x, report))
}
