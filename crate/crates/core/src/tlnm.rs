//! ADMM solver for low-rank tensor completion with the L2,1 surrogate.
//!
//! Every mode `n` carries an auxiliary copy `M_n` of the estimate whose
//! unfolding is factored as `L_n·D_n·R_n` by one QR sweep per outer
//! iteration; the core `D_n` is then shrunk column-wise with threshold
//! `α_n/μ`. The model solved is
//!
//! ```text
//! min Σ α_n ‖D_n‖_{2,1}
//! s.t. M_n = X,  X_Ω = T_Ω,  unfold_n(M_n) = L_n D_n R_n,
//!      L_nᵀL_n = I,  R_nR_nᵀ = I
//! ```
//!
//! with multipliers `Q_n` (consensus), `Φ_n` (factorization) and `P`
//! (fidelity) and a single penalty `μ` grown by `ρ` every iteration.

use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::lowrank::{csvd_sweep, l21_norm, lnms_prox, LdrFactors};
use crate::matrix::Matrix;
use crate::report::{IterationRecord, SolverReport};
use crate::scalar::Scalar;
use crate::tensor::{DenseTensor, Observation};

/// Hyperparameters of [`solve_tlnm`].
#[derive(Debug, Clone, PartialEq)]
pub struct TlnmConfig<T = f64> {
    /// Mode weights `α_n ≥ 0`, summing to one.
    pub alphas: Vec<T>,
    /// Factorization ranks `r_n`, `1 ≤ r_n ≤ min(I_n, Π_{k≠n} I_k)`.
    pub ranks: Vec<usize>,
    /// Initial penalty `μ⁰ > 0`.
    pub mu0: T,
    /// Penalty growth `ρ ≥ 1`.
    pub rho: T,
    /// Stop once `‖X^{k+1} − X^k‖_∞ ≤ eps`.
    pub eps: T,
    pub max_iters: usize,
}

/// `ceil(0.1·min(I_n, t_n))`, at least one.
pub fn default_ranks(dims: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    dims.iter()
        .map(|&d| {
            let cap = d.min(total / d);
            (cap as f64 * 0.1).ceil().max(1.0) as usize
        })
        .collect()
}

impl<T: Scalar> TlnmConfig<T> {
    /// `α_n = 1/N`, ranks from [`default_ranks`], `μ⁰ = 1e−4`, `ρ = 1.05`,
    /// `ε = 1e−5`, 500 iterations.
    pub fn defaults(dims: &[usize]) -> Self {
        let n = dims.len();
        Self {
            alphas: vec![T::one() / T::from_count(n); n],
            ranks: default_ranks(dims),
            mu0: T::lit(1e-4),
            rho: T::lit(1.05),
            eps: T::lit(1e-5),
            max_iters: 500,
        }
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        validate_common(dims, &self.alphas, &self.ranks, self.rho, self.eps)?;
        if !(self.mu0 > T::zero()) || !self.mu0.is_finite() {
            return Err(invalid(format!("mu0 must be positive, got {}", self.mu0)));
        }
        Ok(())
    }
}

pub(crate) fn validate_common<T: Scalar>(
    dims: &[usize],
    alphas: &[T],
    ranks: &[usize],
    rho: T,
    eps: T,
) -> Result<()> {
    let n = dims.len();
    if alphas.len() != n || ranks.len() != n {
        return Err(invalid(format!(
            "expected {n} weights and ranks, got {} and {}",
            alphas.len(),
            ranks.len()
        )));
    }
    if alphas.iter().any(|&a| a < T::zero() || !a.is_finite()) {
        return Err(invalid("mode weights must be finite and nonnegative"));
    }
    let sum: T = alphas.iter().copied().sum();
    if (sum - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::from_count(4 * n)) {
        return Err(invalid(format!("mode weights must sum to 1, got {sum}")));
    }
    let total: usize = dims.iter().product();
    for (k, (&d, &r)) in dims.iter().zip(ranks).enumerate() {
        let cap = d.min(total / d);
        if r == 0 || r > cap {
            return Err(invalid(format!(
                "rank {r} for mode {} outside 1..={cap}",
                k + 1
            )));
        }
    }
    if !(rho >= T::one()) || !rho.is_finite() {
        return Err(invalid(format!("rho must be >= 1, got {rho}")));
    }
    if !(eps > T::zero()) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// One factor update on `g`: a QR sweep refreshes `L` and `R`, the core
/// `D_T = Lᵀ·g·Rᵀ` comes out of the second QR, and `D = lnms(D_T, α/μ)`.
/// Returns the unshrunk core `D_T`.
pub(crate) fn low_rank_step<T: Scalar>(
    g: &Matrix<T>,
    factors: &mut LdrFactors<T>,
    alpha: T,
    mu: T,
) -> Result<Matrix<T>> {
    csvd_sweep(g, factors)?;
    let core_t = factors.core.clone();
    factors.core = lnms_prox(&core_t, alpha / mu)?;
    Ok(core_t)
}

pub(crate) fn nonfinite(iteration: usize, what: impl Into<String>) -> Error {
    Error::Divergence {
        iteration,
        what: what.into(),
        report: Box::default(),
    }
}

/// Per-mode variables.
#[derive(Debug, Clone)]
pub struct TlnmMode<T = f64> {
    /// Auxiliary copy `M_n` of the estimate.
    pub aux: DenseTensor<T>,
    pub factors: LdrFactors<T>,
    /// `L_n·D_n·R_n` from the latest factor update.
    pub low_rank: Matrix<T>,
    /// Consensus multiplier `Q_n` (tensor form).
    pub consensus_dual: DenseTensor<T>,
    /// Factorization multiplier `Φ_n` (unfolded form).
    pub factor_dual: Matrix<T>,
}

/// Full iterate of the TLNM ADMM.
#[derive(Debug, Clone)]
pub struct TlnmState<T = f64> {
    pub x: DenseTensor<T>,
    pub modes: Vec<TlnmMode<T>>,
    /// Fidelity multiplier `P`.
    pub fidelity_dual: DenseTensor<T>,
    pub mu: T,
    pub alphas: Vec<T>,
    /// Completed outer iterations.
    pub iteration: usize,
}

impl<T: Scalar> TlnmState<T> {
    /// `X⁰ = T_Ω`, `M_n⁰ = X⁰`, identity factors, zero multipliers.
    pub fn new(observation: &Observation<T>, config: &TlnmConfig<T>) -> Result<Self> {
        let dims = observation.dims();
        config.validate(dims)?;
        let x = observation.values().clone();
        let zeros = DenseTensor::zeros(dims)?;
        let modes = (1..=dims.len())
            .map(|mode| {
                let (rows, cols) = unfold_shape(dims, mode);
                let factors = LdrFactors::identity(rows, cols, config.ranks[mode - 1])?;
                Ok(TlnmMode {
                    aux: x.clone(),
                    low_rank: factors.reconstruct(),
                    factors,
                    consensus_dual: zeros.clone(),
                    factor_dual: Matrix::zeros(rows, cols),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x,
            modes,
            fidelity_dual: zeros,
            mu: config.mu0,
            alphas: config.alphas.clone(),
            iteration: 0,
        })
    }

    fn order(&self) -> usize {
        self.modes.len()
    }

    /// Refreshes `L_n`, `R_n`, `D_n` from `G_n = unfold_n(M_n) + Φ_n/μ`.
    /// Returns the unshrunk core `D_Tn`.
    pub fn update_factors(&mut self, mode: usize) -> Result<Matrix<T>> {
        let (mu, alpha, it) = (self.mu, self.alphas[mode - 1], self.iteration + 1);
        let st = &mut self.modes[mode - 1];
        let mut g = st.aux.unfold(mode)?;
        g.add_scaled(T::one() / mu, &st.factor_dual)?;
        if !g.is_finite() {
            return Err(nonfinite(it, format!("factor target of mode {mode}")));
        }
        let core_t = low_rank_step(&g, &mut st.factors, alpha, mu)?;
        st.low_rank = st.factors.reconstruct();
        Ok(core_t)
    }

    /// `unfold_n(M_n) = ½(X_(n) − Q_n(n)/μ + L_nD_nR_n − Φ_n/μ)`
    pub fn update_mode_tensor(&mut self, mode: usize) -> Result<()> {
        let inv_mu = T::one() / self.mu;
        let half = T::lit(0.5);
        let st = &mut self.modes[mode - 1];
        let mut target = self.x.clone();
        target.add_scaled(-inv_mu, &st.consensus_dual)?;
        let mut m = target.unfold(mode)?;
        m.add_scaled(T::one(), &st.low_rank)?;
        m.add_scaled(-inv_mu, &st.factor_dual)?;
        m.as_mut_slice().iter_mut().for_each(|v| *v *= half);
        st.aux = DenseTensor::fold(&m, mode, self.x.dims())?;
        Ok(())
    }

    /// Closed-form `X` update: with `S = Σ(μM_n + Q_n)`,
    /// `X_Ω = (S + μT − P)_Ω / ((N+1)μ)` and `X_Ω⊥ = S_Ω⊥ / (Nμ)`.
    pub fn update_global(&mut self, observation: &Observation<T>) -> Result<()> {
        let mu = self.mu;
        let n = T::from_count(self.order());
        let mut s = DenseTensor::zeros(self.x.dims())?;
        for st in &self.modes {
            s.add_scaled(mu, &st.aux)?;
            s.add_scaled(T::one(), &st.consensus_dual)?;
        }
        let on = T::one() / ((n + T::one()) * mu);
        let off = T::one() / (n * mu);
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
                (si + mu * t[i] - p[i]) * on
            } else {
                si * off
            };
        }
        Ok(())
    }

    /// Dual ascent on `Q_n`, `Φ_n`, `P`, then `μ ← ρμ`. Returns the
    /// per-mode factorization residuals `‖unfold_n(M_n) − L_nD_nR_n‖_F`.
    pub fn update_multipliers(&mut self, observation: &Observation<T>, rho: T) -> Result<Vec<T>> {
        let mu = self.mu;
        let mut residuals = Vec::with_capacity(self.order());
        for (k, st) in self.modes.iter_mut().enumerate() {
            let gap = st.aux.zip_map(&self.x, |m, x| m - x)?;
            st.consensus_dual.add_scaled(mu, &gap)?;
            let fgap = st.aux.unfold(k + 1)?.zip_map(&st.low_rank, |m, l| m - l)?;
            st.factor_dual.add_scaled(mu, &fgap)?;
            residuals.push(fgap.frobenius_norm());
        }
        let mask = observation.mask().as_slice();
        let t = observation.values().as_slice();
        let x = self.x.as_slice();
        for (i, p) in self.fidelity_dual.as_mut_slice().iter_mut().enumerate() {
            if mask[i] {
                *p += mu * (x[i] - t[i]);
            }
        }
        self.mu = mu * rho;
        Ok(residuals)
    }

    /// `Σ α_n ‖D_n‖_{2,1}`
    pub fn objective(&self) -> T {
        self.modes
            .iter()
            .zip(&self.alphas)
            .map(|(st, &a)| a * l21_norm(&st.factors.core))
            .sum()
    }

    /// False while every core `D_n` is identically zero, i.e. the shrinkage
    /// has not yet let any component through.
    pub fn low_rank_engaged(&self) -> bool {
        any_nonzero_core(self.modes.iter().map(|st| &st.factors.core))
    }

    /// One full outer iteration in reference order.
    pub fn step(&mut self, observation: &Observation<T>, rho: T) -> Result<IterationRecord> {
        let previous = self.x.clone();
        let penalty = self.mu;
        for mode in 1..=self.order() {
            self.update_factors(mode)?;
            self.update_mode_tensor(mode)?;
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

pub(crate) fn any_nonzero_core<'a, T: Scalar>(
    mut cores: impl Iterator<Item = &'a Matrix<T>>,
) -> bool {
    cores.any(|d| d.as_slice().iter().any(|&v| v != T::zero()))
}

pub(crate) fn unfold_shape(dims: &[usize], mode: usize) -> (usize, usize) {
    let d = dims[mode - 1];
    (d, dims.iter().product::<usize>() / d)
}

/// Runs the TLNM ADMM until `‖X^{k+1} − X^k‖_∞ ≤ ε` or `max_iters`.
/// The stopping test is skipped while all cores are still zero.
///
/// On divergence the returned [`Error::Divergence`] carries the trace of
/// every completed iteration.
pub fn solve_tlnm<T: Scalar>(
    observation: &Observation<T>,
    config: &TlnmConfig<T>,
) -> Result<(DenseTensor<T>, SolverReport)> {
    let start = Instant::now();
    let mut state = TlnmState::new(observation, config)?;
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

pub(crate) fn attach_report(err: Error, mut report: SolverReport, start: Instant) -> Error {
    report.wall_time = start.elapsed().as_secs_f64();
    match err {
        Error::Divergence {
            iteration, what, ..
        } => Error::Divergence {
            iteration,
            what,
            report: Box::new(report),
        },
        other => other,
    }
}
