//! SVD-based reference completion: the same consensus ADMM as TLNM but with
//! exact singular value thresholding on every unfolding. Slow on large
//! inputs; kept for comparisons.

use std::time::Instant;

use nalgebra::RealField;

use crate::error::Result;
use crate::lowrank::{nuclear_norm, svt_prox};
use crate::report::{IterationRecord, SolverReport};
use crate::scalar::Scalar;
use crate::tensor::{DenseTensor, Observation};
use crate::tlnm::{attach_report, nonfinite, validate_common, TlnmConfig};

/// Runs `M_n = fold(SVT(X_(n) − Q_n(n)/μ, α_n/μ))`,
/// `X_Ω = T_Ω`, `X_Ω⊥ = mean_n(M_n + Q_n/μ)`, `Q_n += μ(M_n − X)`.
/// Ranks in `config` are ignored.
pub fn solve_svt_baseline<T: Scalar + RealField>(
    observation: &Observation<T>,
    config: &TlnmConfig<T>,
) -> Result<(DenseTensor<T>, SolverReport)> {
    let dims = observation.dims().to_vec();
    let order = dims.len();
    validate_common(
        &dims,
        &config.alphas,
        &vec![1; order],
        config.rho,
        config.eps,
    )?;
    let start = Instant::now();
    let mut report = SolverReport::default();
    let mut x = observation.values().clone();
    let mut aux = vec![x.clone(); order];
    let mut duals = vec![DenseTensor::zeros(&dims)?; order];
    let mut mu = config.mu0;
    let mask = observation.mask().as_slice();
    let n = T::from_count(order);

    for it in 1..=config.max_iters {
        let previous = x.clone();
        let mut objective = T::zero();
        for k in 0..order {
            let mode = k + 1;
            let mut target = x.clone();
            target.add_scaled(-T::one() / mu, &duals[k])?;
            let unf = target.unfold(mode)?;
            if !unf.is_finite() {
                return Err(attach_report(
                    nonfinite(it, format!("unfolding of mode {mode}")),
                    report,
                    start,
                ));
            }
            let m = svt_prox(&unf, config.alphas[k] / mu)?;
            objective += config.alphas[k] * nuclear_norm(&m);
            aux[k] = DenseTensor::fold(&m, mode, &dims)?;
        }
        let mut s = DenseTensor::zeros(&dims)?;
        for k in 0..order {
            s.add_scaled(T::one(), &aux[k])?;
            s.add_scaled(T::one() / mu, &duals[k])?;
        }
        let t = observation.values().as_slice();
        for (i, (xi, &si)) in x.as_mut_slice().iter_mut().zip(s.as_slice()).enumerate() {
            *xi = if mask[i] { t[i] } else { si / n };
        }
        if !x.is_finite() {
            return Err(attach_report(nonfinite(it, "estimate"), report, start));
        }
        let mut residuals = Vec::with_capacity(order);
        for k in 0..order {
            let gap = aux[k].zip_map(&x, |m, v| m - v)?;
            duals[k].add_scaled(mu, &gap)?;
            residuals.push(gap.frobenius_norm().as_f64());
        }
        let record = IterationRecord {
            max_change: x.max_abs_diff(&previous)?.as_f64(),
            factor_residuals: residuals,
            fidelity_residual: observation.fidelity_residual(&x)?.as_f64(),
            objective: objective.as_f64(),
            penalty: mu.as_f64(),
        };
        mu *= config.rho;
        // same zero-iterate guard as the QR solvers
        let done = record.max_change <= config.eps.as_f64() && objective > T::zero();
        report.push(record);
        if done {
            report.converged = true;
            break;
        }
    }
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((x, report))
}
