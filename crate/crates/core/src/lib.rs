//! Low-rank tensor completion with QR-based factorizations.
//!
//! The solvers recover a dense tensor from a subset of its entries by
//! penalizing the L2,1 norm of small cores `D_n` of each mode-n unfolding,
//! which are kept up to date with cheap QR sweeps instead of SVDs.
//! [`solve_tlnm`] is the plain model; [`solve_tlnmtv`] adds an anisotropic
//! total-variation term along selected modes.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! below fix it to `f64` for the common case.
//!
//! ```
//! use tenfill_core::{solve_tlnm, Mask, Observation, Tensor, TlnmConfig};
//!
//! // rank one along every mode
//! let gt = Tensor::from_fn(&[6, 6, 6], |i| ((1 + i[0]) * (2 + i[1]) * (3 + i[2])) as f64 / 300.0)
//!     .unwrap();
//! let obs = Observation::sample(&gt, Mask::full(gt.dims()).unwrap()).unwrap();
//! let (x, report) = solve_tlnm(&obs, &TlnmConfig::defaults(gt.dims())).unwrap();
//! assert!(report.converged);
//! assert!(x.max_abs_diff(&gt).unwrap() < 1e-3);
//! ```

mod baseline;
mod error;
pub mod lowrank;
mod matrix;
pub mod metrics;
mod report;
mod scalar;
mod tensor;
mod tlnm;
mod tlnmtv;
pub mod tridiag;

pub use baseline::solve_svt_baseline;
pub use error::{Error, Result};
pub use lowrank::{
    csvd_qr, csvd_qr_default, csvd_sweep, l21_norm, lnms_prox, nuclear_norm, qr_thin,
    singular_values, svt_prox, LdrFactors,
};
pub use matrix::Matrix;
pub use metrics::{ergas, evaluate, psnr, ssim, QualityRecord};
pub use report::{IterationRecord, SolverReport};
pub use scalar::Scalar;
pub use tensor::{DenseTensor, Mask, Observation};
pub use tlnm::{default_ranks, solve_tlnm, TlnmConfig, TlnmMode, TlnmState};
pub use tlnmtv::{
    apply_difference, apply_difference_t, difference_matrix, shrinkage, solve_tlnmtv, tv_term,
    TlnmTvConfig, TlnmTvMode, TlnmTvState,
};

pub type Tensor = DenseTensor<f64>;
pub type Tensor32 = DenseTensor<f32>;
pub type Mat = Matrix<f64>;
pub type Mat32 = Matrix<f32>;
pub type Factors = LdrFactors<f64>;
pub type Obs = Observation<f64>;
