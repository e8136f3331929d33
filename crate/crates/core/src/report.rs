//! Per-iteration diagnostics shared by the ADMM solvers.

/// Diagnostics recorded after one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// `‖X^{k+1} − X^k‖_∞`, the stopping statistic.
    pub max_change: f64,
    /// `‖unfold_n(M_n) − L_n·D_n·R_n‖_F` for every mode.
    pub factor_residuals: Vec<f64>,
    /// `‖X_Ω − T_Ω‖_F`
    pub fidelity_residual: f64,
    /// `Σ α_n·‖D_n‖_{2,1}`
    pub objective: f64,
    /// Penalty in force during the iteration (the first one for the TV solver).
    pub penalty: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    /// Wall-clock seconds.
    pub wall_time: f64,
}

impl SolverReport {
    pub(crate) fn push(&mut self, record: IterationRecord) {
        self.history.push(record);
        self.iterations = self.history.len();
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.history.last()
    }

    /// Reports are compared bitwise apart from timing.
    pub fn same_trace(&self, other: &Self) -> bool {
        self.iterations == other.iterations
            && self.converged == other.converged
            && self.history == other.history
    }
}
