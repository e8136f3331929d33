//! One completion experiment end to end: load, mask, solve, score, write.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread;

use tenfill_core::{
    evaluate, solve_svt_baseline, solve_tlnm, solve_tlnmtv, Observation, QualityRecord,
    SolverReport, Tensor, TlnmConfig, TlnmTvConfig,
};

use crate::dten::{load_mask, load_tensor, save_tensor};
use crate::error::{CliError, Result};
use crate::pgm::export_slice_pgm;
use crate::sampling::{mask_for, MaskMode};

pub const RESULTS_SCHEMA: &str = "# tenfill-results v1";
pub const TRACE_SCHEMA: &str = "# tenfill-trace v1";
pub const RESULTS_HEADER: [&str; 8] = [
    "method",
    "sampling_rate",
    "seed",
    "mpsnr",
    "mssim",
    "ergas",
    "iterations",
    "wall_time",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Tlnm,
    Tlnmtv,
    SvtBaseline,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Tlnm => "tlnm",
            Method::Tlnmtv => "tlnmtv",
            Method::SvtBaseline => "svt-baseline",
        }
    }
}

/// Optional replacements for the solver defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverOverrides {
    pub alphas: Option<Vec<f64>>,
    pub ranks: Option<Vec<usize>>,
    pub mu0: Option<f64>,
    pub rho: Option<f64>,
    pub eps: Option<f64>,
    pub max_iters: Option<usize>,
    pub lambda: Option<f64>,
    pub betas: Option<Vec<bool>>,
    /// All five TLNMTV penalties; defaults to `mu0` for each.
    pub mus: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub input_path: PathBuf,
    pub method: Method,
    pub sampling_rate: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// 1-based mode along which bands are sliced for metrics and images.
    pub band_mode: usize,
    pub mask_mode: MaskMode,
    /// Use this mask instead of drawing one.
    pub mask_path: Option<PathBuf>,
    pub solver: SolverOverrides,
    /// 1-based bands to write as PGM triples (truth, observed, completed).
    pub pgm_bands: Vec<usize>,
}

impl ExperimentSpec {
    pub fn new(
        input_path: impl Into<PathBuf>,
        method: Method,
        output_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            input_path: input_path.into(),
            method,
            sampling_rate: 0.1,
            seed: 0,
            output_dir: output_dir.into(),
            band_mode: 3,
            mask_mode: MaskMode::Element,
            mask_path: None,
            solver: SolverOverrides::default(),
            pgm_bands: Vec::new(),
        }
    }

    fn validate(&self, dims: &[usize]) -> Result<()> {
        if !(self.sampling_rate > 0.0 && self.sampling_rate <= 1.0) {
            return Err(CliError::Argument(format!(
                "sampling rate must be in (0, 1], got {}",
                self.sampling_rate
            )));
        }
        if self.band_mode == 0 || self.band_mode > dims.len() {
            return Err(CliError::Argument(format!(
                "band mode {} outside 1..={}",
                self.band_mode,
                dims.len()
            )));
        }
        let bands = dims[self.band_mode - 1];
        if let Some(&b) = self.pgm_bands.iter().find(|&&b| b == 0 || b > bands) {
            return Err(CliError::Argument(format!("band {b} outside 1..={bands}")));
        }
        Ok(())
    }
}

/// What a finished experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub quality: QualityRecord,
    pub report: SolverReport,
    pub completed_path: PathBuf,
    pub results_path: PathBuf,
    pub trace_path: PathBuf,
}

pub fn tlnm_config(dims: &[usize], o: &SolverOverrides) -> TlnmConfig {
    let mut cfg = TlnmConfig::defaults(dims);
    if let Some(a) = &o.alphas {
        cfg.alphas = a.clone();
    }
    if let Some(r) = &o.ranks {
        cfg.ranks = r.clone();
    }
    if let Some(v) = o.mu0 {
        cfg.mu0 = v;
    }
    if let Some(v) = o.rho {
        cfg.rho = v;
    }
    if let Some(v) = o.eps {
        cfg.eps = v;
    }
    if let Some(v) = o.max_iters {
        cfg.max_iters = v;
    }
    cfg
}

/// TV on every mode except the band mode (when that mode has extent ≥ 2).
pub fn default_betas(dims: &[usize], band_mode: usize) -> Vec<bool> {
    dims.iter()
        .enumerate()
        .map(|(k, &d)| k + 1 != band_mode && d >= 2)
        .collect()
}

pub fn tlnmtv_config(
    dims: &[usize],
    band_mode: usize,
    o: &SolverOverrides,
) -> Result<TlnmTvConfig> {
    let betas = o
        .betas
        .clone()
        .unwrap_or_else(|| default_betas(dims, band_mode));
    let mut cfg = TlnmTvConfig::from_tlnm(tlnm_config(dims, o), o.lambda.unwrap_or(1.0), betas);
    if let Some(m) = &o.mus {
        cfg.mus = m
            .as_slice()
            .try_into()
            .map_err(|_| CliError::Argument(format!("expected 5 penalties, got {}", m.len())))?;
    }
    Ok(cfg)
}

fn solve(spec: &ExperimentSpec, obs: &Observation<f64>) -> Result<(Tensor, SolverReport)> {
    let dims = obs.dims();
    let out = match spec.method {
        Method::Tlnm => solve_tlnm(obs, &tlnm_config(dims, &spec.solver)),
        Method::Tlnmtv => solve_tlnmtv(obs, &tlnmtv_config(dims, spec.band_mode, &spec.solver)?),
        Method::SvtBaseline => solve_svt_baseline(obs, &tlnm_config(dims, &spec.solver)),
    };
    Ok(out?)
}

/// Copies the observed entries back in, so the output satisfies `X_Ω = T_Ω`
/// exactly rather than up to the solver's residual.
pub fn restore_observed(mut x: Tensor, obs: &Observation<f64>) -> Tensor {
    let t = obs.values().as_slice();
    for ((xi, &ti), &m) in x
        .as_mut_slice()
        .iter_mut()
        .zip(t)
        .zip(obs.mask().as_slice())
    {
        if m {
            *xi = ti;
        }
    }
    x
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// One `results.csv` row in [`RESULTS_HEADER`] order.
pub fn results_row(spec: &ExperimentSpec, q: &QualityRecord, iterations: usize) -> Vec<String> {
    vec![
        spec.method.name().to_string(),
        num(spec.sampling_rate),
        spec.seed.to_string(),
        num(q.mpsnr),
        q.mssim.map_or_else(|| "NaN".to_string(), num),
        num(q.ergas),
        iterations.to_string(),
        num(q.wall_time),
    ]
}

fn write_csv(path: &Path, schema: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut file = File::create(path).map_err(|e| CliError::io(path, e))?;
    writeln!(file, "{schema}").map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_trace(path: &Path, report: &SolverReport, order: usize) -> Result<()> {
    let mut header: Vec<String> = [
        "iteration",
        "max_change",
        "fidelity_residual",
        "objective",
        "penalty",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=order).map(|n| format!("factor_residual_{n}")));
    let rows: Vec<Vec<String>> = report
        .history
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let mut r = vec![
                (k + 1).to_string(),
                num(h.max_change),
                num(h.fidelity_residual),
                num(h.objective),
                num(h.penalty),
            ];
            r.extend(h.factor_residuals.iter().map(|&v| num(v)));
            r
        })
        .collect();
    write_csv(path, TRACE_SCHEMA, &header, &rows)
}

pub fn write_results(path: &Path, rows: &[Vec<String>]) -> Result<()> {
    let header: Vec<String> = RESULTS_HEADER.iter().map(|s| s.to_string()).collect();
    write_csv(path, RESULTS_SCHEMA, &header, rows)
}

/// Runs one experiment, writing into `spec.output_dir`:
/// `completed.dten`, `results.csv`, `trace.csv` and, if requested,
/// `truth_bK.pgm`, `observed_bK.pgm`, `completed_bK.pgm`.
///
/// On divergence the trace of the completed iterations is still written.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let truth = load_tensor(&spec.input_path)?;
    let dims = truth.dims().to_vec();
    spec.validate(&dims)?;
    let mask = match &spec.mask_path {
        Some(p) => {
            let m = load_mask(p)?;
            if m.dims() != dims.as_slice() {
                return Err(CliError::Argument(format!(
                    "mask dims {:?} do not match input dims {dims:?}",
                    m.dims()
                )));
            }
            m
        }
        None => mask_for(
            &dims,
            spec.sampling_rate,
            spec.seed,
            spec.mask_mode,
            spec.band_mode,
        )?,
    };
    let obs = Observation::sample(&truth, mask)?;

    let dir = &spec.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let trace_path = dir.join("trace.csv");
    let (x, report) = match solve(spec, &obs) {
        Ok(r) => r,
        Err(CliError::Divergence {
            iteration,
            what,
            report,
        }) => {
            write_trace(&trace_path, &report, dims.len())?;
            return Err(CliError::Divergence {
                iteration,
                what,
                report,
            });
        }
        Err(e) => return Err(e),
    };

    let x = restore_observed(x, &obs);
    let mut quality = evaluate(&truth, &x, spec.band_mode)?;
    quality.wall_time = report.wall_time;

    let completed_path = dir.join("completed.dten");
    save_tensor(&x, &completed_path)?;
    let results_path = dir.join("results.csv");
    write_results(
        &results_path,
        &[results_row(spec, &quality, report.iterations)],
    )?;
    write_trace(&trace_path, &report, dims.len())?;
    for &b in &spec.pgm_bands {
        export_slice_pgm(
            &truth,
            spec.band_mode,
            b,
            dir.join(format!("truth_b{b}.pgm")),
        )?;
        export_slice_pgm(
            obs.values(),
            spec.band_mode,
            b,
            dir.join(format!("observed_b{b}.pgm")),
        )?;
        export_slice_pgm(
            &x,
            spec.band_mode,
            b,
            dir.join(format!("completed_b{b}.pgm")),
        )?;
    }
    Ok(ExperimentOutcome {
        quality,
        report,
        completed_path,
        results_path,
        trace_path,
    })
}

/// Runs independent experiments on separate threads. Each spec must have
/// its own output directory.
pub fn run_batch(specs: &[ExperimentSpec]) -> Vec<Result<ExperimentOutcome>> {
    thread::scope(|s| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| s.spawn(move || run_experiment(spec)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    })
}
