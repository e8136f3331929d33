use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tenfill_core::{evaluate, Mat};

use tenfill_cli::dten::{load_tensor, save_mask, save_tensor};
use tenfill_cli::experiment::{
    results_row, run_batch, write_results, ExperimentSpec, Method, SolverOverrides,
};
use tenfill_cli::pgm::{export_slice_pgm, read_pgm_band, read_raw_band, stack_bands, RawKind};
use tenfill_cli::sampling::{mask_for, MaskMode};
use tenfill_cli::{CliError, Result};

/// Low-rank tensor completion from sampled entries.
#[derive(Parser)]
#[command(name = "tenfill", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a DTEN1 tensor, complete it and score the result.
    Complete(CompleteArgs),
    /// Draw a sampling mask and save it as DTEN1.
    Mask(MaskArgs),
    /// Stack PGM images or raw bands into a DTEN1 tensor [rows, cols, bands].
    Convert(ConvertArgs),
    /// Print mpsnr, mssim and ergas of an estimate against a reference.
    Metrics(MetricsArgs),
    /// Write one band of a DTEN1 tensor as an 8-bit PGM.
    Export(ExportArgs),
}

fn parse_flag(s: &str) -> std::result::Result<bool, String> {
    match s {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        _ => Err(format!("expected 0/1 or true/false, got {s:?}")),
    }
}

#[derive(Args)]
struct CompleteArgs {
    /// Ground-truth tensor (DTEN1, f64).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "tlnm")]
    method: Method,
    /// Sampling rates in (0, 1]; several values run concurrently.
    #[arg(long = "sampling-rate", value_delimiter = ',', default_value = "0.1")]
    sampling_rate: Vec<f64>,
    /// Mask seeds; several values run concurrently.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,
    /// Output directory. With several runs each gets `sr<rate>_seed<seed>/`.
    #[arg(long = "output-dir")]
    output_dir: PathBuf,
    /// Mode along which bands are sliced (1-based).
    #[arg(long = "band-mode", default_value_t = 3)]
    band_mode: usize,
    #[arg(long = "mask-mode", value_enum, default_value = "element")]
    mask_mode: MaskMode,
    /// Use this DTEN1 mask instead of drawing one.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Mode weights [default: 1/N each].
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Factorization ranks [default: ceil(0.1·min(I_n, Π_{k≠n} I_k))].
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    /// Initial penalty [default: 1e-4].
    #[arg(long)]
    mu0: Option<f64>,
    /// Penalty growth factor [default: 1.05].
    #[arg(long)]
    rho: Option<f64>,
    /// Stopping tolerance on the max-abs change [default: 1e-5].
    #[arg(long)]
    eps: Option<f64>,
    /// Iteration cap [default: 500].
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// TV weight (tlnmtv) [default: 1].
    #[arg(long)]
    lambda: Option<f64>,
    /// Per-mode TV switches, e.g. 1,1,0 (tlnmtv) [default: every mode but the band mode].
    #[arg(long, value_delimiter = ',', value_parser = parse_flag)]
    betas: Option<Vec<bool>>,
    /// The five penalties (tlnmtv) [default: mu0 for each].
    #[arg(long, value_delimiter = ',')]
    mus: Option<Vec<f64>>,
    /// Bands (1-based) to export as truth/observed/completed PGMs.
    #[arg(long = "pgm-bands", value_delimiter = ',')]
    pgm_bands: Vec<usize>,
}

#[derive(Args)]
struct MaskArgs {
    /// Tensor dims, e.g. 256,256,31.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long = "sampling-rate")]
    sampling_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "element")]
    mode: MaskMode,
    /// Band mode used by `pixel` masks.
    #[arg(long = "band-mode", default_value_t = 3)]
    band_mode: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    /// Band files in order.
    #[arg(required = true)]
    bands: Vec<PathBuf>,
    /// Read raw little-endian row-major bands instead of PGM.
    #[arg(long, value_enum)]
    raw: Option<RawKind>,
    /// Rows of each raw band.
    #[arg(long)]
    rows: Option<usize>,
    /// Columns of each raw band.
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    estimate: PathBuf,
    #[arg(long = "band-mode", default_value_t = 3)]
    band_mode: usize,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "band-mode", default_value_t = 3)]
    band_mode: usize,
    /// 1-based band index.
    #[arg(long)]
    band: usize,
    #[arg(long)]
    output: PathBuf,
}

fn complete(a: CompleteArgs) -> Result<()> {
    let overrides = SolverOverrides {
        alphas: a.alphas,
        ranks: a.ranks,
        mu0: a.mu0,
        rho: a.rho,
        eps: a.eps,
        max_iters: a.max_iters,
        lambda: a.lambda,
        betas: a.betas,
        mus: a.mus,
    };
    let single = a.sampling_rate.len() == 1 && a.seed.len() == 1;
    let mut specs = Vec::new();
    for &sr in &a.sampling_rate {
        for &seed in &a.seed {
            let dir = if single {
                a.output_dir.clone()
            } else {
                a.output_dir.join(format!("sr{sr}_seed{seed}"))
            };
            let mut spec = ExperimentSpec::new(&a.input, a.method, dir);
            spec.sampling_rate = sr;
            spec.seed = seed;
            spec.band_mode = a.band_mode;
            spec.mask_mode = a.mask_mode;
            spec.mask_path = a.mask.clone();
            spec.solver = overrides.clone();
            spec.pgm_bands = a.pgm_bands.clone();
            specs.push(spec);
        }
    }
    let outcomes = run_batch(&specs);
    let mut rows = Vec::new();
    let mut first_err = None;
    for (spec, out) in specs.iter().zip(outcomes) {
        match out {
            Ok(o) => {
                let row = results_row(spec, &o.quality, o.report.iterations);
                println!("{}", row.join(","));
                rows.push(row);
            }
            Err(e) => {
                eprintln!("error: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    if !single && !rows.is_empty() {
        write_results(&a.output_dir.join("results.csv"), &rows)?;
    }
    first_err.map_or(Ok(()), Err)
}

fn mask(a: MaskArgs) -> Result<()> {
    let m = mask_for(&a.dims, a.sampling_rate, a.seed, a.mode, a.band_mode)?;
    save_mask(&m, &a.output)
}

fn convert(a: ConvertArgs) -> Result<()> {
    let bands = a
        .bands
        .iter()
        .map(|p| match a.raw {
            None => read_pgm_band(p),
            Some(kind) => {
                let (Some(r), Some(c)) = (a.rows, a.cols) else {
                    return Err(CliError::Argument(
                        "raw bands need --rows and --cols".into(),
                    ));
                };
                read_raw_band(p, kind, r, c)
            }
        })
        .collect::<Result<Vec<Mat>>>()?;
    save_tensor(&stack_bands(&bands)?, &a.output)
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let r = load_tensor(&a.reference)?;
    let e = load_tensor(&a.estimate)?;
    let q = evaluate(&r, &e, a.band_mode)?;
    println!("mpsnr,mssim,ergas");
    println!(
        "{},{},{}",
        q.mpsnr,
        q.mssim.map_or_else(|| "NaN".to_string(), |v| v.to_string()),
        q.ergas
    );
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let t = load_tensor(&a.input)?;
    export_slice_pgm(&t, a.band_mode, a.band, &a.output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Complete(a) => complete(a),
        Command::Mask(a) => mask(a),
        Command::Convert(a) => convert(a),
        Command::Metrics(a) => metrics(a),
        Command::Export(a) => export(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
