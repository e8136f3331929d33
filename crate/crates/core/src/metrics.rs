//! Image-quality indices: PSNR, SSIM and ERGAS, plus per-band averaging.
//!
//! Inputs are assumed normalized to `[0, 1]` with peak 1. PSNR is capped at
//! [`PSNR_CAP`] so identical inputs still produce a finite number.

use crate::error::{invalid, mismatch, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

pub const PSNR_CAP: f64 = 100.0;

pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;

/// Averaged quality of a completed tensor against its ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityRecord {
    /// Mean PSNR over bands, dB.
    pub mpsnr: f64,
    /// Mean SSIM over bands; `None` when bands are smaller than the window.
    pub mssim: Option<f64>,
    pub ergas: f64,
    /// Seconds spent in the solver; zero when not measured.
    pub wall_time: f64,
}

fn check_shapes<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(mismatch(&[a.rows(), a.cols()], &[b.rows(), b.cols()]));
    }
    Ok(())
}

fn mse_of(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

fn widen<T: Scalar>(a: &[T]) -> Vec<f64> {
    a.iter().map(|&v| v.as_f64()).collect()
}

/// `10·log10(peak²/MSE)`, capped at [`PSNR_CAP`].
pub fn psnr<T: Scalar>(reference: &Matrix<T>, estimate: &Matrix<T>, peak: f64) -> Result<f64> {
    check_shapes(reference, estimate)?;
    if !(peak > 0.0) {
        return Err(invalid(format!("peak must be positive, got {peak}")));
    }
    let mse = mse_of(&widen(reference.as_slice()), &widen(estimate.as_slice()));
    Ok(psnr_from_mse(mse, peak))
}

fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        return PSNR_CAP;
    }
    (10.0 * (peak * peak / mse).log10()).min(PSNR_CAP)
}

fn gaussian_kernel() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let raw: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Separable "valid" filtering of a column-major `rows × cols` image.
fn filter_valid(img: &[f64], rows: usize, cols: usize, k: &[f64]) -> Vec<f64> {
    let w = k.len();
    let (out_r, out_c) = (rows - w + 1, cols - w + 1);
    // along rows (within each column)
    let mut tmp = vec![0.0; out_r * cols];
    for j in 0..cols {
        let col = &img[j * rows..(j + 1) * rows];
        for i in 0..out_r {
            tmp[j * out_r + i] = k.iter().zip(&col[i..i + w]).map(|(a, b)| a * b).sum();
        }
    }
    // along columns
    let mut out = vec![0.0; out_r * out_c];
    for j in 0..out_c {
        for i in 0..out_r {
            out[j * out_r + i] = k
                .iter()
                .enumerate()
                .map(|(t, &kv)| kv * tmp[(j + t) * out_r + i])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all `11 × 11` Gaussian windows (σ = 1.5) that fit inside
/// the band.
pub fn ssim<T: Scalar>(reference: &Matrix<T>, estimate: &Matrix<T>, peak: f64) -> Result<f64> {
    check_shapes(reference, estimate)?;
    let (rows, cols) = reference.shape();
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(invalid(format!(
            "ssim needs bands of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {rows}x{cols}"
        )));
    }
    if !(peak > 0.0) {
        return Err(invalid(format!("peak must be positive, got {peak}")));
    }
    let x = widen(reference.as_slice());
    let y = widen(estimate.as_slice());
    let k = gaussian_kernel();
    let c1 = (SSIM_K1 * peak).powi(2);
    let c2 = (SSIM_K2 * peak).powi(2);

    let prod = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).collect::<Vec<_>>();
    let mu_x = filter_valid(&x, rows, cols, &k);
    let mu_y = filter_valid(&y, rows, cols, &k);
    let xx = filter_valid(&prod(&x, &x), rows, cols, &k);
    let yy = filter_valid(&prod(&y, &y), rows, cols, &k);
    let xy = filter_valid(&prod(&x, &y), rows, cols, &k);

    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let sx = xx[i] - mx * mx;
            let sy = yy[i] - my * my;
            let sxy = xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sx + sy + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}

/// `100·sqrt((1/B)·Σ_b (RMSE_b / mean_b)²)` over the bands along
/// `band_mode`, with `mean_b` taken from the reference.
pub fn ergas<T: Scalar>(
    reference: &DenseTensor<T>,
    estimate: &DenseTensor<T>,
    band_mode: usize,
) -> Result<f64> {
    if reference.dims() != estimate.dims() {
        return Err(mismatch(reference.dims(), estimate.dims()));
    }
    let bands = band_count(reference, band_mode)?;
    let mut acc = 0.0;
    for b in 1..=bands {
        let r = widen(reference.slice(band_mode, b)?.as_slice());
        let e = widen(estimate.slice(band_mode, b)?.as_slice());
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        if mean == 0.0 {
            return Err(invalid(format!("band {b} of the reference has zero mean")));
        }
        acc += mse_of(&r, &e) / (mean * mean);
    }
    Ok(100.0 * (acc / bands as f64).sqrt())
}

fn band_count<T: Scalar>(t: &DenseTensor<T>, band_mode: usize) -> Result<usize> {
    if band_mode == 0 || band_mode > t.order() {
        return Err(invalid(format!(
            "band mode {band_mode} outside 1..={}",
            t.order()
        )));
    }
    Ok(t.dims()[band_mode - 1])
}

/// Mean PSNR and SSIM over the bands along `band_mode` plus ERGAS, with
/// peak 1. Each band is the slab with `band_mode` fixed, laid out as
/// [`DenseTensor::slice`] does. ERGAS is `NaN` if a reference band has zero
/// mean.
pub fn evaluate<T: Scalar>(
    reference: &DenseTensor<T>,
    estimate: &DenseTensor<T>,
    band_mode: usize,
) -> Result<QualityRecord> {
    if reference.dims() != estimate.dims() {
        return Err(mismatch(reference.dims(), estimate.dims()));
    }
    let bands = band_count(reference, band_mode)?;
    let mut psnr_sum = 0.0;
    let mut ssim_sum = Some(0.0);
    for b in 1..=bands {
        let r = reference.slice(band_mode, b)?;
        let e = estimate.slice(band_mode, b)?;
        psnr_sum += psnr(&r, &e, 1.0)?;
        ssim_sum = match (ssim_sum, ssim(&r, &e, 1.0)) {
            (Some(acc), Ok(v)) => Some(acc + v),
            _ => None,
        };
    }
    let ergas = match ergas(reference, estimate, band_mode) {
        Ok(v) => v,
        Err(crate::error::Error::InvalidArgument(_)) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(QualityRecord {
        mpsnr: psnr_sum / bands as f64,
        mssim: ssim_sum.map(|s| s / bands as f64),
        ergas,
        wall_time: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(rows: usize, cols: usize) -> Matrix<f64> {
        Matrix::from_fn(rows, cols, |i, j| {
            0.5 + 0.4 * ((i as f64) * 0.37).sin() * ((j as f64) * 0.23).cos()
        })
    }

    #[test]
    fn psnr_cases() {
        let a = fixture(8, 8);
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), PSNR_CAP);
        let z = Matrix::<f64>::zeros(4, 4);
        let c = z.map(|_| 0.1);
        assert!((psnr(&z, &c, 1.0).unwrap() - 20.0).abs() < 1e-12);
        let half = z.map(|_| 0.05);
        let gain = psnr(&z, &half, 1.0).unwrap() - psnr(&z, &c, 1.0).unwrap();
        assert!((gain - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!(psnr(&z, &Matrix::zeros(4, 5), 1.0).is_err());
    }

    #[test]
    fn ssim_identity_and_errors() {
        let a = fixture(16, 20);
        assert!((ssim(&a, &a, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(ssim(&fixture(10, 20), &fixture(10, 20), 1.0).is_err());
    }

    #[test]
    fn ergas_cases() {
        let r = DenseTensor::from_fn(&[3, 3, 2], |i| 1.0 + (i[0] + i[1] * i[2]) as f64).unwrap();
        assert_eq!(ergas(&r, &r, 3).unwrap(), 0.0);
        // one band with mean 2 and uniform error 2: RMSE = mean → 100
        let one = DenseTensor::filled(&[2, 2, 1], 2.0).unwrap();
        let off = DenseTensor::filled(&[2, 2, 1], 4.0).unwrap();
        assert!((ergas(&one, &off, 3).unwrap() - 100.0).abs() < 1e-12);
        let e = r.map(|v| v * 1.1 + 0.05);
        let base = ergas(&r, &e, 3).unwrap();
        let scaled = ergas(&r.map(|v| 3.0 * v), &e.map(|v| 3.0 * v), 3).unwrap();
        assert!((base - scaled).abs() < 1e-12);
        let zero = DenseTensor::<f64>::zeros(&[2, 2, 1]).unwrap();
        assert!(ergas(&zero, &one, 3).is_err());
        assert!(ergas(&r, &r, 4).is_err());
    }

    #[test]
    fn evaluate_identical() {
        let t =
            DenseTensor::from_fn(&[12, 12, 2], |i| 0.1 * i[0] as f64 + 0.05 * i[2] as f64).unwrap();
        let q = evaluate(&t, &t, 3).unwrap();
        assert_eq!(q.mpsnr, PSNR_CAP);
        assert!((q.mssim.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(q.ergas, 0.0);
        let small = DenseTensor::filled(&[4, 4, 2], 0.5).unwrap();
        assert!(evaluate(&small, &small, 3).unwrap().mssim.is_none());
    }
}
