//! 8-bit PGM export of tensor slices and band import for `convert`.

use std::fs;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};
use tenfill_core::{Mat, Tensor};

use crate::error::{CliError, FormatError, Result};

/// `[0,1] → 0..=255`: clamp, scale by 255, round half up. NaN maps to 0.
pub fn to_gray8(v: f64) -> u8 {
    let c = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (c * 255.0 + 0.5).floor() as u8
}

/// Binary (P5) PGM bytes for `m`, one image row per matrix row.
pub fn encode_pgm(m: &Mat) -> Result<Vec<u8>> {
    let (h, w) = m.shape();
    let mut pixels = Vec::with_capacity(h * w);
    for i in 0..h {
        pixels.extend(m.row(i).into_iter().map(to_gray8));
    }
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&pixels, w as u32, h as u32, ExtendedColorType::L8)
        .map_err(|e| CliError::Argument(format!("cannot encode {w}x{h} image: {e}")))?;
    Ok(out)
}

/// Writes band `band_index` (1-based) along `band_mode` as an 8-bit PGM.
pub fn export_slice_pgm(
    t: &Tensor,
    band_mode: usize,
    band_index: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let slice = t.slice(band_mode, band_index)?;
    fs::write(path, encode_pgm(&slice)?).map_err(|e| CliError::io(path, e))
}

/// Reads a grayscale PNM band, scaled to `[0,1]` by the sample range.
pub fn read_pgm_band(path: impl AsRef<Path>) -> Result<Mat> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Pnm)
        .map_err(|e| CliError::format(path, FormatError::Image(e.to_string())))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(g) => Ok(Mat::from_fn(h, w, |i, j| {
            g.get_pixel(j as u32, i as u32).0[0] as f64 / 255.0
        })),
        DynamicImage::ImageLuma16(g) => Ok(Mat::from_fn(h, w, |i, j| {
            g.get_pixel(j as u32, i as u32).0[0] as f64 / 65535.0
        })),
        _ => Err(CliError::format(
            path,
            FormatError::Image("not a grayscale image".into()),
        )),
    }
}

/// Sample type of a headerless band file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RawKind {
    F32,
    F64,
}

/// Reads `rows × cols` little-endian floats stored row by row.
pub fn read_raw_band(
    path: impl AsRef<Path>,
    kind: RawKind,
    rows: usize,
    cols: usize,
) -> Result<Mat> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let width = match kind {
        RawKind::F32 => 4,
        RawKind::F64 => 8,
    };
    let needed = rows * cols * width;
    if bytes.len() != needed {
        let err = if bytes.len() < needed {
            FormatError::Truncated {
                needed,
                found: bytes.len(),
            }
        } else {
            FormatError::TrailingBytes(bytes.len() - needed)
        };
        return Err(CliError::format(path, err));
    }
    let values: Vec<f64> = match kind {
        RawKind::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect(),
        RawKind::F64 => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect(),
    };
    Ok(Mat::from_row_major(rows, cols, &values)?)
}

/// Stacks equally sized bands into a `rows × cols × bands` tensor.
pub fn stack_bands(bands: &[Mat]) -> Result<Tensor> {
    let first = bands
        .first()
        .ok_or_else(|| CliError::Argument("no bands given".into()))?;
    let (rows, cols) = first.shape();
    if let Some(b) = bands.iter().find(|b| b.shape() != (rows, cols)) {
        return Err(CliError::Argument(format!(
            "band sizes differ: {rows}x{cols} vs {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    let mut data = Vec::with_capacity(rows * cols * bands.len());
    for b in bands {
        data.extend_from_slice(b.as_slice());
    }
    Ok(Tensor::new(vec![rows, cols, bands.len()], data)?)
}
