//! Seeded uniform sampling masks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tenfill_core::Mask;

use crate::error::{CliError, Result};

/// How observed entries are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum MaskMode {
    /// Every entry independently of its band.
    #[default]
    Element,
    /// Whole fibres along the band mode: a pixel is seen in all bands or none.
    Pixel,
}

fn check_rate(sr: f64) -> Result<()> {
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(CliError::Argument(format!(
            "sampling rate must be in (0, 1], got {sr}"
        )));
    }
    Ok(())
}

/// `round(sr·n)` of `0..n`, chosen by a Fisher–Yates shuffle driven by
/// ChaCha8 seeded with `seed`.
fn choose(n: usize, sr: f64, seed: u64) -> Vec<bool> {
    let k = ((sr * n as f64).round() as usize).min(n);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (picked, _) = idx.partial_shuffle(&mut rng, k);
    let mut hit = vec![false; n];
    for &i in picked.iter() {
        hit[i] = true;
    }
    hit
}

/// Exactly `round(sr·Π dims)` observed entries, deterministic in
/// `(dims, sr, seed)`.
pub fn generate_mask(dims: &[usize], sr: f64, seed: u64) -> Result<Mask> {
    check_rate(sr)?;
    let n: usize = dims.iter().product();
    Ok(Mask::new(dims.to_vec(), choose(n, sr, seed))?)
}

/// Pixel-joint variant: `round(sr·P)` of the `P = Π dims / I_band` pixel
/// positions are drawn and observed in every band.
pub fn generate_pixel_mask(dims: &[usize], sr: f64, seed: u64, band_mode: usize) -> Result<Mask> {
    check_rate(sr)?;
    if band_mode == 0 || band_mode > dims.len() {
        return Err(CliError::Argument(format!(
            "band mode {band_mode} outside 1..={}",
            dims.len()
        )));
    }
    let bands = dims[band_mode - 1];
    let left: usize = dims[..band_mode - 1].iter().product();
    let right: usize = dims[band_mode..].iter().product();
    let pixels = choose(left * right, sr, seed);
    let mut data = vec![false; left * bands * right];
    for r in 0..right {
        for b in 0..bands {
            for l in 0..left {
                data[l + left * (b + bands * r)] = pixels[l + left * r];
            }
        }
    }
    Ok(Mask::new(dims.to_vec(), data)?)
}

pub fn mask_for(
    dims: &[usize],
    sr: f64,
    seed: u64,
    mode: MaskMode,
    band_mode: usize,
) -> Result<Mask> {
    match mode {
        MaskMode::Element => generate_mask(dims, sr, seed),
        MaskMode::Pixel => generate_pixel_mask(dims, sr, seed, band_mode),
    }
}
