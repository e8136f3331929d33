//! DTEN1: a minimal little-endian container for dense tensors and masks.
//!
//! ```text
//! "DTEN1"          5 bytes magic
//! version          u8 (= 1)
//! element type     u8 (1 = f64, 2 = u8 mask of 0/1)
//! ndim             u8
//! dims             ndim × u64
//! payload          first-index-fastest, f64 or u8 per element
//! ```

use std::fs;
use std::path::Path;

use tenfill_core::{Mask, Tensor};

use crate::error::{CliError, FormatError, Result};

pub const MAGIC: &[u8; 5] = b"DTEN1";
pub const VERSION: u8 = 1;
const TAG_F64: u8 = 1;
const TAG_MASK: u8 = 2;

/// Decoded contents of a DTEN1 file.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorFile {
    Values(Tensor),
    Mask(Mask),
}

impl TensorFile {
    fn kind(&self) -> &'static str {
        match self {
            TensorFile::Values(_) => "f64 tensor",
            TensorFile::Mask(_) => "mask",
        }
    }
}

fn header(tag: u8, dims: &[usize]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * dims.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(tag);
    out.push(dims.len() as u8);
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out
}

pub fn encode_tensor(t: &Tensor) -> Vec<u8> {
    let mut out = header(TAG_F64, t.dims());
    out.reserve(8 * t.len());
    for v in t.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_mask(m: &Mask) -> Vec<u8> {
    let mut out = header(TAG_MASK, m.dims());
    out.extend(m.as_slice().iter().map(|&b| b as u8));
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(FormatError::Truncated {
                needed: self.pos.saturating_add(n),
                found: self.bytes.len(),
            }),
        }
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }
}

pub fn decode(bytes: &[u8]) -> Result<TensorFile, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(MAGIC.len()).map_err(|_| FormatError::BadMagic)?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let tag = r.u8()?;
    if tag != TAG_F64 && tag != TAG_MASK {
        return Err(FormatError::UnknownType(tag));
    }
    let ndim = r.u8()? as usize;
    if ndim == 0 {
        return Err(FormatError::Header("zero dimensions".into()));
    }
    let mut dims = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        let d = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        let d = usize::try_from(d)
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| FormatError::Header(format!("bad extent {d}")))?;
        dims.push(d);
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| FormatError::Header("element count overflows".into()))?;
    let width = if tag == TAG_F64 { 8 } else { 1 };
    let payload = r.take(
        count
            .checked_mul(width)
            .ok_or_else(|| FormatError::Header("payload size overflows".into()))?,
    )?;
    if r.pos != bytes.len() {
        return Err(FormatError::TrailingBytes(bytes.len() - r.pos));
    }
    let bad = |e: tenfill_core::Error| FormatError::Header(e.to_string());
    if tag == TAG_F64 {
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(TensorFile::Values(Tensor::new(dims, data).map_err(bad)?))
    } else {
        let data = payload
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(FormatError::Header(format!(
                    "mask byte {other} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TensorFile::Mask(Mask::new(dims, data).map_err(bad)?))
    }
}

pub fn load(path: impl AsRef<Path>) -> Result<TensorFile> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|e| CliError::format(path, e))
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    match load(path)? {
        TensorFile::Values(t) => Ok(t),
        other => Err(CliError::format(
            path,
            FormatError::WrongType {
                expected: "f64 tensor",
                found: other.kind(),
            },
        )),
    }
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    match load(path)? {
        TensorFile::Mask(m) => Ok(m),
        other => Err(CliError::format(
            path,
            FormatError::WrongType {
                expected: "mask",
                found: other.kind(),
            },
        )),
    }
}

pub fn save_tensor(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_tensor(t)).map_err(|e| CliError::io(path, e))
}

pub fn save_mask(m: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_mask(m)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tensor {
        Tensor::from_fn(&[3, 4, 5], |i| {
            (i[0] as f64).sqrt() - 0.1 * (i[1] * i[2]) as f64
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let t = sample();
        let back = match decode(&encode_tensor(&t)).unwrap() {
            TensorFile::Values(b) => b,
            _ => panic!("wrong kind"),
        };
        assert_eq!(back.dims(), t.dims());
        let bits = |x: &Tensor| x.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&t));

        let m = Mask::new(vec![2, 3], vec![true, false, false, true, true, false]).unwrap();
        assert_eq!(decode(&encode_mask(&m)).unwrap(), TensorFile::Mask(m));
    }

    #[test]
    fn header_layout() {
        let bytes = encode_tensor(&sample());
        assert_eq!(&bytes[..5], b"DTEN1");
        assert_eq!(bytes[5..8], [1, 1, 3]);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 8 + 3 * 8 + 60 * 8);
    }

    #[test]
    fn corrupt_files_are_rejected_distinctly() {
        let good = encode_tensor(&sample());
        let cut = &good[..good.len() - 3];
        assert!(matches!(decode(cut), Err(FormatError::Truncated { .. })));
        assert!(matches!(decode(&good[..4]), Err(FormatError::BadMagic)));
        let mut magic = good.clone();
        magic[0] = b'X';
        assert!(matches!(decode(&magic), Err(FormatError::BadMagic)));
        let mut version = good.clone();
        version[5] = 9;
        assert!(matches!(
            decode(&version),
            Err(FormatError::UnsupportedVersion(9))
        ));
        let mut tag = good.clone();
        tag[6] = 7;
        assert!(matches!(decode(&tag), Err(FormatError::UnknownType(7))));
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(decode(&long), Err(FormatError::TrailingBytes(1))));
        let mut mask = encode_mask(&Mask::full(&[2, 2]).unwrap());
        *mask.last_mut().unwrap() = 5;
        assert!(matches!(decode(&mask), Err(FormatError::Header(_))));
    }
}
