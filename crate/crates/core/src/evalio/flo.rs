//! Middlebury `.flo`: magic `202021.25f32`, width and height as `i32`, then
//! row-major interleaved `(dx, dy)` as `f32`, all little-endian.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{MotionField, Offset};
use crate::scalar::Scalar;

pub const FLO_MAGIC: f32 = 202021.25;

pub fn encode_flo<T: Scalar>(field: &MotionField<T>) -> Result<Vec<u8>> {
    let (w, h) = field.dims();
    let mut out = Vec::with_capacity(12 + 8 * w * h);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(w as i32).to_le_bytes());
    out.extend_from_slice(&(h as i32).to_le_bytes());
    for (i, o) in field.offsets().iter().enumerate() {
        let (dx, dy) = (o.dx.as_f64() as f32, o.dy.as_f64() as f32);
        if !dx.is_finite() || !dy.is_finite() {
            return Err(Error::NonFinite { x: i % w, y: i / w });
        }
        out.extend_from_slice(&dx.to_le_bytes());
        out.extend_from_slice(&dy.to_le_bytes());
    }
    Ok(out)
}

/// Parses `.flo` bytes; `path` only labels errors.
pub fn decode_flo<T: Scalar>(bytes: &[u8], path: &Path) -> Result<MotionField<T>> {
    let word = |i: usize| -> [u8; 4] { bytes[i..i + 4].try_into().expect("4-byte slice") };
    if bytes.len() < 12 {
        if bytes.len() >= 4 && f32::from_le_bytes(word(0)) != FLO_MAGIC {
            return Err(Error::BadMagic {
                path: path.to_path_buf(),
                magic: f32::from_le_bytes(word(0)),
            });
        }
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: 12,
            found: bytes.len(),
        });
    }
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            magic,
        });
    }
    let w = i32::from_le_bytes(word(4));
    let h = i32::from_le_bytes(word(8));
    if w <= 0 || h <= 0 {
        return Err(Error::Config(format!("{}: invalid flow size {w}x{h}", path.display())));
    }
    let (w, h) = (w as usize, h as usize);
    let expected = 12 + 8 * w * h;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found: bytes.len(),
        });
    }
    let offsets = (0..w * h)
        .map(|i| {
            let at = 12 + 8 * i;
            let dx = f32::from_le_bytes(word(at));
            let dy = f32::from_le_bytes(word(at + 4));
            Offset::new(T::of(dx as f64), T::of(dy as f64))
        })
        .collect();
    MotionField::new(w, h, offsets)
}

pub fn write_flo<T: Scalar>(field: &MotionField<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_flo(field)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_flo<T: Scalar>(path: impl AsRef<Path>) -> Result<MotionField<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_flo(&bytes, path)
}
