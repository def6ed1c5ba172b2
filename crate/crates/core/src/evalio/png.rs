//! 8-bit PNG boundaries: luma frames, masks, flow color wheel, confidence.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Luma, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::field::MotionField;
use crate::grid::{ConfidenceMap, Mask, Plane};
use crate::scalar::Scalar;

fn image_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Reads any PNG as luma in `[0, 1]`.
pub fn read_luma<T: Scalar>(path: impl AsRef<Path>) -> Result<Plane<T>> {
    let path = path.as_ref();
    let img = image::open(path).map_err(image_err(path))?.to_luma8();
    let (w, h) = img.dimensions();
    Plane::new(
        w as usize,
        h as usize,
        img.into_raw().into_iter().map(|v| T::of(v as f64 / 255.0)).collect(),
    )
}

pub fn write_luma<T: Scalar>(plane: &Plane<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = plane.dims();
    let img = GrayImage::from_raw(
        w as u32,
        h as u32,
        plane.data().iter().map(|v| to_u8(v.as_f64())).collect(),
    )
    .expect("buffer matches dimensions");
    img.save(path).map_err(image_err(path))
}

pub fn write_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = mask.dims();
    let img = GrayImage::from_raw(w as u32, h as u32, mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect())
        .expect("buffer matches dimensions");
    img.save(path).map_err(image_err(path))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let img = image::open(path).map_err(image_err(path))?.to_luma8();
    let (w, h) = img.dimensions();
    Mask::new(w as usize, h as usize, img.into_raw().into_iter().map(|v| v > 127).collect())
}

/// Color wheel of Baker et al.: 55 hues over six segments
/// (count, saturated channel, ramped channel, ramp rising).
fn color_wheel() -> Vec<[f64; 3]> {
    const SEGMENTS: [(usize, usize, usize, bool); 6] = [
        (15, 0, 1, true),  // red -> yellow
        (6, 1, 0, false),  // yellow -> green
        (4, 1, 2, true),   // green -> cyan
        (11, 2, 1, false), // cyan -> blue
        (13, 2, 0, true),  // blue -> magenta
        (6, 0, 2, false),  // magenta -> red
    ];
    let mut wheel = Vec::with_capacity(55);
    for &(n, full, ramp, rising) in &SEGMENTS {
        for i in 0..n {
            let t = i as f64 / n as f64;
            let mut c = [0.0; 3];
            c[full] = 1.0;
            c[ramp] = if rising { t } else { 1.0 - t };
            wheel.push(c);
        }
    }
    wheel
}

/// Flow as RGB with hue = direction and saturation = magnitude relative to the
/// largest magnitude in the field. Zero motion is white.
pub fn flow_to_rgb<T: Scalar>(field: &MotionField<T>) -> RgbImage {
    let wheel = color_wheel();
    let n = wheel.len() as f64;
    let max = field.max_magnitude().as_f64();
    let (w, h) = field.dims();
    ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
        let o = field.get(x as usize, y as usize);
        let (u, v) = (o.dx.as_f64(), o.dy.as_f64());
        if max == 0.0 {
            return Rgb([255, 255, 255]);
        }
        let rad = (u * u + v * v).sqrt() / max;
        let angle = (-v).atan2(-u) / std::f64::consts::PI;
        let fk = (angle + 1.0) / 2.0 * (n - 1.0);
        let k0 = fk.floor() as usize % wheel.len();
        let k1 = (k0 + 1) % wheel.len();
        let f = fk - fk.floor();
        let mut px = [0u8; 3];
        for c in 0..3 {
            let col = (1.0 - f) * wheel[k0][c] + f * wheel[k1][c];
            let col = if rad <= 1.0 { 1.0 - rad * (1.0 - col) } else { col * 0.75 };
            px[c] = to_u8(col);
        }
        Rgb(px)
    })
}

/// Confidence as grayscale, 0 black and 1 white.
pub fn confidence_to_gray<T: Scalar>(conf: &ConfidenceMap<T>) -> GrayImage {
    let (w, h) = conf.dims();
    ImageBuffer::from_fn(w as u32, h as u32, |x, y| Luma([to_u8(conf.get(x as usize, y as usize).as_f64())]))
}

pub fn visualize_flow<T: Scalar>(field: &MotionField<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    flow_to_rgb(field).save(path).map_err(image_err(path))
}

pub fn visualize_confidence<T: Scalar>(conf: &ConfidenceMap<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    confidence_to_gray(conf).save(path).map_err(image_err(path))
}
