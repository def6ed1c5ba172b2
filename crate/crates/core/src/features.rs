//! Handcrafted stand-ins for the motion and texture feature branches.

use rayon::prelude::*;

use crate::config::TmpConfig;
use crate::grid::{FeatureMap, Plane};
use crate::error::Result;
use crate::scalar::Scalar;

/// Channel count of [`extract_motion_features`].
pub const MOTION_CHANNELS: usize = 8;

/// 8-channel motion descriptor per pixel, with `r = cfg.patch_radius` and
/// clamp-to-edge borders:
///
/// | ch | value |
/// |----|-------|
/// | 0 | `I(x, y)` |
/// | 1 | `I(x+r, y) - I(x, y)` |
/// | 2 | `I(x-r, y) - I(x, y)` |
/// | 3 | `I(x, y+r) - I(x, y)` |
/// | 4 | `I(x, y-r) - I(x, y)` |
/// | 5 | mean of `I` over the `(2r+1)²` patch |
/// | 6 | `I(x+r, y+r) - I(x, y)` |
/// | 7 | `I(x-r, y+r) - I(x, y)` |
pub fn extract_motion_features<T: Scalar>(frame: &Plane<T>, cfg: &TmpConfig) -> Result<FeatureMap<T>> {
    let (w, h) = frame.dims();
    let r = cfg.patch_radius as isize;
    let area = T::of(((2 * r + 1) * (2 * r + 1)) as f64);
    let mut out = FeatureMap::zeros(w, h, MOTION_CHANNELS);
    out.values_mut()
        .par_chunks_mut(w * MOTION_CHANNELS)
        .enumerate()
        .for_each(|(y, row)| {
            let y = y as isize;
            for (x, px) in row.chunks_exact_mut(MOTION_CHANNELS).enumerate() {
                let x = x as isize;
                let at = |dx: isize, dy: isize| frame.get_clamped(x + dx, y + dy);
                let c = at(0, 0);
                let mut sum = T::zero();
                for dy in -r..=r {
                    for dx in -r..=r {
                        sum = sum + at(dx, dy);
                    }
                }
                px[0] = c;
                px[1] = at(r, 0) - c;
                px[2] = at(-r, 0) - c;
                px[3] = at(0, r) - c;
                px[4] = at(0, -r) - c;
                px[5] = sum / area;
                px[6] = at(r, r) - c;
                px[7] = at(-r, r) - c;
            }
        });
    Ok(out)
}

/// Texture features: the luma plane itself as a single channel.
pub fn extract_texture_features<T: Scalar>(frame: &Plane<T>, _cfg: &TmpConfig) -> Result<FeatureMap<T>> {
    Ok(FeatureMap::from_plane(frame))
}

/// Bilinear sample of every channel at `(x, y)`, clamp-to-edge outside the grid.
pub fn sample_bilinear<T: Scalar>(fm: &FeatureMap<T>, x: T, y: T) -> Vec<T> {
    let mut out = vec![T::zero(); fm.channels()];
    sample_bilinear_into(fm, x, y, &mut out);
    out
}

/// Allocation-free form of [`sample_bilinear`]; `out.len()` must equal the channel count.
#[inline]
pub fn sample_bilinear_into<T: Scalar>(fm: &FeatureMap<T>, x: T, y: T, out: &mut [T]) {
    let (w, h) = fm.dims();
    let xc = x.max(T::zero()).min(T::of((w - 1) as f64));
    let yc = y.max(T::zero()).min(T::of((h - 1) as f64));
    let x0f = xc.floor();
    let y0f = yc.floor();
    let fx = xc - x0f;
    let fy = yc - y0f;
    let x0 = x0f.to_usize().unwrap_or(0);
    let y0 = y0f.to_usize().unwrap_or(0);
    if fx == T::zero() && fy == T::zero() {
        out.copy_from_slice(fm.pixel(x0, y0));
        return;
    }
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let (p00, p10, p01, p11) = (fm.pixel(x0, y0), fm.pixel(x1, y0), fm.pixel(x0, y1), fm.pixel(x1, y1));
    let one = T::one();
    let w00 = (one - fx) * (one - fy);
    let w10 = fx * (one - fy);
    let w01 = (one - fx) * fy;
    let w11 = fx * fy;
    for c in 0..out.len() {
        out[c] = p00[c] * w00 + p10[c] * w10 + p01[c] * w01 + p11[c] * w11;
    }
}

/// Bilinear clamp-to-edge sample of a plane.
#[inline]
pub fn sample_plane_bilinear<T: Scalar>(plane: &Plane<T>, x: T, y: T) -> T {
    let (w, h) = plane.dims();
    let xc = x.max(T::zero()).min(T::of((w - 1) as f64));
    let yc = y.max(T::zero()).min(T::of((h - 1) as f64));
    let x0f = xc.floor();
    let y0f = yc.floor();
    let fx = xc - x0f;
    let fy = yc - y0f;
    let x0 = x0f.to_usize().unwrap_or(0);
    let y0 = y0f.to_usize().unwrap_or(0);
    if fx == T::zero() && fy == T::zero() {
        return plane.get(x0, y0);
    }
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let one = T::one();
    plane.get(x0, y0) * (one - fx) * (one - fy)
        + plane.get(x1, y0) * fx * (one - fy)
        + plane.get(x0, y1) * (one - fx) * fy
        + plane.get(x1, y1) * fx * fy
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> TmpConfig {
        TmpConfig::default()
    }

    #[test]
    fn constant_frame_has_zero_gradients() {
        let frame = Plane::filled(5, 4, 0.3f64);
        let fm = extract_motion_features(&frame, &cfg()).unwrap();
        assert_eq!(fm.channels(), 8);
        for y in 0..4 {
            for x in 0..5 {
                let px = fm.pixel(x, y);
                for c in [1, 2, 3, 4, 6, 7] {
                    assert_eq!(px[c], 0.0);
                }
                assert!((px[5] - 0.3).abs() < 1e-15);
                assert_eq!(px[0], 0.3);
            }
        }
    }

    #[test]
    fn hand_evaluated_center_descriptor() {
        // 0 1 2
        // 3 4 5
        // 6 7 8
        let frame = Plane::from_fn(3, 3, |x, y| (y * 3 + x) as f64);
        let fm = extract_motion_features(&frame, &cfg()).unwrap();
        // center 4; +x 5-4; -x 3-4; +y 7-4; -y 1-4; mean 36/9; diag 8-4; anti-diag 6-4
        assert_eq!(fm.pixel(1, 1), &[4.0, 1.0, -1.0, 3.0, -3.0, 4.0, 4.0, 2.0]);
    }

    #[test]
    fn corner_descriptor_uses_clamp_to_edge() {
        let frame = Plane::from_fn(3, 3, |x, y| (y * 3 + x) as f64);
        let fm = extract_motion_features(&frame, &cfg()).unwrap();
        // patch at (0,0) with replicated border: rows [0,0,1],[0,0,1],[3,3,4]
        let mean = (0.0 + 0.0 + 1.0 + 0.0 + 0.0 + 1.0 + 3.0 + 3.0 + 4.0) / 9.0;
        assert_eq!(fm.pixel(0, 0), &[0.0, 1.0, 0.0, 3.0, 0.0, mean, 4.0, 3.0]);
    }

    #[test]
    fn texture_features_are_identity() {
        let frame = Plane::new(2, 2, vec![0.0f64, 1.0, 1.0, 0.0]).unwrap();
        let fm = extract_texture_features(&frame, &cfg()).unwrap();
        assert_eq!(fm.channels(), 1);
        assert_eq!(fm.values(), frame.data());
        let flat = Plane::filled(3, 3, 0.5f64);
        assert!(extract_texture_features(&flat, &cfg())
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.5));
    }

    #[test]
    fn bilinear_basics() {
        let fm = FeatureMap::new(2, 1, 1, vec![0.0f64, 1.0]).unwrap();
        assert_eq!(sample_bilinear(&fm, 0.5, 0.0), vec![0.5]);
        assert_eq!(sample_bilinear(&fm, 1.0, 0.0), vec![1.0]);
        assert_eq!(sample_bilinear(&fm, -5.0, -5.0), vec![0.0]);
        assert_eq!(sample_bilinear(&fm, 9.0, 3.0), vec![1.0]);
    }

    proptest! {
        #[test]
        fn bilinear_reproduces_grid(vals in proptest::collection::vec(-10.0f64..10.0, 4 * 3 * 2), x in 0usize..4, y in 0usize..3) {
            let fm = FeatureMap::new(4, 3, 2, vals).unwrap();
            prop_assert_eq!(sample_bilinear(&fm, x as f64, y as f64), fm.pixel(x, y).to_vec());
        }

        #[test]
        fn descriptors_translation_equivariant(seed in 0u64..1000, u in 0usize..4, v in 0usize..4) {
            let big = Plane::from_fn(24, 24, |x, y| {
                let h = (x as u64 * 73856093) ^ (y as u64 * 19349663) ^ seed.wrapping_mul(83492791);
                (h % 251) as f64 / 250.0
            });
            let a = Plane::from_fn(16, 16, |x, y| big.get(x + 4, y + 4));
            let b = Plane::from_fn(16, 16, |x, y| big.get(x + 4 - u, y + 4 - v));
            let fa = extract_motion_features(&a, &TmpConfig::default()).unwrap();
            let fb = extract_motion_features(&b, &TmpConfig::default()).unwrap();
            for y in 1..15 - v {
                for x in 1..15 - u {
                    prop_assert_eq!(fa.pixel(x, y), fb.pixel(x + u, y + v));
                }
            }
        }
    }
}
