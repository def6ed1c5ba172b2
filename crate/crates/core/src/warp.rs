//! Backward warping and the two fusion weightings.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::sample_bilinear_into;
use crate::field::MotionField;
use crate::grid::{ConfidenceMap, FeatureMap, Plane};
use crate::scalar::Scalar;

/// `out(x, y) = src(x + dx, y + dy)`, bilinear with clamp-to-edge.
pub fn backward_warp<T: Scalar>(src: &FeatureMap<T>, field: &MotionField<T>) -> Result<FeatureMap<T>> {
    field.check_dims(src.dims())?;
    let (w, h) = src.dims();
    let c = src.channels();
    let mut out = FeatureMap::zeros(w, h, c);
    out.values_mut()
        .par_chunks_mut(w * c)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, px) in row.chunks_exact_mut(c).enumerate() {
                let (sx, sy) = field.source_of(x, y);
                sample_bilinear_into(src, sx, sy, px);
            }
        });
    Ok(out)
}

/// Luma convenience wrapper around [`backward_warp`].
pub fn backward_warp_plane<T: Scalar>(src: &Plane<T>, field: &MotionField<T>) -> Result<Plane<T>> {
    let warped = backward_warp(&FeatureMap::from_plane(src), field)?;
    Ok(warped.channel(0))
}

/// Motion-confidence weighting: every channel scaled by the pixel's confidence.
pub fn mcwf_weight<T: Scalar>(warped: &FeatureMap<T>, conf: &ConfidenceMap<T>) -> Result<FeatureMap<T>> {
    if warped.dims() != conf.dims() {
        return Err(Error::dims(warped.dims(), conf.dims()));
    }
    scale_pixels(warped, conf.values())
}

/// Similarity weight `exp(-‖warped - ref‖² / channels)` per pixel.
pub fn srf_weights<T: Scalar>(warped: &FeatureMap<T>, reference: &FeatureMap<T>) -> Result<Plane<T>> {
    warped.check_same_shape(reference)?;
    let c = T::of(warped.channels() as f64);
    let data = warped
        .values()
        .par_chunks(warped.channels())
        .zip(reference.values().par_chunks(reference.channels()))
        .map(|(a, b)| {
            let r = a.iter().zip(b).fold(T::zero(), |acc, (&p, &q)| acc + (p - q) * (p - q));
            (-(r / c)).exp()
        })
        .collect();
    Plane::new(warped.width(), warped.height(), data)
}

/// Similarity-reweighting baseline: warped features scaled by [`srf_weights`].
pub fn srf_weight<T: Scalar>(warped: &FeatureMap<T>, reference: &FeatureMap<T>) -> Result<FeatureMap<T>> {
    let weights = srf_weights(warped, reference)?;
    scale_pixels(warped, weights.data())
}

fn scale_pixels<T: Scalar>(fm: &FeatureMap<T>, weights: &[T]) -> Result<FeatureMap<T>> {
    let mut out = fm.clone();
    let c = fm.channels();
    out.values_mut()
        .par_chunks_mut(c)
        .zip(weights.par_iter())
        .for_each(|(px, &wt)| px.iter_mut().for_each(|v| *v = *v * wt));
    Ok(out)
}

/// Channel concatenation, `weighted_prev` channels first.
pub fn fuse_concat<T: Scalar>(weighted_prev: &FeatureMap<T>, cur: &FeatureMap<T>) -> Result<FeatureMap<T>> {
    if weighted_prev.dims() != cur.dims() {
        return Err(Error::dims(weighted_prev.dims(), cur.dims()));
    }
    let (a, b) = (weighted_prev.channels(), cur.channels());
    if a == 0 || b == 0 {
        return Err(Error::Empty("feature channels"));
    }
    let values = weighted_prev
        .values()
        .chunks_exact(a)
        .zip(cur.values().chunks_exact(b))
        .flat_map(|(p, q)| p.iter().chain(q).copied())
        .collect();
    FeatureMap::new(cur.width(), cur.height(), a + b, values)
}
