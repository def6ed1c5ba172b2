//! Candidate generation: object-motion scatter, camera-motion reuse, and
//! Jacobi-style neighbor diffusion.

use rayon::prelude::*;

use super::candidates::{push_dedup, Candidate, CandidateBuffer, PushOutcome, Provenance};
use crate::config::TmpConfig;
use crate::error::Result;
use crate::field::{MotionField, Offset};
use crate::rng::{RngPath, RngStream};
use crate::scalar::Scalar;

#[inline]
#[allow(clippy::too_many_arguments)]
fn jittered<T: Scalar>(
    base: Offset<T>,
    sigma: f64,
    limit: T,
    rng: &RngStream,
    frame: u64,
    pixel: u64,
    path: RngPath,
    i: usize,
) -> Offset<T> {
    let (zx, zy) = rng.normal_pair(frame, pixel, path, i as u64);
    Offset::new(base.dx + T::of(sigma * zx), base.dy + T::of(sigma * zy)).clamp(limit)
}

/// Object-motion path: every source pixel's offset, plus `k` Gaussian
/// variants, is deposited at the pixel it extrapolates to,
/// `(round(x - dx'), round(y - dy'))`. Targets outside the frame are dropped;
/// deposits happen in raster order of the source pixel.
pub fn propagate_obj<T: Scalar>(
    prev: &MotionField<T>,
    target: (usize, usize),
    cfg: &TmpConfig,
    rng: &RngStream,
    frame_index: u64,
) -> Result<CandidateBuffer<T>> {
    prev.check_dims(target)?;
    let (w, h) = target;
    let limit = T::of(cfg.max_offset_for(w, h));
    let k = cfg.k;

    // Sample in parallel, deposit sequentially so saturation is first-come in scan order.
    let per_source: Vec<Offset<T>> = (0..w * h)
        .into_par_iter()
        .flat_map_iter(|i| {
            let base = prev.offsets()[i].clamp(limit);
            std::iter::once(base).chain(
                (0..k).map(move |j| jittered(base, cfg.sigma, limit, rng, frame_index, i as u64, RngPath::Obj, j)),
            )
        })
        .collect();

    let mut buf = CandidateBuffer::new(w, h, cfg.capacity);
    for (i, chunk) in per_source.chunks_exact(k + 1).enumerate() {
        let (x, y) = ((i % w) as f64, (i / w) as f64);
        for &o in chunk {
            let tx = (x - o.dx.as_f64()).round();
            let ty = (y - o.dy.as_f64()).round();
            if tx < 0.0 || ty < 0.0 || tx >= w as f64 || ty >= h as f64 {
                continue;
            }
            buf.push(tx as usize, ty as usize, Candidate::new(o, Provenance::Obj));
        }
    }
    Ok(buf)
}

/// Camera-motion path: each pixel keeps its previous offset in place plus `k`
/// Gaussian variants of it. Every pixel receives candidates.
pub fn propagate_cam<T: Scalar>(
    prev: &MotionField<T>,
    target: (usize, usize),
    cfg: &TmpConfig,
    rng: &RngStream,
    frame_index: u64,
) -> Result<CandidateBuffer<T>> {
    prev.check_dims(target)?;
    let (w, h) = target;
    let limit = T::of(cfg.max_offset_for(w, h));
    let mut buf = CandidateBuffer::new(w, h, cfg.capacity);
    let dropped: u64 = buf
        .par_pixels_mut()
        .map(|(i, (slots, len))| {
            let base = prev.offsets()[i].clamp(limit);
            let mut full = 0;
            let inherited = std::iter::once(Candidate::new(base, Provenance::Inherited));
            let jitter = (0..cfg.k).map(|j| {
                let o = jittered(base, cfg.sigma, limit, rng, frame_index, i as u64, RngPath::Cam, j);
                Candidate::new(o, Provenance::Cam)
            });
            for c in inherited.chain(jitter) {
                if push_dedup(slots, len, c) == PushOutcome::Full {
                    full += 1;
                }
            }
            full
        })
        .sum();
    buf.add_dropped(dropped);
    Ok(buf)
}

/// Neighbor offsets of pixel `(x, y)` within `radius`, in raster order, skipping the center.
#[inline]
pub(crate) fn neighbors(
    x: usize,
    y: usize,
    w: usize,
    h: usize,
    radius: usize,
) -> impl Iterator<Item = usize> {
    let r = radius as isize;
    let (x, y) = (x as isize, y as isize);
    (-r..=r)
        .flat_map(move |dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| dx != 0 || dy != 0)
        .filter_map(move |(dx, dy)| {
            let (nx, ny) = (x + dx, y + dy);
            (nx >= 0 && ny >= 0 && nx < w as isize && ny < h as isize).then(|| ny as usize * w + nx as usize)
        })
}

/// Augments every pixel's candidates with the current best offsets of its
/// neighborhood. Reads only `current_best`, so pixels are independent.
pub fn diffuse_neighbors<T: Scalar>(
    buffers: &CandidateBuffer<T>,
    current_best: &MotionField<T>,
    cfg: &TmpConfig,
) -> Result<CandidateBuffer<T>> {
    current_best.check_dims(buffers.dims())?;
    let (w, h) = buffers.dims();
    let mut out = buffers.clone();
    let dropped: u64 = out
        .par_pixels_mut()
        .map(|(i, (slots, len))| {
            neighbors(i % w, i / w, w, h, cfg.neighbor_radius)
                .map(|n| Candidate::new(current_best.offsets()[n], Provenance::Neighbor))
                .filter(|&c| push_dedup(slots, len, c) == PushOutcome::Full)
                .count() as u64
        })
        .sum();
    out.add_dropped(dropped);
    Ok(out)
}
