//! Reference aligners: exhaustive integer search and per-frame random-init
//! refinement without temporal inheritance.

use rayon::prelude::*;

use crate::config::TmpConfig;
use crate::error::Result;
use crate::field::{MotionField, Offset};
use crate::grid::{DistanceMap, FeatureMap, Mask, Plane};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::tmp::finetune::distance_with;
use crate::tmp::{random_refine, AlignOutput};

#[derive(Clone, Debug)]
pub struct SearchOutput<T> {
    pub field: MotionField<T>,
    pub distance: DistanceMap<T>,
    /// Smallest distance among all other offsets in the window.
    pub runner_up: DistanceMap<T>,
    pub evaluations: u64,
}

impl<T: Scalar> SearchOutput<T> {
    /// Pixels whose minimizer is unique within the search window.
    pub fn unique_minimizer(&self) -> Mask {
        let (w, h) = self.distance.dims();
        Mask::from_fn(w, h, |x, y| self.distance.get(x, y) < self.runner_up.get(x, y))
    }
}

/// Every integer offset in `[-radius, radius]²` evaluated at every pixel.
///
/// Ties go to the smaller offset magnitude, then to raster order of the
/// window (`dy` outer, `dx` inner, both ascending).
pub fn full_search<T: Scalar>(
    h_prev: &FeatureMap<T>,
    h_cur: &FeatureMap<T>,
    radius: usize,
    cfg: &TmpConfig,
) -> Result<SearchOutput<T>> {
    h_prev.check_same_shape(h_cur)?;
    let (w, h) = h_cur.dims();
    let r = radius as i64;
    let mode = cfg.distance_mode;
    let channels = h_cur.channels();
    let window = (2 * radius + 1) * (2 * radius + 1);

    let per_pixel: Vec<(Offset<T>, T, T)> = (0..w * h)
        .into_par_iter()
        .map_init(
            || vec![T::zero(); channels],
            |scratch, i| {
                let (x, y) = (i % w, i / w);
                let mut best: Option<(Offset<T>, T, i64)> = None;
                let mut runner_up = T::infinity();
                for dy in -r..=r {
                    for dx in -r..=r {
                        let o = Offset::new(T::of(dx as f64), T::of(dy as f64));
                        let d = distance_with(h_prev, h_cur, x, y, o, mode, scratch);
                        let mag = dx * dx + dy * dy;
                        match best {
                            Some((_, bd, bm)) if !(d < bd || (d == bd && mag < bm)) => {
                                runner_up = runner_up.min(d);
                            }
                            Some((_, bd, _)) => {
                                runner_up = runner_up.min(bd);
                                best = Some((o, d, mag));
                            }
                            None => best = Some((o, d, mag)),
                        }
                    }
                }
                let (o, d, _) = best.expect("window is never empty");
                (o, d, runner_up)
            },
        )
        .collect();

    Ok(SearchOutput {
        field: MotionField::new(w, h, per_pixel.iter().map(|p| p.0).collect())?,
        distance: DistanceMap::from_plane(Plane::new(w, h, per_pixel.iter().map(|p| p.1).collect())?),
        runner_up: DistanceMap::from_plane(Plane::new(w, h, per_pixel.iter().map(|p| p.2).collect())?),
        evaluations: (w * h * window) as u64,
    })
}

/// Random-init refinement with `cfg.sweeps` sweeps and no inheritance.
pub fn scratch_align<T: Scalar>(
    h_prev: &FeatureMap<T>,
    h_cur: &FeatureMap<T>,
    cfg: &TmpConfig,
    rng: &RngStream,
    frame_index: u64,
) -> Result<AlignOutput<T>> {
    random_refine(h_prev, h_cur, cfg, rng, frame_index)
}
