//! Temporal motion propagation.
//!
//! The previous frame's motion field is turned into per-pixel candidate sets
//! through two paths: the object path extrapolates each offset to where the
//! pixel's content should land in the current frame, and the camera path
//! reuses each offset in place. Both add `k` Gaussian variants per pixel.
//! Candidates are then refined by a few Jacobi sweeps of neighbor diffusion
//! and argmin selection under the feature matching distance, and the final
//! per-pixel minimum distance is turned into a confidence map.

mod candidates;
pub(crate) mod finetune;
mod propagate;

pub use candidates::{Candidate, CandidateBuffer, Provenance};
pub use finetune::{confidence_from_distance, finetune, finetune_sparse, matching_distance, FinetuneOutput};
pub use propagate::{diffuse_neighbors, propagate_cam, propagate_obj};

use rayon::prelude::*;

use crate::config::TmpConfig;
use crate::error::{Error, Result};
use crate::field::{MotionField, Offset};
use crate::grid::{ConfidenceMap, DistanceMap, FeatureMap};
use crate::rng::{RngPath, RngStream};
use crate::scalar::Scalar;
use crate::state::AlignState;
use candidates::{push_dedup, PushOutcome};

/// Which propagation paths feed the candidate sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Paths {
    pub obj: bool,
    pub cam: bool,
}

impl Paths {
    pub const BOTH: Paths = Paths { obj: true, cam: true };
    pub const OBJ_ONLY: Paths = Paths { obj: true, cam: false };
    pub const CAM_ONLY: Paths = Paths { obj: false, cam: true };
}

/// Refined field for one frame with its distance and confidence maps.
#[derive(Clone, Debug)]
pub struct AlignOutput<T> {
    pub field: MotionField<T>,
    pub distance: DistanceMap<T>,
    pub confidence: ConfidenceMap<T>,
    pub evaluations: u64,
    pub sweep_distances: Vec<DistanceMap<T>>,
}

impl<T: Scalar> AlignOutput<T> {
    fn from_finetune(out: FinetuneOutput<T>, a: f64) -> Self {
        let confidence = confidence_from_distance(&out.distance, a);
        Self {
            field: out.field,
            distance: out.distance,
            confidence,
            evaluations: out.evaluations,
            sweep_distances: out.sweep_distances,
        }
    }
}

/// Propagates `state.prev_motion` into the frame whose motion features are
/// `h0_cur`, using both paths.
pub fn tmp_align<T: Scalar>(
    state: &AlignState<T>,
    h0_cur: &FeatureMap<T>,
    cfg: &TmpConfig,
) -> Result<AlignOutput<T>> {
    tmp_align_paths(state, h0_cur, cfg, Paths::BOTH)
}

/// [`tmp_align`] restricted to a subset of the propagation paths.
///
/// Camera-path candidates are inserted before object-path ones so the
/// in-place inherited offset is never evicted by saturation.
pub fn tmp_align_paths<T: Scalar>(
    state: &AlignState<T>,
    h0_cur: &FeatureMap<T>,
    cfg: &TmpConfig,
    paths: Paths,
) -> Result<AlignOutput<T>> {
    let dims = h0_cur.dims();
    if state.dims() != dims {
        return Err(Error::dims(state.dims(), dims));
    }
    if !paths.obj && !paths.cam {
        return Err(Error::Config("at least one propagation path is required".into()));
    }
    let rng = RngStream::new(cfg.seed);
    let frame = state.frame_index + 1;
    let buffers = match (paths.cam, paths.obj) {
        (true, true) => {
            let mut b = propagate_cam(&state.prev_motion, dims, cfg, &rng, frame)?;
            b.merge(&propagate_obj(&state.prev_motion, dims, cfg, &rng, frame)?);
            b
        }
        (true, false) => propagate_cam(&state.prev_motion, dims, cfg, &rng, frame)?,
        (false, _) => propagate_obj(&state.prev_motion, dims, cfg, &rng, frame)?,
    };
    let out = if paths.cam {
        finetune(&buffers, &state.prev_motion_features, h0_cur, cfg)?
    } else {
        finetune_sparse(&buffers, &state.prev_motion_features, h0_cur, cfg)?
    };
    Ok(AlignOutput::from_finetune(out, cfg.a))
}

/// Cold-start candidates: the zero offset followed by `cfg.init_draws`
/// offsets drawn uniformly from the integer lattice in `[-max_offset, max_offset]²`.
pub fn random_init_buffer<T: Scalar>(
    dims: (usize, usize),
    cfg: &TmpConfig,
    rng: &RngStream,
    frame_index: u64,
) -> CandidateBuffer<T> {
    let (w, h) = dims;
    let m = cfg.max_offset_for(w, h).floor() as i64;
    let span = (2 * m + 1) as f64;
    let draws = cfg.init_draws;
    let mut buf = CandidateBuffer::new(w, h, draws + 1);
    let dropped: u64 = buf
        .par_pixels_mut()
        .map(|(i, (slots, len))| {
            let zero = std::iter::once(Candidate::new(Offset::zero(), Provenance::Random));
            let random = (0..draws).map(|j| {
                let lattice = |lane| {
                    let u = rng.uniform(frame_index, i as u64, RngPath::Init, j as u64, lane);
                    ((u * span).floor() as i64).min(2 * m) - m
                };
                Candidate::new(Offset::new(T::of(lattice(0) as f64), T::of(lattice(1) as f64)), Provenance::Random)
            });
            zero.chain(random)
                .filter(|&c| push_dedup(slots, len, c) == PushOutcome::Full)
                .count() as u64
        })
        .sum();
    buf.add_dropped(dropped);
    buf
}

/// Cold start for the first frame pair: random candidates refined with twice
/// the configured number of sweeps.
pub fn init_motion_field<T: Scalar>(
    h0_first: &FeatureMap<T>,
    h0_second: &FeatureMap<T>,
    cfg: &TmpConfig,
    rng: &RngStream,
) -> Result<AlignOutput<T>> {
    let doubled = TmpConfig {
        sweeps: 2 * cfg.sweeps,
        ..cfg.clone()
    };
    random_refine(h0_first, h0_second, &doubled, rng, 1)
}

pub(crate) fn random_refine<T: Scalar>(
    h_prev: &FeatureMap<T>,
    h_cur: &FeatureMap<T>,
    cfg: &TmpConfig,
    rng: &RngStream,
    frame_index: u64,
) -> Result<AlignOutput<T>> {
    h_prev.check_same_shape(h_cur)?;
    let buffers = random_init_buffer(h_cur.dims(), cfg, rng, frame_index);
    let out = finetune(&buffers, h_prev, h_cur, cfg)?;
    Ok(AlignOutput::from_finetune(out, cfg.a))
}
