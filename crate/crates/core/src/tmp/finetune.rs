//! Candidate evaluation: matching distance, sweep-wise argmin selection and
//! confidence maps.

use rayon::prelude::*;

use super::candidates::{Candidate, CandidateBuffer, Provenance};
use super::propagate::neighbors;
use crate::config::{DistanceMode, TmpConfig};
use crate::error::{Error, Result};
use crate::features::sample_bilinear_into;
use crate::field::{MotionField, Offset};
use crate::grid::{ConfidenceMap, DistanceMap, FeatureMap, Plane};
use crate::scalar::Scalar;

/// Squared feature distance between `h_cur(x, y)` and `h_prev` sampled
/// bilinearly at `(x + dx, y + dy)`.
pub fn matching_distance<T: Scalar>(
    h_prev: &FeatureMap<T>,
    h_cur: &FeatureMap<T>,
    x: usize,
    y: usize,
    offset: Offset<T>,
    cfg: &TmpConfig,
) -> Result<T> {
    h_prev.check_same_shape(h_cur)?;
    let mut scratch = vec![T::zero(); h_prev.channels()];
    Ok(distance_with(h_prev, h_cur, x, y, offset, cfg.distance_mode, &mut scratch))
}

#[inline]
pub(crate) fn distance_with<T: Scalar>(
    h_prev: &FeatureMap<T>,
    h_cur: &FeatureMap<T>,
    x: usize,
    y: usize,
    offset: Offset<T>,
    mode: DistanceMode,
    scratch: &mut [T],
) -> T {
    let sx = T::of(x as f64) + offset.dx;
    let sy = T::of(y as f64) + offset.dy;
    sample_bilinear_into(h_prev, sx, sy, scratch);
    let cur = h_cur.pixel(x, y);
    let sum = scratch
        .iter()
        .zip(cur)
        .fold(T::zero(), |acc, (&p, &c)| acc + (p - c) * (p - c));
    match mode {
        DistanceMode::Sum => sum,
        DistanceMode::ChannelMean => sum / T::of(cur.len() as f64),
    }
}

/// Result of candidate refinement.
#[derive(Clone, Debug)]
pub struct FinetuneOutput<T> {
    pub field: MotionField<T>,
    pub distance: DistanceMap<T>,
    /// Provenance of each pixel's winning candidate.
    pub provenance: Vec<Provenance>,
    /// Matching-distance evaluations performed.
    pub evaluations: u64,
    /// Per-pixel minimum distance after each sweep; pixels without any
    /// candidate yet hold `+inf`.
    pub sweep_distances: Vec<DistanceMap<T>>,
}

#[derive(Clone, Copy)]
struct Best<T> {
    cand: Candidate<T>,
    distance: T,
}

/// `a` beats `b` on distance, then offset magnitude; equal keys keep the earlier one.
#[inline]
fn better<T: Scalar>(a: &Best<T>, b: &Best<T>) -> bool {
    a.distance < b.distance
        || (a.distance == b.distance && a.cand.offset.norm_sq() < b.cand.offset.norm_sq())
}

/// Runs `cfg.sweeps` rounds of evaluate-and-select over `buffers`.
///
/// Sweep 1 evaluates each pixel's own candidates. Every later sweep selects
/// among the pixel's own candidates, its incumbent best and the previous
/// sweep's bests of its neighbors (Jacobi order); offsets already scored at
/// the pixel are not evaluated again. Ties go to the smaller offset, then to
/// the earlier candidate. Fails if any pixel has no candidate.
pub fn finetune<T: Scalar>(
    buffers: &CandidateBuffer<T>,
    h_prev: &FeatureMap<T>,
    h_cur: &FeatureMap<T>,
    cfg: &TmpConfig,
) -> Result<FinetuneOutput<T>> {
    if let Some((x, y)) = buffers.first_empty() {
        return Err(Error::EmptyCandidates { x, y });
    }
    finetune_sparse(buffers, h_prev, h_cur, cfg)
}

/// [`finetune`] that tolerates pixels without candidates: they stay unset
/// until diffusion reaches them, and any pixel still unset after the last
/// sweep falls back to the zero offset.
pub fn finetune_sparse<T: Scalar>(
    buffers: &CandidateBuffer<T>,
    h_prev: &FeatureMap<T>,
    h_cur: &FeatureMap<T>,
    cfg: &TmpConfig,
) -> Result<FinetuneOutput<T>> {
    h_prev.check_same_shape(h_cur)?;
    if buffers.dims() != h_cur.dims() {
        return Err(Error::dims(h_cur.dims(), buffers.dims()));
    }
    let (w, h) = buffers.dims();
    let channels = h_cur.channels();
    let mode = cfg.distance_mode;
    let mut best: Vec<Option<Best<T>>> = vec![None; w * h];
    let mut sweep_distances = Vec::with_capacity(cfg.sweeps);
    let mut evaluations = 0u64;

    for sweep in 0..cfg.sweeps {
        let prev_best = &best;
        let (next, evals): (Vec<Option<Best<T>>>, Vec<u64>) = (0..w * h)
            .into_par_iter()
            .map_init(
                || (vec![T::zero(); channels], Vec::with_capacity(8)),
                |(scratch, seen), i| {
                    let (x, y) = (i % w, i / w);
                    let own = buffers.at_index(i);
                    let mut evals = 0u64;
                    let mut eval = |cand: Candidate<T>, winner: &mut Option<Best<T>>| {
                        evals += 1;
                        let distance = distance_with(h_prev, h_cur, x, y, cand.offset, mode, scratch);
                        let b = Best { cand, distance };
                        if winner.as_ref().is_none_or(|cur| better(&b, cur)) {
                            *winner = Some(b);
                        }
                    };
                    if sweep == 0 {
                        let mut winner = None;
                        for &c in own {
                            eval(c, &mut winner);
                        }
                        return (winner, evals);
                    }
                    // The incumbent already beats every own candidate, so only
                    // neighbor offsets not yet scored here need evaluating.
                    let mut winner = prev_best[i];
                    seen.clear();
                    for n in neighbors(x, y, w, h, cfg.neighbor_radius) {
                        let Some(nb) = prev_best[n] else { continue };
                        let o = nb.cand.offset;
                        let known = winner.is_some_and(|b| b.cand.offset == o)
                            || own.iter().any(|c| c.offset == o)
                            || seen.contains(&o);
                        if !known {
                            seen.push(o);
                            eval(Candidate::new(o, Provenance::Neighbor), &mut winner);
                        }
                    }
                    (winner, evals)
                },
            )
            .unzip();
        evaluations += evals.iter().sum::<u64>();
        best = next;
        sweep_distances.push(DistanceMap(Plane::from_fn(w, h, |x, y| {
            best[y * w + x].map_or(T::infinity(), |b| b.distance)
        })));
    }

    // Pixels never reached fall back to zero motion.
    let mut fallback_evals = 0u64;
    let mut scratch = vec![T::zero(); channels];
    for (i, b) in best.iter_mut().enumerate() {
        if b.is_none() {
            let cand = Candidate::new(Offset::zero(), Provenance::Random);
            let distance = distance_with(h_prev, h_cur, i % w, i / w, cand.offset, mode, &mut scratch);
            *b = Some(Best { cand, distance });
            fallback_evals += 1;
        }
    }
    evaluations += fallback_evals;

    let best: Vec<Best<T>> = best.into_iter().map(|b| b.expect("filled above")).collect();
    let field = MotionField::new(w, h, best.iter().map(|b| b.cand.offset).collect())?;
    let distance = DistanceMap(Plane::new(w, h, best.iter().map(|b| b.distance).collect())?);
    Ok(FinetuneOutput {
        field,
        distance,
        provenance: best.iter().map(|b| b.cand.provenance).collect(),
        evaluations,
        sweep_distances,
    })
}

/// Elementwise `exp(-a * d)`.
///
/// # Panics
/// If `a` is not positive.
pub fn confidence_from_distance<T: Scalar>(d_min: &DistanceMap<T>, a: f64) -> ConfidenceMap<T> {
    assert!(a > 0.0, "confidence decay must be positive");
    let a = T::of(a);
    ConfidenceMap(d_min.plane().map(|d| (-(a * d)).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extract_motion_features;
    use crate::grid::Plane;

    fn fm2(vals: Vec<f64>, w: usize, h: usize) -> FeatureMap<f64> {
        FeatureMap::new(w, h, 2, vals).unwrap()
    }

    #[test]
    fn identical_maps_zero_offset() {
        let frame = Plane::from_fn(8, 8, |x, y| ((x * 7 + y * 3) % 5) as f64 / 4.0);
        let f = extract_motion_features(&frame, &TmpConfig::default()).unwrap();
        let d = matching_distance(&f, &f, 3, 4, Offset::zero(), &TmpConfig::default()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn hand_evaluated_sum_distance() {
        // h_prev(x+1, y) = (1, 2), h_cur(x, y) = (0, 0): 1 + 4
        let mut prev = vec![0.0; 3 * 2 * 2];
        // pixel (2, 0), two channels
        prev[4] = 1.0;
        prev[5] = 2.0;
        let h_prev = fm2(prev, 3, 2);
        let h_cur = fm2(vec![0.0; 12], 3, 2);
        let cfg = TmpConfig {
            distance_mode: DistanceMode::Sum,
            ..Default::default()
        };
        let d = matching_distance(&h_prev, &h_cur, 1, 0, Offset::new(1.0, 0.0), &cfg).unwrap();
        assert_eq!(d, 5.0);
        let mean = matching_distance(&h_prev, &h_cur, 1, 0, Offset::new(1.0, 0.0), &TmpConfig::default()).unwrap();
        assert_eq!(mean, 2.5);
    }

    #[test]
    fn distance_is_symmetric_in_vectors() {
        let a = fm2(vec![0.3, -1.0, 2.0, 0.5], 2, 1);
        let b = fm2(vec![1.1, 0.25, -0.5, 0.0], 2, 1);
        let cfg = TmpConfig::default();
        for x in 0..2 {
            let d1 = matching_distance(&a, &b, x, 0, Offset::zero(), &cfg).unwrap();
            let d2 = matching_distance(&b, &a, x, 0, Offset::zero(), &cfg).unwrap();
            assert!(d1 >= 0.0);
            assert_eq!(d1, d2);
        }
    }

    #[test]
    fn channel_mismatch_rejected() {
        let a = FeatureMap::<f64>::zeros(2, 2, 2);
        let b = FeatureMap::<f64>::zeros(2, 2, 3);
        assert!(matches!(
            matching_distance(&a, &b, 0, 0, Offset::zero(), &TmpConfig::default()),
            Err(Error::ChannelMismatch { .. })
        ));
    }

    #[test]
    fn perfect_match_gives_zero_field() {
        let frame = Plane::from_fn(10, 10, |x, y| ((x * 13 + y * 7) % 11) as f64 / 10.0);
        let f = extract_motion_features(&frame, &TmpConfig::default()).unwrap();
        let mut buf = CandidateBuffer::new(10, 10, 16);
        for y in 0..10 {
            for x in 0..10 {
                buf.push(x, y, Candidate::new(Offset::new(1.0, 0.0), Provenance::Obj));
                buf.push(x, y, Candidate::new(Offset::zero(), Provenance::Cam));
            }
        }
        let out = finetune(&buf, &f, &f, &TmpConfig::default()).unwrap();
        assert!(out.field.offsets().iter().all(|o| *o == Offset::zero()));
        assert!(out.distance.values().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn empty_pixel_is_internal_error() {
        let f = FeatureMap::<f64>::zeros(3, 3, 8);
        let buf = CandidateBuffer::new(3, 3, 16);
        assert!(matches!(
            finetune(&buf, &f, &f, &TmpConfig::default()),
            Err(Error::EmptyCandidates { x: 0, y: 0 })
        ));
    }

    #[test]
    fn sparse_buffers_fill_by_diffusion_then_fallback() {
        let f = FeatureMap::<f64>::zeros(5, 1, 8);
        let mut buf = CandidateBuffer::new(5, 1, 16);
        buf.push(0, 0, Candidate::new(Offset::new(2.0, 0.0), Provenance::Obj));
        let cfg = TmpConfig {
            sweeps: 3,
            ..Default::default()
        };
        let out = finetune_sparse(&buf, &f, &f, &cfg).unwrap();
        // reach grows one pixel per extra sweep: x = 0, 1, 2
        for x in 0..3 {
            assert_eq!(out.field.get(x, 0), Offset::new(2.0, 0.0));
        }
        assert_eq!(out.field.get(4, 0), Offset::zero());
        assert!(out.sweep_distances[0].get(1, 0).is_infinite());
    }

    #[test]
    fn saturated_pixels_still_receive_neighbors() {
        let prev = FeatureMap::new(6, 1, 1, (0..6).map(|x| (x * x) as f64).collect()).unwrap();
        let cur = FeatureMap::new(6, 1, 1, (0..6).map(|x| ((x + 1) * (x + 1)) as f64).collect()).unwrap();
        let mut buf = CandidateBuffer::new(6, 1, 2);
        buf.push(0, 0, Candidate::new(Offset::new(1.0, 0.0), Provenance::Obj));
        for x in 0..6 {
            buf.push(x, 0, Candidate::new(Offset::new(-1.0, 0.0), Provenance::Obj));
            buf.push(x, 0, Candidate::new(Offset::new(2.0, 0.0), Provenance::Obj));
        }
        let cfg = TmpConfig {
            sweeps: 3,
            ..Default::default()
        };
        let out = finetune(&buf, &prev, &cur, &cfg).unwrap();
        for x in 0..3 {
            assert_eq!(out.field.get(x, 0), Offset::new(1.0, 0.0), "x = {x}");
            assert_eq!(out.distance.get(x, 0), 0.0);
        }
        assert_ne!(out.field.get(3, 0), Offset::new(1.0, 0.0));
    }

    #[test]
    fn tie_break_prefers_smaller_magnitude() {
        let f = FeatureMap::<f64>::zeros(1, 1, 8);
        let mut buf = CandidateBuffer::new(1, 1, 16);
        buf.push(0, 0, Candidate::new(Offset::new(3.0, 0.0), Provenance::Obj));
        buf.push(0, 0, Candidate::new(Offset::new(0.0, -1.0), Provenance::Obj));
        buf.push(0, 0, Candidate::new(Offset::new(1.0, 0.0), Provenance::Obj));
        let out = finetune(&buf, &f, &f, &TmpConfig::default()).unwrap();
        assert_eq!(out.field.get(0, 0), Offset::new(0.0, -1.0));
    }

    #[test]
    fn confidence_values() {
        let d = DistanceMap(Plane::new(3, 1, vec![0.0f64, std::f64::consts::LN_2, 1.0]).unwrap());
        let c = confidence_from_distance(&d, 1.0);
        assert_eq!(c.get(0, 0), 1.0);
        assert!((c.get(1, 0) - 0.5).abs() < 1e-15);
        assert!((c.get(2, 0) - (-1.0f64).exp()).abs() < 1e-15);
    }
}
