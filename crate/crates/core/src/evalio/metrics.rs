use crate::error::{Error, Result};
use crate::field::MotionField;
use crate::grid::{ConfidenceMap, Mask, Plane};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpeStats {
    pub mean: f64,
    pub median: f64,
    /// Fraction of included pixels with error ≤ 1 px.
    pub within_1px: f64,
    pub count: usize,
}

/// Endpoint error over the pixels selected by `mask`.
pub fn epe<T: Scalar>(est: &MotionField<T>, gt: &MotionField<T>, mask: &Mask) -> Result<EpeStats> {
    est.check_dims(gt.dims())?;
    if mask.dims() != gt.dims() {
        return Err(Error::dims(gt.dims(), mask.dims()));
    }
    let mut errors: Vec<f64> = est
        .offsets()
        .iter()
        .zip(gt.offsets())
        .zip(mask.data())
        .filter(|(_, &m)| m)
        .map(|((a, b), _)| {
            let (dx, dy) = (a.dx.as_f64() - b.dx.as_f64(), a.dy.as_f64() - b.dy.as_f64());
            dx.hypot(dy)
        })
        .collect();
    if errors.is_empty() {
        return Err(Error::Empty("evaluation mask"));
    }
    let n = errors.len();
    let mean = errors.iter().sum::<f64>() / n as f64;
    let within_1px = errors.iter().filter(|&&e| e <= 1.0).count() as f64 / n as f64;
    errors.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        errors[n / 2]
    } else {
        0.5 * (errors[n / 2 - 1] + errors[n / 2])
    };
    Ok(EpeStats {
        mean,
        median,
        within_1px,
        count: n,
    })
}

/// `10·log10(1 / MSE)` on `[0, 1]` luma; `+inf` when the inputs agree exactly.
pub fn warping_psnr<T: Scalar>(frame_cur: &Plane<T>, warped_prev: &Plane<T>, mask: Option<&Mask>) -> Result<f64> {
    if frame_cur.dims() != warped_prev.dims() {
        return Err(Error::dims(frame_cur.dims(), warped_prev.dims()));
    }
    let included = |i: usize| mask.is_none_or(|m| m.data()[i]);
    let (mut sse, mut n) = (0.0, 0usize);
    for (i, (a, b)) in frame_cur.data().iter().zip(warped_prev.data()).enumerate() {
        if included(i) {
            let d = a.as_f64() - b.as_f64();
            sse += d * d;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Empty("psnr mask"));
    }
    Ok(psnr_from_mse(sse / n as f64))
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

/// Warping PSNR over pixels with confidence ≥ `threshold`, and over all pixels.
pub fn confidence_stratified_psnr<T: Scalar>(
    frame_cur: &Plane<T>,
    warped_prev: &Plane<T>,
    conf: &ConfidenceMap<T>,
    threshold: f64,
) -> Result<(f64, f64)> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!("confidence threshold must be in (0, 1), got {threshold}")));
    }
    if conf.dims() != frame_cur.dims() {
        return Err(Error::dims(frame_cur.dims(), conf.dims()));
    }
    let (w, h) = conf.dims();
    let high = Mask::from_fn(w, h, |x, y| conf.get(x, y).as_f64() >= threshold);
    if high.count() == 0 {
        return Err(Error::Empty("no pixel reaches the confidence threshold"));
    }
    Ok((
        warping_psnr(frame_cur, warped_prev, Some(&high))?,
        warping_psnr(frame_cur, warped_prev, None)?,
    ))
}
