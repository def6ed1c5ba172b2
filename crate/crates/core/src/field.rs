//! Backward motion fields.
//!
//! Coordinates are `(x = column, y = row)` everywhere. The offset stored at
//! pixel `(x, y)` of frame `t` points to its source `(x + dx, y + dy)` in
//! frame `t - 1`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A 2-D displacement in pixels.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Offset<T> {
    pub dx: T,
    pub dy: T,
}

impl<T: Scalar> Offset<T> {
    #[inline]
    pub fn new(dx: T, dy: T) -> Self {
        Self { dx, dy }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dx * self.dx + self.dy * self.dy
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.dx.is_finite() && self.dy.is_finite()
    }

    /// Componentwise clamp to `[-limit, limit]`.
    #[inline]
    pub fn clamp(self, limit: T) -> Self {
        Self::new(self.dx.max(-limit).min(limit), self.dy.max(-limit).min(limit))
    }

    /// Nearest integer offset, clamped to `[-radius, radius]²`.
    #[inline]
    pub fn to_integer_domain(self, radius: i64) -> (i64, i64) {
        let r = |v: T| (v.as_f64().round() as i64).clamp(-radius, radius);
        (r(self.dx), r(self.dy))
    }
}

impl<T: Scalar> std::ops::Neg for Offset<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.dx, -self.dy)
    }
}

/// Per-pixel backward offsets for one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionField<T> {
    width: usize,
    height: usize,
    offsets: Vec<Offset<T>>,
}

impl<T: Scalar> MotionField<T> {
    pub fn new(width: usize, height: usize, offsets: Vec<Offset<T>>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty("motion field"));
        }
        if offsets.len() != width * height {
            return Err(Error::Config(format!(
                "motion field {}x{} needs {} offsets, got {}",
                width,
                height,
                width * height,
                offsets.len()
            )));
        }
        if let Some(i) = offsets.iter().position(|o| !o.is_finite()) {
            return Err(Error::NonFinite {
                x: i % width,
                y: i / width,
            });
        }
        Ok(Self {
            width,
            height,
            offsets,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, Offset::zero())
    }

    pub fn constant(width: usize, height: usize, offset: Offset<T>) -> Self {
        Self {
            width,
            height,
            offsets: vec![offset; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Offset<T>) -> Self {
        let mut offsets = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                offsets.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            offsets,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Offset<T> {
        self.offsets[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, o: Offset<T>) {
        self.offsets[y * self.width + x] = o;
    }

    pub fn offsets(&self) -> &[Offset<T>] {
        &self.offsets
    }

    /// Source location in the previous frame for pixel `(x, y)`.
    #[inline]
    pub fn source_of(&self, x: usize, y: usize) -> (T, T) {
        let o = self.get(x, y);
        (T::of(x as f64) + o.dx, T::of(y as f64) + o.dy)
    }

    /// Largest absolute offset component.
    pub fn max_abs_component(&self) -> T {
        self.offsets
            .iter()
            .fold(T::zero(), |m, o| m.max(o.dx.abs()).max(o.dy.abs()))
    }

    pub fn max_magnitude(&self) -> T {
        self.offsets.iter().fold(T::zero(), |m, o| m.max(o.norm()))
    }

    pub fn cast<U: Scalar>(&self) -> MotionField<U> {
        MotionField {
            width: self.width,
            height: self.height,
            offsets: self
                .offsets
                .iter()
                .map(|o| Offset::new(U::of(o.dx.as_f64()), U::of(o.dy.as_f64())))
                .collect(),
        }
    }

    pub(crate) fn check_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::dims(dims, self.dims()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_finite() {
        let err = MotionField::new(1, 1, vec![Offset::new(f64::INFINITY, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn integer_domain_rounds_and_clamps() {
        assert_eq!(Offset::new(2.6, -0.4).to_integer_domain(8), (3, 0));
        assert_eq!(Offset::new(-12.0, 9.4).to_integer_domain(8), (-8, 8));
    }

    proptest! {
        #[test]
        fn offset_round_trip(x in 0usize..64, y in 0usize..64, dx in -20i32..20, dy in -20i32..20) {
            let o = Offset::new(dx as f64, dy as f64);
            let field = MotionField::constant(64, 64, o);
            let (sx, sy) = field.source_of(x, y);
            let back = -o;
            prop_assert_eq!(sx + back.dx, x as f64);
            prop_assert_eq!(sy + back.dy, y as f64);
        }
    }
}
