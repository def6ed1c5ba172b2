//! Row-major grids: luma planes, multi-channel feature maps, distance and
//! confidence maps, and boolean validity masks.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Single-channel row-major grid. Luma frames are planes with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> Plane<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty("plane"));
        }
        if data.len() != width * height {
            return Err(Error::Config(format!(
                "plane {}x{} needs {} values, got {}",
                width,
                height,
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
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
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    /// Value at integer coordinates with clamp-to-edge addressing.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Plane<U> {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Plane<U> {
        self.map(|v| U::of(v.as_f64()))
    }

    pub fn mean(&self) -> T {
        let sum = self.data.iter().fold(0.0, |acc, v| acc + v.as_f64());
        T::of(sum / self.data.len() as f64)
    }
}

/// H×W×C real-valued descriptor grid, channels interleaved per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap<T> {
    width: usize,
    height: usize,
    channels: usize,
    values: Vec<T>,
}

impl<T: Scalar> FeatureMap<T> {
    pub fn new(width: usize, height: usize, channels: usize, values: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty("feature map"));
        }
        if channels == 0 {
            return Err(Error::Empty("feature map channels"));
        }
        if values.len() != width * height * channels {
            return Err(Error::Config(format!(
                "feature map {}x{}x{} needs {} values, got {}",
                width,
                height,
                channels,
                width * height * channels,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let p = i / channels;
            return Err(Error::NonFinite {
                x: p % width,
                y: p / width,
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            values,
        })
    }

    /// Single-channel map holding the plane's values.
    pub fn from_plane(plane: &Plane<T>) -> Self {
        Self {
            width: plane.width,
            height: plane.height,
            channels: 1,
            values: plane.data.clone(),
        }
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
            values: vec![T::zero(); width * height * channels],
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
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[T] {
        let i = (y * self.width + x) * self.channels;
        &self.values[i..i + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [T] {
        let i = (y * self.width + x) * self.channels;
        &mut self.values[i..i + self.channels]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// One channel extracted as a plane.
    pub fn channel(&self, c: usize) -> Plane<T> {
        assert!(c < self.channels, "channel {c} out of range");
        Plane {
            width: self.width,
            height: self.height,
            data: self
                .values
                .chunks_exact(self.channels)
                .map(|px| px[c])
                .collect(),
        }
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(self.dims(), other.dims()));
        }
        if self.channels != other.channels {
            return Err(Error::ChannelMismatch {
                expected: self.channels,
                got: other.channels,
            });
        }
        Ok(())
    }
}

/// Per-pixel minimum matching distance attained by the chosen offset.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMap<T>(pub(crate) Plane<T>);

/// Per-pixel motion confidence `exp(-a * d_min)`, values in `(0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfidenceMap<T>(pub(crate) Plane<T>);

macro_rules! plane_newtype {
    ($name:ident) => {
        impl<T: Scalar> $name<T> {
            pub fn from_plane(plane: Plane<T>) -> Self {
                Self(plane)
            }

            pub fn plane(&self) -> &Plane<T> {
                &self.0
            }

            pub fn into_plane(self) -> Plane<T> {
                self.0
            }

            #[inline]
            pub fn get(&self, x: usize, y: usize) -> T {
                self.0.get(x, y)
            }

            #[inline]
            pub fn width(&self) -> usize {
                self.0.width
            }

            #[inline]
            pub fn height(&self) -> usize {
                self.0.height
            }

            #[inline]
            pub fn dims(&self) -> (usize, usize) {
                self.0.dims()
            }

            pub fn values(&self) -> &[T] {
                &self.0.data
            }
        }
    };
}

plane_newtype!(DistanceMap);
plane_newtype!(ConfidenceMap);

/// Boolean per-pixel mask; `true` marks an included pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Config(format!(
                "mask {}x{} needs {} values, got {}",
                width,
                height,
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn all(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![true; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
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
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn invert(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|b| !b).collect(),
        }
    }

    pub fn and(&self, other: &Mask) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| *a && *b)
                .collect(),
        }
    }
}
