use crate::error::{Error, Result};
use crate::field::MotionField;
use crate::grid::FeatureMap;
use crate::scalar::Scalar;

/// Recurrent carry between consecutive frames.
#[derive(Clone, Debug)]
pub struct AlignState<T> {
    pub prev_motion: MotionField<T>,
    pub prev_motion_features: FeatureMap<T>,
    pub prev_texture: FeatureMap<T>,
    /// Index of the frame the members describe.
    pub frame_index: u64,
}

impl<T: Scalar> AlignState<T> {
    pub fn new(
        prev_motion: MotionField<T>,
        prev_motion_features: FeatureMap<T>,
        prev_texture: FeatureMap<T>,
        frame_index: u64,
    ) -> Result<Self> {
        let dims = prev_motion.dims();
        for got in [prev_motion_features.dims(), prev_texture.dims()] {
            if got != dims {
                return Err(Error::dims(dims, got));
            }
        }
        Ok(Self {
            prev_motion,
            prev_motion_features,
            prev_texture,
            frame_index,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.prev_motion.dims()
    }

    /// Replaces the carry with the just-processed frame; `frame_index` advances by one.
    pub fn advance(
        &mut self,
        motion: MotionField<T>,
        motion_features: FeatureMap<T>,
        texture: FeatureMap<T>,
    ) -> Result<()> {
        let dims = self.dims();
        for got in [motion.dims(), motion_features.dims(), texture.dims()] {
            if got != dims {
                return Err(Error::dims(dims, got));
            }
        }
        if motion_features.channels() != self.prev_motion_features.channels() {
            return Err(Error::ChannelMismatch {
                expected: self.prev_motion_features.channels(),
                got: motion_features.channels(),
            });
        }
        self.prev_motion = motion;
        self.prev_motion_features = motion_features;
        self.prev_texture = texture;
        self.frame_index += 1;
        Ok(())
    }
}
