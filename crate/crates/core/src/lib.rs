//! Temporal motion propagation for online video frame alignment.
//!
//! Each frame's backward motion field is inherited from the previous frame
//! through an object-motion path (offsets extrapolated to where content
//! lands) and a camera-motion path (offsets reused in place), refined by a
//! few Jacobi sweeps of neighbor diffusion and argmin selection over a
//! feature matching distance, and turned into a confidence map that weights
//! the warped previous features before fusion.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod evalio;
pub mod features;
pub mod field;
pub mod grid;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod state;
pub mod synth;
pub mod tmp;
pub mod warp;

pub use config::{ConfigParams, DistanceMode, TmpConfig};
pub use error::{Error, Result};
pub use field::{MotionField, Offset};
pub use grid::{ConfidenceMap, DistanceMap, FeatureMap, Mask, Plane};
pub use pipeline::{AlignMode, FrameResult, SequenceAligner, Weighting};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use state::AlignState;

pub type MotionField64 = MotionField<f64>;
pub type MotionField32 = MotionField<f32>;
pub type FeatureMap64 = FeatureMap<f64>;
pub type FeatureMap32 = FeatureMap<f32>;
pub type Plane64 = Plane<f64>;
pub type Plane32 = Plane<f32>;
pub type DistanceMap64 = DistanceMap<f64>;
pub type DistanceMap32 = DistanceMap<f32>;
pub type ConfidenceMap64 = ConfidenceMap<f64>;
pub type ConfidenceMap32 = ConfidenceMap<f32>;
pub type AlignState64 = AlignState<f64>;
pub type AlignState32 = AlignState<f32>;
pub type SequenceAligner64 = SequenceAligner<f64>;
pub type SequenceAligner32 = SequenceAligner<f32>;
