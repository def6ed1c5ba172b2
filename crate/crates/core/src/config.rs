use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound on the default offset clamp, in pixels.
pub const MIN_DEFAULT_MAX_OFFSET: f64 = 8.0;

/// How per-channel squared differences are reduced into one matching distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    Sum,
    #[default]
    ChannelMean,
}

/// Propagation and refinement parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmpConfig {
    /// Jittered candidates per propagation path per pixel.
    pub k: usize,
    /// Standard deviation of the Gaussian jitter, in pixels.
    pub sigma: f64,
    /// Confidence decay in `exp(-a * d_min)`.
    pub a: f64,
    pub sweeps: usize,
    pub neighbor_radius: usize,
    pub capacity: usize,
    /// Offset clamp in pixels; `None` resolves per frame size, see [`TmpConfig::max_offset_for`].
    pub max_offset: Option<f64>,
    pub patch_radius: usize,
    pub seed: u64,
    pub distance_mode: DistanceMode,
    /// Uniform draws per pixel in a random (cold-start or scratch) initialization.
    pub init_draws: usize,
}

impl Default for TmpConfig {
    fn default() -> Self {
        Self {
            k: 2,
            sigma: 30.0,
            a: 1.0,
            sweeps: 2,
            neighbor_radius: 1,
            capacity: 16,
            max_offset: None,
            patch_radius: 1,
            seed: 0,
            distance_mode: DistanceMode::ChannelMean,
            init_draws: 32,
        }
    }
}

impl TmpConfig {
    pub fn validate(self) -> Result<Self> {
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::Config("sigma must be non-negative".into()));
        }
        if !self.a.is_finite() || self.a <= 0.0 {
            return Err(Error::Config("confidence decay must be positive".into()));
        }
        if self.sweeps < 1 {
            return Err(Error::Config("sweeps must be at least 1".into()));
        }
        if self.capacity < 2 * self.k + 2 {
            return Err(Error::Config(format!(
                "capacity must be at least 2k+2 = {}, got {}",
                2 * self.k + 2,
                self.capacity
            )));
        }
        if let Some(m) = self.max_offset {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::Config("max offset must be non-negative".into()));
            }
        }
        Ok(self)
    }

    /// Offset clamp for a `width`×`height` frame.
    ///
    /// Defaults to `min(max(3·sigma, 8), max(width, height))`; the 8 px
    /// floor keeps small-sigma configurations from clamping inherited motion.
    pub fn max_offset_for(&self, width: usize, height: usize) -> f64 {
        self.max_offset.unwrap_or_else(|| {
            (3.0 * self.sigma)
                .max(MIN_DEFAULT_MAX_OFFSET)
                .min(width.max(height) as f64)
        })
    }
}

/// Unvalidated parameters as they arrive from the command line or a file.
/// Unset fields take the [`TmpConfig`] defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigParams {
    pub k: Option<i64>,
    pub sigma: Option<f64>,
    pub a: Option<f64>,
    pub sweeps: Option<i64>,
    pub neighbor_radius: Option<i64>,
    pub capacity: Option<i64>,
    pub max_offset: Option<f64>,
    pub patch_radius: Option<i64>,
    pub seed: Option<u64>,
    pub distance_mode: Option<DistanceMode>,
    pub init_draws: Option<i64>,
}

impl ConfigParams {
    pub fn validate(&self) -> Result<TmpConfig> {
        let d = TmpConfig::default();
        let k = self.k.unwrap_or(d.k as i64);
        if k < 0 {
            return Err(Error::Config("k must be non-negative".into()));
        }
        let sweeps = self.sweeps.unwrap_or(d.sweeps as i64);
        if sweeps < 1 {
            return Err(Error::Config("sweeps must be at least 1".into()));
        }
        let non_negative = |v: Option<i64>, default: usize, name: &str| -> Result<usize> {
            let v = v.unwrap_or(default as i64);
            if v < 0 {
                return Err(Error::Config(format!("{name} must be non-negative")));
            }
            Ok(v as usize)
        };
        let neighbor_radius = non_negative(self.neighbor_radius, d.neighbor_radius, "neighbor radius")?;
        let patch_radius = non_negative(self.patch_radius, d.patch_radius, "patch radius")?;
        let init_draws = non_negative(self.init_draws, d.init_draws, "init draws")?;
        let capacity = self.capacity.unwrap_or(d.capacity as i64);
        if capacity < 2 * k + 2 {
            return Err(Error::Config(format!(
                "capacity must be at least 2k+2 = {}, got {}",
                2 * k + 2,
                capacity
            )));
        }
        TmpConfig {
            k: k as usize,
            sigma: self.sigma.unwrap_or(d.sigma),
            a: self.a.unwrap_or(d.a),
            sweeps: sweeps as usize,
            neighbor_radius,
            capacity: capacity as usize,
            max_offset: self.max_offset,
            patch_radius,
            seed: self.seed.unwrap_or(d.seed),
            distance_mode: self.distance_mode.unwrap_or(d.distance_mode),
            init_draws,
        }
        .validate()
    }
}
