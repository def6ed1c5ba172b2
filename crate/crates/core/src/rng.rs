//! Counter-based random streams.
//!
//! Every sample is a pure function of `(seed, frame, pixel, path, candidate)`,
//! so results do not depend on evaluation order or worker count.

/// Sampling site that owns a draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum RngPath {
    Obj = 1,
    Cam = 2,
    Init = 3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    // SplitMix64 finalizer.
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    fn key(&self, frame: u64, pixel: u64, path: RngPath, candidate: u64, lane: u64) -> u64 {
        let mut h = mix64(self.seed.wrapping_add(GOLDEN));
        for word in [frame, pixel, path as u64, candidate, lane] {
            h = mix64(h ^ word.wrapping_mul(GOLDEN).wrapping_add(0x632b_e59b_d9b4_e019));
        }
        h
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&self, frame: u64, pixel: u64, path: RngPath, candidate: u64, lane: u64) -> f64 {
        (self.key(frame, pixel, path, candidate, lane) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Pair of independent standard normals (Box–Muller).
    #[inline]
    pub fn normal_pair(&self, frame: u64, pixel: u64, path: RngPath, candidate: u64) -> (f64, f64) {
        // 1 - u keeps the log argument in (0, 1].
        let u1 = 1.0 - self.uniform(frame, pixel, path, candidate, 0);
        let u2 = self.uniform(frame, pixel, path, candidate, 1);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }
}
