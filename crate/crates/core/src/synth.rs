//! Synthetic sequences with exact backward ground truth: a band-limited
//! background under translational camera motion plus rigid textured sprites.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{MotionField, Offset};
use crate::grid::{Mask, Plane};
use crate::rng::{RngPath, RngStream};

/// Value noise with smooth (C¹) interpolation between lattice points spaced
/// `cell` pixels apart, plus a half-amplitude octave at `cell / 2`.
/// Output is stretched to `[0, 1]` and quantized to multiples of 1/255.
pub fn value_noise(width: usize, height: usize, seed: u64, cell: f64) -> Plane<f64> {
    let rng = RngStream::new(seed);
    let octave = |x: f64, y: f64, cell: f64, oct: u64| {
        let (gx, gy) = (x / cell, y / cell);
        let (ix, iy) = (gx.floor() as i64, gy.floor() as i64);
        let (fx, fy) = (gx - ix as f64, gy - iy as f64);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let lattice = |lx: i64, ly: i64| {
            let key = ((ly as u64) << 32) ^ (lx as u64 & 0xffff_ffff);
            rng.uniform(0, key, RngPath::Init, oct, 0)
        };
        let (sx, sy) = (smooth(fx), smooth(fy));
        let top = lattice(ix, iy) * (1.0 - sx) + lattice(ix + 1, iy) * sx;
        let bottom = lattice(ix, iy + 1) * (1.0 - sx) + lattice(ix + 1, iy + 1) * sx;
        top * (1.0 - sy) + bottom * sy
    };
    let raw = Plane::from_fn(width, height, |x, y| {
        let (x, y) = (x as f64, y as f64);
        octave(x, y, cell, 0) + 0.5 * octave(x, y, (cell / 2.0).max(1.0), 1)
    });
    let (lo, hi) = raw
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    raw.map(|v| (((v - lo) / span) * 255.0).round() / 255.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Shape {
    Rect { width: usize, height: usize },
    Disc { radius: usize },
}

impl Shape {
    fn extent(&self) -> (usize, usize) {
        match *self {
            Shape::Rect { width, height } => (width, height),
            Shape::Disc { radius } => (2 * radius + 1, 2 * radius + 1),
        }
    }

    fn contains(&self, u: i64, v: i64) -> bool {
        let (w, h) = self.extent();
        if u < 0 || v < 0 || u >= w as i64 || v >= h as i64 {
            return false;
        }
        match *self {
            Shape::Rect { .. } => true,
            Shape::Disc { radius } => {
                let r = radius as i64;
                (u - r) * (u - r) + (v - r) * (v - r) <= r * r
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpriteSpec {
    pub shape: Shape,
    pub texture_seed: u64,
    /// Top-left corner of the bounding box in frame 0.
    pub position: (i64, i64),
    /// Image-space displacement from frame 0 to frame 1.
    pub velocity: (i64, i64),
    /// Change of velocity per frame.
    #[serde(default)]
    pub acceleration: (i64, i64),
}

impl SpriteSpec {
    /// Displacement from frame `t - 1` to frame `t`, `t >= 1`.
    pub fn velocity_at(&self, t: usize) -> (i64, i64) {
        let s = t as i64 - 1;
        (
            self.velocity.0 + self.acceleration.0 * s,
            self.velocity.1 + self.acceleration.1 * s,
        )
    }

    pub fn position_at(&self, t: usize) -> (i64, i64) {
        (1..=t).fold(self.position, |(x, y), i| {
            let v = self.velocity_at(i);
            (x + v.0, y + v.1)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub background_seed: u64,
    /// Image-space displacement of the background per frame.
    pub camera_velocity: (i64, i64),
    #[serde(default)]
    pub sprites: Vec<SpriteSpec>,
    /// Lattice spacing of the background noise, in pixels.
    #[serde(default = "default_cell")]
    pub texture_cell: f64,
}

fn default_cell() -> f64 {
    4.0
}

/// Rendered frames with ground truth for every frame `t >= 1`.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub frames: Vec<Plane<f64>>,
    /// `ground_truth[t - 1]` maps frame `t` back to frame `t - 1`.
    pub ground_truth: Vec<MotionField<f64>>,
    /// `valid[t - 1]` is false where frame `t` has no source in frame `t - 1`.
    pub valid: Vec<Mask>,
    /// Top-most layer per pixel per frame: 0 background, `i + 1` sprite `i`.
    pub layers: Vec<Vec<u16>>,
}

impl Sequence {
    /// Invalid pixels whose ground-truth source lies inside the previous
    /// frame, i.e. content revealed from behind a sprite.
    pub fn disoccluded(&self, t: usize) -> Mask {
        let gt = &self.ground_truth[t - 1];
        let valid = &self.valid[t - 1];
        let (w, h) = gt.dims();
        Mask::from_fn(w, h, |x, y| {
            let (sx, sy) = gt.source_of(x, y);
            !valid.get(x, y) && sx >= 0.0 && sy >= 0.0 && sx < w as f64 && sy < h as f64
        })
    }

    /// Pixels of frame `t >= 2` whose content first became visible in frame
    /// `t - 1`: they match into `t - 1`, but the motion estimated there had
    /// no source in `t - 2` to be inherited from.
    pub fn revealed(&self, t: usize) -> Mask {
        assert!(t >= 2, "revealed regions start at frame 2");
        let gt = &self.ground_truth[t - 1];
        let valid = &self.valid[t - 1];
        let before = &self.valid[t - 2];
        let (w, h) = gt.dims();
        Mask::from_fn(w, h, |x, y| {
            if !valid.get(x, y) {
                return false;
            }
            let (sx, sy) = gt.source_of(x, y);
            !before.get(sx.round() as usize, sy.round() as usize)
        })
    }
}

pub fn generate_sequence(spec: &SceneSpec) -> Result<Sequence> {
    let (w, h, n) = (spec.width, spec.height, spec.frames);
    if n == 0 {
        return Err(Error::Scene("sequence needs at least one frame".into()));
    }
    if w == 0 || h == 0 {
        return Err(Error::Scene("frame size must be positive".into()));
    }
    for (i, s) in spec.sprites.iter().enumerate() {
        let (sw, sh) = s.shape.extent();
        if sw > w || sh > h {
            return Err(Error::Scene(format!(
                "sprite {i} ({sw}x{sh}) is larger than the {w}x{h} frame"
            )));
        }
    }

    let travel = |v: i64| v.unsigned_abs() as usize * (n - 1);
    let (vx, vy) = spec.camera_velocity;
    let world = value_noise(w + travel(vx), h + travel(vy), spec.background_seed, spec.texture_cell);
    let origin = |v: i64| if v > 0 { v * (n as i64 - 1) } else { 0 };
    let (ox, oy) = (origin(vx), origin(vy));

    let textures: Vec<Plane<f64>> = spec
        .sprites
        .iter()
        .map(|s| {
            let (sw, sh) = s.shape.extent();
            value_noise(sw, sh, s.texture_seed, (spec.texture_cell * 0.75).max(2.0))
        })
        .collect();

    let mut frames = Vec::with_capacity(n);
    let mut layers = Vec::with_capacity(n);
    for t in 0..n {
        let positions: Vec<(i64, i64)> = spec.sprites.iter().map(|s| s.position_at(t)).collect();
        let mut layer = vec![0u16; w * h];
        let frame = Plane::from_fn(w, h, |x, y| {
            let (xi, yi) = (x as i64, y as i64);
            for (i, s) in spec.sprites.iter().enumerate().rev() {
                let (px, py) = positions[i];
                let (u, v) = (xi - px, yi - py);
                if s.shape.contains(u, v) {
                    layer[y * w + x] = i as u16 + 1;
                    return textures[i].get(u as usize, v as usize);
                }
            }
            let wx = xi + ox - t as i64 * vx;
            let wy = yi + oy - t as i64 * vy;
            world.get(wx as usize, wy as usize)
        });
        frames.push(frame);
        layers.push(layer);
    }

    let mut ground_truth = Vec::with_capacity(n.saturating_sub(1));
    let mut valid = Vec::with_capacity(n.saturating_sub(1));
    for t in 1..n {
        let layer = &layers[t];
        let prev_layer = &layers[t - 1];
        let motion = |id: u16| -> (i64, i64) {
            if id == 0 {
                spec.camera_velocity
            } else {
                spec.sprites[id as usize - 1].velocity_at(t)
            }
        };
        let gt = MotionField::from_fn(w, h, |x, y| {
            let (mx, my) = motion(layer[y * w + x]);
            Offset::new(-mx as f64, -my as f64)
        });
        let mask = Mask::from_fn(w, h, |x, y| {
            let id = layer[y * w + x];
            let (mx, my) = motion(id);
            let (sx, sy) = (x as i64 - mx, y as i64 - my);
            sx >= 0
                && sy >= 0
                && sx < w as i64
                && sy < h as i64
                && prev_layer[sy as usize * w + sx as usize] == id
        });
        ground_truth.push(gt);
        valid.push(mask);
    }

    Ok(Sequence {
        frames,
        ground_truth,
        valid,
        layers,
    })
}

pub const PRESET_NAMES: [&str; 5] = ["pan", "sprite", "disocclusion", "accel", "occluder"];

/// Named scenes sized to `width`×`height`.
pub fn scenario_presets(width: usize, height: usize, frames: usize, seed: u64) -> Vec<(&'static str, SceneSpec)> {
    let base = SceneSpec {
        width,
        height,
        frames,
        background_seed: seed,
        camera_velocity: (0, 0),
        sprites: Vec::new(),
        texture_cell: default_cell(),
    };
    let side = (width.min(height) * 3 / 8).max(4).min(width.min(height));
    let sprite_seed = seed.wrapping_mul(0x9e37_79b9).wrapping_add(17);
    let centered_y = (height as i64 - side as i64) / 2;

    let pan = SceneSpec {
        camera_velocity: (2, 1),
        ..base.clone()
    };
    let sprite = SceneSpec {
        sprites: vec![SpriteSpec {
            shape: Shape::Rect { width: side, height: side },
            texture_seed: sprite_seed,
            position: ((width / 8) as i64, centered_y),
            velocity: (3, 0),
            acceleration: (0, 0),
        }],
        ..base.clone()
    };
    let disocclusion = SceneSpec {
        camera_velocity: (2, 0),
        sprites: vec![SpriteSpec {
            shape: Shape::Rect { width: side, height: side },
            texture_seed: sprite_seed,
            position: ((width / 8) as i64, centered_y),
            velocity: (4, 0),
            acceleration: (0, 0),
        }],
        ..base.clone()
    };
    let accel = SceneSpec {
        camera_velocity: (1, 0),
        sprites: vec![SpriteSpec {
            shape: Shape::Rect { width: side, height: side },
            texture_seed: sprite_seed,
            position: ((width as i64 - side as i64) / 2, centered_y),
            velocity: (-3, 0),
            acceleration: (1, 0),
        }],
        ..base.clone()
    };
    let bar = (width / 6).max(3).min(width);
    let occluder = SceneSpec {
        sprites: vec![SpriteSpec {
            shape: Shape::Rect {
                width: bar,
                height: (height * 3 / 4).max(1),
            },
            texture_seed: sprite_seed,
            position: ((width / 10) as i64, (height / 8) as i64),
            velocity: (4, 0),
            acceleration: (0, 0),
        }],
        ..base
    };
    vec![
        ("pan", pan),
        ("sprite", sprite),
        ("disocclusion", disocclusion),
        ("accel", accel),
        ("occluder", occluder),
    ]
}

pub fn preset(name: &str, width: usize, height: usize, frames: usize, seed: u64) -> Option<SceneSpec> {
    scenario_presets(width, height, frames, seed)
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
}
