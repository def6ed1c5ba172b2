//! Online sequence driver: frames arrive one at a time and each is aligned
//! to its predecessor using only past state.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::config::TmpConfig;
use crate::error::{Error, Result};
use crate::features::{extract_motion_features, extract_texture_features};
use crate::field::{MotionField, Offset};
use crate::grid::{ConfidenceMap, DistanceMap, FeatureMap, Plane};
use crate::oracle::{full_search, scratch_align};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::state::AlignState;
use crate::tmp::{
    confidence_from_distance, finetune, init_motion_field, tmp_align_paths, AlignOutput, Candidate,
    CandidateBuffer, Paths, Provenance,
};
use crate::warp::{backward_warp, fuse_concat, mcwf_weight, srf_weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlignMode {
    /// Both propagation paths with a random-init cold start.
    Tmp,
    /// Random init and refinement at every frame, no inheritance.
    Scratch,
    ObjOnly,
    CamOnly,
    /// Zero motion everywhere.
    NoAlign,
    FullSearch { radius: usize },
}

impl AlignMode {
    pub const NAMES: [&'static str; 6] = ["tmp", "scratch", "obj-only", "cam-only", "no-align", "full-search"];

    pub fn name(&self) -> &'static str {
        match self {
            AlignMode::Tmp => "tmp",
            AlignMode::Scratch => "scratch",
            AlignMode::ObjOnly => "obj-only",
            AlignMode::CamOnly => "cam-only",
            AlignMode::NoAlign => "no-align",
            AlignMode::FullSearch { .. } => "full-search",
        }
    }

    /// Parses a mode name; `radius` is used by `full-search` only.
    pub fn parse(name: &str, radius: usize) -> Option<Self> {
        Some(match name {
            "tmp" => AlignMode::Tmp,
            "scratch" => AlignMode::Scratch,
            "obj-only" => AlignMode::ObjOnly,
            "cam-only" => AlignMode::CamOnly,
            "no-align" => AlignMode::NoAlign,
            "full-search" => AlignMode::FullSearch { radius },
            _ => return None,
        })
    }
}

impl fmt::Display for AlignMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Weighting {
    #[default]
    Mcwf,
    Srf,
    None,
}

impl FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mcwf" => Ok(Weighting::Mcwf),
            "srf" => Ok(Weighting::Srf),
            "none" => Ok(Weighting::None),
            other => Err(format!("unknown weighting '{other}' (expected mcwf, srf or none)")),
        }
    }
}

/// Everything produced for one frame `t >= 1`.
#[derive(Clone, Debug)]
pub struct FrameResult<T> {
    pub index: u64,
    pub field: MotionField<T>,
    pub distance: DistanceMap<T>,
    pub confidence: ConfidenceMap<T>,
    /// Previous texture warped by `field`.
    pub warped: Plane<T>,
    /// `warped` after the fusion weighting.
    pub weighted: Plane<T>,
    /// Weighted previous texture concatenated with the current texture.
    pub fused: FeatureMap<T>,
    pub evaluations: u64,
    pub sweep_distances: Vec<DistanceMap<T>>,
    pub elapsed: Duration,
}

pub struct SequenceAligner<T> {
    cfg: TmpConfig,
    mode: AlignMode,
    weighting: Weighting,
    rng: RngStream,
    state: Option<AlignState<T>>,
}

impl<T: Scalar> SequenceAligner<T> {
    pub fn new(cfg: TmpConfig, mode: AlignMode, weighting: Weighting) -> Result<Self> {
        let cfg = cfg.validate()?;
        Ok(Self {
            rng: RngStream::new(cfg.seed),
            cfg,
            mode,
            weighting,
            state: None,
        })
    }

    pub fn config(&self) -> &TmpConfig {
        &self.cfg
    }

    pub fn state(&self) -> Option<&AlignState<T>> {
        self.state.as_ref()
    }

    /// Consumes the next frame. Returns `None` for the first frame.
    pub fn push(&mut self, frame: &Plane<T>) -> Result<Option<FrameResult<T>>> {
        let start = Instant::now();
        let h0 = extract_motion_features(frame, &self.cfg)?;
        let h1 = extract_texture_features(frame, &self.cfg)?;
        let Some(state) = self.state.as_mut() else {
            let (w, h) = frame.dims();
            self.state = Some(AlignState::new(MotionField::zeros(w, h), h0, h1, 0)?);
            return Ok(None);
        };
        if state.dims() != frame.dims() {
            return Err(Error::dims(state.dims(), frame.dims()));
        }
        let index = state.frame_index + 1;
        let cold = state.frame_index == 0;
        let cfg = &self.cfg;
        let h_prev = &state.prev_motion_features;
        let out = match self.mode {
            AlignMode::Tmp | AlignMode::ObjOnly | AlignMode::CamOnly if cold => {
                init_motion_field(h_prev, &h0, cfg, &self.rng)?
            }
            AlignMode::Tmp => tmp_align_paths(state, &h0, cfg, Paths::BOTH)?,
            AlignMode::ObjOnly => tmp_align_paths(state, &h0, cfg, Paths::OBJ_ONLY)?,
            AlignMode::CamOnly => tmp_align_paths(state, &h0, cfg, Paths::CAM_ONLY)?,
            AlignMode::Scratch => scratch_align(h_prev, &h0, cfg, &self.rng, index)?,
            AlignMode::NoAlign => zero_motion(h_prev, &h0, cfg)?,
            AlignMode::FullSearch { radius } => {
                let s = full_search(h_prev, &h0, radius, cfg)?;
                let confidence = confidence_from_distance(&s.distance, cfg.a);
                AlignOutput {
                    field: s.field,
                    distance: s.distance,
                    confidence,
                    evaluations: s.evaluations,
                    sweep_distances: Vec::new(),
                }
            }
        };

        let warped = backward_warp(&state.prev_texture, &out.field)?;
        let weighted = match self.weighting {
            Weighting::Mcwf => mcwf_weight(&warped, &out.confidence)?,
            Weighting::Srf => srf_weight(&warped, &h1)?,
            Weighting::None => warped.clone(),
        };
        let fused = fuse_concat(&weighted, &h1)?;
        let elapsed = start.elapsed();

        state.advance(out.field.clone(), h0, h1)?;
        Ok(Some(FrameResult {
            index,
            field: out.field,
            distance: out.distance,
            confidence: out.confidence,
            warped: warped.channel(0),
            weighted: weighted.channel(0),
            fused,
            evaluations: out.evaluations,
            sweep_distances: out.sweep_distances,
            elapsed,
        }))
    }

    /// Runs a whole sequence, returning results for frames `1..`.
    pub fn run(&mut self, frames: &[Plane<T>]) -> Result<Vec<FrameResult<T>>> {
        let mut out = Vec::with_capacity(frames.len().saturating_sub(1));
        for f in frames {
            if let Some(r) = self.push(f)? {
                out.push(r);
            }
        }
        Ok(out)
    }
}

fn zero_motion<T: Scalar>(h_prev: &FeatureMap<T>, h_cur: &FeatureMap<T>, cfg: &TmpConfig) -> Result<AlignOutput<T>> {
    let (w, h) = h_cur.dims();
    let mut buf = CandidateBuffer::new(w, h, 1);
    for y in 0..h {
        for x in 0..w {
            buf.push(x, y, Candidate::new(Offset::zero(), Provenance::Inherited));
        }
    }
    let single = TmpConfig {
        sweeps: 1,
        ..cfg.clone()
    };
    let out = finetune(&buf, h_prev, h_cur, &single)?;
    let confidence = confidence_from_distance(&out.distance, cfg.a);
    Ok(AlignOutput {
        field: out.field,
        distance: out.distance,
        confidence,
        evaluations: out.evaluations,
        sweep_distances: out.sweep_distances,
    })
}
