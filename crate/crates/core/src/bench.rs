//! Latency harness: median per-frame wall time and exact distance-evaluation
//! counts per alignment mode, with speedups relative to full search.

use std::time::Duration;

use crate::config::TmpConfig;
use crate::error::{Error, Result};
use crate::grid::Plane;
use crate::pipeline::{AlignMode, SequenceAligner, Weighting};
use crate::synth::{generate_sequence, preset};

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub width: usize,
    pub height: usize,
    /// Sequence length; only frames with index ≥ 2 are timed.
    pub frames: usize,
    pub modes: Vec<AlignMode>,
    pub reps: usize,
    pub warmup: usize,
    pub threads: Vec<usize>,
    pub cfg: TmpConfig,
    pub scene_seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            width: 320,
            height: 180,
            frames: 4,
            modes: vec![AlignMode::Tmp, AlignMode::FullSearch { radius: 15 }],
            reps: 3,
            warmup: 1,
            threads: vec![1],
            cfg: TmpConfig::default(),
            scene_seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub mode: AlignMode,
    pub threads: usize,
    pub median_ms_per_frame: f64,
    /// Largest per-frame evaluation count over the timed frames.
    pub evals_per_frame: u64,
    pub time_speedup: Option<f64>,
    pub eval_speedup: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Timed frames of one pass over `frames`: (elapsed, evaluations) per frame with index ≥ 2.
pub fn time_sequence(frames: &[Plane<f64>], mode: AlignMode, cfg: &TmpConfig) -> Result<Vec<(Duration, u64)>> {
    let mut aligner = SequenceAligner::new(cfg.clone(), mode, Weighting::Mcwf)?;
    let mut out = Vec::new();
    for f in frames {
        if let Some(r) = aligner.push(f)? {
            if r.index >= 2 {
                out.push((r.elapsed, r.evaluations));
            }
        }
    }
    Ok(out)
}

pub fn run_bench(opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    if opts.frames < 3 {
        return Err(Error::Config("benchmark needs at least 3 frames".into()));
    }
    if opts.reps == 0 {
        return Err(Error::Config("benchmark needs at least one repetition".into()));
    }
    let scene = preset("pan", opts.width, opts.height, opts.frames, opts.scene_seed).expect("pan preset exists");
    let frames = generate_sequence(&scene)?.frames;

    let mut rows = Vec::new();
    for &threads in &opts.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let mut group = Vec::new();
        for &mode in &opts.modes {
            let (times, evals) = pool.install(|| -> Result<_> {
                for _ in 0..opts.warmup {
                    time_sequence(&frames, mode, &opts.cfg)?;
                }
                let mut times = Vec::new();
                let mut evals = 0;
                for _ in 0..opts.reps {
                    for (t, e) in time_sequence(&frames, mode, &opts.cfg)? {
                        times.push(t.as_secs_f64() * 1e3);
                        evals = evals.max(e);
                    }
                }
                Ok((times, evals))
            })?;
            group.push(BenchRow {
                mode,
                threads,
                median_ms_per_frame: median(times),
                evals_per_frame: evals,
                time_speedup: None,
                eval_speedup: None,
            });
        }
        let reference = group
            .iter()
            .find(|r| matches!(r.mode, AlignMode::FullSearch { .. }))
            .map(|r| (r.median_ms_per_frame, r.evals_per_frame));
        if let Some((ms, evals)) = reference {
            for r in &mut group {
                r.time_speedup = Some(ms / r.median_ms_per_frame);
                r.eval_speedup = Some(evals as f64 / r.evals_per_frame as f64);
            }
        }
        rows.extend(group);
    }
    Ok(rows)
}

pub const BENCH_HEADER: [&str; 6] = [
    "mode",
    "threads",
    "median_ms_per_frame",
    "evals_per_frame",
    "speedup_time",
    "speedup_evals",
];

impl BenchRow {
    pub fn cells(&self) -> [String; 6] {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.2}"));
        let mode = match self.mode {
            AlignMode::FullSearch { radius } => format!("full-search(r={radius})"),
            m => m.name().to_string(),
        };
        [
            mode,
            self.threads.to_string(),
            format!("{:.3}", self.median_ms_per_frame),
            self.evals_per_frame.to_string(),
            opt(self.time_speedup),
            opt(self.eval_speedup),
        ]
    }
}
