//! Command-line surface: `synth`, `align`, `eval` and `bench`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_bench, BenchOptions, BENCH_HEADER};
use crate::config::{ConfigParams, DistanceMode};
use crate::error::Error;
use crate::evalio::{
    confidence_stratified_psnr, epe, read_flo, read_luma, read_mask, visualize_confidence, warping_psnr, write_flo,
    write_luma, write_mask, FrameReport, ReportWriter,
};
use crate::grid::{ConfidenceMap, Mask, Plane};
use crate::pipeline::{AlignMode, SequenceAligner, Weighting};
use crate::synth::{generate_sequence, preset, SceneSpec, PRESET_NAMES};
use crate::warp::backward_warp_plane;

pub const THREADS_ENV: &str = "TMP_ALIGN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tmp-align", version, about = "Temporal motion propagation for online frame alignment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic sequence with ground-truth flow and validity masks.
    Synth(SynthArgs),
    /// Align every frame of a directory to its predecessor.
    Align(AlignArgs),
    /// Score estimated flows against ground truth.
    Eval(EvalArgs),
    /// Measure per-frame latency and distance-evaluation counts.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Scene preset (pan, sprite, disocclusion, accel, occluder).
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    /// JSON scene description instead of a preset.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    frames: usize,
    /// Frame size as WIDTHxHEIGHT.
    #[arg(long, default_value = "128x128", value_parser = parse_size)]
    size: (usize, usize),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TmpArgs {
    /// Jittered candidates per path per pixel.
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    k: i64,
    /// Jitter standard deviation in pixels.
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    sigma: f64,
    /// Confidence decay.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    /// Refinement sweeps per frame (doubled for the first frame pair).
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    sweeps: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Candidate slots per pixel [default: 16].
    #[arg(long)]
    capacity: Option<i64>,
    /// Offset clamp in pixels [default: min(max(3·sigma, 8), frame size)].
    #[arg(long)]
    max_offset: Option<f64>,
    /// Uniform draws per pixel when initializing without a previous field [default: 32].
    #[arg(long)]
    init_draws: Option<i64>,
    /// sum | channel-mean
    #[arg(long, value_parser = parse_distance_mode)]
    distance_mode: Option<DistanceMode>,
    /// Worker threads; falls back to TMP_ALIGN_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

impl TmpArgs {
    fn params(&self) -> ConfigParams {
        ConfigParams {
            k: Some(self.k),
            sigma: Some(self.sigma),
            a: Some(self.a),
            sweeps: Some(self.sweeps),
            capacity: self.capacity,
            max_offset: self.max_offset,
            seed: Some(self.seed),
            distance_mode: self.distance_mode,
            init_draws: self.init_draws,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct AlignArgs {
    /// Directory of PNG frames, processed in lexicographic order.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Only PNGs whose name starts with this prefix are read.
    #[arg(long, default_value = "frame_")]
    prefix: String,
    /// tmp | scratch | obj-only | cam-only | no-align | full-search
    #[arg(long, default_value = "tmp")]
    mode: String,
    /// Search radius for full-search mode.
    #[arg(long, default_value_t = 7)]
    radius: usize,
    /// mcwf | srf | none
    #[arg(long, default_value = "mcwf")]
    weighting: String,
    #[command(flatten)]
    tmp: TmpArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Directory holding flow_NNNN.flo (and optionally conf_NNNN.png, timing.csv).
    #[arg(long)]
    est: PathBuf,
    /// Directory holding gt_NNNN.flo (and optionally mask_NNNN.png, frame_NNNN.png).
    #[arg(long)]
    gt: PathBuf,
    /// Output CSV; defaults to <est>/eval.csv.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Adds warping PSNR over pixels with confidence at or above this value.
    #[arg(long)]
    conf_threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Frame size as WIDTHxHEIGHT.
    #[arg(long, default_value = "320x180", value_parser = parse_size)]
    size: (usize, usize),
    /// Comma-separated modes.
    #[arg(long, default_value = "tmp,full-search", value_delimiter = ',')]
    modes: Vec<String>,
    /// Full-search radius.
    #[arg(long, default_value_t = 15)]
    radius: usize,
    #[arg(long, default_value_t = 4)]
    frames: usize,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    /// Comma-separated thread counts, one row group each.
    #[arg(long = "thread-counts", value_delimiter = ',')]
    thread_counts: Vec<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    tmp: TmpArgs,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("size must look like WIDTHxHEIGHT, got '{s}'"))?;
    let w: usize = w.parse().map_err(|_| format!("bad width in '{s}'"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height in '{s}'"))?;
    if w == 0 || h == 0 {
        return Err("size must be positive".into());
    }
    Ok((w, h))
}

fn parse_distance_mode(s: &str) -> Result<DistanceMode, String> {
    match s {
        "sum" => Ok(DistanceMode::Sum),
        "channel-mean" => Ok(DistanceMode::ChannelMean),
        _ => Err(format!("unknown distance mode '{s}' (expected sum or channel-mean)")),
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Align(a) => cmd_align(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn thread_pool(requested: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let from_env = || {
        std::env::var(THREADS_ENV)
            .ok()
            .map(|v| v.trim().parse::<usize>().map_err(|_| usage(format!("{THREADS_ENV} must be a count, got '{v}'"))))
            .transpose()
    };
    let n = match requested {
        Some(n) => Some(n),
        None => from_env()?,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        if n == 0 {
            return Err(usage("thread count must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Runtime(Error::Config(format!("thread pool: {e}"))))
}

fn create_dir(path: &Path) -> CliResult {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e).into())
}

fn cmd_synth(args: &SynthArgs) -> CliResult {
    let spec: SceneSpec = match (&args.preset, &args.spec) {
        (Some(name), _) => preset(name, args.size.0, args.size.1, args.frames, args.seed).ok_or_else(|| {
            usage(format!("unknown preset '{name}'; available presets: {}", PRESET_NAMES.join(", ")))
        })?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        (None, None) => {
            return Err(usage(format!(
                "one of --preset or --spec is required; available presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let seq = generate_sequence(&spec).map_err(|e| usage(e.to_string()))?;
    create_dir(&args.out)?;
    for (t, frame) in seq.frames.iter().enumerate() {
        write_luma(frame, args.out.join(format!("frame_{t:04}.png")))?;
    }
    for (i, (gt, mask)) in seq.ground_truth.iter().zip(&seq.valid).enumerate() {
        let t = i + 1;
        write_flo(gt, args.out.join(format!("gt_{t:04}.flo")))?;
        write_mask(mask, args.out.join(format!("mask_{t:04}.png")))?;
    }
    println!(
        "wrote {} frames and {} ground-truth fields to {}",
        seq.frames.len(),
        seq.ground_truth.len(),
        args.out.display()
    );
    Ok(())
}

fn list_frames(dir: &Path, prefix: &str) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut frames: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with(prefix) && name.to_ascii_lowercase().ends_with(".png")
        })
        .collect();
    frames.sort();
    Ok(frames)
}

fn cmd_align(args: &AlignArgs) -> CliResult {
    let cfg = args.tmp.params().validate().map_err(|e| usage(e.to_string()))?;
    let mode = AlignMode::parse(&args.mode, args.radius)
        .ok_or_else(|| usage(format!("unknown mode '{}'; expected one of {}", args.mode, AlignMode::NAMES.join(", "))))?;
    let weighting: Weighting = args.weighting.parse().map_err(usage)?;
    let frames = list_frames(&args.input, &args.prefix)?;
    if frames.len() < 2 {
        return Err(usage(format!(
            "{} holds {} '{}*.png' frame(s); at least 2 are required",
            args.input.display(),
            frames.len(),
            args.prefix
        )));
    }
    let pool = thread_pool(args.tmp.threads)?;
    create_dir(&args.out)?;

    let mut aligner = SequenceAligner::<f64>::new(cfg, mode, weighting)?;
    let mut timing = String::from("frame,ms\n");
    pool.install(|| -> CliResult {
        for path in &frames {
            let frame: Plane<f64> = read_luma(path)?;
            let Some(r) = aligner.push(&frame)? else { continue };
            let t = r.index;
            write_flo(&r.field, args.out.join(format!("flow_{t:04}.flo")))?;
            visualize_confidence(&r.confidence, args.out.join(format!("conf_{t:04}.png")))?;
            write_luma(&r.weighted, args.out.join(format!("warp_{t:04}.png")))?;
            timing.push_str(&format!("{t},{:.3}\n", r.elapsed.as_secs_f64() * 1e3));
        }
        Ok(())
    })?;
    let timing_path = args.out.join("timing.csv");
    fs::write(&timing_path, timing).map_err(|e| Error::io(&timing_path, e))?;
    println!("aligned {} frames ({mode}) into {}", frames.len(), args.out.display());
    Ok(())
}

/// Indexed files `<prefix>NNNN.<ext>` in `dir`.
fn indexed_files(dir: &Path, prefix: &str, ext: &str) -> CliResult<BTreeMap<u64, PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    Ok(entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter_map(|p| {
            let name = p.file_name()?.to_str()?;
            let idx = name.strip_prefix(prefix)?.strip_suffix(ext)?.parse().ok()?;
            Some((idx, p))
        })
        .collect())
}

fn read_timing(path: &Path) -> BTreeMap<u64, f64> {
    let Ok(text) = fs::read_to_string(path) else {
        return BTreeMap::new();
    };
    text.lines()
        .skip(1)
        .filter_map(|l| {
            let (f, ms) = l.split_once(',')?;
            Some((f.parse().ok()?, ms.parse().ok()?))
        })
        .collect()
}

fn cmd_eval(args: &EvalArgs) -> CliResult {
    if let Some(t) = args.conf_threshold {
        if !(t > 0.0 && t < 1.0) {
            return Err(usage(format!("--conf-threshold must be in (0, 1), got {t}")));
        }
    }
    let mut flows = indexed_files(&args.est, "flow_", ".flo")?;
    if flows.is_empty() {
        // a ground-truth directory can be scored as an estimate of itself
        flows = indexed_files(&args.est, "gt_", ".flo")?;
    }
    if flows.is_empty() {
        return Err(usage(format!("no flow_NNNN.flo files in {}", args.est.display())));
    }
    let gts = indexed_files(&args.gt, "gt_", ".flo")?;
    for idx in flows.keys() {
        if !gts.contains_key(idx) {
            return Err(usage(format!(
                "missing ground truth for frame {idx}: {} not found",
                args.gt.join(format!("gt_{idx:04}.flo")).display()
            )));
        }
    }
    let timing = read_timing(&args.est.join("timing.csv"));

    let mut rows = Vec::new();
    for (&idx, flow_path) in &flows {
        let est = read_flo::<f64>(flow_path)?;
        let gt = read_flo::<f64>(&gts[&idx])?;
        let (w, h) = gt.dims();
        let mask_path = args.gt.join(format!("mask_{idx:04}.png"));
        let mask = if mask_path.exists() { read_mask(&mask_path)? } else { Mask::all(w, h) };
        let stats = epe(&est, &gt, &mask)?;
        let mut row = FrameReport {
            frame: idx.to_string(),
            mean_epe: Some(stats.mean),
            median_epe: Some(stats.median),
            pct_le_1px: Some(100.0 * stats.within_1px),
            ms_per_frame: timing.get(&idx).copied(),
            ..Default::default()
        };

        let cur_path = args.gt.join(format!("frame_{idx:04}.png"));
        let prev_path = args.gt.join(format!("frame_{:04}.png", idx.saturating_sub(1)));
        let warped = if idx > 0 && cur_path.exists() && prev_path.exists() {
            let cur: Plane<f64> = read_luma(&cur_path)?;
            let prev: Plane<f64> = read_luma(&prev_path)?;
            let warped = backward_warp_plane(&prev, &est)?;
            row.warp_psnr = Some(warping_psnr(&cur, &warped, Some(&mask))?);
            Some((cur, warped))
        } else {
            None
        };

        let conf_path = args.est.join(format!("conf_{idx:04}.png"));
        if conf_path.exists() {
            let conf = ConfidenceMap::from_plane(read_luma::<f64>(&conf_path)?);
            row.mean_conf = Some(conf.plane().mean());
            if let (Some(t), Some((cur, warped))) = (args.conf_threshold, &warped) {
                row.stratified = Some(confidence_stratified_psnr(cur, warped, &conf, t)?);
            }
        }
        rows.push(row);
    }

    let stratified = args.conf_threshold.is_some();
    let mut writer = ReportWriter::new(Vec::new(), stratified)?;
    for r in &rows {
        writer.write(r)?;
    }
    writer.write(&FrameReport::aggregate(&rows, "mean"))?;
    let bytes = writer.finish()?;
    std::io::stdout()
        .write_all(&bytes)
        .map_err(|e| Error::io("<stdout>", e))?;
    let csv_path = args.csv.clone().unwrap_or_else(|| args.est.join("eval.csv"));
    fs::write(&csv_path, &bytes).map_err(|e| Error::io(&csv_path, e))?;
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> CliResult {
    let cfg = args.tmp.params().validate().map_err(|e| usage(e.to_string()))?;
    let modes = args
        .modes
        .iter()
        .map(|m| {
            AlignMode::parse(m.trim(), args.radius)
                .ok_or_else(|| usage(format!("unknown mode '{m}'; expected one of {}", AlignMode::NAMES.join(", "))))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let threads = if !args.thread_counts.is_empty() {
        args.thread_counts.clone()
    } else {
        let pool = thread_pool(args.tmp.threads)?;
        let mut t = vec![1];
        if pool.current_num_threads() > 1 {
            t.push(pool.current_num_threads());
        }
        t
    };
    if threads.contains(&0) {
        return Err(usage("thread counts must be at least 1"));
    }
    let opts = BenchOptions {
        width: args.size.0,
        height: args.size.1,
        frames: args.frames,
        modes,
        reps: args.reps,
        warmup: args.warmup,
        threads,
        cfg,
        scene_seed: 1,
    };
    let rows = run_bench(&opts).map_err(|e| match e {
        Error::Config(m) => usage(m),
        e => CliError::Runtime(e),
    })?;
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(BENCH_HEADER).map_err(Error::from)?;
    for r in &rows {
        out.write_record(r.cells()).map_err(Error::from)?;
    }
    let bytes = out.into_inner().map_err(|e| Error::from(csv::Error::from(e.into_error())))?;
    std::io::stdout()
        .write_all(&bytes)
        .map_err(|e| Error::io("<stdout>", e))?;
    if let Some(path) = &args.csv {
        fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
