//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use tmp_align::bench::{run_bench, BenchOptions};
use tmp_align::evalio::{confidence_stratified_psnr, encode_flo, epe, read_flo, write_flo};
use tmp_align::features::extract_motion_features;
use tmp_align::oracle::full_search;
use tmp_align::rng::RngPath;
use tmp_align::synth::{generate_sequence, preset, Sequence};
use tmp_align::tmp::{init_motion_field, matching_distance, tmp_align_paths, Paths};
use tmp_align::*;

const SEEDS: u64 = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn single_thread<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
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

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sequence(name: &str, size: usize, frames: usize, seed: u64) -> Sequence {
    generate_sequence(&preset(name, size, size, frames, seed).unwrap()).unwrap()
}

fn align(seq: &Sequence, mode: AlignMode, cfg: &TmpConfig) -> Vec<FrameResult<f64>> {
    SequenceAligner::new(cfg.clone(), mode, Weighting::Mcwf)
        .unwrap()
        .run(&seq.frames)
        .unwrap()
}

/// Mean over frames `t >= 2` of the per-frame mean EPE inside `mask(t)`;
/// frames with an empty mask are skipped.
fn warm_epe(seq: &Sequence, results: &[FrameResult<f64>], mask: impl Fn(usize) -> Mask) -> f64 {
    let per_frame: Vec<f64> = results
        .iter()
        .filter(|r| r.index >= 2)
        .filter_map(|r| {
            let t = r.index as usize;
            let m = mask(t);
            (m.count() > 0).then(|| epe(&r.field, &seq.ground_truth[t - 1], &m).unwrap().mean)
        })
        .collect();
    mean(&per_frame)
}

/// Median over seeds of the warm valid-pixel EPE.
fn seeded_epe(name: &str, mode: AlignMode, cfg: &TmpConfig) -> f64 {
    median(
        (0..SEEDS)
            .map(|s| {
                let seq = sequence(name, 64, 8, s);
                let cfg = TmpConfig { seed: s, ..cfg.clone() };
                warm_epe(&seq, &align(&seq, mode, &cfg), |t| seq.valid[t - 1].clone())
            })
            .collect(),
    )
}

fn random_features(w: usize, h: usize, seed: u64) -> FeatureMap64 {
    let rng = RngStream::new(seed);
    let c = features::MOTION_CHANNELS;
    let values = (0..w * h * c)
        .map(|i| rng.uniform(0, (i / c) as u64, RngPath::Init, (i % c) as u64, 7))
        .collect();
    FeatureMap::new(w, h, c, values).unwrap()
}

fn random_field(w: usize, h: usize, limit: f64, seed: u64) -> MotionField64 {
    let rng = RngStream::new(seed);
    MotionField::from_fn(w, h, |x, y| {
        let (a, b) = rng.normal_pair(1, (y * w + x) as u64, RngPath::Obj, 9);
        Offset::new((a * limit / 2.0).clamp(-limit, limit), (b * limit / 2.0).clamp(-limit, limit))
    })
}

fn c1_constant_pan() -> Outcome {
    let seq = sequence("pan", 128, 10, 0);
    let cfg = TmpConfig {
        sigma: 3.0,
        sweeps: 2,
        ..TmpConfig::default()
    };
    let start = Instant::now();
    let results = single_thread(|| align(&seq, AlignMode::Tmp, &cfg));
    let secs = start.elapsed().as_secs_f64();
    let stats: Vec<_> = results
        .iter()
        .filter(|r| r.index >= 2)
        .map(|r| {
            let t = r.index as usize;
            epe(&r.field, &seq.ground_truth[t - 1], &seq.valid[t - 1]).unwrap()
        })
        .collect();
    let worst_mean = stats.iter().map(|s| s.mean).fold(0.0, f64::max);
    let worst_within = stats.iter().map(|s| s.within_1px).fold(1.0, f64::min);
    outcome(
        worst_mean <= 0.05 && worst_within >= 0.99 && secs < 1.0,
        format!(
            "constant pan: worst per-frame mean EPE {worst_mean:.4} px (<= 0.05), \
             worst within-1px {:.2}% (>= 99%), {secs:.3} s single-threaded (< 1 s)",
            100.0 * worst_within
        ),
    )
}

fn c2_oracle_lower_bound() -> Outcome {
    let radius = 8;
    let (w, h) = (32, 32);
    let mut violations = 0;
    let mut checked = 0;
    for i in 0..10 {
        let cfg = TmpConfig {
            seed: i,
            max_offset: Some(radius as f64),
            ..TmpConfig::default()
        };
        let h_prev = random_features(w, h, 100 + i);
        let h_cur = random_features(w, h, 200 + i);
        let state = AlignState::new(
            random_field(w, h, radius as f64, 300 + i),
            h_prev.clone(),
            FeatureMap::zeros(w, h, 1),
            1,
        )
        .unwrap();
        let out = tmp_align_paths(&state, &h_cur, &cfg, Paths::BOTH).unwrap();
        let oracle = full_search(&h_prev, &h_cur, radius, &cfg).unwrap();
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = out.field.get(x, y).to_integer_domain(radius as i64);
                let o = Offset::new(dx as f64, dy as f64);
                let d_tmp = matching_distance(&h_prev, &h_cur, x, y, o, &cfg).unwrap();
                checked += 1;
                if oracle.distance.get(x, y) > d_tmp {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("oracle lower bound: {violations} violations over {checked} pixels (radius 8, 10 random pairs)"),
    )
}

fn c3_oracle_agreement() -> Outcome {
    let radius = 8;
    let seq = sequence("sprite", 32, 2, 0);
    let cfg = TmpConfig {
        sweeps: 8,
        max_offset: Some(radius as f64),
        ..TmpConfig::default()
    };
    let h0 = extract_motion_features(&seq.frames[0], &cfg).unwrap();
    let h1 = extract_motion_features(&seq.frames[1], &cfg).unwrap();
    let init = init_motion_field(&h0, &h1, &cfg, &RngStream::new(cfg.seed)).unwrap();
    let oracle = full_search(&h0, &h1, radius, &cfg).unwrap();
    let unique = oracle.unique_minimizer();
    let (mut agree, mut total) = (0usize, 0usize);
    for y in 0..32 {
        for x in 0..32 {
            if unique.get(x, y) {
                total += 1;
                let a = init.field.get(x, y).to_integer_domain(radius as i64);
                let b = oracle.field.get(x, y).to_integer_domain(radius as i64);
                agree += (a == b) as usize;
            }
        }
    }
    let frac = agree as f64 / total as f64;
    outcome(
        total > 0 && frac >= 0.90,
        format!(
            "oracle agreement: cold start matches full search on {:.2}% of {total} unique-minimizer pixels (>= 90%)",
            100.0 * frac
        ),
    )
}

fn c4_sweep_monotonicity() -> Outcome {
    let (w, h) = (48, 40);
    let mut violations = 0;
    let mut compared = 0;
    for s in 0..SEEDS {
        let cfg = TmpConfig {
            sweeps: 4,
            sigma: 2.0,
            seed: s,
            ..TmpConfig::default()
        };
        let prev = synth::value_noise(w + 8, h + 8, s, 4.0);
        let shift = ((s % 5) as usize, (s % 3) as usize);
        let frame = |ox: usize, oy: usize| Plane::from_fn(w, h, |x, y| prev.get(x + ox, y + oy));
        let h_prev = extract_motion_features(&frame(4, 4), &cfg).unwrap();
        let h_cur = extract_motion_features(&frame(4 - shift.0, 4 - shift.1), &cfg).unwrap();
        let state = AlignState::new(random_field(w, h, 6.0, s), h_prev, FeatureMap::zeros(w, h, 1), 1).unwrap();
        let paths = if s % 2 == 0 { Paths::BOTH } else { Paths::OBJ_ONLY };
        let out = tmp_align_paths(&state, &h_cur, &cfg, paths).unwrap();
        for sweep in 1..=3 {
            let (a, b) = (&out.sweep_distances[sweep - 1], &out.sweep_distances[sweep]);
            for (da, db) in a.values().iter().zip(b.values()) {
                compared += 1;
                if db > da {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("sweep monotonicity: {violations} increases over {compared} per-pixel sweep transitions (20 instances)"),
    )
}

fn confidence_errors(distance: &DistanceMap<f64>, confidence: &ConfidenceMap<f64>, a: f64) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut zero_not_one = 0;
    for (&d, &c) in distance.values().iter().zip(confidence.values()) {
        worst = worst.max((c - (-a * d).exp()).abs());
        if d == 0.0 && c != 1.0 {
            zero_not_one += 1;
        }
    }
    (worst, zero_not_one)
}

fn c5_confidence_consistency() -> Outcome {
    let mut worst = 0.0f64;
    let mut bad_ones = 0;
    let mut runs = 0;
    let mut zeros = 0;
    for (name, a) in [("pan", 1.0), ("occluder", 1.0), ("accel", 7.5)] {
        let seq = sequence(name, 48, 5, 2);
        for mode in [
            AlignMode::Tmp,
            AlignMode::Scratch,
            AlignMode::ObjOnly,
            AlignMode::CamOnly,
            AlignMode::NoAlign,
            AlignMode::FullSearch { radius: 3 },
        ] {
            let cfg = TmpConfig {
                a,
                sigma: 2.0,
                ..TmpConfig::default()
            };
            for r in align(&seq, mode, &cfg) {
                let (e, n) = confidence_errors(&r.distance, &r.confidence, a);
                worst = worst.max(e);
                bad_ones += n;
                zeros += r.distance.values().iter().filter(|&&d| d == 0.0).count();
                runs += 1;
            }
        }
    }
    outcome(
        worst <= 1e-12 && bad_ones == 0 && zeros > 0,
        format!(
            "confidence consistency: max |C - exp(-a D)| = {worst:.2e} (<= 1e-12) over {runs} align runs; \
             {bad_ones} of {zeros} zero-distance pixels with C != 1"
        ),
    )
}

fn c6_inheritance_vs_scratch() -> Outcome {
    let cfg = TmpConfig {
        sigma: 2.0,
        ..TmpConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["pan", "accel"] {
        let tmp = seeded_epe(name, AlignMode::Tmp, &cfg);
        let scratch = seeded_epe(name, AlignMode::Scratch, &cfg);
        pass &= tmp <= scratch;
        parts.push(format!("{name} {tmp:.4} vs {scratch:.4}"));
    }
    outcome(
        pass,
        format!(
            "inheritance vs scratch at {} sweeps, median EPE over 20 seeds (tmp <= scratch): {}",
            cfg.sweeps,
            parts.join(", ")
        ),
    )
}

fn c7_camera_path_gain() -> Outcome {
    let cfg = TmpConfig {
        sigma: 2.0,
        ..TmpConfig::default()
    };
    let mut all = (Vec::new(), Vec::new());
    let mut revealed = (Vec::new(), Vec::new());
    for s in 0..SEEDS {
        let seq = sequence("disocclusion", 64, 8, s);
        let cfg = TmpConfig { seed: s, ..cfg.clone() };
        let both = align(&seq, AlignMode::Tmp, &cfg);
        let obj = align(&seq, AlignMode::ObjOnly, &cfg);
        all.0.push(warm_epe(&seq, &both, |t| seq.valid[t - 1].clone()));
        all.1.push(warm_epe(&seq, &obj, |t| seq.valid[t - 1].clone()));
        revealed.0.push(warm_epe(&seq, &both, |t| seq.revealed(t)));
        revealed.1.push(warm_epe(&seq, &obj, |t| seq.revealed(t)));
    }
    let (all_both, all_obj) = (median(all.0), median(all.1));
    let (rev_both, rev_obj) = (median(revealed.0), median(revealed.1));
    let gain = 1.0 - rev_both / rev_obj;
    outcome(
        all_both <= all_obj && gain >= 0.20,
        format!(
            "camera path gain on disocclusion: median EPE obj+cam {all_both:.4} vs obj-only {all_obj:.4}; \
             revealed region {rev_both:.3} vs {rev_obj:.3} ({:.1}% better, >= 20%)",
            100.0 * gain
        ),
    )
}

fn c8_jitter_direction() -> Outcome {
    let matched = TmpConfig {
        sigma: 1.0,
        ..TmpConfig::default()
    };
    let k2 = seeded_epe("accel", AlignMode::Tmp, &matched);
    let k0 = seeded_epe("accel", AlignMode::Tmp, &TmpConfig { k: 0, ..matched.clone() });
    let tiny = seeded_epe("accel", AlignMode::Tmp, &TmpConfig { sigma: 0.1, ..matched.clone() });
    outcome(
        k2 < k0 && tiny > k2,
        format!(
            "jitter direction on accel, median EPE: k=2 {k2:.4} < k=0 {k0:.4}; sigma=0.1 {tiny:.4} > sigma=1 {k2:.4}"
        ),
    )
}

fn c9_confidence_stratification() -> Outcome {
    let seq = sequence("occluder", 64, 10, 0);
    let cfg = TmpConfig {
        sigma: 2.0,
        distance_mode: DistanceMode::Sum,
        ..TmpConfig::default()
    };
    let results = align(&seq, AlignMode::Tmp, &cfg);
    let mut gaps = Vec::new();
    for r in &results {
        let (high, all) = confidence_stratified_psnr(&seq.frames[r.index as usize], &r.warped, &r.confidence, 0.9).unwrap();
        gaps.push(high - all);
    }
    let avg = mean(&gaps);
    outcome(
        avg >= 1.0,
        format!(
            "confidence stratification on occluder: PSNR(C >= 0.9) - PSNR(all) averages {avg:.2} dB over {} frames (>= 1 dB)",
            gaps.len()
        ),
    )
}

fn c10_relative_latency() -> Outcome {
    let (w, h) = (320, 180);
    let opts = BenchOptions {
        width: w,
        height: h,
        frames: 4,
        modes: vec![AlignMode::Tmp, AlignMode::FullSearch { radius: 15 }],
        reps: 3,
        warmup: 0,
        threads: vec![1],
        cfg: TmpConfig::default(),
        scene_seed: 1,
    };
    let rows = run_bench(&opts).unwrap();
    let tmp = &rows[0];
    let full = &rows[1];
    let exact = (w * h * 31 * 31) as u64;
    let speedup = full.median_ms_per_frame / tmp.median_ms_per_frame;
    outcome(
        full.evals_per_frame == exact && 10 * tmp.evals_per_frame <= full.evals_per_frame && speedup >= 5.0,
        format!(
            "latency at 320x180, 1 thread: full search {} evals/frame (exactly {exact}), tmp {} ({:.1}x fewer, >= 10x); \
             median {:.1} ms vs {:.1} ms ({speedup:.1}x, >= 5x)",
            full.evals_per_frame,
            tmp.evals_per_frame,
            full.evals_per_frame as f64 / tmp.evals_per_frame as f64,
            full.median_ms_per_frame,
            tmp.median_ms_per_frame
        ),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_tmp-align"))
        .args(args)
        .env_remove("TMP_ALIGN_THREADS")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn flo_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            let name = p.file_name()?.to_str()?.to_string();
            name.ends_with(".flo").then(|| (name, std::fs::read(&p).unwrap()))
        })
        .collect();
    files.sort();
    files
}

fn c11_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let input = tmp.path().join("in");
    if !run_cli(&["synth", "--preset", "disocclusion", "--frames", "6", "--size", "80x64", "--seed", "5", "--out", &s(&input)]) {
        return outcome(false, "determinism: synth failed");
    }
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "8", "1", "8"].iter().enumerate() {
        let out = tmp.path().join(format!("out{i}"));
        let ok = run_cli(&[
            "align", "--input", &s(&input), "--out", &s(&out), "--seed", "42", "--sigma", "4", "--threads", threads,
        ]);
        if !ok {
            return outcome(false, format!("determinism: align --threads {threads} failed"));
        }
        outputs.push(flo_bytes(&out));
    }
    let n = outputs[0].len();
    let identical = n == 5 && outputs.iter().all(|o| *o == outputs[0]);
    outcome(
        identical,
        format!("determinism: {n} .flo files byte-identical across --threads 1/8, two runs each: {identical}"),
    )
}

fn c12_format_fidelity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let rng = RngStream::new(12);
    let mut exact = 0;
    for i in 0..100u64 {
        let w = 1 + (rng.uniform(i, 0, RngPath::Init, 0, 0) * 40.0) as usize;
        let h = 1 + (rng.uniform(i, 0, RngPath::Init, 0, 1) * 40.0) as usize;
        let field = MotionField32::from_fn(w, h, |x, y| {
            let (a, b) = rng.normal_pair(i, (y * w + x) as u64, RngPath::Cam, 3);
            Offset::new((a * 50.0) as f32, (b * 1e-3) as f32)
        });
        let path = dir.path().join(format!("f{i}.flo"));
        write_flo(&field, &path).unwrap();
        let back: MotionField32 = read_flo(&path).unwrap();
        let same = back.dims() == field.dims()
            && back
                .offsets()
                .iter()
                .zip(field.offsets())
                .all(|(a, b)| a.dx.to_bits() == b.dx.to_bits() && a.dy.to_bits() == b.dy.to_bits());
        exact += same as usize;
    }
    let golden: [u8; 20] = [
        0x50, 0x49, 0x45, 0x48, 0x01, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x3f, 0x00, 0x00, 0x80,
        0xbe,
    ];
    let one = MotionField64::constant(1, 1, Offset::new(0.5, -0.25));
    let golden_ok = encode_flo(&one).unwrap() == golden;
    outcome(
        exact == 100 && golden_ok,
        format!("format fidelity: {exact}/100 random fields bit-exact after write/read; golden 1x1 file matches: {golden_ok}"),
    )
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 12] = [
        ("1", c1_constant_pan),
        ("2", c2_oracle_lower_bound),
        ("3", c3_oracle_agreement),
        ("4", c4_sweep_monotonicity),
        ("5", c5_confidence_consistency),
        ("6", c6_inheritance_vs_scratch),
        ("7", c7_camera_path_gain),
        ("8", c8_jitter_direction),
        ("9", c9_confidence_stratification),
        ("10", c10_relative_latency),
        ("11", c11_determinism),
        ("12", c12_format_fidelity),
    ];
    let mut failed = 0;
    for (id, check) in criteria {
        let o = check();
        println!("{} [{id:>2}] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
