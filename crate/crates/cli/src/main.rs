//! Batch front end: track a detection file, score results against ground
//! truth, or generate a synthetic dataset.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dglmb::metrics::evaluate;
use dglmb::mot_io::{frame_provider, parse_detections, parse_tracks, write_results, FeatureMode};
use dglmb::pipeline::run_sequence;
use dglmb::synthetic::{builtin, generate, ScenarioSpec, BUILTIN_NAMES};
use dglmb::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "dglmb", version, about = "Labeled random finite set multi-object tracker")]
struct Cli {
    /// Print the full default configuration and exit.
    #[arg(long)]
    dump_default_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Track a MOTChallenge detection file.
    Track(TrackArgs),
    /// Score a results file against ground truth.
    Eval(EvalArgs),
    /// Write a synthetic dataset directory.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct TrackArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Detection file; overrides `io.detections`.
    #[arg(long)]
    det: Option<PathBuf>,
    /// Sequence directory holding img1/; turns on image features.
    #[arg(long, conflicts_with = "features")]
    img: Option<PathBuf>,
    /// Precomputed histogram file; turns on feature-file features.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Results file; overrides `io.output`. The run log is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Track single precision instead of double.
    #[arg(long)]
    f32: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Ground-truth file.
    gt: PathBuf,
    /// Results file.
    hyp: PathBuf,
    /// Minimum IOU for a match.
    #[arg(long, default_value_t = 0.5)]
    iou_thresh: f64,
    /// Also write the report as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Scenario spec (TOML).
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario seed. Only detections and clutter depend on it.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = if cli.dump_default_config {
        print!("{}", RunConfig::default().to_toml());
        Ok(())
    } else {
        match cli.command {
            Some(Command::Track(a)) => track(a),
            Some(Command::Eval(a)) => eval(a),
            Some(Command::Generate(a)) => run_generate(a),
            None => {
                eprintln!("error: a subcommand is required (track, eval or generate)");
                return ExitCode::from(2);
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn track(a: TrackArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(det) = a.det {
        cfg.io.detections = Some(det);
    }
    if let Some(out) = a.out {
        cfg.io.output = Some(out);
    }
    if let Some(img) = a.img {
        cfg.appearance.mode = FeatureMode::Images;
        cfg.appearance.path = Some(img);
    }
    if let Some(f) = a.features {
        cfg.appearance.mode = FeatureMode::Features;
        cfg.appearance.path = Some(f);
    }
    let det = cfg
        .io
        .detections
        .clone()
        .context("no detection file; pass --det or set io.detections")?;
    let out = cfg
        .io
        .output
        .clone()
        .context("no results file; pass --out or set io.output")?;
    if cfg.appearance.mode == FeatureMode::Images {
        if let Some(dir) = &cfg.appearance.path {
            if let Some((w, h)) = read_seqinfo(dir) {
                cfg.scene.image_width = w;
                cfg.scene.image_height = h;
            }
            if !dir.join("img1").is_dir() {
                log::warn!(
                    "event=missing_images dir={} action=continue_without_appearance",
                    dir.join("img1").display()
                );
            }
        }
    }
    cfg.validate()?;

    let seq = parse_detections(&det, cfg.io.min_confidence)?;
    let features = frame_provider(cfg.appearance.mode, cfg.appearance.path.as_deref())?;
    let run = if a.f32 {
        run_sequence::<f32>(&cfg, &seq, features.as_ref(), None)?
    } else {
        run_sequence::<f64>(&cfg, &seq, features.as_ref(), None)?
    };
    write_results(&run.records, &out)?;

    let log_path = log_path(&out);
    let mut log = fs::File::create(&log_path).with_context(|| format!("cannot create {}", log_path.display()))?;
    writeln!(
        log,
        "event=start detections={} frames={} dropped_nonpositive={} dropped_low_confidence={} features={:?}",
        det.display(),
        run.reports.len(),
        seq.dropped_nonpositive,
        seq.dropped_low_confidence,
        cfg.appearance.mode
    )?;
    for r in &run.reports {
        writeln!(log, "{r}")?;
    }
    let tracks = run.records.iter().map(|r| r.track_id).max().unwrap_or(0);
    writeln!(log, "event=done records={} tracks={tracks}", run.records.len())?;
    println!(
        "tracked {} frames, {} records, {tracks} tracks -> {} (log {})",
        run.reports.len(),
        run.records.len(),
        out.display(),
        log_path.display()
    );
    Ok(())
}

/// `results.txt` logs to `results.log`.
fn log_path(out: &Path) -> PathBuf {
    out.with_extension("log")
}

/// Image size from a MOTChallenge `seqinfo.ini`, if present.
fn read_seqinfo(dir: &Path) -> Option<(f64, f64)> {
    let text = fs::read_to_string(dir.join("seqinfo.ini")).ok()?;
    let value = |key: &str| {
        text.lines()
            .filter_map(|l| l.split_once('='))
            .find(|(k, _)| k.trim() == key)
            .and_then(|(_, v)| v.trim().parse::<f64>().ok())
    };
    Some((value("imWidth")?, value("imHeight")?))
}

fn eval(a: EvalArgs) -> Result<()> {
    if !(a.iou_thresh > 0.0 && a.iou_thresh <= 1.0) {
        bail!("--iou-thresh must be in (0, 1], got {}", a.iou_thresh);
    }
    let gt = parse_tracks(&a.gt)?;
    let hyp = parse_tracks(&a.hyp)?;
    let report = evaluate(&gt, &hyp, a.iou_thresh);
    print!("{}", report.to_table());
    if let Some(out) = a.out {
        fs::write(&out, report.to_csv()).with_context(|| format!("cannot write {}", out.display()))?;
    }
    Ok(())
}

fn run_generate(a: GenerateArgs) -> Result<()> {
    let mut spec = match (&a.config, &a.scenario) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            ScenarioSpec::from_toml(&text).with_context(|| format!("invalid scenario {}", p.display()))?
        }
        (None, Some(name)) => builtin(name, 0).with_context(|| {
            format!(
                "unknown scenario {name:?}; expected one of {}",
                BUILTIN_NAMES.join(", ")
            )
        })?,
        (None, None) => unreachable!("clap requires one of --config and --scenario"),
    };
    if let Some(seed) = a.seed {
        spec = spec.with_seed(seed);
    }
    let scenario = generate(&spec);
    scenario.write(&a.out)?;
    println!(
        "wrote {} ({} frames, {} targets, {} detections, seed {})",
        a.out.display(),
        spec.frames,
        spec.targets.len(),
        scenario.detection_count(),
        spec.seed
    );
    Ok(())
}
