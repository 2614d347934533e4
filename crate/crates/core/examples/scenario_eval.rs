//! Runs the tracker on a built-in scenario over a range of seeds and prints
//! the CLEAR-MOT scores of each run.
//!
//! cargo run --release --example scenario_eval -- crossing5 0 20

use std::time::Instant;

use dglmb::metrics::evaluate;
use dglmb::mot_io::{DetectionSequence, FeatureMode};
use dglmb::pipeline::run_sequence;
use dglmb::synthetic::{builtin, generate};
use dglmb::RunConfig;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let name = args.get(1).map_or("crossing5", String::as_str);
    let from: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let to: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(from + 5);
    let no_id_switch = args.iter().any(|a| a == "--no-id-switch");
    let no_features = args.iter().any(|a| a == "--no-features");

    for seed in from..to {
        let spec = builtin(name, seed).expect("unknown scenario");
        let scenario = generate(&spec);
        let seq = DetectionSequence {
            frames: scenario.detections.clone(),
            ..Default::default()
        };
        let mut cfg = RunConfig::default();
        cfg.appearance.mode = if no_features {
            FeatureMode::None
        } else {
            FeatureMode::Synthetic
        };
        cfg.id_switch.enabled = !no_id_switch;
        cfg.filter.clutter_rate = spec.clutter_rate.max(0.1);
        let start = Instant::now();
        let out = run_sequence::<f64>(&cfg, &seq, &scenario.features, Some(spec.frames)).expect("tracking failed");
        if std::env::var_os("SCENARIO_VERBOSE").is_some() {
            for r in out.reports.iter().filter(|r| r.estimated > 0 || r.births > 0) {
                println!("  {r}");
            }
        }
        let report = evaluate(&scenario.ground_truth, &out.records, 0.5);
        let max_hyp = out.reports.iter().map(|r| r.hypotheses).max().unwrap_or(0);
        let recovered: usize = out
            .reports
            .iter()
            .map(|r| r.recovered_occluded + r.recovered_missed)
            .sum();
        println!(
            "seed={seed} mota={:.1} motp={:.1} fp={} fn={} idsw={} ids={} recovered={recovered} max_hyp={max_hyp} secs={:.2}",
            report.mota,
            report.motp,
            report.false_positives,
            report.false_negatives,
            report.id_switches,
            out.records.iter().map(|r| r.track_id).max().unwrap_or(0),
            start.elapsed().as_secs_f64()
        );
    }
}
