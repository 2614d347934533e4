//! Drives the `dglmb` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dglmb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dglmb")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = dglmb(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn default_config_dump_loads_back() {
    let text = ok(&["--dump-default-config"]);
    assert!(text.contains("[filter]") && text.contains("[reappearance]"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, &text).unwrap();
    let det = dir.path().join("det.txt");
    fs::write(&det, "").unwrap();
    ok(&["track", "--config", p(&cfg), "--det", p(&det), "--out", p(&dir.path().join("o.txt"))]);
}

#[test]
fn unknown_config_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[filter]\ndetection_probability = 0.9\n").unwrap();
    let out = dglmb(&["track", "--config", p(&cfg), "--det", "x", "--out", "y"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml") && err.contains("detection_probability"), "{err}");
}

#[test]
fn empty_detections_give_empty_results() {
    let dir = tempfile::tempdir().unwrap();
    let det = dir.path().join("det.txt");
    fs::write(&det, "").unwrap();
    let out = dir.path().join("res.txt");
    ok(&["track", "--det", p(&det), "--out", p(&out)]);
    assert_eq!(fs::read_to_string(&out).unwrap(), "");
    let log = fs::read_to_string(dir.path().join("res.log")).unwrap();
    assert!(log.contains("frames=0"));
    assert!(!log.contains("\nframe="));
}

#[test]
fn generate_is_deterministic_and_seed_scoped() {
    let dir = tempfile::tempdir().unwrap();
    let spec = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/crossing5.toml");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    ok(&["generate", "--config", spec, "--out", p(&a)]);
    ok(&["generate", "--config", spec, "--out", p(&b)]);
    ok(&["generate", "--config", spec, "--out", p(&c), "--seed", "11"]);
    for f in ["det/det.txt", "gt/gt.txt", "features.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::read(a.join("gt/gt.txt")).unwrap(), fs::read(c.join("gt/gt.txt")).unwrap());
    assert_ne!(fs::read(a.join("det/det.txt")).unwrap(), fs::read(c.join("det/det.txt")).unwrap());
}

#[test]
fn builtin_scenario_tracks_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("lane");
    ok(&["generate", "--scenario", "lane_swap", "--out", p(&data)]);
    let res = dir.path().join("res.txt");
    ok(&[
        "track",
        "--det",
        p(&data.join("det/det.txt")),
        "--features",
        p(&data.join("features.txt")),
        "--out",
        p(&res),
    ]);
    let csv = dir.path().join("eval.csv");
    let table = ok(&["eval", p(&data.join("gt/gt.txt")), p(&res), "--out", p(&csv)]);
    assert!(table.contains("MOTA"));
    let csv = fs::read_to_string(csv).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6], "0", "id switches: {csv}");
}

#[test]
fn eval_of_truth_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.txt");
    fs::write(&gt, "1,1,10,20,30,40,1,-1,-1,-1\n2,1,12,20,30,40,1,-1,-1,-1\n").unwrap();
    let table = ok(&["eval", p(&gt), p(&gt)]);
    assert!(table.lines().next().unwrap().ends_with("100.0"), "{table}");
}

#[test]
fn eval_counts_one_switch() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.txt");
    let hyp = dir.path().join("hyp.txt");
    let rows = |id_after: u32| {
        (1..=10)
            .map(|f| format!("{f},{},10,20,30,40,1,-1,-1,-1\n", if f >= 6 { id_after } else { 1 }))
            .collect::<String>()
    };
    fs::write(&gt, rows(1)).unwrap();
    fs::write(&hyp, rows(2)).unwrap();
    let csv = dir.path().join("e.csv");
    ok(&["eval", p(&gt), p(&hyp), "--iou-thresh", "0.5", "--out", p(&csv)]);
    let csv = fs::read_to_string(csv).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "90.000");
    assert_eq!(row[6], "1");
}

#[test]
fn missing_images_degrade_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let det = dir.path().join("det.txt");
    fs::write(
        &det,
        "1,-1,100,200,50,100,0.9,-1,-1,-1\n2,-1,102,200,50,100,0.9,-1,-1,-1\n3,-1,104,200,50,100,0.9,-1,-1,-1\n",
    )
    .unwrap();
    let res = dir.path().join("res.txt");
    let out = dglmb(&[
        "track",
        "--det",
        p(&det),
        "--img",
        p(&dir.path().join("nowhere")),
        "--out",
        p(&res),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing_images"));
    assert!(!fs::read_to_string(res).unwrap().is_empty());
}

#[test]
fn subcommand_required() {
    assert!(!dglmb(&[]).status.success());
}
