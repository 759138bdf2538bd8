use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use swe_radar::io::{parse_dump, parse_report};
use swe_radar::metrics::CSV_HEADER;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swe-radar"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_two_target_scene_writes_full_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scene.dump");
    let o = run(&["synth", path(&fixture("fig2.scene")), path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let y = parse_dump(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(y.dim(), (128, 128));
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for p in [&a, &b] {
        let o = run(&["synth", path(&fixture("fig2.scene")), path(p), "--sigma", "0.5", "--seed", "9"]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn empty_scene_gives_zero_dump_and_empty_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("empty.scene");
    fs::write(&scene, "SWESCENE 1\nnum_fast_time = 32\nnum_elements = 16\n").unwrap();
    let dump = dir.path().join("empty.dump");
    assert!(run(&["synth", path(&scene), path(&dump)]).status.success());
    let y = parse_dump(&fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(y.energy(), 0.0);

    let report = dir.path().join("r.txt");
    let o = run(&["estimate", path(&dump), "--report", path(&report)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(parse_report(&fs::read_to_string(&report).unwrap()).unwrap().rows.is_empty());
}

#[test]
fn malformed_scene_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("bad.scene");
    fs::write(&scene, "SWESCENE 1\ntarget = 1.0, 10\ntarget = 1.0\n").unwrap();
    let o = run(&["synth", path(&scene), path(&dir.path().join("x"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("v2.scene");
    fs::write(&scene, "SWESCENE 2\n").unwrap();
    let o = run(&["synth", path(&scene), path(&dir.path().join("x"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_flag_is_usage_error() {
    assert_eq!(run(&["estimate", "x", "--method", "esprit"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn estimate_two_target_scene_recovers_both() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("scene.dump");
    assert!(run(&["synth", path(&fixture("fig2.scene")), path(&dump)]).status.success());
    let report = dir.path().join("scene.report");
    let o = run(&["estimate", path(&dump), "--method", "proposed", "--report", path(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_report(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.rows.len(), 2);
    for (range, aoa) in [(2.02, 30.0), (0.97, -45.0)] {
        assert!(
            r.rows.iter().any(|row| (row.range_m - range).abs() <= 0.02 && (row.aoa_deg - aoa).abs() <= 1.0),
            "{range} m, {aoa} deg not in {:?}",
            r.rows
        );
    }
}

#[test]
fn every_method_runs_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("scene.dump");
    assert!(run(&["synth", path(&fixture("fig2.scene")), path(&dump), "--snr-db", "10"]).status.success());
    for m in ["music2d", "omp2d", "rotation"] {
        let o = run(&["estimate", path(&dump), "--method", m, "--num-sources", "2"]);
        assert!(o.status.success(), "{m}: {}", String::from_utf8_lossy(&o.stderr));
        let r = parse_report(&String::from_utf8(o.stdout).unwrap()).unwrap();
        assert!(!r.rows.is_empty());
    }
    let o = run(&["estimate", path(&dump), "--gate-policy", "time-threshold", "--gamma", "0.5", "--oversample", "4"]);
    assert!(o.status.success());
}

#[test]
fn map_exports_power_csv() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("scene.dump");
    assert!(run(&["synth", path(&fixture("fig2.scene")), path(&dump)]).status.success());
    let o = run(&["map", path(&dump), "--compensate-deg", "-45"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("u,v,power\n"));
    assert_eq!(text.lines().count(), 1 + 128 * 128);
}

fn small_spec(dir: &Path) -> PathBuf {
    let text = fs::read_to_string(fixture("fig4.spec"))
        .unwrap()
        .replace("snr_db = -20, -15, -10, -5, 0, 5, 10, 15, 20", "snr_db = -10, 10")
        .replace("methods = proposed, music2d, omp2d, rotation", "methods = proposed, omp2d, rotation");
    let p = dir.join("small.spec");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn bench_csv_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let mut outs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("t{threads}.csv"));
        let o = run(&[
            "bench", path(&spec), "--out", path(&out), "--trials", "1", "--threads", threads, "--no-timing",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(fs::read_to_string(&out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let lines: Vec<&str> = outs[0].lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 3);
}

#[test]
fn bench_appends_timing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let o = run(&["bench", path(&spec), "--trials", "2", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let timing: Vec<&str> = text.lines().filter(|l| l.starts_with("timing:")).collect();
    assert_eq!(timing.len(), 3);
    for line in timing {
        let rt: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rt > 0.0);
    }
}

#[test]
fn shipped_sweep_spec_parses() {
    let f = swe_radar::io::parse_bench_spec(&fs::read_to_string(fixture("fig4.spec")).unwrap()).unwrap();
    assert_eq!(f.spec.snr_db.first(), Some(&-20.0));
    assert_eq!(f.spec.snr_db.last(), Some(&20.0));
    assert_eq!(f.spec.methods.len(), 4);
}

#[test]
fn sweep_proposed_hit_rate_is_monotone_in_snr() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("fig4.spec"))
        .unwrap()
        .replace("methods = proposed, music2d, omp2d, rotation", "methods = proposed");
    let spec = dir.path().join("p.spec");
    fs::write(&spec, text).unwrap();
    let o = run(&["bench", path(&spec), "--trials", "20", "--no-timing"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rates: Vec<f64> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(7).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rates.len(), 9);
    // one target out of 3 * 20 is sampling noise on the plateau
    let slack = 1.0 / 60.0 + 1e-6;
    assert!(rates.windows(2).all(|w| w[1] >= w[0] - slack), "{rates:?}");
    assert!(rates[8] > rates[0]);
}
