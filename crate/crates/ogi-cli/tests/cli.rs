//! End-to-end command-line checks: determinism of the full pipeline, exit
//! codes, and error surfaces.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ogi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ogi"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn ogi");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("cfg.toml");
    std::fs::write(
        &path,
        "[sim]\nn_days = 55\nm_all = 2400\nm_obs = 130\nburn_in_days = 10\nseed = 11\n\n\
         [prv]\nctau_multiplier = 10.0\n\n\
         [backtest]\nwindow = 40\nvar_min_obs = 30\nrefit_stride = 5\n\n\
         [fit]\nmax_evals = 1500\nmulti_starts = 2\n",
    )
    .unwrap();
    path
}

/// Full pipeline with a fixed seed: every output file is byte-identical
/// across runs (the manifest differs only in its timestamp).
#[test]
fn pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let mut trees = Vec::new();
    for run in 0..2 {
        let root = dir.path().join(format!("run{run}"));
        std::fs::create_dir_all(&root).unwrap();
        let sim = root.join("sim");
        run_ok(ogi()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&sim));
        let rv = root.join("rv.csv");
        run_ok(ogi()
            .args(["prv", "--hf"])
            .arg(sim.join("highfreq.csv"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&rv));
        let fit = root.join("fit.json");
        run_ok(ogi()
            .args(["fit", "--rv"])
            .arg(&rv)
            .arg("--daily")
            .arg(sim.join("daily.csv"))
            .args(["--model", "ogi", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&fit));
        let bt = root.join("bt");
        run_ok(ogi()
            .args(["backtest", "--rv"])
            .arg(&rv)
            .arg("--daily")
            .arg(sim.join("daily.csv"))
            .args(["--models", "garch,rgarch", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&bt));
        trees.push(root);
    }

    for rel in [
        "sim/highfreq.csv",
        "sim/daily.csv",
        "sim/iv.csv",
        "rv.csv",
        "fit.json",
        "bt/forecasts.csv",
        "bt/report.json",
        "bt/report.csv",
        "bt/qq.csv",
        "bt/acf.csv",
    ] {
        let a = std::fs::read(trees[0].join(rel)).unwrap();
        let b = std::fs::read(trees[1].join(rel)).unwrap();
        assert_eq!(a, b, "{rel} differs between identical runs");
    }
    // manifests agree once the timestamp is stripped
    for rel in ["sim/manifest.json", "bt/manifest.json"] {
        let strip = |p: &Path| {
            let mut v: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
            v.as_object_mut().unwrap().remove("timestamp_unix");
            v
        };
        assert_eq!(strip(&trees[0].join(rel)), strip(&trees[1].join(rel)), "{rel}");
    }
}

#[test]
fn prv_rerun_is_idempotent_and_reports_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let sim = dir.path().join("sim");
    run_ok(ogi()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&sim));
    let rv1 = dir.path().join("rv1.csv");
    let rv2 = dir.path().join("rv2.csv");
    for rv in [&rv1, &rv2] {
        run_ok(ogi()
            .args(["prv", "--hf"])
            .arg(sim.join("highfreq.csv"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(rv));
    }
    assert_eq!(std::fs::read(&rv1).unwrap(), std::fs::read(&rv2).unwrap());

    // malformed tick file: the error names the offending row
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "day_index,time,log_price\n1,0.0,0.0\n1,0.1,not-a-number\n").unwrap();
    let out = ogi()
        .args(["prv", "--hf"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3:"), "row number missing in: {err}");
}

#[test]
fn usage_errors_exit_one() {
    let out = ogi().args(["fit", "--nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = ogi()
        .args(["report", "--in", "/nonexistent-dir-xyz"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("empty table") || err.contains("forecasts.csv"), "{err}");
}

#[test]
fn garch_fit_warns_that_rv_is_unused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let sim = dir.path().join("sim");
    run_ok(ogi()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&sim));
    let rv = dir.path().join("rv.csv");
    run_ok(ogi()
        .args(["prv", "--hf"])
        .arg(sim.join("highfreq.csv"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&rv));
    let out = run_ok(ogi()
        .args(["fit", "--rv"])
        .arg(&rv)
        .arg("--daily")
        .arg(sim.join("daily.csv"))
        .args(["--model", "garch", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("garch.json")));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning"), "expected rv-unused warning, got: {err}");
}

#[test]
fn tiny_sample_fit_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let daily = dir.path().join("daily.csv");
    let rv = dir.path().join("rv.csv");
    let mut d = String::from("day_index,open_log_price,close_log_price\n");
    let mut r = String::from("day_index,rv,truncated_windows,m_d\n");
    for i in 1..=5 {
        d.push_str(&format!("{i},0.0,0.01\n"));
        r.push_str(&format!("{i},0.0001,0,390\n"));
    }
    std::fs::write(&daily, d).unwrap();
    std::fs::write(&rv, r).unwrap();
    let out = ogi()
        .args(["fit", "--rv"])
        .arg(&rv)
        .arg("--daily")
        .arg(&daily)
        .args(["--model", "ogi", "--out"])
        .arg(dir.path().join("f.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("floor") || err.contains("days"), "{err}");
}
