mod common;

use std::path::Path;

use common::{dir_contents, migflow, run_ok, small_config};

#[test]
fn help_lists_every_subcommand() {
    let out = run_ok(migflow().arg("--help"));
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["synth", "detect", "aggregate", "weight", "calibrate", "privatize", "validate", "pipeline", "diagnose"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    let out = run_ok(migflow().args(["detect", "--help"]));
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in ["--preset", "--epsilon-days", "--assume-sorted", "--config", "--seed", "--workers"] {
        assert!(text.contains(flag), "{flag} missing from detect help");
    }
}

/// Daily presence: `first` for `a` days from 2019-01-01, then `second` for
/// `b` days.
fn stay_rows(user: &str, first: &str, a: i32, second: &str, b: i32) -> String {
    let start = migflow::DayStamp::from_ymd(2019, 1, 1).unwrap();
    let mut s = String::new();
    for d in 0..a + b {
        let c = if d < a { first } else { second };
        s.push_str(&format!("{user},{},{c}\n", start.add_days(d)));
    }
    s
}

#[test]
fn presets_change_event_counts() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces.csv");
    // u1 stays 13 months in MX: a UN migrant but not an NZ one (487 days).
    // u2 stays 17 months in NZ: a migrant under both.
    let body = format!(
        "user_id,date,country\n{}{}",
        stay_rows("u1", "US", 400, "MX", 396),
        stay_rows("u2", "US", 500, "NZ", 520)
    );
    std::fs::write(&traces, body).unwrap();
    let count = |preset: &str| {
        let out_file = dir.path().join(format!("events_{preset}.csv"));
        let out = run_ok(migflow().args(["detect", "--countries", "MX,NZ,US", "--preset", preset]).arg("--traces").arg(&traces).arg("--output").arg(&out_file).arg("--out-dir").arg(dir.path()));
        let rows = std::fs::read_to_string(&out_file).unwrap().lines().count() - 1;
        assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), format!("{rows} events"));
        rows
    };
    assert_eq!(count("un"), 2);
    assert_eq!(count("nz"), 1);
    let nz = std::fs::read_to_string(dir.path().join("events_nz.csv")).unwrap();
    assert!(nz.contains("u2,US,NZ,2020,5"), "{nz}");
}

fn weighted_fixture(dir: &Path) -> std::path::PathBuf {
    std::fs::write(
        dir.join("run.toml"),
        "countries = [\"DE\", \"MX\", \"US\"]\n[aggregate]\nfirst_month = \"2020-01\"\nlast_month = \"2020-03\"\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("weighted.csv"),
        "origin,destination,year,month,value,stage\nMX,US,2020,1,120.5,weighted\nDE,US,2020,2,8.25,weighted\nUS,MX,2020,3,,weighted\n",
    )
    .unwrap();
    dir.join("run.toml")
}

#[test]
fn privatize_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = weighted_fixture(dir.path());
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        run_ok(migflow().arg("--config").arg(&cfg).args(["privatize", "--seed", seed]).arg("--input").arg(dir.path().join("weighted.csv")).arg("--output").arg(&out).arg("--out-dir").arg(dir.path()));
        std::fs::read(out).unwrap()
    };
    let a = run("7", "a.csv");
    let b = run("7", "b.csv");
    let c = run("8", "c.csv");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("US,MX,2020,3,,privatized"), "{text}");
}

#[test]
fn privatize_before_weight_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = weighted_fixture(dir.path());
    std::fs::write(dir.path().join("raw.csv"), "origin,destination,year,month,value,stage\nMX,US,2020,1,12,raw\n").unwrap();
    let out = migflow()
        .arg("--config")
        .arg(&cfg)
        .arg("privatize")
        .arg("--input")
        .arg(dir.path().join("raw.csv"))
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("stage is raw, expected weighted"), "{err}");
}

#[test]
fn bad_invocations_fail() {
    assert!(!migflow().args(["detect", "--no-such-flag"]).output().unwrap().status.success());
    assert!(!migflow().args(["frobnicate"]).output().unwrap().status.success());
    let dir = tempfile::tempdir().unwrap();
    let out = migflow()
        .args(["detect", "--traces", "/nonexistent/traces.csv"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("/nonexistent/traces.csv"));
}

fn pipeline_run(cfg: &Path, out: &Path, workers: &str) -> Vec<(String, Vec<u8>)> {
    run_ok(migflow().arg("--config").arg(cfg).arg("--out-dir").arg(out).args(["--workers", workers, "pipeline"]));
    dir_contents(out)
}

#[test]
fn pipeline_equals_manual_stages_and_ignores_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 5);
    let one = pipeline_run(&cfg, &dir.path().join("p1"), "1");
    let eight = pipeline_run(&cfg, &dir.path().join("p8"), "8");
    let names: Vec<&str> = one.iter().map(|(n, _)| n.as_str()).collect();
    for f in ["events.csv", "flows_raw.csv", "calibration.csv", "flows_weighted.csv", "flows_private.csv", "validation.txt", "diagnostics.csv"] {
        assert!(names.contains(&f), "{f} missing: {names:?}");
    }
    assert!(one == eight, "pipeline output depends on worker count");

    let manual = dir.path().join("manual");
    for stage in ["synth", "detect", "aggregate", "calibrate", "weight", "privatize", "validate", "diagnose"] {
        run_ok(migflow().arg("--config").arg(&cfg).arg("--out-dir").arg(&manual).arg(stage));
    }
    let manual = dir_contents(&manual);
    assert_eq!(
        one.iter().map(|f| &f.0).collect::<Vec<_>>(),
        manual.iter().map(|f| &f.0).collect::<Vec<_>>()
    );
    for ((name, a), (_, b)) in one.iter().zip(&manual) {
        assert!(a == b, "{name} differs between pipeline and manual stages");
    }
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = weighted_fixture(dir.path());
    let run = |env_seed: Option<&str>, name: &str| {
        let out = dir.path().join(name);
        let mut cmd = migflow();
        if let Some(s) = env_seed {
            cmd.env("MIGFLOW_SEED", s);
        }
        run_ok(cmd.arg("--config").arg(&cfg).arg("privatize").arg("--input").arg(dir.path().join("weighted.csv")).arg("--output").arg(&out).arg("--out-dir").arg(dir.path()));
        std::fs::read(out).unwrap()
    };
    let flag = {
        let out = dir.path().join("flag.csv");
        run_ok(migflow().arg("--config").arg(&cfg).args(["privatize", "--seed", "7"]).arg("--input").arg(dir.path().join("weighted.csv")).arg("--output").arg(&out).arg("--out-dir").arg(dir.path()));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run(Some("7"), "env.csv"), flag);
    assert_ne!(run(None, "default.csv"), flag);
}
