#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use migflow::{CountryCode, DayStamp, DetectionParams, LocationTrace, MigrationEvent, ResidenceSegment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cc(s: &str) -> CountryCode {
    CountryCode::new(s).unwrap()
}

/// A random trace over `days` days and the given countries: the user sits in
/// one country for a while, then moves, and is seen on a random share of
/// days.
pub fn random_trace(seed: u64, days: i32, countries: &[&str]) -> LocationTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let activity = rng.random_range(0.3..1.0);
    let stay = rng.random_range(0.8..0.99);
    let mut here = rng.random_range(0..countries.len());
    let mut obs = Vec::new();
    for d in 0..days {
        if !rng.random_bool(stay) {
            here = rng.random_range(0..countries.len());
        }
        if rng.random_bool(activity) {
            obs.push((DayStamp::from_index(d), cc(countries[here])));
        }
    }
    LocationTrace::new(format!("u{seed}"), obs).unwrap()
}

/// Exhaustive segment oracle. Every `(country, start, end)` window is tested
/// directly against the definition:
///
/// * start and end are in-country days,
/// * every pair of consecutive in-country days inside is at most epsilon
///   apart,
/// * no in-country day lies within epsilon before start or after end,
/// * the span and observed share pass the thresholds.
///
/// Overlaps are then removed day by day: a window loses every day from the
/// start of any window that starts after it, and every day up to the end of
/// the overlap with any window that starts before it. Survivors are shrunk
/// to their first and last in-country days and re-checked.
pub fn oracle_segments(trace: &LocationTrace, p: &DetectionParams) -> Vec<ResidenceSegment> {
    let obs = trace.observations();
    let Some(first) = obs.first() else { return Vec::new() };
    let base = first.0;
    let n = obs.last().unwrap().0.days_since(base) + 1;
    let mut at: Vec<Option<CountryCode>> = vec![None; n as usize];
    for (d, c) in obs {
        at[d.days_since(base) as usize] = Some(*c);
    }
    let mut countries: Vec<CountryCode> = obs.iter().map(|o| o.1).collect();
    countries.sort();
    countries.dedup();
    let eps = p.epsilon_days as i32;
    let is = |c: CountryCode, d: i32| d >= 0 && d < n && at[d as usize] == Some(c);

    let mut windows: Vec<(CountryCode, i32, i32)> = Vec::new();
    for &c in &countries {
        for s in 0..n {
            for e in s..n {
                if !is(c, s) || !is(c, e) {
                    continue;
                }
                let inside: Vec<i32> = (s..=e).filter(|&d| is(c, d)).collect();
                if inside.windows(2).any(|w| w[1] - w[0] > eps) {
                    continue;
                }
                if (s - eps..s).any(|d| is(c, d)) || (e + 1..=e + eps).any(|d| is(c, d)) {
                    continue;
                }
                let span = (e - s + 1) as u32;
                if span < p.min_days || (inside.len() as f64) / (span as f64) < p.prop_days {
                    continue;
                }
                windows.push((c, s, e));
            }
        }
    }

    let mut out = Vec::new();
    for &(c, s, e) in &windows {
        let mut keep: Vec<bool> = (0..n).map(|d| d >= s && d <= e).collect();
        for &(c2, s2, e2) in &windows {
            if (c2, s2, e2) == (c, s, e) || s2 > e || s > e2 {
                continue;
            }
            if s2 > s {
                for d in s2..n {
                    keep[d as usize] = false;
                }
            } else {
                for d in 0..=e.min(e2) {
                    keep[d as usize] = false;
                }
            }
        }
        let days: Vec<i32> = (0..n).filter(|&d| keep[d as usize] && is(c, d)).collect();
        let (Some(&a), Some(&b)) = (days.first(), days.last()) else { continue };
        let seg = ResidenceSegment {
            country: c,
            start: base.add_days(a),
            end: base.add_days(b),
            observed_days: days.len() as u32,
        };
        if seg.span_days() >= p.min_days && seg.observed_share() >= p.prop_days {
            out.push(seg);
        }
    }
    out.sort_by_key(|s| s.start);
    out
}

/// Events between adjacent oracle segments in different countries.
pub fn oracle_events(trace: &LocationTrace, p: &DetectionParams) -> Vec<MigrationEvent> {
    let segs = oracle_segments(trace, p);
    let user: Arc<str> = trace.user_id_arc();
    segs.windows(2)
        .filter(|w| w[0].country != w[1].country)
        .filter(|w| {
            let between = w[1].start.days_since(w[0].end) - 1;
            (0..=p.max_intersegment_gap_days as i32).contains(&between)
        })
        .map(|w| MigrationEvent {
            user_id: user.clone(),
            origin: w[0].country,
            destination: w[1].country,
            month: w[1].start.year_month(),
            origin_segment_end: w[0].end,
            destination_segment_start: w[1].start,
        })
        .collect()
}

pub fn oracle_params() -> DetectionParams {
    DetectionParams::new(7, 30, 0.5, 60).unwrap()
}

pub fn migflow() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_migflow"));
    c.env("RUST_LOG", "warn");
    for (k, _) in std::env::vars() {
        if k.starts_with("MIGFLOW_") {
            c.env_remove(k);
        }
    }
    c
}

pub fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn migflow");
    assert!(
        out.status.success(),
        "command failed: {cmd:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// A small synthetic configuration: a few hundred users, fast enough to run
/// end to end many times in tests.
pub fn small_config(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        format!(
            r#"seed = {seed}
countries = ["BD", "BR", "DE", "IN", "JP", "KE", "MX", "NG", "NZ", "PH", "SE", "US"]
out_dir = "out"

[synth]
enabled = true
n_users = 400
activity_prob = 0.8
trip_prob = 0.1

[aggregate]
first_month = "2019-01"
last_month = "2021-12"

[calibrate]
destination = "US"

[diagnose]
epsilons = [30, 60, 90]
"#
        ),
    )
    .unwrap();
    path
}

/// Every regular file in `dir`, name and bytes, sorted by name.
pub fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}
