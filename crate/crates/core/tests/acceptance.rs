//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use common::{cc, dir_contents, migflow, oracle_events, oracle_params, oracle_segments, random_trace, run_ok, small_config};
use migflow::aggregator::{build_flow_table, impute_months};
use migflow::privacy::{cell_noise, solve_sigma};
use migflow::segmenter::{complexity_index, detect_all_events, detect_segments, detect_user_events};
use migflow::synth::{generate_world, ground_truth_flows, ground_truth_reference, SynthConfig, SynthWorld, CALIBRATION_HUB};
use migflow::validation::{pearson, validation_report, AnnualFlows, PairYear, ReferenceFlows};
use migflow::weighting::{
    apply_weights, calibrate_selection_rate, calibration_points, fit_coefficient, income_index, penetration_weights,
    rake, selection_weight, selection_weights, CalibrationPoint, CountryYearStats, DemoCell, Dimension, GridSpec,
    RakingProblem, StatsTable,
};
use migflow::{CellKey, DayStamp, DetectionParams, FlowTable, LocationTrace, MonthRange, Stage, Universe, YearMonth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ym(y: i32, m: u32) -> YearMonth {
    YearMonth::new(y, m).unwrap()
}

fn day(y: i32, m: u32, d: u32) -> DayStamp {
    DayStamp::from_ymd(y, m, d).unwrap()
}

fn sigma_calibration() -> Outcome {
    let t = Instant::now();
    let sigma = solve_sigma(10.0, 1e-9, 30f64.sqrt()).map_err(|e| e.to_string())?;
    let el = t.elapsed();
    check(
        (3.55..=3.57).contains(&sigma) && el < Duration::from_secs(1),
        format!("sigma = {sigma:.6} in {el:?}"),
    )
}

fn noise_magnitude() -> Outcome {
    let t = Instant::now();
    let sigma = 3.56;
    let u = Universe::default_181();
    let months = MonthRange::new(ym(2019, 1), ym(2019, 4)).unwrap();
    let mut draws: Vec<f64> = u
        .pairs()
        .flat_map(|(o, d)| months.iter().map(move |m| CellKey::new(o, d, m)))
        .take(100_000)
        .map(|k| sigma * cell_noise(42, &k))
        .collect();
    assert_eq!(draws.len(), 100_000);
    let within7 = draws.iter().filter(|x| x.round().abs() <= 7.0).count() as f64 / draws.len() as f64;
    draws.sort_by(|a, b| a.total_cmp(b));
    let lo = draws[2_500];
    let hi = draws[97_499];
    let half = (hi - lo) / 2.0;
    let el = t.elapsed();
    check(
        (half - 6.98).abs() <= 0.05 && within7 >= 0.95 && el < Duration::from_secs(5),
        format!("95% interval [{lo:.3}, {hi:.3}], half-width {half:.3}; {:.2}% of rounded draws within 7; {el:?}", within7 * 100.0),
    )
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let p = oracle_params();
    let mut mismatches = 0;
    let mut events = 0;
    for seed in 0..1000 {
        let tr = random_trace(seed, 120, &["AA", "BB", "CC"]);
        let ev = oracle_events(&tr, &p);
        events += ev.len();
        if detect_segments(&tr, &p) != oracle_segments(&tr, &p) || detect_user_events(&tr, &p) != ev {
            mismatches += 1;
        }
    }
    let el = t.elapsed();
    check(
        mismatches == 0 && el < Duration::from_secs(30),
        format!("{mismatches} mismatching traces of 1000 ({events} oracle events) in {el:?}"),
    )
}

fn worked_example() -> Outcome {
    let (a, b) = (cc("AA"), cc("BB"));
    let mut obs = Vec::new();
    let mut d = day(2019, 4, 1);
    while d <= day(2020, 5, 1) {
        obs.push((d, a));
        d = d.add_days(1);
    }
    while d <= day(2021, 6, 30) {
        obs.push((d, b));
        d = d.add_days(1);
    }
    let trace = LocationTrace::new("si", obs).map_err(|e| e.to_string())?;
    let events = detect_user_events(&trace, &DetectionParams::un());
    let got: Vec<String> = events.iter().map(|e| format!("{}->{} {}", e.origin, e.destination, e.month)).collect();
    check(got == ["AA->BB 2020-05"], format!("events {got:?}"))
}

fn complexity() -> Outcome {
    let u = |s: &[&str]| s.iter().map(|c| cc(c)).collect::<Vec<_>>();
    let constant = complexity_index(&u(&["US"; 10]), 5).map_err(|e| e.to_string())?;
    let distinct = complexity_index(&u(&["US", "DE", "MX", "NZ"]), 4).map_err(|e| e.to_string())?;
    let mixed = complexity_index(&u(&["US", "US", "DE", "DE"]), 2).map_err(|e| e.to_string())?;
    let want = (1.0f64 / 3.0).sqrt();
    check(
        constant == 0.0 && (distinct - 1.0).abs() < 1e-12 && (mixed - want).abs() < 1e-12,
        format!("constant {constant}, all-distinct {distinct}, [US,US,DE,DE] {mixed:.15}"),
    )
}

struct Pipeline {
    world: SynthWorld,
    raw: FlowTable,
    income: BTreeMap<migflow::CountryCode, f64>,
}

fn detect_world(cfg: &SynthConfig) -> Pipeline {
    let world = generate_world(cfg).unwrap();
    let events = detect_all_events(&world.traces, &DetectionParams::un());
    let range = world.migration_months;
    let raw = build_flow_table(events.iter().filter(|e| range.contains(e.month)), range, &world.universe).unwrap();
    let income = income_index(&world.gni_pc).unwrap();
    Pipeline { world, raw, income }
}

fn calibrate_years(p: &Pipeline) -> BTreeMap<i32, f64> {
    let hub = cc(CALIBRATION_HUB);
    let reference = ground_truth_reference(&p.world, Some(hub)).unwrap();
    p.world
        .migration_months
        .years()
        .map(|y| {
            let pts = calibration_points(&p.raw, &reference, &p.world.stats, &p.income, hub, y);
            (y, calibrate_selection_rate(&pts, &GridSpec::default()).unwrap().r)
        })
        .collect()
}

fn selection_rate_recovery() -> Outcome {
    let t = Instant::now();
    let p = detect_world(&SynthConfig::world(11, 55_000, 0.9, 0.4));
    let rs = calibrate_years(&p);
    drop(p);
    let el = t.elapsed();

    let r_fit = 1.23;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<CalibrationPoint> = (0..20)
        .map(|i| {
            let income = rng.random_range(0.05..0.95);
            let penetration = rng.random_range(0.1..0.9);
            let raw = rng.random_range(10.0..1000.0);
            CalibrationPoint {
                origin: migflow::Universe::default_181().codes()[i],
                raw,
                reference: selection_weight(income, penetration, r_fit) * raw,
                income,
                penetration,
            }
        })
        .collect();
    let exact = calibrate_selection_rate(&pts, &GridSpec::default()).map_err(|e| e.to_string())?.r;

    let ok_world = rs.values().all(|r| (r - 0.40).abs() <= 0.02);
    check(
        ok_world && exact == r_fit && el < Duration::from_secs(60),
        format!("r by year {rs:?} (r* = 0.40) in {el:?}; exact-fit construction returns {exact}"),
    )
}

fn coefficient_fit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..50);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let beta = fit_coefficient(&x, &y).map_err(|e| e.to_string())?;
        // Closed form accumulated in a different order.
        let (mut sxy, mut sxx) = (0.0f64, 0.0f64);
        for i in (0..n).rev() {
            sxy += x[i] * y[i];
            sxx += x[i] * x[i];
        }
        let want = sxy / sxx;
        worst = worst.max(((beta - want) / want).abs());
    }
    let x: Vec<f64> = (1..=30).map(|v| v as f64 * 0.37).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let two = fit_coefficient(&x, &y).map_err(|e| e.to_string())?;
    check(worst <= 1e-10 && two == 2.0, format!("max relative error {worst:e}; y = 2x gives {two}"))
}

fn ipf() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ages = ["18-34", "35+"];
    let sexes = ["f", "m"];
    let regions = ["r1", "r2", "r3"];
    let mut worst: f64 = 0.0;
    let mut converged = 0;
    for _ in 0..50 {
        let mut cells = BTreeMap::new();
        for a in ages {
            for s in sexes {
                for r in regions {
                    cells.insert(DemoCell::new(a, s, r), rng.random_range(1.0..100.0));
                }
            }
        }
        let total = 10_000.0;
        let mut targets = BTreeMap::new();
        for (dim, cats) in [(Dimension::Age, &ages[..]), (Dimension::Sex, &sexes[..]), (Dimension::Region, &regions[..])] {
            let shares: Vec<f64> = cats.iter().map(|_| rng.random_range(1.0..10.0)).collect();
            let sum: f64 = shares.iter().sum();
            targets.insert(dim, cats.iter().zip(&shares).map(|(c, s)| (c.to_string(), total * s / sum)).collect());
        }
        let res = rake(&RakingProblem { cells, targets: targets.clone(), tolerance: 1e-9, max_iterations: 1000 })
            .map_err(|e| e.to_string())?;
        if !res.converged {
            continue;
        }
        converged += 1;
        for (dim, t) in &targets {
            for (cat, want) in t {
                let got: f64 = res.fitted.iter().filter(|(c, _)| c.category(*dim) == cat).map(|(_, v)| v).sum();
                worst = worst.max(((got - want) / want).abs());
            }
        }
    }

    // Uniform 2x2 seed with margins (30, 70) x (40, 60).
    let mut cells = BTreeMap::new();
    for a in ages {
        for s in sexes {
            cells.insert(DemoCell::new(a, s, "r1"), 1.0);
        }
    }
    let targets = BTreeMap::from([
        (Dimension::Age, BTreeMap::from([("18-34".to_string(), 30.0), ("35+".to_string(), 70.0)])),
        (Dimension::Sex, BTreeMap::from([("f".to_string(), 40.0), ("m".to_string(), 60.0)])),
    ]);
    let res = rake(&RakingProblem { cells, targets, tolerance: 1e-12, max_iterations: 100 }).map_err(|e| e.to_string())?;
    let independence = [("18-34", "f", 12.0), ("18-34", "m", 18.0), ("35+", "f", 28.0), ("35+", "m", 42.0)];
    let uniform_ok = independence
        .iter()
        .all(|&(a, s, v)| res.fitted[&DemoCell::new(a, s, "r1")] == v);
    check(
        converged == 50 && worst <= 1e-6 && uniform_ok,
        format!("{converged}/50 converged, worst marginal deviation {worst:e}; uniform 2x2 equals independence table: {uniform_ok}"),
    )
}

/// Corridor totals over the whole window.
fn corridor_totals(t: &FlowTable) -> BTreeMap<(migflow::CountryCode, migflow::CountryCode), f64> {
    let mut m = BTreeMap::new();
    for (o, d) in t.universe().pairs() {
        m.insert((o, d), 0.0);
    }
    for (k, v) in t.iter() {
        *m.get_mut(&(k.origin, k.destination)).unwrap() += v;
    }
    m
}

fn end_to_end() -> Outcome {
    let t = Instant::now();
    let p = detect_world(&SynthConfig::default_world(20240501));
    let rs = calibrate_years(&p);
    let truth = corridor_totals(&ground_truth_flows(&p.world).unwrap());
    let sel = apply_weights(&p.raw, &selection_weights(&p.world.stats, &p.income, &rs).unwrap()).unwrap();
    let est = corridor_totals(&sel);
    let (x, y): (Vec<f64>, Vec<f64>) = est.keys().map(|k| (est[k], truth[k])).unzip();
    let r = pearson(&x, &y).unwrap_or(f64::NAN);
    let (se, st) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let agg = (se - st).abs() / st;

    let pen = corridor_totals(&apply_weights(&p.raw, &penetration_weights(&p.world.stats)).unwrap());
    let low = |m: &BTreeMap<_, f64>| -> f64 {
        m.iter().filter(|((o, _), _)| p.income[o] < 0.5).map(|(_, v)| v).sum()
    };
    let over = low(&pen) / low(&truth);
    let el = t.elapsed();
    check(
        r >= 0.95 && agg <= 0.10 && over > 1.0 && el < Duration::from_secs(300),
        format!(
            "corridor r = {r:.4}, aggregate error {:.2}% (r by year {rs:?}); penetration weighting / truth on low-income origins = {over:.3}; {el:?}",
            agg * 100.0
        ),
    )
}

fn imputation() -> Outcome {
    let u = Universe::from_strs(&["AA", "BB", "CC"]).unwrap();
    let range = MonthRange::new(ym(2021, 8), ym(2021, 12)).unwrap();
    let mut t = FlowTable::new(Stage::Raw, u.clone(), range);
    for (o, d) in u.pairs() {
        t.set(CellKey::new(o, d, ym(2021, 9)), 100.0).unwrap();
        t.set(CellKey::new(o, d, ym(2021, 10)), 7.0).unwrap();
        t.set(CellKey::new(o, d, ym(2021, 11)), 200.0).unwrap();
    }
    let (out, report) = impute_months(&t, &[ym(2021, 10)]).map_err(|e| e.to_string())?;
    let all = u.pairs().all(|(o, d)| out.value(&CellKey::new(o, d, ym(2021, 10))) == Some(150.0));
    check(
        all && report.cells_imputed == 6 && out.stage() == Stage::Imputed,
        format!("{} cells imputed, every Oct 2021 cell is 150: {all}", report.cells_imputed),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = small_config(dir.path(), 17);
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        run_ok(migflow().arg("--config").arg(&cfg).arg("--out-dir").arg(&out).args(["--workers", workers, "pipeline"]));
        dir_contents(&out)
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "8");
    let bytes: usize = a.iter().map(|f| f.1.len()).sum();
    check(
        !a.is_empty() && a == b && a == c,
        format!("{} files, {bytes} bytes; repeat run identical: {}; 1 vs 8 workers identical: {}", a.len(), a == b, a == c),
    )
}

fn validation_battery() -> Outcome {
    let rows = [
        ("AA", "BB", 10.0, 12.0),
        ("AA", "CC", 0.0, 3.0),
        ("AA", "DD", 5.0, 4.0),
        ("BB", "AA", 8.0, 7.0),
        ("BB", "CC", 2.0, 0.0),
        ("BB", "DD", 0.0, 0.0),
        ("CC", "AA", 20.0, 25.0),
        ("CC", "BB", 1.0, 2.0),
        ("CC", "DD", 4.0, 6.0),
        ("DD", "AA", 3.0, 1.0),
        ("DD", "BB", 6.0, 5.0),
        ("DD", "CC", 9.0, 11.0),
    ];
    let u = Universe::from_strs(&["AA", "BB", "CC", "DD"]).unwrap();
    let mut values = BTreeMap::new();
    let mut reference = ReferenceFlows::new();
    for (o, d, e, r) in rows {
        let k = PairYear::new(cc(o), cc(d), 2020);
        values.insert(k, e);
        reference.insert(k, r, "fixture").unwrap();
    }
    let est = AnnualFlows::from_values(u, BTreeSet::from([2020]), values).unwrap();
    let stats = StatsTable::new(
        [("AA", 1000.0), ("BB", 2000.0), ("CC", 500.0), ("DD", 4000.0)]
            .map(|(c, p)| CountryYearStats::new(cc(c), 2020, p, p / 10.0).unwrap()),
    )
    .unwrap();
    let hdi = BTreeMap::from([(cc("AA"), 0.9), (cc("BB"), 0.8), (cc("CC"), 0.6), (cc("DD"), 0.5)]);
    let rep = validation_report(&est, &reference, &stats, &hdi, Some(2020));

    // Computed independently with numpy from the table above.
    let expected = [
        ("levels", 12, 0.9651191557403752),
        ("log_levels", 9, 0.8506088717110246),
        ("proportion", 12, 0.9522392512892389),
        ("total_outbound", 4, 0.9629007056901173),
        ("total_inbound", 4, 0.9967056888456076),
        ("net_migration", 4, 0.9641560001726679),
    ];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (m, (name, n, r)) in rep.metrics().iter().zip(expected) {
        ok &= m.metric == name && m.n == n;
        let got = m.r.unwrap_or(f64::NAN);
        worst = worst.max((got - r).abs());
    }
    let abs = [rep.abs_error_thousands, rep.abs_error_high_hdi_thousands, rep.abs_error_low_hdi_thousands];
    let abs_ok = abs.iter().zip([0.022, 0.009, 0.013]).all(|(g, w)| (g - w).abs() <= 1e-12);
    check(
        ok && worst <= 1e-9 && abs_ok,
        format!(
            "N per metric {:?}; max |r - hand| {worst:e}; abs error split {abs:?}",
            rep.metrics().iter().map(|m| m.n).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("DP sigma calibration", sigma_calibration),
        ("DP noise magnitude", noise_magnitude),
        ("segment detector oracle equivalence", oracle_equivalence),
        ("worked example", worked_example),
        ("complexity index", complexity),
        ("selection-rate recovery", selection_rate_recovery),
        ("coefficient fit", coefficient_fit),
        ("IPF", ipf),
        ("end-to-end synthetic recovery", end_to_end),
        ("imputation", imputation),
        ("determinism and parallelism", determinism),
        ("validation battery", validation_battery),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
