//! File-to-file stage runners shared by the CLI subcommands and `pipeline`.
//!
//! Every stage reads its inputs from CSV and writes its outputs to CSV, so a
//! chained run and a sequence of manual subcommands produce the same bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::aggregator::{apply_exclusions, build_flow_table, impute_months};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::ingest;
use crate::model::{FlowTable, MigrationEvent, Stage, YearMonth};
use crate::privacy::{privatize as add_noise, PrivacyParams};
use crate::rng::substream_seed;
use crate::segmenter::{detect_all_events, epsilon_sweep, DiagnosticsReport};
use crate::synth::{self, SynthConfig, SynthWorld};
use crate::validation::{migration_intensity, sci_correlation, validation_report, AnnualFlows, ValidationReport};
use crate::weighting::{
    annual_inflows, apply_weights, calibrate_selection_rate, calibration_points, coefficient_weights,
    fit_coefficient, income_index, origin_years, penetration_weights, raking_weights, selection_weights, Scheme,
    WeightModel,
};

pub const TRACES: &str = "traces.csv";
pub const STATS: &str = "stats.csv";
pub const GNI: &str = "gni.csv";
pub const HDI: &str = "hdi.csv";
pub const REFERENCE: &str = "reference.csv";
pub const SCI: &str = "sci.csv";
pub const RAKING_SEEDS: &str = "raking_seeds.csv";
pub const RAKING_TARGETS: &str = "raking_targets.csv";
pub const TRUTH_EVENTS: &str = "ground_truth_events.csv";
pub const TRUTH_FLOWS: &str = "ground_truth_flows.csv";
pub const EVENTS: &str = "events.csv";
pub const RAW_FLOWS: &str = "flows_raw.csv";
pub const CALIBRATION: &str = "calibration.csv";
pub const CALIBRATION_CURVE: &str = "calibration_curve.csv";
pub const WEIGHTED_FLOWS: &str = "flows_weighted.csv";
pub const WEIGHTS: &str = "weights.csv";
pub const PRIVATE_FLOWS: &str = "flows_private.csv";
pub const PRIVACY: &str = "privacy.csv";
pub const VALIDATION: &str = "validation.txt";
pub const VALIDATION_METRICS: &str = "validation_metrics.csv";
pub const DIAGNOSTICS: &str = "diagnostics.csv";

/// Resolves an input dataset: the configured path, else the file `synth`
/// writes into the output directory when synthesis is enabled.
pub fn input(cfg: &Config, given: &Option<PathBuf>, file: &str) -> Result<PathBuf> {
    match given {
        Some(p) => Ok(p.clone()),
        None if cfg.synth.enabled => Ok(cfg.out_dir().join(file)),
        None => Err(Error::Config(format!("no input configured for {file}"))),
    }
}

fn optional_input(cfg: &Config, given: &Option<PathBuf>, file: &str) -> Option<PathBuf> {
    input(cfg, given, file).ok().filter(|p| p.exists())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    f.write_all(text.as_bytes()).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let csv_err = |e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

// ---------------------------------------------------------------- synth

pub fn synth_config(cfg: &Config) -> SynthConfig {
    let s = &cfg.synth;
    let mut c = SynthConfig::world(substream_seed(cfg.seed, "synth"), s.n_users, s.migrant_share, s.r_star);
    c.activity_prob = s.activity_prob;
    c.trip_prob = s.trip_prob;
    c.trip_mean_days = s.trip_mean_days;
    c
}

/// Generates a world and writes every dataset it defines into `dir`.
pub fn synth(cfg: &Config, dir: &Path) -> Result<SynthWorld> {
    create_dir(dir)?;
    let world = synth::generate_world(&synth_config(cfg))?;
    ingest::write_traces(dir.join(TRACES), &world.traces)?;
    ingest::write_stats(dir.join(STATS), &world.stats)?;
    ingest::write_gni(dir.join(GNI), &world.gni_pc)?;
    ingest::write_hdi(dir.join(HDI), &world.hdi)?;
    ingest::write_reference(dir.join(REFERENCE), &synth::ground_truth_reference(&world, None)?)?;
    ingest::write_sci(dir.join(SCI), &world.sci)?;
    ingest::write_raking(dir.join(RAKING_SEEDS), dir.join(RAKING_TARGETS), &world.raking)?;
    ingest::write_events(dir.join(TRUTH_EVENTS), &world.ground_truth_events)?;
    ingest::write_flow_table(dir.join(TRUTH_FLOWS), &synth::ground_truth_flows(&world)?)?;
    info!(
        "synth: {} traces, {} migrations ({} by users)",
        world.traces.len(),
        world.ground_truth_events.len(),
        world.user_events().count()
    );
    Ok(world)
}

// ---------------------------------------------------------------- detect

pub fn detect(cfg: &Config, traces: &Path, out: &Path) -> Result<Vec<MigrationEvent>> {
    let params = cfg.detect.params()?;
    let universe = cfg.universe()?;
    let traces = ingest::read_traces(traces, &universe, cfg.inputs.assume_sorted)?;
    let events = detect_all_events(&traces, &params);
    info!("detect: {} events from {} traces", events.len(), traces.len());
    ingest::write_events(out, &events)?;
    Ok(events)
}

// ---------------------------------------------------------------- aggregate

/// Counts events inside the configured month range, then applies exclusions
/// and month imputation. Events outside the range are dropped with a log
/// line; they belong to a different analysis window.
pub fn aggregate(cfg: &Config, events: &Path, exclusions: Option<&Path>, out: &Path) -> Result<FlowTable> {
    let universe = cfg.universe()?;
    let range = cfg.month_range()?;
    let events = ingest::load_events(events, &universe)?;
    let (inside, outside): (Vec<_>, Vec<_>) = events.iter().partition(|e| range.contains(e.month));
    if !outside.is_empty() {
        info!("aggregate: {} events outside {}..{} dropped", outside.len(), range.first, range.last);
    }
    let mut table = build_flow_table(inside, range, &universe)?;
    if let Some(path) = exclusions {
        let ex = ingest::load_exclusions(path, &universe)?;
        let (t, report) = apply_exclusions(&table, &ex)?;
        info!("aggregate: exclusions removed {} cells ({} migrants)", report.cells_removed, report.value_removed);
        table = t;
    }
    if !cfg.aggregate.impute_months.is_empty() {
        let months = cfg
            .aggregate
            .impute_months
            .iter()
            .map(|m| m.parse())
            .collect::<Result<Vec<YearMonth>>>()?;
        let (t, report) = impute_months(&table, &months)?;
        info!(
            "aggregate: imputed {} cells, {} left missing",
            report.cells_imputed,
            report.left_missing.len()
        );
        table = t;
    }
    ingest::write_flow_table(out, &table)?;
    Ok(table)
}

fn load_stage_table(cfg: &Config, path: &Path, stage: Option<Stage>) -> Result<FlowTable> {
    ingest::load_flow_table(path, &cfg.universe()?, cfg.month_range()?, stage)
}

// ---------------------------------------------------------------- calibrate

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub year: i32,
    pub r: f64,
    pub min_error: f64,
    pub origins: usize,
}

#[derive(Serialize)]
struct CurveRow {
    year: i32,
    r: f64,
    error: f64,
}

pub struct CalibrationInputs {
    pub raw: PathBuf,
    pub reference: PathBuf,
    pub stats: PathBuf,
    pub gni: PathBuf,
}

fn calibration_destination(cfg: &Config) -> Result<crate::model::CountryCode> {
    let d = cfg
        .calibrate
        .destination
        .as_deref()
        .ok_or_else(|| Error::Config("[calibrate] destination is required".into()))?;
    cfg.universe()?.parse(d)
}

/// Fits `r` for each year of the month range against reference inflows to
/// the calibration destination. Years without usable origins are skipped.
pub fn calibrate(cfg: &Config, inputs: &CalibrationInputs, out: &Path, curve_out: &Path) -> Result<Vec<CalibrationRow>> {
    let universe = cfg.universe()?;
    let raw = load_stage_table(cfg, &inputs.raw, None)?;
    raw.require_stage(&[Stage::Raw, Stage::Imputed])?;
    let reference = ingest::load_reference(&inputs.reference, &universe)?;
    let stats = ingest::load_stats(&inputs.stats, &universe)?;
    let income = income_index(&ingest::load_gni(&inputs.gni, &universe)?)?;
    let dest = calibration_destination(cfg)?;
    let grid = cfg.calibrate.grid();
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    for year in raw.range().years() {
        let points = calibration_points(&raw, &reference, &stats, &income, dest, year);
        if points.is_empty() {
            warn!("calibrate: no usable origins for {dest} in {year}");
            continue;
        }
        let res = calibrate_selection_rate(&points, &grid)?;
        info!("calibrate: {year} r = {} (error {:.1})", res.r, res.min_error);
        curve.extend(res.curve.iter().map(|&(r, error)| CurveRow { year, r, error }));
        rows.push(CalibrationRow {
            year,
            r: res.r,
            min_error: res.min_error,
            origins: points.len(),
        });
    }
    write_csv(out, &rows)?;
    write_csv(curve_out, curve)?;
    Ok(rows)
}

pub fn load_calibration(path: &Path) -> Result<BTreeMap<i32, f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = BTreeMap::new();
    for row in rdr.deserialize::<CalibrationRow>() {
        let row = row.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        out.insert(row.year, row.r);
    }
    Ok(out)
}

// ---------------------------------------------------------------- weight

/// Inputs a weighting scheme may need; each is required only by the schemes
/// that use it.
#[derive(Clone, Debug, Default)]
pub struct WeightInputs {
    pub raw: PathBuf,
    pub stats: Option<PathBuf>,
    pub gni: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub raking_seeds: Option<PathBuf>,
    pub raking_targets: Option<PathBuf>,
}

fn need<'a>(p: &'a Option<PathBuf>, what: &str, scheme: Scheme) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("weighting scheme {scheme} needs a {what} file")))
}

#[derive(Serialize)]
struct WeightRow {
    origin: String,
    year: i32,
    weight: f64,
}

pub fn weight(cfg: &Config, inputs: &WeightInputs, out: &Path, weights_out: &Path) -> Result<FlowTable> {
    let universe = cfg.universe()?;
    let raw = load_stage_table(cfg, &inputs.raw, None)?;
    raw.require_stage(&[Stage::Raw, Stage::Imputed])?;
    let scheme = cfg.weight.scheme()?;
    let years: Vec<i32> = raw.range().years().collect();
    let model = match scheme {
        Scheme::Raw => WeightModel::uniform(Scheme::Raw, 1.0, origin_years(&raw))?,
        Scheme::Penetration => penetration_weights(&ingest::load_stats(need(&inputs.stats, "stats", scheme)?, &universe)?),
        Scheme::Selection => {
            let stats = ingest::load_stats(need(&inputs.stats, "stats", scheme)?, &universe)?;
            let income = income_index(&ingest::load_gni(need(&inputs.gni, "gni", scheme)?, &universe)?)?;
            let r_by_year = match cfg.weight.r {
                Some(r) => years.iter().map(|&y| (y, r)).collect(),
                None => load_calibration(need(&inputs.calibration, "calibration", scheme)?)?,
            };
            selection_weights(&stats, &income, &r_by_year)?
        }
        Scheme::Coefficient => {
            let reference = ingest::load_reference(need(&inputs.reference, "reference", scheme)?, &universe)?;
            let dest = calibration_destination(cfg)?;
            let (mut x, mut y) = (Vec::new(), Vec::new());
            for &year in &years {
                for (origin, raw_in) in annual_inflows(&raw, dest, year) {
                    if let Some(r) = reference.get(&crate::validation::PairYear::new(origin, dest, year)) {
                        x.push(raw_in);
                        y.push(r);
                    }
                }
            }
            let beta = fit_coefficient(&x, &y)?;
            info!("weight: coefficient beta = {beta}");
            coefficient_weights(beta, origin_years(&raw))?
        }
        Scheme::Raking => {
            let problems = ingest::load_raking(
                need(&inputs.raking_seeds, "raking seeds", scheme)?,
                need(&inputs.raking_targets, "raking targets", scheme)?,
                &universe,
                cfg.weight.raking_tolerance,
                cfg.weight.raking_max_iterations,
            )?;
            raking_weights(&problems, years.clone())?
        }
    };
    for (c, y) in &model.unweightable {
        warn!("weight: {c} {y} cannot be weighted");
    }
    let weighted = apply_weights(&raw, &model)?;
    ingest::write_flow_table(out, &weighted)?;
    write_csv(
        weights_out,
        model.multipliers.iter().map(|((c, y), w)| WeightRow {
            origin: c.to_string(),
            year: *y,
            weight: *w,
        }),
    )?;
    Ok(weighted)
}

// ---------------------------------------------------------------- privatize

#[derive(Serialize)]
struct PrivacyRow {
    epsilon: f64,
    delta: f64,
    sensitivity: f64,
    sigma: f64,
    seed: u64,
}

pub fn privacy_params(cfg: &Config) -> Result<PrivacyParams> {
    let p = &cfg.privatize;
    match p.sigma {
        Some(sigma) if sigma.is_finite() && sigma > 0.0 => Ok(PrivacyParams {
            epsilon: p.epsilon,
            delta: p.delta,
            sensitivity: p.sensitivity(),
            sigma,
        }),
        Some(sigma) => Err(Error::Config(format!("[privatize] sigma must be > 0, got {sigma}"))),
        None => PrivacyParams::calibrate(p.epsilon, p.delta, p.sensitivity()),
    }
}

/// Adds Gaussian noise to a weighted table. The noise seed is derived from
/// the run seed.
pub fn privatize(cfg: &Config, weighted: &Path, out: &Path, params_out: &Path) -> Result<FlowTable> {
    let table = load_stage_table(cfg, weighted, Some(Stage::Weighted))?;
    let params = privacy_params(cfg)?;
    let seed = substream_seed(cfg.seed, "privatize");
    info!("privatize: sigma = {} (epsilon {}, delta {})", params.sigma, params.epsilon, params.delta);
    let released = add_noise(&table, params.sigma, seed)?;
    ingest::write_flow_table(out, &released)?;
    write_csv(
        params_out,
        [PrivacyRow {
            epsilon: params.epsilon,
            delta: params.delta,
            sensitivity: params.sensitivity,
            sigma: params.sigma,
            seed: cfg.seed,
        }],
    )?;
    Ok(released)
}

// ---------------------------------------------------------------- validate

pub struct ValidationInputs {
    pub table: PathBuf,
    pub reference: PathBuf,
    pub stats: PathBuf,
    pub hdi: PathBuf,
    pub sci: Option<PathBuf>,
}

#[derive(Serialize)]
struct MetricRow<'a> {
    metric: &'a str,
    n: usize,
    r: Option<f64>,
}

/// Writes a text report and a `metric,n,r` CSV. With an SCI file the report
/// also carries the intensity-connectedness correlation.
pub fn validate(cfg: &Config, inputs: &ValidationInputs, out_text: &Path, out_metrics: &Path) -> Result<ValidationReport> {
    let universe = cfg.universe()?;
    let table = load_stage_table(cfg, &inputs.table, None)?;
    table.require_stage(&[Stage::Weighted, Stage::Privatized])?;
    let reference = ingest::load_reference(&inputs.reference, &universe)?;
    let stats = ingest::load_stats(&inputs.stats, &universe)?;
    let hdi = ingest::load_hdi(&inputs.hdi, &universe)?;
    let annual = AnnualFlows::from_table(&table);
    let report = validation_report(&annual, &reference, &stats, &hdi, cfg.validate.year);
    let mut text = report.to_text();
    let mut rows: Vec<MetricRow> = report
        .metrics()
        .iter()
        .map(|m| MetricRow {
            metric: m.metric,
            n: m.n,
            r: m.r,
        })
        .collect();
    if let Some(path) = &inputs.sci {
        let sci = ingest::load_sci(path, &universe)?;
        let year = cfg.validate.year.unwrap_or_else(|| table.range().last.year());
        let intensity = migration_intensity(&annual, &stats, year);
        let (n, r) = sci_correlation(&intensity, &sci, None);
        let shown = r.map_or("n/a".to_string(), |r| format!("{r:.4}"));
        text.push_str(&format!("  sci ({year})          N={n:<6} r={shown}\n"));
        rows.push(MetricRow { metric: "sci", n, r });
    }
    write_text(out_text, &text)?;
    write_csv(out_metrics, rows)?;
    Ok(report)
}

// ---------------------------------------------------------------- diagnose

pub fn diagnose(cfg: &Config, traces: &Path, out: &Path) -> Result<Vec<DiagnosticsReport>> {
    let universe = cfg.universe()?;
    let params = cfg.detect.params()?;
    let traces = ingest::read_traces(traces, &universe, cfg.inputs.assume_sorted)?;
    let reports = epsilon_sweep(&traces, &params, &cfg.diagnose.epsilons, universe.len())?;
    write_csv(out, &reports)?;
    Ok(reports)
}

// ---------------------------------------------------------------- pipeline

/// Runs every stage in order, writing all artifacts into the output
/// directory. Calibration runs only for the selection scheme without a fixed
/// `r`; validation runs only when reference, stats and HDI are available.
pub fn run(cfg: &Config) -> Result<()> {
    let dir = cfg.out_dir();
    create_dir(&dir)?;
    if cfg.synth.enabled {
        synth(cfg, &dir)?;
    }
    let i = &cfg.inputs;
    let traces = input(cfg, &i.traces, TRACES)?;
    detect(cfg, &traces, &dir.join(EVENTS))?;
    aggregate(cfg, &dir.join(EVENTS), i.exclusions.as_deref(), &dir.join(RAW_FLOWS))?;

    let scheme = cfg.weight.scheme()?;
    let stats = optional_input(cfg, &i.stats, STATS);
    let gni = optional_input(cfg, &i.gni, GNI);
    let reference = optional_input(cfg, &i.reference, REFERENCE);
    let mut calibration = None;
    if scheme == Scheme::Selection && cfg.weight.r.is_none() {
        let need = |p: &Option<PathBuf>, what: &str| {
            p.clone()
                .ok_or_else(|| Error::Config(format!("calibration needs a {what} file")))
        };
        calibrate(
            cfg,
            &CalibrationInputs {
                raw: dir.join(RAW_FLOWS),
                reference: need(&reference, "reference")?,
                stats: need(&stats, "stats")?,
                gni: need(&gni, "gni")?,
            },
            &dir.join(CALIBRATION),
            &dir.join(CALIBRATION_CURVE),
        )?;
        calibration = Some(dir.join(CALIBRATION));
    }
    weight(
        cfg,
        &WeightInputs {
            raw: dir.join(RAW_FLOWS),
            stats: stats.clone(),
            gni,
            calibration,
            reference: reference.clone(),
            raking_seeds: optional_input(cfg, &i.raking_seeds, RAKING_SEEDS),
            raking_targets: optional_input(cfg, &i.raking_targets, RAKING_TARGETS),
        },
        &dir.join(WEIGHTED_FLOWS),
        &dir.join(WEIGHTS),
    )?;
    privatize(cfg, &dir.join(WEIGHTED_FLOWS), &dir.join(PRIVATE_FLOWS), &dir.join(PRIVACY))?;

    let hdi = optional_input(cfg, &i.hdi, HDI);
    if let (Some(reference), Some(stats), Some(hdi)) = (reference, stats, hdi) {
        validate(
            cfg,
            &ValidationInputs {
                table: validation_table(cfg, &dir)?,
                reference,
                stats,
                hdi,
                sci: optional_input(cfg, &i.sci, SCI),
            },
            &dir.join(VALIDATION),
            &dir.join(VALIDATION_METRICS),
        )?;
    } else {
        info!("pipeline: no reference, stats or HDI data; skipping validation");
    }
    diagnose(cfg, &traces, &dir.join(DIAGNOSTICS))?;
    Ok(())
}

/// The table `[validate] table` names inside `dir`.
pub fn validation_table(cfg: &Config, dir: &Path) -> Result<PathBuf> {
    match cfg.validate.table.as_deref().unwrap_or("weighted") {
        "weighted" => Ok(dir.join(WEIGHTED_FLOWS)),
        "private" | "privatized" => Ok(dir.join(PRIVATE_FLOWS)),
        other => Err(Error::Config(format!(
            "[validate] table must be weighted or private, got {other:?}"
        ))),
    }
}
