use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use migflow::config::Config;
use migflow::pipeline::{self, CalibrationInputs, ValidationInputs, WeightInputs};

/// Estimate international migration flows from daily location traces.
#[derive(Debug, Parser)]
#[command(name = "migflow", version, about)]
struct Cli {
    /// TOML run configuration. Flags override its keys.
    #[arg(long, short, global = true, env = "MIGFLOW_CONFIG")]
    config: Option<PathBuf>,

    /// Top-level seed; every stage derives its own stream from it.
    #[arg(long, global = true, env = "MIGFLOW_SEED")]
    seed: Option<u64>,

    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, env = "MIGFLOW_WORKERS")]
    workers: Option<usize>,

    /// Directory for stage artifacts.
    #[arg(long, global = true, env = "MIGFLOW_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Comma-separated country universe, replacing the configured one.
    #[arg(long, global = true, value_delimiter = ',', env = "MIGFLOW_COUNTRIES")]
    countries: Option<Vec<String>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic world and write its datasets.
    Synth(SynthArgs),
    /// Detect migration events in traces.
    Detect(DetectArgs),
    /// Count events into a monthly flow table.
    Aggregate(AggregateArgs),
    /// Fit the selection constant r for each year.
    Calibrate(CalibrateArgs),
    /// Apply a weighting scheme to a raw flow table.
    Weight(WeightArgs),
    /// Add calibrated Gaussian noise to a weighted table.
    Privatize(PrivatizeArgs),
    /// Compare estimates with reference statistics.
    Validate(ValidateArgs),
    /// Run all stages as configured.
    Pipeline,
    /// Segment diagnostics over a sweep of epsilon values.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Traced platform users.
    #[arg(long)]
    n_users: Option<usize>,
    /// Expected share of traced users who migrate.
    #[arg(long)]
    migrant_share: Option<f64>,
    /// True selection constant.
    #[arg(long)]
    r_star: Option<f64>,
    /// Daily observation probability.
    #[arg(long)]
    activity_prob: Option<f64>,
    /// Probability of a trip abroad per 30 days.
    #[arg(long)]
    trip_prob: Option<f64>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Traces CSV (user_id,date,country).
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Rows are grouped by user in ascending id order and sorted by date.
    #[arg(long)]
    assume_sorted: bool,
    /// Parameter preset: un, nz or short.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    epsilon_days: Option<u32>,
    #[arg(long)]
    min_days: Option<u32>,
    #[arg(long)]
    prop_days: Option<f64>,
    #[arg(long)]
    max_gap_days: Option<u32>,
    /// Events CSV to write.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AggregateArgs {
    /// Events CSV.
    #[arg(long)]
    events: Option<PathBuf>,
    /// First month of the table (YYYY-MM).
    #[arg(long)]
    first_month: Option<String>,
    /// Last month of the table (YYYY-MM).
    #[arg(long)]
    last_month: Option<String>,
    /// Exclusions CSV.
    #[arg(long)]
    exclusions: Option<PathBuf>,
    /// Month to impute from its neighbours; repeatable.
    #[arg(long = "impute-month")]
    impute_months: Vec<String>,
    /// Flow table CSV to write.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Raw flow table CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    gni: Option<PathBuf>,
    /// Destination whose reference inflows anchor the fit.
    #[arg(long)]
    destination: Option<String>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Per-year r CSV to write.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Error curve CSV to write.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WeightArgs {
    /// Raw flow table CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// raw, penetration, raking, coefficient or selection.
    #[arg(long)]
    scheme: Option<String>,
    /// Fixed selection constant for every year.
    #[arg(long)]
    r: Option<f64>,
    /// Per-year r CSV written by `calibrate`.
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    gni: Option<PathBuf>,
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Destination used to fit the coefficient scheme.
    #[arg(long)]
    destination: Option<String>,
    #[arg(long)]
    raking_seeds: Option<PathBuf>,
    #[arg(long)]
    raking_targets: Option<PathBuf>,
    /// Weighted flow table CSV to write.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Per-origin-year weights CSV to write.
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PrivatizeArgs {
    /// Weighted flow table CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// L2 sensitivity.
    #[arg(long)]
    sensitivity: Option<f64>,
    /// Fixed noise scale instead of solving for it.
    #[arg(long)]
    sigma: Option<f64>,
    /// Released flow table CSV to write.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Privacy parameter CSV to write.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Weighted or privatized flow table CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    hdi: Option<PathBuf>,
    /// Social connectedness CSV.
    #[arg(long)]
    sci: Option<PathBuf>,
    /// Validate a single year.
    #[arg(long)]
    year: Option<i32>,
    /// Text report to write.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Metrics CSV to write.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    /// Traces CSV.
    #[arg(long)]
    traces: Option<PathBuf>,
    #[arg(long)]
    assume_sorted: bool,
    /// Comma-separated epsilon values in days.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<u32>>,
    #[arg(long)]
    preset: Option<String>,
    /// Diagnostics CSV to write.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_some<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => Config::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set_some(&mut cfg.workers, cli.workers);
    set_some(&mut cfg.out_dir, cli.out_dir);
    set_some(&mut cfg.countries, cli.countries);

    let workers = cfg.workers.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .context("starting worker pool")?;

    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let out = |flag: Option<PathBuf>, name: &str| flag.unwrap_or_else(|| dir.join(name));

    match cli.command {
        Command::Synth(a) => {
            set(&mut cfg.synth.n_users, a.n_users);
            set(&mut cfg.synth.migrant_share, a.migrant_share);
            set(&mut cfg.synth.r_star, a.r_star);
            set(&mut cfg.synth.activity_prob, a.activity_prob);
            set(&mut cfg.synth.trip_prob, a.trip_prob);
            pipeline::synth(&cfg, &dir)?;
        }
        Command::Detect(a) => {
            set_some(&mut cfg.inputs.traces, a.traces);
            cfg.inputs.assume_sorted |= a.assume_sorted;
            set_some(&mut cfg.detect.preset, a.preset);
            set_some(&mut cfg.detect.epsilon_days, a.epsilon_days);
            set_some(&mut cfg.detect.min_days, a.min_days);
            set_some(&mut cfg.detect.prop_days, a.prop_days);
            set_some(&mut cfg.detect.max_intersegment_gap_days, a.max_gap_days);
            let traces = pipeline::input(&cfg, &cfg.inputs.traces, pipeline::TRACES)?;
            let events = pipeline::detect(&cfg, &traces, &out(a.output, pipeline::EVENTS))?;
            println!("{} events", events.len());
        }
        Command::Aggregate(a) => {
            set_some(&mut cfg.aggregate.first_month, a.first_month);
            set_some(&mut cfg.aggregate.last_month, a.last_month);
            set_some(&mut cfg.inputs.exclusions, a.exclusions);
            if !a.impute_months.is_empty() {
                cfg.aggregate.impute_months = a.impute_months;
            }
            let events = a.events.unwrap_or_else(|| dir.join(pipeline::EVENTS));
            let t = pipeline::aggregate(
                &cfg,
                &events,
                cfg.inputs.exclusions.as_deref(),
                &out(a.output, pipeline::RAW_FLOWS),
            )?;
            println!("{} non-zero cells, total {}", t.nonzero_count(), t.total());
        }
        Command::Calibrate(a) => {
            set_some(&mut cfg.calibrate.destination, a.destination);
            set(&mut cfg.calibrate.grid_min, a.grid_min);
            set(&mut cfg.calibrate.grid_max, a.grid_max);
            set(&mut cfg.calibrate.grid_step, a.grid_step);
            let inputs = CalibrationInputs {
                raw: a.input.unwrap_or_else(|| dir.join(pipeline::RAW_FLOWS)),
                reference: pick(&cfg, a.reference, &cfg.inputs.reference, pipeline::REFERENCE)?,
                stats: pick(&cfg, a.stats, &cfg.inputs.stats, pipeline::STATS)?,
                gni: pick(&cfg, a.gni, &cfg.inputs.gni, pipeline::GNI)?,
            };
            let rows = pipeline::calibrate(
                &cfg,
                &inputs,
                &out(a.output, pipeline::CALIBRATION),
                &out(a.curve, pipeline::CALIBRATION_CURVE),
            )?;
            for r in rows {
                println!("{} r = {}", r.year, r.r);
            }
        }
        Command::Weight(a) => {
            set_some(&mut cfg.calibrate.destination, a.destination);
            set(&mut cfg.weight.scheme, a.scheme);
            set_some(&mut cfg.weight.r, a.r);
            let opt = |flag: Option<PathBuf>, given: &Option<PathBuf>, name: &str| {
                flag.or_else(|| pipeline::input(&cfg, given, name).ok())
            };
            let inputs = WeightInputs {
                raw: a.input.unwrap_or_else(|| dir.join(pipeline::RAW_FLOWS)),
                stats: opt(a.stats, &cfg.inputs.stats, pipeline::STATS),
                gni: opt(a.gni, &cfg.inputs.gni, pipeline::GNI),
                calibration: a.calibration.or_else(|| Some(dir.join(pipeline::CALIBRATION))),
                reference: opt(a.reference, &cfg.inputs.reference, pipeline::REFERENCE),
                raking_seeds: opt(a.raking_seeds, &cfg.inputs.raking_seeds, pipeline::RAKING_SEEDS),
                raking_targets: opt(a.raking_targets, &cfg.inputs.raking_targets, pipeline::RAKING_TARGETS),
            };
            let t = pipeline::weight(&cfg, &inputs, &out(a.output, pipeline::WEIGHTED_FLOWS), &out(a.weights, pipeline::WEIGHTS))?;
            println!("weighted total {}", t.total());
        }
        Command::Privatize(a) => {
            set(&mut cfg.privatize.epsilon, a.epsilon);
            set(&mut cfg.privatize.delta, a.delta);
            set_some(&mut cfg.privatize.sensitivity, a.sensitivity);
            set_some(&mut cfg.privatize.sigma, a.sigma);
            let input = a.input.unwrap_or_else(|| dir.join(pipeline::WEIGHTED_FLOWS));
            pipeline::privatize(&cfg, &input, &out(a.output, pipeline::PRIVATE_FLOWS), &out(a.params, pipeline::PRIVACY))?;
        }
        Command::Validate(a) => {
            set_some(&mut cfg.validate.year, a.year);
            let inputs = ValidationInputs {
                table: match a.input {
                    Some(p) => p,
                    None => pipeline::validation_table(&cfg, &dir)?,
                },
                reference: pick(&cfg, a.reference, &cfg.inputs.reference, pipeline::REFERENCE)?,
                stats: pick(&cfg, a.stats, &cfg.inputs.stats, pipeline::STATS)?,
                hdi: pick(&cfg, a.hdi, &cfg.inputs.hdi, pipeline::HDI)?,
                sci: a
                    .sci
                    .or_else(|| pipeline::input(&cfg, &cfg.inputs.sci, pipeline::SCI).ok().filter(|p| p.exists())),
            };
            let text_out = out(a.output, pipeline::VALIDATION);
            pipeline::validate(&cfg, &inputs, &text_out, &out(a.metrics, pipeline::VALIDATION_METRICS))?;
            print!("{}", std::fs::read_to_string(&text_out)?);
        }
        Command::Pipeline => pipeline::run(&cfg)?,
        Command::Diagnose(a) => {
            set_some(&mut cfg.inputs.traces, a.traces);
            cfg.inputs.assume_sorted |= a.assume_sorted;
            set_some(&mut cfg.detect.preset, a.preset);
            set(&mut cfg.diagnose.epsilons, a.epsilons);
            let traces = pipeline::input(&cfg, &cfg.inputs.traces, pipeline::TRACES)?;
            for r in pipeline::diagnose(&cfg, &traces, &out(a.output, pipeline::DIAGNOSTICS))? {
                println!(
                    "eps={:<4} segments={:<7} modal>=90%={:.3} top2<20%={:.3} complexity={:.4} migrants={}",
                    r.epsilon_days,
                    r.n_segments,
                    r.share_modal_ge_90,
                    r.share_top2_diff_lt_20,
                    r.mean_complexity,
                    r.n_migrants_detected
                );
            }
        }
    }
    Ok(())
}

fn pick(cfg: &Config, flag: Option<PathBuf>, given: &Option<PathBuf>, name: &str) -> migflow::Result<PathBuf> {
    match flag {
        Some(p) => Ok(p),
        None => pipeline::input(cfg, given, name),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
