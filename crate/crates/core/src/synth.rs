//! Synthetic worlds with known ground truth.
//!
//! A world has a handful of countries, each with a population, income,
//! platform penetration and HDI. Population-level migrations are drawn per
//! corridor and month from a Poisson distribution. Each migrant is a
//! platform user with probability
//!
//! ```text
//! q = income * penetration + (1 - income) * r_star
//! ```
//!
//! so poorer origins send over-represented platform users whenever
//! `r_star > penetration`, and selection-rate weights with `r = r_star` are
//! unbiased for the population totals. Daily traces are generated only for
//! platform users: every migrant user plus enough stayers to reach
//! `n_users`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Geometric, LogNormal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    CellKey, CountryCode, DayStamp, FlowTable, LocationTrace, MigrationEvent, MonthRange, Stage, Universe,
    YearMonth,
};
use crate::rng::{indexed_substream, substream};
use crate::validation::{PairYear, ReferenceFlows, UnorderedPair};
use crate::weighting::{income_index, CountryYearStats, DemoCell, Dimension, RakingProblem, StatsTable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthCountry {
    pub code: String,
    pub population: f64,
    pub gni_pc: f64,
    /// Platform users / population.
    pub penetration: f64,
    pub hdi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub origin: String,
    pub destination: String,
    /// Expected population-level migrants per month.
    pub monthly_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub countries: Vec<SynthCountry>,
    pub corridors: Vec<Corridor>,
    /// Platform users with traces (migrants and stayers).
    pub n_users: usize,
    /// First and last day of every trace.
    pub trace_start: String,
    pub trace_end: String,
    /// Months in which migrations happen. Must leave at least `min_days` of
    /// trace on both sides for migrations to be detectable.
    pub first_migration_month: String,
    pub last_migration_month: String,
    pub r_star: f64,
    /// Probability a user is observed on a given day.
    pub activity_prob: f64,
    /// Probability of starting a trip abroad in a 30-day period.
    pub trip_prob: f64,
    pub trip_mean_days: f64,
    pub trip_max_days: u32,
    pub seed: u64,
}

pub const CALIBRATION_HUB: &str = "US";

/// Default world parameters: 12 countries spanning the income range.
const DEFAULT_COUNTRIES: [(&str, f64, f64, f64); 12] = [
    // code, population, gni per capita, hdi
    ("US", 331.0e6, 64_000.0, 0.921),
    ("DE", 83.0e6, 54_500.0, 0.942),
    ("SE", 10.4e6, 54_000.0, 0.947),
    ("NZ", 5.1e6, 42_000.0, 0.937),
    ("JP", 125.0e6, 42_300.0, 0.925),
    ("MX", 128.0e6, 17_900.0, 0.758),
    ("BR", 213.0e6, 14_400.0, 0.754),
    ("PH", 111.0e6, 8_900.0, 0.699),
    ("IN", 1_390.0e6, 6_600.0, 0.633),
    ("NG", 211.0e6, 4_800.0, 0.535),
    ("KE", 54.0e6, 4_500.0, 0.575),
    ("BD", 166.0e6, 5_500.0, 0.661),
];

impl SynthConfig {
    /// The default world: 12 countries, 10 000 users, migrations over three
    /// years (2019-2021) with a year of trace on either side, `r* = 0.4`.
    /// Users are seen on 80% of days and take occasional short trips.
    pub fn default_world(seed: u64) -> Self {
        let mut c = Self::world(seed, 10_000, 0.4, 0.4);
        c.activity_prob = 0.8;
        c.trip_prob = 0.1;
        c
    }

    /// A world with `n_users` traced users of which roughly `migrant_share`
    /// are migrants, and corridor rates drawn from `seed`. Inflows to the
    /// US, the default calibration destination, are boosted so that one
    /// destination carries enough signal to fit `r`. Users are seen every day
    /// and never travel.
    pub fn world(seed: u64, n_users: usize, migrant_share: f64, r_star: f64) -> Self {
        let max_gni = DEFAULT_COUNTRIES.iter().map(|c| c.2).fold(0.0, f64::max);
        let countries: Vec<SynthCountry> = DEFAULT_COUNTRIES
            .iter()
            .map(|&(code, population, gni_pc, hdi)| SynthCountry {
                code: code.to_string(),
                population,
                gni_pc,
                penetration: 0.15 + 0.65 * gni_pc / max_gni,
                hdi,
            })
            .collect();
        let mut cfg = Self {
            countries,
            corridors: Vec::new(),
            n_users,
            trace_start: "2018-01-01".into(),
            trace_end: "2022-12-31".into(),
            first_migration_month: "2019-01".into(),
            last_migration_month: "2021-12".into(),
            r_star,
            activity_prob: 1.0,
            trip_prob: 0.0,
            trip_mean_days: 10.0,
            trip_max_days: 45,
            seed,
        };
        cfg.corridors = cfg.draw_corridors(migrant_share, Some(CALIBRATION_HUB));
        cfg
    }

    /// Gravity-like corridor rates with log-normal noise, scaled so the
    /// expected number of migrant users is `migrant_share * n_users`. When
    /// `hub` is given, inflows to that country are boosted tenfold.
    pub fn draw_corridors(&self, migrant_share: f64, hub: Option<&str>) -> Vec<Corridor> {
        let mut rng = substream(self.seed, "synth/corridors");
        let noise = LogNormal::new(0.0, 1.0).expect("valid lognormal");
        let months = month_count(&self.first_migration_month, &self.last_migration_month).unwrap_or(1) as f64;
        let max_gni = self.countries.iter().map(|c| c.gni_pc).fold(0.0, f64::max);
        let mut raw = Vec::new();
        for o in &self.countries {
            for d in &self.countries {
                if o.code == d.code {
                    continue;
                }
                let mut w = (o.population * d.population).powf(0.3) * noise.sample(&mut rng);
                if hub == Some(d.code.as_str()) {
                    w *= 10.0;
                }
                let income = o.gni_pc / max_gni;
                let q = income * o.penetration + (1.0 - income) * self.r_star;
                raw.push((o.code.clone(), d.code.clone(), w, q));
            }
        }
        let expected_users: f64 = raw.iter().map(|(_, _, w, q)| w * q * months).sum();
        let scale = migrant_share * self.n_users as f64 / expected_users;
        raw.into_iter()
            .map(|(origin, destination, w, _)| Corridor {
                origin,
                destination,
                monthly_rate: w * scale,
            })
            .collect()
    }

    pub fn universe(&self) -> Result<Universe> {
        Universe::from_strs(&self.countries.iter().map(|c| c.code.as_str()).collect::<Vec<_>>())
    }
}

fn month_count(first: &str, last: &str) -> Result<usize> {
    let f: YearMonth = first.parse()?;
    let l: YearMonth = last.parse()?;
    Ok(MonthRange::new(f, l)?.len())
}

/// A generated world and its ground truth.
#[derive(Clone, Debug)]
pub struct SynthWorld {
    pub universe: Universe,
    pub migration_months: MonthRange,
    /// Platform users' traces, ordered by user id.
    pub traces: Vec<LocationTrace>,
    /// Every migration, by users and non-users alike.
    pub ground_truth_events: Vec<MigrationEvent>,
    /// Poisson draw per corridor-month, as recorded during generation.
    pub corridor_draws: BTreeMap<CellKey, u64>,
    pub stats: StatsTable,
    pub gni_pc: BTreeMap<CountryCode, f64>,
    pub hdi: BTreeMap<CountryCode, f64>,
    pub raking: BTreeMap<CountryCode, RakingProblem>,
    pub sci: BTreeMap<UnorderedPair, f64>,
    pub r_star: f64,
}

impl SynthWorld {
    /// Ground-truth events by platform users only.
    pub fn user_events(&self) -> impl Iterator<Item = &MigrationEvent> {
        self.ground_truth_events.iter().filter(|e| e.user_id.starts_with('u'))
    }

    pub fn trace_years(&self) -> Vec<i32> {
        let first = self.traces.iter().filter_map(|t| t.observations().first()).map(|o| o.0.year()).min();
        let last = self.traces.iter().filter_map(|t| t.observations().last()).map(|o| o.0.year()).max();
        match (first, last) {
            (Some(a), Some(b)) => (a..=b).collect(),
            _ => Vec::new(),
        }
    }
}

/// User id, origin, and destination with arrival day for migrants.
type Plan = (Arc<str>, CountryCode, Option<(CountryCode, DayStamp)>);

struct Migrant {
    origin: CountryCode,
    destination: CountryCode,
    day: DayStamp,
    is_user: bool,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be in [0, 1], got {p}")))
    }
}

pub fn generate_world(config: &SynthConfig) -> Result<SynthWorld> {
    check_prob("activity_prob", config.activity_prob)?;
    check_prob("trip_prob", config.trip_prob)?;
    let universe = config.universe()?;
    if universe.len() != config.countries.len() {
        return Err(Error::InvalidParameter("duplicate country in synthetic config".into()));
    }
    let trace_start: DayStamp = config.trace_start.parse()?;
    let trace_end: DayStamp = config.trace_end.parse()?;
    if trace_end < trace_start {
        return Err(Error::InvalidParameter("trace_end before trace_start".into()));
    }
    let migration_months = MonthRange::new(
        config.first_migration_month.parse()?,
        config.last_migration_month.parse()?,
    )?;
    if migration_months.first.first_day() <= trace_start
        || migration_months.last.next().first_day() > trace_end
    {
        return Err(Error::InvalidParameter("migration months must lie strictly inside the trace period".into()));
    }

    let mut by_code: BTreeMap<CountryCode, &SynthCountry> = BTreeMap::new();
    for c in &config.countries {
        check_prob("penetration", c.penetration)?;
        if !(c.population > 0.0 && c.gni_pc > 0.0) {
            return Err(Error::InvalidParameter(format!("{}: population and income must be > 0", c.code)));
        }
        by_code.insert(c.code.parse()?, c);
    }
    let gni_pc: BTreeMap<CountryCode, f64> = by_code.iter().map(|(k, c)| (*k, c.gni_pc)).collect();
    let income = income_index(&gni_pc)?;
    let user_share: BTreeMap<CountryCode, f64> = by_code
        .iter()
        .map(|(k, c)| (*k, income[k] * c.penetration + (1.0 - income[k]) * config.r_star))
        .collect();
    for (k, q) in &user_share {
        if !(*q > 0.0 && *q <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{k}: platform share among migrants {q} outside (0, 1]; lower r_star"
            )));
        }
    }

    // Population-level migrations.
    let mut rng = substream(config.seed, "synth/migrations");
    let mut corridor_draws = BTreeMap::new();
    let mut migrants = Vec::new();
    for cor in &config.corridors {
        let origin = universe.parse(&cor.origin)?;
        let destination = universe.parse(&cor.destination)?;
        if origin == destination || !(cor.monthly_rate.is_finite() && cor.monthly_rate >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bad corridor {}->{} rate {}",
                cor.origin, cor.destination, cor.monthly_rate
            )));
        }
        if cor.monthly_rate > by_code[&origin].population {
            return Err(Error::InvalidParameter(format!(
                "corridor {}->{} rate exceeds origin population",
                cor.origin, cor.destination
            )));
        }
        for month in migration_months.iter() {
            let n = if cor.monthly_rate > 0.0 {
                Poisson::new(cor.monthly_rate).expect("positive rate").sample(&mut rng) as u64
            } else {
                0
            };
            corridor_draws.insert(CellKey::new(origin, destination, month), n);
            let first = month.first_day();
            let len = month.next().first_day().days_since(first);
            for _ in 0..n {
                migrants.push(Migrant {
                    origin,
                    destination,
                    day: first.add_days(rng.random_range(0..len)),
                    is_user: rng.random_bool(user_share[&origin]),
                });
            }
        }
    }

    let n_migrant_users = migrants.iter().filter(|m| m.is_user).count();
    if n_migrant_users > config.n_users {
        return Err(Error::InvalidParameter(format!(
            "{n_migrant_users} migrant users exceed n_users = {}",
            config.n_users
        )));
    }

    // Stayers, spread over countries in proportion to platform users.
    let mut rng = substream(config.seed, "synth/stayers");
    let codes: Vec<CountryCode> = by_code.keys().copied().collect();
    let weights: Vec<f64> = codes.iter().map(|k| by_code[k].population * by_code[k].penetration).collect();
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let stayers: Vec<CountryCode> = (0..config.n_users - n_migrant_users)
        .map(|_| codes[pick.sample(&mut rng)])
        .collect();

    let mut ground_truth_events = Vec::with_capacity(migrants.len());
    let mut plans: Vec<Plan> = Vec::new();
    let (mut next_user, mut next_non_user) = (0usize, 0usize);
    for m in &migrants {
        let id: Arc<str> = if m.is_user {
            next_user += 1;
            Arc::from(format!("u{next_user:07}"))
        } else {
            next_non_user += 1;
            Arc::from(format!("n{next_non_user:08}"))
        };
        ground_truth_events.push(MigrationEvent {
            user_id: id.clone(),
            origin: m.origin,
            destination: m.destination,
            month: m.day.year_month(),
            origin_segment_end: m.day.add_days(-1),
            destination_segment_start: m.day,
        });
        if m.is_user {
            plans.push((id, m.origin, Some((m.destination, m.day))));
        }
    }
    for home in stayers {
        next_user += 1;
        plans.push((Arc::from(format!("u{next_user:07}")), home, None));
    }

    let traces: Vec<LocationTrace> = plans
        .par_iter()
        .enumerate()
        .map(|(i, (id, home, mv))| {
            user_trace(config, &codes, i as u64, id.clone(), *home, *mv, trace_start, trace_end)
        })
        .collect::<Result<_>>()?;

    let years: Vec<i32> = (trace_start.year()..=trace_end.year()).collect();
    let mut stats_rows = Vec::new();
    for (k, c) in &by_code {
        for &y in &years {
            stats_rows.push(CountryYearStats::new(*k, y, c.population, (c.population * c.penetration).round())?);
        }
    }
    let stats = StatsTable::new(stats_rows)?;
    let hdi = by_code.iter().map(|(k, c)| (*k, c.hdi)).collect();
    let raking = raking_problems(config.seed, &by_code);
    let sci = synthetic_sci(config.seed, &by_code, &corridor_draws);

    Ok(SynthWorld {
        universe,
        migration_months,
        traces,
        ground_truth_events,
        corridor_draws,
        stats,
        gni_pc,
        hdi,
        raking,
        sci,
        r_star: config.r_star,
    })
}

#[allow(clippy::too_many_arguments)]
fn user_trace(
    config: &SynthConfig,
    codes: &[CountryCode],
    index: u64,
    id: Arc<str>,
    home: CountryCode,
    mv: Option<(CountryCode, DayStamp)>,
    start: DayStamp,
    end: DayStamp,
) -> Result<LocationTrace> {
    let mut rng = indexed_substream(config.seed, "synth/trace", index);
    let trip_start_p = config.trip_prob / 30.0;
    let trip_len = Geometric::new(1.0 / config.trip_mean_days.max(1.0))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut obs = Vec::new();
    let mut trip: Option<(CountryCode, u32)> = None;
    let mut day = start;
    while day <= end {
        let residence = match mv {
            Some((dest, move_day)) if day >= move_day => dest,
            _ => home,
        };
        if trip.is_none() && trip_start_p > 0.0 && codes.len() > 1 && rng.random_bool(trip_start_p) {
            let len = (1 + trip_len.sample(&mut rng) as u32).min(config.trip_max_days.max(1));
            let mut abroad = codes[rng.random_range(0..codes.len())];
            while abroad == residence {
                abroad = codes[rng.random_range(0..codes.len())];
            }
            trip = Some((abroad, len));
        }
        let here = match &mut trip {
            Some((c, left)) => {
                let c = *c;
                *left -= 1;
                if *left == 0 {
                    trip = None;
                }
                c
            }
            None => residence,
        };
        if config.activity_prob >= 1.0 || rng.random_bool(config.activity_prob) {
            obs.push((day, here));
        }
        day = day.add_days(1);
    }
    LocationTrace::new(id, obs)
}

/// Two age groups × two sexes × two regions. Platform users and population
/// are split with different random shares, so raking has work to do.
fn raking_problems(seed: u64, countries: &BTreeMap<CountryCode, &SynthCountry>) -> BTreeMap<CountryCode, RakingProblem> {
    let mut rng = substream(seed, "synth/raking");
    let mut out = BTreeMap::new();
    for (k, c) in countries {
        let mut split = |total: f64| -> [f64; 2] {
            let a = rng.random_range(0.3..0.7);
            [total * a, total * (1.0 - a)]
        };
        let users = c.population * c.penetration;
        let age_u = split(users);
        let mut cells = BTreeMap::new();
        for (ai, age) in ["18-34", "35+"].iter().enumerate() {
            let sex_u = split(age_u[ai]);
            for (si, sex) in ["f", "m"].iter().enumerate() {
                let reg_u = split(sex_u[si]);
                for (ri, region) in ["r1", "r2"].iter().enumerate() {
                    cells.insert(DemoCell::new(age, sex, region), reg_u[ri].round());
                }
            }
        }
        let mut targets = BTreeMap::new();
        for (dim, cats) in [
            (Dimension::Age, ["18-34", "35+"]),
            (Dimension::Sex, ["f", "m"]),
            (Dimension::Region, ["r1", "r2"]),
        ] {
            let [a, b] = split(c.population);
            targets.insert(dim, BTreeMap::from([(cats[0].to_string(), a), (cats[1].to_string(), b)]));
        }
        out.insert(
            *k,
            RakingProblem {
                cells,
                targets,
                tolerance: 1e-9,
                max_iterations: 1000,
            },
        );
    }
    out
}

/// Connectedness proportional to bilateral migration intensity with
/// log-normal noise.
fn synthetic_sci(
    seed: u64,
    countries: &BTreeMap<CountryCode, &SynthCountry>,
    draws: &BTreeMap<CellKey, u64>,
) -> BTreeMap<UnorderedPair, f64> {
    let mut rng = substream(seed, "synth/sci");
    let noise = LogNormal::new(0.0, 0.5).expect("valid lognormal");
    let mut totals: BTreeMap<UnorderedPair, f64> = BTreeMap::new();
    for (k, n) in draws {
        *totals.entry(UnorderedPair::new(k.origin, k.destination)).or_default() += *n as f64;
    }
    totals
        .into_iter()
        .map(|(p, m)| {
            let pop = countries[&p.first()].population * countries[&p.second()].population;
            (p, 1e15 * (m + 1.0) / pop * noise.sample(&mut rng))
        })
        .collect()
}

/// Exact population-level flows over the migration months.
pub fn ground_truth_flows(world: &SynthWorld) -> Result<FlowTable> {
    let mut t = FlowTable::new(Stage::Raw, world.universe.clone(), world.migration_months);
    for e in &world.ground_truth_events {
        t.add(CellKey::new(e.origin, e.destination, e.month), 1.0)?;
    }
    Ok(t)
}

/// Annual ground-truth flows as reference data, optionally only into one
/// destination.
pub fn ground_truth_reference(world: &SynthWorld, destination: Option<CountryCode>) -> Result<ReferenceFlows> {
    let mut annual: BTreeMap<PairYear, f64> = BTreeMap::new();
    for e in &world.ground_truth_events {
        if destination.is_some_and(|d| d != e.destination) {
            continue;
        }
        *annual.entry(PairYear::new(e.origin, e.destination, e.month.year())).or_default() += 1.0;
    }
    // Corridors with no migrants in a year are reported as zero.
    for (o, d) in world.universe.pairs() {
        if destination.is_some_and(|x| x != d) {
            continue;
        }
        for y in world.migration_months.years() {
            annual.entry(PairYear::new(o, d, y)).or_insert(0.0);
        }
    }
    let mut r = ReferenceFlows::new();
    for (k, v) in annual {
        r.insert(k, v, "synthetic-truth")?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthConfig {
        let mut c = SynthConfig::world(seed, 300, 0.4, 0.4);
        c.trace_start = "2018-06-01".into();
        c.trace_end = "2020-12-31".into();
        c.first_migration_month = "2019-07".into();
        c.last_migration_month = "2019-12".into();
        c.corridors = c.draw_corridors(0.4, None);
        c
    }

    #[test]
    fn same_seed_same_world() {
        let a = generate_world(&small(5)).unwrap();
        let b = generate_world(&small(5)).unwrap();
        assert_eq!(a.traces, b.traces);
        assert_eq!(a.ground_truth_events, b.ground_truth_events);
        let c = generate_world(&small(6)).unwrap();
        assert_ne!(a.ground_truth_events, c.ground_truth_events);
    }

    #[test]
    fn bookkeeping_matches_draws() {
        let w = generate_world(&small(1)).unwrap();
        let truth = ground_truth_flows(&w).unwrap();
        for (k, n) in &w.corridor_draws {
            assert_eq!(truth.value(k).unwrap(), *n as f64);
        }
        assert_eq!(truth.total(), w.ground_truth_events.len() as f64);
        assert_eq!(w.traces.len(), 300);
    }

    #[test]
    fn zero_rates_zero_table() {
        let mut c = small(2);
        for cor in &mut c.corridors {
            cor.monthly_rate = 0.0;
        }
        let w = generate_world(&c).unwrap();
        assert_eq!(ground_truth_flows(&w).unwrap().total(), 0.0);
    }

    #[test]
    fn infeasible_configs() {
        let mut c = small(3);
        c.n_users = 1;
        assert!(generate_world(&c).is_err());
        let mut c = small(3);
        c.r_star = 5.0;
        assert!(generate_world(&c).is_err());
        let mut c = small(3);
        c.activity_prob = 1.5;
        assert!(generate_world(&c).is_err());
    }
}
