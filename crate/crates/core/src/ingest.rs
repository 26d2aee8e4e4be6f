//! CSV readers and writers for every dataset the pipeline consumes or emits.
//!
//! All files are UTF-8 CSV with an exact header row. Readers reject the
//! whole file on the first malformed row and report its line number.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::aggregator::Exclusion;
use crate::error::{Error, Result};
use crate::model::{
    CellKey, CountryCode, DayStamp, FlowTable, LocationTrace, MigrationEvent, MonthRange, Stage, Universe,
    YearMonth,
};
use crate::validation::{PairYear, ReferenceFlows, UnorderedPair};
use crate::weighting::{CountryYearStats, DemoCell, Dimension, RakingProblem, StatsTable};

pub const TRACE_HEADER: [&str; 3] = ["user_id", "date", "country"];
pub const EVENT_HEADER: [&str; 7] = [
    "user_id",
    "origin",
    "destination",
    "year",
    "month",
    "origin_segment_end",
    "destination_segment_start",
];
pub const FLOW_HEADER: [&str; 6] = ["origin", "destination", "year", "month", "value", "stage"];
pub const REFERENCE_HEADER: [&str; 5] = ["origin", "destination", "year", "migrants", "source"];
pub const STATS_HEADER: [&str; 4] = ["country", "year", "population", "fb_users"];
pub const GNI_HEADER: [&str; 2] = ["country", "gni_pc"];
pub const HDI_HEADER: [&str; 2] = ["country", "hdi"];
pub const SCI_HEADER: [&str; 3] = ["country_a", "country_b", "sci"];
pub const EXCLUSION_HEADER: [&str; 4] = ["origin", "destination", "start_year_month", "end_year_month"];
pub const TARGET_HEADER: [&str; 4] = ["country", "dimension", "category", "target"];
pub const SEED_HEADER: [&str; 5] = ["country", "age_group", "sex", "region", "fb_users"];

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: u64, message: impl ToString) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.to_string(),
    }
}

fn open_reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let found = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    // A completely empty file has no header; treat it as no rows.
    if found.is_empty() {
        return Ok(rdr);
    }
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_err(
            path,
            1,
            format!("expected header {:?}, found {:?}", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(rdr)
}

/// Deserializes every row, handing each to `f` with its line number. Any
/// error from `f` is reported against that line.
fn read_rows<T, F>(path: &Path, header: &[&str], mut f: F) -> Result<()>
where
    T: DeserializeOwned,
    F: FnMut(T, u64) -> Result<()>,
{
    let mut rdr = open_reader(path, header)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| match e.position() {
            Some(p) => parse_err(path, p.line(), &e),
            None => csv_err(path, e),
        })?;
        if !more {
            return Ok(());
        }
        let line = record.position().map_or(0, |p| p.line());
        let row: T = record.deserialize(Some(&headers)).map_err(|e| parse_err(path, line, e))?;
        f(row, line).map_err(|e| match e {
            e @ Error::Parse { .. } => e,
            e => parse_err(path, line, e),
        })?;
    }
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

// ---------------------------------------------------------------- traces

/// Loads traces in any row order. Each user's days are sorted; a repeated
/// day for the same user is an error naming both lines. Traces come back
/// ordered by user id.
pub fn load_traces(path: impl AsRef<Path>, universe: &Universe) -> Result<Vec<LocationTrace>> {
    let path = path.as_ref();
    let mut by_user: BTreeMap<String, Vec<(DayStamp, CountryCode, u64)>> = BTreeMap::new();
    let mut rdr = open_reader(path, &TRACE_HEADER)?;
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record).map_err(|e| csv_err(path, e))? {
        let line = record.position().map_or(0, |p| p.line());
        let (user, day, country) = parse_trace_record(path, line, &record, universe)?;
        match by_user.get_mut(user) {
            Some(v) => v.push((day, country, line)),
            None => {
                by_user.insert(user.to_string(), vec![(day, country, line)]);
            }
        }
    }
    let mut out = Vec::with_capacity(by_user.len());
    for (user, mut rows) in by_user {
        rows.sort_by_key(|r| (r.0, r.2));
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(parse_err(
                    path,
                    w[1].2,
                    format!("duplicate day {} for user {user} (first seen on line {})", w[1].0, w[0].2),
                ));
            }
        }
        let obs = rows.into_iter().map(|(d, c, _)| (d, c)).collect();
        out.push(LocationTrace::new(user, obs)?);
    }
    Ok(out)
}

fn parse_trace_record<'r>(
    path: &Path,
    line: u64,
    record: &'r csv::StringRecord,
    universe: &Universe,
) -> Result<(&'r str, DayStamp, CountryCode)> {
    if record.len() != TRACE_HEADER.len() {
        return Err(parse_err(path, line, format!("expected 3 fields, found {}", record.len())));
    }
    let user = &record[0];
    if user.is_empty() {
        return Err(parse_err(path, line, "empty user_id"));
    }
    let day: DayStamp = record[1].parse().map_err(|e| parse_err(path, line, e))?;
    let country = universe.parse(&record[2]).map_err(|e| parse_err(path, line, e))?;
    Ok((user, day, country))
}

/// Streams traces from a file whose rows are grouped by user, users in
/// ascending id order and days strictly increasing within a user. Only one
/// user's rows are held in memory. Any order violation is an error.
pub struct SortedTraceReader {
    path: PathBuf,
    reader: csv::Reader<File>,
    universe: Universe,
    record: csv::StringRecord,
    pending: Option<(String, DayStamp, CountryCode)>,
    failed: bool,
}

impl SortedTraceReader {
    pub fn open(path: impl AsRef<Path>, universe: &Universe) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let reader = open_reader(&path, &TRACE_HEADER)?;
        Ok(Self {
            path,
            reader,
            universe: universe.clone(),
            record: csv::StringRecord::new(),
            pending: None,
            failed: false,
        })
    }

    fn read_one(&mut self) -> Result<Option<(String, DayStamp, CountryCode, u64)>> {
        if !self.reader.read_record(&mut self.record).map_err(|e| csv_err(&self.path, e))? {
            return Ok(None);
        }
        let line = self.record.position().map_or(0, |p| p.line());
        let (u, d, c) = parse_trace_record(&self.path, line, &self.record, &self.universe)?;
        Ok(Some((u.to_string(), d, c, line)))
    }

    fn next_trace(&mut self) -> Result<Option<LocationTrace>> {
        let (user, day, country) = match self.pending.take() {
            Some(p) => p,
            None => match self.read_one()? {
                Some((u, d, c, _)) => (u, d, c),
                None => return Ok(None),
            },
        };
        let mut obs = vec![(day, country)];
        while let Some((u, d, c, line)) = self.read_one()? {
            if u == user {
                let last = obs.last().expect("non-empty").0;
                if d <= last {
                    return Err(parse_err(
                        &self.path,
                        line,
                        format!("user {user}: day {d} does not follow {last}; input is not sorted"),
                    ));
                }
                obs.push((d, c));
            } else {
                if u < user {
                    return Err(parse_err(
                        &self.path,
                        line,
                        format!("user {u} after {user}; input is not grouped by ascending user id"),
                    ));
                }
                self.pending = Some((u, d, c));
                break;
            }
        }
        LocationTrace::new(user, obs).map(Some)
    }
}

impl Iterator for SortedTraceReader {
    type Item = Result<LocationTrace>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.next_trace() {
            Ok(t) => t.map(Ok),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Either loader, selected by `assume_sorted`.
pub fn read_traces(path: impl AsRef<Path>, universe: &Universe, assume_sorted: bool) -> Result<Vec<LocationTrace>> {
    if assume_sorted {
        SortedTraceReader::open(path, universe)?.collect()
    } else {
        load_traces(path, universe)
    }
}

/// Writes traces in the given order, which the sorted reader accepts when
/// the traces are ordered by user id.
pub fn write_traces(path: impl AsRef<Path>, traces: &[LocationTrace]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(std::io::BufWriter::new(file));
    w.write_record(TRACE_HEADER).map_err(|e| csv_err(path, e))?;
    for t in traces {
        for (d, c) in t.observations() {
            w.write_record([t.user_id(), &d.to_string(), c.as_str()])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------- events

#[derive(Serialize, Deserialize)]
struct EventRow {
    user_id: String,
    origin: String,
    destination: String,
    year: i32,
    month: u32,
    origin_segment_end: String,
    destination_segment_start: String,
}

pub fn write_events(path: impl AsRef<Path>, events: &[MigrationEvent]) -> Result<()> {
    write_rows(
        path.as_ref(),
        &EVENT_HEADER,
        events.iter().map(|e| EventRow {
            user_id: e.user_id.to_string(),
            origin: e.origin.to_string(),
            destination: e.destination.to_string(),
            year: e.month.year(),
            month: e.month.month(),
            origin_segment_end: e.origin_segment_end.to_string(),
            destination_segment_start: e.destination_segment_start.to_string(),
        }),
    )
}

pub fn load_events(path: impl AsRef<Path>, universe: &Universe) -> Result<Vec<MigrationEvent>> {
    let mut out = Vec::new();
    read_rows(path.as_ref(), &EVENT_HEADER, |r: EventRow, _| {
        out.push(MigrationEvent {
            user_id: r.user_id.into(),
            origin: universe.parse(&r.origin)?,
            destination: universe.parse(&r.destination)?,
            month: YearMonth::new(r.year, r.month)?,
            origin_segment_end: r.origin_segment_end.parse()?,
            destination_segment_start: r.destination_segment_start.parse()?,
        });
        Ok(())
    })?;
    Ok(out)
}

// ---------------------------------------------------------------- flows

#[derive(Serialize, Deserialize)]
struct FlowRow {
    origin: String,
    destination: String,
    year: i32,
    month: u32,
    value: Option<f64>,
    stage: String,
}

/// Writes non-zero cells, then missing cells with an empty `value`. Zero
/// cells are implicit.
pub fn write_flow_table(path: impl AsRef<Path>, table: &FlowTable) -> Result<()> {
    let stage = table.stage().as_str().to_string();
    let row = |k: &CellKey, value: Option<f64>| FlowRow {
        origin: k.origin.to_string(),
        destination: k.destination.to_string(),
        year: k.month.year(),
        month: k.month.month(),
        value,
        stage: stage.clone(),
    };
    let rows: Vec<FlowRow> = table
        .iter()
        .map(|(k, v)| row(k, Some(v)))
        .chain(table.missing().map(|k| row(k, None)))
        .collect();
    write_rows(path.as_ref(), &FLOW_HEADER, rows)
}

/// Reads a flow table over the given universe and month range. All rows must
/// carry the same stage; `stage` (if given) must match it and is used for a
/// file with no rows, which otherwise reads as a raw table.
pub fn load_flow_table(
    path: impl AsRef<Path>,
    universe: &Universe,
    range: MonthRange,
    stage: Option<Stage>,
) -> Result<FlowTable> {
    let path = path.as_ref();
    let mut table: Option<FlowTable> = None;
    read_rows(path, &FLOW_HEADER, |r: FlowRow, _| {
        let row_stage: Stage = r.stage.parse()?;
        if let Some(expected) = stage {
            if row_stage != expected {
                return Err(Error::WrongStage {
                    found: row_stage.as_str().into(),
                    expected: expected.as_str().into(),
                });
            }
        }
        let t = table.get_or_insert_with(|| FlowTable::new(row_stage, universe.clone(), range));
        if t.stage() != row_stage {
            return Err(Error::InvalidParameter(format!(
                "mixed stages {} and {}",
                t.stage().as_str(),
                row_stage.as_str()
            )));
        }
        let key = CellKey::new(universe.parse(&r.origin)?, universe.parse(&r.destination)?, YearMonth::new(r.year, r.month)?);
        t.check_key(&key)?;
        if t.is_missing(&key) || t.value(&key).is_some_and(|v| v != 0.0) {
            return Err(Error::InvalidParameter(format!("duplicate cell {key}")));
        }
        match r.value {
            Some(v) => {
                if v == 0.0 {
                    return Err(Error::InvalidParameter(format!("zero cell {key} must be omitted")));
                }
                t.set(key, finite("value", v)?)
            }
            None => t.mark_missing(key),
        }
    })?;
    Ok(table.unwrap_or_else(|| FlowTable::new(stage.unwrap_or(Stage::Raw), universe.clone(), range)))
}

// ---------------------------------------------------------------- reference

#[derive(Serialize, Deserialize)]
struct ReferenceRow {
    origin: String,
    destination: String,
    year: i32,
    migrants: f64,
    source: String,
}

pub fn load_reference(path: impl AsRef<Path>, universe: &Universe) -> Result<ReferenceFlows> {
    let mut out = ReferenceFlows::new();
    read_rows(path.as_ref(), &REFERENCE_HEADER, |r: ReferenceRow, _| {
        let key = PairYear::new(universe.parse(&r.origin)?, universe.parse(&r.destination)?, r.year);
        if out.get(&key).is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate reference row {}->{} {}",
                r.origin, r.destination, r.year
            )));
        }
        out.insert(key, finite("migrants", r.migrants)?, &r.source)
    })?;
    Ok(out)
}

pub fn write_reference(path: impl AsRef<Path>, reference: &ReferenceFlows) -> Result<()> {
    write_rows(
        path.as_ref(),
        &REFERENCE_HEADER,
        reference.iter().map(|(k, v)| ReferenceRow {
            origin: k.origin.to_string(),
            destination: k.destination.to_string(),
            year: k.year,
            migrants: *v,
            source: reference.source(k).unwrap_or_default().to_string(),
        }),
    )
}

// ---------------------------------------------------------------- stats

#[derive(Serialize, Deserialize)]
struct StatsRow {
    country: String,
    year: i32,
    population: f64,
    fb_users: f64,
}

/// Platform users above the population are capped with a warning.
pub fn load_stats(path: impl AsRef<Path>, universe: &Universe) -> Result<StatsTable> {
    let mut rows = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    read_rows(path.as_ref(), &STATS_HEADER, |r: StatsRow, _| {
        let c = universe.parse(&r.country)?;
        if !seen.insert((c, r.year)) {
            return Err(Error::InvalidParameter(format!("duplicate stats row {c} {}", r.year)));
        }
        rows.push(CountryYearStats::new(c, r.year, r.population, r.fb_users)?);
        Ok(())
    })?;
    StatsTable::new(rows)
}

pub fn write_stats(path: impl AsRef<Path>, stats: &StatsTable) -> Result<()> {
    write_rows(
        path.as_ref(),
        &STATS_HEADER,
        stats.iter().map(|s| StatsRow {
            country: s.country.to_string(),
            year: s.year,
            population: s.population,
            fb_users: s.fb_users,
        }),
    )
}

// ---------------------------------------------------------------- per-country scalars

#[derive(Deserialize)]
struct ScalarRow {
    country: String,
    #[serde(alias = "gni_pc", alias = "hdi")]
    value: f64,
}

fn load_scalars(path: &Path, header: &[&str], universe: &Universe) -> Result<BTreeMap<CountryCode, f64>> {
    let mut out = BTreeMap::new();
    read_rows(path, header, |r: ScalarRow, _| {
        let c = universe.parse(&r.country)?;
        if out.insert(c, finite(header[1], r.value)?).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate row for {c}")));
        }
        Ok(())
    })?;
    Ok(out)
}

fn write_scalars(path: &Path, header: &[&str], values: &BTreeMap<CountryCode, f64>) -> Result<()> {
    write_rows(path, header, values.iter().map(|(c, v)| (c.as_str(), *v)))
}

pub fn load_gni(path: impl AsRef<Path>, universe: &Universe) -> Result<BTreeMap<CountryCode, f64>> {
    load_scalars(path.as_ref(), &GNI_HEADER, universe)
}

pub fn write_gni(path: impl AsRef<Path>, gni: &BTreeMap<CountryCode, f64>) -> Result<()> {
    write_scalars(path.as_ref(), &GNI_HEADER, gni)
}

pub fn load_hdi(path: impl AsRef<Path>, universe: &Universe) -> Result<BTreeMap<CountryCode, f64>> {
    load_scalars(path.as_ref(), &HDI_HEADER, universe)
}

pub fn write_hdi(path: impl AsRef<Path>, hdi: &BTreeMap<CountryCode, f64>) -> Result<()> {
    write_scalars(path.as_ref(), &HDI_HEADER, hdi)
}

// ---------------------------------------------------------------- SCI

#[derive(Serialize, Deserialize)]
struct SciRow {
    country_a: String,
    country_b: String,
    sci: f64,
}

pub fn load_sci(path: impl AsRef<Path>, universe: &Universe) -> Result<BTreeMap<UnorderedPair, f64>> {
    let mut out = BTreeMap::new();
    read_rows(path.as_ref(), &SCI_HEADER, |r: SciRow, _| {
        let a = universe.parse(&r.country_a)?;
        let b = universe.parse(&r.country_b)?;
        if a == b {
            return Err(Error::InvalidParameter(format!("SCI pair {a}-{b} has identical countries")));
        }
        if !(r.sci.is_finite() && r.sci > 0.0) {
            return Err(Error::InvalidParameter(format!("SCI must be > 0, got {}", r.sci)));
        }
        if out.insert(UnorderedPair::new(a, b), r.sci).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate SCI pair {a}-{b}")));
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn write_sci(path: impl AsRef<Path>, sci: &BTreeMap<UnorderedPair, f64>) -> Result<()> {
    write_rows(
        path.as_ref(),
        &SCI_HEADER,
        sci.iter().map(|(p, v)| SciRow {
            country_a: p.first().to_string(),
            country_b: p.second().to_string(),
            sci: *v,
        }),
    )
}

// ---------------------------------------------------------------- exclusions

#[derive(Serialize, Deserialize)]
struct ExclusionRow {
    origin: String,
    destination: String,
    start_year_month: String,
    end_year_month: String,
}

pub fn load_exclusions(path: impl AsRef<Path>, universe: &Universe) -> Result<Vec<Exclusion>> {
    let mut out = Vec::new();
    read_rows(path.as_ref(), &EXCLUSION_HEADER, |r: ExclusionRow, _| {
        out.push(Exclusion::new(
            universe.parse(&r.origin)?,
            universe.parse(&r.destination)?,
            r.start_year_month.parse()?,
            r.end_year_month.parse()?,
        )?);
        Ok(())
    })?;
    Ok(out)
}

pub fn write_exclusions(path: impl AsRef<Path>, exclusions: &[Exclusion]) -> Result<()> {
    write_rows(
        path.as_ref(),
        &EXCLUSION_HEADER,
        exclusions.iter().map(|x| ExclusionRow {
            origin: x.origin.to_string(),
            destination: x.destination.to_string(),
            start_year_month: x.first.to_string(),
            end_year_month: x.last.to_string(),
        }),
    )
}

// ---------------------------------------------------------------- raking inputs

#[derive(Serialize, Deserialize)]
struct SeedRow {
    country: String,
    age_group: String,
    sex: String,
    region: String,
    fb_users: f64,
}

#[derive(Serialize, Deserialize)]
struct TargetRow {
    country: String,
    dimension: String,
    category: String,
    target: f64,
}

/// Pairs seed cells with marginal targets per country. Every country must
/// appear in both files.
pub fn load_raking(
    seeds: impl AsRef<Path>,
    targets: impl AsRef<Path>,
    universe: &Universe,
    tolerance: f64,
    max_iterations: usize,
) -> Result<BTreeMap<CountryCode, RakingProblem>> {
    let mut cells: BTreeMap<CountryCode, BTreeMap<DemoCell, f64>> = BTreeMap::new();
    read_rows(seeds.as_ref(), &SEED_HEADER, |r: SeedRow, _| {
        let c = universe.parse(&r.country)?;
        let cell = DemoCell::new(&r.age_group, &r.sex, &r.region);
        if cells.entry(c).or_default().insert(cell, finite("fb_users", r.fb_users)?).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate seed cell for {c}")));
        }
        Ok(())
    })?;
    let mut margins: BTreeMap<CountryCode, BTreeMap<Dimension, BTreeMap<String, f64>>> = BTreeMap::new();
    read_rows(targets.as_ref(), &TARGET_HEADER, |r: TargetRow, _| {
        let c = universe.parse(&r.country)?;
        let dim: Dimension = r.dimension.parse()?;
        let slot = margins.entry(c).or_default().entry(dim).or_default();
        if slot.insert(r.category.clone(), finite("target", r.target)?).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate target {c} {dim}={}", r.category)));
        }
        Ok(())
    })?;
    let mut out = BTreeMap::new();
    for (c, cells) in cells {
        let targets = margins
            .remove(&c)
            .ok_or_else(|| Error::Raking(format!("{c} has seed cells but no targets")))?;
        out.insert(
            c,
            RakingProblem {
                cells,
                targets,
                tolerance,
                max_iterations,
            },
        );
    }
    if let Some(c) = margins.keys().next() {
        return Err(Error::Raking(format!("{c} has targets but no seed cells")));
    }
    Ok(out)
}

pub fn write_raking(
    seeds: impl AsRef<Path>,
    targets: impl AsRef<Path>,
    problems: &BTreeMap<CountryCode, RakingProblem>,
) -> Result<()> {
    write_rows(
        seeds.as_ref(),
        &SEED_HEADER,
        problems.iter().flat_map(|(c, p)| {
            p.cells.iter().map(move |(cell, v)| SeedRow {
                country: c.to_string(),
                age_group: cell.age_group.clone(),
                sex: cell.sex.clone(),
                region: cell.region.clone(),
                fb_users: *v,
            })
        }),
    )?;
    write_rows(
        targets.as_ref(),
        &TARGET_HEADER,
        problems.iter().flat_map(|(c, p)| {
            p.targets.iter().flat_map(move |(dim, t)| {
                t.iter().map(move |(cat, v)| TargetRow {
                    country: c.to_string(),
                    dimension: dim.as_str().to_string(),
                    category: cat.clone(),
                    target: *v,
                })
            })
        }),
    )
}
