//! Migration events to flow tables: counting, exclusions, month imputation
//! and merging of partial tables.

use std::collections::BTreeSet;

use log::{info, warn};

use crate::error::{Error, Result};
use crate::model::{CellKey, CountryCode, FlowTable, MigrationEvent, MonthRange, Stage, Universe, YearMonth};

/// Counts events per `(origin, destination, month)`.
pub fn build_flow_table<'a, I>(events: I, range: MonthRange, universe: &Universe) -> Result<FlowTable>
where
    I: IntoIterator<Item = &'a MigrationEvent>,
{
    let mut table = FlowTable::new(Stage::Raw, universe.clone(), range);
    for ev in events {
        let key = CellKey::new(ev.origin, ev.destination, ev.month);
        table.check_key(&key).map_err(|e| Error::EventOutOfRange {
            user: ev.user_id.to_string(),
            origin: ev.origin.to_string(),
            destination: ev.destination.to_string(),
            month: ev.month.to_string(),
            reason: e.to_string(),
        })?;
        table.add(key, 1.0)?;
    }
    Ok(table)
}

/// Cells of one corridor over an inclusive month interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exclusion {
    pub origin: CountryCode,
    pub destination: CountryCode,
    pub first: YearMonth,
    pub last: YearMonth,
}

impl Exclusion {
    pub fn new(origin: CountryCode, destination: CountryCode, first: YearMonth, last: YearMonth) -> Result<Self> {
        if last < first {
            return Err(Error::Config(format!(
                "exclusion {origin}->{destination} has end {last} before start {first}"
            )));
        }
        if origin == destination {
            return Err(Error::Config(format!("exclusion {origin}->{destination} has origin == destination")));
        }
        Ok(Self {
            origin,
            destination,
            first,
            last,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExclusionReport {
    /// Cells newly marked missing.
    pub cells_removed: usize,
    /// Sum of the values those cells held.
    pub value_removed: f64,
    /// Requested cells that lie outside the table's universe or month range.
    pub skipped: Vec<String>,
}

/// Marks the listed cells missing. Cells outside the table are skipped and
/// logged.
pub fn apply_exclusions(table: &FlowTable, exclusions: &[Exclusion]) -> Result<(FlowTable, ExclusionReport)> {
    let mut out = table.clone();
    let mut report = ExclusionReport::default();
    for ex in exclusions {
        if ex.last < ex.first {
            return Err(Error::Config(format!(
                "exclusion {}->{} has end {} before start {}",
                ex.origin, ex.destination, ex.last, ex.first
            )));
        }
        for ord in ex.first.ordinal()..=ex.last.ordinal() {
            let key = CellKey::new(ex.origin, ex.destination, YearMonth::from_ordinal(ord));
            if let Err(e) = out.check_key(&key) {
                info!("exclusion skipped: {e}");
                report.skipped.push(format!("{}->{} {}", key.origin, key.destination, key.month));
                continue;
            }
            if out.is_missing(&key) {
                continue;
            }
            report.value_removed += out.value(&key).unwrap_or(0.0);
            out.mark_missing(key)?;
            report.cells_removed += 1;
        }
    }
    Ok((out, report))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ImputationReport {
    pub cells_imputed: usize,
    /// Cells left missing because a neighbouring month was missing or outside
    /// the table.
    pub left_missing: Vec<CellKey>,
}

/// Replaces every cell in each affected month with the mean of the same
/// cell's values in the previous and next months. Neighbour values always
/// come from the input table. The result has stage `Imputed` when the input
/// was raw.
pub fn impute_months(table: &FlowTable, affected: &[YearMonth]) -> Result<(FlowTable, ImputationReport)> {
    let mut out = table.clone();
    if out.stage() == Stage::Raw {
        out.set_stage(Stage::Imputed);
    }
    let mut report = ImputationReport::default();
    let affected: BTreeSet<YearMonth> = affected.iter().copied().collect();
    let range = table.range();
    for &month in &affected {
        if !range.contains(month) {
            return Err(Error::Config(format!("imputation month {month} outside table range")));
        }
        let (prev, next) = (month.prev(), month.next());
        // Corridors with anything recorded in the month or its neighbours;
        // all others are zero on both sides and stay zero.
        let corridors: BTreeSet<(CountryCode, CountryCode)> = table
            .iter()
            .map(|(k, _)| k)
            .chain(table.missing())
            .filter(|k| k.month == prev || k.month == month || k.month == next)
            .map(|k| (k.origin, k.destination))
            .collect();
        for (o, d) in corridors {
            let key = CellKey::new(o, d, month);
            let neighbour = |m: YearMonth| {
                if range.contains(m) {
                    table.value(&CellKey::new(o, d, m))
                } else {
                    None
                }
            };
            match (neighbour(prev), neighbour(next)) {
                (Some(a), Some(b)) => {
                    out.set(key, (a + b) / 2.0)?;
                    report.cells_imputed += 1;
                }
                _ => {
                    out.mark_missing(key)?;
                    report.left_missing.push(key);
                }
            }
        }
    }
    if !report.left_missing.is_empty() {
        warn!("{} imputed cells left missing", report.left_missing.len());
    }
    Ok((out, report))
}

/// Cell-wise sum of tables with identical stage and metadata.
///
/// A cell missing in one table and holding a value in another takes the
/// value (with a warning). A cell missing in one table and unset in all
/// others stays missing.
pub fn merge_partials(tables: &[FlowTable]) -> Result<FlowTable> {
    let first = tables.first().ok_or(Error::Empty("tables to merge"))?;
    for t in &tables[1..] {
        first.check_compatible(t)?;
        if t.stage() != first.stage() {
            return Err(Error::MetadataMismatch(format!(
                "stages differ: {} vs {}",
                first.stage(),
                t.stage()
            )));
        }
    }
    let mut out = first.empty_like();
    let mut missing: BTreeSet<CellKey> = BTreeSet::new();
    let mut valued: BTreeSet<CellKey> = BTreeSet::new();
    for t in tables {
        for (k, v) in t.iter() {
            let cur = out.value(k).unwrap_or(0.0);
            out.set(*k, cur + v)?;
            valued.insert(*k);
        }
        missing.extend(t.missing().copied());
    }
    for k in missing {
        if valued.contains(&k) {
            warn!("merge: {}->{} {} missing in one part, valued in another", k.origin, k.destination, k.month);
        } else {
            out.mark_missing(k)?;
        }
    }
    Ok(out)
}
