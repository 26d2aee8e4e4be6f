use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::{CountryCode, MonthRange, Universe, YearMonth};
use crate::error::{Error, Result};

/// Processing stage of a [`FlowTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    /// Integer event counts.
    Raw,
    /// Raw counts after month imputation; may hold non-integers.
    Imputed,
    Weighted,
    Privatized,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Imputed => "imputed",
            Stage::Weighted => "weighted",
            Stage::Privatized => "privatized",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Stage::Raw),
            "imputed" => Ok(Stage::Imputed),
            "weighted" => Ok(Stage::Weighted),
            "privatized" => Ok(Stage::Privatized),
            other => Err(Error::InvalidParameter(format!("unknown stage {other:?}"))),
        }
    }
}

/// `(origin, destination, month)` address of one table cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub origin: CountryCode,
    pub destination: CountryCode,
    pub month: YearMonth,
}

impl CellKey {
    pub fn new(origin: CountryCode, destination: CountryCode, month: YearMonth) -> Self {
        Self {
            origin,
            destination,
            month,
        }
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{} {}", self.origin, self.destination, self.month)
    }
}

/// The state of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Value(f64),
    /// Excluded or otherwise unknown. Never the same as zero.
    Missing,
}

/// Origin-by-destination-by-month flows over a fixed universe and month range.
///
/// Cells that are neither stored nor missing are zero. Explicit zeros are
/// never stored, so two tables with the same content compare equal.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTable {
    stage: Stage,
    universe: Universe,
    range: MonthRange,
    values: BTreeMap<CellKey, f64>,
    missing: BTreeSet<CellKey>,
}

impl FlowTable {
    pub fn new(stage: Stage, universe: Universe, range: MonthRange) -> Self {
        Self {
            stage,
            universe,
            range,
            values: BTreeMap::new(),
            missing: BTreeSet::new(),
        }
    }

    /// An empty table with the same stage and metadata.
    pub fn empty_like(&self) -> Self {
        Self::new(self.stage, self.universe.clone(), self.range)
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn range(&self) -> MonthRange {
        self.range
    }

    pub(crate) fn set_stage(&mut self, stage: Stage) {
        self.stage = stage;
    }

    pub fn with_stage(mut self, stage: Stage) -> Self {
        self.stage = stage;
        self
    }

    pub fn check_key(&self, key: &CellKey) -> Result<()> {
        if key.origin == key.destination {
            return Err(Error::InvalidParameter(format!(
                "cell {}->{} {} has origin == destination",
                key.origin, key.destination, key.month
            )));
        }
        for c in [key.origin, key.destination] {
            if !self.universe.contains(c) {
                return Err(Error::UnknownCountry(c.to_string()));
            }
        }
        if !self.range.contains(key.month) {
            return Err(Error::InvalidParameter(format!(
                "month {} outside table range {}..{}",
                key.month, self.range.first, self.range.last
            )));
        }
        Ok(())
    }

    pub fn get(&self, key: &CellKey) -> Cell {
        if self.missing.contains(key) {
            Cell::Missing
        } else {
            Cell::Value(self.values.get(key).copied().unwrap_or(0.0))
        }
    }

    /// `None` when the cell is missing, otherwise its value (zero if unset).
    pub fn value(&self, key: &CellKey) -> Option<f64> {
        match self.get(key) {
            Cell::Value(v) => Some(v),
            Cell::Missing => None,
        }
    }

    pub fn is_missing(&self, key: &CellKey) -> bool {
        self.missing.contains(key)
    }

    /// Sets a cell value, clearing any missing mark.
    pub fn set(&mut self, key: CellKey, value: f64) -> Result<()> {
        self.check_key(&key)?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cell {}->{} {}: value {value} must be finite and >= 0",
                key.origin, key.destination, key.month
            )));
        }
        if self.stage == Stage::Raw && value.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "raw cell {}->{} {} must be an integer, got {value}",
                key.origin, key.destination, key.month
            )));
        }
        self.missing.remove(&key);
        if value == 0.0 {
            self.values.remove(&key);
        } else {
            self.values.insert(key, value);
        }
        Ok(())
    }

    /// Adds to a non-missing cell. Adding to a missing cell is a no-op that
    /// returns `false`.
    pub fn add(&mut self, key: CellKey, delta: f64) -> Result<bool> {
        if self.missing.contains(&key) {
            return Ok(false);
        }
        let current = self.values.get(&key).copied().unwrap_or(0.0);
        self.set(key, current + delta)?;
        Ok(true)
    }

    pub fn mark_missing(&mut self, key: CellKey) -> Result<()> {
        self.check_key(&key)?;
        self.values.remove(&key);
        self.missing.insert(key);
        Ok(())
    }

    /// Non-zero, non-missing cells in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&CellKey, f64)> {
        self.values.iter().map(|(k, v)| (k, *v))
    }

    pub fn missing(&self) -> impl Iterator<Item = &CellKey> {
        self.missing.iter()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.len()
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.len()
    }

    /// Sum over all non-missing cells.
    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    /// Checks that universe and month range agree.
    pub fn check_compatible(&self, other: &FlowTable) -> Result<()> {
        if self.universe != other.universe {
            return Err(Error::MetadataMismatch("country universes differ".into()));
        }
        if self.range != other.range {
            return Err(Error::MetadataMismatch(format!(
                "month ranges differ: {}..{} vs {}..{}",
                self.range.first, self.range.last, other.range.first, other.range.last
            )));
        }
        Ok(())
    }

    pub fn require_stage(&self, allowed: &[Stage]) -> Result<()> {
        if allowed.contains(&self.stage) {
            Ok(())
        } else {
            Err(Error::WrongStage {
                found: self.stage.to_string(),
                expected: allowed
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(" or "),
            })
        }
    }
}
