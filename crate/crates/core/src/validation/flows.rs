use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{CellKey, CountryCode, FlowTable, Universe};

/// `(origin, destination, year)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairYear {
    pub origin: CountryCode,
    pub destination: CountryCode,
    pub year: i32,
}

impl PairYear {
    pub fn new(origin: CountryCode, destination: CountryCode, year: i32) -> Self {
        Self {
            origin,
            destination,
            year,
        }
    }
}

/// Annual comparison flows from an external source.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReferenceFlows {
    entries: BTreeMap<PairYear, f64>,
    sources: BTreeMap<PairYear, String>,
}

impl ReferenceFlows {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: PairYear, migrants: f64, source: &str) -> Result<()> {
        if !(migrants.is_finite() && migrants >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference {}->{} {}: migrants must be >= 0, got {migrants}",
                key.origin, key.destination, key.year
            )));
        }
        if key.origin == key.destination {
            return Err(Error::InvalidParameter(format!(
                "reference {}->{} has origin == destination",
                key.origin, key.destination
            )));
        }
        if self.entries.insert(key, migrants).is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate reference row {}->{} {}",
                key.origin, key.destination, key.year
            )));
        }
        self.sources.insert(key, source.to_string());
        Ok(())
    }

    pub fn get(&self, key: &PairYear) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn source(&self, key: &PairYear) -> Option<&str> {
        self.sources.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairYear, &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn years(&self) -> BTreeSet<i32> {
        self.entries.keys().map(|k| k.year).collect()
    }
}

/// Annual totals of a monthly flow table. A pair-year with any missing month
/// is missing.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnualFlows {
    universe: Universe,
    years: BTreeSet<i32>,
    values: BTreeMap<PairYear, f64>,
    missing: BTreeSet<PairYear>,
}

impl AnnualFlows {
    pub fn from_table(table: &FlowTable) -> Self {
        let mut values: BTreeMap<PairYear, f64> = BTreeMap::new();
        for (k, v) in table.iter() {
            *values
                .entry(PairYear::new(k.origin, k.destination, k.month.year()))
                .or_default() += v;
        }
        let missing: BTreeSet<PairYear> = table
            .missing()
            .map(|k: &CellKey| PairYear::new(k.origin, k.destination, k.month.year()))
            .collect();
        for m in &missing {
            values.remove(m);
        }
        Self {
            universe: table.universe().clone(),
            years: table.range().years().collect(),
            values,
            missing,
        }
    }

    /// Builds annual flows directly; every key must be in `universe` and
    /// `years`.
    pub fn from_values(
        universe: Universe,
        years: BTreeSet<i32>,
        values: BTreeMap<PairYear, f64>,
    ) -> Result<Self> {
        for k in values.keys() {
            if !universe.contains(k.origin) || !universe.contains(k.destination) || !years.contains(&k.year) {
                return Err(Error::InvalidParameter(format!(
                    "annual flow {}->{} {} outside universe or years",
                    k.origin, k.destination, k.year
                )));
            }
        }
        Ok(Self {
            universe,
            years,
            values: values.into_iter().filter(|(_, v)| *v != 0.0).collect(),
            missing: BTreeSet::new(),
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn years(&self) -> &BTreeSet<i32> {
        &self.years
    }

    /// `None` when the pair-year is outside the table or missing; zero when
    /// covered but unset.
    pub fn value(&self, key: &PairYear) -> Option<f64> {
        if key.origin == key.destination
            || !self.universe.contains(key.origin)
            || !self.universe.contains(key.destination)
            || !self.years.contains(&key.year)
            || self.missing.contains(key)
        {
            return None;
        }
        Some(self.values.get(key).copied().unwrap_or(0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairYear, &f64)> {
        self.values.iter()
    }
}
