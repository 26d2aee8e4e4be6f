use std::collections::BTreeMap;

use log::warn;

use crate::error::{Error, Result};
use crate::model::CountryCode;

/// Population and platform users of one country in one year.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountryYearStats {
    pub country: CountryCode,
    pub year: i32,
    pub population: f64,
    pub fb_users: f64,
}

impl CountryYearStats {
    /// Platform users above the population are capped at the population.
    pub fn new(country: CountryCode, year: i32, population: f64, fb_users: f64) -> Result<Self> {
        if !(population.is_finite() && population > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{country} {year}: population must be > 0, got {population}"
            )));
        }
        if !(fb_users.is_finite() && fb_users >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{country} {year}: platform users must be >= 0, got {fb_users}"
            )));
        }
        let fb_users = if fb_users > population {
            warn!("{country} {year}: platform users {fb_users} exceed population {population}; capping penetration at 1");
            population
        } else {
            fb_users
        };
        Ok(Self {
            country,
            year,
            population,
            fb_users,
        })
    }

    pub fn penetration(&self) -> f64 {
        self.fb_users / self.population
    }
}

/// Stats keyed by `(country, year)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StatsTable {
    rows: BTreeMap<(CountryCode, i32), CountryYearStats>,
}

impl StatsTable {
    pub fn new<I: IntoIterator<Item = CountryYearStats>>(rows: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for r in rows {
            if map.insert((r.country, r.year), r).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate stats row for {} {}",
                    r.country, r.year
                )));
            }
        }
        Ok(Self { rows: map })
    }

    pub fn get(&self, country: CountryCode, year: i32) -> Option<&CountryYearStats> {
        self.rows.get(&(country, year))
    }

    pub fn population(&self, country: CountryCode, year: i32) -> Option<f64> {
        self.get(country, year).map(|s| s.population)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CountryYearStats> {
        self.rows.values()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Per-capita income scaled so the richest country is 1.
pub fn income_index(gni_pc: &BTreeMap<CountryCode, f64>) -> Result<BTreeMap<CountryCode, f64>> {
    if gni_pc.is_empty() {
        return Err(Error::Empty("per-capita income"));
    }
    if let Some((c, v)) = gni_pc.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidParameter(format!("{c}: income must be > 0, got {v}")));
    }
    let max = gni_pc.values().copied().fold(f64::MIN, f64::max);
    Ok(gni_pc.iter().map(|(c, v)| (*c, v / max)).collect())
}
