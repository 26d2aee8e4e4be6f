//! Baseline detector: a user moves when their modal country changes between
//! consecutive calendar years.

use std::collections::BTreeMap;

use crate::model::{CountryCode, DayStamp, LocationTrace};

/// A change of modal country between two consecutive calendar years. No month
/// is attached: the move could have happened in either year.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrequencyMove {
    pub from_year: i32,
    pub to_year: i32,
    pub origin: CountryCode,
    pub destination: CountryCode,
}

/// Modal country of one year. Ties go to the tied country seen last.
fn modal(counts: &BTreeMap<CountryCode, (u32, DayStamp)>) -> Option<(CountryCode, u32)> {
    counts
        .iter()
        .max_by_key(|(_, &(n, last))| (n, last))
        .map(|(c, &(n, _))| (*c, n))
}

/// Per-year modal countries with their day counts and the year's total
/// observed days.
pub fn modal_countries(trace: &LocationTrace) -> BTreeMap<i32, (CountryCode, u32, u32)> {
    let mut per_year: BTreeMap<i32, BTreeMap<CountryCode, (u32, DayStamp)>> = BTreeMap::new();
    for &(day, country) in trace.observations() {
        let e = per_year
            .entry(day.year())
            .or_default()
            .entry(country)
            .or_insert((0, day));
        e.0 += 1;
        e.1 = day;
    }
    per_year
        .into_iter()
        .filter_map(|(year, counts)| {
            let total = counts.values().map(|v| v.0).sum();
            modal(&counts).map(|(c, n)| (year, (c, n, total)))
        })
        .collect()
}

/// One record per pair of consecutive observed years whose modal countries
/// differ. Years without observations break the chain.
pub fn frequency_migrations(trace: &LocationTrace) -> Vec<FrequencyMove> {
    let modes = modal_countries(trace);
    modes
        .iter()
        .zip(modes.iter().skip(1))
        .filter_map(|((&y0, &(c0, _, _)), (&y1, &(c1, _, _)))| {
            (y1 == y0 + 1 && c0 != c1).then_some(FrequencyMove {
                from_year: y0,
                to_year: y1,
                origin: c0,
                destination: c1,
            })
        })
        .collect()
}
