//! Bilateral migration intensity and its relation to social connectedness.

use std::collections::{BTreeMap, BTreeSet};

use super::{pearson, AnnualFlows, PairYear};
use crate::model::CountryCode;
use crate::weighting::StatsTable;

/// Pairs with fewer migrants in both directions combined are dropped.
pub const MIN_PAIR_MIGRANTS: f64 = 20.0;

/// An unordered country pair, stored with the smaller code first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnorderedPair(CountryCode, CountryCode);

impl UnorderedPair {
    pub fn new(a: CountryCode, b: CountryCode) -> Self {
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }

    pub fn first(&self) -> CountryCode {
        self.0
    }

    pub fn second(&self) -> CountryCode {
        self.1
    }
}

/// `(M_ab + M_ba) / (Pop_a * Pop_b)` for each pair in `year` with at least
/// [`MIN_PAIR_MIGRANTS`] migrants. Pairs with a missing direction or a
/// missing population are skipped.
pub fn migration_intensity(
    flows: &AnnualFlows,
    population: &StatsTable,
    year: i32,
) -> BTreeMap<UnorderedPair, f64> {
    let codes = flows.universe().codes();
    let mut out = BTreeMap::new();
    for (i, &a) in codes.iter().enumerate() {
        for &b in &codes[i + 1..] {
            let (Some(ab), Some(ba)) = (
                flows.value(&PairYear::new(a, b, year)),
                flows.value(&PairYear::new(b, a, year)),
            ) else {
                continue;
            };
            let total = ab + ba;
            if total < MIN_PAIR_MIGRANTS {
                continue;
            }
            let (Some(pa), Some(pb)) = (population.population(a, year), population.population(b, year)) else {
                continue;
            };
            out.insert(UnorderedPair::new(a, b), total / (pa * pb));
        }
    }
    out
}

/// Pearson correlation of `log10(intensity)` and `log10(sci)` over pairs
/// present in both with positive values, optionally restricted to pairs
/// whose countries are both in `subset`. Returns the number of pairs used
/// and the correlation.
pub fn sci_correlation(
    intensity: &BTreeMap<UnorderedPair, f64>,
    sci: &BTreeMap<UnorderedPair, f64>,
    subset: Option<&BTreeSet<CountryCode>>,
) -> (usize, Option<f64>) {
    let (x, y): (Vec<f64>, Vec<f64>) = intensity
        .iter()
        .filter(|(p, _)| subset.is_none_or(|s| s.contains(&p.first()) && s.contains(&p.second())))
        .filter_map(|(p, &m)| {
            let s = *sci.get(p)?;
            (m > 0.0 && s > 0.0).then(|| (m.log10(), s.log10()))
        })
        .unzip();
    (x.len(), pearson(&x, &y))
}
