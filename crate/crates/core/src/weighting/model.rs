use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::StatsTable;
use crate::error::{Error, Result};
use crate::model::{CountryCode, FlowTable, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Raw,
    Penetration,
    Raking,
    Coefficient,
    Selection,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Raw => "raw",
            Scheme::Penetration => "penetration",
            Scheme::Raking => "raking",
            Scheme::Coefficient => "coefficient",
            Scheme::Selection => "selection",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Scheme::Raw),
            "penetration" => Ok(Scheme::Penetration),
            "raking" => Ok(Scheme::Raking),
            "coefficient" => Ok(Scheme::Coefficient),
            "selection" => Ok(Scheme::Selection),
            other => Err(Error::InvalidParameter(format!(
                "unknown weighting scheme {other:?} (expected raw, penetration, raking, coefficient or selection)"
            ))),
        }
    }
}

/// Per-origin-year multipliers applied to flow cells.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightModel {
    pub scheme: Scheme,
    pub multipliers: BTreeMap<(CountryCode, i32), f64>,
    /// Fitted selection constant per year (selection scheme only).
    pub r_by_year: BTreeMap<i32, f64>,
    /// Common slope (coefficient scheme only).
    pub beta: Option<f64>,
    /// Origin-years that could not be weighted, e.g. zero platform users.
    pub unweightable: Vec<(CountryCode, i32)>,
}

impl WeightModel {
    pub fn new(scheme: Scheme, multipliers: BTreeMap<(CountryCode, i32), f64>) -> Result<Self> {
        if let Some(((c, y), w)) = multipliers.iter().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "weight for {c} {y} must be finite and > 0, got {w}"
            )));
        }
        Ok(Self {
            scheme,
            multipliers,
            r_by_year: BTreeMap::new(),
            beta: None,
            unweightable: Vec::new(),
        })
    }

    /// The same multiplier for every listed origin-year.
    pub fn uniform(
        scheme: Scheme,
        value: f64,
        keys: impl IntoIterator<Item = (CountryCode, i32)>,
    ) -> Result<Self> {
        Self::new(scheme, keys.into_iter().map(|k| (k, value)).collect())
    }

    pub fn get(&self, origin: CountryCode, year: i32) -> Option<f64> {
        self.multipliers.get(&(origin, year)).copied()
    }
}

/// `W = population / platform users` per origin-year.
pub fn penetration_weights(stats: &StatsTable) -> WeightModel {
    let mut multipliers = BTreeMap::new();
    let mut unweightable = Vec::new();
    for s in stats.iter() {
        if s.fb_users > 0.0 {
            multipliers.insert((s.country, s.year), s.population / s.fb_users);
        } else {
            unweightable.push((s.country, s.year));
        }
    }
    WeightModel {
        scheme: Scheme::Penetration,
        multipliers,
        r_by_year: BTreeMap::new(),
        beta: None,
        unweightable,
    }
}

/// Selection-rate weight for one origin-year:
/// `1 / (income * penetration + (1 - income) * r)`.
pub fn selection_weight(income: f64, penetration: f64, r: f64) -> f64 {
    1.0 / (income * penetration + (1.0 - income) * r)
}

/// Selection-rate weights for every origin-year in `stats` whose year has an
/// `r` and whose country has an income index.
pub fn selection_weights(
    stats: &StatsTable,
    income: &BTreeMap<CountryCode, f64>,
    r_by_year: &BTreeMap<i32, f64>,
) -> Result<WeightModel> {
    for (y, r) in r_by_year {
        if !(r.is_finite() && *r > 0.0) {
            return Err(Error::InvalidParameter(format!("r for {y} must be > 0, got {r}")));
        }
    }
    let mut multipliers = BTreeMap::new();
    let mut unweightable = Vec::new();
    for s in stats.iter() {
        let (Some(&inc), Some(&r)) = (income.get(&s.country), r_by_year.get(&s.year)) else {
            continue;
        };
        if !(inc > 0.0 && inc <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "income index for {} must be in (0, 1], got {inc}",
                s.country
            )));
        }
        let w = selection_weight(inc, s.penetration(), r);
        if w.is_finite() && w > 0.0 {
            multipliers.insert((s.country, s.year), w);
        } else {
            unweightable.push((s.country, s.year));
        }
    }
    Ok(WeightModel {
        scheme: Scheme::Selection,
        multipliers,
        r_by_year: r_by_year.clone(),
        beta: None,
        unweightable,
    })
}

/// Through-origin least squares slope `sum(xy) / sum(x^2)`.
pub fn fit_coefficient(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "x and y lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidParameter("coefficient fit needs some nonzero x".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok(sxy / sxx)
}

/// A single slope applied to every listed origin-year.
pub fn coefficient_weights(beta: f64, keys: impl IntoIterator<Item = (CountryCode, i32)>) -> Result<WeightModel> {
    let mut m = WeightModel::uniform(Scheme::Coefficient, beta, keys)?;
    m.beta = Some(beta);
    Ok(m)
}

/// Origin-years with at least one non-zero or missing cell.
pub fn origin_years(table: &FlowTable) -> BTreeSet<(CountryCode, i32)> {
    table
        .iter()
        .map(|(k, _)| k)
        .chain(table.missing())
        .map(|k| (k.origin, k.month.year()))
        .collect()
}

/// Multiplies every cell by its origin-year weight. Missing cells stay
/// missing.
pub fn apply_weights(table: &FlowTable, model: &WeightModel) -> Result<FlowTable> {
    table.require_stage(&[Stage::Raw, Stage::Imputed])?;
    let gaps: Vec<String> = origin_years(table)
        .into_iter()
        .filter(|(o, y)| model.get(*o, *y).is_none())
        .map(|(o, y)| format!("{o} {y}"))
        .collect();
    if !gaps.is_empty() {
        return Err(Error::UncoveredWeights(gaps));
    }
    let weighted: Vec<_> = table
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(k, v)| (**k, v * model.get(k.origin, k.month.year()).expect("coverage checked")))
        .collect();
    let mut out = table.empty_like().with_stage(Stage::Weighted);
    for (k, v) in weighted {
        out.set(k, v)?;
    }
    for k in table.missing() {
        out.mark_missing(*k)?;
    }
    Ok(out)
}
