//! Iterative proportional fitting over age × sex × region cells.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{Scheme, WeightModel};
use crate::error::{Error, Result};
use crate::model::CountryCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    Age,
    Sex,
    Region,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Age, Dimension::Sex, Dimension::Region];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Age => "age_group",
            Dimension::Sex => "sex",
            Dimension::Region => "region",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "age" | "age_group" => Ok(Dimension::Age),
            "sex" => Ok(Dimension::Sex),
            "region" => Ok(Dimension::Region),
            other => Err(Error::InvalidParameter(format!("unknown raking dimension {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DemoCell {
    pub age_group: String,
    pub sex: String,
    pub region: String,
}

impl DemoCell {
    pub fn new(age_group: &str, sex: &str, region: &str) -> Self {
        Self {
            age_group: age_group.to_string(),
            sex: sex.to_string(),
            region: region.to_string(),
        }
    }

    pub fn category(&self, dim: Dimension) -> &str {
        match dim {
            Dimension::Age => &self.age_group,
            Dimension::Sex => &self.sex,
            Dimension::Region => &self.region,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RakingProblem {
    /// Seed counts (platform users) per cell.
    pub cells: BTreeMap<DemoCell, f64>,
    /// Target totals per dimension and category.
    pub targets: BTreeMap<Dimension, BTreeMap<String, f64>>,
    /// Largest relative marginal deviation accepted as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RakingResult {
    pub fitted: BTreeMap<DemoCell, f64>,
    /// `fitted / seed`; zero-seed cells get 0.
    pub weights: BTreeMap<DemoCell, f64>,
    pub converged: bool,
    pub iterations: usize,
    pub max_deviation: f64,
}

impl RakingResult {
    /// `sum(weight * seed) / sum(seed)`: one multiplier for the whole
    /// country, preserving the fitted total.
    pub fn effective_multiplier(&self, seeds: &BTreeMap<DemoCell, f64>) -> f64 {
        let users: f64 = seeds.values().sum();
        let weighted: f64 = seeds
            .iter()
            .map(|(c, s)| s * self.weights.get(c).copied().unwrap_or(0.0))
            .sum();
        weighted / users
    }
}

fn margins(fitted: &BTreeMap<DemoCell, f64>, dim: Dimension) -> BTreeMap<&str, f64> {
    let mut m: BTreeMap<&str, f64> = BTreeMap::new();
    for (cell, v) in fitted {
        *m.entry(cell.category(dim)).or_default() += v;
    }
    m
}

fn max_relative_deviation(fitted: &BTreeMap<DemoCell, f64>, targets: &BTreeMap<Dimension, BTreeMap<String, f64>>) -> f64 {
    let mut worst: f64 = 0.0;
    for (dim, t) in targets {
        let m = margins(fitted, *dim);
        for (cat, &target) in t {
            let got = m.get(cat.as_str()).copied().unwrap_or(0.0);
            let dev = if target > 0.0 {
                (got - target).abs() / target
            } else {
                got.abs()
            };
            worst = worst.max(dev);
        }
    }
    worst
}

impl RakingProblem {
    fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::Raking("no seed cells".into()));
        }
        if let Some((c, v)) = self.cells.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Raking(format!("seed for {c:?} must be >= 0, got {v}")));
        }
        if self.targets.is_empty() {
            return Err(Error::Raking("no target marginals".into()));
        }
        let totals: Vec<(Dimension, f64)> = self
            .targets
            .iter()
            .map(|(d, t)| (*d, t.values().sum()))
            .collect();
        let (d0, t0) = totals[0];
        for &(d, t) in &totals[1..] {
            if (t - t0).abs() > self.tolerance * t0.abs().max(t.abs()).max(1.0) {
                return Err(Error::Raking(format!(
                    "inconsistent marginal totals: {d0} sums to {t0}, {d} to {t}"
                )));
            }
        }
        for (dim, t) in &self.targets {
            if let Some((cat, v)) = t.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::Raking(format!("target {dim}={cat} must be >= 0, got {v}")));
            }
            let seeded = margins(&self.cells, *dim);
            for (cat, s) in &seeded {
                if *s > 0.0 && !t.contains_key(*cat) {
                    return Err(Error::Raking(format!("seed category {dim}={cat} has no target")));
                }
            }
            for (cat, target) in t {
                if *target > 0.0 && seeded.get(cat.as_str()).copied().unwrap_or(0.0) <= 0.0 {
                    return Err(Error::Raking(format!(
                        "target {dim}={cat} is positive but no seed cell has users"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Scales cells to each marginal in turn until every marginal is within
/// `tolerance` (relative) or `max_iterations` full sweeps have run. Zero
/// seeds stay zero.
pub fn rake(problem: &RakingProblem) -> Result<RakingResult> {
    problem.validate()?;
    let mut fitted = problem.cells.clone();
    let mut iterations = 0;
    let mut deviation = max_relative_deviation(&fitted, &problem.targets);
    while deviation >= problem.tolerance && iterations < problem.max_iterations {
        for (dim, targets) in &problem.targets {
            let current: BTreeMap<String, f64> = margins(&fitted, *dim)
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            for (cell, v) in fitted.iter_mut() {
                let cat = cell.category(*dim);
                let cur = current[cat];
                if cur > 0.0 {
                    *v = *v * targets[cat] / cur;
                }
            }
        }
        iterations += 1;
        deviation = max_relative_deviation(&fitted, &problem.targets);
    }
    let weights = problem
        .cells
        .iter()
        .map(|(c, &s)| (c.clone(), if s > 0.0 { fitted[c] / s } else { 0.0 }))
        .collect();
    Ok(RakingResult {
        fitted,
        weights,
        converged: deviation < problem.tolerance,
        iterations,
        max_deviation: deviation,
    })
}

/// Rakes every origin and applies its effective multiplier to each listed
/// year. Non-converged origins are reported as unweightable.
pub fn raking_weights(
    problems: &BTreeMap<CountryCode, RakingProblem>,
    years: impl IntoIterator<Item = i32> + Clone,
) -> Result<WeightModel> {
    let mut multipliers = BTreeMap::new();
    let mut unweightable = Vec::new();
    for (country, problem) in problems {
        let res = rake(problem)?;
        let m = res.effective_multiplier(&problem.cells);
        for y in years.clone() {
            if res.converged && m.is_finite() && m > 0.0 {
                multipliers.insert((*country, y), m);
            } else {
                unweightable.push((*country, y));
            }
        }
    }
    let mut model = WeightModel::new(Scheme::Raking, multipliers)?;
    model.unweightable = unweightable;
    Ok(model)
}
