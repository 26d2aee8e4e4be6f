//! Grid search for the per-year selection constant `r`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{selection_weight, StatsTable};
use crate::error::{Error, Result};
use crate::model::{CellKey, CountryCode, FlowTable};
use crate::validation::ReferenceFlows;

/// Candidate values `min, min + step, ..., max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 3.0,
            step: 0.01,
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.max >= self.min && self.min >= 0.0) {
            return Err(Error::InvalidParameter(format!("bad grid {self:?}")));
        }
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        // Rounded to 12 decimals so that e.g. the 123rd point is exactly 1.23.
        Ok((0..=n)
            .map(|i| ((self.min + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect())
    }
}

/// One origin's inputs to the calibration objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationPoint {
    pub origin: CountryCode,
    pub raw: f64,
    pub reference: f64,
    pub income: f64,
    pub penetration: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationResult {
    pub r: f64,
    pub min_error: f64,
    /// `(r, sum of absolute errors)` for every grid point.
    pub curve: Vec<(f64, f64)>,
}

/// Sum over origins of `|W(r) * raw - reference|`.
pub fn calibration_error(points: &[CalibrationPoint], r: f64) -> f64 {
    points
        .iter()
        .map(|p| (selection_weight(p.income, p.penetration, r) * p.raw - p.reference).abs())
        .sum()
}

/// Grid value minimising the absolute-error objective. Ties go to the
/// smallest `r` whatever the evaluation order.
pub fn calibrate_selection_rate(points: &[CalibrationPoint], grid: &GridSpec) -> Result<CalibrationResult> {
    if points.is_empty() {
        return Err(Error::Empty("calibration origins"));
    }
    let rs = grid.values()?;
    let curve: Vec<(f64, f64)> = rs.par_iter().map(|&r| (r, calibration_error(points, r))).collect();
    let (r, min_error) = curve
        .iter()
        .copied()
        .fold(None, |best: Option<(f64, f64)>, (r, e)| match best {
            Some((_, be)) if e >= be || e.is_nan() => best,
            _ => Some((r, e)),
        })
        .expect("grid is non-empty");
    Ok(CalibrationResult { r, min_error, curve })
}

/// Annual raw flows into `destination` during `year`, per origin. Origins
/// with any missing month are left out.
pub fn annual_inflows(raw: &FlowTable, destination: CountryCode, year: i32) -> BTreeMap<CountryCode, f64> {
    let months: Vec<_> = raw.range().iter().filter(|m| m.year() == year).collect();
    raw.universe()
        .codes()
        .iter()
        .filter(|&&o| o != destination)
        .filter_map(|&o| {
            months
                .iter()
                .map(|&m| raw.value(&CellKey::new(o, destination, m)))
                .sum::<Option<f64>>()
                .map(|v| (o, v))
        })
        .collect()
}

/// Joins raw inflows, reference inflows, stats and income for one
/// destination-year. Only origins present in every input are used.
pub fn calibration_points(
    raw: &FlowTable,
    reference: &ReferenceFlows,
    stats: &StatsTable,
    income: &BTreeMap<CountryCode, f64>,
    destination: CountryCode,
    year: i32,
) -> Vec<CalibrationPoint> {
    let raw_in = annual_inflows(raw, destination, year);
    reference
        .iter()
        .filter(|(k, _)| k.destination == destination && k.year == year)
        .filter_map(|(k, &reference)| {
            let raw = *raw_in.get(&k.origin)?;
            let inc = *income.get(&k.origin)?;
            let s = stats.get(k.origin, year)?;
            Some(CalibrationPoint {
                origin: k.origin,
                raw,
                reference,
                income: inc,
                penetration: s.penetration(),
            })
        })
        .collect()
}
