use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::{pearson, AnnualFlows, PairYear, ReferenceFlows};
use crate::model::CountryCode;
use crate::weighting::StatsTable;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricResult {
    pub metric: &'static str,
    pub n: usize,
    pub r: Option<f64>,
}

/// Estimated and reference totals for one country-year over shared pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CountryTotals {
    pub country: CountryCode,
    pub year: i32,
    pub est_outbound: f64,
    pub ref_outbound: f64,
    pub est_inbound: f64,
    pub ref_inbound: f64,
}

impl CountryTotals {
    pub fn est_net(&self) -> f64 {
        self.est_inbound - self.est_outbound
    }

    pub fn ref_net(&self) -> f64 {
        self.ref_inbound - self.ref_outbound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub year: Option<i32>,
    pub levels: MetricResult,
    pub log_levels: MetricResult,
    pub proportion: MetricResult,
    pub total_outbound: MetricResult,
    pub total_inbound: MetricResult,
    pub net_migration: MetricResult,
    /// Sum of absolute errors over shared pairs, in thousands.
    pub abs_error_thousands: f64,
    pub abs_error_high_hdi_thousands: f64,
    pub abs_error_low_hdi_thousands: f64,
    pub hdi_median: Option<f64>,
    pub totals: Vec<CountryTotals>,
    /// Units left out of a metric because an input was missing.
    pub excluded: Vec<String>,
}

impl ValidationReport {
    pub fn metrics(&self) -> [&MetricResult; 6] {
        [
            &self.levels,
            &self.log_levels,
            &self.proportion,
            &self.total_outbound,
            &self.total_inbound,
            &self.net_migration,
        ]
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let year = self.year.map_or("all years".to_string(), |y| y.to_string());
        let _ = writeln!(s, "Validation ({year})");
        for m in self.metrics() {
            let r = m.r.map_or("n/a".to_string(), |r| format!("{r:.4}"));
            let _ = writeln!(s, "  {:<16} N={:<6} r={r}", m.metric, m.n);
        }
        let _ = writeln!(s, "  abs error (thousands): {:.3}", self.abs_error_thousands);
        let _ = writeln!(
            s,
            "    high HDI: {:.3}  low HDI: {:.3}",
            self.abs_error_high_hdi_thousands, self.abs_error_low_hdi_thousands
        );
        if !self.excluded.is_empty() {
            let _ = writeln!(s, "  excluded: {}", self.excluded.join("; "));
        }
        s
    }
}

fn metric(name: &'static str, pairs: &[(f64, f64)]) -> MetricResult {
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    MetricResult {
        metric: name,
        n: pairs.len(),
        r: pearson(&x, &y),
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Compares annual estimates to reference flows over the pairs present in
/// both.
///
/// Log levels use only pairs where both values are positive. Proportions
/// divide both series by the destination's population. Country totals are
/// summed over shared pairs only, then correlated across country-years; net
/// migration is inbound minus outbound. Absolute errors are split by whether
/// the origin's HDI is at or above the median over the estimate's universe.
pub fn validation_report(
    est: &AnnualFlows,
    reference: &ReferenceFlows,
    population: &StatsTable,
    hdi: &BTreeMap<CountryCode, f64>,
    year: Option<i32>,
) -> ValidationReport {
    let shared: Vec<(PairYear, f64, f64)> = reference
        .iter()
        .filter(|(k, _)| year.is_none_or(|y| k.year == y))
        .filter_map(|(k, &r)| est.value(k).map(|e| (*k, e, r)))
        .collect();

    let mut excluded = Vec::new();
    let levels: Vec<(f64, f64)> = shared.iter().map(|&(_, e, r)| (e, r)).collect();
    let logs: Vec<(f64, f64)> = shared
        .iter()
        .filter(|&&(_, e, r)| e > 0.0 && r > 0.0)
        .map(|&(_, e, r)| (e.ln(), r.ln()))
        .collect();
    let mut proportions = Vec::new();
    let mut no_pop = BTreeSet::new();
    for &(k, e, r) in &shared {
        match population.population(k.destination, k.year) {
            Some(p) => proportions.push((e / p, r / p)),
            None => {
                no_pop.insert((k.destination, k.year));
            }
        }
    }
    for (c, y) in no_pop {
        excluded.push(format!("proportion: no population for {c} {y}"));
    }

    let mut out_sums: BTreeMap<(CountryCode, i32), (f64, f64)> = BTreeMap::new();
    let mut in_sums: BTreeMap<(CountryCode, i32), (f64, f64)> = BTreeMap::new();
    for &(k, e, r) in &shared {
        let o = out_sums.entry((k.origin, k.year)).or_default();
        o.0 += e;
        o.1 += r;
        let d = in_sums.entry((k.destination, k.year)).or_default();
        d.0 += e;
        d.1 += r;
    }
    let outbound: Vec<(f64, f64)> = out_sums.values().copied().collect();
    let inbound: Vec<(f64, f64)> = in_sums.values().copied().collect();
    let units: BTreeSet<(CountryCode, i32)> = out_sums.keys().chain(in_sums.keys()).copied().collect();
    let totals: Vec<CountryTotals> = units
        .into_iter()
        .map(|u| {
            let (est_outbound, ref_outbound) = out_sums.get(&u).copied().unwrap_or_default();
            let (est_inbound, ref_inbound) = in_sums.get(&u).copied().unwrap_or_default();
            CountryTotals {
                country: u.0,
                year: u.1,
                est_outbound,
                ref_outbound,
                est_inbound,
                ref_inbound,
            }
        })
        .collect();
    let net: Vec<(f64, f64)> = totals.iter().map(|t| (t.est_net(), t.ref_net())).collect();

    let hdi_median = median(
        est.universe()
            .codes()
            .iter()
            .filter_map(|c| hdi.get(c).copied())
            .collect(),
    );
    let (mut high, mut low, mut all) = (0.0, 0.0, 0.0);
    let mut no_hdi = BTreeSet::new();
    for &(k, e, r) in &shared {
        let err = (e - r).abs();
        all += err;
        match (hdi.get(&k.origin), hdi_median) {
            (Some(&h), Some(m)) if h >= m => high += err,
            (Some(_), Some(_)) => low += err,
            _ => {
                no_hdi.insert(k.origin);
            }
        }
    }
    for c in no_hdi {
        excluded.push(format!("HDI split: no HDI for {c}"));
    }

    ValidationReport {
        year,
        levels: metric("levels", &levels),
        log_levels: metric("log_levels", &logs),
        proportion: metric("proportion", &proportions),
        total_outbound: metric("total_outbound", &outbound),
        total_inbound: metric("total_inbound", &inbound),
        net_migration: metric("net_migration", &net),
        abs_error_thousands: all / 1000.0,
        abs_error_high_hdi_thousands: high / 1000.0,
        abs_error_low_hdi_thousands: low / 1000.0,
        hdi_median,
        totals,
        excluded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Universe;
    use crate::weighting::CountryYearStats;

    #[test]
    fn one_total_per_country_year() {
        let u = Universe::from_strs(&["AA", "BB", "CC"]).unwrap();
        let years: BTreeSet<i32> = [2019, 2020].into();
        let mut values = BTreeMap::new();
        let mut reference = ReferenceFlows::new();
        let mut stats = Vec::new();
        for (i, &o) in u.codes().iter().enumerate() {
            for (j, &d) in u.codes().iter().enumerate() {
                for &y in &years {
                    if o != d {
                        let k = PairYear::new(o, d, y);
                        values.insert(k, (i * 3 + j) as f64 + 1.0);
                        reference.insert(k, (j * 3 + i) as f64, "t").unwrap();
                    }
                }
            }
            for &y in &years {
                stats.push(CountryYearStats::new(o, y, 1000.0, 100.0).unwrap());
            }
        }
        let est = AnnualFlows::from_values(u.clone(), years, values).unwrap();
        let stats = StatsTable::new(stats).unwrap();
        let r = validation_report(&est, &reference, &stats, &BTreeMap::new(), None);
        assert_eq!(r.totals.len(), 6);
        assert_eq!((r.total_outbound.n, r.total_inbound.n, r.net_migration.n), (6, 6, 6));
        let keys: Vec<_> = r.totals.iter().map(|t| (t.country, t.year)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(keys, sorted);
        let aa = &r.totals[0];
        // AA->BB = 2, AA->CC = 3, BB->AA = 4, CC->AA = 7.
        assert_eq!((aa.est_outbound, aa.est_inbound), (5.0, 4.0 + 7.0));
    }
}
