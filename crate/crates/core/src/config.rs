//! Run configuration, read from a TOML file with one section per stage.
//!
//! ```toml
//! seed = 7
//! countries = ["DE", "MX", "US"]
//! out_dir = "out"
//!
//! [detect]
//! preset = "un"
//!
//! [aggregate]
//! first_month = "2019-01"
//! last_month = "2021-12"
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{DetectionParams, MonthRange, Universe, YearMonth};
use crate::privacy::sensitivity_from_release_plan;
use crate::weighting::{GridSpec, Scheme};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// Worker threads; 0 or absent uses every core.
    pub workers: Option<usize>,
    /// Country universe. Absent means the packaged 181-country list.
    pub countries: Option<Vec<String>>,
    pub out_dir: Option<PathBuf>,
    pub inputs: Inputs,
    pub synth: SynthSection,
    pub detect: DetectSection,
    pub aggregate: AggregateSection,
    pub weight: WeightSection,
    pub calibrate: CalibrateSection,
    pub privatize: PrivatizeSection,
    pub validate: ValidateSection,
    pub diagnose: DiagnoseSection,
}

/// Input datasets. When `[synth]` is enabled the pipeline fills any unset
/// path with the file it generates.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub traces: Option<PathBuf>,
    pub assume_sorted: bool,
    pub stats: Option<PathBuf>,
    pub gni: Option<PathBuf>,
    pub hdi: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub sci: Option<PathBuf>,
    pub exclusions: Option<PathBuf>,
    pub raking_seeds: Option<PathBuf>,
    pub raking_targets: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub enabled: bool,
    pub n_users: usize,
    pub migrant_share: f64,
    pub r_star: f64,
    pub activity_prob: f64,
    pub trip_prob: f64,
    pub trip_mean_days: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            enabled: false,
            n_users: 10_000,
            migrant_share: 0.4,
            r_star: 0.4,
            activity_prob: 1.0,
            trip_prob: 0.0,
            trip_mean_days: 10.0,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectSection {
    /// `un`, `nz` or `short`; individual fields below override it.
    pub preset: Option<String>,
    pub epsilon_days: Option<u32>,
    pub min_days: Option<u32>,
    pub prop_days: Option<f64>,
    pub max_intersegment_gap_days: Option<u32>,
}

impl DetectSection {
    pub fn params(&self) -> Result<DetectionParams> {
        let mut p = DetectionParams::preset(self.preset.as_deref().unwrap_or("un"))?;
        if let Some(v) = self.epsilon_days {
            p.epsilon_days = v;
        }
        if let Some(v) = self.min_days {
            p.min_days = v;
        }
        if let Some(v) = self.prop_days {
            p.prop_days = v;
        }
        if let Some(v) = self.max_intersegment_gap_days {
            p.max_intersegment_gap_days = v;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregateSection {
    pub first_month: Option<String>,
    pub last_month: Option<String>,
    /// Months whose cells are replaced by the mean of the adjacent months.
    pub impute_months: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSection {
    pub scheme: String,
    /// Fixed selection constant for every year; absent means calibrate.
    pub r: Option<f64>,
    pub raking_tolerance: f64,
    pub raking_max_iterations: usize,
}

impl Default for WeightSection {
    fn default() -> Self {
        Self {
            scheme: "selection".into(),
            r: None,
            raking_tolerance: 1e-9,
            raking_max_iterations: 1000,
        }
    }
}

impl WeightSection {
    pub fn scheme(&self) -> Result<Scheme> {
        self.scheme.parse()
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateSection {
    /// Country whose reference inflows anchor the calibration.
    pub destination: Option<String>,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
}

impl Default for CalibrateSection {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            destination: None,
            grid_min: g.min,
            grid_max: g.max,
            grid_step: g.step,
        }
    }
}

impl CalibrateSection {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            min: self.grid_min,
            max: self.grid_max,
            step: self.grid_step,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrivatizeSection {
    pub epsilon: f64,
    pub delta: f64,
    /// Explicit L2 sensitivity; otherwise `sqrt(release_years * aggregates)`.
    pub sensitivity: Option<f64>,
    pub release_years: u32,
    pub aggregates: u32,
    /// Explicit noise scale, bypassing the solver.
    pub sigma: Option<f64>,
}

impl Default for PrivatizeSection {
    fn default() -> Self {
        Self {
            epsilon: 10.0,
            delta: 1e-9,
            sensitivity: None,
            release_years: 10,
            aggregates: 3,
            sigma: None,
        }
    }
}

impl PrivatizeSection {
    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
            .unwrap_or_else(|| sensitivity_from_release_plan(self.release_years, self.aggregates))
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    /// Single year to validate; absent pools all years.
    pub year: Option<i32>,
    /// Table to validate: `weighted` (default) or `private`.
    pub table: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseSection {
    pub epsilons: Vec<u32>,
}

impl Default for DiagnoseSection {
    fn default() -> Self {
        Self {
            epsilons: vec![7, 14, 30, 60, 90, 120],
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path` and resolves its relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut self.out_dir);
        let i = &mut self.inputs;
        for p in [
            &mut i.traces,
            &mut i.stats,
            &mut i.gni,
            &mut i.hdi,
            &mut i.reference,
            &mut i.sci,
            &mut i.exclusions,
            &mut i.raking_seeds,
            &mut i.raking_targets,
        ] {
            fix(p);
        }
    }

    pub fn universe(&self) -> Result<Universe> {
        match &self.countries {
            Some(c) => Universe::from_strs(c),
            None => Ok(Universe::default_181()),
        }
    }

    pub fn month_range(&self) -> Result<MonthRange> {
        let get = |v: &Option<String>, name: &str| -> Result<YearMonth> {
            v.as_deref()
                .ok_or_else(|| Error::Config(format!("[aggregate] {name} is required")))?
                .parse()
        };
        MonthRange::new(
            get(&self.aggregate.first_month, "first_month")?,
            get(&self.aggregate.last_month, "last_month")?,
        )
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = Config::from_toml("").unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.detect.params().unwrap(), DetectionParams::un());
        assert_eq!(c.weight.scheme().unwrap(), Scheme::Selection);
        assert_eq!(c.universe().unwrap().len(), 181);
        assert!((c.privatize.sensitivity() - 30f64.sqrt()).abs() < 1e-15);
        assert!(c.month_range().is_err());
    }

    #[test]
    fn sections_and_overrides() {
        let c = Config::from_toml(
            r#"
seed = 3
countries = ["US", "MX"]
[detect]
preset = "nz"
epsilon_days = 30
[aggregate]
first_month = "2020-01"
last_month = "2020-06"
"#,
        )
        .unwrap();
        let p = c.detect.params().unwrap();
        assert_eq!(p.epsilon_days, 30);
        assert_eq!(p.min_days, DetectionParams::nz().min_days);
        assert_eq!(c.month_range().unwrap().len(), 6);
        assert_eq!(c.universe().unwrap().len(), 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::from_toml("[detect]\nepsilon = 3\n").is_err());
        assert!(Config::from_toml("bogus = 1\n").is_err());
    }

    #[test]
    fn relative_paths_follow_config_file() {
        let mut c = Config::from_toml("out_dir = \"o\"\n[inputs]\ntraces = \"t.csv\"\n").unwrap();
        c.resolve_paths(Path::new("/cfg"));
        assert_eq!(c.out_dir(), PathBuf::from("/cfg/o"));
        assert_eq!(c.inputs.traces.unwrap(), PathBuf::from("/cfg/t.csv"));
    }
}
