//! Comparing estimates to reference statistics.

mod flows;
mod pearson;
mod report;
mod social;

pub use flows::{AnnualFlows, PairYear, ReferenceFlows};
pub use pearson::pearson;
pub use report::{validation_report, CountryTotals, MetricResult, ValidationReport};
pub use social::{migration_intensity, sci_correlation, UnorderedPair, MIN_PAIR_MIGRANTS};
