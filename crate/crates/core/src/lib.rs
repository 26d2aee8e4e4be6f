//! Estimate international migration flows from daily location traces.
//!
//! The pipeline runs in stages: residence segments and migration events are
//! detected per user ([`segmenter`]), aggregated into monthly
//! origin-destination tables ([`aggregator`]), reweighted to the population
//! ([`weighting`]), privatized with Gaussian noise ([`privacy`]) and compared
//! against reference statistics ([`validation`]). [`synth`] generates worlds
//! with known ground truth, [`ingest`] reads and writes the CSV formats and
//! [`pipeline`] wires everything together for the command line.

pub mod aggregator;
pub mod config;
pub mod error;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod privacy;
pub mod rng;
pub mod segmenter;
pub mod synth;
pub mod validation;
pub mod weighting;

pub use error::{Error, Result};
pub use model::{
    CellKey, CountryCode, DayStamp, DetectionParams, FlowTable, LocationTrace, MigrationEvent, MonthRange,
    ResidenceSegment, Stage, Universe, YearMonth,
};
