//! Domain types shared by every stage of the pipeline.

mod calendar;
mod country;
mod flow;
mod trace;

pub use calendar::{days_in_month, is_leap_year, DayStamp, MonthRange, YearMonth};
pub use country::{CountryCode, Universe, DEFAULT_COUNTRIES};
pub use flow::{Cell, CellKey, FlowTable, Stage};
pub use trace::{DetectionParams, LocationTrace, MigrationEvent, ResidenceSegment};
