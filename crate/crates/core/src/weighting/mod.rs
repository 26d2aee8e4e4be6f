//! Turning platform-user counts into population estimates.
//!
//! Five schemes are available: raw counts, inverse penetration, raking, a
//! single fitted coefficient, and the selection-rate scheme that blends
//! penetration with a fitted constant according to origin income.

mod calibrate;
mod model;
mod raking;
mod stats;

pub use calibrate::{
    annual_inflows, calibrate_selection_rate, calibration_error, calibration_points, CalibrationPoint,
    CalibrationResult, GridSpec,
};
pub use model::{
    apply_weights, coefficient_weights, fit_coefficient, origin_years, penetration_weights,
    selection_weight, selection_weights, Scheme, WeightModel,
};
pub use raking::{rake, raking_weights, DemoCell, Dimension, RakingProblem, RakingResult};
pub use stats::{income_index, CountryYearStats, StatsTable};
