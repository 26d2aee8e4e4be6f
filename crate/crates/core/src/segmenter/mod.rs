//! Residence segments, migration events, the calendar-year baseline and
//! segment diagnostics.

mod complexity;
mod diagnostics;
mod events;
mod frequency;
mod segments;

pub use complexity::complexity_index;
pub use diagnostics::{epsilon_sweep, segment_diagnostics, DiagnosticsAccumulator, DiagnosticsReport};
pub use events::{detect_migrations, intersegment_gap};
pub use frequency::{frequency_migrations, modal_countries, FrequencyMove};
pub use segments::{candidate_segments, detect_segments, resolve_overlaps};

use rayon::prelude::*;

use crate::model::{DetectionParams, LocationTrace, MigrationEvent};

/// Segments then events for one user.
pub fn detect_user_events(trace: &LocationTrace, params: &DetectionParams) -> Vec<MigrationEvent> {
    let segments = detect_segments(trace, params);
    detect_migrations(&segments, params, &trace.user_id_arc())
}

/// Events for many users, in input order regardless of thread count.
pub fn detect_all_events(traces: &[LocationTrace], params: &DetectionParams) -> Vec<MigrationEvent> {
    traces
        .par_iter()
        .map(|t| detect_user_events(t, params))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
