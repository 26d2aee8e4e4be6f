use std::sync::Arc;

use crate::model::{DetectionParams, MigrationEvent, ResidenceSegment};

/// Number of days strictly between two adjacent segments.
pub fn intersegment_gap(earlier: &ResidenceSegment, later: &ResidenceSegment) -> i32 {
    later.start.days_since(earlier.end) - 1
}

/// One event per adjacent pair of segments in different countries whose gap
/// is at most `max_intersegment_gap_days`. A pair with a longer gap is
/// skipped on its own; the user's other pairs still count. The event month is
/// the month the destination segment starts.
pub fn detect_migrations(
    segments: &[ResidenceSegment],
    params: &DetectionParams,
    user_id: &Arc<str>,
) -> Vec<MigrationEvent> {
    segments
        .windows(2)
        .filter_map(|w| {
            let (from, to) = (&w[0], &w[1]);
            if from.country == to.country {
                return None;
            }
            let gap = intersegment_gap(from, to);
            if gap < 0 || gap > params.max_intersegment_gap_days as i32 {
                return None;
            }
            Some(MigrationEvent {
                user_id: user_id.clone(),
                origin: from.country,
                destination: to.country,
                month: to.start.year_month(),
                origin_segment_end: from.end,
                destination_segment_start: to.start,
            })
        })
        .collect()
}
