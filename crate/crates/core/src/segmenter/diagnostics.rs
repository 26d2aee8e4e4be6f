//! Segment-quality diagnostics used to choose the detection radius.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{complexity_index, detect_migrations, detect_segments};
use crate::error::Result;
use crate::model::{CountryCode, DetectionParams, LocationTrace, ResidenceSegment};

const FIXED_POINT: f64 = (1u64 << 52) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub epsilon_days: u32,
    pub n_users: u64,
    pub n_segments: u64,
    /// Share of segments whose modal country covers at least 90% of the span.
    pub share_modal_ge_90: f64,
    /// Share of segments where the two most frequent countries differ by
    /// less than 20% of the span.
    pub share_top2_diff_lt_20: f64,
    /// Mean, over users with at least one segment, of the complexity of the
    /// observations falling inside that user's segments.
    pub mean_complexity: f64,
    /// Users with at least one migration event.
    pub n_migrants_detected: u64,
    pub n_events: u64,
}

/// Mergeable partial sums. Complexity is summed in 2^-52 fixed point so that
/// merging is exactly associative and commutative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DiagnosticsAccumulator {
    n_users: u64,
    n_segments: u64,
    n_modal_ge_90: u64,
    n_top2_lt_20: u64,
    complexity_fixed: u128,
    n_complexity_users: u64,
    n_migrants: u64,
    n_events: u64,
}

impl DiagnosticsAccumulator {
    pub fn merge(self, o: Self) -> Self {
        Self {
            n_users: self.n_users + o.n_users,
            n_segments: self.n_segments + o.n_segments,
            n_modal_ge_90: self.n_modal_ge_90 + o.n_modal_ge_90,
            n_top2_lt_20: self.n_top2_lt_20 + o.n_top2_lt_20,
            complexity_fixed: self.complexity_fixed + o.complexity_fixed,
            n_complexity_users: self.n_complexity_users + o.n_complexity_users,
            n_migrants: self.n_migrants + o.n_migrants,
            n_events: self.n_events + o.n_events,
        }
    }

    /// Adds one user's trace.
    pub fn observe(
        trace: &LocationTrace,
        params: &DetectionParams,
        universe_size: usize,
    ) -> Result<Self> {
        let segments = detect_segments(trace, params);
        let events = detect_migrations(&segments, params, &trace.user_id_arc());
        let mut acc = Self {
            n_users: 1,
            n_segments: segments.len() as u64,
            n_migrants: u64::from(!events.is_empty()),
            n_events: events.len() as u64,
            ..Self::default()
        };
        let mut in_segment_states = Vec::new();
        for seg in &segments {
            let (top1, top2) = top_two_counts(trace, seg);
            let span = seg.span_days() as f64;
            if top1 as f64 >= 0.9 * span {
                acc.n_modal_ge_90 += 1;
            }
            if ((top1 - top2) as f64) < 0.2 * span {
                acc.n_top2_lt_20 += 1;
            }
            in_segment_states.extend(trace.window(seg.start, seg.end).iter().map(|o| o.1));
        }
        if !in_segment_states.is_empty() {
            let c = complexity_index(&in_segment_states, universe_size)?;
            acc.complexity_fixed = (c * FIXED_POINT).round() as u128;
            acc.n_complexity_users = 1;
        }
        Ok(acc)
    }

    pub fn finish(&self, epsilon_days: u32) -> DiagnosticsReport {
        let share = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        DiagnosticsReport {
            epsilon_days,
            n_users: self.n_users,
            n_segments: self.n_segments,
            share_modal_ge_90: share(self.n_modal_ge_90, self.n_segments),
            share_top2_diff_lt_20: share(self.n_top2_lt_20, self.n_segments),
            mean_complexity: if self.n_complexity_users == 0 {
                0.0
            } else {
                self.complexity_fixed as f64 / FIXED_POINT / self.n_complexity_users as f64
            },
            n_migrants_detected: self.n_migrants,
            n_events: self.n_events,
        }
    }
}

/// Day counts of the most and second-most observed countries in a segment's
/// span.
fn top_two_counts(trace: &LocationTrace, seg: &ResidenceSegment) -> (u32, u32) {
    let mut counts: HashMap<CountryCode, u32> = HashMap::new();
    for (_, c) in trace.window(seg.start, seg.end) {
        *counts.entry(*c).or_default() += 1;
    }
    let mut v: Vec<u32> = counts.into_values().collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    (v.first().copied().unwrap_or(0), v.get(1).copied().unwrap_or(0))
}

pub fn segment_diagnostics(
    traces: &[LocationTrace],
    params: &DetectionParams,
    universe_size: usize,
) -> Result<DiagnosticsReport> {
    let acc = traces
        .par_iter()
        .map(|t| DiagnosticsAccumulator::observe(t, params, universe_size))
        .try_reduce(DiagnosticsAccumulator::default, |a, b| Ok(a.merge(b)))?;
    Ok(acc.finish(params.epsilon_days))
}

/// Diagnostics for each radius in `epsilons`, other parameters fixed.
pub fn epsilon_sweep(
    traces: &[LocationTrace],
    params: &DetectionParams,
    epsilons: &[u32],
    universe_size: usize,
) -> Result<Vec<DiagnosticsReport>> {
    epsilons
        .iter()
        .map(|&e| segment_diagnostics(traces, &params.with_epsilon(e), universe_size))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DayStamp;

    fn daily(user: &str, pattern: impl Fn(i32) -> &'static str, n: i32) -> LocationTrace {
        let obs = (0..n)
            .map(|d| (DayStamp::from_index(d), CountryCode::new(pattern(d)).unwrap()))
            .collect();
        LocationTrace::new(user, obs).unwrap()
    }

    #[test]
    fn single_country_users() {
        let traces = vec![daily("a", |_| "US", 400), daily("b", |_| "DE", 500)];
        let r = segment_diagnostics(&traces, &DetectionParams::un(), 3).unwrap();
        assert_eq!(r.n_segments, 2);
        assert_eq!(r.share_modal_ge_90, 1.0);
        assert_eq!(r.share_top2_diff_lt_20, 0.0);
        assert_eq!(r.mean_complexity, 0.0);
        assert_eq!(r.n_migrants_detected, 0);
    }

    #[test]
    fn alternating_user_is_near_even() {
        // 11 days US, 9 days DE, repeated: DE never reaches 50% presence, so
        // only the US segment survives, with a slim majority.
        let t = daily("a", |d| if d % 20 < 11 { "US" } else { "DE" }, 400);
        let r = segment_diagnostics(&[t], &DetectionParams::un(), 3).unwrap();
        assert_eq!(r.n_segments, 1);
        assert_eq!(r.share_top2_diff_lt_20, 1.0);
        assert_eq!(r.share_modal_ge_90, 0.0);
        assert!(r.mean_complexity > 0.0);
    }

    #[test]
    fn merge_is_partition_independent() {
        let traces: Vec<_> = (0..6)
            .map(|i| daily("u", move |d| if d < 200 + 40 * i { "US" } else { "MX" }, 900))
            .collect();
        let p = DetectionParams::un();
        let parts: Vec<_> = traces
            .iter()
            .map(|t| DiagnosticsAccumulator::observe(t, &p, 4).unwrap())
            .collect();
        let left = parts.iter().fold(DiagnosticsAccumulator::default(), |a, b| a.merge(*b));
        let right = parts.iter().rev().fold(DiagnosticsAccumulator::default(), |a, b| b.merge(a));
        assert_eq!(left, right);
    }
}
