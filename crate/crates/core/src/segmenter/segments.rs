use std::collections::BTreeMap;

use crate::model::{CountryCode, DetectionParams, LocationTrace, ResidenceSegment};

/// Maximal per-country runs whose consecutive in-country days are at most
/// `epsilon_days` apart, keeping only runs that pass the span and presence
/// thresholds. Sorted by start day; may overlap across countries.
pub fn candidate_segments(trace: &LocationTrace, params: &DetectionParams) -> Vec<ResidenceSegment> {
    let mut by_country: BTreeMap<CountryCode, Vec<_>> = BTreeMap::new();
    for &(day, country) in trace.observations() {
        by_country.entry(country).or_default().push(day);
    }

    let eps = params.epsilon_days as i32;
    let mut out = Vec::new();
    for (country, days) in by_country {
        let mut run_start = 0;
        for i in 1..=days.len() {
            let split = i == days.len() || days[i].days_since(days[i - 1]) > eps;
            if split {
                let seg = ResidenceSegment {
                    country,
                    start: days[run_start],
                    end: days[i - 1],
                    observed_days: (i - run_start) as u32,
                };
                if seg.satisfies(params) {
                    out.push(seg);
                }
                run_start = i;
            }
        }
    }
    out.sort_by_key(|s| (s.start, s.end, s.country));
    out
}

/// Removes every overlapping day interval from both segments involved.
///
/// For an overlapping pair, the earlier-starting segment is cut to end the day
/// before the later one starts, and the later one is cut to start the day
/// after the overlap ends. All cuts are computed against the input segments,
/// so the result does not depend on processing order. Each trimmed segment is
/// then snapped to its first and last observed in-country day, its observed
/// days are recounted, and it is dropped if it no longer passes `params`.
pub fn resolve_overlaps(
    trace: &LocationTrace,
    segments: &[ResidenceSegment],
    params: &DetectionParams,
) -> Vec<ResidenceSegment> {
    let mut segs = segments.to_vec();
    segs.sort_by_key(|s| (s.start, s.end, s.country));

    let mut out = Vec::with_capacity(segs.len());
    for (i, seg) in segs.iter().enumerate() {
        let mut start = seg.start;
        let mut end = seg.end;
        for (j, other) in segs.iter().enumerate() {
            if i == j || !seg.overlaps(other) {
                continue;
            }
            if j < i {
                start = start.max(other.end.min(seg.end).add_days(1));
            } else {
                end = end.min(other.start.add_days(-1));
            }
        }
        if start > end {
            continue;
        }
        let mut days = trace
            .window(start, end)
            .iter()
            .filter(|(_, c)| *c == seg.country)
            .map(|(d, _)| *d);
        let Some(first) = days.next() else { continue };
        let (last, count) = days.fold((first, 1u32), |(_, n), d| (d, n + 1));
        let trimmed = ResidenceSegment {
            country: seg.country,
            start: first,
            end: last,
            observed_days: count,
        };
        if trimmed.satisfies(params) {
            out.push(trimmed);
        }
    }
    out
}

/// Candidate construction followed by overlap resolution.
pub fn detect_segments(trace: &LocationTrace, params: &DetectionParams) -> Vec<ResidenceSegment> {
    let candidates = candidate_segments(trace, params);
    resolve_overlaps(trace, &candidates, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DayStamp;

    fn c(s: &str) -> CountryCode {
        CountryCode::new(s).unwrap()
    }

    fn trace(spans: &[(&str, i32, i32)]) -> LocationTrace {
        let mut obs = Vec::new();
        for &(country, from, to) in spans {
            for d in from..=to {
                obs.push((DayStamp::from_index(d), c(country)));
            }
        }
        LocationTrace::from_unsorted("u", obs).unwrap()
    }

    #[test]
    fn empty_trace_has_no_segments() {
        let t = LocationTrace::new("u", vec![]).unwrap();
        assert!(detect_segments(&t, &DetectionParams::un()).is_empty());
    }

    #[test]
    fn single_country_run() {
        let t = trace(&[("US", 0, 399)]);
        let segs = detect_segments(&t, &DetectionParams::un());
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].country, c("US"));
        assert_eq!(segs[0].span_days(), 400);
        assert_eq!(segs[0].observed_days, 400);
    }

    #[test]
    fn gap_larger_than_epsilon_splits_run() {
        // Consecutive observations 60 days apart stay in one run; 61 split.
        let p = DetectionParams::un();
        let joined = trace(&[("US", 0, 199), ("US", 259, 458)]);
        assert_eq!(detect_segments(&joined, &p).len(), 1);
        let split = trace(&[("US", 0, 199), ("US", 260, 459)]);
        assert!(detect_segments(&split, &p).is_empty());
    }

    #[test]
    fn non_overlapping_segments_unchanged() {
        let t = trace(&[("MX", 0, 399), ("US", 400, 799)]);
        let p = DetectionParams::un();
        let cands = candidate_segments(&t, &p);
        assert_eq!(resolve_overlaps(&t, &cands, &p), cands);
    }

    #[test]
    fn partial_overlap_truncates_both() {
        // A runs over days 0..=400, B over 370..=800; inside 370..=400 they
        // alternate.
        let p = DetectionParams::un();
        let mut obs: Vec<_> = (0..370).map(|d| (DayStamp::from_index(d), c("AA"))).collect();
        // Inside 370..=400 alternate so both countries have days there.
        for d in 370..=400 {
            let country = if d == 400 || d % 2 == 1 { "AA" } else { "BB" };
            obs.push((DayStamp::from_index(d), c(country)));
        }
        obs.extend((401..=800).map(|d| (DayStamp::from_index(d), c("BB"))));
        let t = LocationTrace::new("u", obs).unwrap();
        let cands = candidate_segments(&t, &p);
        assert_eq!(cands.len(), 2);
        assert_eq!((cands[0].start.index(), cands[0].end.index()), (0, 400));
        assert_eq!((cands[1].start.index(), cands[1].end.index()), (370, 800));
        let out = resolve_overlaps(&t, &cands, &p);
        assert_eq!(out.len(), 2);
        assert_eq!((out[0].start.index(), out[0].end.index(), out[0].observed_days), (0, 369, 370));
        assert_eq!((out[1].start.index(), out[1].end.index(), out[1].observed_days), (401, 800, 400));
    }

    #[test]
    fn contained_segment_is_dropped() {
        let a = ResidenceSegment {
            country: c("AA"),
            start: DayStamp::from_index(0),
            end: DayStamp::from_index(400),
            observed_days: 300,
        };
        let b = ResidenceSegment {
            country: c("BB"),
            start: DayStamp::from_index(50),
            end: DayStamp::from_index(380),
            observed_days: 200,
        };
        let mut obs = Vec::new();
        for d in 0..=400 {
            let country = if (50..=380).contains(&d) && d % 3 != 0 { "BB" } else { "AA" };
            obs.push((DayStamp::from_index(d), c(country)));
        }
        let t = LocationTrace::new("u", obs).unwrap();
        let p = DetectionParams::new(60, 20, 0.5, 60).unwrap();
        let out = resolve_overlaps(&t, &[a, b], &p);
        assert!(out.iter().all(|s| s.country != c("BB")));
    }
}
