use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CountryCode, DayStamp, YearMonth};
use crate::error::{Error, Result};

/// One user's daily country observations, strictly increasing in day.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocationTrace {
    user_id: Arc<str>,
    observations: Vec<(DayStamp, CountryCode)>,
}

impl LocationTrace {
    /// Checks that days are strictly increasing (which also rules out two
    /// countries on the same day).
    pub fn new(user_id: impl Into<Arc<str>>, observations: Vec<(DayStamp, CountryCode)>) -> Result<Self> {
        let user_id = user_id.into();
        if let Some(w) = observations.windows(2).find(|w| w[1].0 <= w[0].0) {
            let reason = if w[1].0 == w[0].0 {
                format!("two observations on {}", w[0].0)
            } else {
                format!("days out of order: {} after {}", w[1].0, w[0].0)
            };
            return Err(Error::InvalidTrace {
                user: user_id.to_string(),
                reason,
            });
        }
        Ok(Self {
            user_id,
            observations,
        })
    }

    /// Sorts observations by day first; duplicate days are still an error.
    pub fn from_unsorted(
        user_id: impl Into<Arc<str>>,
        mut observations: Vec<(DayStamp, CountryCode)>,
    ) -> Result<Self> {
        observations.sort_by_key(|o| o.0);
        Self::new(user_id, observations)
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn user_id_arc(&self) -> Arc<str> {
        self.user_id.clone()
    }

    pub fn observations(&self) -> &[(DayStamp, CountryCode)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Observations with `from <= day <= to`.
    pub fn window(&self, from: DayStamp, to: DayStamp) -> &[(DayStamp, CountryCode)] {
        let lo = self.observations.partition_point(|o| o.0 < from);
        let hi = self.observations.partition_point(|o| o.0 <= to);
        &self.observations[lo..hi.max(lo)]
    }
}

/// Parameters of the segment detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    /// Largest allowed gap, in days, between consecutive in-country days of
    /// one segment.
    pub epsilon_days: u32,
    /// Minimum segment span in days.
    pub min_days: u32,
    /// Minimum share of the span observed in the segment's country.
    pub prop_days: f64,
    /// Largest gap between two adjacent segments that still yields an event.
    pub max_intersegment_gap_days: u32,
}

impl DetectionParams {
    pub fn new(
        epsilon_days: u32,
        min_days: u32,
        prop_days: f64,
        max_intersegment_gap_days: u32,
    ) -> Result<Self> {
        let p = Self {
            epsilon_days,
            min_days,
            prop_days,
            max_intersegment_gap_days,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon_days < 1 {
            return Err(Error::InvalidParameter("epsilon_days must be >= 1".into()));
        }
        if self.min_days < 1 {
            return Err(Error::InvalidParameter("min_days must be >= 1".into()));
        }
        if !(self.prop_days > 0.0 && self.prop_days <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "prop_days must be in (0, 1], got {}",
                self.prop_days
            )));
        }
        Ok(())
    }

    /// Twelve months at 50% presence, 60-day radius.
    pub fn un() -> Self {
        Self {
            epsilon_days: 60,
            min_days: 365,
            prop_days: 0.5,
            max_intersegment_gap_days: 60,
        }
    }

    /// Sixteen months at 75% presence, matching New Zealand's administrative
    /// definition.
    pub fn nz() -> Self {
        Self {
            min_days: 487,
            prop_days: 0.75,
            ..Self::un()
        }
    }

    /// Three out of six months.
    pub fn short_term() -> Self {
        Self {
            min_days: 182,
            prop_days: 0.5,
            ..Self::un()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "un" => Ok(Self::un()),
            "nz" => Ok(Self::nz()),
            "short" | "short-term" => Ok(Self::short_term()),
            other => Err(Error::InvalidParameter(format!(
                "unknown detection preset {other:?} (expected un, nz or short)"
            ))),
        }
    }

    pub fn with_epsilon(self, epsilon_days: u32) -> Self {
        Self {
            epsilon_days,
            ..self
        }
    }
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self::un()
    }
}

/// A span of residence in one country.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidenceSegment {
    pub country: CountryCode,
    pub start: DayStamp,
    pub end: DayStamp,
    /// Days within `[start, end]` on which the user was seen in `country`.
    pub observed_days: u32,
}

impl ResidenceSegment {
    pub fn span_days(&self) -> u32 {
        (self.end.days_since(self.start) + 1) as u32
    }

    pub fn observed_share(&self) -> f64 {
        self.observed_days as f64 / self.span_days() as f64
    }

    pub fn satisfies(&self, params: &DetectionParams) -> bool {
        self.span_days() >= params.min_days && self.observed_share() >= params.prop_days
    }

    pub fn overlaps(&self, other: &ResidenceSegment) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// A move between two adjacent residence segments in different countries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MigrationEvent {
    pub user_id: Arc<str>,
    pub origin: CountryCode,
    pub destination: CountryCode,
    pub month: YearMonth,
    pub origin_segment_end: DayStamp,
    pub destination_segment_start: DayStamp,
}
