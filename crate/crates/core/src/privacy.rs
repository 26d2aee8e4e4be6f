//! Analytic Gaussian mechanism: noise calibration and table privatization.
//!
//! Adding `N(0, sigma^2)` noise to a query with L2 sensitivity `sensitivity`
//! is `(epsilon, delta)`-DP exactly when
//!
//! ```text
//! Phi(s/(2 sigma) - epsilon sigma/s) - e^epsilon Phi(-s/(2 sigma) - epsilon sigma/s) <= delta
//! ```
//!
//! with `s` the sensitivity. The left side depends on `sigma` only through
//! `sigma / s` and decreases in it, so the smallest admissible `sigma` is
//! found by bisection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CellKey, FlowTable, Stage};
use crate::rng::cell_seed;

/// Standard normal CDF via the complementary error function, which keeps
/// full relative accuracy deep in the lower tail.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
    pub sensitivity: f64,
    pub sigma: f64,
}

impl PrivacyParams {
    /// Solves for the smallest admissible `sigma`.
    pub fn calibrate(epsilon: f64, delta: f64, sensitivity: f64) -> Result<Self> {
        let sigma = solve_sigma(epsilon, delta, sensitivity)?;
        Ok(Self {
            epsilon,
            delta,
            sensitivity,
            sigma,
        })
    }
}

/// L2 sensitivity when each person changes each released cell by at most
/// one: the square root of the number of cells one person can touch, here
/// `years * aggregates` (e.g. 10 yearly releases of 3 aggregates gives
/// `sqrt(30)`).
pub fn sensitivity_from_release_plan(years: u32, aggregates: u32) -> f64 {
    ((years as f64) * (aggregates as f64)).sqrt()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn condition_lhs(epsilon: f64, sensitivity: f64, sigma: f64) -> f64 {
    let a = sensitivity / (2.0 * sigma);
    let b = epsilon * sigma / sensitivity;
    normal_cdf(a - b) - epsilon.exp() * normal_cdf(-a - b)
}

/// Left side of the privacy condition minus `delta`; `<= 0` means `sigma`
/// is admissible.
pub fn dp_condition_value(epsilon: f64, delta: f64, sensitivity: f64, sigma: f64) -> Result<f64> {
    check_positive("epsilon", epsilon)?;
    check_positive("delta", delta)?;
    check_positive("sensitivity", sensitivity)?;
    check_positive("sigma", sigma)?;
    Ok(condition_lhs(epsilon, sensitivity, sigma) - delta)
}

/// Smallest `sigma` satisfying the condition, to relative tolerance 1e-6.
///
/// The upper end of the bracket starts at the classical bound
/// `s * sqrt(2 ln(1.25/delta)) / epsilon` and is doubled while it is not
/// admissible (the classical bound only guarantees privacy for
/// `epsilon < 1`). The lower end starts at a thousandth of the upper end and
/// is halved while it is admissible.
pub fn solve_sigma(epsilon: f64, delta: f64, sensitivity: f64) -> Result<f64> {
    check_positive("epsilon", epsilon)?;
    check_positive("sensitivity", sensitivity)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must be in (0, 1), got {delta}")));
    }
    let f = |sigma: f64| condition_lhs(epsilon, sensitivity, sigma) - delta;

    let classical = sensitivity * (2.0 * (1.25 / delta).ln()).sqrt() / epsilon;
    let mut hi = classical;
    let mut tries = 0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::SigmaBracket(format!(
                "no admissible sigma up to {hi:e} (epsilon={epsilon}, delta={delta}, sensitivity={sensitivity})"
            )));
        }
    }
    let mut lo = hi * 1e-3;
    tries = 0;
    while f(lo) <= 0.0 {
        lo *= 0.5;
        tries += 1;
        if tries > 60 {
            return Err(Error::SigmaBracket(format!(
                "condition holds down to sigma={lo:e}; cannot bracket the boundary"
            )));
        }
    }

    // The condition must be decreasing over the bracket for bisection to
    // find the smallest admissible value.
    let probes: Vec<f64> = (0..=64).map(|i| f(lo + (hi - lo) * i as f64 / 64.0)).collect();
    if probes.windows(2).any(|w| w[1] > w[0] + 1e-15) {
        return Err(Error::SigmaBracket(format!(
            "condition is not monotone on [{lo}, {hi}]"
        )));
    }

    while (hi - lo) > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One standard-normal draw for a cell, from a generator keyed by the seed
/// and the cell's coordinates.
pub fn cell_noise(seed: u64, key: &CellKey) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(seed, key));
    StandardNormal.sample(&mut rng)
}

/// Adds independent `N(0, sigma^2)` noise to every non-missing cell of the
/// universe × month grid (zeros included), rounds to the nearest integer and
/// clamps negatives to zero.
pub fn privatize(table: &FlowTable, sigma: f64, seed: u64) -> Result<FlowTable> {
    table.require_stage(&[Stage::Weighted])?;
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    let months: Vec<_> = table.range().iter().collect();
    let pairs: Vec<_> = table.universe().pairs().collect();
    let cells: Vec<(CellKey, f64)> = pairs
        .par_iter()
        .flat_map_iter(|&(o, d)| {
            months.iter().filter_map(move |&m| {
                let key = CellKey::new(o, d, m);
                let v = table.value(&key)?;
                let noisy = if sigma > 0.0 {
                    v + sigma * cell_noise(seed, &key)
                } else {
                    v
                };
                let released = noisy.round().max(0.0);
                (released > 0.0).then_some((key, released))
            })
        })
        .collect();
    let mut out = table.empty_like().with_stage(Stage::Privatized);
    for (k, v) in cells {
        out.set(k, v)?;
    }
    for k in table.missing() {
        out.mark_missing(*k)?;
    }
    Ok(out)
}
