use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::CountryCode;

/// Combined transitions-and-entropy complexity of a state sequence,
///
/// `C = sqrt( (L_d - 1) / (L - 1) * h / ln K )`
///
/// where `L` is the sequence length, `L_d` its length after collapsing runs
/// of the same state, `h` the Shannon entropy (natural log) of the state
/// frequencies and `K` the size of the state universe. A length-1 sequence
/// has complexity 0.
pub fn complexity_index(states: &[CountryCode], universe_size: usize) -> Result<f64> {
    if universe_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "complexity needs a universe of at least 2 states, got {universe_size}"
        )));
    }
    if states.is_empty() {
        return Err(Error::Empty("state sequence"));
    }
    let mut counts: BTreeMap<CountryCode, usize> = BTreeMap::new();
    for s in states {
        *counts.entry(*s).or_default() += 1;
    }
    if counts.len() > universe_size {
        return Err(Error::InvalidParameter(format!(
            "{} distinct states exceed universe size {universe_size}",
            counts.len()
        )));
    }
    let len = states.len();
    if len == 1 || counts.len() == 1 {
        return Ok(0.0);
    }
    let dedup_len = 1 + states.windows(2).filter(|w| w[0] != w[1]).count();
    let n = len as f64;
    let entropy: f64 = counts
        .values()
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.ln()
        })
        .sum();
    let transitions = (dedup_len - 1) as f64 / (len - 1) as f64;
    let c = (transitions * entropy / (universe_size as f64).ln()).sqrt();
    Ok(c.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(codes: &[&str]) -> Vec<CountryCode> {
        codes.iter().map(|c| CountryCode::new(c).unwrap()).collect()
    }

    #[test]
    fn constant_sequence_is_zero() {
        let s = vec![CountryCode::new("US").unwrap(); 50];
        assert_eq!(complexity_index(&s, 3).unwrap(), 0.0);
    }

    #[test]
    fn all_distinct_full_universe_is_one() {
        let c = complexity_index(&seq(&["US", "DE", "FR"]), 3).unwrap();
        assert!((c - 1.0).abs() < 1e-12, "{c}");
    }

    #[test]
    fn two_runs_of_two() {
        let c = complexity_index(&seq(&["US", "US", "DE", "DE"]), 2).unwrap();
        assert!((c - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn edge_cases() {
        assert_eq!(complexity_index(&seq(&["US"]), 5).unwrap(), 0.0);
        assert!(complexity_index(&seq(&["US", "DE"]), 1).is_err());
        assert!(complexity_index(&[], 3).is_err());
        assert!(complexity_index(&seq(&["US", "DE", "FR"]), 2).is_err());
    }
}
