//! The common-RP jamming test.
//!
//! A jammer that does not know which pilot to imitate correlates with every
//! pilot, so its paths show up in many estimated RP sets at once. Users with
//! disjoint spans rarely share paths, which [`collision_probability_bound`]
//! quantifies.

use std::f64::consts::PI;

use serde::Serialize;

use crate::detector::RpEstimate;
use crate::error::{Error, Result};
use crate::special::ln_binomial;
use crate::support::SupportSet;

/// `R(i)`: number of pilots whose estimated set contains RP `i`.
pub fn rp_occurrence_counts(estimates: &RpEstimate, antennas: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; antennas];
    for set in &estimates.sets {
        for i in set.iter() {
            let slot = counts.get_mut(i).ok_or_else(|| {
                Error::Contract(format!("RP index {i} outside a {antennas}-point grid"))
            })?;
            *slot += 1;
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub occurrence_counts: Vec<usize>,
    /// `Q_g`, also the estimate of the jammer's RPs.
    pub common_set: SupportSet,
    pub jammer_detected: bool,
    pub min_common_pilots: usize,
}

/// `Q_g = { i : R(i) >= g }`; a jammer is declared when `Q_g` is nonempty.
pub fn detect_jammer(counts: &[usize], g: usize) -> Result<DetectionOutcome> {
    if g < 2 {
        return Err(Error::Domain(format!("g must be at least 2, got {g}")));
    }
    let common_set: SupportSet = counts
        .iter()
        .enumerate()
        .filter(|(_, &r)| r >= g)
        .map(|(i, _)| i)
        .collect();
    Ok(DetectionOutcome {
        occurrence_counts: counts.to_vec(),
        jammer_detected: !common_set.is_empty(),
        common_set,
        min_common_pilots: g,
    })
}

/// Upper bound on the probability that some `g` of `K` users share an active
/// RP: `min(1, C(K, g) (1 - ((pi - 2 spread) / (pi - spread))^2)^(g - 1))`.
pub fn collision_probability_bound(users: usize, g: usize, spread: f64) -> Result<f64> {
    if g < 2 || g > users {
        return Err(Error::Domain(format!("g must lie in 2..={users}, got {g}")));
    }
    if !(spread > 0.0 && spread < PI) {
        return Err(Error::Domain(format!("spread must lie in (0, pi), got {spread}")));
    }
    // A span wider than half the range always overlaps: ratio clamps at 0.
    let ratio = ((PI - 2.0 * spread) / (PI - spread)).max(0.0);
    let pair = 1.0 - ratio * ratio;
    if pair <= 0.0 {
        return Ok(0.0);
    }
    let ln = ln_binomial(users as u64, g as u64) + (g - 1) as f64 * pair.ln();
    Ok(ln.exp().min(1.0))
}

/// True when at least `g` of the given supports share a common index.
pub fn supports_share_path(supports: &[SupportSet], antennas: usize, g: usize) -> bool {
    let mut counts = vec![0usize; antennas];
    for s in supports {
        for i in s.iter() {
            counts[i] += 1;
            if counts[i] >= g {
                return true;
            }
        }
    }
    false
}
