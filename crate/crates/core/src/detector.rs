//! Energy detection of active RPs on each de-spread pilot.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::special::gamma_q;
use crate::support::SupportSet;

const BISECTION_STEPS: usize = 200;
const BISECTION_RTOL: f64 = 1e-10;

/// `U^H y`.
pub fn to_angular_domain(y: &[Complex64], grid: &AngularGrid) -> Result<Vec<Complex64>> {
    if y.len() != grid.len() {
        return Err(Error::Contract(format!(
            "vector of length {} on a {}-point grid",
            y.len(),
            grid.len()
        )));
    }
    Ok(grid.to_angular(y))
}

/// `W_i = sum_n |y~_i^n|^2` over the given angular vectors of one pilot.
pub fn energy_statistic<V: AsRef<[Complex64]>>(angular: &[V]) -> Result<Vec<f64>> {
    let first = angular
        .first()
        .ok_or_else(|| Error::Domain("energy statistic needs at least one subcarrier".into()))?;
    let m = first.as_ref().len();
    let mut w = vec![0.0; m];
    for v in angular {
        let v = v.as_ref();
        if v.len() != m {
            return Err(Error::Contract("angular vectors differ in length".into()));
        }
        for (acc, x) in w.iter_mut().zip(v) {
            *acc += x.norm_sqr();
        }
    }
    Ok(w)
}

/// Threshold `epsilon` with `P(W > epsilon | noise only) = eta`, where
/// `W ~ Gamma(N_d, sigma^2)`; solves `Q(N_d, epsilon / sigma^2) = eta` by bisection.
pub fn threshold_for_fap(subcarriers: usize, noise_power: f64, eta: f64) -> Result<f64> {
    if subcarriers == 0 {
        return Err(Error::Domain("N_d must be at least 1".into()));
    }
    if !(noise_power > 0.0 && noise_power.is_finite()) {
        return Err(Error::Domain(format!("noise power must be positive, got {noise_power}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("false-alarm target must lie in (0, 1), got {eta}")));
    }
    let a = subcarriers as f64;
    let survival = |x: f64| gamma_q(a, x);
    let mut lo = 0.0;
    let mut hi = a;
    while survival(hi)? > eta {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numeric("threshold bracket diverged".into()));
        }
    }
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= BISECTION_RTOL * hi {
            return Ok(noise_power * hi);
        }
        let mid = 0.5 * (lo + hi);
        if survival(mid)? > eta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric(format!(
        "threshold bisection did not converge in {BISECTION_STEPS} steps (N_d = {subcarriers}, eta = {eta})"
    )))
}

/// Per-pilot RP energies with their thresholds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyStatistics {
    /// `W_{i,k}` indexed `[k][i]`.
    pub energies: Vec<Vec<f64>>,
    /// `epsilon_k` per pilot.
    pub thresholds: Vec<f64>,
    /// False-alarm target the thresholds were derived from, if any.
    pub fap_target: Option<f64>,
}

impl EnergyStatistics {
    /// Statistics for angular training vectors indexed `[n][k]` with one
    /// threshold for every pilot.
    pub fn from_angular(angular: &[Vec<Vec<Complex64>>], threshold: f64, fap_target: Option<f64>) -> Result<Self> {
        let pilots = angular.first().map_or(0, |n| n.len());
        if angular.iter().any(|n| n.len() != pilots) {
            return Err(Error::Contract("subcarriers carry different pilot counts".into()));
        }
        let energies = (0..pilots)
            .map(|k| {
                let per_n: Vec<&[Complex64]> = angular.iter().map(|n| n[k].as_slice()).collect();
                energy_statistic(&per_n)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            energies,
            thresholds: vec![threshold; pilots],
            fap_target,
        })
    }
}

/// Estimated per-pilot RP sets `Omega^_{k,w}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RpEstimate {
    pub sets: Vec<SupportSet>,
}

/// `Omega^_{k,w} = { i : W_{i,k} > epsilon_k }`.
pub fn estimate_rp_sets(stats: &EnergyStatistics) -> RpEstimate {
    let sets = stats
        .energies
        .iter()
        .zip(&stats.thresholds)
        .map(|(w, &eps)| w.iter().enumerate().filter(|(_, &x)| x > eps).map(|(i, _)| i).collect())
        .collect();
    RpEstimate { sets }
}
