//! Terminal geometries and virtual-channel-representation channels.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::rng::complex_gaussian;
use crate::support::SupportSet;

/// Redraws of the mean angle allowed before an empty support is reported.
pub const MAX_SUPPORT_REDRAWS: usize = 1000;

/// Angular footprint and large-scale gain of a user or of the jammer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalGeometry {
    pub mean_angle: f64,
    pub spread: f64,
    /// Large-scale gain `beta` (linear).
    pub gain: f64,
    /// Active RPs `Omega`.
    pub support: SupportSet,
    /// `mu = M beta / C`.
    pub power_scale: f64,
}

impl TerminalGeometry {
    /// Geometry for a given mean angle; fails if no grid angle falls in the span.
    pub fn at(grid: &AngularGrid, mean_angle: f64, spread: f64, gain: f64) -> Result<Self> {
        let support = grid.indices_in_span(mean_angle, spread)?;
        if support.is_empty() {
            return Err(Error::Config(format!(
                "no resolvable path inside span {spread} around {mean_angle} on a {}-antenna grid",
                grid.len()
            )));
        }
        Ok(Self::with_support(grid.len(), mean_angle, spread, gain, support))
    }

    /// Geometry with an explicit support (used for fixed-support studies).
    pub fn with_support(antennas: usize, mean_angle: f64, spread: f64, gain: f64, support: SupportSet) -> Self {
        let c = support.len().max(1) as f64;
        Self {
            mean_angle,
            spread,
            gain,
            power_scale: antennas as f64 * gain / c,
            support,
        }
    }

    /// `C = |Omega|`.
    pub fn active_count(&self) -> usize {
        self.support.len()
    }
}

/// Draws a terminal with mean angle uniform on `[-pi/2 + spread/2, pi/2 - spread/2]`.
///
/// Mean angles whose span contains no grid point are redrawn, up to
/// [`MAX_SUPPORT_REDRAWS`] times.
pub fn sample_terminal<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &AngularGrid,
    spread: f64,
    gain: f64,
) -> Result<TerminalGeometry> {
    if !(spread > 0.0 && spread < std::f64::consts::PI) {
        return Err(Error::Domain(format!("angular spread must lie in (0, pi), got {spread}")));
    }
    let half_range = FRAC_PI_2 - spread / 2.0;
    for _ in 0..MAX_SUPPORT_REDRAWS {
        let u: f64 = rng.random();
        let mean = -half_range + 2.0 * half_range * u;
        let support = grid.indices_in_span(mean, spread)?;
        if !support.is_empty() {
            return Ok(TerminalGeometry::with_support(grid.len(), mean, spread, gain, support));
        }
    }
    Err(Error::Config(format!(
        "{MAX_SUPPORT_REDRAWS} consecutive empty supports: a {}-antenna grid is too coarse for spread {spread}",
        grid.len()
    )))
}

/// Per-subcarrier RP gains and channel vectors of one terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `g~^n`, length `M`, zero outside the support.
    pub gains: Vec<Vec<Complex64>>,
    /// `h^n = sqrt(mu) sum_{i in Omega} g~_i^n a(phi_i)`.
    pub channels: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    pub fn subcarriers(&self) -> usize {
        self.channels.len()
    }

    /// True when every subcarrier's gain vector is supported exactly on `support`.
    pub fn has_common_support(&self, support: &SupportSet) -> bool {
        self.gains.iter().all(|g| {
            g.iter()
                .enumerate()
                .all(|(i, v)| (*v != Complex64::new(0.0, 0.0)) == support.contains(i))
        })
    }
}

/// Draws i.i.d. CN(0, 1) gains on the terminal's support for `subcarriers`
/// subcarriers and assembles the channel vectors.
pub fn draw_channel<R: Rng + ?Sized>(
    rng: &mut R,
    terminal: &TerminalGeometry,
    grid: &AngularGrid,
    subcarriers: usize,
) -> ChannelRealization {
    let m = grid.len();
    let amplitude = terminal.power_scale.sqrt();
    let mut gains = Vec::with_capacity(subcarriers);
    let mut channels = Vec::with_capacity(subcarriers);
    for _ in 0..subcarriers {
        let mut g = vec![Complex64::new(0.0, 0.0); m];
        let mut h = vec![Complex64::new(0.0, 0.0); m];
        for i in terminal.support.iter() {
            let gi = complex_gaussian(rng, 1.0);
            g[i] = gi;
            let coef = gi * amplitude;
            for (hm, a) in h.iter_mut().zip(grid.column(i)) {
                *hm += coef * a;
            }
        }
        gains.push(g);
        channels.push(h);
    }
    ChannelRealization { gains, channels }
}
