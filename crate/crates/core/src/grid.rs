//! Uniform linear array geometry and the sampled angular grid.
//!
//! With half-wavelength spacing the steering vectors sampled at directional
//! sines `(i - (M-1)/2) / L`, `L = M/2`, are exactly orthonormal and form the
//! basis `U` used for the angular (virtual channel) representation. Because
//! the sines are uniformly spaced, `U^H y` and `U g` are DFTs with a phase
//! pre-rotation and are evaluated with an FFT; the dense basis is kept for
//! the sum-form channel synthesis and for checking.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::support::SupportSet;

/// Element spacing over carrier wavelength.
pub const ELEMENT_SPACING_RATIO: f64 = 0.5;

const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArrayGeometry {
    antennas: usize,
}

impl ArrayGeometry {
    pub fn new(antennas: usize) -> Result<Self> {
        if antennas < 2 {
            return Err(Error::Domain(format!("array needs at least 2 antennas, got {antennas}")));
        }
        Ok(Self { antennas })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn spacing_ratio(&self) -> f64 {
        ELEMENT_SPACING_RATIO
    }

    /// Array length `L = M d / lambda`, the angular resolution in sine units is `1/L`.
    pub fn array_length(&self) -> f64 {
        self.antennas as f64 * ELEMENT_SPACING_RATIO
    }
}

/// ULA steering vector `a(theta)`, unit norm.
pub fn steering_vector(theta: f64, geometry: &ArrayGeometry) -> Result<Vec<Complex64>> {
    if !(theta.abs() <= FRAC_PI_2 + ANGLE_SLACK) {
        return Err(Error::Domain(format!("steering angle {theta} outside [-pi/2, pi/2]")));
    }
    Ok(steering_from_sine(theta.sin(), geometry.antennas()))
}

fn steering_from_sine(sine: f64, m: usize) -> Vec<Complex64> {
    let scale = 1.0 / (m as f64).sqrt();
    let step = -2.0 * PI * ELEMENT_SPACING_RATIO * sine;
    (0..m)
        .map(|k| Complex64::from_polar(scale, step * k as f64))
        .collect()
}

/// The sampled angles, their directional sines, and the orthonormal basis.
#[derive(Clone)]
pub struct AngularGrid {
    geometry: ArrayGeometry,
    sines: Vec<f64>,
    angles: Vec<f64>,
    /// Column-major `M x M`; column `i` is `a(phi_i)`.
    basis: Vec<Complex64>,
    /// `exp(-j pi m (M-1)/M)`, the pre-rotation mapping the grid onto DFT bins.
    rotation: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for AngularGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngularGrid")
            .field("antennas", &self.geometry.antennas())
            .field("sines", &self.sines)
            .finish_non_exhaustive()
    }
}

impl AngularGrid {
    pub fn new(geometry: ArrayGeometry) -> Self {
        let m = geometry.antennas();
        let length = geometry.array_length();
        let offset = (m as f64 - 1.0) / 2.0;
        let sines: Vec<f64> = (0..m).map(|i| (i as f64 - offset) / length).collect();
        let angles = sines.iter().map(|s| s.asin()).collect();
        let mut basis = Vec::with_capacity(m * m);
        for &s in &sines {
            basis.extend(steering_from_sine(s, m));
        }
        // m (M-1) mod 2M keeps the phase argument small and exact.
        let rotation = (0..m)
            .map(|k| {
                let r = (k * (m - 1)) % (2 * m);
                Complex64::from_polar(1.0, -PI * r as f64 / m as f64)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            geometry,
            sines,
            angles,
            basis,
            rotation,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    /// Convenience constructor from an antenna count.
    pub fn with_antennas(antennas: usize) -> Result<Self> {
        ArrayGeometry::new(antennas).map(Self::new)
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn len(&self) -> usize {
        self.geometry.antennas()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sines(&self) -> &[f64] {
        &self.sines
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Steering vector of grid point `i`, i.e. column `i` of `U`.
    pub fn column(&self, i: usize) -> &[Complex64] {
        let m = self.len();
        &self.basis[i * m..(i + 1) * m]
    }

    /// Entry `(row, col)` of `U`.
    pub fn basis_entry(&self, row: usize, col: usize) -> Complex64 {
        self.basis[col * self.len() + row]
    }

    /// `U^H y`.
    pub fn to_angular(&self, y: &[Complex64]) -> Vec<Complex64> {
        let m = self.len();
        assert_eq!(y.len(), m, "vector length must equal the antenna count");
        let mut buf: Vec<Complex64> = y.iter().zip(&self.rotation).map(|(v, r)| v * r).collect();
        self.inverse.process(&mut buf);
        let scale = 1.0 / (m as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    /// `U g`.
    pub fn from_angular(&self, g: &[Complex64]) -> Vec<Complex64> {
        let m = self.len();
        assert_eq!(g.len(), m, "vector length must equal the antenna count");
        let mut buf = g.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / (m as f64).sqrt();
        buf.iter_mut()
            .zip(&self.rotation)
            .for_each(|(v, r)| *v *= r.conj() * scale);
        buf
    }

    /// Grid indices whose sampled angle lies in the closed angular span
    /// `[mean - spread/2, mean + spread/2]`.
    pub fn indices_in_span(&self, mean_angle: f64, spread: f64) -> Result<SupportSet> {
        if !(spread > 0.0) {
            return Err(Error::Domain(format!("angular spread must be positive, got {spread}")));
        }
        let half = spread / 2.0;
        if !(mean_angle.abs() <= FRAC_PI_2 - half + ANGLE_SLACK) {
            return Err(Error::Domain(format!(
                "mean angle {mean_angle} leaves the span outside [-pi/2, pi/2] for spread {spread}"
            )));
        }
        let (lo, hi) = (mean_angle - half, mean_angle + half);
        let start = self.angles.partition_point(|&a| a < lo);
        let end = self.angles.partition_point(|&a| a <= hi);
        Ok(SupportSet::from_indices(start..end))
    }
}

/// Free-function form of [`AngularGrid::new`].
pub fn build_angular_grid(geometry: ArrayGeometry) -> AngularGrid {
    AngularGrid::new(geometry)
}

/// Free-function form of [`AngularGrid::indices_in_span`].
pub fn grid_indices_in_span(grid: &AngularGrid, mean_angle: f64, spread: f64) -> Result<SupportSet> {
    grid.indices_in_span(mean_angle, spread)
}
