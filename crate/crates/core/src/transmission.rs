//! Pilot and data phases at the base station.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::ChannelRealization;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::rng::{complex_gaussian, complex_gaussian_vec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Orthonormal pilot sequences `S = [s_1 .. s_tau]`, a normalized DFT matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBook {
    columns: Vec<Vec<Complex64>>,
}

impl PilotBook {
    pub fn new(length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::Domain("pilot length must be at least 1".into()));
        }
        let scale = 1.0 / (length as f64).sqrt();
        let columns = (0..length)
            .map(|k| {
                (0..length)
                    .map(|r| {
                        let e = (r * k) % length;
                        Complex64::from_polar(scale, -2.0 * PI * e as f64 / length as f64)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { columns })
    }

    pub fn length(&self) -> usize {
        self.columns.len()
    }

    /// Pilot `s_k`.
    pub fn pilot(&self, k: usize) -> &[Complex64] {
        &self.columns[k]
    }
}

pub fn generate_pilot_book(length: usize) -> Result<PilotBook> {
    PilotBook::new(length)
}

/// Jamming sequences `s_w^n ~ CN(0, I/tau)` and their pilot correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct JammerPilot {
    /// `s_w^n` per subcarrier.
    pub sequences: Vec<Vec<Complex64>>,
    /// `gamma_k^n = (s_w^n)^H s_k`, indexed `[n][k]`.
    pub correlations: Vec<Vec<Complex64>>,
}

pub fn generate_jammer_pilot<R: Rng + ?Sized>(rng: &mut R, pilots: &PilotBook, subcarriers: usize) -> JammerPilot {
    let tau = pilots.length();
    let mut sequences = Vec::with_capacity(subcarriers);
    let mut correlations = Vec::with_capacity(subcarriers);
    for _ in 0..subcarriers {
        let s = complex_gaussian_vec(rng, tau, 1.0 / tau as f64);
        let gamma = (0..tau)
            .map(|k| s.iter().zip(pilots.pilot(k)).map(|(w, p)| w.conj() * p).sum())
            .collect();
        sequences.push(s);
        correlations.push(gamma);
    }
    JammerPilot { sequences, correlations }
}

/// The jammer's channel together with its training sequences.
#[derive(Debug, Clone, Copy)]
pub struct JammerLink<'a> {
    pub channel: &'a ChannelRealization,
    pub pilot: &'a JammerPilot,
}

/// Received training block and its de-spread per-pilot vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingObservation {
    /// `Y_t^n`, row-major `M x tau`.
    pub raw: Vec<Vec<Complex64>>,
    /// `y_{t,k}^n = Y_t^n s_k`, indexed `[n][k]`.
    pub despread: Vec<Vec<Vec<Complex64>>>,
}

impl TrainingObservation {
    pub fn subcarriers(&self) -> usize {
        self.raw.len()
    }

    /// Per-subcarrier de-spread vectors of pilot `k`.
    pub fn pilot_vectors(&self, k: usize) -> Vec<&[Complex64]> {
        self.despread.iter().map(|per_n| per_n[k].as_slice()).collect()
    }
}

fn check_dimensions(
    users: &[ChannelRealization],
    jammer: Option<JammerLink<'_>>,
    pilots: &PilotBook,
    config: &SystemConfig,
) -> Result<(usize, usize)> {
    if users.len() != config.users || pilots.length() != config.pilot_length {
        return Err(Error::Contract(format!(
            "{} user channels and {} pilots for a {}-user system with tau = {}",
            users.len(),
            pilots.length(),
            config.users,
            config.pilot_length
        )));
    }
    if users.len() > pilots.length() {
        return Err(Error::Contract("more users than orthogonal pilots".into()));
    }
    let n = users.first().map_or(0, |u| u.subcarriers());
    let m = config.antennas;
    let consistent = |c: &ChannelRealization| c.subcarriers() == n && c.channels.iter().all(|h| h.len() == m);
    if !users.iter().all(consistent) {
        return Err(Error::Contract("user channels disagree on subcarriers or antennas".into()));
    }
    if let Some(j) = jammer {
        if !consistent(j.channel) || j.pilot.sequences.len() != n {
            return Err(Error::Contract("jammer channel or sequence has the wrong dimensions".into()));
        }
        if j.pilot.sequences.iter().any(|s| s.len() != pilots.length()) {
            return Err(Error::Contract("jammer sequence length differs from tau".into()));
        }
    }
    Ok((n, m))
}

/// Noise-free `Y_t` for one subcarrier, row-major `M x tau`.
fn received_block(
    n: usize,
    m: usize,
    users: &[ChannelRealization],
    user_amplitudes: &[f64],
    jammer: Option<(JammerLink<'_>, f64)>,
    pilots: &PilotBook,
) -> Vec<Complex64> {
    let tau = pilots.length();
    let mut y = vec![ZERO; m * tau];
    for (k, (user, &amp)) in users.iter().zip(user_amplitudes).enumerate() {
        if amp == 0.0 {
            continue;
        }
        let s = pilots.pilot(k);
        for (row, h) in user.channels[n].iter().enumerate() {
            let hv = h * amp;
            for (col, sv) in s.iter().enumerate() {
                y[row * tau + col] += hv * sv.conj();
            }
        }
    }
    if let Some((link, amp)) = jammer {
        if amp != 0.0 {
            let s = &link.pilot.sequences[n];
            for (row, h) in link.channel.channels[n].iter().enumerate() {
                let hv = h * amp;
                for (col, sv) in s.iter().enumerate() {
                    y[row * tau + col] += hv * sv.conj();
                }
            }
        }
    }
    y
}

fn despread_block(y: &[Complex64], m: usize, pilots: &PilotBook, count: usize) -> Vec<Vec<Complex64>> {
    let tau = pilots.length();
    (0..count)
        .map(|k| {
            let s = pilots.pilot(k);
            (0..m)
                .map(|row| y[row * tau..(row + 1) * tau].iter().zip(s).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect()
}

fn amplitudes(config: &SystemConfig) -> Vec<f64> {
    let tau = config.pilot_length as f64;
    config.pilot_powers.iter().map(|p| (tau * p).sqrt()).collect()
}

/// Synthesizes `Y_t^n = sum_k sqrt(tau p_k) h_k s_k^H + sqrt(tau q_t) h_w (s_w^n)^H + Z_t^n`
/// with `CN(0, sigma_z^2)` noise and de-spreads it with every user pilot.
pub fn simulate_training<R: Rng + ?Sized>(
    rng: &mut R,
    users: &[ChannelRealization],
    jammer: Option<JammerLink<'_>>,
    pilots: &PilotBook,
    config: &SystemConfig,
) -> Result<TrainingObservation> {
    let (subcarriers, m) = check_dimensions(users, jammer, pilots, config)?;
    let user_amps = amplitudes(config);
    let jam_amp = (config.pilot_length as f64 * config.jammer_pilot_power).sqrt();
    let tau = pilots.length();
    let mut raw = Vec::with_capacity(subcarriers);
    let mut despread = Vec::with_capacity(subcarriers);
    for n in 0..subcarriers {
        let mut y = received_block(n, m, users, &user_amps, jammer.map(|j| (j, jam_amp)), pilots);
        for v in y.iter_mut() {
            *v += complex_gaussian(rng, config.noise_power);
        }
        debug_assert_eq!(y.len(), m * tau);
        despread.push(despread_block(&y, m, pilots, users.len()));
        raw.push(y);
    }
    Ok(TrainingObservation { raw, despread })
}

/// Angular-domain de-spread training split into its three linear parts.
///
/// `combine(q)` equals `U^H y_{t,k}^n` from [`simulate_training`] run with the
/// same random stream and jammer training power `q`, which lets a sweep over
/// the jammer power reuse one synthesis.
#[derive(Debug, Clone)]
pub struct TrainingParts {
    /// Users' contribution, `[n][k]` angular vectors.
    pub users: Vec<Vec<Vec<Complex64>>>,
    /// Jammer contribution at `q_t = 1` W, absent when there is no jammer.
    pub jammer: Option<Vec<Vec<Vec<Complex64>>>>,
    pub noise: Vec<Vec<Vec<Complex64>>>,
}

impl TrainingParts {
    pub fn simulate<R: Rng + ?Sized>(
        rng: &mut R,
        grid: &AngularGrid,
        users: &[ChannelRealization],
        jammer: Option<JammerLink<'_>>,
        pilots: &PilotBook,
        config: &SystemConfig,
    ) -> Result<Self> {
        let (subcarriers, m) = check_dimensions(users, jammer, pilots, config)?;
        let k = users.len();
        let user_amps = amplitudes(config);
        let unit_amp = (config.pilot_length as f64).sqrt();
        let angular = |blocks: Vec<Vec<Complex64>>| -> Vec<Vec<Complex64>> {
            blocks.iter().map(|y| grid.to_angular(y)).collect()
        };
        let mut user_part = Vec::with_capacity(subcarriers);
        let mut jam_part = Vec::with_capacity(subcarriers);
        let mut noise_part = Vec::with_capacity(subcarriers);
        for n in 0..subcarriers {
            let yu = received_block(n, m, users, &user_amps, None, pilots);
            user_part.push(angular(despread_block(&yu, m, pilots, k)));
            if let Some(j) = jammer {
                let yj = received_block(n, m, users, &vec![0.0; k], Some((j, unit_amp)), pilots);
                jam_part.push(angular(despread_block(&yj, m, pilots, k)));
            }
            let z: Vec<Complex64> = (0..m * pilots.length())
                .map(|_| complex_gaussian(rng, config.noise_power))
                .collect();
            noise_part.push(angular(despread_block(&z, m, pilots, k)));
        }
        Ok(Self {
            users: user_part,
            jammer: jammer.map(|_| jam_part),
            noise: noise_part,
        })
    }

    /// Angular de-spread vectors `[n][k]` for jammer training power `q_t`.
    pub fn combine(&self, jammer_pilot_power: f64) -> Vec<Vec<Vec<Complex64>>> {
        let amp = jammer_pilot_power.sqrt();
        self.users
            .iter()
            .zip(&self.noise)
            .enumerate()
            .map(|(n, (un, zn))| {
                un.iter()
                    .zip(zn)
                    .enumerate()
                    .map(|(k, (u, z))| {
                        let mut v: Vec<Complex64> = u.iter().zip(z).map(|(a, b)| a + b).collect();
                        if let (Some(j), true) = (&self.jammer, amp != 0.0) {
                            for (x, w) in v.iter_mut().zip(&j[n][k]) {
                                *x += w * amp;
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    }
}

/// One data-phase snapshot per subcarrier, with the transmitted symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct DataObservation {
    /// `y_d^n`.
    pub received: Vec<Vec<Complex64>>,
    /// `x_k^n`, indexed `[n][k]`.
    pub user_symbols: Vec<Vec<Complex64>>,
    /// `x_w^n`.
    pub jammer_symbols: Vec<Complex64>,
    /// `z_d^n`.
    pub noise: Vec<Vec<Complex64>>,
}

/// `y_d^n = sum_k sqrt(p_{d,k}) h_k^n x_k^n + sqrt(q_d) h_w^n x_w^n + z_d^n`.
pub fn simulate_data<R: Rng + ?Sized>(
    rng: &mut R,
    users: &[ChannelRealization],
    jammer: Option<&ChannelRealization>,
    config: &SystemConfig,
) -> Result<DataObservation> {
    if users.len() != config.users {
        return Err(Error::Contract(format!(
            "{} user channels for a {}-user system",
            users.len(),
            config.users
        )));
    }
    let subcarriers = users.first().map_or(0, |u| u.subcarriers());
    let m = config.antennas;
    let ok = |c: &ChannelRealization| c.subcarriers() == subcarriers && c.channels.iter().all(|h| h.len() == m);
    if !users.iter().all(ok) || !jammer.is_none_or(ok) {
        return Err(Error::Contract("channels disagree on subcarriers or antennas".into()));
    }
    let amps: Vec<f64> = config.data_powers.iter().map(|p| p.sqrt()).collect();
    let jam_amp = config.jammer_data_power.sqrt();
    let mut out = DataObservation {
        received: Vec::with_capacity(subcarriers),
        user_symbols: Vec::with_capacity(subcarriers),
        jammer_symbols: Vec::with_capacity(subcarriers),
        noise: Vec::with_capacity(subcarriers),
    };
    for n in 0..subcarriers {
        let x = complex_gaussian_vec(rng, users.len(), 1.0);
        let xw = complex_gaussian(rng, 1.0);
        let z = complex_gaussian_vec(rng, m, config.noise_power);
        let mut y = z.clone();
        for ((user, &amp), &xk) in users.iter().zip(&amps).zip(&x) {
            let c = xk * amp;
            for (yv, h) in y.iter_mut().zip(&user.channels[n]) {
                *yv += h * c;
            }
        }
        if let Some(j) = jammer {
            let c = xw * jam_amp;
            for (yv, h) in y.iter_mut().zip(&j.channels[n]) {
                *yv += h * c;
            }
        }
        out.received.push(y);
        out.user_symbols.push(x);
        out.jammer_symbols.push(xw);
        out.noise.push(z);
    }
    Ok(out)
}
