//! System configuration.
//!
//! [`SystemConfigFile`] is the on-disk JSON form: powers and gains in dB,
//! one key per [`SystemConfig`] field, every key optional with the
//! reference-scenario default (M = 200, K = 10, 0 dBW users, -25 dBW noise,
//! spread pi/18). [`SystemConfigFile::into_config`] performs the single dB to
//! linear conversion; the rest of the crate only sees linear quantities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::detector::threshold_for_fap;
use crate::error::{Error, Result};

/// `x` dB to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Which active-RP count sets the power scale `mu = M beta / C` inside the
/// channel estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    /// The true `C_k`; large-scale statistics are known at the base station.
    #[default]
    TrueSupport,
    /// `|estimated user set|`, for sensitivity studies.
    EstimatedSupport,
}

/// Linear-unit system parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    /// Base-station antennas `M`.
    pub antennas: usize,
    /// Users `K`.
    pub users: usize,
    /// Pilot length `tau` (equal to `K`).
    pub pilot_length: usize,
    /// Coherence block length `T` in symbols.
    pub coherence_block: usize,
    /// Total subcarriers `N`.
    pub total_subcarriers: usize,
    /// Subcarriers per coherence bandwidth `N_c`.
    pub coherence_subcarriers: usize,
    /// Subcarriers used for detection and estimation `N_d`.
    pub detection_subcarriers: usize,
    /// Pilot powers `p_{t,k}` in W.
    pub pilot_powers: Vec<f64>,
    /// Data powers `p_{d,k}` in W.
    pub data_powers: Vec<f64>,
    /// Large-scale gains `beta_k`.
    pub user_gains: Vec<f64>,
    /// Jammer power during training `q_t` in W.
    pub jammer_pilot_power: f64,
    /// Jammer power during data `q_d` in W.
    pub jammer_data_power: f64,
    pub jammer_gain: f64,
    /// Noise power `sigma_z^2` in W.
    pub noise_power: f64,
    /// Angular spread of every user, radians.
    pub user_spread: f64,
    pub jammer_spread: f64,
    /// Per-RP false-alarm target `eta`.
    pub fap_target: f64,
    /// Explicit energy threshold in W; overrides `fap_target` when set.
    pub threshold: Option<f64>,
    /// Detector parameter `g`: minimum number of pilots sharing an RP.
    pub min_common_pilots: usize,
    pub mu_source: MuSource,
    pub seed: u64,
}

impl SystemConfig {
    /// Number of estimated subcarriers `N_e = N / N_c`.
    pub fn estimated_subcarriers(&self) -> usize {
        self.total_subcarriers / self.coherence_subcarriers
    }

    /// Energy threshold `epsilon` in W: the explicit value, or the one that
    /// meets `fap_target` under noise only.
    pub fn detection_threshold(&self) -> Result<f64> {
        match self.threshold {
            Some(eps) => Ok(eps),
            None => threshold_for_fap(self.detection_subcarriers, self.noise_power, self.fap_target),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.antennas < 2 {
            return bad(format!("antennas must be >= 2, got {}", self.antennas));
        }
        if self.users < 1 {
            return bad("at least one user is required".into());
        }
        if self.pilot_length != self.users {
            return bad(format!(
                "pilot length ({}) must equal the number of users ({})",
                self.pilot_length, self.users
            ));
        }
        if self.coherence_block <= self.pilot_length {
            return bad(format!(
                "coherence block ({}) must exceed the pilot length ({})",
                self.coherence_block, self.pilot_length
            ));
        }
        if self.coherence_subcarriers == 0 {
            return bad("coherence_subcarriers must be positive".into());
        }
        let ne = self.estimated_subcarriers();
        if self.detection_subcarriers < 1 || self.detection_subcarriers > ne {
            return bad(format!(
                "detection_subcarriers must lie in 1..={ne} (N/N_c), got {}",
                self.detection_subcarriers
            ));
        }
        for (name, v) in [
            ("pilot_powers", &self.pilot_powers),
            ("data_powers", &self.data_powers),
            ("user_gains", &self.user_gains),
        ] {
            if v.len() != self.users {
                return bad(format!("{name} has {} entries for {} users", v.len(), self.users));
            }
            if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        for (name, v) in [
            ("jammer_pilot_power", self.jammer_pilot_power),
            ("jammer_data_power", self.jammer_data_power),
            ("jammer_gain", self.jammer_gain),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(self.noise_power > 0.0) || !self.noise_power.is_finite() {
            return bad(format!("noise power must be positive, got {}", self.noise_power));
        }
        for (name, v) in [("user_spread", self.user_spread), ("jammer_spread", self.jammer_spread)] {
            if !(v > 0.0 && v < PI) {
                return bad(format!("{name} must lie in (0, pi), got {v}"));
            }
        }
        if !(self.fap_target > 0.0 && self.fap_target < 1.0) {
            return bad(format!("fap_target must lie in (0, 1), got {}", self.fap_target));
        }
        if let Some(eps) = self.threshold {
            if !(eps > 0.0) || !eps.is_finite() {
                return bad(format!("threshold must be positive, got {eps}"));
            }
        }
        if self.min_common_pilots < 2 || self.min_common_pilots > self.users {
            return bad(format!(
                "min_common_pilots (g) must lie in 2..={}, got {}",
                self.users, self.min_common_pilots
            ));
        }
        Ok(())
    }

    /// Same system with `M` antennas.
    pub fn with_antennas(&self, antennas: usize) -> Self {
        Self { antennas, ..self.clone() }
    }

    /// Same system with both jammer powers set to `q` W.
    pub fn with_jammer_power(&self, q: f64) -> Self {
        Self { jammer_pilot_power: q, jammer_data_power: q, ..self.clone() }
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfigFile::default()
            .into_config()
            .expect("default configuration is valid")
    }
}

/// A scalar applied to every user, or one value per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerUser {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerUser {
    fn expand(&self, users: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            PerUser::Uniform(v) => Ok(vec![*v; users]),
            PerUser::Each(v) if v.len() == users => Ok(v.clone()),
            PerUser::Each(v) => Err(Error::Config(format!(
                "{name} lists {} values for {users} users",
                v.len()
            ))),
        }
    }
}

/// JSON configuration; powers in dBW, gains in dB, angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfigFile {
    pub antennas: usize,
    pub users: usize,
    /// Defaults to `users` when absent.
    pub pilot_length: Option<usize>,
    pub coherence_block: usize,
    pub total_subcarriers: usize,
    pub coherence_subcarriers: usize,
    pub detection_subcarriers: usize,
    pub pilot_power_dbw: PerUser,
    pub data_power_dbw: PerUser,
    pub user_gain_db: PerUser,
    pub jammer_pilot_power_dbw: f64,
    pub jammer_data_power_dbw: f64,
    pub jammer_gain_db: f64,
    pub noise_power_dbw: f64,
    pub user_spread: f64,
    /// Defaults to `user_spread` when absent.
    pub jammer_spread: Option<f64>,
    pub fap_target: f64,
    pub threshold: Option<f64>,
    pub min_common_pilots: usize,
    pub mu_source: MuSource,
    pub seed: u64,
}

impl Default for SystemConfigFile {
    fn default() -> Self {
        Self {
            antennas: 200,
            users: 10,
            pilot_length: None,
            coherence_block: 200,
            total_subcarriers: 2048,
            coherence_subcarriers: 16,
            detection_subcarriers: 20,
            pilot_power_dbw: PerUser::Uniform(0.0),
            data_power_dbw: PerUser::Uniform(0.0),
            user_gain_db: PerUser::Uniform(0.0),
            jammer_pilot_power_dbw: 0.0,
            jammer_data_power_dbw: 0.0,
            jammer_gain_db: 0.0,
            noise_power_dbw: -25.0,
            user_spread: PI / 18.0,
            jammer_spread: None,
            fap_target: 1e-3,
            threshold: None,
            min_common_pilots: 6,
            mu_source: MuSource::TrueSupport,
            seed: 2021,
        }
    }
}

impl SystemConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid configuration: {e}")))
    }

    pub fn into_config(self) -> Result<SystemConfig> {
        let k = self.users;
        let lin = |v: Vec<f64>| v.into_iter().map(db_to_linear).collect::<Vec<_>>();
        let cfg = SystemConfig {
            antennas: self.antennas,
            users: k,
            pilot_length: self.pilot_length.unwrap_or(k),
            coherence_block: self.coherence_block,
            total_subcarriers: self.total_subcarriers,
            coherence_subcarriers: self.coherence_subcarriers,
            detection_subcarriers: self.detection_subcarriers,
            pilot_powers: lin(self.pilot_power_dbw.expand(k, "pilot_power_dbw")?),
            data_powers: lin(self.data_power_dbw.expand(k, "data_power_dbw")?),
            user_gains: lin(self.user_gain_db.expand(k, "user_gain_db")?),
            jammer_pilot_power: db_to_linear(self.jammer_pilot_power_dbw),
            jammer_data_power: db_to_linear(self.jammer_data_power_dbw),
            jammer_gain: db_to_linear(self.jammer_gain_db),
            noise_power: db_to_linear(self.noise_power_dbw),
            user_spread: self.user_spread,
            jammer_spread: self.jammer_spread.unwrap_or(self.user_spread),
            fap_target: self.fap_target,
            threshold: self.threshold,
            min_common_pilots: self.min_common_pilots,
            mu_source: self.mu_source,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The file form of a linear configuration (used for metadata snapshots).
    pub fn from_config(cfg: &SystemConfig) -> Self {
        let db = |v: &[f64]| {
            let d: Vec<f64> = v.iter().map(|&x| linear_to_db(x)).collect();
            if d.windows(2).all(|w| w[0] == w[1]) && !d.is_empty() {
                PerUser::Uniform(d[0])
            } else {
                PerUser::Each(d)
            }
        };
        Self {
            antennas: cfg.antennas,
            users: cfg.users,
            pilot_length: Some(cfg.pilot_length),
            coherence_block: cfg.coherence_block,
            total_subcarriers: cfg.total_subcarriers,
            coherence_subcarriers: cfg.coherence_subcarriers,
            detection_subcarriers: cfg.detection_subcarriers,
            pilot_power_dbw: db(&cfg.pilot_powers),
            data_power_dbw: db(&cfg.data_powers),
            user_gain_db: db(&cfg.user_gains),
            jammer_pilot_power_dbw: linear_to_db(cfg.jammer_pilot_power),
            jammer_data_power_dbw: linear_to_db(cfg.jammer_data_power),
            jammer_gain_db: linear_to_db(cfg.jammer_gain),
            noise_power_dbw: linear_to_db(cfg.noise_power),
            user_spread: cfg.user_spread,
            jammer_spread: Some(cfg.jammer_spread),
            fap_target: cfg.fap_target,
            threshold: cfg.threshold,
            min_common_pilots: cfg.min_common_pilots,
            mu_source: cfg.mu_source,
            seed: cfg.seed,
        }
    }
}
