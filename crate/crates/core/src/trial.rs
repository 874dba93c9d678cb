//! One coherence block end to end: geometry, training, detection and the
//! per-user SINR of each estimator arm.

use rand::Rng;
use serde::Serialize;

use crate::channel::{draw_channel, sample_terminal, ChannelRealization, TerminalGeometry};
use crate::config::{SystemConfig, SystemConfigFile};
use crate::detector::{estimate_rp_sets, EnergyStatistics, RpEstimate};
use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::jamming::{detect_jammer, rp_occurrence_counts, DetectionOutcome};
use crate::rng::trial_rng;
use crate::suppression::{sinr_report, user_rp_set, SinrReport, SupportModel};
use crate::support::SupportSet;
use crate::transmission::{generate_jammer_pilot, JammerLink, JammerPilot, PilotBook, TrainingParts};

/// Terminals, channels and jamming sequences of one coherence block.
#[derive(Debug, Clone)]
pub struct Scene {
    pub users: Vec<TerminalGeometry>,
    pub jammer: TerminalGeometry,
    pub user_channels: Vec<ChannelRealization>,
    pub jammer_channel: ChannelRealization,
    pub jammer_pilot: JammerPilot,
}

impl Scene {
    /// Draws `K` users, the jammer, their channels on `subcarriers`
    /// subcarriers and the jamming sequences, in that order.
    pub fn draw<R: Rng + ?Sized>(
        rng: &mut R,
        grid: &AngularGrid,
        config: &SystemConfig,
        pilots: &PilotBook,
        subcarriers: usize,
    ) -> Result<Self> {
        let users = config
            .user_gains
            .iter()
            .map(|&beta| sample_terminal(rng, grid, config.user_spread, beta))
            .collect::<Result<Vec<_>>>()?;
        let jammer = sample_terminal(rng, grid, config.jammer_spread, config.jammer_gain)?;
        let user_channels = users.iter().map(|t| draw_channel(rng, t, grid, subcarriers)).collect();
        let jammer_channel = draw_channel(rng, &jammer, grid, subcarriers);
        let jammer_pilot = generate_jammer_pilot(rng, pilots, subcarriers);
        Ok(Self {
            users,
            jammer,
            user_channels,
            jammer_channel,
            jammer_pilot,
        })
    }

    pub fn jammer_link(&self) -> JammerLink<'_> {
        JammerLink {
            channel: &self.jammer_channel,
            pilot: &self.jammer_pilot,
        }
    }

    /// Training parts with the jammer (`with_jammer`) or without it.
    pub fn training<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        grid: &AngularGrid,
        pilots: &PilotBook,
        config: &SystemConfig,
        with_jammer: bool,
    ) -> Result<TrainingParts> {
        let link = with_jammer.then(|| self.jammer_link());
        TrainingParts::simulate(rng, grid, &self.user_channels, link, pilots, config)
    }
}

/// Detector output for one training observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub statistics: EnergyStatistics,
    pub estimates: RpEstimate,
    pub detection: DetectionOutcome,
}

/// Runs the detector on the first `subcarriers` angular training vectors.
pub fn analyze(
    angular: &[Vec<Vec<num_complex::Complex64>>],
    subcarriers: usize,
    threshold: f64,
    fap_target: Option<f64>,
    g: usize,
    antennas: usize,
) -> Result<Analysis> {
    if subcarriers == 0 || subcarriers > angular.len() {
        return Err(Error::Contract(format!(
            "{subcarriers} detection subcarriers requested from {} available",
            angular.len()
        )));
    }
    let statistics = EnergyStatistics::from_angular(&angular[..subcarriers], threshold, fap_target)?;
    let estimates = estimate_rp_sets(&statistics);
    let counts = rp_occurrence_counts(&estimates, antennas)?;
    let detection = detect_jammer(&counts, g)?;
    Ok(Analysis {
        statistics,
        estimates,
        detection,
    })
}

/// Which channel estimator an SE arm uses, and whether the jammer is on air.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    /// No jammer; the full detector still runs and removes any false `Q_g`.
    NoJammer,
    /// Jammer on air, its detected RPs removed from every user's set.
    Suppressed,
    /// Jammer on air, every detected RP kept.
    Unsuppressed,
}

impl Arm {
    pub const ALL: [Arm; 3] = [Arm::NoJammer, Arm::Suppressed, Arm::Unsuppressed];

    pub fn label(self) -> &'static str {
        match self {
            Arm::NoJammer => "no_jammer",
            Arm::Suppressed => "suppressed",
            Arm::Unsuppressed => "unsuppressed",
        }
    }
}

/// SINR report of one arm given the detector output on the matching training.
pub fn arm_report(arm: Arm, analysis: &Analysis, scene: &Scene, config: &SystemConfig) -> Result<SinrReport> {
    let common = &analysis.detection.common_set;
    let sets: Vec<SupportSet> = match arm {
        Arm::NoJammer | Arm::Suppressed => analysis
            .estimates
            .sets
            .iter()
            .map(|s| user_rp_set(s, common).support)
            .collect(),
        Arm::Unsuppressed => analysis.estimates.sets.clone(),
    };
    let jammer = (arm != Arm::NoJammer).then_some(&scene.jammer);
    sinr_report(sets, config, SupportModel { users: &scene.users, jammer })
}

/// Everything `single-trial` reports about one coherence block.
#[derive(Debug, Clone, Serialize)]
pub struct TrialDump {
    pub seed: u64,
    pub trial: u64,
    pub config: SystemConfigFile,
    pub threshold: f64,
    pub user_supports: Vec<SupportSet>,
    pub user_mean_angles: Vec<f64>,
    pub jammer_support: SupportSet,
    pub jammer_mean_angle: f64,
    pub estimated_sets: Vec<SupportSet>,
    pub occurrence_counts: Vec<usize>,
    pub common_set: SupportSet,
    pub jammer_detected: bool,
    pub user_sets: Vec<SupportSet>,
    pub degenerate_users: Vec<bool>,
    pub suppressed: ArmSummary,
    pub unsuppressed: ArmSummary,
    pub no_jammer: ArmSummary,
    /// Per-pilot RP energies `[k][i]`, present with intermediates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_jammer_estimated_sets: Option<Vec<SupportSet>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArmSummary {
    pub sets: Vec<SupportSet>,
    pub sinr: Vec<f64>,
    pub sinr_closed_form: Vec<f64>,
    pub rates: Vec<f64>,
    pub sum_se: f64,
}

impl From<&SinrReport> for ArmSummary {
    fn from(r: &SinrReport) -> Self {
        Self {
            sets: r.sets.clone(),
            sinr: r.sinr.clone(),
            sinr_closed_form: r.sinr_closed_form.clone(),
            rates: r.rates.clone(),
            sum_se: r.sum_se,
        }
    }
}

/// Runs trial `trial` of the stream seeded by `seed` with the jammer on air.
pub fn single_trial(config: &SystemConfig, seed: u64, trial: u64, intermediates: bool) -> Result<TrialDump> {
    config.validate()?;
    let grid = AngularGrid::with_antennas(config.antennas)?;
    let pilots = PilotBook::new(config.pilot_length)?;
    let threshold = config.detection_threshold()?;
    let nd = config.detection_subcarriers;
    let g = config.min_common_pilots;
    let m = config.antennas;
    let fap = config.threshold.is_none().then_some(config.fap_target);

    let mut rng = trial_rng(seed, trial);
    let scene = Scene::draw(&mut rng, &grid, config, &pilots, nd)?;
    let parts = scene.training(&mut rng, &grid, &pilots, config, true)?;
    let jammed = analyze(&parts.combine(config.jammer_pilot_power), nd, threshold, fap, g, m)?;
    let clean = analyze(&parts.combine(0.0), nd, threshold, fap, g, m)?;
    let suppressed = arm_report(Arm::Suppressed, &jammed, &scene, config)?;
    let unsuppressed = arm_report(Arm::Unsuppressed, &jammed, &scene, config)?;
    let no_jammer = arm_report(Arm::NoJammer, &clean, &scene, config)?;
    Ok(TrialDump {
        seed,
        trial,
        config: SystemConfigFile::from_config(config),
        threshold,
        user_supports: scene.users.iter().map(|t| t.support.clone()).collect(),
        user_mean_angles: scene.users.iter().map(|t| t.mean_angle).collect(),
        jammer_support: scene.jammer.support.clone(),
        jammer_mean_angle: scene.jammer.mean_angle,
        estimated_sets: jammed.estimates.sets.clone(),
        occurrence_counts: jammed.detection.occurrence_counts.clone(),
        common_set: jammed.detection.common_set.clone(),
        jammer_detected: jammed.detection.jammer_detected,
        user_sets: suppressed.sets.clone(),
        degenerate_users: suppressed.degenerate.clone(),
        suppressed: (&suppressed).into(),
        unsuppressed: (&unsuppressed).into(),
        no_jammer: (&no_jammer).into(),
        energies: intermediates.then(|| jammed.statistics.energies.clone()),
        no_jammer_estimated_sets: intermediates.then(|| clean.estimates.sets.clone()),
    })
}
