//! Monte-Carlo experiment harness.
//!
//! Each runner maps trial indices to per-trial records in parallel, collects
//! them in index order and reduces them sequentially, so a table depends
//! only on the [`ExperimentSpec`]. Trial `t` always uses stream `t` of the
//! master seed; sweep points that share a geometry (jammer power) reuse one
//! draw per trial, so neighbouring points are compared on common random
//! numbers.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{db_to_linear, SystemConfig, SystemConfigFile};
use crate::detector::{estimate_rp_sets, EnergyStatistics};
use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::jamming::{collision_probability_bound, detect_jammer, rp_occurrence_counts, supports_share_path};
use crate::rng::trial_rng;
use crate::stats::Summary;
use crate::support::SupportSet;
use crate::transmission::PilotBook;
use crate::trial::{analyze, arm_report, Arm, Scene};
use crate::validation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CdpVsJammerPower,
    FapVsSpread,
    SeVsJammerPower,
    SeVsAntennas,
    ValidationSuite,
}

impl ExperimentKind {
    /// Name of the swept quantity in result tables.
    pub fn sweep_param(self) -> &'static str {
        match self {
            ExperimentKind::CdpVsJammerPower => "jammer_pilot_power_dbw",
            ExperimentKind::FapVsSpread => "angular_spread_rad",
            ExperimentKind::SeVsJammerPower => "jammer_power_dbw",
            ExperimentKind::SeVsAntennas => "antennas",
            ExperimentKind::ValidationSuite => "check",
        }
    }

    /// File stem used for outputs.
    pub fn stem(self) -> &'static str {
        match self {
            ExperimentKind::CdpVsJammerPower => "cdp",
            ExperimentKind::FapVsSpread => "fap",
            ExperimentKind::SeVsJammerPower => "se_jammer",
            ExperimentKind::SeVsAntennas => "se_antennas",
            ExperimentKind::ValidationSuite => "validation",
        }
    }
}

/// Detector setting evaluated side by side in the detection experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionArm {
    /// `N_d`.
    pub subcarriers: usize,
    /// Explicit threshold in W; derived from the false-alarm target when absent.
    #[serde(default)]
    pub threshold: Option<f64>,
}

impl DetectionArm {
    pub fn label(&self) -> String {
        format!("nd{}", self.subcarriers)
    }

    fn threshold(&self, config: &SystemConfig) -> Result<f64> {
        match self.threshold {
            Some(t) => Ok(t),
            None => crate::detector::threshold_for_fap(self.subcarriers, config.noise_power, config.fap_target),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub config: SystemConfig,
    /// Swept values, in the units of [`ExperimentKind::sweep_param`].
    pub sweep: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Detector parameters `g` compared in the detection experiments.
    pub g_values: Vec<usize>,
    pub detection_arms: Vec<DetectionArm>,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

/// Jammer powers of the detection sweep: -50 to +10 dBW in 2.5 dB steps.
pub fn default_cdp_sweep() -> Vec<f64> {
    (0..=24).map(|i| -50.0 + 2.5 * i as f64).collect()
}

/// Jammer powers of the SE sweep: -20 to +10 dBW in 2.5 dB steps.
pub fn default_se_sweep() -> Vec<f64> {
    (0..=12).map(|i| -20.0 + 2.5 * i as f64).collect()
}

/// Angular spreads pi/36, 2 pi/36, ..., pi/6.
pub fn default_spread_sweep() -> Vec<f64> {
    (1..=6).map(|i| i as f64 * PI / 36.0).collect()
}

pub fn default_antenna_sweep() -> Vec<f64> {
    vec![50.0, 100.0, 200.0, 400.0]
}

/// `N_d = 1` with 0.02 W and `N_d = 20` with 0.11 W.
pub fn reference_detection_arms() -> Vec<DetectionArm> {
    vec![
        DetectionArm { subcarriers: 1, threshold: Some(0.02) },
        DetectionArm { subcarriers: 20, threshold: Some(0.11) },
    ]
}

impl ExperimentSpec {
    /// Defaults for `kind` on top of `config`.
    pub fn new(kind: ExperimentKind, config: SystemConfig) -> Self {
        let (sweep, trials) = match kind {
            ExperimentKind::CdpVsJammerPower => (default_cdp_sweep(), 1000),
            ExperimentKind::FapVsSpread => (default_spread_sweep(), 1000),
            ExperimentKind::SeVsJammerPower => (default_se_sweep(), 500),
            ExperimentKind::SeVsAntennas => (default_antenna_sweep(), 500),
            ExperimentKind::ValidationSuite => (Vec::new(), 10_000),
        };
        Self {
            kind,
            seed: config.seed,
            config,
            sweep,
            trials,
            g_values: vec![6, 8, 10],
            detection_arms: reference_detection_arms(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.kind != ExperimentKind::ValidationSuite {
            if self.sweep.is_empty() {
                return Err(Error::Config("sweep grid is empty".into()));
            }
            if !self.sweep.windows(2).all(|w| w[0] < w[1]) || self.sweep.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("sweep grid must be finite and strictly increasing".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let detection = matches!(self.kind, ExperimentKind::CdpVsJammerPower | ExperimentKind::FapVsSpread);
        if detection {
            if self.g_values.is_empty() || self.detection_arms.is_empty() {
                return Err(Error::Config("detection experiments need g values and detection arms".into()));
            }
            for &g in &self.g_values {
                if g < 2 || g > self.config.users {
                    return Err(Error::Config(format!("g = {g} outside 2..={}", self.config.users)));
                }
            }
            let ne = self.config.estimated_subcarriers();
            for arm in &self.detection_arms {
                if arm.subcarriers == 0 || arm.subcarriers > ne {
                    return Err(Error::Config(format!("N_d = {} outside 1..={ne}", arm.subcarriers)));
                }
                if arm.threshold.is_some_and(|t| !(t > 0.0)) {
                    return Err(Error::Config("detection thresholds must be positive".into()));
                }
            }
        }
        match self.kind {
            ExperimentKind::FapVsSpread if self.sweep.iter().any(|&s| !(s > 0.0 && s < PI)) => {
                Err(Error::Config("spreads must lie in (0, pi)".into()))
            }
            ExperimentKind::SeVsAntennas if self.sweep.iter().any(|&m| m < 2.0 || m.fract() != 0.0) => {
                Err(Error::Config("antenna counts must be integers >= 2".into()))
            }
            _ => Ok(()),
        }
    }

    fn max_subcarriers(&self) -> usize {
        self.detection_arms.iter().map(|a| a.subcarriers).max().unwrap_or(1)
    }
}

/// JSON form of an experiment; everything but `kind` is optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpecFile {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub config: SystemConfigFile,
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub g_values: Option<Vec<usize>>,
    #[serde(default)]
    pub detection_arms: Option<Vec<DetectionArm>>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentSpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid experiment spec: {e}")))
    }

    pub fn into_spec(self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::new(self.kind, self.config.into_config()?);
        if let Some(v) = self.sweep {
            spec.sweep = v;
        }
        if let Some(v) = self.trials {
            spec.trials = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.g_values {
            spec.g_values = v;
        }
        if let Some(v) = self.detection_arms {
            spec.detection_arms = v;
        }
        spec.threads = self.threads;
        spec.validate()?;
        Ok(spec)
    }
}

/// One line of a result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub arm: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Everything needed to regenerate a table.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub experiment: ExperimentKind,
    pub config: SystemConfigFile,
    pub seed: u64,
    pub trials: usize,
    pub sweep: Vec<f64>,
    pub g_values: Vec<usize>,
    pub detection_arms: Vec<DetectionArm>,
    pub version: String,
    /// Seconds since the Unix epoch when the table was produced.
    pub timestamp: u64,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub metadata: Metadata,
}

impl ResultTable {
    fn new(spec: &ExperimentSpec) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            rows: Vec::new(),
            metadata: Metadata {
                experiment: spec.kind,
                config: SystemConfigFile::from_config(&spec.config),
                seed: spec.seed,
                trials: spec.trials,
                sweep: spec.sweep.clone(),
                g_values: spec.g_values.clone(),
                detection_arms: spec.detection_arms.clone(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp,
            },
        }
    }

    fn push(&mut self, value: f64, arm: &str, metric: &str, s: Summary) {
        self.rows.push(ResultRow {
            sweep_param: self.metadata.experiment.sweep_param().to_string(),
            sweep_value: value,
            arm: arm.to_string(),
            metric: metric.to_string(),
            mean: s.mean,
            stderr: s.stderr,
            trials: s.count,
        });
    }

    /// Rows matching `arm` and `metric`, in sweep order.
    pub fn series(&self, arm: &str, metric: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.arm == arm && r.metric == metric).collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        fs::write(&csv_path, self.to_csv_string()?)?;
        fs::write(&json_path, serde_json::to_string_pretty(&self.metadata)?)?;
        Ok((csv_path, json_path))
    }

    /// Names of failed checks in a validation table.
    pub fn failed_checks(&self) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| r.metric == "pass" && r.mean != 1.0)
            .map(|r| r.arm.clone())
            .collect()
    }
}

/// Reads rows written by [`ResultTable::write`].
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Runs `f` on trial indices `0..trials`, in parallel, keeping index order.
pub(crate) fn run_trials<T, F>(trials: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let job = || (0..trials as u64).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(job),
        None => job(),
    }
}

/// Collects column `j` of per-trial flag vectors.
fn column(records: &[Vec<bool>], j: usize) -> Summary {
    Summary::of_indicators(&records.iter().map(|r| r[j]).collect::<Vec<_>>())
}

/// Common-RP test for several `g` on one training observation.
/// Returns, per `g`, the verdict and whether `Q_g` hits the jammer's RPs.
fn detect_multi(
    angular: &[Vec<Vec<num_complex::Complex64>>],
    arm: &DetectionArm,
    threshold: f64,
    g_values: &[usize],
    antennas: usize,
    jammer: Option<&SupportSet>,
) -> Result<Vec<(bool, bool)>> {
    let stats = EnergyStatistics::from_angular(&angular[..arm.subcarriers], threshold, None)?;
    let counts = rp_occurrence_counts(&estimate_rp_sets(&stats), antennas)?;
    g_values
        .iter()
        .map(|&g| {
            let d = detect_jammer(&counts, g)?;
            let hit = jammer.is_some_and(|w| d.common_set.intersection_len(w) > 0);
            Ok((d.jammer_detected, hit))
        })
        .collect()
}

/// Correct-detection probability versus the jammer's training power.
///
/// Rows: arm `nd<N_d>_g<g>`, metrics `cdp` and `jammer_rp_hit` (fraction of
/// trials whose `Q_g` contains a jammer RP).
pub fn run_cdp_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let cfg = &spec.config;
    let grid = AngularGrid::with_antennas(cfg.antennas)?;
    let pilots = PilotBook::new(cfg.pilot_length)?;
    let thresholds = spec
        .detection_arms
        .iter()
        .map(|a| a.threshold(cfg))
        .collect::<Result<Vec<_>>>()?;
    let nd = spec.max_subcarriers();
    let powers: Vec<f64> = spec.sweep.iter().map(|&q| db_to_linear(q)).collect();
    let records = run_trials(spec.trials, spec.threads, |t| {
        let mut rng = trial_rng(spec.seed, t);
        let scene = Scene::draw(&mut rng, &grid, cfg, &pilots, nd)?;
        let parts = scene.training(&mut rng, &grid, &pilots, cfg, true)?;
        let mut flags = Vec::new();
        for &q in &powers {
            let angular = parts.combine(q);
            for (arm, &eps) in spec.detection_arms.iter().zip(&thresholds) {
                for (d, hit) in detect_multi(&angular, arm, eps, &spec.g_values, cfg.antennas, Some(&scene.jammer.support))? {
                    flags.push(d);
                    flags.push(hit);
                }
            }
        }
        Ok(flags)
    })?;
    let mut table = ResultTable::new(spec);
    let mut j = 0;
    for &q in &spec.sweep {
        for arm in &spec.detection_arms {
            for &g in &spec.g_values {
                let label = format!("{}_g{g}", arm.label());
                table.push(q, &label, "cdp", column(&records, j));
                table.push(q, &label, "jammer_rp_hit", column(&records, j + 1));
                j += 2;
            }
        }
    }
    Ok(table)
}

/// False-alarm probability versus angular spread, without a jammer.
///
/// Rows: arm `nd<N_d>_g<g>` with metric `fap`; arm `true_support_g<g>` with
/// metric `collision_rate` (g users sharing a true RP); arm `bound_g<g>` with
/// metric `collision_bound`.
pub fn run_fap_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let grid = AngularGrid::with_antennas(spec.config.antennas)?;
    let pilots = PilotBook::new(spec.config.pilot_length)?;
    let nd = spec.max_subcarriers();
    let mut table = ResultTable::new(spec);
    for &spread in &spec.sweep {
        let cfg = SystemConfig {
            user_spread: spread,
            jammer_spread: spread,
            ..spec.config.clone()
        };
        let thresholds = spec
            .detection_arms
            .iter()
            .map(|a| a.threshold(&cfg))
            .collect::<Result<Vec<_>>>()?;
        let records = run_trials(spec.trials, spec.threads, |t| {
            let mut rng = trial_rng(spec.seed, t);
            let scene = Scene::draw(&mut rng, &grid, &cfg, &pilots, nd)?;
            let parts = scene.training(&mut rng, &grid, &pilots, &cfg, false)?;
            let angular = parts.combine(0.0);
            let mut flags = Vec::new();
            for (arm, &eps) in spec.detection_arms.iter().zip(&thresholds) {
                flags.extend(detect_multi(&angular, arm, eps, &spec.g_values, cfg.antennas, None)?.into_iter().map(|(d, _)| d));
            }
            let supports: Vec<SupportSet> = scene.users.iter().map(|u| u.support.clone()).collect();
            for &g in &spec.g_values {
                flags.push(supports_share_path(&supports, cfg.antennas, g));
            }
            Ok(flags)
        })?;
        let mut j = 0;
        for arm in &spec.detection_arms {
            for &g in &spec.g_values {
                table.push(spread, &format!("{}_g{g}", arm.label()), "fap", column(&records, j));
                j += 1;
            }
        }
        for &g in &spec.g_values {
            table.push(spread, &format!("true_support_g{g}"), "collision_rate", column(&records, j));
            j += 1;
            let bound = collision_probability_bound(cfg.users, g, spread)?;
            table.push(
                spread,
                &format!("bound_g{g}"),
                "collision_bound",
                Summary { mean: bound, stderr: 0.0, count: spec.trials },
            );
        }
    }
    Ok(table)
}

/// Per-trial SE record of one sweep point.
struct SeRecord {
    /// no_jammer, suppressed, unsuppressed.
    sum_se: [f64; 3],
    closed_form: [f64; 3],
    detected: bool,
    degenerate: f64,
}

fn se_at_power(
    scene: &Scene,
    parts: &crate::transmission::TrainingParts,
    clean: &crate::suppression::SinrReport,
    cfg: &SystemConfig,
    threshold: f64,
) -> Result<SeRecord> {
    let fap = cfg.threshold.is_none().then_some(cfg.fap_target);
    let nd = cfg.detection_subcarriers;
    let analysis = analyze(&parts.combine(cfg.jammer_pilot_power), nd, threshold, fap, cfg.min_common_pilots, cfg.antennas)?;
    let sup = arm_report(Arm::Suppressed, &analysis, scene, cfg)?;
    let unsup = arm_report(Arm::Unsuppressed, &analysis, scene, cfg)?;
    Ok(SeRecord {
        sum_se: [clean.sum_se, sup.sum_se, unsup.sum_se],
        closed_form: [clean.sum_se_closed_form, sup.sum_se_closed_form, unsup.sum_se_closed_form],
        detected: analysis.detection.jammer_detected,
        degenerate: sup.degenerate.iter().filter(|&&d| d).count() as f64,
    })
}

fn push_se_rows(table: &mut ResultTable, value: f64, records: &[SeRecord]) {
    for (a, arm) in Arm::ALL.iter().enumerate() {
        let se: Vec<f64> = records.iter().map(|r| r.sum_se[a]).collect();
        table.push(value, arm.label(), "sum_se", Summary::of(&se));
        if *arm != Arm::Unsuppressed {
            let cf: Vec<f64> = records.iter().map(|r| r.closed_form[a]).collect();
            table.push(value, arm.label(), "sum_se_closed_form", Summary::of(&cf));
        }
    }
    let det: Vec<bool> = records.iter().map(|r| r.detected).collect();
    table.push(value, Arm::Suppressed.label(), "detection_rate", Summary::of_indicators(&det));
    let deg: Vec<f64> = records.iter().map(|r| r.degenerate).collect();
    table.push(value, Arm::Suppressed.label(), "degenerate_users", Summary::of(&deg));
}

/// Sum spectral efficiency of the three arms versus `q_t = q_d`.
///
/// Rows per point: `sum_se` for every arm, `sum_se_closed_form` for the
/// no-jammer and suppressed arms, and the suppressed arm's `detection_rate`
/// and mean number of `degenerate_users`.
pub fn run_se_vs_jammer_power(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let cfg = &spec.config;
    let grid = AngularGrid::with_antennas(cfg.antennas)?;
    let pilots = PilotBook::new(cfg.pilot_length)?;
    let threshold = cfg.detection_threshold()?;
    let fap = cfg.threshold.is_none().then_some(cfg.fap_target);
    let nd = cfg.detection_subcarriers;
    let points: Vec<SystemConfig> = spec.sweep.iter().map(|&q| cfg.with_jammer_power(db_to_linear(q))).collect();
    let records = run_trials(spec.trials, spec.threads, |t| {
        let mut rng = trial_rng(spec.seed, t);
        let scene = Scene::draw(&mut rng, &grid, cfg, &pilots, nd)?;
        let parts = scene.training(&mut rng, &grid, &pilots, cfg, true)?;
        let clean_analysis = analyze(&parts.combine(0.0), nd, threshold, fap, cfg.min_common_pilots, cfg.antennas)?;
        let clean = arm_report(Arm::NoJammer, &clean_analysis, &scene, cfg)?;
        points
            .iter()
            .map(|p| se_at_power(&scene, &parts, &clean, p, threshold))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = ResultTable::new(spec);
    for (j, &q) in spec.sweep.iter().enumerate() {
        let point: Vec<SeRecord> = records
            .iter()
            .map(|r| SeRecord {
                sum_se: r[j].sum_se,
                closed_form: r[j].closed_form,
                detected: r[j].detected,
                degenerate: r[j].degenerate,
            })
            .collect();
        push_se_rows(&mut table, q, &point);
    }
    Ok(table)
}

/// Sum spectral efficiency of the three arms versus the number of antennas,
/// at the configured jammer powers.
pub fn run_se_vs_antennas(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let mut table = ResultTable::new(spec);
    for &m in &spec.sweep {
        let cfg = spec.config.with_antennas(m as usize);
        cfg.validate()?;
        let grid = AngularGrid::with_antennas(cfg.antennas)?;
        let pilots = PilotBook::new(cfg.pilot_length)?;
        let threshold = cfg.detection_threshold()?;
        let fap = cfg.threshold.is_none().then_some(cfg.fap_target);
        let nd = cfg.detection_subcarriers;
        let records = run_trials(spec.trials, spec.threads, |t| {
            let mut rng = trial_rng(spec.seed, t);
            let scene = Scene::draw(&mut rng, &grid, &cfg, &pilots, nd)?;
            let parts = scene.training(&mut rng, &grid, &pilots, &cfg, true)?;
            let clean_analysis = analyze(&parts.combine(0.0), nd, threshold, fap, cfg.min_common_pilots, cfg.antennas)?;
            let clean = arm_report(Arm::NoJammer, &clean_analysis, &scene, &cfg)?;
            se_at_power(&scene, &parts, &clean, &cfg, threshold)
        })?;
        push_se_rows(&mut table, m, &records);
    }
    Ok(table)
}

/// Runs the property checks of [`validation::standard_checks`]; each check
/// contributes `observed`, `reference` and `pass` rows under its name.
pub fn run_validation_suite(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let checks = validation::standard_checks(spec.seed, spec.trials, spec.threads)?;
    let mut table = ResultTable::new(spec);
    for (i, c) in checks.iter().enumerate() {
        let v = i as f64;
        table.push(v, &c.name, "observed", Summary { mean: c.observed, stderr: c.stderr, count: c.samples });
        table.push(v, &c.name, "reference", Summary { mean: c.reference, stderr: 0.0, count: c.samples });
        table.push(
            v,
            &c.name,
            "pass",
            Summary { mean: if c.passed { 1.0 } else { 0.0 }, stderr: 0.0, count: 1 },
        );
    }
    Ok(table)
}

/// Dispatches on `spec.kind`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    match spec.kind {
        ExperimentKind::CdpVsJammerPower => run_cdp_experiment(spec),
        ExperimentKind::FapVsSpread => run_fap_experiment(spec),
        ExperimentKind::SeVsJammerPower => run_se_vs_jammer_power(spec),
        ExperimentKind::SeVsAntennas => run_se_vs_antennas(spec),
        ExperimentKind::ValidationSuite => run_validation_suite(spec),
    }
}

/// Sweep value where a series first reaches `level`, by linear interpolation
/// between the bracketing points.
pub fn crossing_point(sweep: &[f64], values: &[f64], level: f64) -> Option<f64> {
    let first = sweep.iter().zip(values).position(|(_, &v)| v >= level)?;
    if first == 0 {
        return Some(sweep[0]);
    }
    let (x0, x1) = (sweep[first - 1], sweep[first]);
    let (y0, y1) = (values[first - 1], values[first]);
    Some(x0 + (level - y0) * (x1 - x0) / (y1 - y0))
}
