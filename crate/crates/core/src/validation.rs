//! Property checks with explicit margins, shared by the `validate`
//! subcommand and the test suites.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{draw_channel, sample_terminal, TerminalGeometry};
use crate::config::SystemConfig;
use crate::detector::{threshold_for_fap, EnergyStatistics};
use crate::error::Result;
use crate::experiments::run_trials;
use crate::grid::AngularGrid;
use crate::jamming::{collision_probability_bound, supports_share_path};
use crate::rng::trial_rng;
use crate::stats::Summary;
use crate::suppression::{
    overlap_terms, assemble_sinr, empirical_moments, estimator_inputs, lmmse_estimate, sinr_closed_form,
    EmpiricalMoments, FixedSupportScenario, OverlapCounts,
};
use crate::support::SupportSet;
use crate::transmission::{simulate_training, PilotBook};

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub observed: f64,
    pub stderr: f64,
    pub reference: f64,
    pub samples: usize,
    pub passed: bool,
}

impl CheckResult {
    /// `|observed - reference| <= 3 stderr + floor`.
    fn within(name: String, observed: f64, stderr: f64, reference: f64, samples: usize, floor: f64) -> Self {
        let passed = (observed - reference).abs() <= 3.0 * stderr + floor;
        Self { name, observed, stderr, reference, samples, passed }
    }

    /// `observed <= reference + 3 stderr`.
    fn at_most(name: String, observed: f64, stderr: f64, reference: f64, samples: usize) -> Self {
        let passed = observed <= reference + 3.0 * stderr;
        Self { name, observed, stderr, reference, samples, passed }
    }
}

/// Noise-only RP energies `W_{i,k}` from the full training chain.
fn noise_only_energies(
    seed: u64,
    subcarriers: usize,
    noise_power: f64,
    min_samples: usize,
    threads: Option<usize>,
) -> Result<Vec<f64>> {
    let mut cfg = SystemConfig::default();
    cfg.pilot_powers = vec![0.0; cfg.users];
    cfg.noise_power = noise_power;
    cfg.detection_subcarriers = subcarriers;
    let grid = AngularGrid::with_antennas(cfg.antennas)?;
    let pilots = PilotBook::new(cfg.pilot_length)?;
    let template = TerminalGeometry::at(&grid, 0.0, cfg.user_spread, 1.0)?;
    let per_trial = cfg.users * cfg.antennas;
    let trials = min_samples.div_ceil(per_trial);
    let blocks = run_trials(trials, threads, |t| {
        let mut rng = trial_rng(seed, t);
        let users: Vec<_> = (0..cfg.users).map(|_| draw_channel(&mut rng, &template, &grid, subcarriers)).collect();
        let obs = simulate_training(&mut rng, &users, None, &pilots, &cfg)?;
        let angular: Vec<Vec<Vec<Complex64>>> = obs
            .despread
            .iter()
            .map(|per_n| per_n.iter().map(|y| grid.to_angular(y)).collect())
            .collect();
        let stats = EnergyStatistics::from_angular(&angular, 0.0, None)?;
        Ok(stats.energies.into_iter().flatten().collect::<Vec<f64>>())
    })?;
    Ok(blocks.into_iter().flatten().collect())
}

/// Per-RP false-alarm rate under noise only is at most `eta` (+3 SE).
pub fn check_false_alarm_guarantee(
    seed: u64,
    subcarriers: usize,
    noise_power: f64,
    eta: f64,
    min_samples: usize,
    threads: Option<usize>,
) -> Result<CheckResult> {
    let eps = threshold_for_fap(subcarriers, noise_power, eta)?;
    let w = noise_only_energies(seed, subcarriers, noise_power, min_samples, threads)?;
    let hits: Vec<bool> = w.iter().map(|&x| x > eps).collect();
    let s = Summary::of_indicators(&hits);
    Ok(CheckResult::at_most(
        format!("false_alarm_nd{subcarriers}_eta{eta:e}"),
        s.mean,
        s.stderr,
        eta,
        s.count,
    ))
}

/// Noise-only energy mean and variance match `Gamma(N_d, sigma^2)`.
pub fn check_gamma_moments(
    seed: u64,
    subcarriers: usize,
    noise_power: f64,
    min_samples: usize,
    threads: Option<usize>,
) -> Result<Vec<CheckResult>> {
    let w = noise_only_energies(seed, subcarriers, noise_power, min_samples, threads)?;
    let n = w.len();
    let s = Summary::of(&w);
    let a = subcarriers as f64;
    let sq: Vec<f64> = w.iter().map(|x| (x - s.mean).powi(2)).collect();
    let v = Summary::of(&sq);
    let var = v.mean * n as f64 / (n - 1) as f64;
    Ok(vec![
        CheckResult::within(format!("gamma_mean_nd{subcarriers}"), s.mean, s.stderr, a * noise_power, n, 0.0),
        CheckResult::within(
            format!("gamma_variance_nd{subcarriers}"),
            var,
            v.stderr,
            a * noise_power * noise_power,
            n,
            0.0,
        ),
    ])
}

/// Bisection threshold at `N_d = 1` agrees with `-sigma^2 ln eta` to 1e-9.
pub fn check_exponential_threshold(noise_power: f64, eta: f64) -> Result<CheckResult> {
    let eps = threshold_for_fap(1, noise_power, eta)?;
    let exact = -noise_power * eta.ln();
    let rel = (eps / exact - 1.0).abs();
    Ok(CheckResult {
        name: format!("exponential_threshold_eta{eta:e}"),
        observed: eps,
        stderr: 0.0,
        reference: exact,
        samples: 1,
        passed: rel <= 1e-9,
    })
}

/// Frequency of `g` users sharing a true active RP is at most the collision
/// bound (+3 SE), over `draws` jammer-free geometries.
pub fn check_collision_bound(
    seed: u64,
    users: usize,
    antennas: usize,
    spread: f64,
    g: usize,
    draws: usize,
    threads: Option<usize>,
) -> Result<CheckResult> {
    let grid = AngularGrid::with_antennas(antennas)?;
    let hits = run_trials(draws, threads, |t| {
        let mut rng = trial_rng(seed, t);
        let supports = (0..users)
            .map(|_| sample_terminal(&mut rng, &grid, spread, 1.0).map(|u| u.support))
            .collect::<Result<Vec<SupportSet>>>()?;
        Ok(supports_share_path(&supports, antennas, g))
    })?;
    let s = Summary::of_indicators(&hits);
    let bound = collision_probability_bound(users, g, spread)?;
    Ok(CheckResult::at_most(format!("collision_bound_g{g}"), s.mean, s.stderr, bound, s.count))
}

/// Reference fixed-support scenario: `users` terminals at fixed angles
/// (neighbours overlap) and a jammer on disjoint RPs. Estimated sets equal
/// the true supports.
pub fn reference_scenario(users: usize, antennas: usize) -> Result<(AngularGrid, FixedSupportScenario, SystemConfig)> {
    let grid = AngularGrid::with_antennas(antennas)?;
    let spread = PI / 18.0;
    let terminals = (0..users)
        .map(|k| TerminalGeometry::at(&grid, -0.6 + 0.06 * k as f64, spread, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let jammer = TerminalGeometry::at(&grid, 0.9, spread, 1.0)?;
    let estimated = terminals.iter().map(|t| t.support.clone()).collect();
    let mut cfg = SystemConfig::default();
    cfg.antennas = antennas;
    cfg.users = users;
    cfg.pilot_length = users;
    cfg.pilot_powers = vec![1.0; users];
    cfg.data_powers = vec![1.0; users];
    cfg.user_gains = vec![1.0; users];
    cfg.min_common_pilots = 2.min(users);
    Ok((grid, FixedSupportScenario { users: terminals, jammer: Some(jammer), estimated }, cfg))
}

/// Monte-Carlo moments of user `k` against the overlap-count expressions,
/// and the SINR assembled from them against the closed form.
pub fn check_moments(
    seed: u64,
    grid: &AngularGrid,
    scenario: &FixedSupportScenario,
    config: &SystemConfig,
    k: usize,
    draws: usize,
) -> Result<Vec<CheckResult>> {
    let batches = 50;
    let draws = draws.div_ceil(batches) * batches;
    let mc: EmpiricalMoments = empirical_moments(&mut trial_rng(seed, k as u64), grid, scenario, config, k, draws, batches)?;
    let overlaps = OverlapCounts::from_sets(&scenario.estimated);
    let scales: Vec<f64> = scenario.users.iter().map(|t| t.power_scale).collect();
    let xi = estimator_inputs(config, k, &scenario.users[k], &scenario.estimated[k]).gain_mean_square();
    let reference = overlap_terms(k, config, &overlaps, xi, &scales);
    // roundoff allowance for terms that vanish exactly
    let floor = 1e-12 * reference.desired;
    let users = scenario.users.len();
    let tag = format!("k{k}_of{users}_m{}", grid.len());
    let mut out = vec![
        CheckResult::within(format!("desired_{tag}"), mc.mean.desired, mc.stderr.desired, reference.desired, draws, floor),
        CheckResult::within(
            format!("gain_uncertainty_{tag}"),
            mc.mean.gain_uncertainty,
            mc.stderr.gain_uncertainty,
            reference.gain_uncertainty,
            draws,
            floor,
        ),
        CheckResult::within(format!("jammer_{tag}"), mc.mean.jammer, mc.stderr.jammer, reference.jammer, draws, floor),
        CheckResult::within(format!("noise_{tag}"), mc.mean.noise, mc.stderr.noise, reference.noise, draws, floor),
    ];
    for l in (0..users).filter(|&l| l != k) {
        out.push(CheckResult::within(
            format!("inter_user_{l}_{tag}"),
            mc.mean.inter_user[l],
            mc.stderr.inter_user[l],
            reference.inter_user[l],
            draws,
            floor,
        ));
    }
    let closed = sinr_closed_form(k, config, &overlaps, xi, &scales);
    out.push(CheckResult::within(format!("sinr_{tag}"), mc.sinr, mc.sinr_stderr, closed, draws, 0.0));
    debug_assert!((assemble_sinr(&reference, k, &config.data_powers, 0.0) - closed).abs() <= 1e-9 * closed);
    Ok(out)
}

/// `|h^_k^H h_w| <= 1e-10 ||h^_k|| ||h_w||` whenever the estimated set avoids
/// the jammer's RPs. Reports the worst ratio over `instances`.
pub fn check_exact_null(seed: u64, antennas: usize, instances: usize, threads: Option<usize>) -> Result<CheckResult> {
    let grid = AngularGrid::with_antennas(antennas)?;
    let cfg = SystemConfig { antennas, ..SystemConfig::default() };
    let ratios = run_trials(instances, threads, |t| {
        let mut rng = trial_rng(seed, t);
        loop {
            let user = sample_terminal(&mut rng, &grid, cfg.user_spread, 1.0)?;
            let jammer = sample_terminal(&mut rng, &grid, cfg.jammer_spread, 1.0)?;
            let set = user.support.difference(&jammer.support);
            if set.is_empty() {
                continue;
            }
            let hu = draw_channel(&mut rng, &user, &grid, 1);
            let hw = draw_channel(&mut rng, &jammer, &grid, 1);
            let y: Vec<Complex64> = hu.channels[0]
                .iter()
                .zip(&hw.channels[0])
                .map(|(a, b)| a * 10f64.sqrt() + b * 10f64.sqrt())
                .collect();
            let inputs = estimator_inputs(&cfg, 0, &user, &set);
            let est = lmmse_estimate(&y, &set, &grid, &inputs)?;
            let ip: Complex64 = est.channel.iter().zip(&hw.channels[0]).map(|(a, b)| a.conj() * b).sum();
            let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            return Ok(ip.norm() / (norm(&est.channel) * norm(&hw.channels[0])));
        }
    })?;
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(CheckResult {
        name: "exact_jammer_null".into(),
        observed: worst,
        stderr: 0.0,
        reference: 1e-10,
        samples: instances,
        passed: worst <= 1e-10,
    })
}

/// The campaign run by `validate`. `scale` sets the Monte-Carlo effort:
/// collision and false-alarm checks use `10 scale` samples, the moment
/// checks `scale` draws.
pub fn standard_checks(seed: u64, scale: usize, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    let sigma2 = crate::config::db_to_linear(-25.0);
    let mut out = Vec::new();
    for nd in [1, 20] {
        out.extend(check_gamma_moments(seed, nd, sigma2, 10 * scale, threads)?);
        for eta in [1e-2, 1e-3] {
            out.push(check_false_alarm_guarantee(seed, nd, sigma2, eta, 10 * scale, threads)?);
        }
    }
    for eta in [1e-2, 1e-3] {
        out.push(check_exponential_threshold(sigma2, eta)?);
    }
    for g in [2, 3, 4] {
        out.push(check_collision_bound(seed, 10, 200, PI / 18.0, g, 10 * scale, threads)?);
    }
    let (grid, scenario, cfg) = reference_scenario(1, 200)?;
    out.extend(check_moments(seed, &grid, &scenario, &cfg, 0, scale)?);
    let (grid, scenario, cfg) = reference_scenario(3, 200)?;
    out.extend(check_moments(seed, &grid, &scenario, &cfg, 1, scale)?);
    out.push(check_exact_null(seed, 200, (scale / 10).max(1), threads)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scenario_overlaps_neighbours_only() {
        let (_, sc, _) = reference_scenario(3, 200).unwrap();
        assert!(sc.users[0].support.intersection_len(&sc.users[1].support) > 0);
        let jam = sc.jammer.as_ref().unwrap();
        assert!(sc.users.iter().all(|u| u.support.intersection_len(&jam.support) == 0));
    }

    #[test]
    fn small_campaign_passes() {
        let checks = standard_checks(5, 500, None).unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
