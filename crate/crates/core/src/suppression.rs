//! Jammer-excluding channel estimation, MRC combining and SINR evaluation.
//!
//! Three routes to the per-user SINR are provided:
//!
//! * [`sinr_closed_form`]: the large-system expression in terms of overlap
//!   counts, which assumes the estimated set lies inside the user's true set
//!   and is free of jammer paths;
//! * [`conditional_terms`]: the exact moments of the MRC output given all
//!   supports, valid for any estimated set, including ones contaminated by
//!   the jammer or by noise-only RPs;
//! * [`empirical_moments`]: Monte-Carlo estimates of the same moments from
//!   simulated training and data phases.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::channel::{draw_channel, TerminalGeometry};
use crate::config::{MuSource, SystemConfig};
use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::rng::complex_gaussian_vec;
use crate::stats::batch_stderr;
use crate::support::SupportSet;
use crate::transmission::{generate_jammer_pilot, simulate_training, JammerLink, PilotBook};

/// `Omega^_k = Omega^_{k,w} \ Q_g`; `degenerate` is raised when nothing is left.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserRpSet {
    pub support: SupportSet,
    pub degenerate: bool,
}

pub fn user_rp_set(estimated: &SupportSet, common: &SupportSet) -> UserRpSet {
    let support = estimated.difference(common);
    UserRpSet { degenerate: support.is_empty(), support }
}

/// Training-side quantities the per-RP LMMSE estimator needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorInputs {
    pub pilot_power: f64,
    pub pilot_length: usize,
    /// `mu_k` assumed by the estimator.
    pub power_scale: f64,
    pub noise_power: f64,
}

impl EstimatorInputs {
    fn snr(&self) -> f64 {
        self.pilot_length as f64 * self.pilot_power * self.power_scale
    }

    /// `sqrt(tau p mu) / (sigma^2 + tau p mu)`.
    pub fn gain_coefficient(&self) -> f64 {
        let s = self.snr();
        s.sqrt() / (self.noise_power + s)
    }

    /// `xi = tau p mu / (sigma^2 + tau p mu)`.
    pub fn gain_mean_square(&self) -> f64 {
        let s = self.snr();
        s / (self.noise_power + s)
    }

    /// `sigma^2 / (sigma^2 + tau p mu)`.
    pub fn error_mean_square(&self) -> f64 {
        self.noise_power / (self.noise_power + self.snr())
    }
}

/// Estimated RP gains and channel of one user on one subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub support: SupportSet,
    /// `g^_{k,i}`, length `M`, zero outside `support`.
    pub gains: Vec<Complex64>,
    /// `h^_k = sqrt(mu_k) sum_{i in support} g^_{k,i} a(phi_i)`.
    pub channel: Vec<Complex64>,
    pub gain_mean_square: f64,
    pub error_mean_square: f64,
}

/// Per-RP LMMSE estimate from the angular image `U^H y_{t,k}`.
pub fn lmmse_estimate_angular(
    angular: &[Complex64],
    support: &SupportSet,
    grid: &AngularGrid,
    inputs: &EstimatorInputs,
) -> Result<ChannelEstimate> {
    let m = grid.len();
    if angular.len() != m || support.max().is_some_and(|i| i >= m) {
        return Err(Error::Contract("estimate support or observation does not fit the grid".into()));
    }
    let c = inputs.gain_coefficient();
    let mut gains = vec![Complex64::new(0.0, 0.0); m];
    for i in support.iter() {
        gains[i] = angular[i] * c;
    }
    let amp = inputs.power_scale.sqrt();
    let channel = grid.from_angular(&gains).into_iter().map(|v| v * amp).collect();
    Ok(ChannelEstimate {
        support: support.clone(),
        gains,
        channel,
        gain_mean_square: inputs.gain_mean_square(),
        error_mean_square: inputs.error_mean_square(),
    })
}

/// Per-RP LMMSE estimate from the de-spread pilot `y_{t,k}`:
/// `g^_i = sqrt(tau p mu) / (sigma^2 + tau p mu) a(phi_i)^H y_{t,k}`.
pub fn lmmse_estimate(
    despread: &[Complex64],
    support: &SupportSet,
    grid: &AngularGrid,
    inputs: &EstimatorInputs,
) -> Result<ChannelEstimate> {
    if despread.len() != grid.len() {
        return Err(Error::Contract("de-spread vector does not fit the grid".into()));
    }
    lmmse_estimate_angular(&grid.to_angular(despread), support, grid, inputs)
}

/// The estimator without jammer exclusion: every detected RP of the pilot is kept.
pub fn baseline_estimate(
    despread: &[Complex64],
    estimated: &SupportSet,
    grid: &AngularGrid,
    inputs: &EstimatorInputs,
) -> Result<ChannelEstimate> {
    lmmse_estimate(despread, estimated, grid, inputs)
}

/// `(h^_k)^H y_d` for every user.
pub fn mrc_combine(estimates: &[ChannelEstimate], received: &[Complex64]) -> Result<Vec<Complex64>> {
    estimates
        .iter()
        .map(|e| {
            if e.channel.len() != received.len() {
                return Err(Error::Contract("estimate and received vector differ in length".into()));
            }
            Ok(inner(&e.channel, received))
        })
        .collect()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `C_{k/w} = |Omega^_k|` and `C_{k,l} = |Omega^_k  n  Omega^_l|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapCounts {
    pub own: Vec<usize>,
    pub pairwise: Vec<Vec<usize>>,
}

impl OverlapCounts {
    pub fn from_sets(sets: &[SupportSet]) -> Self {
        let own = sets.iter().map(SupportSet::len).collect();
        let pairwise = sets
            .iter()
            .map(|a| sets.iter().map(|b| a.intersection_len(b)).collect())
            .collect();
        Self { own, pairwise }
    }
}

/// Estimator inputs for user `k` under the configured `mu` policy.
pub fn estimator_inputs(config: &SystemConfig, k: usize, terminal: &TerminalGeometry, estimated: &SupportSet) -> EstimatorInputs {
    let power_scale = match config.mu_source {
        MuSource::TrueSupport => terminal.power_scale,
        MuSource::EstimatedSupport => config.antennas as f64 * terminal.gain / estimated.len().max(1) as f64,
    };
    EstimatorInputs {
        pilot_power: config.pilot_powers[k],
        pilot_length: config.pilot_length,
        power_scale,
        noise_power: config.noise_power,
    }
}

/// Large-system MRC SINR of user `k`:
/// `p mu C^2 xi / (p mu C xi + sum_{l != k} p_l mu_l C_{k,l} + C sigma^2)`.
/// Zero for an empty estimated set.
pub fn sinr_closed_form(
    k: usize,
    config: &SystemConfig,
    overlaps: &OverlapCounts,
    gain_mean_square: f64,
    power_scales: &[f64],
) -> f64 {
    let c = overlaps.own[k] as f64;
    if c == 0.0 {
        return 0.0;
    }
    let p = config.data_powers[k];
    let mu = power_scales[k];
    let interference: f64 = (0..overlaps.own.len())
        .filter(|&l| l != k)
        .map(|l| config.data_powers[l] * power_scales[l] * overlaps.pairwise[k][l] as f64)
        .sum();
    let signal = p * mu * c * gain_mean_square;
    let denom = signal + interference + c * config.noise_power;
    if denom == 0.0 {
        return 0.0;
    }
    signal * c / denom
}

/// `R = (1 - tau / T) log2(1 + rho)`.
pub fn achievable_rate(sinr: f64, pilot_length: usize, coherence_block: usize) -> Result<f64> {
    if !(sinr >= 0.0) {
        return Err(Error::Domain(format!("SINR must be non-negative, got {sinr}")));
    }
    if coherence_block <= pilot_length {
        return Err(Error::Domain("coherence block must exceed the pilot length".into()));
    }
    Ok((1.0 - pilot_length as f64 / coherence_block as f64) * sinr.log2_1p())
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

/// Moments of the MRC output of one user.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrTerms {
    /// `|E{h^_k^H h_k}|^2`.
    pub desired: f64,
    /// `var{h^_k^H h_k}`.
    pub gain_uncertainty: f64,
    /// `E|h^_k^H h_l|^2` per user `l`; entry `k` is zero.
    pub inter_user: Vec<f64>,
    /// `E|h^_k^H h_w|^2`.
    pub jammer: f64,
    /// `E|h^_k^H z_d|^2`.
    pub noise: f64,
}

impl SinrTerms {
    fn zero(users: usize) -> Self {
        Self {
            desired: 0.0,
            gain_uncertainty: 0.0,
            inter_user: vec![0.0; users],
            jammer: 0.0,
            noise: 0.0,
        }
    }

    /// Interference-weighted sum `sum_{l != k} p_l E|h^_k^H h_l|^2`.
    pub fn weighted_inter_user(&self, k: usize, data_powers: &[f64]) -> f64 {
        self.inter_user
            .iter()
            .zip(data_powers)
            .enumerate()
            .filter(|(l, _)| *l != k)
            .map(|(_, (t, p))| t * p)
            .sum()
    }
}

/// `rho = p |E|^2 / (p var + sum_l p_l I_l + q_d J + N)`.
pub fn assemble_sinr(terms: &SinrTerms, k: usize, data_powers: &[f64], jammer_data_power: f64) -> f64 {
    let p = data_powers[k];
    let num = p * terms.desired;
    if num == 0.0 {
        return 0.0;
    }
    let denom = p * terms.gain_uncertainty
        + terms.weighted_inter_user(k, data_powers)
        + jammer_data_power * terms.jammer
        + terms.noise;
    num / denom
}

/// The moments written in terms of overlap counts, as used by
/// [`sinr_closed_form`]. The gain uncertainty is `mu^2 C xi^2`.
pub fn overlap_terms(k: usize, config: &SystemConfig, overlaps: &OverlapCounts, gain_mean_square: f64, power_scales: &[f64]) -> SinrTerms {
    let c = overlaps.own[k] as f64;
    let mu = power_scales[k];
    let xi = gain_mean_square;
    SinrTerms {
        desired: (mu * c * xi).powi(2),
        gain_uncertainty: mu * mu * c * xi * xi,
        inter_user: (0..overlaps.own.len())
            .map(|l| if l == k { 0.0 } else { overlaps.pairwise[k][l] as f64 * xi * mu * power_scales[l] })
            .collect(),
        jammer: 0.0,
        noise: mu * c * xi * config.noise_power,
    }
}

/// True geometry of every terminal in a coherence block.
#[derive(Debug, Clone, Copy)]
pub struct SupportModel<'a> {
    pub users: &'a [TerminalGeometry],
    pub jammer: Option<&'a TerminalGeometry>,
}

/// Exact moments of the MRC output of user `k` given the true supports and
/// the estimated set, averaging over gains, jammer sequences and noise.
///
/// With `a^2 = tau p_k mu_k` on `Omega_k`, `b^2 = tau q_t mu_w` on `Omega_w`
/// and `c` the estimator coefficient, each retained RP has
/// `E|g^_i|^2 = c^2 (a_i^2 + b_i^2 / tau + sigma^2)`. The jammer term picks up
/// `|S|^2 + |S|` on `S = estimated  n  Omega_w` because one pilot correlation
/// multiplies every jammer path.
pub fn conditional_terms(
    k: usize,
    estimated: &SupportSet,
    config: &SystemConfig,
    model: SupportModel<'_>,
) -> SinrTerms {
    let users = model.users.len();
    if estimated.is_empty() {
        return SinrTerms::zero(users);
    }
    let me = &model.users[k];
    let inputs = estimator_inputs(config, k, me, estimated);
    let c = inputs.gain_coefficient();
    let mu_hat = inputs.power_scale;
    let tau = config.pilot_length as f64;
    let sigma2 = config.noise_power;
    let a2 = tau * config.pilot_powers[k] * me.power_scale;
    let (b2, jam_support) = match model.jammer {
        Some(j) => (tau * config.jammer_pilot_power * j.power_scale, Some(&j.support)),
        None => (0.0, None),
    };
    let on_jammer = |i: usize| jam_support.is_some_and(|s| s.contains(i));
    let own_ms = |i: usize| {
        let mut v = sigma2;
        if me.support.contains(i) {
            v += a2;
        }
        if on_jammer(i) {
            v += b2 / tau;
        }
        c * c * v
    };

    let mut own_overlap = 0usize;
    let mut var_sum = 0.0;
    let mut ms_total = 0.0;
    for i in estimated.iter() {
        ms_total += own_ms(i);
        if me.support.contains(i) {
            own_overlap += 1;
            var_sum += own_ms(i);
        }
    }
    let desired = mu_hat * me.power_scale * (c * a2.sqrt() * own_overlap as f64).powi(2);
    let gain_uncertainty = mu_hat * me.power_scale * var_sum;
    let inter_user = model
        .users
        .iter()
        .enumerate()
        .map(|(l, other)| {
            if l == k {
                return 0.0;
            }
            let s: f64 = estimated.iter().filter(|&i| other.support.contains(i)).map(own_ms).sum();
            mu_hat * other.power_scale * s
        })
        .collect();
    let jammer = match model.jammer {
        Some(j) => {
            let mut n = 0usize;
            let mut s = 0.0;
            for i in estimated.iter().filter(|&i| j.support.contains(i)) {
                n += 1;
                let mut v = sigma2;
                if me.support.contains(i) {
                    v += a2;
                }
                s += v;
            }
            let n = n as f64;
            mu_hat * j.power_scale * c * c * (s + b2 / tau * (n * n + n))
        }
        None => 0.0,
    };
    SinrTerms {
        desired,
        gain_uncertainty,
        inter_user,
        jammer,
        noise: sigma2 * mu_hat * ms_total,
    }
}

/// Per-user SINR, rates and bookkeeping for one arm of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrReport {
    pub sets: Vec<SupportSet>,
    pub degenerate: Vec<bool>,
    pub overlaps: OverlapCounts,
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    pub sum_se: f64,
    /// Large-system SINR from overlap counts, for comparison.
    pub sinr_closed_form: Vec<f64>,
    pub sum_se_closed_form: f64,
    pub terms: Vec<SinrTerms>,
}

/// Evaluates every user's SINR for the given estimated sets with
/// [`conditional_terms`], alongside the closed form.
pub fn sinr_report(sets: Vec<SupportSet>, config: &SystemConfig, model: SupportModel<'_>) -> Result<SinrReport> {
    let users = model.users.len();
    if sets.len() != users {
        return Err(Error::Contract(format!("{} estimated sets for {users} users", sets.len())));
    }
    let overlaps = OverlapCounts::from_sets(&sets);
    let true_scales: Vec<f64> = model.users.iter().map(|t| t.power_scale).collect();
    let mut terms = Vec::with_capacity(users);
    let mut sinr = Vec::with_capacity(users);
    let mut closed = Vec::with_capacity(users);
    for k in 0..users {
        let t = conditional_terms(k, &sets[k], config, model);
        sinr.push(assemble_sinr(&t, k, &config.data_powers, config.jammer_data_power));
        terms.push(t);
        let xi = estimator_inputs(config, k, &model.users[k], &sets[k]).gain_mean_square();
        closed.push(sinr_closed_form(k, config, &overlaps, xi, &true_scales));
    }
    let rate = |rho: f64| achievable_rate(rho, config.pilot_length, config.coherence_block);
    let rates = sinr.iter().map(|&r| rate(r)).collect::<Result<Vec<_>>>()?;
    let closed_rates = closed.iter().map(|&r| rate(r)).collect::<Result<Vec<_>>>()?;
    Ok(SinrReport {
        degenerate: sets.iter().map(SupportSet::is_empty).collect(),
        sets,
        overlaps,
        sum_se: rates.iter().sum(),
        sinr,
        rates,
        sum_se_closed_form: closed_rates.iter().sum(),
        sinr_closed_form: closed,
        terms,
    })
}

/// Monte-Carlo moments with batch-means standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMoments {
    pub mean: SinrTerms,
    pub stderr: SinrTerms,
    /// SINR assembled from `mean`.
    pub sinr: f64,
    pub sinr_stderr: f64,
    pub draws: usize,
}

/// Fixed geometry for moment estimation: true terminals plus the estimated
/// sets the estimator is restricted to.
#[derive(Debug, Clone)]
pub struct FixedSupportScenario {
    pub users: Vec<TerminalGeometry>,
    pub jammer: Option<TerminalGeometry>,
    pub estimated: Vec<SupportSet>,
}

#[derive(Default, Clone)]
struct Accumulator {
    desired: Complex64,
    desired_sq: f64,
    inter: Vec<f64>,
    jammer: f64,
    noise: f64,
    n: usize,
}

impl Accumulator {
    fn terms(&self) -> SinrTerms {
        let n = self.n as f64;
        let mean = self.desired / n;
        SinrTerms {
            desired: mean.norm_sqr(),
            gain_uncertainty: (self.desired_sq - n * mean.norm_sqr()) / (n - 1.0),
            inter_user: self.inter.iter().map(|v| v / n).collect(),
            jammer: self.jammer / n,
            noise: self.noise / n,
        }
    }
}

/// Estimates the moments of user `k`'s MRC output by simulating `draws`
/// independent coherence blocks on one subcarrier with the supports held fixed.
pub fn empirical_moments<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &AngularGrid,
    scenario: &FixedSupportScenario,
    config: &SystemConfig,
    k: usize,
    draws: usize,
    batches: usize,
) -> Result<EmpiricalMoments> {
    let users = scenario.users.len();
    if users != config.users || scenario.estimated.len() != users || k >= users {
        return Err(Error::Contract("scenario does not match the configuration".into()));
    }
    if batches < 2 || draws < batches || !draws.is_multiple_of(batches) {
        return Err(Error::Domain(format!("{draws} draws cannot be split into {batches} equal batches")));
    }
    let pilots = PilotBook::new(config.pilot_length)?;
    let inputs = estimator_inputs(config, k, &scenario.users[k], &scenario.estimated[k]);
    let per_batch = draws / batches;
    let mut batch_acc = vec![
        Accumulator {
            inter: vec![0.0; users],
            ..Accumulator::default()
        };
        batches
    ];
    let mut total = Accumulator {
        inter: vec![0.0; users],
        ..Accumulator::default()
    };
    for d in 0..draws {
        let channels: Vec<_> = scenario.users.iter().map(|t| draw_channel(rng, t, grid, 1)).collect();
        let jam = scenario.jammer.as_ref().map(|t| (draw_channel(rng, t, grid, 1), generate_jammer_pilot(rng, &pilots, 1)));
        let link = jam.as_ref().map(|(c, p)| JammerLink { channel: c, pilot: p });
        let obs = simulate_training(rng, &channels, link, &pilots, config)?;
        let est = lmmse_estimate(&obs.despread[0][k], &scenario.estimated[k], grid, &inputs)?;
        let z = complex_gaussian_vec(rng, grid.len(), config.noise_power);
        let h = &est.channel;
        let own = inner(h, &channels[k].channels[0]);
        let inter: Vec<f64> = (0..users)
            .map(|l| if l == k { 0.0 } else { inner(h, &channels[l].channels[0]).norm_sqr() })
            .collect();
        let jv = jam.as_ref().map_or(0.0, |(c, _)| inner(h, &c.channels[0]).norm_sqr());
        let nv = inner(h, &z).norm_sqr();
        for acc in [&mut batch_acc[d / per_batch], &mut total] {
            acc.desired += own;
            acc.desired_sq += own.norm_sqr();
            for (a, v) in acc.inter.iter_mut().zip(&inter) {
                *a += v;
            }
            acc.jammer += jv;
            acc.noise += nv;
            acc.n += 1;
        }
    }
    let mean = total.terms();
    let per: Vec<SinrTerms> = batch_acc.iter().map(Accumulator::terms).collect();
    let col = |f: &dyn Fn(&SinrTerms) -> f64| batch_stderr(&per.iter().map(f).collect::<Vec<_>>());
    let stderr = SinrTerms {
        desired: col(&|t| t.desired),
        gain_uncertainty: col(&|t| t.gain_uncertainty),
        inter_user: (0..users).map(|l| col(&|t| t.inter_user[l])).collect(),
        jammer: col(&|t| t.jammer),
        noise: col(&|t| t.noise),
    };
    let assemble = |t: &SinrTerms| assemble_sinr(t, k, &config.data_powers, config.jammer_data_power);
    Ok(EmpiricalMoments {
        sinr: assemble(&mean),
        sinr_stderr: col(&|t| assemble(t)),
        mean,
        stderr,
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use std::f64::consts::PI;

    const SIGMA2: f64 = 0.003_162_277_660_168_379_5;

    fn reference_inputs() -> EstimatorInputs {
        EstimatorInputs {
            pilot_power: 1.0,
            pilot_length: 10,
            power_scale: 200.0 / 18.0,
            noise_power: SIGMA2,
        }
    }

    fn system(users: usize, m: usize) -> SystemConfig {
        let mut c = SystemConfig::default();
        c.antennas = m;
        c.users = users;
        c.pilot_length = users;
        c.pilot_powers = vec![1.0; users];
        c.data_powers = vec![1.0; users];
        c.user_gains = vec![1.0; users];
        c.min_common_pilots = 2.min(users);
        c
    }

    #[test]
    fn user_set_subtraction() {
        let s = |v: &[usize]| SupportSet::from_indices(v.iter().copied());
        assert_eq!(user_rp_set(&s(&[1, 2, 3]), &s(&[2])).support, s(&[1, 3]));
        let kept = user_rp_set(&s(&[1, 2]), &s(&[]));
        assert_eq!(kept.support, s(&[1, 2]));
        assert!(!kept.degenerate);
        assert!(user_rp_set(&s(&[2, 5]), &s(&[2, 5])).degenerate);
    }

    #[test]
    fn reference_gain_mean_square() {
        let inputs = reference_inputs();
        let xi = inputs.gain_mean_square();
        let direct = 111.111_111_111_111_11 / (SIGMA2 + 111.111_111_111_111_11);
        assert!((xi - direct).abs() < 1e-15);
        assert!((xi - 0.99997).abs() < 1e-5);
        assert!((xi + inputs.error_mean_square() - 1.0).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn gain_mean_square_monotone(p in 1e-3f64..10.0, tau in 1usize..32, mu in 0.1f64..100.0, s2 in 1e-4f64..1.0, f in 1.01f64..3.0) {
            let base = EstimatorInputs { pilot_power: p, pilot_length: tau, power_scale: mu, noise_power: s2 };
            let xi = base.gain_mean_square();
            proptest::prop_assert!(xi > 0.0 && xi < 1.0);
            proptest::prop_assert!((xi + base.error_mean_square() - 1.0).abs() < 1e-12);
            let more_power = EstimatorInputs { pilot_power: p * f, ..base }.gain_mean_square();
            let longer = EstimatorInputs { pilot_length: tau + 1, ..base }.gain_mean_square();
            let larger_mu = EstimatorInputs { power_scale: mu * f, ..base }.gain_mean_square();
            let noisier = EstimatorInputs { noise_power: s2 * f, ..base }.gain_mean_square();
            proptest::prop_assert!(more_power >= xi && longer >= xi && larger_mu >= xi);
            proptest::prop_assert!(noisier <= xi);
        }

        #[test]
        fn overlap_counts_symmetric(sets in proptest::collection::vec(proptest::collection::vec(0usize..30, 0..10), 1..6)) {
            let sets: Vec<SupportSet> = sets.into_iter().map(SupportSet::from).collect();
            let o = OverlapCounts::from_sets(&sets);
            for k in 0..sets.len() {
                proptest::prop_assert_eq!(o.pairwise[k][k], o.own[k]);
                for l in 0..sets.len() {
                    proptest::prop_assert_eq!(o.pairwise[k][l], o.pairwise[l][k]);
                }
            }
        }
    }

    #[test]
    fn noiseless_estimate_recovers_channel() {
        let mut cfg = system(1, 64);
        cfg.noise_power = 1e-12;
        let grid = AngularGrid::with_antennas(64).unwrap();
        let t = TerminalGeometry::at(&grid, 0.3, 0.4, 1.0).unwrap();
        let mut rng = trial_rng(3, 0);
        let ch = draw_channel(&mut rng, &t, &grid, 1);
        let book = PilotBook::new(1).unwrap();
        let obs = simulate_training(&mut rng, std::slice::from_ref(&ch), None, &book, &cfg).unwrap();
        let inputs = estimator_inputs(&cfg, 0, &t, &t.support);
        let est = lmmse_estimate(&obs.despread[0][0], &t.support, &grid, &inputs).unwrap();
        for (a, b) in est.gains.iter().zip(&ch.gains[0]) {
            assert!((a - b).norm() < 1e-4);
        }
        for (a, b) in est.channel.iter().zip(&ch.channels[0]) {
            assert!((a - b).norm() < 1e-4);
        }
        // baseline coincides when nothing is excluded
        let base = baseline_estimate(&obs.despread[0][0], &t.support, &grid, &inputs).unwrap();
        assert_eq!(base, est);
    }

    #[test]
    fn mrc_single_user_and_null_cases() {
        let mut cfg = system(1, 32);
        cfg.noise_power = 1e-300;
        cfg.jammer_data_power = 0.0;
        let grid = AngularGrid::with_antennas(32).unwrap();
        let t = TerminalGeometry::at(&grid, -0.2, 0.5, 1.0).unwrap();
        let mut rng = trial_rng(4, 0);
        let ch = draw_channel(&mut rng, &t, &grid, 1);
        let book = PilotBook::new(1).unwrap();
        let obs = simulate_training(&mut rng, std::slice::from_ref(&ch), None, &book, &cfg).unwrap();
        let inputs = estimator_inputs(&cfg, 0, &t, &t.support);
        let est = lmmse_estimate(&obs.despread[0][0], &t.support, &grid, &inputs).unwrap();
        let data = crate::transmission::simulate_data(&mut rng, std::slice::from_ref(&ch), None, &cfg).unwrap();
        let out = mrc_combine(std::slice::from_ref(&est), &data.received[0]).unwrap()[0];
        let want = inner(&est.channel, &ch.channels[0]) * cfg.data_powers[0].sqrt();
        let ratio = out / data.user_symbols[0][0];
        assert!((ratio - want).norm() < 1e-9 * want.norm());
        assert!(want.re > 0.0 && want.re > 100.0 * want.im.abs());

        let zero = ChannelEstimate {
            channel: vec![Complex64::new(0.0, 0.0); 32],
            ..est
        };
        assert_eq!(mrc_combine(&[zero], &data.received[0]).unwrap()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn closed_form_examples() {
        let mut cfg = system(1, 200);
        cfg.noise_power = SIGMA2;
        let xi = reference_inputs().gain_mean_square();
        let mu = 200.0 / 18.0;
        let o = OverlapCounts::from_sets(&[SupportSet::from_indices(0..18)]);
        let rho = sinr_closed_form(0, &cfg, &o, xi, &[mu]);
        let direct = mu * 18.0 * xi / (mu * xi + SIGMA2);
        assert!((rho - direct).abs() < 1e-12);
        assert!((rho - 17.995).abs() < 1e-3, "{rho}");

        cfg.data_powers = vec![0.0];
        assert_eq!(sinr_closed_form(0, &cfg, &o, xi, &[mu]), 0.0);

        // interference-free, noiseless limit is the array gain C
        let mut cfg = system(2, 200);
        cfg.noise_power = 1e-300;
        let o = OverlapCounts::from_sets(&[SupportSet::from_indices(0..7), SupportSet::from_indices(10..15)]);
        assert!((sinr_closed_form(0, &cfg, &o, 1.0, &[mu, mu]) - 7.0).abs() < 1e-12);
        let empty = OverlapCounts::from_sets(&[SupportSet::new(), SupportSet::from_indices([1])]);
        assert_eq!(sinr_closed_form(0, &cfg, &empty, 1.0, &[mu, mu]), 0.0);
    }

    #[test]
    fn rate_arithmetic() {
        assert_eq!(achievable_rate(0.0, 10, 200).unwrap(), 0.0);
        assert!((achievable_rate(1.0, 10, 200).unwrap() - 0.95).abs() < 1e-15);
        let r = achievable_rate(199.9, 10, 200).unwrap();
        assert!((r - 0.95 * 200.9f64.log2()).abs() < 1e-12);
        assert!((r - 7.268).abs() < 1e-3);
        assert!(achievable_rate(-1.0, 10, 200).is_err());
        assert!(achievable_rate(1.0, 10, 10).is_err());
    }

    fn scenario(grid: &AngularGrid) -> (FixedSupportScenario, SystemConfig) {
        let users = vec![
            TerminalGeometry::at(grid, -0.2, PI / 18.0, 1.0).unwrap(),
            TerminalGeometry::at(grid, -0.15, PI / 18.0, 1.0).unwrap(),
            TerminalGeometry::at(grid, 0.4, PI / 18.0, 1.0).unwrap(),
        ];
        let jammer = TerminalGeometry::at(grid, 0.9, PI / 18.0, 1.0).unwrap();
        let estimated = users.iter().map(|t| t.support.clone()).collect();
        let mut cfg = system(3, grid.len());
        cfg.noise_power = SIGMA2;
        cfg.jammer_pilot_power = 1.0;
        cfg.jammer_data_power = 1.0;
        (FixedSupportScenario { users, jammer: Some(jammer), estimated }, cfg)
    }

    #[test]
    fn conditional_terms_reduce_to_closed_form_when_clean() {
        let grid = AngularGrid::with_antennas(200).unwrap();
        let (sc, cfg) = scenario(&grid);
        let model = SupportModel { users: &sc.users, jammer: sc.jammer.as_ref() };
        let o = OverlapCounts::from_sets(&sc.estimated);
        let scales: Vec<f64> = sc.users.iter().map(|t| t.power_scale).collect();
        assert!(o.pairwise[0][1] > 0);
        for k in 0..3 {
            let exact = conditional_terms(k, &sc.estimated[k], &cfg, model);
            let xi = estimator_inputs(&cfg, k, &sc.users[k], &sc.estimated[k]).gain_mean_square();
            let approx = overlap_terms(k, &cfg, &o, xi, &scales);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            assert!(rel(exact.desired, approx.desired) < 1e-12);
            // exact variance is mu^2 C xi; the two agree to O(1 - xi)
            assert!((exact.gain_uncertainty - approx.gain_uncertainty / xi).abs() < 1e-9 * exact.gain_uncertainty);
            assert!(rel(exact.noise, approx.noise) < 1e-12);
            assert_eq!(exact.jammer, 0.0);
            for l in 0..3 {
                assert!((exact.inter_user[l] - approx.inter_user[l]).abs() < 1e-9 * approx.inter_user[l].max(1.0));
            }
            let rho_exact = assemble_sinr(&exact, k, &cfg.data_powers, cfg.jammer_data_power);
            let rho_closed = sinr_closed_form(k, &cfg, &o, xi, &scales);
            assert!(rel(rho_exact, rho_closed) < 1e-4);
        }
    }

    #[test]
    fn empirical_moments_match_exact_terms() {
        let grid = AngularGrid::with_antennas(64).unwrap();
        let users = vec![
            TerminalGeometry::at(&grid, -0.2, 0.35, 1.0).unwrap(),
            TerminalGeometry::at(&grid, -0.05, 0.35, 1.0).unwrap(),
        ];
        let jammer = TerminalGeometry::at(&grid, 0.1, 0.35, 1.0).unwrap();
        // user 0 keeps one jammer-shared RP and one noise-only RP
        let shared = users[1].support.intersection(&jammer.support).iter().next();
        let mut est: Vec<usize> = users[0].support.iter().collect();
        est.extend(shared);
        est.push(60);
        let estimated = vec![SupportSet::from(est), users[1].support.clone()];
        let mut cfg = system(2, 64);
        cfg.noise_power = 0.5;
        cfg.jammer_pilot_power = 0.3;
        cfg.jammer_data_power = 0.3;
        let sc = FixedSupportScenario { users, jammer: Some(jammer), estimated };
        let exact = conditional_terms(
            0,
            &sc.estimated[0],
            &cfg,
            SupportModel { users: &sc.users, jammer: sc.jammer.as_ref() },
        );
        let mc = empirical_moments(&mut trial_rng(77, 0), &grid, &sc, &cfg, 0, 20_000, 50).unwrap();
        let close = |name: &str, a: f64, b: f64, se: f64| {
            assert!((a - b).abs() <= 3.0 * se + 1e-12 * b.abs(), "{name}: mc {a} exact {b} se {se}");
        };
        close("desired", mc.mean.desired, exact.desired, mc.stderr.desired);
        close("variance", mc.mean.gain_uncertainty, exact.gain_uncertainty, mc.stderr.gain_uncertainty);
        close("inter", mc.mean.inter_user[1], exact.inter_user[1], mc.stderr.inter_user[1]);
        close("jammer", mc.mean.jammer, exact.jammer, mc.stderr.jammer);
        close("noise", mc.mean.noise, exact.noise, mc.stderr.noise);
        assert!(exact.jammer > 0.0);
    }

    #[test]
    fn exact_null_with_disjoint_jammer() {
        let grid = AngularGrid::with_antennas(128).unwrap();
        let mut rng = trial_rng(5, 0);
        for _ in 0..200 {
            let u = crate::channel::sample_terminal(&mut rng, &grid, 0.3, 1.0).unwrap();
            let w = crate::channel::sample_terminal(&mut rng, &grid, 0.3, 1.0).unwrap();
            let s = u.support.difference(&w.support);
            if s.is_empty() {
                continue;
            }
            let hu = draw_channel(&mut rng, &u, &grid, 1);
            let hw = draw_channel(&mut rng, &w, &grid, 1);
            let y: Vec<Complex64> = hu.channels[0].iter().zip(&hw.channels[0]).map(|(a, b)| a + b).collect();
            let est = lmmse_estimate(&y, &s, &grid, &reference_inputs()).unwrap();
            let ip = inner(&est.channel, &hw.channels[0]).norm();
            let scale = est.channel.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
                * hw.channels[0].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(ip <= 1e-10 * scale);
        }
    }

    #[test]
    fn lmmse_error_is_orthogonal_to_estimate() {
        let mut cfg = system(1, 32);
        cfg.noise_power = 2.0;
        let grid = AngularGrid::with_antennas(32).unwrap();
        let t = TerminalGeometry::at(&grid, 0.0, 0.4, 1.0).unwrap();
        let book = PilotBook::new(1).unwrap();
        let inputs = estimator_inputs(&cfg, 0, &t, &t.support);
        let i = t.support.iter().next().unwrap();
        let mut rng = trial_rng(8, 0);
        let draws = 20_000;
        let mut prods = Vec::with_capacity(draws);
        for _ in 0..draws {
            let ch = draw_channel(&mut rng, &t, &grid, 1);
            let obs = simulate_training(&mut rng, std::slice::from_ref(&ch), None, &book, &cfg).unwrap();
            let est = lmmse_estimate(&obs.despread[0][0], &t.support, &grid, &inputs).unwrap();
            let g_hat = est.gains[i];
            prods.push(g_hat.conj() * (g_hat - ch.gains[0][i]));
        }
        let n = draws as f64;
        let mean: Complex64 = prods.iter().sum::<Complex64>() / n;
        let var_re = prods.iter().map(|p| (p.re - mean.re).powi(2)).sum::<f64>() / (n - 1.0);
        let var_im = prods.iter().map(|p| (p.im - mean.im).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.re.abs() < 3.0 * (var_re / n).sqrt(), "{mean}");
        assert!(mean.im.abs() < 3.0 * (var_im / n).sqrt(), "{mean}");
    }
}
