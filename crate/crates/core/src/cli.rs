//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a validation check fails, 2 when the
//! arguments or configuration are unusable or the run cannot complete.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{SystemConfig, SystemConfigFile};
use crate::error::{Error, Result};
use crate::experiments::{run_experiment, ExperimentKind, ExperimentSpec, ExperimentSpecFile, ResultTable};
use crate::trial::single_trial;

#[derive(Debug, Parser)]
#[command(
    name = "jamguard",
    version,
    about = "Monte-Carlo simulator for direction-based jamming detection and suppression in mmWave massive MIMO"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Correct-detection probability versus jammer training power.
    Cdp,
    /// False-alarm probability versus angular spread (no jammer).
    Fap,
    /// Sum spectral efficiency versus jammer power, three estimator arms.
    SeJammer,
    /// Sum spectral efficiency versus number of antennas, three estimator arms.
    SeAntennas,
    /// Statistical property checks; exits with 1 if any fails.
    Validate,
    /// One coherence block with the jammer on air, written as JSON.
    SingleTrial,
}

impl Command {
    fn kind(self) -> Option<ExperimentKind> {
        match self {
            Command::Cdp => Some(ExperimentKind::CdpVsJammerPower),
            Command::Fap => Some(ExperimentKind::FapVsSpread),
            Command::SeJammer => Some(ExperimentKind::SeVsJammerPower),
            Command::SeAntennas => Some(ExperimentKind::SeVsAntennas),
            Command::Validate => Some(ExperimentKind::ValidationSuite),
            Command::SingleTrial => None,
        }
    }
}

#[derive(Debug, Args, Clone, Default)]
pub struct Options {
    /// System configuration JSON (keys match the configuration fields; dBW powers).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Full experiment description JSON: kind, config, sweep, trials, seed, g values, detection arms.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "config")]
    pub spec: Option<PathBuf>,
    /// Directory for the CSV table and JSON metadata.
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    pub out: PathBuf,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Trials per sweep point (validation: Monte-Carlo scale).
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// single-trial: include per-RP energies and the jammer-free estimates.
    #[arg(long, global = true)]
    pub dump_intermediates: bool,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn load_config(options: &Options) -> Result<SystemConfig> {
    match &options.config {
        Some(p) => SystemConfigFile::from_json(&read(p)?)?.into_config(),
        None => Ok(SystemConfig::default()),
    }
}

/// Resolves the experiment for `command` from defaults, files and overrides.
pub fn build_spec(kind: ExperimentKind, options: &Options) -> Result<ExperimentSpec> {
    let mut spec = match &options.spec {
        Some(p) => {
            let file = ExperimentSpecFile::from_json(&read(p)?)?;
            if file.kind != kind {
                return Err(Error::Config(format!(
                    "spec file describes {:?} but the subcommand runs {:?}",
                    file.kind, kind
                )));
            }
            file.into_spec()?
        }
        None => ExperimentSpec::new(kind, load_config(options)?),
    };
    if let Some(seed) = options.seed {
        spec.seed = seed;
        spec.config.seed = seed;
    }
    if let Some(t) = options.trials {
        spec.trials = t;
    }
    if options.threads.is_some() {
        spec.threads = options.threads;
    }
    spec.validate()?;
    Ok(spec)
}

fn primary_metric(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::CdpVsJammerPower => "cdp",
        ExperimentKind::FapVsSpread => "fap",
        ExperimentKind::SeVsJammerPower | ExperimentKind::SeVsAntennas => "sum_se",
        ExperimentKind::ValidationSuite => "observed",
    }
}

fn report(table: &ResultTable) {
    let kind = table.metadata.experiment;
    let metric = primary_metric(kind);
    let mut values: Vec<f64> = table.rows.iter().map(|r| r.sweep_value).collect();
    values.dedup();
    for v in values {
        let rows: Vec<_> = table.rows.iter().filter(|r| r.sweep_value == v).collect();
        if kind == ExperimentKind::ValidationSuite {
            let get = |m: &str| rows.iter().find(|r| r.metric == m).map_or(f64::NAN, |r| r.mean);
            let verdict = if get("pass") == 1.0 { "pass" } else { "FAIL" };
            eprintln!(
                "{} {}: observed {:.6e} reference {:.6e} {verdict}",
                kind.sweep_param(),
                rows[0].arm,
                get("observed"),
                get("reference")
            );
            continue;
        }
        let parts: Vec<String> = rows
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| format!("{}={:.4}", r.arm, r.mean))
            .collect();
        eprintln!("{}={v}: {metric} {}", kind.sweep_param(), parts.join(" "));
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let options = &cli.options;
    let Some(kind) = cli.command.kind() else {
        let mut config = load_config(options)?;
        if let Some(seed) = options.seed {
            config.seed = seed;
        }
        let dump = single_trial(&config, config.seed, 0, options.dump_intermediates)?;
        fs::create_dir_all(&options.out)?;
        let path = options.out.join("single_trial.json");
        fs::write(&path, serde_json::to_string_pretty(&dump)?)?;
        eprintln!(
            "jammer detected: {}, |Q_g| = {}, sum SE suppressed {:.4} unsuppressed {:.4} no jammer {:.4}; wrote {}",
            dump.jammer_detected,
            dump.common_set.len(),
            dump.suppressed.sum_se,
            dump.unsuppressed.sum_se,
            dump.no_jammer.sum_se,
            path.display()
        );
        return Ok(0);
    };
    let spec = build_spec(kind, options)?;
    let table = run_experiment(&spec)?;
    report(&table);
    let (csv, json) = table.write(&options.out, kind.stem())?;
    eprintln!("wrote {} and {}", csv.display(), json.display());
    let failed = table.failed_checks();
    if !failed.is_empty() {
        eprintln!("{} check(s) failed: {}", failed.len(), failed.join(", "));
        return Ok(1);
    }
    Ok(0)
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit status.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
