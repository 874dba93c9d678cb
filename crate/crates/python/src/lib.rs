//! Python bindings: configuration, the detector primitives, single
//! coherence blocks and the experiment harness.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use jamguard::experiments::{self, ExperimentKind, ExperimentSpec, ResultTable};
use jamguard::{suppression, trial, validation, Error, SupportSet, SystemConfig, SystemConfigFile};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::Numeric(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Round-trips a serializable value through JSON into Python objects.
fn json_object<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| to_py(e.into()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// System parameters. Keyword arguments use the JSON configuration keys
/// (powers in dBW, gains in dB, angles in radians); omitted keys take the
/// reference operating point.
#[pyclass(name = "SystemConfig", module = "pyjamguard")]
struct PySystemConfig {
    inner: SystemConfig,
}

#[pymethods]
impl PySystemConfig {
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(py: Python<'_>, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let text: String = match overrides {
            Some(d) => py.import("json")?.call_method1("dumps", (d,))?.extract()?,
            None => "{}".into(),
        };
        Self::from_json(&text)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = SystemConfigFile::from_json(text).and_then(SystemConfigFile::into_config).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&SystemConfigFile::from_config(&self.inner)).map_err(|e| to_py(e.into()))
    }

    /// Copy with `q_t = q_d = power` (W).
    fn with_jammer_power(&self, power: f64) -> Self {
        Self { inner: self.inner.with_jammer_power(power) }
    }

    fn with_antennas(&self, antennas: usize) -> Self {
        Self { inner: self.inner.with_antennas(antennas) }
    }

    /// Energy threshold in W.
    fn detection_threshold(&self) -> PyResult<f64> {
        self.inner.detection_threshold().map_err(to_py)
    }

    #[getter]
    fn antennas(&self) -> usize {
        self.inner.antennas
    }

    #[getter]
    fn users(&self) -> usize {
        self.inner.users
    }

    #[getter]
    fn noise_power(&self) -> f64 {
        self.inner.noise_power
    }

    #[getter]
    fn min_common_pilots(&self) -> usize {
        self.inner.min_common_pilots
    }

    #[getter]
    fn detection_subcarriers(&self) -> usize {
        self.inner.detection_subcarriers
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemConfig(antennas={}, users={}, detection_subcarriers={}, min_common_pilots={})",
            self.inner.antennas, self.inner.users, self.inner.detection_subcarriers, self.inner.min_common_pilots
        )
    }
}

/// Orthonormal angular basis of an `M`-antenna half-wavelength array.
#[pyclass(name = "AngularGrid", module = "pyjamguard")]
struct PyAngularGrid {
    inner: jamguard::AngularGrid,
}

#[pymethods]
impl PyAngularGrid {
    #[new]
    fn new(antennas: usize) -> PyResult<Self> {
        Ok(Self { inner: jamguard::AngularGrid::with_antennas(antennas).map_err(to_py)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn sines(&self) -> Vec<f64> {
        self.inner.sines().to_vec()
    }

    #[getter]
    fn angles(&self) -> Vec<f64> {
        self.inner.angles().to_vec()
    }

    /// `U^H y`.
    fn to_angular(&self, y: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        jamguard::to_angular_domain(&y, &self.inner).map_err(to_py)
    }

    /// `U g`.
    #[allow(clippy::wrong_self_convention)]
    fn from_angular(&self, g: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        if g.len() != self.inner.len() {
            return Err(PyValueError::new_err(format!("expected {} entries, got {}", self.inner.len(), g.len())));
        }
        Ok(self.inner.from_angular(&g))
    }

    /// Grid indices inside `[mean_angle - spread / 2, mean_angle + spread / 2]`.
    fn indices_in_span(&self, mean_angle: f64, spread: f64) -> PyResult<Vec<usize>> {
        Ok(self.inner.indices_in_span(mean_angle, spread).map_err(to_py)?.as_slice().to_vec())
    }
}

/// Threshold with per-RP false-alarm probability `eta` under noise only.
#[pyfunction]
fn threshold_for_fap(subcarriers: usize, noise_power: f64, eta: f64) -> PyResult<f64> {
    jamguard::threshold_for_fap(subcarriers, noise_power, eta).map_err(to_py)
}

/// Per-RP energies of one pilot from its angular vectors, one per subcarrier.
#[pyfunction]
fn energy_statistic(angular: Vec<Vec<Complex64>>) -> PyResult<Vec<f64>> {
    jamguard::energy_statistic(&angular).map_err(to_py)
}

/// Indices whose energy strictly exceeds `threshold`, per pilot.
#[pyfunction]
fn estimate_rp_sets(energies: Vec<Vec<f64>>, threshold: f64) -> Vec<Vec<usize>> {
    let stats = jamguard::EnergyStatistics {
        thresholds: vec![threshold; energies.len()],
        energies,
        fap_target: None,
    };
    jamguard::estimate_rp_sets(&stats).sets.into_iter().map(|s| s.as_slice().to_vec()).collect()
}

/// Common-RP test. Returns `(detected, common_set, occurrence_counts)`.
#[pyfunction]
fn detect_jammer(sets: Vec<Vec<usize>>, antennas: usize, g: usize) -> PyResult<(bool, Vec<usize>, Vec<usize>)> {
    let est = jamguard::RpEstimate { sets: sets.into_iter().map(SupportSet::from_indices).collect() };
    let counts = jamguard::rp_occurrence_counts(&est, antennas).map_err(to_py)?;
    let d = jamguard::detect_jammer(&counts, g).map_err(to_py)?;
    Ok((d.jammer_detected, d.common_set.as_slice().to_vec(), d.occurrence_counts))
}

#[pyfunction]
fn collision_probability_bound(users: usize, g: usize, spread: f64) -> PyResult<f64> {
    jamguard::collision_probability_bound(users, g, spread).map_err(to_py)
}

/// `(1 - tau / T) log2(1 + sinr)`.
#[pyfunction]
fn achievable_rate(sinr: f64, pilot_length: usize, coherence_block: usize) -> PyResult<f64> {
    suppression::achievable_rate(sinr, pilot_length, coherence_block).map_err(to_py)
}

/// One coherence block with the jammer on air, as a dict.
#[pyfunction]
#[pyo3(signature = (config, seed, trial = 0, intermediates = false))]
fn single_trial<'py>(
    py: Python<'py>,
    config: &PySystemConfig,
    seed: u64,
    trial: u64,
    intermediates: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let dump = trial::single_trial(&config.inner, seed, trial, intermediates).map_err(to_py)?;
    json_object(py, &dump)
}

/// Result rows plus the metadata needed to regenerate them.
#[pyclass(name = "ResultTable", module = "pyjamguard")]
struct PyResultTable {
    inner: ResultTable,
}

#[pymethods]
impl PyResultTable {
    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    /// Rows as a list of dicts with the CSV column names.
    fn rows<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_object(py, &self.inner.rows)
    }

    fn metadata<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_object(py, &self.inner.metadata)
    }

    /// `(sweep_value, mean, stderr)` for one arm and metric.
    fn series(&self, arm: &str, metric: &str) -> Vec<(f64, f64, f64)> {
        self.inner.series(arm, metric).iter().map(|r| (r.sweep_value, r.mean, r.stderr)).collect()
    }

    fn to_csv(&self) -> PyResult<String> {
        self.inner.to_csv_string().map_err(to_py)
    }

    /// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
    #[pyo3(signature = (directory, stem = None))]
    fn write(&self, directory: PathBuf, stem: Option<&str>) -> PyResult<(PathBuf, PathBuf)> {
        let stem = stem.unwrap_or(self.inner.metadata.experiment.stem());
        self.inner.write(&directory, stem).map_err(to_py)
    }

    fn failed_checks(&self) -> Vec<String> {
        self.inner.failed_checks()
    }
}

fn parse_kind(kind: &str) -> PyResult<ExperimentKind> {
    let aliases = [
        ("cdp", ExperimentKind::CdpVsJammerPower),
        ("fap", ExperimentKind::FapVsSpread),
        ("se_jammer", ExperimentKind::SeVsJammerPower),
        ("se_antennas", ExperimentKind::SeVsAntennas),
        ("validation", ExperimentKind::ValidationSuite),
    ];
    if let Some((_, k)) = aliases.iter().find(|(a, _)| *a == kind) {
        return Ok(*k);
    }
    serde_json::from_value(serde_json::Value::String(kind.into()))
        .map_err(|_| PyValueError::new_err(format!("unknown experiment kind {kind:?}")))
}

/// Runs an experiment. `kind` is a CLI stem (`cdp`, `fap`, `se_jammer`,
/// `se_antennas`, `validation`) or the full kind name.
#[pyfunction]
#[pyo3(signature = (kind, config = None, *, trials = None, seed = None, sweep = None, g_values = None, threads = None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment(
    py: Python<'_>,
    kind: &str,
    config: Option<&PySystemConfig>,
    trials: Option<usize>,
    seed: Option<u64>,
    sweep: Option<Vec<f64>>,
    g_values: Option<Vec<usize>>,
    threads: Option<usize>,
) -> PyResult<PyResultTable> {
    let kind = parse_kind(kind)?;
    let cfg = config.map_or_else(SystemConfig::default, |c| c.inner.clone());
    let mut spec = ExperimentSpec::new(kind, cfg);
    if let Some(t) = trials {
        spec.trials = t;
    }
    if let Some(s) = seed {
        spec.seed = s;
        spec.config.seed = s;
    }
    if let Some(s) = sweep {
        spec.sweep = s;
    }
    if let Some(g) = g_values {
        spec.g_values = g;
    }
    spec.threads = threads;
    spec.validate().map_err(to_py)?;
    let inner = py.detach(|| experiments::run_experiment(&spec)).map_err(to_py)?;
    Ok(PyResultTable { inner })
}

/// The validation campaign as a list of check dicts.
#[pyfunction]
#[pyo3(signature = (seed = 2021, scale = 1000, threads = None))]
fn validate<'py>(py: Python<'py>, seed: u64, scale: usize, threads: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let checks = py.detach(|| validation::standard_checks(seed, scale, threads)).map_err(to_py)?;
    json_object(py, &checks)
}

#[pymodule]
pub fn pyjamguard(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySystemConfig>()?;
    m.add_class::<PyAngularGrid>()?;
    m.add_class::<PyResultTable>()?;
    m.add_function(wrap_pyfunction!(threshold_for_fap, m)?)?;
    m.add_function(wrap_pyfunction!(energy_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_rp_sets, m)?)?;
    m.add_function(wrap_pyfunction!(detect_jammer, m)?)?;
    m.add_function(wrap_pyfunction!(collision_probability_bound, m)?)?;
    m.add_function(wrap_pyfunction!(achievable_rate, m)?)?;
    m.add_function(wrap_pyfunction!(single_trial, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
