//! Drives the module through an embedded interpreter.

use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

use pyjamguard::pyjamguard;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    static INIT: std::sync::Once = std::sync::Once::new();
    INIT.call_once(|| {
        pyo3::append_to_inittab!(pyjamguard);
        Python::initialize();
    });
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("jg", py.import("pyjamguard").unwrap()).unwrap();
        f(py, &globals);
    });
}

fn run(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &str) {
    let code = CString::new(code).unwrap();
    if let Err(e) = py.run(&code, Some(globals), None) {
        e.print(py);
        panic!("python snippet failed");
    }
}

#[test]
fn primitives_match_the_library() {
    with_module(|py, g| {
        let eps: f64 = py
            .eval(c"jg.threshold_for_fap(20, 10 ** -2.5, 1e-3)", Some(g), None)
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(eps, jamguard::threshold_for_fap(20, 10f64.powf(-2.5), 1e-3).unwrap());
        run(
            py,
            g,
            r#"
det, common, counts = jg.detect_jammer([[0, 4], [4], [4, 7]], 8, 3)
assert det and common == [4] and counts[4] == 3
grid = jg.AngularGrid(8)
assert len(grid.sines) == 8 and grid.indices_in_span(0.0, 0.5) == sorted(grid.indices_in_span(0.0, 0.5))
"#,
        );
    });
}

#[test]
fn experiments_and_errors() {
    with_module(|py, g| {
        run(
            py,
            g,
            r#"
t = jg.run_experiment("fap", trials=5, seed=1, sweep=[0.2], g_values=[6])
assert len(t) > 0 and t.metadata()["g_values"] == [6]
cfg = jg.SystemConfig(antennas=64, users=4, min_common_pilots=3)
d = jg.single_trial(cfg, seed=2, intermediates=True)
assert len(d["energies"]) == 4 and len(d["occurrence_counts"]) == 64
try:
    jg.SystemConfig(users=3, min_common_pilots=9)
except ValueError as e:
    assert "configuration" in str(e)
else:
    raise AssertionError("accepted g > K")
"#,
        );
    });
}
