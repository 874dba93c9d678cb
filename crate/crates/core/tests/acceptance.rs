//! Acceptance run: every headline criterion at full size, one PASS/FAIL line
//! each. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use jamguard::config::{db_to_linear, SystemConfig};
use jamguard::detector::threshold_for_fap;
use jamguard::experiments::{crossing_point, run_experiment, ExperimentKind, ExperimentSpec, ResultRow, ResultTable};
use jamguard::jamming::collision_probability_bound;
use jamguard::validation::{
    check_collision_bound, check_exact_null, check_false_alarm_guarantee, check_moments, reference_scenario, CheckResult,
};

const SEED: u64 = 20_240_611;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn checks(results: &[CheckResult]) -> Outcome {
    let failed: Vec<String> = results
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} observed {:.4e} vs {:.4e} (se {:.2e})", c.name, c.observed, c.reference, c.stderr))
        .collect();
    if failed.is_empty() {
        outcome(true, format!("{} checks", results.len()))
    } else {
        outcome(false, failed.join("; "))
    }
}

/// `C(K, g) (1 - r^2)^(g - 1)` for `r = (pi - 2 spread) / (pi - spread)` with
/// `spread = pi / 18`, so `r = 16 / 17` exactly.
fn rational_bound(users: u64, g: u64) -> BigRational {
    let mut binom = BigInt::one();
    for i in 0..g {
        binom = binom * BigInt::from(users - i) / BigInt::from(i + 1);
    }
    let r = BigRational::new(BigInt::from(16), BigInt::from(17));
    let pair = BigRational::one() - &r * &r;
    let mut v = BigRational::from_integer(binom);
    for _ in 1..g {
        v *= &pair;
    }
    v.min(BigRational::one())
}

fn bound_values() -> Outcome {
    let start = Instant::now();
    let spread = PI / 18.0;
    let mut worst = 0.0f64;
    let mut values = Vec::new();
    for g in 2..=10u64 {
        let got = collision_probability_bound(10, g as usize, spread).unwrap();
        let exact = rational_bound(10, g);
        let got_r = BigRational::from_float(got).unwrap();
        let rel = ((got_r - &exact) / &exact).abs().to_f64().unwrap();
        worst = worst.max(rel);
        values.push(got);
    }
    let elapsed = start.elapsed();
    // g = 6, 8, 10 sit at indices 4, 6, 8
    let scale = |v: f64, lo: f64, hi: f64| v >= lo && v < hi;
    let orders = scale(values[4], 1e-3, 1e-2) && scale(values[6], 1e-5, 1e-4) && scale(values[8], 1e-9, 1e-8);
    let passed = worst <= 1e-12 && orders && elapsed < Duration::from_secs(1);
    outcome(
        passed,
        format!(
            "g6 {:.3e} g8 {:.3e} g10 {:.3e}, worst rel err {worst:.1e}, {elapsed:?}",
            values[4], values[6], values[8]
        ),
    )
}

fn collision_empirical() -> Outcome {
    let results: Vec<CheckResult> = [2, 3, 4]
        .iter()
        .map(|&g| check_collision_bound(SEED, 10, 200, PI / 18.0, g, 100_000, None).unwrap())
        .collect();
    checks(&results)
}

fn false_alarm_guarantee() -> Outcome {
    let sigma2 = db_to_linear(-25.0);
    let mut results = Vec::new();
    for nd in [1, 20] {
        for eta in [1e-2, 1e-3] {
            results.push(check_false_alarm_guarantee(SEED, nd, sigma2, eta, 100_000, None).unwrap());
        }
    }
    let mut out = checks(&results);
    let mut worst = 0.0f64;
    for eta in [1e-2, 1e-3] {
        let solver = threshold_for_fap(1, sigma2, eta).unwrap();
        let analytic = -sigma2 * eta.ln();
        worst = worst.max((solver / analytic - 1.0).abs());
    }
    out.passed &= worst <= 1e-9;
    out.detail.push_str(&format!(", N_d=1 closed form rel err {worst:.1e}"));
    out
}

fn means(rows: &[&ResultRow]) -> Vec<f64> {
    rows.iter().map(|r| r.mean).collect()
}

fn detection_gain(cdp: &ResultTable) -> Outcome {
    let sweep: Vec<f64> = cdp.series("nd1_g6", "cdp").iter().map(|r| r.sweep_value).collect();
    let one = crossing_point(&sweep, &means(&cdp.series("nd1_g6", "cdp")), 0.5);
    let twenty = crossing_point(&sweep, &means(&cdp.series("nd20_g6", "cdp")), 0.5);
    match (one, twenty) {
        (Some(a), Some(b)) => {
            let gain = a - b;
            outcome((5.0..=15.0).contains(&gain), format!("CDP=0.5 at {a:.2} dBW (N_d=1) and {b:.2} dBW (N_d=20): gain {gain:.2} dB"))
        }
        _ => outcome(false, format!("no CDP=0.5 crossing (N_d=1 {one:?}, N_d=20 {twenty:?})")),
    }
}

/// `later >= earlier - 3 se` pairwise (or `<=` when `increasing` is false).
fn ordered(earlier: &ResultRow, later: &ResultRow, increasing: bool) -> bool {
    let slack = 3.0 * (earlier.stderr.powi(2) + later.stderr.powi(2)).sqrt();
    if increasing {
        later.mean >= earlier.mean - slack
    } else {
        later.mean <= earlier.mean + slack
    }
}

fn monotone_violations(table: &ResultTable, metric: &str, prefixes: &[&str], g_values: &[usize]) -> Vec<String> {
    let mut bad = Vec::new();
    for p in prefixes {
        for &g in g_values {
            let s = table.series(&format!("{p}_g{g}"), metric);
            for w in s.windows(2) {
                if !ordered(w[0], w[1], true) {
                    bad.push(format!("{p}_g{g} {metric} drops at {}", w[1].sweep_value));
                }
            }
        }
        for w in g_values.windows(2) {
            let lo = table.series(&format!("{p}_g{}", w[0]), metric);
            let hi = table.series(&format!("{p}_g{}", w[1]), metric);
            for (a, b) in lo.iter().zip(&hi) {
                if !ordered(a, b, false) {
                    bad.push(format!("{p} {metric} rises from g={} to g={} at {}", w[0], w[1], a.sweep_value));
                }
            }
        }
    }
    bad
}

fn monotonicity(cdp: &ResultTable, fap: &ResultTable) -> Outcome {
    let g = &cdp.metadata.g_values;
    let mut bad = monotone_violations(cdp, "cdp", &["nd1", "nd20"], g);
    bad.extend(monotone_violations(fap, "fap", &["nd1", "nd20"], g));
    let points = cdp.series("nd1_g6", "cdp").len() + fap.series("nd1_g6", "fap").len();
    if bad.is_empty() {
        outcome(true, format!("{points} sweep points per curve pair, all ordered within 3 SE"))
    } else {
        outcome(false, bad.join("; "))
    }
}

fn value(table: &ResultTable, arm: &str, metric: &str, at: f64) -> f64 {
    table
        .series(arm, metric)
        .iter()
        .find(|r| r.sweep_value == at)
        .map(|r| r.mean)
        .unwrap_or(f64::NAN)
}

fn suppression_effectiveness(se: &ResultTable) -> Outcome {
    let clean = value(se, "no_jammer", "sum_se", 0.0);
    let sup = value(se, "suppressed", "sum_se", 0.0);
    let unsup = value(se, "unsuppressed", "sum_se", 0.0);
    outcome(
        sup >= 0.9 * clean && unsup < sup,
        format!("no jammer {clean:.3}, suppressed {sup:.3} ({:.1}%), unsuppressed {unsup:.3}", 100.0 * sup / clean),
    )
}

fn power_independence(se: &ResultTable) -> Outcome {
    let sup = means(&se.series("suppressed", "sum_se"));
    let unsup = means(&se.series("unsuppressed", "sum_se"));
    let max = sup.iter().cloned().fold(f64::MIN, f64::max);
    let min = sup.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / max;
    let decreasing = unsup.windows(2).all(|w| w[1] < w[0]);
    outcome(
        spread < 0.1 && decreasing,
        format!("suppressed varies {:.2}%, unsuppressed {:.3} -> {:.3}", 100.0 * spread, unsup[0], unsup[unsup.len() - 1]),
    )
}

fn antenna_scaling(se: &ResultTable) -> Outcome {
    let arms = ["no_jammer", "suppressed", "unsuppressed"];
    let increasing = arms.iter().all(|a| means(&se.series(a, "sum_se")).windows(2).all(|w| w[1] > w[0]));
    let clean = means(&se.series("no_jammer", "sum_se"));
    let sup = means(&se.series("suppressed", "sum_se"));
    let ratios: Vec<f64> = sup.iter().zip(&clean).map(|(s, c)| s / c).collect();
    let close = ratios.iter().all(|&r| r >= 0.9);
    let fmt: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(increasing && close, format!("strictly increasing: {increasing}, suppressed/no-jammer {}", fmt.join(" ")))
}

fn moment_equivalence() -> Outcome {
    let mut results = Vec::new();
    let (grid, scenario, cfg) = reference_scenario(1, 200).unwrap();
    results.extend(check_moments(SEED, &grid, &scenario, &cfg, 0, 20_000).unwrap());
    let (grid, scenario, cfg) = reference_scenario(3, 200).unwrap();
    for k in 0..3 {
        results.extend(check_moments(SEED, &grid, &scenario, &cfg, k, 20_000).unwrap());
    }
    checks(&results)
}

fn exact_null() -> Outcome {
    let c = check_exact_null(SEED, 200, 1000, None).unwrap();
    outcome(c.passed, format!("worst ratio {:.2e} over {} instances", c.observed, c.samples))
}

fn determinism() -> Outcome {
    let mut mismatched = Vec::new();
    let kinds = [
        (ExperimentKind::CdpVsJammerPower, 40),
        (ExperimentKind::FapVsSpread, 40),
        (ExperimentKind::SeVsJammerPower, 30),
        (ExperimentKind::SeVsAntennas, 10),
        (ExperimentKind::ValidationSuite, 200),
    ];
    for (kind, trials) in kinds {
        let csv = |threads: usize| {
            let mut spec = ExperimentSpec::new(kind, SystemConfig::default());
            spec.seed = SEED;
            spec.trials = trials;
            spec.threads = Some(threads);
            run_experiment(&spec).unwrap().to_csv_string().unwrap()
        };
        let reference = csv(1);
        for threads in [2, 3, 8] {
            if csv(threads) != reference {
                mismatched.push(format!("{kind:?} with {threads} threads"));
            }
        }
    }
    if mismatched.is_empty() {
        outcome(true, "five experiments, 1/2/3/8 threads, identical CSV")
    } else {
        outcome(false, mismatched.join("; "))
    }
}

fn full_run(kind: ExperimentKind, trials: usize, sweep: Option<Vec<f64>>) -> ResultTable {
    let mut spec = ExperimentSpec::new(kind, SystemConfig::default());
    spec.seed = SEED;
    spec.trials = trials;
    if let Some(s) = sweep {
        spec.sweep = s;
    }
    run_experiment(&spec).unwrap()
}

fn main() {
    let mut failures = 0;
    let mut report = |name: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failures += 1;
        }
        println!("{verdict} {name}: {} [{:.1?}]", o.detail, start.elapsed());
    };

    report("collision bound values", &mut bound_values);
    report("collision bound empirical", &mut collision_empirical);
    report("false-alarm guarantee", &mut false_alarm_guarantee);

    let cdp = full_run(ExperimentKind::CdpVsJammerPower, 1000, None);
    let fap = full_run(ExperimentKind::FapVsSpread, 1000, None);
    report("multi-subcarrier detection gain", &mut || detection_gain(&cdp));
    report("detection and false-alarm monotonicity", &mut || monotonicity(&cdp, &fap));

    let se = full_run(ExperimentKind::SeVsJammerPower, 500, Some(vec![0.0, 2.5, 5.0, 7.5, 10.0]));
    report("suppression effectiveness", &mut || suppression_effectiveness(&se));
    report("jammer-power independence", &mut || power_independence(&se));
    let antennas = full_run(ExperimentKind::SeVsAntennas, 500, None);
    report("antenna scaling", &mut || antenna_scaling(&antennas));

    report("moment equivalence", &mut moment_equivalence);
    report("exact jammer null", &mut exact_null);
    report("thread-count determinism", &mut determinism);

    println!("{} of 11 criteria failed", failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
