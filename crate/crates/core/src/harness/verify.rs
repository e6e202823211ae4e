//! The acceptance checks: one outcome per criterion, evaluated from scenario
//! runs with default parameters and from direct library calls.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{Scenario, ScenarioKind};
use super::output::RunManifest;
use super::run_scenario;
use crate::error::Result;
use crate::functionals::{decomposition_residual, derivative, loglog_slope, v_average};
use crate::grid::{sample, sample_complex, BoundaryCondition, Field, Grid};
use crate::spectral::{l2_norm, Weighting};
use crate::toymodel::{choose_kappa, equivalence_probe, reference, ToyOperator};

pub const SLOPE_TARGET: f64 = 2.0;
pub const SLOPE_TOL: f64 = 0.3;
pub const REFINEMENTS: std::ops::RangeInclusive<u32> = 6..=10;
/// `√2/2` plus 5%.
pub const DERIVATIVE_CONTRACTION: f64 = std::f64::consts::FRAC_1_SQRT_2 + 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} [{}] {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail
        )
    }
}

pub const TITLES: [&str; 11] = [
    "mass conservation",
    "standing Gausson accuracy",
    "Strang order",
    "Sobolev dichotomy",
    "cancellation departs from zero",
    "averaging operator identities",
    "toy-model structure",
    "nonlinearity decomposition",
    "Picard-Duhamel cross-check",
    "log-slope probe",
    "determinism",
];

fn outcome(id: u8, passed: bool, detail: impl Into<String>) -> CriterionOutcome {
    CriterionOutcome {
        id,
        title: TITLES[id as usize - 1],
        passed,
        detail: detail.into(),
    }
}

/// Scenario used for a criterion, and the assertions it must pass.
fn scenario_criteria() -> Vec<(u8, ScenarioKind, &'static [&'static str])> {
    vec![
        (1, ScenarioKind::TanhEvolution, &["mass_drift"]),
        (2, ScenarioKind::GaussonValidate, &["max_error", "refinement"]),
        (3, ScenarioKind::StrangOrder, &["order"]),
        (
            4,
            ScenarioKind::SweepSobolev,
            &["H0_converges", "H1_converges", "H2_converges", "H3_converges", "H4_grows", "H5_grows"],
        ),
        (5, ScenarioKind::CosProbe, &["starts_at_zero", "departs_from_zero"]),
        (7, ScenarioKind::ToymodelChecks, &[]),
        (9, ScenarioKind::PicardCrosscheck, &["converged", "contraction", "agrees_with_splitting"]),
        (10, ScenarioKind::LogslopeProbe, &[]),
    ]
}

/// Judges a manifest on the named assertions (all of them when `names` is
/// empty).
fn judge(id: u8, m: &Result<RunManifest>, names: &[&str]) -> CriterionOutcome {
    let m = match m {
        Ok(m) => m,
        Err(e) => return outcome(id, false, format!("run failed: {e}")),
    };
    if let Some(msg) = &m.aborted {
        return outcome(id, false, format!("aborted: {msg}"));
    }
    let mut passed = true;
    let mut parts = Vec::new();
    let wanted: Vec<&str> = if names.is_empty() {
        m.assertions.iter().map(|a| a.name.as_str()).collect()
    } else {
        names.to_vec()
    };
    for name in wanted {
        match m.assertions.iter().find(|a| a.name == name) {
            Some(a) => {
                passed &= a.passed;
                parts.push(format!("{}{}: {}", if a.passed { "" } else { "FAILED " }, a.name, a.detail));
            }
            None => {
                passed = false;
                parts.push(format!("{name}: missing"));
            }
        }
    }
    outcome(id, passed && !parts.is_empty(), parts.join("; "))
}

type TestFunction = (&'static str, fn(f64) -> Complex64);

fn averaging_test_set() -> Vec<TestFunction> {
    vec![
        ("exp(-x^2/4)", |x| Complex64::new((-x * x / 4.0).exp(), 0.0)),
        ("cos(x)exp(-x^2/16)", |x| Complex64::new(x.cos() * (-x * x / 16.0).exp(), 0.0)),
        ("sech(x)+i x exp(-x^2/8)", |x| {
            Complex64::new(1.0 / x.cosh(), x * (-x * x / 8.0).exp())
        }),
    ]
}

/// Max over interior nodes of `|x D_h 𝒱[f] - (f - 𝒱[f])|`.
pub fn averaging_identity_defect(f: &Field) -> f64 {
    let w = v_average(f);
    let dw = derivative(&w);
    let grid = f.grid();
    (1..grid.len() - 1)
        .map(|j| (dw.values()[j] * grid.x(j) - (f.values()[j] - w.values()[j])).norm())
        .fold(0.0, f64::max)
}

pub fn check_averaging() -> Result<CriterionOutcome> {
    let a = 16.0;
    let mut passed = true;
    let mut parts = Vec::new();

    let mut exact = true;
    for k in REFINEMENTS {
        let g = Grid::new(a, k, BoundaryCondition::Neumann)?;
        for c in [Complex64::new(1.0, 0.0), Complex64::new(-0.3, 2.7), Complex64::new(1e-3, -1e5)] {
            exact &= v_average(&Field::constant(g.clone(), c)).values().iter().all(|&z| z == c);
        }
    }
    passed &= exact;
    parts.push(format!("constants reproduced exactly: {exact}"));

    let mut worst_ratio = 0.0f64;
    let mut sup_ok = true;
    for (name, f) in averaging_test_set() {
        let mut pts = Vec::new();
        for k in REFINEMENTS {
            let g = Grid::new(a, k, BoundaryCondition::Neumann)?;
            let u = sample_complex(&g, f)?;
            pts.push((g.spacing(), averaging_identity_defect(&u)));
            let w = v_average(&u);
            sup_ok &= w.max_abs() <= u.max_abs();
            let ratio = l2_norm(&derivative(&w), Weighting::Plain) / l2_norm(&derivative(&u), Weighting::Plain);
            worst_ratio = worst_ratio.max(ratio);
        }
        let slope = loglog_slope(&pts);
        let ok = (slope - SLOPE_TARGET).abs() <= SLOPE_TOL;
        passed &= ok;
        parts.push(format!("identity slope {slope:.3} for {name}"));
    }
    passed &= sup_ok;
    parts.push(format!("max|V[f]| <= max|f|: {sup_ok}"));
    let contraction_ok = worst_ratio <= DERIVATIVE_CONTRACTION;
    passed &= contraction_ok;
    parts.push(format!(
        "max |D_h V[f]|/|D_h f| = {worst_ratio:.4} <= {DERIVATIVE_CONTRACTION:.4}"
    ));
    Ok(outcome(6, passed, parts.join("; ")))
}

/// Fitted order of the decomposition residual over [`REFINEMENTS`].
pub fn decomposition_slope(a: f64, f: fn(f64) -> f64, lambda: f64) -> Result<f64> {
    let mut pts = Vec::new();
    for k in REFINEMENTS {
        let g = Grid::new(a, k, BoundaryCondition::Neumann)?;
        pts.push((g.spacing(), decomposition_residual(&sample(&g, f)?, lambda)?));
    }
    Ok(loglog_slope(&pts))
}

pub fn check_decomposition() -> Result<CriterionOutcome> {
    // On a = 16 the average of the Gaussian-odd derivative falls below the
    // vanishing floor near the edges, so that case uses a = 8.
    let gaussian_odd: fn(f64) -> f64 = |x| x * (-x * x / 4.0).exp();
    let cases = [("x exp(-x^2/4), a=8", 8.0, gaussian_odd), ("tanh, a=16", 16.0, f64::tanh)];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, a, f) in cases {
        let slope = decomposition_slope(a, f, 1.0)?;
        passed &= (slope - SLOPE_TARGET).abs() <= SLOPE_TOL;
        parts.push(format!("slope {slope:.3} for {name}"));
    }
    Ok(outcome(8, passed, parts.join("; ")))
}

/// Frozen toy-model constants at `a = 16`, `K = 8`.
pub fn check_toy_regression() -> Result<(bool, String)> {
    use reference::*;
    let g = Grid::new(16.0, 8, BoundaryCondition::Dirichlet)?;
    let kappa = choose_kappa(&g, 1.0)?;
    let close = |x: f64, r: f64| (x - r).abs() <= RELATIVE_TOL * r.abs();
    let foc = equivalence_probe(&ToyOperator::build(&g, -1.0, 0.0)?, 16, 3)?;
    let def = equivalence_probe(&ToyOperator::build(&g, 1.0, kappa)?, 16, 3)?;
    let ok = (kappa - KAPPA_K8).abs() < 1e-12
        && close(foc.c1_hat, FOCUSING_C1)
        && close(foc.big_c1_hat, FOCUSING_BIG_C1)
        && close(def.c1_hat, DEFOCUSING_C1)
        && close(def.big_c1_hat, DEFOCUSING_BIG_C1);
    Ok((
        ok,
        format!(
            "regression kappa {kappa}, (c1, C1) = ({:.12e}, {:.12e}) at lambda=-1 and ({:.12e}, {:.12e}) at lambda=1",
            foc.c1_hat, foc.big_c1_hat, def.c1_hat, def.big_c1_hat
        ),
    ))
}

/// Compares the output digests of two runs of the same scenario.
fn digests_match(a: &RunManifest, b: &RunManifest) -> std::result::Result<usize, String> {
    let map = |m: &RunManifest| -> BTreeMap<String, String> {
        m.files.iter().map(|f| (f.path.clone(), f.sha256.clone())).collect()
    };
    let (ma, mb) = (map(a), map(b));
    if ma.is_empty() {
        return Err("no files".into());
    }
    if ma != mb {
        let differing: Vec<&String> = ma
            .keys()
            .chain(mb.keys())
            .filter(|k| ma.get(*k) != mb.get(*k))
            .collect();
        return Err(format!("differing files {differing:?}"));
    }
    Ok(ma.len())
}

fn scenario_in(kind: ScenarioKind, dir: &Path) -> Scenario {
    let mut s = Scenario::new(kind);
    s.params.out_dir = dir.join(kind.name());
    s
}

/// Runs every scenario with its defaults under `work_dir`, the library
/// checks, and a second pass of every scenario for the determinism check.
pub fn run_all(work_dir: &Path) -> Result<Vec<CriterionOutcome>> {
    let first: Vec<(ScenarioKind, Result<RunManifest>)> = ScenarioKind::ALL
        .par_iter()
        .map(|&kind| (kind, run_scenario(&scenario_in(kind, work_dir))))
        .collect();
    let manifest = |kind: ScenarioKind| &first.iter().find(|(k, _)| *k == kind).expect("every scenario ran").1;

    let mut outcomes: Vec<CriterionOutcome> = scenario_criteria()
        .into_iter()
        .map(|(id, kind, names)| judge(id, manifest(kind), names))
        .collect();

    if let Some(c7) = outcomes.iter_mut().find(|o| o.id == 7) {
        let (ok, detail) = check_toy_regression()?;
        c7.passed &= ok;
        c7.detail = format!("{}; {detail}", c7.detail);
    }
    outcomes.push(check_averaging()?);
    outcomes.push(check_decomposition()?);

    let rerun_dir = work_dir.join("rerun");
    let second: Vec<(ScenarioKind, Result<RunManifest>)> = ScenarioKind::ALL
        .par_iter()
        .map(|&kind| (kind, run_scenario(&scenario_in(kind, &rerun_dir))))
        .collect();
    let mut passed = true;
    let mut files = 0;
    let mut problems = Vec::new();
    for ((kind, a), (_, b)) in first.iter().zip(&second) {
        match (a, b) {
            (Ok(a), Ok(b)) => match digests_match(a, b) {
                Ok(n) => files += n,
                Err(msg) => {
                    passed = false;
                    problems.push(format!("{kind}: {msg}"));
                }
            },
            _ => {
                passed = false;
                problems.push(format!("{kind}: run failed"));
            }
        }
    }
    let detail = if passed {
        format!("{} scenarios rerun, {files} CSV files byte-identical (SHA-256)", ScenarioKind::ALL.len())
    } else {
        problems.join("; ")
    };
    outcomes.push(outcome(11, passed, detail));
    outcomes.sort_by_key(|o| o.id);
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_defect_vanishes_on_linear_data() {
        let g = Grid::new(16.0, 6, BoundaryCondition::Neumann).unwrap();
        let u = sample(&g, |x| 2.0 * x + 1.0).unwrap();
        assert!(averaging_identity_defect(&u) < 1e-12);
    }

    #[test]
    fn judge_reports_missing_assertions() {
        let m = RunManifest {
            scenario: "cos_probe".into(),
            params: Default::default(),
            overrides: vec![],
            version: "0".into(),
            wall_clock_seconds: 0.0,
            files: vec![],
            assertions: vec![super::super::Assertion::new("starts_at_zero", true, "ok")],
            aborted: None,
        };
        let o = judge(5, &Ok(m.clone()), &["starts_at_zero"]);
        assert!(o.passed);
        let o = judge(5, &Ok(m), &["starts_at_zero", "departs_from_zero"]);
        assert!(!o.passed && o.detail.contains("missing"));
    }

    #[test]
    fn library_criteria_hold() {
        let c6 = check_averaging().unwrap();
        assert!(c6.passed, "{c6}");
        let c8 = check_decomposition().unwrap();
        assert!(c8.passed, "{c8}");
    }
}
