//! Scenario runner: configuration, output files, figures and the criterion
//! checks.

pub mod config;
pub mod figures;
pub mod output;
pub mod scenarios;
pub mod verify;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{parse_config, InitialData, Params, Scenario, ScenarioKind};
pub use output::{Assertion, RunManifest, Table};

use crate::error::{Error, Result};
use output::OutputDir;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Numerical failures end a run with a partial manifest instead of an error.
fn is_numerical(e: &Error) -> bool {
    matches!(
        e,
        Error::NonFinite { .. }
            | Error::VanishingAverage { .. }
            | Error::LeftBall { .. }
            | Error::WidthLost { .. }
            | Error::Numerical(_)
    )
}

/// Runs one scenario into `params.out_dir` and writes its manifest there.
pub fn run_scenario(s: &Scenario) -> Result<RunManifest> {
    s.validate()?;
    let start = Instant::now();
    let mut out = OutputDir::create(&s.params.out_dir)?;
    let (assertions, aborted) = match scenarios::execute(s, &mut out) {
        Ok(r) => (r.assertions, r.aborted),
        Err(e) if is_numerical(&e) => (vec![], Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let manifest = RunManifest {
        scenario: s.kind.name().to_string(),
        params: s.params.to_map(),
        overrides: s.overrides.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        files: out.into_files(),
        assertions,
        aborted,
    };
    manifest.write(&s.params.out_dir)?;
    Ok(manifest)
}

/// Runs copies of `parent` with `axis` set to each value, in parallel, each
/// into `<out_dir>/<axis>_<value>`. Results keep the order of `values`.
pub fn sweep(parent: &Scenario, axis: &str, values: &[String]) -> Vec<Result<RunManifest>> {
    values
        .par_iter()
        .map(|v| {
            let mut s = parent.clone();
            s.set(axis, v)?;
            s.params.out_dir = parent.params.out_dir.join(format!("{axis}_{v}"));
            run_scenario(&s)
        })
        .collect()
}

/// Exit code for a finished run.
pub fn exit_code(m: &RunManifest) -> i32 {
    if m.aborted.is_some() {
        EXIT_NUMERICAL
    } else if m.passed() {
        EXIT_PASS
    } else {
        EXIT_ASSERTION
    }
}

/// Exit code for a run that returned an error.
pub fn error_exit_code(e: &Error) -> i32 {
    if is_numerical(e) {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<Scenario> {
    parse_config(&std::fs::read_to_string(path)?)
}
