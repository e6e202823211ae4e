//! Line-oriented `key=value` scenario files.
//!
//! ```text
//! # comments start with '#'
//! scenario=sweep_sobolev
//! K_list=7,8,9
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, MAX_REFINEMENT, MIN_REFINEMENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    SweepSobolev,
    TanhEvolution,
    CosProbe,
    GaussonValidate,
    StrangOrder,
    ToymodelChecks,
    PicardCrosscheck,
    LogslopeProbe,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::SweepSobolev,
        ScenarioKind::TanhEvolution,
        ScenarioKind::CosProbe,
        ScenarioKind::GaussonValidate,
        ScenarioKind::StrangOrder,
        ScenarioKind::ToymodelChecks,
        ScenarioKind::PicardCrosscheck,
        ScenarioKind::LogslopeProbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SweepSobolev => "sweep_sobolev",
            ScenarioKind::TanhEvolution => "tanh_evolution",
            ScenarioKind::CosProbe => "cos_probe",
            ScenarioKind::GaussonValidate => "gausson_validate",
            ScenarioKind::StrangOrder => "strang_order",
            ScenarioKind::ToymodelChecks => "toymodel_checks",
            ScenarioKind::PicardCrosscheck => "picard_crosscheck",
            ScenarioKind::LogslopeProbe => "logslope_probe",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Tanh,
    /// `1 - cos(πx/a)`.
    OneMinusCos,
    /// Standing Gausson at `t = 0` for the configured `λ < 0`, `ω`.
    Gausson,
    /// Two-column text file `x, re[,im]`, linearly interpolated.
    File(PathBuf),
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Tanh => f.write_str("tanh"),
            InitialData::OneMinusCos => f.write_str("one_minus_cos"),
            InitialData::Gausson => f.write_str("gausson"),
            InitialData::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for InitialData {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tanh" => Ok(InitialData::Tanh),
            "one_minus_cos" => Ok(InitialData::OneMinusCos),
            "gausson" => Ok(InitialData::Gausson),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(InitialData::File(PathBuf::from(p))),
                _ => Err(format!("unknown initial data '{s}'")),
            },
        }
    }
}

pub const KEYS: [&str; 15] = [
    "scenario",
    "a",
    "K",
    "K_list",
    "bc",
    "lambda",
    "T",
    "J",
    "initial",
    "omega",
    "record_every",
    "out_dir",
    "n_time",
    "snapshots",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub a: f64,
    pub k: u32,
    pub k_list: Vec<u32>,
    pub bc: BoundaryCondition,
    pub lambda: f64,
    pub final_time: f64,
    pub steps: usize,
    pub initial: InitialData,
    pub omega: f64,
    pub record_every: Option<usize>,
    pub out_dir: PathBuf,
    pub n_time: usize,
    /// Times at which full states are written out.
    pub snapshots: Vec<f64>,
    pub seed: u64,
}

impl Params {
    pub fn defaults(kind: ScenarioKind) -> Self {
        let base = Params {
            a: 16.0,
            k: 8,
            k_list: vec![],
            bc: BoundaryCondition::Neumann,
            lambda: 1.0,
            final_time: 1.0,
            steps: 1000,
            initial: InitialData::Tanh,
            omega: -1.0,
            record_every: None,
            out_dir: PathBuf::from("out").join(kind.name()),
            n_time: 64,
            snapshots: vec![],
            seed: 7,
        };
        match kind {
            ScenarioKind::SweepSobolev => Params {
                k: 11,
                k_list: vec![7, 8, 9, 10, 11],
                final_time: 0.01,
                ..base
            },
            ScenarioKind::TanhEvolution => Params {
                snapshots: vec![0.0, 0.5, 1.0],
                ..base
            },
            ScenarioKind::CosProbe => Params {
                k: 11,
                final_time: 0.1,
                initial: InitialData::OneMinusCos,
                record_every: Some(1),
                snapshots: vec![0.0, 0.05, 0.1],
                ..base
            },
            ScenarioKind::GaussonValidate => Params {
                k: 10,
                lambda: -1.0,
                initial: InitialData::Gausson,
                ..base
            },
            ScenarioKind::StrangOrder => Params {
                k: 10,
                lambda: -1.0,
                steps: 250,
                initial: InitialData::Gausson,
                ..base
            },
            ScenarioKind::ToymodelChecks => Params {
                bc: BoundaryCondition::Dirichlet,
                final_time: 10.0,
                steps: 200,
                ..base
            },
            ScenarioKind::PicardCrosscheck => Params {
                k: 9,
                final_time: 0.01,
                ..base
            },
            ScenarioKind::LogslopeProbe => Params {
                k: 11,
                final_time: 0.1,
                record_every: Some(1),
                ..base
            },
        }
    }

    pub fn tau(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    /// Effective values of every key, as written to the manifest.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let list = |v: &[u32]| v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        let mut m = BTreeMap::new();
        m.insert("a".into(), self.a.to_string());
        m.insert("K".into(), self.k.to_string());
        m.insert("K_list".into(), list(&self.k_list));
        m.insert("bc".into(), self.bc.to_string());
        m.insert("lambda".into(), self.lambda.to_string());
        m.insert("T".into(), self.final_time.to_string());
        m.insert("J".into(), self.steps.to_string());
        m.insert("initial".into(), self.initial.to_string());
        m.insert("omega".into(), self.omega.to_string());
        m.insert(
            "record_every".into(),
            self.record_every.map_or("default".into(), |r| r.to_string()),
        );
        m.insert("out_dir".into(), self.out_dir.display().to_string());
        m.insert("n_time".into(), self.n_time.to_string());
        m.insert(
            "snapshots".into(),
            self.snapshots.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","),
        );
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: Params,
    /// Keys set explicitly, in the order they were given.
    pub overrides: Vec<String>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse '{value}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    if value.trim().is_empty() {
        return Ok(vec![]);
    }
    value.split(',').map(|v| parse_value(key, v)).collect()
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        Scenario {
            kind,
            params: Params::defaults(kind),
            overrides: vec![],
        }
    }

    /// Sets one key. `K` on `sweep_sobolev` restricts the sweep to that
    /// single refinement.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.params;
        match key {
            "a" => p.a = parse_value(key, value)?,
            "K" => {
                p.k = parse_value(key, value)?;
                if self.kind == ScenarioKind::SweepSobolev {
                    p.k_list = vec![p.k];
                }
            }
            "K_list" => p.k_list = parse_list(key, value)?,
            "bc" => p.bc = parse_value(key, value)?,
            "lambda" => p.lambda = parse_value(key, value)?,
            "T" => p.final_time = parse_value(key, value)?,
            "J" => p.steps = parse_value(key, value)?,
            "initial" => p.initial = value.trim().parse().map_err(Error::InvalidParameter)?,
            "omega" => p.omega = parse_value(key, value)?,
            "record_every" => p.record_every = Some(parse_value(key, value)?),
            "out_dir" => p.out_dir = PathBuf::from(value.trim()),
            "n_time" => p.n_time = parse_value(key, value)?,
            "snapshots" => p.snapshots = parse_list(key, value)?,
            "seed" => p.seed = parse_value(key, value)?,
            "scenario" => {
                return Err(Error::InvalidParameter("scenario cannot be overridden".into()))
            }
            _ => return Err(Error::InvalidParameter(format!("unknown key '{key}'"))),
        }
        if !self.overrides.iter().any(|k| k == key) {
            self.overrides.push(key.to_string());
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(p.a > 0.0 && p.a.is_finite()) {
            return bad(format!("a must be positive, got {}", p.a));
        }
        let ks: Vec<u32> = if self.kind == ScenarioKind::SweepSobolev {
            p.k_list.clone()
        } else {
            vec![p.k]
        };
        if let Some(k) = ks.iter().find(|k| !(MIN_REFINEMENT..=MAX_REFINEMENT).contains(*k)) {
            return bad(format!("K = {k} outside {MIN_REFINEMENT}..={MAX_REFINEMENT}"));
        }
        if !(p.final_time > 0.0 && p.final_time.is_finite()) || p.steps == 0 {
            return bad("T must be positive and J at least 1".into());
        }
        if !p.lambda.is_finite() || !p.omega.is_finite() {
            return bad("lambda and omega must be finite".into());
        }
        if p.record_every == Some(0) {
            return bad("record_every must be positive".into());
        }
        for &t in &p.snapshots {
            let j = t / p.tau();
            if !(t >= 0.0 && t <= p.final_time * (1.0 + 1e-12)) || (j - j.round()).abs() > 1e-6 {
                return bad(format!("snapshot time {t} is not a step time in [0, T]"));
            }
        }
        let needs = |bc: BoundaryCondition| -> Result<()> {
            if p.bc != bc {
                return Err(Error::WrongBoundary {
                    expected: bc,
                    found: p.bc,
                });
            }
            Ok(())
        };
        match self.kind {
            ScenarioKind::ToymodelChecks => needs(BoundaryCondition::Dirichlet)?,
            ScenarioKind::PicardCrosscheck
            | ScenarioKind::LogslopeProbe
            | ScenarioKind::GaussonValidate
            | ScenarioKind::StrangOrder => needs(BoundaryCondition::Neumann)?,
            _ => {}
        }
        if self.kind == ScenarioKind::PicardCrosscheck && p.n_time < 16 {
            return bad(format!("n_time must be >= 16, got {}", p.n_time));
        }
        if matches!(self.kind, ScenarioKind::GaussonValidate | ScenarioKind::StrangOrder)
            && !(p.lambda < 0.0)
        {
            return bad("the standing Gausson needs lambda < 0".into());
        }
        Ok(())
    }

    /// Step index of every snapshot time.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let tau = self.params.tau();
        self.params.snapshots.iter().map(|t| (t / tau).round() as usize).collect()
    }
}

/// Parses a scenario file. Unknown or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            line: line_no,
            msg: format!("expected key=value, found '{line}'"),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                line: line_no,
                msg: format!("unknown key '{key}'"),
            });
        }
        if entries.iter().any(|(_, k, _)| k == key) {
            return Err(Error::Config {
                line: line_no,
                msg: format!("duplicate key '{key}'"),
            });
        }
        entries.push((line_no, key.to_string(), value.trim().to_string()));
    }
    let kind: ScenarioKind = entries
        .iter()
        .find(|(_, k, _)| k == "scenario")
        .ok_or_else(|| Error::Config {
            line: 0,
            msg: "missing 'scenario'".into(),
        })?
        .2
        .parse()?;
    let mut scenario = Scenario::new(kind);
    // K_list last so that it wins over the K shortcut.
    entries.sort_by_key(|(_, k, _)| k == "K_list");
    for (line, key, value) in entries.iter().filter(|(_, k, _)| k != "scenario") {
        scenario.set(key, value).map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::Config { line: *line, msg },
            other => other,
        })?;
    }
    scenario.validate()?;
    Ok(scenario)
}
