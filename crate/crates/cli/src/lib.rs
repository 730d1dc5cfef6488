//! Run configuration, pipeline drivers and report assembly for the
//! `amoebalab` binary.

pub mod parse;
mod run;

pub use run::run;

use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

pub const SCHEMA: &str = "amoebalab/1";
pub const MIN_GRID: usize = 16;

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("check `{check}` failed: {source}")]
    Numeric {
        check: String,
        #[source]
        source: amoebalab_core::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric { .. } => EXIT_NUMERIC,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Classical,
    Generalized,
    SuperformCheck,
    FanLimit,
}

/// Everything a run depends on. Output paths are not echoed into the
/// report, so the same computation written to two places gives the same
/// bytes.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    /// Marked points as `[re, im]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residues: Option<Vec<Vec<f64>>>,
    pub base_point: [f64; 2],
    #[serde(rename = "box")]
    pub box_: [f64; 4],
    pub grid: [usize; 2],
    pub nq: usize,
    pub fibers: usize,
    pub angles: usize,
    pub ma_grid: usize,
    pub samples: usize,
    pub delta: f64,
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_classical: Option<String>,
    pub ts: Vec<f64>,
    pub cases: usize,
    pub forms: usize,
    pub torus_points: usize,
    pub positivity_trials: usize,
    #[serde(skip)]
    pub report: Option<PathBuf>,
    #[serde(skip)]
    pub emit: Option<PathBuf>,
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        RunConfig {
            mode,
            poly: None,
            points: None,
            residues: None,
            base_point: [-1.0, 0.0],
            box_: [-6.0, 6.0, -6.0, 6.0],
            grid: [200, 200],
            nq: amoebalab_core::classical::DEFAULT_NQ,
            fibers: 0,
            angles: 64,
            ma_grid: 60,
            samples: 2_000_000,
            delta: amoebalab_core::generalized::DEFAULT_DELTA,
            eps: 3.0,
            seed: None,
            compare_classical: None,
            ts: vec![1.0, 2.0, 4.0, 8.0],
            cases: 200,
            forms: 50,
            torus_points: 20,
            positivity_trials: 50,
            report: None,
            emit: None,
            csv: None,
        }
    }

    /// Fibers per axis; `0` means twice the grid resolution.
    pub fn fibers_used(&self) -> usize {
        if self.fibers == 0 {
            2 * self.grid[0].max(self.grid[1])
        } else {
            self.fibers
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let b = self.box_;
        if b.iter().any(|v| !v.is_finite()) {
            return bad("box bounds must be finite".into());
        }
        if !(b[0] < b[1] && b[2] < b[3]) {
            return bad(format!("box needs lo < hi on each axis, got {b:?}"));
        }
        if self.grid.iter().any(|n| *n < MIN_GRID) {
            return bad(format!("grid must be at least {MIN_GRID} per axis, got {:?}", self.grid));
        }
        match self.mode {
            Mode::Classical => {
                if self.poly.is_none() {
                    return bad("classical mode needs --poly".into());
                }
                if self.nq == 0 || self.angles == 0 || self.ma_grid < 2 {
                    return bad("nq and angles must be positive, ma-grid at least 2".into());
                }
            }
            Mode::Generalized | Mode::FanLimit => {
                if self.points.is_none() || self.residues.is_none() {
                    return bad("need --points and --residues".into());
                }
                if self.seed.is_none() {
                    return bad("stochastic mode needs --seed".into());
                }
                if self.samples < 2 {
                    return bad("need at least 2 samples".into());
                }
                if !(self.delta > 0.0 && self.delta.is_finite()) {
                    return bad("delta must be positive".into());
                }
                if !(self.eps > 0.0 && self.eps.is_finite()) {
                    return bad("eps must be positive".into());
                }
                if self.mode == Mode::FanLimit && (self.ts.is_empty() || self.ts.iter().any(|t| !(*t > 0.0))) {
                    return bad("scales must be positive".into());
                }
                if self.mode == Mode::FanLimit && self.ts.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("scales must be increasing".into());
                }
            }
            Mode::SuperformCheck => {
                if self.seed.is_none() {
                    return bad("superform-check draws random forms and needs --seed".into());
                }
                if self.cases == 0 || self.forms == 0 || self.torus_points == 0 {
                    return bad("case counts must be positive".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub check: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub tolerances: BTreeMap<String, f64>,
    pub results: serde_json::Map<String, serde_json::Value>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Failure>,
    pub all_pass: bool,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            config,
            tolerances: BTreeMap::new(),
            results: serde_json::Map::new(),
            checks: Vec::new(),
            error: None,
            all_pass: true,
        }
    }

    pub fn tol(&mut self, name: &str, v: f64) -> f64 {
        self.tolerances.insert(name.into(), v);
        v
    }

    pub fn result<T: Serialize>(&mut self, key: &str, v: &T) {
        let v = serde_json::to_value(v).expect("report values serialize");
        self.results.insert(key.into(), v);
    }

    /// Records `value <= tol`.
    pub fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        self.push(name, value <= tol, value, tol);
    }

    /// Records a boolean property as `value` 1 or 0 against `tol` 1.
    pub fn holds(&mut self, name: &str, ok: bool) {
        self.push(name, ok, if ok { 1.0 } else { 0.0 }, 1.0);
    }

    pub fn push(&mut self, name: &str, pass: bool, value: f64, tol: f64) {
        self.all_pass &= pass;
        self.checks.push(Check { name: name.into(), pass, value, tol });
    }

    pub fn fail(&mut self, check: &str, message: String) {
        self.all_pass = false;
        self.error = Some(Failure { check: check.into(), message });
    }

    pub fn failing_checks(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        if let Some(e) = &self.error {
            v.push(&e.check);
        }
        v
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            EXIT_OK
        } else {
            EXIT_NUMERIC
        }
    }
}
