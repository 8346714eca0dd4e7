//! Scenario files, reports and the built-in case registry.
//!
//! A scenario file is TOML with a `kind`, one parameter section named after
//! the kind, optional tolerance overrides and a list of `[[expect]]` checks
//! evaluated against the report's quantities.

mod engines;
mod registry;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::sebens_carroll::parse_weight;

pub use registry::{case_ids, describe_case, reproduce, reproduce_all, Context};
pub use report::{Assertion, Quantity, Report, Table};

/// Current scenario schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Decoherence,
    Branching,
    SebensCarroll,
    McqueenVaidman,
    DeutschWallace,
}

impl Kind {
    pub fn section(self) -> &'static str {
        match self {
            Kind::Decoherence => "decoherence",
            Kind::Branching => "branching",
            Kind::SebensCarroll => "sebens_carroll",
            Kind::McqueenVaidman => "mcqueen_vaidman",
            Kind::DeutschWallace => "deutsch_wallace",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.section())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceParams {
    pub n_env: usize,
    /// Couplings are drawn uniformly from `[lo, hi]`.
    pub coupling: [f64; 2],
    pub seed: Option<u64>,
    /// Where to write the sampled decay curve.
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grain {
    Coarse,
    Fine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Time {
    T1,
    T2,
}

/// Which state of the grid model to decompose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// The equal mixture of both superpositions.
    Mixture,
    /// The A/B superposition alone.
    Psi2,
    /// The A_δ/C superposition alone.
    Psi3,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "world", rename_all = "snake_case", deny_unknown_fields)]
pub enum World {
    /// The mixture of two position superpositions on a grid.
    ThreeBranch {
        #[serde(default = "default_grain")]
        partition: Grain,
        #[serde(default = "default_time")]
        time: Time,
        #[serde(default = "default_component")]
        component: Component,
        #[serde(default)]
        merge: BTreeMap<String, String>,
    },
    /// A pure two-branch state whose pointer records overlap by `overlap`.
    TwoBranch {
        #[serde(default)]
        overlap: f64,
    },
    /// A density matrix read from a JSON matrix document, partitioned by
    /// one macrostate label per basis vector.
    Matrix {
        state_file: PathBuf,
        basis_labels: Vec<String>,
        #[serde(default)]
        merge: BTreeMap<String, String>,
    },
}

fn default_grain() -> Grain {
    Grain::Coarse
}

fn default_time() -> Time {
    Time::T2
}

fn default_component() -> Component {
    Component::Mixture
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub label: String,
    pub kind: crate::sebens_carroll::RowKind,
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupSpec {
    pub label: String,
    /// Column weights as `k/N`; equal weights when omitted.
    pub weights: Option<Vec<String>>,
    pub rows: Vec<RowSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SebensCarrollParams {
    #[serde(default)]
    pub setups: Vec<SetupSpec>,
    /// Outcome weights for the general two-table construction.
    pub general: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteSpec {
    /// 1-based stations whose packets are merged into the first.
    pub merge: Option<Vec<usize>>,
    /// 1-based station left alone by a random unitary on all the others.
    pub random_off: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McQueenVaidmanParams {
    pub n: Option<usize>,
    /// Squared packet amplitudes as `k/N`, instead of `n` equal ones.
    pub weights: Option<Vec<String>>,
    pub remote: Option<RemoteSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// `|0⟩⟨0|` in this dimension.
    pub pure: Option<usize>,
    /// `I/d` in this dimension.
    pub mixed: Option<usize>,
    /// Eigenvalues, rotated by a random unitary when `seed` is given.
    pub diagonal: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// JSON matrix document.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeutschWallaceParams {
    Erasure {
        rho1: StateSpec,
        rho2: StateSpec,
    },
    Equivalence {
        alpha: [f64; 2],
        beta: [f64; 2],
    },
    Utility {
        weights: BTreeMap<String, String>,
        utility: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parameters {
    Decoherence(DecoherenceParams),
    Branching(World),
    SebensCarroll(SebensCarrollParams),
    McQueenVaidman(McQueenVaidmanParams),
    DeutschWallace(DeutschWallaceParams),
}

impl Parameters {
    pub fn kind(&self) -> Kind {
        match self {
            Parameters::Decoherence(_) => Kind::Decoherence,
            Parameters::Branching(_) => Kind::Branching,
            Parameters::SebensCarroll(_) => Kind::SebensCarroll,
            Parameters::McQueenVaidman(_) => Kind::McqueenVaidman,
            Parameters::DeutschWallace(_) => Kind::DeutschWallace,
        }
    }
}

/// Expected value of a quantity.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Expected {
    Flag(bool),
    Number(f64),
    /// A rational such as `"1/4"`, or free text.
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub key: String,
    pub equals: Option<Expected>,
    /// Absolute tolerance for numeric comparisons.
    pub tol: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

const DEFAULT_EXPECT_TOL: f64 = 1e-10;

impl Expectation {
    pub fn equals(key: impl Into<String>, value: Expected) -> Self {
        Expectation {
            key: key.into(),
            equals: Some(value),
            tol: None,
            min: None,
            max: None,
        }
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        match &self.equals {
            Some(Expected::Flag(b)) => parts.push(b.to_string()),
            Some(Expected::Number(x)) => parts.push(format!("{x} ± {:e}", self.tol.unwrap_or(DEFAULT_EXPECT_TOL))),
            Some(Expected::Text(s)) => parts.push(s.clone()),
            None => {}
        }
        if let Some(m) = self.min {
            parts.push(format!(">= {m}"));
        }
        if let Some(m) = self.max {
            parts.push(format!("<= {m}"));
        }
        parts.join(", ")
    }

    fn evaluate(&self, actual: Option<&Quantity>) -> Assertion {
        let tol = self.tol.unwrap_or(DEFAULT_EXPECT_TOL);
        let passed = match actual {
            None => false,
            Some(q) => {
                let eq = match (&self.equals, q) {
                    (None, _) => true,
                    (Some(Expected::Flag(e)), Quantity::Flag(a)) => e == a,
                    (Some(Expected::Number(e)), Quantity::Number { value, .. }) => (e - value).abs() <= tol,
                    (Some(Expected::Text(e)), Quantity::Number { value, exact }) => match parse_weight(e) {
                        Ok(want) => match exact.as_deref().map(parse_weight) {
                            Some(Ok(got)) => got == want,
                            _ => (report::rational_value(&want) - value).abs() <= tol,
                        },
                        Err(_) => false,
                    },
                    (Some(Expected::Text(e)), Quantity::Text(a)) => e == a,
                    _ => false,
                };
                let bounds = match q {
                    Quantity::Number { value, .. } => {
                        self.min.is_none_or(|m| *value >= m) && self.max.is_none_or(|m| *value <= m)
                    }
                    _ => self.min.is_none() && self.max.is_none(),
                };
                eq && bounds
            }
        };
        Assertion {
            name: self.key.clone(),
            expected: self.describe(),
            actual: actual.map_or_else(|| "missing".to_string(), |q| q.to_string()),
            passed,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    version: u32,
    kind: Kind,
    id: Option<String>,
    description: Option<String>,
    seed: Option<u64>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    decoherence: Option<DecoherenceParams>,
    branching: Option<World>,
    sebens_carroll: Option<SebensCarrollParams>,
    mcqueen_vaidman: Option<McQueenVaidmanParams>,
    deutsch_wallace: Option<DeutschWallaceParams>,
    #[serde(default)]
    expect: Vec<Expectation>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub id: String,
    pub description: String,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub parameters: Parameters,
    pub expect: Vec<Expectation>,
    /// Directory that relative paths in the file are resolved against.
    pub base_dir: PathBuf,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn schema_err(field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("field `{field}`"),
        message: message.into(),
    }
}

impl ScenarioFile {
    /// Parses and validates scenario text; `name` is the fallback id.
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        Self::parse_with(text, name, name)
    }

    fn parse_with(text: &str, source: &str, name: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    format!("{source}:{line}:{col}")
                }
                None => source.to_string(),
            };
            Error::Parse {
                location,
                message: e.message().trim().to_string(),
            }
        })?;
        if raw.version != SCHEMA_VERSION {
            return Err(schema_err(
                "version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", raw.version),
            ));
        }
        let sections = [
            (Kind::Decoherence, raw.decoherence.is_some()),
            (Kind::Branching, raw.branching.is_some()),
            (Kind::SebensCarroll, raw.sebens_carroll.is_some()),
            (Kind::McqueenVaidman, raw.mcqueen_vaidman.is_some()),
            (Kind::DeutschWallace, raw.deutsch_wallace.is_some()),
        ];
        if let Some((other, _)) = sections.iter().find(|(k, present)| *present && *k != raw.kind) {
            return Err(schema_err(
                other.section(),
                format!("section does not belong to a `{}` scenario", raw.kind),
            ));
        }
        let missing = || schema_err(raw.kind.section(), "missing parameter section");
        let parameters = match raw.kind {
            Kind::Decoherence => Parameters::Decoherence(raw.decoherence.ok_or_else(missing)?),
            Kind::Branching => Parameters::Branching(raw.branching.ok_or_else(missing)?),
            Kind::SebensCarroll => Parameters::SebensCarroll(raw.sebens_carroll.ok_or_else(missing)?),
            Kind::McqueenVaidman => Parameters::McQueenVaidman(raw.mcqueen_vaidman.ok_or_else(missing)?),
            Kind::DeutschWallace => Parameters::DeutschWallace(raw.deutsch_wallace.ok_or_else(missing)?),
        };
        let mut probe = Tolerances::default();
        for (k, v) in &raw.tolerances {
            probe
                .set(k, *v)
                .map_err(|e| schema_err(&format!("tolerances.{k}"), e.to_string()))?;
        }
        for (i, e) in raw.expect.iter().enumerate() {
            if e.equals.is_none() && e.min.is_none() && e.max.is_none() {
                return Err(schema_err(
                    &format!("expect[{i}]"),
                    format!("check on `{}` needs `equals`, `min` or `max`", e.key),
                ));
            }
        }
        engines::validate(&parameters)?;
        Ok(ScenarioFile {
            id: raw.id.unwrap_or_else(|| name.to_string()),
            description: raw.description.unwrap_or_default(),
            seed: raw.seed,
            tolerances: raw.tolerances,
            parameters,
            expect: raw.expect,
            base_dir: PathBuf::from("."),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        let mut file = Self::parse_with(&text, &path.display().to_string(), &name)?;
        file.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(file)
    }

    pub fn kind(&self) -> Kind {
        self.parameters.kind()
    }

    pub(crate) fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// Command-line adjustments applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// `name=value` tolerance overrides, applied after the file's own.
    pub tolerances: Vec<String>,
    /// Replaces every seed in the file.
    pub seed: Option<u64>,
}

impl RunOptions {
    pub(crate) fn tolerances(&self, file: &ScenarioFile) -> Result<Tolerances> {
        let mut tol = Tolerances::default();
        for (k, v) in &file.tolerances {
            tol.set(k, *v)?;
        }
        for o in &self.tolerances {
            tol.apply_override(o)?;
        }
        Ok(tol)
    }
}

/// Runs the engine for the file's kind and evaluates its expectations.
pub fn run(file: &ScenarioFile, opts: &RunOptions) -> Result<Report> {
    let start = Instant::now();
    let tol = opts.tolerances(file)?;
    let mut report = engines::execute(file, opts, &tol)?;
    report.id = file.id.clone();
    if !file.description.is_empty() {
        report.description = file.description.clone();
    }
    for e in &file.expect {
        let a = e.evaluate(report.get(&e.key));
        report.assertions.push(a);
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Process exit status for a finished report.
pub fn exit_status(report: &Report) -> i32 {
    if report.passed() {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests;
