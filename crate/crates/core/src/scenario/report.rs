use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Kind;

/// One reported value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// A decimal, plus the exact fraction when the engine produced one.
    Number { value: f64, exact: Option<String> },
    Flag(bool),
    Text(String),
}

impl Quantity {
    pub fn number(value: f64) -> Self {
        Quantity::Number { value, exact: None }
    }

    pub fn exact(q: &BigRational) -> Self {
        Quantity::Number {
            value: rational_value(q),
            exact: Some(q.to_string()),
        }
    }

    pub fn with_fraction(value: f64, exact: Option<String>) -> Self {
        Quantity::Number { value, exact }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Number { value, exact: Some(e) } => write!(f, "{e} ({value:.12})"),
            Quantity::Number { value, exact: None } => write!(f, "{value:.12}"),
            Quantity::Flag(b) => write!(f, "{b}"),
            Quantity::Text(s) => write!(f, "{s}"),
        }
    }
}

pub(crate) fn rational_value(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

/// Outcome of one scenario run or registry case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub kind: Kind,
    pub description: String,
    pub tables: Vec<Table>,
    pub quantities: BTreeMap<String, Quantity>,
    pub derivation: Vec<String>,
    pub notes: Vec<String>,
    pub assertions: Vec<Assertion>,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn new(id: impl Into<String>, kind: Kind) -> Self {
        Report {
            id: id.into(),
            kind,
            description: String::new(),
            tables: Vec::new(),
            quantities: BTreeMap::new(),
            derivation: Vec::new(),
            notes: Vec::new(),
            assertions: Vec::new(),
            wall_time_ms: 0.0,
        }
    }

    pub fn set(&mut self, key: impl Into<String>, q: Quantity) {
        self.quantities.insert(key.into(), q);
    }

    pub fn get(&self, key: &str) -> Option<&Quantity> {
        self.quantities.get(key)
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// Records a check computed outside the expectation machinery.
    pub fn check(&mut self, name: impl Into<String>, expected: impl fmt::Display, actual: impl fmt::Display, passed: bool) {
        self.assertions.push(Assertion {
            name: name.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            passed,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {} [{}] ==", self.id, self.kind)?;
        if !self.description.is_empty() {
            writeln!(f, "{}", self.description)?;
        }
        for t in &self.tables {
            writeln!(f, "\n{}", t.title)?;
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|i| {
                    t.rows
                        .iter()
                        .filter_map(|r| r.get(i))
                        .chain(std::iter::once(&t.columns[i]))
                        .map(|s| s.chars().count())
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(f, "  {}", line(&t.columns).trim_end())?;
            for r in &t.rows {
                writeln!(f, "  {}", line(r).trim_end())?;
            }
        }
        if !self.derivation.is_empty() {
            writeln!(f, "\nderivation")?;
            for step in &self.derivation {
                writeln!(f, "  {step}")?;
            }
        }
        if !self.quantities.is_empty() {
            writeln!(f, "\nquantities")?;
            for (k, v) in &self.quantities {
                writeln!(f, "  {k} = {v}")?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        if !self.assertions.is_empty() {
            writeln!(f, "\nassertions")?;
            for a in &self.assertions {
                let mark = if a.passed { "PASS" } else { "FAIL" };
                writeln!(f, "  {mark} {}: expected {}, got {}", a.name, a.expected, a.actual)?;
            }
        }
        write!(f, "time: {:.1} ms", self.wall_time_ms)
    }
}
