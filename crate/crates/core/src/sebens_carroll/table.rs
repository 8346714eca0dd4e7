use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of the agent factor; it stays in its ready state in every column.
pub const AGENT: &str = "A";
/// Default label of the environment factor carrying per-column tags.
pub const ENVIRONMENT: &str = "E";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// The measured system (e.g. the electron's spin).
    System,
    /// A display an agent can observe.
    Display,
    /// Explicit environment tags; one per column.
    Environment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub kind: RowKind,
    pub cells: Vec<String>,
    /// Basis order of the row's factor; every cell symbol appears in it.
    pub alphabet: Vec<String>,
}

impl Row {
    pub fn new(kind: RowKind, label: impl Into<String>, cells: Vec<String>) -> Self {
        let mut alphabet: Vec<String> = Vec::new();
        for c in &cells {
            if !alphabet.contains(c) {
                alphabet.push(c.clone());
            }
        }
        Row {
            label: label.into(),
            kind,
            cells,
            alphabet,
        }
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == symbol)
    }
}

/// One set-up: rows of symbols over columns, each column a branch with a
/// rational weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupTable {
    label: String,
    rows: Vec<Row>,
    weights: Vec<BigRational>,
}

fn parse_err(table: &str, row: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("set-up `{table}`, row `{row}`"),
        message: message.into(),
    }
}

impl SetupTable {
    pub fn new(label: impl Into<String>, rows: Vec<Row>, weights: Vec<BigRational>) -> Result<Self> {
        let label = label.into();
        let n = weights.len();
        if n == 0 {
            return Err(Error::param(format!("set-up `{label}` has no columns")));
        }
        let mut seen = BTreeSet::new();
        for row in &rows {
            if row.label == AGENT {
                return Err(parse_err(&label, &row.label, "label is reserved for the agent"));
            }
            if !seen.insert(row.label.as_str()) {
                return Err(parse_err(&label, &row.label, "row label repeated"));
            }
            if row.cells.len() != n {
                return Err(parse_err(
                    &label,
                    &row.label,
                    format!("expected {n} cells, found {}", row.cells.len()),
                ));
            }
            if let Some(c) = row.cells.iter().find(|c| row.symbol_index(c).is_none()) {
                return Err(parse_err(&label, &row.label, format!("symbol `{c}` missing from alphabet")));
            }
        }
        let count = |k: RowKind| rows.iter().filter(|r| r.kind == k).count();
        if count(RowKind::Display) == 0 {
            return Err(Error::param(format!("set-up `{label}` has no display row")));
        }
        if count(RowKind::System) > 1 || count(RowKind::Environment) > 1 {
            return Err(Error::param(format!(
                "set-up `{label}` has more than one system or environment row"
            )));
        }
        if count(RowKind::Environment) == 0 && seen.contains(ENVIRONMENT) {
            return Err(parse_err(&label, ENVIRONMENT, "label is reserved for the environment"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::param(format!("set-up `{label}` has non-positive weight {w}")));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::param(format!("weights of set-up `{label}` sum to {total}, not 1")));
        }
        let table = SetupTable {
            label,
            rows,
            weights,
        };
        table.check_degenerate()?;
        Ok(table)
    }

    /// Equal-weight set-up.
    pub fn equal_weight(label: impl Into<String>, rows: Vec<Row>) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.cells.len());
        let w = BigRational::new(1.into(), n.max(1).into());
        Self::new(label, rows, vec![w; n])
    }

    fn check_degenerate(&self) -> Result<()> {
        // without an explicit environment row every column gets its own tag
        if self.environment_row().is_none() {
            return Ok(());
        }
        let mut seen: BTreeMap<Vec<&str>, usize> = BTreeMap::new();
        for c in 0..self.columns() {
            let key: Vec<&str> = self.rows.iter().map(|r| r.cells[c].as_str()).collect();
            if let Some(&first) = seen.get(&key) {
                return Err(Error::DegenerateTable {
                    table: self.label.clone(),
                    first: self.column_label(first),
                    second: self.column_label(c),
                });
            }
            seen.insert(key, c);
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, label: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn columns(&self) -> usize {
        self.weights.len()
    }

    pub fn column_label(&self, c: usize) -> String {
        format!("{}:{}", self.label, c + 1)
    }

    pub fn displays(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.kind == RowKind::Display)
    }

    /// The first display row, which shows the measurement outcome.
    pub fn outcome_display(&self) -> &Row {
        self.displays().next().expect("validated: at least one display")
    }

    pub fn environment_row(&self) -> Option<&Row> {
        self.rows.iter().find(|r| r.kind == RowKind::Environment)
    }

    /// Columns in which `symbol` appears on `row`.
    pub fn column_set(&self, row: &str, symbol: &str) -> BTreeSet<usize> {
        self.row(row)
            .map(|r| {
                r.cells
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| *s == symbol)
                    .map(|(c, _)| c)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Reorders columns: new column `i` is old column `perm[i]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let n = self.columns();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::param("not a permutation of the columns"));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| Row {
                cells: perm.iter().map(|&p| r.cells[p].clone()).collect(),
                ..r.clone()
            })
            .collect();
        let weights = perm.iter().map(|&p| self.weights[p].clone()).collect();
        SetupTable::new(self.label.clone(), rows, weights)
    }

    /// Replaces row alphabets (e.g. with a shared one); cells must stay covered.
    pub fn with_alphabets(&self, alphabets: &BTreeMap<String, Vec<String>>) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|r| Row {
                alphabet: alphabets.get(&r.label).cloned().unwrap_or_else(|| r.alphabet.clone()),
                ..r.clone()
            })
            .collect();
        SetupTable::new(self.label.clone(), rows, self.weights.clone())
    }
}

/// Gives every row the union alphabet across `tables` (first appearance
/// order), so equal symbols map to equal basis states in every set-up.
/// All tables must have the same row labels and kinds in the same order.
pub fn align_alphabets(tables: &[SetupTable]) -> Result<Vec<SetupTable>> {
    let Some(first) = tables.first() else {
        return Ok(Vec::new());
    };
    let shape: Vec<(&str, RowKind)> = first.rows.iter().map(|r| (r.label.as_str(), r.kind)).collect();
    for t in &tables[1..] {
        let other: Vec<(&str, RowKind)> = t.rows.iter().map(|r| (r.label.as_str(), r.kind)).collect();
        if other != shape {
            return Err(Error::EspPrecondition(format!(
                "set-ups `{}` and `{}` do not share the same rows",
                first.label, t.label
            )));
        }
    }
    let mut alphabets: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for t in tables {
        for r in &t.rows {
            let entry = alphabets.entry(r.label.clone()).or_default();
            for s in &r.alphabet {
                if !entry.contains(s) {
                    entry.push(s.clone());
                }
            }
        }
    }
    tables.iter().map(|t| t.with_alphabets(&alphabets)).collect()
}

/// `k/N` rational from a string such as `"1/4"` or `"1"`.
pub fn parse_weight(text: &str) -> Result<BigRational> {
    let bad = || Error::UnsupportedWeights(format!("`{text}` is not a rational of the form k/N"));
    let (num, den) = match text.trim().split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), "1"),
    };
    let num: num_bigint::BigInt = num.parse().map_err(|_| bad())?;
    let den: num_bigint::BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}
