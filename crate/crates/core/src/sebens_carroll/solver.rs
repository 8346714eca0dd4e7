use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::build::{build_setup, esp_distance, reduced_display_state};
use super::table::{align_alphabets, SetupTable, AGENT};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// `P(symbol | setup)` for a symbol shown on `display`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolRef {
    pub setup: String,
    pub display: String,
    pub symbol: String,
}

impl fmt::Display for SymbolRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({}|{})", self.symbol, self.setup)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// Reduced states on (A, display) agree across the two set-ups.
    Esp { display: String },
    /// Both symbols occur in exactly the same columns of one set-up.
    SameBranch { setup: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub left: SymbolRef,
    pub right: SymbolRef,
    pub justification: Justification,
}

impl fmt::Display for DerivationStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}  ", self.left, self.right)?;
        match &self.justification {
            Justification::Esp { display } => write!(f, "[ESP on ({AGENT},{display})]"),
            Justification::SameBranch { setup } => write!(f, "[same branch in {setup}]"),
        }
    }
}

/// Outcome of one numerical ESP comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct EspCheck {
    pub left: String,
    pub right: String,
    pub display: String,
    pub distance: f64,
    pub passed: bool,
    /// Compared via the table-level reduced state instead of the built state.
    pub factored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CredenceSolution {
    /// Label of the set-up whose branch credences were solved for.
    pub target: String,
    /// Credence of each column of the target set-up.
    pub branches: Vec<(String, BigRational)>,
    /// Every symbol credence the constraints determine, across set-ups.
    pub symbols: Vec<(SymbolRef, BigRational)>,
    /// Chain of equalities linking the target's branches.
    pub derivation: Vec<DerivationStep>,
    /// Normalization and summation steps that finish the argument.
    pub conclusions: Vec<String>,
    pub esp_checks: Vec<EspCheck>,
}

impl CredenceSolution {
    /// Credence of `symbol` in `setup` (any display), if determined.
    pub fn credence(&self, setup: &str, symbol: &str) -> Option<&BigRational> {
        self.symbols
            .iter()
            .find(|(s, _)| s.setup == setup && s.symbol == symbol)
            .map(|(_, v)| v)
    }

    pub fn branch(&self, label: &str) -> Option<&BigRational> {
        self.branches.iter().find(|(l, _)| l == label).map(|(_, v)| v)
    }

    /// Numbered derivation lines followed by the conclusions.
    pub fn chain_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .derivation
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{}. {s}", i + 1))
            .collect();
        lines.extend(self.conclusions.iter().map(|c| format!("∴ {c}")));
        lines
    }
}

struct Equation {
    coeffs: Vec<BigRational>,
    rhs: BigRational,
    text: String,
}

/// Reduced row echelon form that remembers which input equations each row
/// combines.
struct Rref {
    rows: Vec<(Vec<BigRational>, BigRational, BTreeSet<usize>)>,
    pivots: Vec<usize>,
}

impl Rref {
    fn new(eqs: &[Equation], nvars: usize) -> Result<Self> {
        let mut rows: Vec<_> = eqs
            .iter()
            .enumerate()
            .map(|(i, e)| (e.coeffs.clone(), e.rhs.clone(), BTreeSet::from([i])))
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..nvars {
            let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let inv = rows[r].0[col].recip();
            for x in rows[r].0.iter_mut() {
                *x *= &inv;
            }
            rows[r].1 *= &inv;
            let (pivot_coeffs, pivot_rhs, pivot_src) = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r || row.0[col].is_zero() {
                    continue;
                }
                let factor = row.0[col].clone();
                for (x, y) in row.0.iter_mut().zip(&pivot_coeffs) {
                    *x -= &factor * y;
                }
                row.1 -= &factor * &pivot_rhs;
                row.2.extend(pivot_src.iter().copied());
            }
            pivots.push(col);
            r += 1;
        }
        if let Some(bad) = rows[r..].iter().find(|row| !row.1.is_zero()) {
            let last = *bad.2.iter().next_back().expect("non-empty provenance");
            let others: Vec<&str> = bad
                .2
                .iter()
                .filter(|&&i| i != last)
                .map(|&i| eqs[i].text.as_str())
                .collect();
            return Err(Error::Contradiction {
                first: eqs[last].text.clone(),
                second: others.join("; "),
            });
        }
        rows.truncate(r);
        Ok(Rref { rows, pivots })
    }

    /// Value of the linear functional `f · x` if the system fixes it.
    fn evaluate(&self, f: &[BigRational]) -> Option<BigRational> {
        let mut f = f.to_vec();
        let mut value = BigRational::zero();
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if f[col].is_zero() {
                continue;
            }
            let factor = f[col].clone();
            for (x, y) in f.iter_mut().zip(&row.0) {
                *x -= &factor * y;
            }
            value += &factor * &row.1;
        }
        f.iter().all(Zero::is_zero).then_some(value)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.0[x] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn verify_esp(tables: &[SetupTable], tol: &Tolerances) -> Result<Vec<EspCheck>> {
    let fits = tables.iter().all(|t| {
        super::build::setup_layout(t)
            .map(|l| l.dim() <= tol.max_dim)
            .unwrap_or(false)
    });
    let built = if fits {
        Some(
            tables
                .iter()
                .map(|t| build_setup(t, tol))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let mut checks = Vec::new();
    for i in 0..tables.len() {
        for j in i + 1..tables.len() {
            for d in tables[i].displays() {
                let distance = match &built {
                    Some(b) => esp_distance((&b[i].0, &b[i].1), (&b[j].0, &b[j].1), &[AGENT, &d.label])?,
                    None => reduced_display_state(&tables[i], &d.label)?
                        .max_abs_diff(&reduced_display_state(&tables[j], &d.label)?),
                };
                checks.push(EspCheck {
                    left: tables[i].label().to_string(),
                    right: tables[j].label().to_string(),
                    display: d.label.clone(),
                    distance,
                    passed: distance <= tol.esp,
                    factored: built.is_none(),
                });
            }
        }
    }
    Ok(checks)
}

/// Symbol nodes of the equality graph, in set-up, display, alphabet order.
struct Graph {
    nodes: Vec<(SymbolRef, BTreeSet<usize>, usize)>,
    adjacency: Vec<Vec<(usize, Justification)>>,
}

impl Graph {
    fn new(tables: &[SetupTable], checks: &[EspCheck]) -> Self {
        let mut nodes = Vec::new();
        for (s, t) in tables.iter().enumerate() {
            for d in t.displays() {
                for sym in &d.alphabet {
                    let cols = t.column_set(&d.label, sym);
                    if !cols.is_empty() {
                        let r = SymbolRef {
                            setup: t.label().to_string(),
                            display: d.label.clone(),
                            symbol: sym.clone(),
                        };
                        nodes.push((r, cols, s));
                    }
                }
            }
        }
        let index: BTreeMap<SymbolRef, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.0.clone(), i)).collect();
        let mut adjacency: Vec<Vec<(usize, Justification)>> = vec![Vec::new(); nodes.len()];
        for c in checks.iter().filter(|c| c.passed) {
            for (i, (r, _, _)) in nodes.iter().enumerate() {
                if r.setup != c.left || r.display != c.display {
                    continue;
                }
                let other = SymbolRef {
                    setup: c.right.clone(),
                    ..r.clone()
                };
                if let Some(&j) = index.get(&other) {
                    let just = Justification::Esp {
                        display: c.display.clone(),
                    };
                    adjacency[i].push((j, just.clone()));
                    adjacency[j].push((i, just));
                }
            }
        }
        for i in 0..nodes.len() {
            for j in 0..nodes.len() {
                if i != j && nodes[i].2 == nodes[j].2 && nodes[i].1 == nodes[j].1 {
                    adjacency[i].push((
                        j,
                        Justification::SameBranch {
                            setup: nodes[i].0.setup.clone(),
                        },
                    ));
                }
            }
        }
        // ESP edges before same-branch edges, each in node order
        for adj in adjacency.iter_mut() {
            adj.sort_by_key(|(j, just)| (matches!(just, Justification::SameBranch { .. }), *j));
        }
        Graph { nodes, adjacency }
    }

    fn path(&self, from: usize, to: usize) -> Option<Vec<DerivationStep>> {
        let mut parent: Vec<Option<(usize, Justification)>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                break;
            }
            for (y, just) in &self.adjacency[x] {
                if !seen[*y] {
                    seen[*y] = true;
                    parent[*y] = Some((x, just.clone()));
                    queue.push_back(*y);
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut steps = Vec::new();
        let mut cur = to;
        while let Some((p, just)) = parent[cur].clone() {
            steps.push(DerivationStep {
                left: self.nodes[p].0.clone(),
                right: self.nodes[cur].0.clone(),
                justification: just,
            });
            cur = p;
        }
        steps.reverse();
        Some(steps)
    }

    fn classes(&self) -> UnionFind {
        let mut uf = UnionFind((0..self.nodes.len()).collect());
        for (i, adj) in self.adjacency.iter().enumerate() {
            for (j, _) in adj {
                uf.union(i, *j);
            }
        }
        uf
    }
}

/// Node picking out exactly column `c` of set-up `s`, preferring the outcome
/// display, then the earliest display.
fn witness(graph: &Graph, tables: &[SetupTable], s: usize, c: usize) -> Option<usize> {
    let outcome = &tables[s].outcome_display().label;
    let single = BTreeSet::from([c]);
    let candidates: Vec<usize> = (0..graph.nodes.len())
        .filter(|&i| graph.nodes[i].2 == s && graph.nodes[i].1 == single)
        .collect();
    candidates
        .iter()
        .copied()
        .find(|&i| &graph.nodes[i].0.display == outcome)
        .or_else(|| candidates.first().copied())
}

/// Solves for the credences of the first set-up's branches from ESP and
/// same-branch equalities plus normalization, in exact rationals.
pub fn solve_credences(setups: &[SetupTable], tol: &Tolerances) -> Result<CredenceSolution> {
    if setups.is_empty() {
        return Err(Error::param("no set-ups given"));
    }
    for (i, t) in setups.iter().enumerate() {
        if setups[..i].iter().any(|u| u.label() == t.label()) {
            return Err(Error::param(format!("set-up label `{}` repeated", t.label())));
        }
    }
    let tables = align_alphabets(setups)?;
    let checks = verify_esp(&tables, tol)?;
    let outcome = tables[0].outcome_display().label.clone();
    if let Some(c) = checks.iter().find(|c| c.display == outcome && !c.passed) {
        return Err(Error::EspPrecondition(format!(
            "reduced states of `{}` and `{}` on ({AGENT},{outcome}) differ by {:e}",
            c.left, c.right, c.distance
        )));
    }

    let mut offsets = Vec::with_capacity(tables.len());
    let mut nvars = 0;
    for t in &tables {
        offsets.push(nvars);
        nvars += t.columns();
    }
    let functional = |s: usize, cols: &BTreeSet<usize>| {
        let mut f = vec![BigRational::zero(); nvars];
        for &c in cols {
            f[offsets[s] + c] = BigRational::one();
        }
        f
    };

    let mut eqs = Vec::new();
    for (s, t) in tables.iter().enumerate() {
        eqs.push(Equation {
            coeffs: functional(s, &(0..t.columns()).collect()),
            rhs: BigRational::one(),
            text: format!("branches of {} sum to 1", t.label()),
        });
    }
    let position = |label: &str| tables.iter().position(|t| t.label() == label).expect("known set-up");
    for c in checks.iter().filter(|c| c.passed) {
        let (i, j) = (position(&c.left), position(&c.right));
        let row = tables[i].row(&c.display).expect("shared rows");
        for sym in &row.alphabet {
            let (ci, cj) = (
                tables[i].column_set(&c.display, sym),
                tables[j].column_set(&c.display, sym),
            );
            if ci.is_empty() && cj.is_empty() {
                continue;
            }
            let fi = functional(i, &ci);
            let fj = functional(j, &cj);
            eqs.push(Equation {
                coeffs: fi.iter().zip(&fj).map(|(a, b)| a - b).collect(),
                rhs: BigRational::zero(),
                text: format!(
                    "P({sym}|{}) = P({sym}|{})  [ESP on ({AGENT},{})]",
                    c.left, c.right, c.display
                ),
            });
        }
    }
    let rref = Rref::new(&eqs, nvars)?;
    let graph = Graph::new(&tables, &checks);
    let mut uf = graph.classes();

    let target = &tables[0];
    let mut branches = Vec::new();
    let mut unconstrained = Vec::new();
    for c in 0..target.columns() {
        match rref.evaluate(&functional(0, &BTreeSet::from([c]))) {
            Some(v) => branches.push((target.column_label(c), v)),
            None => {
                let name = match witness(&graph, &tables, 0, c) {
                    Some(w) => {
                        let root = uf.find(w);
                        let class: Vec<String> = (0..graph.nodes.len())
                            .filter(|&k| uf.find(k) == root)
                            .map(|k| graph.nodes[k].0.to_string())
                            .collect();
                        class.join(" = ")
                    }
                    None => format!("branch {}", target.column_label(c)),
                };
                unconstrained.push(name);
            }
        }
    }
    if !unconstrained.is_empty() {
        return Err(Error::InsufficientSetups { unconstrained });
    }
    for (label, v) in &branches {
        if v.is_negative() || v > &BigRational::one() {
            return Err(Error::Contradiction {
                first: format!("credence of branch {label} = {v}"),
                second: "credences lie in [0, 1]".into(),
            });
        }
    }

    let mut symbols = Vec::new();
    for (s, t) in tables.iter().enumerate() {
        for d in t.displays() {
            for sym in &d.alphabet {
                let cols = t.column_set(&d.label, sym);
                if let Some(v) = rref.evaluate(&functional(s, &cols)) {
                    let r = SymbolRef {
                        setup: t.label().to_string(),
                        display: d.label.clone(),
                        symbol: sym.clone(),
                    };
                    symbols.push((r, v));
                }
            }
        }
    }

    let witnesses: Vec<Option<usize>> = (0..target.columns()).map(|c| witness(&graph, &tables, 0, c)).collect();
    let mut derivation: Vec<DerivationStep> = Vec::new();
    if let Some(anchor) = witnesses[0] {
        for w in witnesses[1..].iter().flatten() {
            for step in graph.path(anchor, *w).unwrap_or_default() {
                let dup = derivation.iter().any(|d| {
                    (d.left == step.left && d.right == step.right) || (d.left == step.right && d.right == step.left)
                });
                if !dup {
                    derivation.push(step);
                }
            }
        }
    }

    let conclusions = conclude(&graph, &tables, &witnesses, &branches, &symbols, &outcome);
    Ok(CredenceSolution {
        target: target.label().to_string(),
        branches,
        symbols,
        derivation,
        conclusions,
        esp_checks: checks,
    })
}

fn conclude(
    graph: &Graph,
    tables: &[SetupTable],
    witnesses: &[Option<usize>],
    branches: &[(String, BigRational)],
    symbols: &[(SymbolRef, BigRational)],
    outcome: &str,
) -> Vec<String> {
    let target = &tables[0];
    let mut out = Vec::new();
    let named: Vec<String> = witnesses
        .iter()
        .enumerate()
        .map(|(c, w)| match w {
            Some(i) => graph.nodes[*i].0.to_string(),
            None => format!("P(branch {})", target.column_label(c)),
        })
        .collect();
    if named.len() > 1 && branches.iter().all(|(_, v)| v == &branches[0].1) {
        out.push(named.join(" = "));
    }
    out.push(format!("{} = 1  [branches of {} are exhaustive]", named.join(" + "), target.label()));
    for (name, (_, v)) in named.iter().zip(branches) {
        out.push(format!("{name} = {v}"));
    }
    for (r, v) in symbols {
        if r.setup != target.label() || r.display != outcome {
            continue;
        }
        let cols = target.column_set(outcome, &r.symbol);
        if cols.len() > 1 {
            let parts: Vec<&str> = cols.iter().map(|&c| named[c].as_str()).collect();
            out.push(format!("{r} = {} = {v}", parts.join(" + ")));
        } else if !named.contains(&r.to_string()) {
            out.push(format!("{r} = {v}"));
        }
    }
    out
}
