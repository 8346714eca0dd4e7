//! Self-locating credences from set-up tables: each table becomes a universal
//! state whose columns are decohered branches, reduced states on the agent
//! plus one display are compared across set-ups, and the resulting equalities
//! are solved exactly.

mod build;
mod general;
mod solver;
mod table;

pub use build::{build_setup, esp_distance, esp_equal, reduced_display_state, setup_layout};
pub use general::{
    general_strategy_tables, is_diagonalization, is_same_branch, rationalize, star, star_prime,
    OUTCOME_DISPLAY,
};
pub use solver::{solve_credences, CredenceSolution, DerivationStep, EspCheck, Justification, SymbolRef};
pub use table::{align_alphabets, parse_weight, Row, RowKind, SetupTable, AGENT, ENVIRONMENT};

use std::collections::BTreeSet;

use crate::error::Result;

/// Columns shared by a class, and its (display, symbol) members.
pub type SymbolClass = (BTreeSet<usize>, Vec<(String, String)>);

/// Symbols grouped by the set of columns they occur in. Only display rows
/// are considered; classes follow first appearance.
pub fn same_branch_classes(table: &SetupTable) -> Vec<SymbolClass> {
    let mut classes: Vec<SymbolClass> = Vec::new();
    for d in table.displays() {
        for sym in &d.alphabet {
            let cols = table.column_set(&d.label, sym);
            if cols.is_empty() {
                continue;
            }
            let entry = (d.label.clone(), sym.clone());
            match classes.iter_mut().find(|(c, _)| *c == cols) {
                Some((_, members)) => members.push(entry),
                None => classes.push((cols, vec![entry])),
            }
        }
    }
    classes
}

fn row(kind: RowKind, label: &str, cells: &[&str]) -> Row {
    Row::new(kind, label, cells.iter().map(|s| s.to_string()).collect())
}

/// Set-ups α and β of the two-display spin measurement.
pub fn table1() -> Result<(SetupTable, SetupTable)> {
    let setup = |label: &str, d2: &[&str]| {
        SetupTable::equal_weight(
            label,
            vec![
                row(RowKind::System, "Electron", &["↑z", "↓z"]),
                row(RowKind::Display, "D1", &["↑", "↓"]),
                row(RowKind::Display, "D2", d2),
            ],
        )
    };
    Ok((setup("α", &["♡", "♢"])?, setup("β", &["♢", "♡"])?))
}

/// Set-ups μ and ν of the quarter/three-quarter measurement.
pub fn table2() -> Result<(SetupTable, SetupTable)> {
    let setup = |label: &str, d2: &[&str], d3: &[&str], d4: &[&str]| {
        SetupTable::equal_weight(
            label,
            vec![
                row(RowKind::System, "Electron", &["↑x", "↓x", "↓x", "↓x"]),
                row(RowKind::Display, "D1", &["↑", "↓", "↓", "↓"]),
                row(RowKind::Display, "D2", d2),
                row(RowKind::Display, "D3", d3),
                row(RowKind::Display, "D4", d4),
            ],
        )
    };
    Ok((
        setup("μ", &["♢", "♡", "♢", "♢"], &["♣", "♣", "♠", "♣"], &["⋆", "⋆", "⋆", "✕"])?,
        setup("ν", &["♡", "♢", "♢", "♢"], &["♠", "♣", "♣", "♣"], &["✕", "⋆", "⋆", "⋆"])?,
    ))
}
