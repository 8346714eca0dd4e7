use num_traits::ToPrimitive;

use super::table::{RowKind, SetupTable, AGENT, ENVIRONMENT};
use crate::branching::MacrostatePartition;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, DensityMatrix, SubsystemLayout};
use crate::linalg::{self, CMatrix, CVector, ZERO};

/// Factors of the built state: the agent, every table row in order, then the
/// environment tags (unless the table gives an explicit environment row).
pub fn setup_layout(table: &SetupTable) -> Result<SubsystemLayout> {
    let mut factors: Vec<(String, usize)> = vec![(AGENT.to_string(), 2)];
    for r in table.rows() {
        factors.push((r.label.clone(), r.alphabet.len()));
    }
    if table.environment_row().is_none() {
        factors.push((ENVIRONMENT.to_string(), table.columns()));
    }
    SubsystemLayout::new(factors)
}

/// Basis digits of column `c` in [`setup_layout`] order (agent ready = 0).
fn column_digits(table: &SetupTable, c: usize) -> Vec<usize> {
    let mut digits = vec![0];
    for r in table.rows() {
        digits.push(r.symbol_index(&r.cells[c]).expect("validated alphabet"));
    }
    if table.environment_row().is_none() {
        digits.push(c);
    }
    digits
}

/// Universal state `|ψ⟩⟨ψ|`, `ψ = Σ_c √w_c |R_A⟩|row symbols of c⟩|e_c⟩`,
/// its layout, and one macrostate per column (plus `rest` for the
/// unoccupied basis states).
pub fn build_setup(
    table: &SetupTable,
    tol: &Tolerances,
) -> Result<(DensityMatrix, SubsystemLayout, MacrostatePartition)> {
    let layout = setup_layout(table)?;
    let dim = layout.dim();
    tol.check_dim(dim)?;
    let mut psi = CVector::zeros(dim);
    let mut owner = vec![usize::MAX; dim];
    for (c, w) in table.weights().iter().enumerate() {
        let i = layout.index(&column_digits(table, c));
        let amp = w.to_f64().expect("finite weight").sqrt();
        psi[i] = linalg::r(amp);
        owner[i] = c;
    }
    let rho = DensityMatrix::pure(&crate::hilbert::Ket::normalized(psi.iter().copied().collect())?);

    // the agent factor is the most significant digit; project it out
    let agent_stride = dim / 2;
    let mut labels: Vec<String> = (0..table.columns()).map(|c| table.column_label(c)).collect();
    let rest = labels.len();
    let assign: Vec<usize> = (0..dim)
        .map(|i| match owner[i % agent_stride] {
            usize::MAX => rest,
            c => c,
        })
        .collect();
    if assign.contains(&rest) {
        labels.push("rest".to_string());
    }
    let part = MacrostatePartition::from_assignment(labels, assign)?;
    Ok((rho, layout, part))
}

/// Reduced state on `(A, display)` computed from the table alone:
/// `|R_A⟩⟨R_A| ⊗ Σ_c w_c |s_c⟩⟨s_c|`. Exact because column environment tags
/// are orthonormal, and usable when the full state exceeds the size cap.
pub fn reduced_display_state(table: &SetupTable, display: &str) -> Result<DensityMatrix> {
    let row = table
        .row(display)
        .filter(|r| r.kind == RowKind::Display)
        .ok_or_else(|| Error::layout(format!("set-up `{}` has no display `{display}`", table.label())))?;
    if table.environment_row().is_some() {
        // columns agreeing off this display would leave coherences behind
        for c in 0..table.columns() {
            for c2 in c + 1..table.columns() {
                let agree = table
                    .rows()
                    .iter()
                    .filter(|r| r.label != display)
                    .all(|r| r.cells[c] == r.cells[c2]);
                if agree {
                    return Err(Error::layout(format!(
                        "columns {} and {} differ only on `{display}`",
                        table.column_label(c),
                        table.column_label(c2)
                    )));
                }
            }
        }
    }
    let d = row.alphabet.len();
    let mut m = CMatrix::from_element(2 * d, 2 * d, ZERO);
    for (c, w) in table.weights().iter().enumerate() {
        let s = row.symbol_index(&row.cells[c]).expect("validated alphabet");
        m[(s, s)] += linalg::r(w.to_f64().expect("finite weight"));
    }
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Reduced states of two set-ups on `keep` agree entry-wise within `tol`.
///
/// The kept factors must have the same dimensions in both layouts.
pub fn esp_equal(
    a: (&DensityMatrix, &SubsystemLayout),
    b: (&DensityMatrix, &SubsystemLayout),
    keep: &[&str],
    tol: f64,
) -> Result<bool> {
    Ok(esp_distance(a, b, keep)? <= tol)
}

/// Largest entry-wise difference between the two reduced states on `keep`.
pub fn esp_distance(
    a: (&DensityMatrix, &SubsystemLayout),
    b: (&DensityMatrix, &SubsystemLayout),
    keep: &[&str],
) -> Result<f64> {
    for k in keep {
        let (da, db) = (a.1.factor_dim(k)?, b.1.factor_dim(k)?);
        if da != db {
            return Err(Error::layout(format!(
                "factor `{k}` has dimension {da} in one layout and {db} in the other"
            )));
        }
    }
    let ra = partial_trace(a.0, a.1, keep)?;
    let rb = partial_trace(b.0, b.1, keep)?;
    Ok(ra.max_abs_diff(&rb))
}
