//! Branch decomposition of a universal density matrix relative to a
//! macrostate partition.
//!
//! A branch is the projector sandwich `P ρ P` of one macrostate, its weight is
//! `tr(P ρ P)`, and everything off the block diagonal is lumped into the
//! cross-term remainder, reported only through its norm.

mod partition;
pub mod worlds;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use partition::MacrostatePartition;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hilbert::{purity, DensityMatrix};
use crate::linalg::{self, CMatrix, ZERO};

/// One macrostate component of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: String,
    pub weight: f64,
    /// Normalized `P ρ P / weight`.
    pub state: DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchDecomposition {
    pub branches: Vec<Branch>,
    /// Frobenius norm of `ρ - Σ P ρ P`.
    pub ct_norm: f64,
    /// Total weight of branches dropped below `tol.branch`.
    pub omitted_weight: f64,
}

impl BranchDecomposition {
    pub fn weight(&self, label: &str) -> Option<f64> {
        self.branches
            .iter()
            .find(|b| b.label == label)
            .map(|b| b.weight)
    }

    pub fn weights(&self) -> BTreeMap<String, f64> {
        self.branches
            .iter()
            .map(|b| (b.label.clone(), b.weight))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }
}

/// Norm used for the cross-term remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CtNorm {
    #[default]
    Frobenius,
    /// Sum of absolute eigenvalues of the (Hermitian) remainder.
    Trace,
}

fn check_dims(rho: &DensityMatrix, part: &MacrostatePartition) -> Result<()> {
    if rho.dim() != part.dim() {
        return Err(Error::Partition(format!(
            "partition acts on dimension {}, state has dimension {}",
            part.dim(),
            rho.dim()
        )));
    }
    Ok(())
}

/// `P_m ρ P_m` for every macrostate, in partition order.
fn blocks(rho: &DensityMatrix, part: &MacrostatePartition) -> Vec<CMatrix> {
    let m = rho.matrix();
    let d = rho.dim();
    match part.basis_assignment() {
        Some(assign) => (0..part.len())
            .map(|k| {
                CMatrix::from_fn(d, d, |i, j| {
                    if assign[i] == k && assign[j] == k {
                        m[(i, j)]
                    } else {
                        ZERO
                    }
                })
            })
            .collect(),
        None => part
            .dense_projectors()
            .expect("non-diagonal partitions are stored densely")
            .iter()
            .map(|p| p * m * p)
            .collect(),
    }
}

/// `Σ_m P_m ρ P_m`.
pub(crate) fn pinch(rho: &DensityMatrix, part: &MacrostatePartition) -> CMatrix {
    let d = rho.dim();
    match part.basis_assignment() {
        Some(assign) => {
            let m = rho.matrix();
            CMatrix::from_fn(d, d, |i, j| if assign[i] == assign[j] { m[(i, j)] } else { ZERO })
        }
        None => blocks(rho, part)
            .into_iter()
            .fold(CMatrix::zeros(d, d), |acc, b| acc + b),
    }
}

/// Splits `rho` into weighted, normalized branches plus the cross-term norm.
pub fn decompose(
    rho: &DensityMatrix,
    part: &MacrostatePartition,
    tol: &Tolerances,
) -> Result<BranchDecomposition> {
    check_dims(rho, part)?;
    let mut branches = Vec::new();
    let mut omitted = 0.0;
    for (label, block) in part.labels().zip(blocks(rho, part)) {
        let weight = linalg::trace(&block).re;
        if weight > tol.branch {
            let state = DensityMatrix::from_matrix_unchecked(block.map(|z| z / weight));
            branches.push(Branch {
                label: label.to_string(),
                weight,
                state,
            });
        } else {
            omitted += weight;
        }
    }
    Ok(BranchDecomposition {
        branches,
        ct_norm: ct_norm(rho, part)?,
        omitted_weight: omitted,
    })
}

/// Frobenius norm of the off-block part of `rho`.
pub fn ct_norm(rho: &DensityMatrix, part: &MacrostatePartition) -> Result<f64> {
    ct_norm_with(rho, part, CtNorm::Frobenius)
}

pub fn ct_norm_with(rho: &DensityMatrix, part: &MacrostatePartition, norm: CtNorm) -> Result<f64> {
    check_dims(rho, part)?;
    let off = rho.matrix() - pinch(rho, part);
    Ok(match norm {
        CtNorm::Frobenius => linalg::frobenius(&off),
        CtNorm::Trace => {
            let (values, _) = linalg::eigh(&off, 0.0);
            values.iter().map(|l| l.abs()).sum()
        }
    })
}

/// Coarsens a partition: projectors mapped to the same target are summed.
pub fn merge_macrostates(
    part: &MacrostatePartition,
    coarsening: &BTreeMap<String, String>,
    tol: &Tolerances,
) -> Result<MacrostatePartition> {
    part.merge(coarsening, tol)
}

/// One row of a branch report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub label: String,
    pub weight: f64,
    /// Nearest small-denominator fraction, when within 1e-9 of `weight`.
    pub rational: Option<String>,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub rows: Vec<BranchRow>,
    pub ct_norm: f64,
}

impl BranchReport {
    pub fn new(dec: &BranchDecomposition) -> Self {
        BranchReport {
            rows: dec
                .branches
                .iter()
                .map(|b| BranchRow {
                    label: b.label.clone(),
                    weight: b.weight,
                    rational: nearest_fraction(b.weight, 64, 1e-9),
                    purity: purity(&b.state),
                })
                .collect(),
            ct_norm: dec.ct_norm,
        }
    }
}

impl std::fmt::Display for BranchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<12} {:>14} {:>10} {:>10}", "branch", "weight", "exact", "purity")?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<12} {:>14.10} {:>10} {:>10.6}",
                row.label,
                row.weight,
                row.rational.as_deref().unwrap_or("-"),
                row.purity
            )?;
        }
        write!(f, "ct_norm = {:.6e}", self.ct_norm)
    }
}

/// `p/q` with the smallest `q <= max_den` such that `|x - p/q| <= tol`.
pub fn nearest_fraction(x: f64, max_den: u32, tol: f64) -> Option<String> {
    (1..=max_den).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() <= tol).then(|| {
            if q == 1 {
                format!("{}", p as i64)
            } else {
                format!("{}/{}", p as i64, q)
            }
        })
    })
}

#[cfg(test)]
mod tests;
