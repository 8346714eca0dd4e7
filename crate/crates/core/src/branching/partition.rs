use std::collections::BTreeMap;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hilbert::{embed_operator, SubsystemLayout};
use crate::linalg::{self, CMatrix};

/// Complete set of mutually orthogonal labeled projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MacrostatePartition {
    labels: Vec<String>,
    dim: usize,
    storage: Storage,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<CMatrix>),
    /// Every projector is diagonal in the computational basis; entry `i`
    /// is the macrostate index of basis state `i`.
    Diagonal(Vec<usize>),
}

impl MacrostatePartition {
    /// Validates idempotence, Hermiticity, mutual orthogonality and
    /// completeness within `tol.partition`.
    pub fn new(projectors: Vec<(String, CMatrix)>, tol: &Tolerances) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::Partition("partition has no projectors".into()))?;
        let dim = first.1.nrows();
        let eps = tol.partition;
        let labels: Vec<String> = projectors.iter().map(|(l, _)| l.clone()).collect();
        if let Some(assignment) = diagonal_assignment(&projectors, dim, eps)? {
            return Ok(MacrostatePartition {
                labels,
                dim,
                storage: Storage::Diagonal(assignment),
            });
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, (label, p)) in projectors.iter().enumerate() {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::Partition(format!("projector `{label}` has the wrong shape")));
            }
            if projectors[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::Partition(format!("duplicate macrostate label `{label}`")));
            }
            if linalg::hermiticity_residual(p) > eps {
                return Err(Error::Partition(format!("projector `{label}` is not Hermitian")));
            }
            if linalg::max_abs_diff(&(p * p), p) > eps {
                return Err(Error::Partition(format!("projector `{label}` is not idempotent")));
            }
            for (other, q) in &projectors[..i] {
                let cross = linalg::max_abs_diff(&(p * q), &CMatrix::zeros(dim, dim));
                if cross > eps {
                    return Err(Error::Partition(format!(
                        "projectors `{other}` and `{label}` overlap ({cross:e})"
                    )));
                }
            }
            sum += p;
        }
        let gap = linalg::max_abs_diff(&sum, &CMatrix::identity(dim, dim));
        if gap > eps {
            return Err(Error::Partition(format!(
                "projectors do not sum to the identity (residual {gap:e})"
            )));
        }
        Ok(MacrostatePartition {
            labels,
            dim,
            storage: Storage::Dense(projectors.into_iter().map(|(_, p)| p).collect()),
        })
    }

    /// Diagonal partition without materializing projectors: `assign[i]` is
    /// the index into `labels` of basis state `i`.
    pub fn from_assignment(labels: Vec<String>, assign: Vec<usize>) -> Result<Self> {
        if labels.is_empty() || assign.is_empty() {
            return Err(Error::Partition("partition has no projectors".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Partition(format!("duplicate macrostate label `{l}`")));
            }
        }
        let mut used = vec![false; labels.len()];
        for &a in &assign {
            let slot = used
                .get_mut(a)
                .ok_or_else(|| Error::Partition(format!("macrostate index {a} out of range")))?;
            *slot = true;
        }
        if let Some(k) = used.iter().position(|u| !u) {
            return Err(Error::Partition(format!("macrostate `{}` is empty", labels[k])));
        }
        Ok(MacrostatePartition {
            labels,
            dim: assign.len(),
            storage: Storage::Diagonal(assign),
        })
    }

    /// Partition by computational-basis index: `assign[i]` names the
    /// macrostate of basis state `i`. Labels keep first-appearance order.
    pub fn from_basis_labels<S: AsRef<str>>(assign: &[S]) -> Result<Self> {
        let mut order: Vec<String> = Vec::new();
        let mut index = Vec::with_capacity(assign.len());
        for a in assign {
            let pos = match order.iter().position(|l| l == a.as_ref()) {
                Some(p) => p,
                None => {
                    order.push(a.as_ref().to_string());
                    order.len() - 1
                }
            };
            index.push(pos);
        }
        Self::from_assignment(order, index)
    }

    /// Lifts a partition of one factor to the full space (identity elsewhere).
    pub fn on_factor(
        layout: &SubsystemLayout,
        factor: &str,
        local: &MacrostatePartition,
        tol: &Tolerances,
    ) -> Result<Self> {
        let pos = layout.position(factor)?;
        if layout.factors()[pos].1 != local.dim {
            return Err(Error::Partition(format!(
                "local partition has dimension {}, factor `{factor}` has {}",
                local.dim,
                layout.factors()[pos].1
            )));
        }
        if let Storage::Diagonal(a) = &local.storage {
            let assign = (0..layout.dim()).map(|i| a[layout.digits(i)[pos]]).collect();
            return Self::from_assignment(local.labels.clone(), assign);
        }
        let projectors = local
            .projectors()
            .into_iter()
            .map(|(l, p)| Ok((l, embed_operator(layout, &[factor], &p)?)))
            .collect::<Result<Vec<_>>>()?;
        MacrostatePartition::new(projectors, tol)
    }

    pub(crate) fn basis_assignment(&self) -> Option<&[usize]> {
        match &self.storage {
            Storage::Diagonal(a) => Some(a),
            Storage::Dense(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(|l| l.as_str())
    }

    /// Dense projector of macrostate `k`.
    fn dense(&self, k: usize) -> CMatrix {
        match &self.storage {
            Storage::Dense(ps) => ps[k].clone(),
            Storage::Diagonal(a) => CMatrix::from_fn(self.dim, self.dim, |i, j| {
                if i == j && a[i] == k {
                    linalg::ONE
                } else {
                    linalg::ZERO
                }
            }),
        }
    }

    /// All projectors as dense matrices, in partition order.
    pub fn projectors(&self) -> Vec<(String, CMatrix)> {
        (0..self.len()).map(|k| (self.labels[k].clone(), self.dense(k))).collect()
    }

    pub fn projector(&self, label: &str) -> Option<CMatrix> {
        self.labels.iter().position(|l| l == label).map(|k| self.dense(k))
    }

    pub(crate) fn dense_projectors(&self) -> Option<&[CMatrix]> {
        match &self.storage {
            Storage::Dense(ps) => Some(ps),
            Storage::Diagonal(_) => None,
        }
    }

    /// Sums projectors sharing a target label. Output labels follow the first
    /// appearance of each target in the partition order.
    pub fn merge(&self, coarsening: &BTreeMap<String, String>, tol: &Tolerances) -> Result<Self> {
        let mut targets: Vec<String> = Vec::new();
        let mut map = Vec::with_capacity(self.len());
        for label in &self.labels {
            let target = coarsening.get(label).ok_or_else(|| {
                Error::Partition(format!("coarsening has no target for `{label}`"))
            })?;
            let pos = match targets.iter().position(|t| t == target) {
                Some(p) => p,
                None => {
                    targets.push(target.clone());
                    targets.len() - 1
                }
            };
            map.push(pos);
        }
        match &self.storage {
            Storage::Diagonal(a) => {
                Self::from_assignment(targets, a.iter().map(|&k| map[k]).collect())
            }
            Storage::Dense(ps) => {
                let mut merged = vec![CMatrix::zeros(self.dim, self.dim); targets.len()];
                for (k, p) in ps.iter().enumerate() {
                    merged[map[k]] += p;
                }
                MacrostatePartition::new(targets.into_iter().zip(merged).collect(), tol)
            }
        }
    }
}

/// For partitions made of diagonal 0/1 projectors, validates them in O(d·m)
/// and returns the macrostate index of each basis state. Returns `None` when
/// some projector is not of that form.
fn diagonal_assignment(
    projectors: &[(String, CMatrix)],
    dim: usize,
    eps: f64,
) -> Result<Option<Vec<usize>>> {
    let mut assignment = vec![usize::MAX; dim];
    for (k, (label, p)) in projectors.iter().enumerate() {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(Error::Partition(format!("projector `{label}` has the wrong shape")));
        }
        if projectors[..k].iter().any(|(l, _)| l == label) {
            return Err(Error::Partition(format!("duplicate macrostate label `{label}`")));
        }
        for j in 0..dim {
            for i in 0..dim {
                let z = p[(i, j)];
                if i != j {
                    if z.norm() > 0.0 {
                        return Ok(None);
                    }
                } else if (z - linalg::ONE).norm() <= eps {
                    if assignment[i] != usize::MAX {
                        return Err(Error::Partition(format!(
                            "projectors `{}` and `{label}` overlap",
                            projectors[assignment[i]].0
                        )));
                    }
                    assignment[i] = k;
                } else if z.norm() > eps {
                    return Ok(None);
                }
            }
        }
    }
    if let Some(i) = assignment.iter().position(|&a| a == usize::MAX) {
        return Err(Error::Partition(format!(
            "projectors do not sum to the identity (basis state {i} uncovered)"
        )));
    }
    Ok(Some(assignment))
}
