use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: CVector,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>, tol: &Tolerances) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("ket must have positive dimension".into()));
        }
        let v = DVector::from_vec(amplitudes);
        let norm_sqr = v.norm_squared();
        if (norm_sqr - 1.0).abs() > tol.norm {
            return Err(Error::InvalidState(format!(
                "ket squared norm {norm_sqr} differs from 1"
            )));
        }
        Ok(Ket { amplitudes: v })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if v.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Ket {
            amplitudes: v / linalg::r(norm),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| linalg::r(x)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        Ket {
            amplitudes: linalg::basis(dim, index),
        }
    }

    pub(crate) fn from_vector_unchecked(amplitudes: CVector) -> Self {
        Ket { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        Ket {
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(linalg::outer(&self.amplitudes))
    }
}

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates `entries` against every density-matrix invariant.
    pub fn new(entries: CMatrix, tol: &Tolerances) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square with positive dimension, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        tol.check_dim(entries.nrows())?;
        let report = super::validate(&entries, tol);
        if !report.passed() {
            return Err(Error::InvalidState(report.summary()));
        }
        Ok(DensityMatrix { entries })
    }

    /// Wraps a matrix the caller knows to be a valid state (built from valid
    /// states by trace- and positivity-preserving operations).
    pub(crate) fn from_matrix_unchecked(entries: CMatrix) -> Self {
        DensityMatrix { entries }
    }

    pub fn pure(ket: &Ket) -> Self {
        ket.projector()
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mut m = CMatrix::identity(dim, dim);
        m.scale_mut(1.0 / dim as f64);
        DensityMatrix { entries: m }
    }

    /// Diagonal state; `weights` must be a probability vector.
    pub fn diagonal(weights: &[f64], tol: &Tolerances) -> Result<Self> {
        Self::new(linalg::diag(weights), tol)
    }

    /// Convex combination `Σ p_i ρ_i`.
    pub fn mixture(parts: &[(f64, &DensityMatrix)], tol: &Tolerances) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut m = CMatrix::zeros(dim, dim);
        let mut total = 0.0;
        for (p, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::layout("mixture components have different dimensions"));
            }
            if *p < 0.0 {
                return Err(Error::param("mixture weights must be non-negative"));
            }
            total += p;
            m += rho.matrix().map(|z| z * *p);
        }
        if (total - 1.0).abs() > tol.trace {
            return Err(Error::param(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(DensityMatrix { entries: m })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.entries)
    }

    /// Element-wise comparison.
    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.dim() == other.dim() && linalg::max_abs_diff(&self.entries, &other.entries) <= tol
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        linalg::max_abs_diff(&self.entries, &other.entries)
    }
}

/// Unitary operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    entries: CMatrix,
}

impl Unitary {
    pub fn new(entries: CMatrix, tol: &Tolerances) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidState("unitary must be square".into()));
        }
        let residual = linalg::unitarity_residual(&entries);
        if residual > tol.unitary {
            return Err(Error::InvalidState(format!(
                "U†U deviates from identity by {residual:e}"
            )));
        }
        Ok(Unitary { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Unitary {
            entries: CMatrix::identity(dim, dim),
        }
    }

    /// Permutation unitary sending `|i⟩` to `|perm[i]⟩`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::param("not a permutation"));
            }
            seen[p] = true;
        }
        let mut m = CMatrix::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            m[(p, i)] = linalg::ONE;
        }
        Ok(Unitary { entries: m })
    }

    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        Unitary {
            entries: linalg::random_unitary(rng, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary {
            entries: self.entries.adjoint(),
        }
    }

    pub fn compose(&self, after: &Unitary) -> Result<Unitary> {
        if self.dim() != after.dim() {
            return Err(Error::layout("unitary dimensions differ"));
        }
        Ok(Unitary {
            entries: &after.entries * &self.entries,
        })
    }

    pub fn apply_ket(&self, ket: &Ket) -> Result<Ket> {
        if self.dim() != ket.dim() {
            return Err(Error::layout(format!(
                "unitary of dim {} applied to ket of dim {}",
                self.dim(),
                ket.dim()
            )));
        }
        Ok(Ket::from_vector_unchecked(&self.entries * ket.amplitudes()))
    }

    pub fn residual(&self) -> f64 {
        linalg::unitarity_residual(&self.entries)
    }
}

/// Invariant check outcome for a candidate density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hermiticity_residual: f64,
    pub trace_residual: f64,
    pub min_eigenvalue: f64,
    pub hermitian: bool,
    pub unit_trace: bool,
    pub positive: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.hermitian && self.unit_trace && self.positive
    }

    pub fn summary(&self) -> String {
        let flag = |ok: bool| if ok { "pass" } else { "FAIL" };
        format!(
            "hermitian {} (residual {:.3e}), trace {} (residual {:.3e}), psd {} (min eigenvalue {:.3e})",
            flag(self.hermitian),
            self.hermiticity_residual,
            flag(self.unit_trace),
            self.trace_residual,
            flag(self.positive),
            self.min_eigenvalue
        )
    }
}
