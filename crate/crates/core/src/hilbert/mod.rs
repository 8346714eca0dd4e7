//! Finite-dimensional states: kets, density matrices, tensor composition,
//! partial trace, unitary action, spectra and entropy.
//!
//! Every operation is a pure function of immutable values.

mod interchange;
mod layout;
mod state;

pub use interchange::MatrixDocument;
pub use layout::SubsystemLayout;
pub use state::{DensityMatrix, Ket, Unitary, ValidationReport};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};

/// `a ⊗ b`.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or(Error::Capacity {
            requested: usize::MAX,
            limit: tol.max_dim,
        })?;
    tol.check_dim(dim)?;
    Ok(DensityMatrix::from_matrix_unchecked(linalg::kron(
        a.matrix(),
        b.matrix(),
    )))
}

/// Tensor product of several states in order.
pub fn tensor_all(parts: &[&DensityMatrix], tol: &Tolerances) -> Result<DensityMatrix> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::layout("empty tensor product"))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, next| tensor(&acc, next, tol))
}

fn check_layout(dim: usize, layout: &SubsystemLayout) -> Result<()> {
    if layout.dim() != dim {
        return Err(Error::layout(format!(
            "layout dimension {} does not match state dimension {dim}",
            layout.dim()
        )));
    }
    Ok(())
}

/// Reduced state on the `keep` factors, returned in layout order.
///
/// Keeping every factor returns `rho` unchanged.
pub fn partial_trace(
    rho: &DensityMatrix,
    layout: &SubsystemLayout,
    keep: &[&str],
) -> Result<DensityMatrix> {
    check_layout(rho.dim(), layout)?;
    if keep.is_empty() {
        return Err(Error::layout("keep set must be non-empty"));
    }
    let kept = layout.positions(keep)?;
    if kept.len() == layout.len() {
        return Ok(rho.clone());
    }
    let traced = layout.complement(&kept);
    let kept_off = layout.offsets(&kept);
    let traced_off = layout.offsets(&traced);
    let m = rho.matrix();
    let n = kept_off.len();
    let mut out = CMatrix::zeros(n, n);
    for (i, &oi) in kept_off.iter().enumerate() {
        for (j, &oj) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += m[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Reduced state of `|ψ⟩⟨ψ|` on the `keep` factors without forming the full
/// density matrix. Cost is `dim · d_keep`.
pub fn reduced_from_ket(ket: &Ket, layout: &SubsystemLayout, keep: &[&str]) -> Result<DensityMatrix> {
    check_layout(ket.dim(), layout)?;
    if keep.is_empty() {
        return Err(Error::layout("keep set must be non-empty"));
    }
    let kept = layout.positions(keep)?;
    let kept_off = layout.offsets(&kept);
    let traced_off = layout.offsets(&layout.complement(&kept));
    let a = ket.amplitudes();
    let n = kept_off.len();
    let mut out = CMatrix::zeros(n, n);
    for &t in &traced_off {
        let col: Vec<_> = kept_off.iter().map(|&o| a[o + t]).collect();
        if col.iter().all(|z| *z == ZERO) {
            continue;
        }
        for i in 0..n {
            if col[i] == ZERO {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += col[i] * col[j].conj();
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Applies a unitary on the `support` factors (in the order given) to a ket.
pub fn apply_local_unitary_ket(
    ket: &Ket,
    layout: &SubsystemLayout,
    support: &[&str],
    u: &Unitary,
) -> Result<Ket> {
    check_layout(ket.dim(), layout)?;
    let positions = support_positions(layout, support)?;
    let sup_off = layout.offsets(&positions);
    if sup_off.len() != u.dim() {
        return Err(Error::layout(format!(
            "unitary of dim {} does not match support dimension {}",
            u.dim(),
            sup_off.len()
        )));
    }
    let mut sorted = positions.clone();
    sorted.sort_unstable();
    let rest_off = layout.offsets(&layout.complement(&sorted));
    let a = ket.amplitudes();
    let mut out = a.clone();
    let w = u.matrix();
    for &o in &rest_off {
        let v: Vec<_> = sup_off.iter().map(|&s| a[s + o]).collect();
        if v.iter().all(|z| *z == ZERO) {
            continue;
        }
        for (i, &si) in sup_off.iter().enumerate() {
            out[si + o] = (0..v.len()).map(|j| w[(i, j)] * v[j]).sum();
        }
    }
    Ok(Ket::from_vector_unchecked(out))
}

/// `U ρ U†`.
pub fn apply_unitary(rho: &DensityMatrix, u: &Unitary) -> Result<DensityMatrix> {
    if rho.dim() != u.dim() {
        return Err(Error::layout(format!(
            "unitary of dim {} applied to state of dim {}",
            u.dim(),
            rho.dim()
        )));
    }
    let m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Applies a unitary acting on the `support` factors (indexed in the order
/// given) and trivially elsewhere, without forming the full operator.
pub fn apply_local_unitary(
    rho: &DensityMatrix,
    layout: &SubsystemLayout,
    support: &[&str],
    u: &Unitary,
) -> Result<DensityMatrix> {
    check_layout(rho.dim(), layout)?;
    let positions = support_positions(layout, support)?;
    let sup_off = layout.offsets(&positions);
    if sup_off.len() != u.dim() {
        return Err(Error::layout(format!(
            "unitary of dim {} does not match support dimension {}",
            u.dim(),
            sup_off.len()
        )));
    }
    let sorted = {
        let mut p = positions.clone();
        p.sort_unstable();
        p
    };
    let rest_off = layout.offsets(&layout.complement(&sorted));
    let w = u.matrix();
    let m = rho.matrix();
    let d = rho.dim();
    let ds = sup_off.len();

    // left: (W ⊗ I) ρ
    let mut left = CMatrix::zeros(d, d);
    for &o in &rest_off {
        for s in 0..ds {
            let row = sup_off[s] + o;
            for s2 in 0..ds {
                let coeff = w[(s, s2)];
                if coeff == ZERO {
                    continue;
                }
                let src = sup_off[s2] + o;
                for col in 0..d {
                    left[(row, col)] += coeff * m[(src, col)];
                }
            }
        }
    }
    // right: left (W† ⊗ I)
    let mut out = CMatrix::zeros(d, d);
    for &o in &rest_off {
        for s in 0..ds {
            let col = sup_off[s] + o;
            for s2 in 0..ds {
                let coeff = w[(s, s2)].conj();
                if coeff == ZERO {
                    continue;
                }
                let src = sup_off[s2] + o;
                for row in 0..d {
                    out[(row, col)] += left[(row, src)] * coeff;
                }
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

fn support_positions(layout: &SubsystemLayout, support: &[&str]) -> Result<Vec<usize>> {
    if support.is_empty() {
        return Err(Error::layout("support must be non-empty"));
    }
    let positions = support
        .iter()
        .map(|l| layout.position(l))
        .collect::<Result<Vec<_>>>()?;
    for (i, p) in positions.iter().enumerate() {
        if positions[..i].contains(p) {
            return Err(Error::layout(format!("factor `{}` repeated in support", support[i])));
        }
    }
    Ok(positions)
}

/// Full matrix of `op` acting on `support` (in the order given) tensored with
/// identities on every other factor.
pub fn embed_operator(layout: &SubsystemLayout, support: &[&str], op: &CMatrix) -> Result<CMatrix> {
    let positions = support_positions(layout, support)?;
    let sup_off = layout.offsets(&positions);
    if sup_off.len() != op.nrows() || op.nrows() != op.ncols() {
        return Err(Error::layout("operator does not match support dimension"));
    }
    let mut sorted = positions.clone();
    sorted.sort_unstable();
    let rest_off = layout.offsets(&layout.complement(&sorted));
    let d = layout.dim();
    let mut out = CMatrix::zeros(d, d);
    for &o in &rest_off {
        for (i, &si) in sup_off.iter().enumerate() {
            for (j, &sj) in sup_off.iter().enumerate() {
                out[(si + o, sj + o)] = op[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Eigenvalues sorted descending; values within `tol.psd` outside `[0, 1]`
/// are clamped into it.
pub fn spectrum(rho: &DensityMatrix, tol: &Tolerances) -> Vec<f64> {
    let (values, _) = linalg::eigh(rho.matrix(), tol.spec);
    values
        .into_iter()
        .map(|l| clamp_unit(l, tol.psd))
        .collect()
}

/// Eigendecomposition `ρ = W diag(λ) W†` with `λ` descending and the
/// deterministic degenerate-frame rule of [`crate::linalg::eigh`].
pub fn eigendecomposition(rho: &DensityMatrix, tol: &Tolerances) -> (Vec<f64>, CMatrix) {
    let (values, vectors) = linalg::eigh(rho.matrix(), tol.spec);
    let values = values.into_iter().map(|l| clamp_unit(l, tol.psd)).collect();
    (values, vectors)
}

fn clamp_unit(l: f64, slack: f64) -> f64 {
    if l < 0.0 && l >= -slack {
        0.0
    } else if l > 1.0 && l <= 1.0 + slack {
        1.0
    } else {
        l
    }
}

/// Von Neumann entropy `-Σ λ log_b λ`; eigenvalues at or below `tol.zero`
/// contribute nothing. `log_base` must exceed 1.
pub fn vn_entropy(rho: &DensityMatrix, log_base: f64, tol: &Tolerances) -> Result<f64> {
    entropy_of_spectrum(&spectrum(rho, tol), log_base, tol.zero)
}

/// Entropy of an eigenvalue list; shared with sector bookkeeping.
pub fn entropy_of_spectrum(values: &[f64], log_base: f64, zero: f64) -> Result<f64> {
    if !(log_base > 1.0 && log_base.is_finite()) {
        return Err(Error::param(format!("log base must exceed 1, got {log_base}")));
    }
    let ln_b = log_base.ln();
    let s: f64 = values
        .iter()
        .filter(|&&l| l > zero)
        .map(|&l| -l * l.ln() / ln_b)
        .sum();
    // eigenvalues a hair above 1 would otherwise give -0 or -1e-17
    Ok(s.max(0.0))
}

/// `tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Checks the density-matrix invariants of an arbitrary square matrix.
pub fn validate(m: &CMatrix, tol: &Tolerances) -> ValidationReport {
    let herm = linalg::hermiticity_residual(m);
    let tr = linalg::trace(m);
    let trace_residual = (tr - linalg::ONE).norm();
    let (values, _) = linalg::eigh(m, tol.spec);
    let min_eigenvalue = values.last().copied().unwrap_or(0.0);
    ValidationReport {
        hermiticity_residual: herm,
        trace_residual,
        min_eigenvalue,
        hermitian: herm <= tol.herm,
        unit_trace: trace_residual <= tol.trace,
        positive: min_eigenvalue >= -tol.psd,
    }
}

/// L∞ distance between two descending spectra, padding the shorter with zeros.
pub fn spectral_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}
