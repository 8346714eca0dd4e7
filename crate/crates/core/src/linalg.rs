//! Dense complex matrix helpers used across the engines.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for k in 0..b.len() {
            out[i * b.len() + k] = a[i] * b[k];
        }
    }
    out
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Largest entry of `|M - M†|`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry of `|U†U - I|`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    max_abs_diff(&g, &CMatrix::identity(u.nrows(), u.ncols()))
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
///
/// Eigenvalues closer than `cluster_tol` form one degenerate cluster. Inside a
/// cluster the eigenvectors are replaced by a canonical basis: the projections
/// of the standard basis vectors onto the eigenspace, taken in index order and
/// Gram–Schmidt orthonormalized. Every eigenvector is phase-fixed so that its
/// first non-negligible component is real and positive. The returned frame
/// therefore depends only on the matrix, not on solver internals.
pub fn eigh(m: &CMatrix, cluster_tol: f64) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let h = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[start] - values[end]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_cluster(&mut vectors, start, end);
        }
        start = end;
    }
    for k in 0..n {
        fix_phase(&mut vectors, k);
    }
    (values, vectors)
}

fn canonicalize_cluster(vectors: &mut CMatrix, start: usize, end: usize) {
    let n = vectors.nrows();
    let k = end - start;
    let block = vectors.columns(start, k).into_owned();
    let projector = &block * block.adjoint();
    let mut chosen: Vec<CVector> = Vec::with_capacity(k);
    for j in 0..n {
        if chosen.len() == k {
            break;
        }
        let mut v: CVector = projector.column(j).into_owned();
        for u in &chosen {
            let overlap = u.dotc(&v);
            v -= u * overlap;
        }
        let norm = v.norm();
        // a projection this small carries no independent direction
        if norm > 1e-6 {
            chosen.push(v / r(norm));
        }
    }
    if chosen.len() == k {
        for (i, v) in chosen.into_iter().enumerate() {
            vectors.set_column(start + i, &v);
        }
    }
}

fn fix_phase(vectors: &mut CMatrix, col: usize) {
    let n = vectors.nrows();
    let pivot = (0..n).find(|&i| vectors[(i, col)].norm() > 1e-8);
    if let Some(i) = pivot {
        let z = vectors[(i, col)];
        let phase = z.conj() / r(z.norm());
        for row in 0..n {
            vectors[(row, col)] *= phase;
        }
    }
}

/// Unitary whose first column is the unit vector `v`; remaining columns come
/// from Gram–Schmidt over the standard basis in index order.
pub fn complete_unitary(v: &CVector) -> CMatrix {
    let n = v.len();
    let mut cols: Vec<CVector> = Vec::with_capacity(n);
    cols.push(v.clone() / r(v.norm()));
    for j in 0..n {
        if cols.len() == n {
            break;
        }
        let mut e = CVector::zeros(n);
        e[j] = ONE;
        for u in &cols {
            let overlap = u.dotc(&e);
            e -= u * overlap;
        }
        let norm = e.norm();
        if norm > 1e-8 {
            cols.push(e / r(norm));
        }
    }
    CMatrix::from_columns(&cols)
}

/// Unitary `W` with `W a = b` for unit vectors `a`, `b`. Returns the identity
/// when `a == b`.
pub fn transfer_unitary(a: &CVector, b: &CVector) -> CMatrix {
    let qa = complete_unitary(a);
    let qb = complete_unitary(b);
    qb * qa.adjoint()
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = random_ginibre(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let rm = qr.r();
    let mut u = q;
    for j in 0..n {
        let d = rm[(j, j)];
        let phase = if d.norm() > 0.0 { d / r(d.norm()) } else { ONE };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

pub fn random_ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let g = random_ginibre(rng, n, 1);
    let v: CVector = g.column(0).into_owned();
    let norm = v.norm();
    v / r(norm)
}

/// Random full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    random_density_rank(rng, n, n)
}

pub fn random_density_rank<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let g = random_ginibre(rng, n, rank.max(1));
    let m = &g * g.adjoint();
    let t = trace(&m).re;
    m.map(|z| z / t)
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn basis(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = ONE;
    v
}

pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { r(values[i]) } else { ZERO })
}
