use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hilbert::{Ket, Unitary};
use crate::linalg::{self, CMatrix};

/// `Π_k cos(g_k t)`: the overlap of the two environment records left by a
/// qubit that imprints phase `±g_k t/2` on each bath spin prepared in `|+⟩`.
pub fn spin_bath_overlap(n_env: usize, couplings: &[f64], t: f64) -> Result<Complex64> {
    if couplings.len() != n_env {
        return Err(Error::param(format!(
            "{} couplings given for {n_env} bath spins",
            couplings.len()
        )));
    }
    Ok(linalg::r(couplings.iter().map(|g| (g * t).cos()).product()))
}

/// Bath of independent two-level systems, each coupled to a qubit through
/// `exp(∓ i g_k t σ_z / 2)` depending on the qubit's basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBath {
    pub couplings: Vec<f64>,
}

impl SpinBath {
    pub fn new(couplings: Vec<f64>) -> Self {
        SpinBath { couplings }
    }

    /// `n` couplings drawn uniformly from `[lo, hi]`.
    pub fn random(n: usize, lo: f64, hi: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpinBath {
            couplings: (0..n).map(|_| rng.random_range(lo..=hi)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.couplings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.couplings.is_empty()
    }

    pub fn overlap(&self, t: f64) -> f64 {
        self.couplings.iter().map(|g| (g * t).cos()).product()
    }

    /// Per-spin state after time `t` when the qubit is in basis state
    /// `branch` (0 or 1).
    pub fn spin_states(&self, t: f64, branch: usize) -> Vec<[Complex64; 2]> {
        let sign = if branch == 0 { -1.0 } else { 1.0 };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        self.couplings
            .iter()
            .map(|g| {
                let phi = sign * g * t / 2.0;
                [Complex64::from_polar(h, phi), Complex64::from_polar(h, -phi)]
            })
            .collect()
    }

    /// `|+⟩^{⊗n}`.
    pub fn initial_bath(&self) -> Ket {
        let d = 1usize << self.len();
        Ket::from_real(&vec![1.0; d]).expect("nonzero vector")
    }

    /// Diagonal unitary on `qubit ⊗ bath` realizing the conditional phases.
    pub fn evolution(&self, t: f64, tol: &Tolerances) -> Result<Unitary> {
        let n = self.len();
        let bath_dim = 1usize
            .checked_shl(n as u32)
            .filter(|_| n < usize::BITS as usize - 1)
            .ok_or(Error::Capacity {
                requested: usize::MAX,
                limit: tol.max_dim,
            })?;
        tol.check_dim(2 * bath_dim)?;
        let d = 2 * bath_dim;
        let mut u = CMatrix::zeros(d, d);
        for q in 0..2 {
            let sign = if q == 0 { -1.0 } else { 1.0 };
            for b in 0..bath_dim {
                // spin k is the k-th most significant bit of `b`
                let phase: f64 = self
                    .couplings
                    .iter()
                    .enumerate()
                    .map(|(k, g)| {
                        let z = if (b >> (n - 1 - k)) & 1 == 0 { 1.0 } else { -1.0 };
                        sign * g * t * z / 2.0
                    })
                    .sum();
                let i = q * bath_dim + b;
                u[(i, i)] = Complex64::from_polar(1.0, phase);
            }
        }
        Unitary::new(u, tol)
    }
}
