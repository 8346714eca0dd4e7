//! Suppression of interference by an environment: the phenomenological
//! overlap decay, a controlled-phase spin bath, premeasurement interactions
//! and block dephasing.

mod bath;
mod curve;

use std::collections::BTreeMap;

pub use bath::{spin_bath_overlap, SpinBath};
pub use curve::{fit_exponential_envelope, DecayCurve, DecayFit};

use crate::branching::{pinch, MacrostatePartition};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, Ket, SubsystemLayout, Unitary};
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    tau_d: f64,
    t: f64,
}

impl DecayParams {
    pub fn new(tau_d: f64, t: f64) -> Result<Self> {
        if !(tau_d > 0.0 && tau_d.is_finite()) {
            return Err(Error::param(format!("tau_d must be positive, got {tau_d}")));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::param(format!("t must be non-negative, got {t}")));
        }
        Ok(DecayParams { tau_d, t })
    }

    pub fn tau_d(&self) -> f64 {
        self.tau_d
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `e^{-t/τ_d}`.
pub fn overlap_decay(p: DecayParams) -> f64 {
    (-p.t / p.tau_d).exp()
}

/// Environment record correlated with each basis state of the measured factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerMap {
    system_basis: Vec<String>,
    environment_states: BTreeMap<String, Ket>,
}

impl PointerMap {
    pub fn new(system_basis: Vec<String>, environment_states: BTreeMap<String, Ket>) -> Result<Self> {
        if system_basis.is_empty() {
            return Err(Error::param("pointer map needs at least one basis label"));
        }
        for (i, label) in system_basis.iter().enumerate() {
            if system_basis[..i].contains(label) {
                return Err(Error::param(format!("basis label `{label}` repeated")));
            }
            if !environment_states.contains_key(label) {
                return Err(Error::param(format!("no environment state for `{label}`")));
            }
        }
        if let Some(extra) = environment_states.keys().find(|k| !system_basis.contains(k)) {
            return Err(Error::param(format!("environment state for unknown label `{extra}`")));
        }
        let dim = environment_states[&system_basis[0]].dim();
        if environment_states.values().any(|k| k.dim() != dim) {
            return Err(Error::param("environment states differ in dimension"));
        }
        Ok(PointerMap {
            system_basis,
            environment_states,
        })
    }

    /// Convenience constructor from labels paired with states in basis order.
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Ket)>) -> Result<Self> {
        let mut basis = Vec::new();
        let mut states = BTreeMap::new();
        for (label, ket) in pairs {
            let label = label.into();
            basis.push(label.clone());
            states.insert(label, ket);
        }
        Self::new(basis, states)
    }

    pub fn system_basis(&self) -> &[String] {
        &self.system_basis
    }

    pub fn environment_state(&self, label: &str) -> Option<&Ket> {
        self.environment_states.get(label)
    }

    pub fn environment_dim(&self) -> usize {
        self.environment_states[&self.system_basis[0]].dim()
    }

    /// Environment states in system-basis order.
    pub fn ordered_states(&self) -> impl Iterator<Item = &Ket> {
        self.system_basis.iter().map(|l| &self.environment_states[l])
    }

    /// Gram matrix `⟨E_i|E_j⟩` in basis order.
    pub fn gram(&self) -> CMatrix {
        let states: Vec<&Ket> = self.ordered_states().collect();
        CMatrix::from_fn(states.len(), states.len(), |i, j| states[i].inner(states[j]))
    }
}

/// `Σ_n |S_n⟩⟨S_n| ⊗ W_n` with `W_n |ready⟩ = |E_n⟩`.
///
/// The first factor of `layout` is the measured system; the remaining factors
/// together form the environment.
pub fn premeasurement_unitary(
    layout: &SubsystemLayout,
    pm: &PointerMap,
    ready: &Ket,
    tol: &Tolerances,
) -> Result<Unitary> {
    tol.check_dim(layout.dim())?;
    let (system, sys_dim) = &layout.factors()[0];
    let labels = pm.system_basis().len();
    if *sys_dim != labels {
        return Err(Error::layout(format!(
            "factor `{system}` has dimension {sys_dim} but the pointer map has {labels} labels"
        )));
    }
    let env_dim = layout.dim() / sys_dim;
    if pm.environment_dim() != env_dim || ready.dim() != env_dim {
        return Err(Error::layout(format!(
            "environment dimension {env_dim} does not match the pointer states ({}) or ready state ({})",
            pm.environment_dim(),
            ready.dim()
        )));
    }
    if env_dim < labels {
        return Err(Error::Construction(format!(
            "environment dimension {env_dim} cannot hold {labels} distinct records"
        )));
    }
    let (gram_values, _) = linalg::eigh(&pm.gram(), 0.0);
    let smallest = gram_values.last().copied().unwrap_or(0.0);
    if smallest <= tol.spec {
        return Err(Error::Construction(format!(
            "pointer states are not linearly independent (Gram eigenvalue {smallest:e})"
        )));
    }
    let d = layout.dim();
    let mut u = CMatrix::zeros(d, d);
    for (n, e) in pm.ordered_states().enumerate() {
        let w = linalg::transfer_unitary(ready.amplitudes(), e.amplitudes());
        u.view_mut((n * env_dim, n * env_dim), (env_dim, env_dim))
            .copy_from(&w);
    }
    Unitary::new(u, tol)
}

/// Scales every off-block `P_m ρ P_{m'}` by `decay`, leaving the diagonal
/// blocks untouched.
pub fn dephase(rho: &DensityMatrix, part: &MacrostatePartition, decay: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&decay) {
        return Err(Error::param(format!("decay {decay} outside [0, 1]")));
    }
    if rho.dim() != part.dim() {
        return Err(Error::Partition(format!(
            "partition acts on dimension {}, state has dimension {}",
            part.dim(),
            rho.dim()
        )));
    }
    let blocks = pinch(rho, part);
    let m = rho.matrix() * linalg::r(decay) + blocks * linalg::r(1.0 - decay);
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

#[cfg(test)]
mod tests;
