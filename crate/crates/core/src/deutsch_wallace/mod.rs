//! Erasure between density matrices: two states can be sent to a common
//! state by unitaries exactly when their spectra agree. Also the equal-weight
//! reward/no-reward indifference instance and expected utility over branches.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::branching::{decompose, BranchDecomposition, MacrostatePartition};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hilbert::{
    apply_unitary, eigendecomposition, spectral_distance, spectrum, DensityMatrix, Ket, SubsystemLayout, Unitary,
};
use crate::linalg::{self, CMatrix, ZERO};

/// Note attached to every erasure report.
pub const NON_UNITARY_NOTE: &str =
    "non-unitary acts: any two states are related by the replace-with-target channel, so erasure holds trivially without a spectrum condition";

#[derive(Debug, Clone)]
pub struct ErasureVerdict {
    pub feasible: bool,
    /// L∞ distance between the sorted spectra.
    pub spectral_distance: f64,
    pub spectra: (Vec<f64>, Vec<f64>),
    /// `(U, V)` with `U ρ₁ U† = V ρ₂ V†`, present when feasible.
    pub witnesses: Option<(Unitary, Unitary)>,
    /// Frobenius norm of `U ρ₁ U† - V ρ₂ V†`.
    pub residual: Option<f64>,
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::layout(format!(
            "states of dimension {} and {} cannot be compared",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Frobenius norm of `U ρ₁ U† - V ρ₂ V†`.
pub fn witness_residual(rho1: &DensityMatrix, rho2: &DensityMatrix, u: &Unitary, v: &Unitary) -> Result<f64> {
    let a = apply_unitary(rho1, u)?;
    let b = apply_unitary(rho2, v)?;
    Ok(linalg::frobenius(&(a.matrix() - b.matrix())))
}

/// Decides whether unitaries can send both states to one state. Feasible iff
/// the sorted spectra agree within `tol.erasure`.
pub fn erasure_exists(rho1: &DensityMatrix, rho2: &DensityMatrix, tol: &Tolerances) -> Result<ErasureVerdict> {
    check_dims(rho1, rho2)?;
    let s1 = spectrum(rho1, tol);
    let s2 = spectrum(rho2, tol);
    let distance = spectral_distance(&s1, &s2);
    let feasible = distance <= tol.erasure;
    let (witnesses, residual) = if feasible {
        let (u, v) = construct_erasure(rho1, rho2, tol)?;
        let res = witness_residual(rho1, rho2, &u, &v)?;
        (Some((u, v)), Some(res))
    } else {
        (None, None)
    };
    Ok(ErasureVerdict {
        feasible,
        spectral_distance: distance,
        spectra: (s1, s2),
        witnesses,
        residual,
    })
}

/// Erasure unitaries into the diagonal frame: both states end at
/// `diag(λ₁ ≥ λ₂ ≥ …)`.
pub fn construct_erasure(rho1: &DensityMatrix, rho2: &DensityMatrix, tol: &Tolerances) -> Result<(Unitary, Unitary)> {
    construct_erasure_in(rho1, rho2, &Unitary::identity(rho1.dim()), tol)
}

/// Erasure unitaries into the frame `target`: both states end at
/// `target · diag(λ) · target†`.
pub fn construct_erasure_in(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    target: &Unitary,
    tol: &Tolerances,
) -> Result<(Unitary, Unitary)> {
    check_dims(rho1, rho2)?;
    if target.dim() != rho1.dim() {
        return Err(Error::layout("target frame dimension differs from the states"));
    }
    let (l1, w1) = eigendecomposition(rho1, tol);
    let (l2, w2) = eigendecomposition(rho2, tol);
    let distance = spectral_distance(&l1, &l2);
    if distance > tol.erasure {
        return Err(Error::Infeasible {
            distance,
            tol: tol.erasure,
        });
    }
    let u = Unitary::new(target.matrix() * w1.adjoint(), tol)?;
    let v = Unitary::new(target.matrix() * w2.adjoint(), tol)?;
    Ok((u, v))
}

/// Sorted spectrum rounded to a fixed resolution; states with equal keys
/// are related by erasure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sector {
    steps: Vec<i64>,
    resolution_exp: i32,
}

impl Sector {
    /// Representative eigenvalues of the sector.
    pub fn values(&self) -> Vec<f64> {
        let r = 10f64.powi(self.resolution_exp);
        self.steps.iter().map(|&k| k as f64 * r).collect()
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (-self.resolution_exp).max(0) as usize;
        let parts: Vec<String> = self
            .values()
            .iter()
            .map(|v| {
                let s = format!("{v:.digits$}");
                let s = s.trim_end_matches('0').trim_end_matches('.');
                if s == "-0" { "0".to_string() } else { s.to_string() }
            })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Sector key at the power-of-ten resolution nearest above `tol.erasure`.
pub fn sector_of(rho: &DensityMatrix, tol: &Tolerances) -> Sector {
    let resolution_exp = tol.erasure.max(1e-15).log10().ceil() as i32;
    let r = 10f64.powi(resolution_exp);
    Sector {
        steps: spectrum(rho, tol).iter().map(|l| (l / r).round() as i64).collect(),
        resolution_exp,
    }
}

/// `Σ_m w_m · utility(label_m)` over the decomposition's branches.
pub fn expected_utility(branches: &BranchDecomposition, utility: &BTreeMap<String, f64>) -> Result<f64> {
    branches
        .branches
        .iter()
        .filter(|b| b.weight > 0.0)
        .map(|b| {
            utility
                .get(&b.label)
                .map(|u| b.weight * u)
                .ok_or_else(|| Error::Domain(format!("no utility for branch `{}`", b.label)))
        })
        .sum()
}

pub const REWARD: &str = "reward";
pub const NO_REWARD: &str = "no reward";

/// A state with one designated factor whose basis states are rewards.
#[derive(Debug, Clone)]
pub struct RewardedState {
    pub state: DensityMatrix,
    pub layout: SubsystemLayout,
    pub reward_factor: String,
    /// Partition of the reward factor alone.
    pub reward_partition: MacrostatePartition,
}

impl RewardedState {
    pub fn new(
        state: DensityMatrix,
        layout: SubsystemLayout,
        reward_factor: impl Into<String>,
        reward_partition: MacrostatePartition,
    ) -> Result<Self> {
        let reward_factor = reward_factor.into();
        if layout.dim() != state.dim() {
            return Err(Error::layout("layout does not match state"));
        }
        if layout.factor_dim(&reward_factor)? != reward_partition.dim() {
            return Err(Error::Partition(format!(
                "reward partition has dimension {}, factor `{reward_factor}` has {}",
                reward_partition.dim(),
                layout.factor_dim(&reward_factor)?
            )));
        }
        Ok(RewardedState {
            state,
            layout,
            reward_factor,
            reward_partition,
        })
    }

    pub fn full_partition(&self, tol: &Tolerances) -> Result<MacrostatePartition> {
        MacrostatePartition::on_factor(&self.layout, &self.reward_factor, &self.reward_partition, tol)
    }

    pub fn branches(&self, tol: &Tolerances) -> Result<BranchDecomposition> {
        decompose(&self.state, &self.full_partition(tol)?, tol)
    }

    /// `P ρ P` for one reward macrostate, unnormalized.
    pub fn block(&self, label: &str, tol: &Tolerances) -> Result<DensityMatrix> {
        let p = self
            .full_partition(tol)?
            .projector(label)
            .ok_or_else(|| Error::Partition(format!("no reward macrostate `{label}`")))?;
        Ok(DensityMatrix::from_matrix_unchecked(&p * self.state.matrix() * &p))
    }
}

/// Which erasure was applied in one reward branch of one act.
#[derive(Debug, Clone)]
pub struct BranchErasure {
    pub act: String,
    pub branch: String,
    pub unitary: Unitary,
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub act_a: RewardedState,
    pub act_b: RewardedState,
    pub erased_a: RewardedState,
    pub erased_b: RewardedState,
    pub reward_weight_a: f64,
    pub reward_weight_b: f64,
    pub erasures: Vec<BranchErasure>,
    /// Largest entry of the difference of the two erased states.
    pub state_distance: f64,
    pub states_equal: bool,
    /// Spectral distance of the unnormalized reward blocks of A and B.
    pub reward_block_distance: f64,
    /// `Some("indifferent")` only when the erased states coincide.
    pub verdict: Option<String>,
    pub notes: Vec<String>,
}

/// Two-qubit layout: system `S` then reward `R` (`|0⟩ = reward`).
fn reward_layout() -> Result<(SubsystemLayout, MacrostatePartition)> {
    let layout = SubsystemLayout::new([("S", 2), ("R", 2)])?;
    let part = MacrostatePartition::from_basis_labels(&[REWARD, NO_REWARD])?;
    Ok((layout, part))
}

/// Applies `Σ_r U_r ⊗ |r⟩⟨r|` to a ket on `S ⊗ R`.
fn controlled(us: [&CMatrix; 2]) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (r, u) in us.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                m[(2 * i + r, 2 * j + r)] = u[(i, j)];
            }
        }
    }
    m
}

/// Acts A (`α|+⟩|reward⟩ + β|−⟩|no reward⟩`) and B (rewards swapped), each
/// followed by branch-wise erasure of the system to `|0⟩` in the reward
/// branch and `|0′⟩ = |1⟩` in the other.
pub fn equivalence_demo(alpha: Complex64, beta: Complex64, tol: &Tolerances) -> Result<EquivalenceReport> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > tol.norm {
        return Err(Error::param(format!("|α|² + |β|² = {norm}, not 1")));
    }
    let (layout, reward_part) = reward_layout()?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [linalg::r(h), linalg::r(h)];
    let minus = [linalg::r(h), linalg::r(-h)];
    // amplitude on |s⟩|r⟩ sits at index 2s + r
    let act = |reward_sys: [Complex64; 2], reward_amp: Complex64, none_sys: [Complex64; 2], none_amp: Complex64| {
        let mut v = vec![ZERO; 4];
        for s in 0..2 {
            v[2 * s] = reward_amp * reward_sys[s];
            v[2 * s + 1] = none_amp * none_sys[s];
        }
        Ket::new(v, tol)
    };
    let ket_a = act(plus, alpha, minus, beta)?;
    let ket_b = act(minus, beta, plus, alpha)?;

    let sys_state = |v: [Complex64; 2]| DensityMatrix::pure(&Ket::normalized(v.to_vec()).expect("nonzero"));
    let swap = Unitary::permutation(&[1, 0])?;
    let frames = [Unitary::identity(2), swap];
    // reward branch: A holds |+⟩, B holds |−⟩; no-reward branch the reverse
    let branch_states = [(sys_state(plus), sys_state(minus)), (sys_state(minus), sys_state(plus))];
    let mut ua = Vec::new();
    let mut ub = Vec::new();
    let mut erasures = Vec::new();
    for (r, ((sa, sb), frame)) in branch_states.iter().zip(&frames).enumerate() {
        let (u, v) = construct_erasure_in(sa, sb, frame, tol)?;
        let label = if r == 0 { REWARD } else { NO_REWARD };
        // a branch phase is free: make every erased amplitude real and non-negative
        let target = r; // |0⟩ for reward, |0′⟩ = |1⟩ otherwise
        let phase = |u: &Unitary, src: &[Complex64; 2], amp: Complex64| {
            let img: Complex64 = amp * (0..2).map(|j| u.matrix()[(target, j)] * src[j]).sum::<Complex64>();
            if img.norm() == 0.0 { linalg::ONE } else { img.conj() / img.norm() }
        };
        let (src_a, amp_a, src_b, amp_b) = if r == 0 {
            (&plus, alpha, &minus, beta)
        } else {
            (&minus, beta, &plus, alpha)
        };
        let u = Unitary::new(u.matrix() * phase(&u, src_a, amp_a), tol)?;
        let v = Unitary::new(v.matrix() * phase(&v, src_b, amp_b), tol)?;
        erasures.push(BranchErasure { act: "A".into(), branch: label.into(), unitary: u.clone() });
        erasures.push(BranchErasure { act: "B".into(), branch: label.into(), unitary: v.clone() });
        ua.push(u);
        ub.push(v);
    }
    let erase_a = Unitary::new(controlled([ua[0].matrix(), ua[1].matrix()]), tol)?;
    let erase_b = Unitary::new(controlled([ub[0].matrix(), ub[1].matrix()]), tol)?;

    let wrap = |rho: DensityMatrix| RewardedState::new(rho, layout.clone(), "R", reward_part.clone());
    let act_a = wrap(DensityMatrix::pure(&ket_a))?;
    let act_b = wrap(DensityMatrix::pure(&ket_b))?;
    let erased_a = wrap(DensityMatrix::pure(&erase_a.apply_ket(&ket_a)?))?;
    let erased_b = wrap(DensityMatrix::pure(&erase_b.apply_ket(&ket_b)?))?;

    let reward_weight = |s: &RewardedState| -> Result<f64> { Ok(s.branches(tol)?.weight(REWARD).unwrap_or(0.0)) };
    let reward_weight_a = reward_weight(&act_a)?;
    let reward_weight_b = reward_weight(&act_b)?;
    let state_distance = erased_a.state.max_abs_diff(&erased_b.state);
    let states_equal = state_distance <= 1e-10;
    let reward_block_distance = spectral_distance(
        &spectrum(&act_a.block(REWARD, tol)?, tol),
        &spectrum(&act_b.block(REWARD, tol)?, tol),
    );
    let mut notes = vec![
        "erasure acts are controlled on the reward factor, so they preserve the reward macrostates".to_string(),
        NON_UNITARY_NOTE.to_string(),
    ];
    if !states_equal {
        notes.push("erased states differ; no verdict outside the equal-weight case".into());
    }
    Ok(EquivalenceReport {
        alpha,
        beta,
        act_a,
        act_b,
        erased_a,
        erased_b,
        reward_weight_a,
        reward_weight_b,
        erasures,
        state_distance,
        states_equal,
        reward_block_distance,
        verdict: states_equal.then(|| "indifferent".to_string()),
        notes,
    })
}

/// Normalized system state inside one reward branch.
pub fn branch_system_state(s: &RewardedState, label: &str, tol: &Tolerances) -> Result<DensityMatrix> {
    let dec = s.branches(tol)?;
    let b = dec
        .branches
        .iter()
        .find(|b| b.label == label)
        .ok_or_else(|| Error::Partition(format!("branch `{label}` has no weight")))?;
    crate::hilbert::partial_trace(&b.state, &s.layout, &["S"])
}

#[cfg(test)]
mod tests;
