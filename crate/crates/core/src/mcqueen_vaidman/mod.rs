//! N-station symmetric scenario: a particle spread over `n` remote packets,
//! one agent and one detector per station, and a shared environment.
//!
//! Every state here is pure, so scenarios keep the universal ket and only
//! materialize `|ψ⟩⟨ψ|` on request. Reduced states are taken directly from
//! the ket, which lets `n = 5` (dimension 25600) run without a dense matrix.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::branching::MacrostatePartition;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hilbert::{reduced_from_ket, DensityMatrix, Ket, SubsystemLayout, Unitary};
use crate::linalg::{self, CMatrix, CVector, ZERO};

pub const LOCATION: &str = "L";
pub const ENVIRONMENT: &str = "E";
/// Largest entry-wise change accepted as "unchanged".
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Agent factor label of station `i` (1-based).
pub fn agent(i: usize) -> String {
    format!("A{i}")
}

/// Detector factor label of station `i` (1-based).
pub fn device(i: usize) -> String {
    format!("M{i}")
}

/// Branch label of station `i` (1-based).
pub fn station_label(i: usize) -> String {
    format!("station:{i}")
}

/// How a scenario came about.
#[derive(Debug, Clone)]
pub enum Origin {
    /// Built directly from location weights.
    Built,
    /// A remote transform applied to a pre-measurement parent.
    Remote {
        parent: Box<StationScenario>,
        transform: RemoteTransform,
    },
}

#[derive(Debug, Clone)]
pub struct StationScenario {
    n: usize,
    layout: SubsystemLayout,
    psi: Ket,
    weights: Vec<f64>,
    measured: bool,
    origin: Origin,
}

impl StationScenario {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn ket(&self) -> &Ket {
        &self.psi
    }

    /// Squared amplitude of each location packet.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_measured(&self) -> bool {
        self.measured
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    /// `|ψ⟩⟨ψ|`, subject to the dense size cap.
    pub fn state(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        tol.check_dim(self.psi.dim())?;
        Ok(DensityMatrix::pure(&self.psi))
    }

    pub fn reduced(&self, keep: &[&str]) -> Result<DensityMatrix> {
        reduced_from_ket(&self.psi, &self.layout, keep)
    }

    pub fn location_marginal(&self) -> Result<DensityMatrix> {
        self.reduced(&[LOCATION])
    }

    /// Particle, agents and detectors with the environment traced out.
    pub fn subsystem_state(&self) -> Result<DensityMatrix> {
        let labels = self.system_labels();
        let keep: Vec<&str> = labels.iter().map(String::as_str).collect();
        self.reduced(&keep)
    }

    fn system_labels(&self) -> Vec<String> {
        let mut v = vec![LOCATION.to_string()];
        v.extend((1..=self.n).map(agent));
        v.extend((1..=self.n).map(device));
        v
    }

    /// Norm and layout checks on the stored ket.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if self.layout.len() != 2 * self.n + 2 || self.layout.dim() != self.psi.dim() {
            return Err(Error::layout("scenario layout does not match its state"));
        }
        let norm = self.psi.amplitudes().norm_squared();
        if (norm - 1.0).abs() > tol.norm {
            return Err(Error::InvalidState(format!("squared norm {norm} differs from 1")));
        }
        Ok(())
    }

    /// One macrostate per station whose detector alone shows ✓, plus `rest`.
    pub fn station_partition(&self) -> Result<MacrostatePartition> {
        let mut labels: Vec<String> = (1..=self.n).map(station_label).collect();
        let rest = self.n;
        let assign: Vec<usize> = (0..self.layout.dim())
            .map(|i| {
                let d = self.layout.digits(i);
                let found: Vec<usize> = (0..self.n).filter(|&k| d[1 + self.n + k] == 1).collect();
                match found[..] {
                    [k] => k,
                    _ => rest,
                }
            })
            .collect();
        if assign.contains(&rest) {
            labels.push("rest".into());
        }
        MacrostatePartition::from_assignment(labels, assign)
    }

    /// Squared norm of the state inside each station macrostate.
    pub fn branch_weights(&self) -> Vec<(String, f64)> {
        let mut w = vec![0.0; self.n];
        for (i, a) in self.psi.amplitudes().iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let d = self.layout.digits(i);
            let found: Vec<usize> = (0..self.n).filter(|&k| d[1 + self.n + k] == 1).collect();
            if let [k] = found[..] {
                w[k] += a.norm_sqr();
            }
        }
        w.into_iter().enumerate().map(|(k, x)| (station_label(k + 1), x)).collect()
    }
}

fn ket_cap(tol: &Tolerances) -> usize {
    tol.max_dim.saturating_mul(tol.max_dim)
}

/// Layout `(L, A1…An, M1…Mn, E)`; every agent and detector is a qubit with
/// `0 = ready` and `1 = found`.
pub fn station_layout(n: usize, tol: &Tolerances) -> Result<SubsystemLayout> {
    if n < 2 {
        return Err(Error::param("need at least two stations"));
    }
    let dim = n
        .checked_pow(2)
        .and_then(|x| 4usize.checked_pow(n as u32).and_then(|y| x.checked_mul(y)));
    match dim {
        Some(d) if d <= ket_cap(tol) => {}
        _ => {
            return Err(Error::Capacity {
                requested: dim.unwrap_or(usize::MAX),
                limit: ket_cap(tol),
            })
        }
    }
    let mut factors = vec![(LOCATION.to_string(), n)];
    factors.extend((1..=n).map(|i| (agent(i), 2)));
    factors.extend((1..=n).map(|i| (device(i), 2)));
    factors.push((ENVIRONMENT.to_string(), n));
    SubsystemLayout::new(factors)
}

/// Environment ready state: equal superposition of the `n` record states.
fn environment_ready(n: usize) -> CVector {
    CVector::from_element(n, linalg::r(1.0 / (n as f64).sqrt()))
}

/// Equal superposition over `n` stations, everything else ready.
pub fn build_symmetric(n: usize, tol: &Tolerances) -> Result<StationScenario> {
    if n < 2 {
        return Err(Error::param("need at least two stations"));
    }
    let w = BigRational::new(BigInt::one(), BigInt::from(n));
    build_weighted(&vec![w; n], tol)
}

/// `Σ_m √w_m |L_m⟩ |R_A…⟩ |R_M…⟩ |R_E⟩`.
pub fn build_weighted(weights: &[BigRational], tol: &Tolerances) -> Result<StationScenario> {
    let n = weights.len();
    let layout = station_layout(n, tol)?;
    if weights.iter().any(|w| !w.is_positive()) {
        return Err(Error::param("location weights must be positive"));
    }
    let total: BigRational = weights.iter().sum();
    if !total.is_one() {
        return Err(Error::param(format!("location weights sum to {total}")));
    }
    let floats: Vec<f64> = weights.iter().map(|w| w.to_f64().expect("finite")).collect();
    let env = environment_ready(n);
    let stride = layout.strides()[0];
    let mut psi = CVector::zeros(layout.dim());
    for (m, w) in floats.iter().enumerate() {
        for k in 0..n {
            psi[m * stride + k] = linalg::r(w.sqrt()) * env[k];
        }
    }
    Ok(StationScenario {
        n,
        layout,
        psi: Ket::normalized(psi.iter().copied().collect())?,
        weights: floats,
        measured: false,
        origin: Origin::Built,
    })
}

/// Detector `m` flips to ✓ and the environment records `m`, controlled on
/// the particle being at `m`. Agents stay ready.
pub fn measure_stations(s: &StationScenario) -> Result<StationScenario> {
    if s.measured {
        return Err(Error::param("scenario is already measured"));
    }
    let n = s.n;
    let ready = environment_ready(n);
    let records: Vec<CMatrix> = (0..n)
        .map(|m| linalg::transfer_unitary(&ready, &linalg::basis(n, m)))
        .collect();
    let strides = s.layout.strides();
    let a = s.psi.amplitudes();
    let mut out = CVector::zeros(a.len());
    // the environment is the last factor, so each record block is contiguous
    for base in (0..a.len()).step_by(n) {
        let v = a.rows(base, n);
        if v.iter().all(|z| *z == ZERO) {
            continue;
        }
        let digits = s.layout.digits(base);
        let m = digits[0];
        let dev = 1 + n + m;
        let target = if digits[dev] == 0 {
            base + strides[dev]
        } else {
            base - strides[dev]
        };
        let moved = &records[m] * v;
        out.rows_mut(target, n).copy_from(&moved);
    }
    Ok(StationScenario {
        psi: Ket::normalized(out.iter().copied().collect())?,
        measured: true,
        ..s.clone()
    })
}

fn check_station_perm(n: usize, perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::param(format!("permutation has {} entries for {n} stations", perm.len())));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::param(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Relabels station `i` as `perm[i]` (0-based) on the location, agent,
/// detector and environment-record factors together.
pub fn permute_stations(s: &StationScenario, perm: &[usize]) -> Result<StationScenario> {
    check_station_perm(s.n, perm)?;
    let n = s.n;
    let a = s.psi.amplitudes();
    let mut out = CVector::zeros(a.len());
    for (i, z) in a.iter().enumerate() {
        if *z == ZERO {
            continue;
        }
        let d = s.layout.digits(i);
        let mut e = d.clone();
        e[0] = perm[d[0]];
        for k in 0..n {
            e[1 + perm[k]] = d[1 + k];
            e[1 + n + perm[k]] = d[1 + n + k];
        }
        e[2 * n + 1] = perm[d[2 * n + 1]];
        out[s.layout.index(&e)] = *z;
    }
    let mut weights = vec![0.0; n];
    for (k, w) in s.weights.iter().enumerate() {
        weights[perm[k]] = *w;
    }
    Ok(StationScenario {
        psi: Ket::normalized(out.iter().copied().collect())?,
        weights,
        ..s.clone()
    })
}

/// Largest entry of `|ψ⟩⟨ψ| - |φ⟩⟨φ|`, evaluated on the joint support.
fn projector_distance(a: &CVector, b: &CVector) -> f64 {
    let support: Vec<usize> = (0..a.len())
        .filter(|&i| a[i].norm() > 1e-15 || b[i].norm() > 1e-15)
        .collect();
    let mut worst: f64 = 0.0;
    for &i in &support {
        for &j in &support {
            let d = a[i] * a[j].conj() - b[i] * b[j].conj();
            worst = worst.max(d.norm());
        }
    }
    worst
}

/// How far the station permutation moves the state.
pub fn symmetry_distance(s: &StationScenario, perm: &[usize]) -> Result<f64> {
    let moved = permute_stations(s, perm)?;
    Ok(projector_distance(s.psi.amplitudes(), moved.psi.amplitudes()))
}

/// The permutation conjugates the state to itself within [`SYMMETRY_TOL`].
pub fn check_symmetry(s: &StationScenario, perm: &[usize]) -> Result<bool> {
    Ok(symmetry_distance(s, perm)? <= SYMMETRY_TOL)
}

/// Cyclic shift `i → i + k (mod n)`.
pub fn cyclic_shift(n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|i| (i + k) % n).collect()
}

/// A unitary acting only where the particle sits in `block` (0-based
/// stations), jointly with the `support` factors. Packets outside the block
/// and every other factor are untouched.
#[derive(Debug, Clone)]
pub struct RemoteTransform {
    pub label: String,
    pub block: Vec<usize>,
    pub support: Vec<String>,
    /// Acts on `span{L_m : m ∈ block} ⊗ support`, block index most significant.
    pub unitary: Unitary,
    merging: bool,
}

impl RemoteTransform {
    pub fn new(label: impl Into<String>, block: Vec<usize>, support: Vec<String>, unitary: Unitary) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::param("remote block must name at least one station"));
        }
        let mut sorted = block.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != block.len() {
            return Err(Error::param("remote block repeats a station"));
        }
        Ok(RemoteTransform {
            label: label.into(),
            block,
            support,
            unitary,
            merging: false,
        })
    }

    /// Sends the equal superposition of the block's packets to its first
    /// packet, merging them into one.
    pub fn merge(block: &[usize]) -> Result<Self> {
        let k = block.len();
        let from = CVector::from_element(k, linalg::r(1.0 / (k as f64).sqrt()));
        let u = Unitary::new(linalg::transfer_unitary(&from, &linalg::basis(k, 0)), &Tolerances::default())?;
        let mut t = Self::new("merge", block.to_vec(), Vec::new(), u)?;
        t.merging = true;
        Ok(t)
    }

    /// Built by [`RemoteTransform::merge`].
    pub fn is_merge(&self) -> bool {
        self.merging
    }

    /// Haar-random unitary on every packet but `local`'s, jointly with the
    /// other stations' agents and detectors.
    pub fn random_off(n: usize, local: usize, seed: u64) -> Result<Self> {
        let block: Vec<usize> = (0..n).filter(|&m| m != local).collect();
        let support: Vec<String> = block
            .iter()
            .flat_map(|&m| [agent(m + 1), device(m + 1)])
            .collect();
        let dim = block.len() * 4usize.pow(block.len() as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new("random", block, support, Unitary::random(&mut rng, dim))
    }

    /// Factors touched besides the location packets.
    fn touches(&self, label: &str) -> bool {
        self.support.iter().any(|s| s == label)
    }

    /// Errors if the transform reaches station `local` (0-based).
    pub fn check_remote_from(&self, local: usize) -> Result<()> {
        if self.block.contains(&local) {
            return Err(Error::SupportViolation(format!(
                "transform `{}` acts on the packet at station {}",
                self.label,
                local + 1
            )));
        }
        for f in [agent(local + 1), device(local + 1), LOCATION.to_string()] {
            if self.touches(&f) {
                return Err(Error::SupportViolation(format!(
                    "transform `{}` acts on local factor `{f}`",
                    self.label
                )));
            }
        }
        Ok(())
    }

    fn apply(&self, s: &StationScenario) -> Result<Ket> {
        if let Some(&m) = self.block.iter().find(|&&m| m >= s.n) {
            return Err(Error::param(format!("station {} out of range", m + 1)));
        }
        let labels: Vec<&str> = self.support.iter().map(String::as_str).collect();
        let positions = s.layout.positions(&labels)?;
        if positions.len() != labels.len() || positions.contains(&0) {
            return Err(Error::layout("remote support must list distinct non-location factors"));
        }
        // offsets in the order the support was given
        let ordered: Vec<usize> = labels.iter().map(|l| s.layout.position(l)).collect::<Result<_>>()?;
        let sup_off = s.layout.offsets(&ordered);
        let loc_stride = s.layout.strides()[0];
        let local_off: Vec<usize> = self
            .block
            .iter()
            .flat_map(|&m| sup_off.iter().map(move |&o| m * loc_stride + o))
            .collect();
        if local_off.len() != self.unitary.dim() {
            return Err(Error::layout(format!(
                "transform `{}` has dimension {} but its support has {}",
                self.label,
                self.unitary.dim(),
                local_off.len()
            )));
        }
        let mut fixed = positions.clone();
        fixed.push(0);
        fixed.sort_unstable();
        let rest_off = s.layout.offsets(&s.layout.complement(&fixed));
        let a = s.psi.amplitudes();
        let w = self.unitary.matrix();
        let mut out = a.clone();
        for &r in &rest_off {
            let v: Vec<_> = local_off.iter().map(|&o| a[o + r]).collect();
            if v.iter().all(|z| *z == ZERO) {
                continue;
            }
            for (i, &o) in local_off.iter().enumerate() {
                out[o + r] = (0..v.len()).map(|j| w[(i, j)] * v[j]).sum();
            }
        }
        Ket::normalized(out.iter().copied().collect())
    }
}

/// Applies a remote transform to a pre-measurement scenario, recording the
/// parent so credences can later be certified against it.
pub fn apply_remote(s: &StationScenario, transform: RemoteTransform) -> Result<StationScenario> {
    if s.measured {
        return Err(Error::param("remote transforms are applied before measurement"));
    }
    let psi = transform.apply(s)?;
    let stride = s.layout.strides()[0];
    let weights = (0..s.n)
        .map(|m| psi.amplitudes().rows(m * stride, stride).norm_squared())
        .collect();
    Ok(StationScenario {
        psi,
        weights,
        origin: Origin::Remote {
            parent: Box::new(s.clone()),
            transform,
        },
        ..s.clone()
    })
}

/// State of station `local` (0-based) in block form: the particle is either
/// here or elsewhere, tensored with the local agent and detector. Coherences
/// between here and elsewhere are dropped.
pub fn local_state(s: &StationScenario, local: usize) -> Result<DensityMatrix> {
    if local >= s.n {
        return Err(Error::param(format!("station {} out of range", local + 1)));
    }
    let (a, m) = (agent(local + 1), device(local + 1));
    let rho = s.reduced(&[LOCATION, &a, &m])?;
    let r = rho.matrix();
    let mut out = CMatrix::zeros(8, 8);
    for loc in 0..s.n {
        let block = usize::from(loc != local);
        for i in 0..4 {
            for j in 0..4 {
                out[(4 * block + i, 4 * block + j)] += r[(4 * loc + i, 4 * loc + j)];
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// True iff the transform leaves the local block state of `local` (0-based)
/// unchanged within [`SYMMETRY_TOL`].
pub fn remote_invariance(s: &StationScenario, local: usize, transform: &RemoteTransform) -> Result<bool> {
    transform.check_remote_from(local)?;
    let before = local_state(s, local)?;
    let moved = StationScenario {
        psi: transform.apply(s)?,
        ..s.clone()
    };
    let after = local_state(&moved, local)?;
    Ok(before.max_abs_diff(&after) <= SYMMETRY_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CredenceStatus {
    Derived,
    Underived(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCheck {
    pub description: String,
    pub distance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct StationCredences {
    pub status: CredenceStatus,
    /// Exact credences, per station or per merged group of stations.
    pub credences: Vec<(String, BigRational)>,
    /// Stations whose individual credence the argument does not fix.
    pub undetermined: Vec<String>,
    pub checks: Vec<SymmetryCheck>,
    /// Squared-norm weight of each station branch, for comparison.
    pub born: Vec<(String, f64)>,
}

impl StationCredences {
    pub fn credence(&self, label: &str) -> Option<&BigRational> {
        self.credences.iter().find(|(l, _)| l == label).map(|(_, v)| v)
    }

    pub fn is_derived(&self) -> bool {
        self.status == CredenceStatus::Derived
    }
}

fn cyclic_checks(s: &StationScenario) -> Result<Vec<SymmetryCheck>> {
    (1..s.n)
        .map(|k| {
            let distance = symmetry_distance(s, &cyclic_shift(s.n, k))?;
            Ok(SymmetryCheck {
                description: format!("cyclic shift by {k}"),
                distance,
                passed: distance <= SYMMETRY_TOL,
            })
        })
        .collect()
}

fn underived(reason: String, checks: Vec<SymmetryCheck>, born: Vec<(String, f64)>) -> StationCredences {
    StationCredences {
        status: CredenceStatus::Underived(reason),
        credences: Vec::new(),
        undetermined: Vec::new(),
        checks,
        born,
    }
}

/// Credences for the station branches of a measured scenario.
///
/// A directly built scenario must pass every cyclic shift, giving `1/n`
/// each. A remotely transformed one is certified against its symmetric
/// parent: stations outside the transform's block keep `1/N`, the block as a
/// whole gets `|block|/N`, and a merge puts all of it on the block's first
/// station. Anything else is reported underived.
pub fn derive_credences(s: &StationScenario) -> Result<StationCredences> {
    if !s.measured {
        return Err(Error::param("credences are assigned after measurement"));
    }
    let born = s.branch_weights();
    let n = s.n;
    let frac = |k: usize| BigRational::new(BigInt::from(k), BigInt::from(n));
    match &s.origin {
        Origin::Built => {
            let checks = cyclic_checks(s)?;
            if let Some(bad) = checks.iter().find(|c| !c.passed) {
                let reason = format!("{} moves the state by {:.3e}", bad.description, bad.distance);
                return Ok(underived(reason, checks, born));
            }
            Ok(StationCredences {
                status: CredenceStatus::Derived,
                credences: (1..=n).map(|m| (station_label(m), frac(1))).collect(),
                undetermined: Vec::new(),
                checks,
                born,
            })
        }
        Origin::Remote { parent, transform } => {
            let parent_post = measure_stations(parent)?;
            let mut checks = cyclic_checks(&parent_post)?;
            if let Some(bad) = checks.iter().find(|c| !c.passed) {
                let reason = format!("parent is not symmetric: {} fails", bad.description);
                return Ok(underived(reason, checks, born));
            }
            let k = transform.block.len();
            let first = *transform.block.iter().min().expect("non-empty block");
            let mut credences = Vec::new();
            let mut undetermined = Vec::new();
            for m in 0..n {
                if transform.block.contains(&m) {
                    if transform.is_merge() {
                        let share = if m == transform.block[0] { frac(k) } else { BigRational::zero() };
                        credences.push((station_label(m + 1), share));
                    } else {
                        undetermined.push(station_label(m + 1));
                        if m == first {
                            let mut names: Vec<usize> = transform.block.iter().map(|m| m + 1).collect();
                            names.sort_unstable();
                            let names: Vec<String> = names.iter().map(usize::to_string).collect();
                            credences.push((format!("stations:{}", names.join(",")), frac(k)));
                        }
                    }
                    continue;
                }
                transform.check_remote_from(m)?;
                let d = local_state(&parent_post, m)?.max_abs_diff(&local_state(s, m)?);
                checks.push(SymmetryCheck {
                    description: format!("station {} unaffected by `{}`", m + 1, transform.label),
                    distance: d,
                    passed: d <= SYMMETRY_TOL,
                });
                if d > SYMMETRY_TOL {
                    let reason = format!("station {} sees the remote transform", m + 1);
                    return Ok(underived(reason, checks, born));
                }
                credences.push((station_label(m + 1), frac(1)));
            }
            Ok(StationCredences {
                status: CredenceStatus::Derived,
                credences,
                undetermined,
                checks,
                born,
            })
        }
    }
}

#[cfg(test)]
mod tests;
