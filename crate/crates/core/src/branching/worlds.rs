//! Discretized position-space model of the three-branch mixed multiverse.
//!
//! A subsystem lives on an `n`-point grid `x`; the environment `y` is
//! compressed to four orthonormal records `{ready, A, B, C}`. Packets are
//! compact sine bumps: a one-site shift of a width-`w` bump keeps overlap
//! `cos(π/(w+1))`, while bumps on disjoint sites have overlap exactly zero.

use std::collections::BTreeMap;

use num_rational::Ratio;

use super::MacrostatePartition;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hilbert::{apply_unitary, DensityMatrix, Ket, SubsystemLayout, Unitary};
use crate::linalg;

pub const RECORDS: [&str; 4] = ["ready", "A", "B", "C"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub packet_width: usize,
    /// Microscopic displacement δ in grid sites.
    pub shift: usize,
    /// Upper bound on |⟨A|B⟩| for macroscopically disjoint packets.
    pub eps_mac: f64,
    /// |⟨A|A_δ⟩| must exceed `1 - eps_micro`.
    pub eps_micro: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 32,
            packet_width: 10,
            shift: 1,
            eps_mac: 1e-6,
            eps_micro: 0.05,
        }
    }
}

/// Packets, records, measurement interaction and partitions of the model.
#[derive(Debug, Clone)]
pub struct ThreeBranchWorld {
    pub grid: GridSpec,
    pub layout: SubsystemLayout,
    pub a: Ket,
    pub a_delta: Ket,
    pub b: Ket,
    pub c: Ket,
    /// Region record (index into [`RECORDS`]) of every grid site.
    pub regions: Vec<usize>,
    pub measurement: Unitary,
}

fn bump(points: usize, start: usize, width: usize) -> Result<Ket> {
    let mut amps = vec![0.0; points];
    for j in 0..width {
        amps[start + j] = (std::f64::consts::PI * (j + 1) as f64 / (width + 1) as f64).sin();
    }
    Ket::from_real(&amps)
}

impl ThreeBranchWorld {
    pub fn new(grid: GridSpec) -> Result<Self> {
        let GridSpec {
            points: n,
            packet_width: w,
            shift,
            ..
        } = grid;
        if w == 0 || shift == 0 {
            return Err(Error::param("packet width and shift must be positive"));
        }
        let b_start = shift + w;
        let c_start = b_start + w;
        if c_start + w > n {
            return Err(Error::Construction(format!(
                "grid of {n} points cannot hold packets of width {w} with shift {shift}"
            )));
        }
        let a = bump(n, 0, w)?;
        let a_delta = bump(n, shift, w)?;
        let b = bump(n, b_start, w)?;
        let c = bump(n, c_start, w)?;

        let micro = a.inner(&a_delta).norm();
        if micro <= 1.0 - grid.eps_micro {
            return Err(Error::Construction(format!(
                "|<A|A_δ>| = {micro:.6} does not exceed 1 - {}",
                grid.eps_micro
            )));
        }
        for (x, y, name) in [(&a, &b, "A/B"), (&a, &c, "A/C"), (&b, &c, "B/C"), (&a_delta, &c, "A_δ/C")] {
            let mac = x.inner(y).norm();
            if mac >= grid.eps_mac {
                return Err(Error::Construction(format!(
                    "{name} overlap {mac:e} is not below {}",
                    grid.eps_mac
                )));
            }
        }

        let regions: Vec<usize> = (0..n)
            .map(|k| if k < b_start { 1 } else if k < c_start { 2 } else { 3 })
            .collect();
        let layout = SubsystemLayout::new([("x", n), ("y", RECORDS.len())])?;
        // |k⟩|ready⟩ ↔ |k⟩|φ^{region(k)}⟩
        let env = RECORDS.len();
        let mut perm: Vec<usize> = (0..n * env).collect();
        for (k, &r) in regions.iter().enumerate() {
            perm.swap(k * env, k * env + r);
        }
        let measurement = Unitary::permutation(&perm)?;
        Ok(ThreeBranchWorld {
            grid,
            layout,
            a,
            a_delta,
            b,
            c,
            regions,
            measurement,
        })
    }

    pub fn record(&self, name: &str) -> Ket {
        let i = RECORDS.iter().position(|r| *r == name).expect("known record");
        Ket::basis(RECORDS.len(), i)
    }

    /// Overlap ⟨A|A_δ⟩ of the two microscopically distinct A packets.
    pub fn micro_overlap(&self) -> f64 {
        self.a.inner(&self.a_delta).re
    }

    fn superpose(&self, p: &Ket, q: &Ket, rp: &str, rq: &str) -> Ket {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = p.tensor(&self.record(rp)).amplitudes() * linalg::r(s)
            + q.tensor(&self.record(rq)).amplitudes() * linalg::r(s);
        Ket::from_vector_unchecked(v)
    }

    /// `Ψ₂` before measurement: `(A + B)/√2 ⊗ ready`.
    pub fn psi2_t1(&self) -> Ket {
        self.superpose(&self.a, &self.b, "ready", "ready")
    }

    /// `Ψ₃` before measurement: `(A_δ + C)/√2 ⊗ ready`.
    pub fn psi3_t1(&self) -> Ket {
        self.superpose(&self.a_delta, &self.c, "ready", "ready")
    }

    /// `Ψ₂` after measurement, written down directly.
    pub fn psi2_t2(&self) -> Ket {
        self.superpose(&self.a, &self.b, "A", "B")
    }

    /// `Ψ₃` after measurement, written down directly.
    pub fn psi3_t2(&self) -> Ket {
        self.superpose(&self.a_delta, &self.c, "A", "C")
    }

    pub fn rho2_t1(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.psi2_t1())
    }

    pub fn rho3_t1(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.psi3_t1())
    }

    /// Equal mixture of `ρ₂` and `ρ₃` before measurement.
    pub fn rho_t1(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        DensityMatrix::mixture(&[(0.5, &self.rho2_t1()), (0.5, &self.rho3_t1())], tol)
    }

    pub fn evolve(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply_unitary(rho, &self.measurement)
    }

    pub fn rho2_t2(&self) -> Result<DensityMatrix> {
        self.evolve(&self.rho2_t1())
    }

    pub fn rho3_t2(&self) -> Result<DensityMatrix> {
        self.evolve(&self.rho3_t1())
    }

    pub fn rho_t2(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        self.evolve(&self.rho_t1(tol)?)
    }

    /// Macrostates by environment record: `ready`, `A`, `B`, `C`.
    pub fn coarse_partition(&self) -> Result<MacrostatePartition> {
        let labels: Vec<&str> = (0..self.layout.dim())
            .map(|i| RECORDS[self.layout.digits(i)[1]])
            .collect();
        MacrostatePartition::from_basis_labels(&labels)
    }

    /// The coarse partition with the `A` record sector split into the ray of
    /// `A(x)φ^A` (`A1`) and its orthogonal complement (`A2`).
    pub fn fine_partition(&self, tol: &Tolerances) -> Result<MacrostatePartition> {
        let coarse = self.coarse_partition()?;
        let mut projectors = Vec::new();
        for (label, p) in coarse.projectors() {
            if label == "A" {
                let ray = linalg::outer(self.a.tensor(&self.record("A")).amplitudes());
                projectors.push(("A1".to_string(), ray.clone()));
                projectors.push(("A2".to_string(), p - ray));
            } else {
                projectors.push((label.clone(), p.clone()));
            }
        }
        MacrostatePartition::new(projectors, tol)
    }

    /// Coarsening that undoes [`Self::fine_partition`].
    pub fn fine_to_coarse() -> BTreeMap<String, String> {
        [("ready", "ready"), ("A1", "A"), ("A2", "A"), ("B", "B"), ("C", "C")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }
}

/// (mixture weight, [(squared amplitude, macrostate)]).
pub type MixtureTerm<'a> = (Ratio<i64>, Vec<(Ratio<i64>, &'a str)>);

/// Macrostate weights read off a mixture of equal-amplitude superpositions.
pub fn structural_weights(components: &[MixtureTerm<'_>]) -> BTreeMap<String, Ratio<i64>> {
    let mut out = BTreeMap::new();
    for (w, terms) in components {
        for (a, label) in terms {
            *out.entry(label.to_string()).or_insert_with(|| Ratio::from_integer(0)) += w * a;
        }
    }
    out
}

/// The structural description of the mixed post-measurement state.
pub fn three_branch_structure() -> BTreeMap<String, Ratio<i64>> {
    let half = Ratio::new(1, 2);
    structural_weights(&[
        (half, vec![(half, "A"), (half, "B")]),
        (half, vec![(half, "A"), (half, "C")]),
    ])
}

/// Pure two-branch state `(A φ_A + B φ_B)/√2` on a two-site subsystem with
/// pointer records of overlap `⟨φ_A|φ_B⟩ = s`. Layout `x(2) ⊗ y(2)`.
pub fn two_branch_with_overlap(s: f64) -> Result<(SubsystemLayout, DensityMatrix)> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::param(format!("pointer overlap {s} outside [0, 1]")));
    }
    let layout = SubsystemLayout::new([("x", 2), ("y", 2)])?;
    let phi_a = Ket::basis(2, 0);
    let phi_b = Ket::from_real(&[s, (1.0 - s * s).max(0.0).sqrt()])?;
    let a = Ket::basis(2, 0);
    let b = Ket::basis(2, 1);
    let v = (a.tensor(&phi_a).amplitudes() + b.tensor(&phi_b).amplitudes())
        * linalg::r(std::f64::consts::FRAC_1_SQRT_2);
    Ok((layout, DensityMatrix::pure(&Ket::from_vector_unchecked(v))))
}

/// Position partition `{A, B}` of the two-site subsystem.
pub fn two_site_partition() -> Result<MacrostatePartition> {
    MacrostatePartition::from_basis_labels(&["A", "B"])
}

