//! Couple a qubit to a pointer, then dephase its reduced state.

use everett_dm::branching::MacrostatePartition;
use everett_dm::decoherence::{dephase, premeasurement_unitary, PointerMap};
use everett_dm::hilbert::{partial_trace, DensityMatrix, Ket, SubsystemLayout};
use everett_dm::linalg::{c, r};
use everett_dm::Tolerances;

fn main() -> everett_dm::Result<()> {
    let tol = Tolerances::default();
    let layout = SubsystemLayout::new([("S", 2), ("E", 2)])?;

    // pointer records that still overlap by 0.5
    let e2 = Ket::from_real(&[0.5, 0.75f64.sqrt()])?;
    let pointers = PointerMap::from_pairs([("S1", Ket::basis(2, 0)), ("S2", e2)])?;
    let u = premeasurement_unitary(&layout, &pointers, &Ket::basis(2, 0), &tol)?;

    let system = Ket::new(vec![r(0.6), c(0.0, 0.8)], &tol)?;
    let after = u.apply_ket(&system.tensor(&Ket::basis(2, 0)))?;
    let rho_s = partial_trace(&DensityMatrix::pure(&after), &layout, &["S"])?;
    println!("ρ_S after premeasurement:\n{}", rho_s.matrix());

    let part = MacrostatePartition::from_basis_labels(&["S1", "S2"])?;
    for decay in [1.0, 0.5, 0.0] {
        let out = dephase(&rho_s, &part, decay)?;
        println!("decay {decay}: |ρ_12| = {:.4}", out.matrix()[(0, 1)].norm());
    }
    Ok(())
}
