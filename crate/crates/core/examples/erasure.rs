//! Erasure feasibility between density matrices, sectors, and the
//! equal-amplitude indifference instance.

use everett_dm::deutsch_wallace::{equivalence_demo, erasure_exists, sector_of};
use everett_dm::hilbert::{DensityMatrix, Ket};
use everett_dm::linalg::r;
use everett_dm::Tolerances;

fn main() -> everett_dm::Result<()> {
    let tol = Tolerances::default();
    let pure = DensityMatrix::pure(&Ket::basis(2, 0));
    let mixed = DensityMatrix::maximally_mixed(2);
    let v = erasure_exists(&pure, &mixed, &tol)?;
    println!("pure vs I/2: feasible = {}, spectral distance = {}", v.feasible, v.spectral_distance);
    println!("sectors: {} and {}", sector_of(&pure, &tol), sector_of(&mixed, &tol));

    let plus = DensityMatrix::pure(&Ket::from_real(&[1.0, 1.0])?);
    let v = erasure_exists(&pure, &plus, &tol)?;
    println!("|0⟩ vs |+⟩: feasible = {}, residual = {:?}", v.feasible, v.residual);

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let demo = equivalence_demo(r(h), r(h), &tol)?;
    println!(
        "α = β: states equal = {}, reward weights {:.3} / {:.3}, verdict {:?}",
        demo.states_equal, demo.reward_weight_a, demo.reward_weight_b, demo.verdict
    );
    Ok(())
}
