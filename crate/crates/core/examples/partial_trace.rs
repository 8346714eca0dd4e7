//! Reduced states, spectra and entropy of a two-qubit state.

use everett_dm::hilbert::{partial_trace, purity, spectrum, vn_entropy, DensityMatrix, Ket, SubsystemLayout};
use everett_dm::Tolerances;

fn main() -> everett_dm::Result<()> {
    let tol = Tolerances::default();
    let layout = SubsystemLayout::new([("S", 2), ("E", 2)])?;

    // cos θ |00⟩ + sin θ |11⟩
    let theta = 0.4f64;
    let psi = Ket::from_real(&[theta.cos(), 0.0, 0.0, theta.sin()])?;
    let rho = DensityMatrix::pure(&psi);

    let rho_s = partial_trace(&rho, &layout, &["S"])?;
    println!("spectrum of ρ_S: {:?}", spectrum(&rho_s, &tol));
    println!("purity of ρ_S:   {:.6}", purity(&rho_s));
    println!("entropy (bits):  {:.6}", vn_entropy(&rho_s, 2.0, &tol)?);
    println!("entropy of ρ:    {:.2e}", vn_entropy(&rho, 2.0, &tol)?);
    Ok(())
}
