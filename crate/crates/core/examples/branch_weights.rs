//! Branches of the mixed three-branch state under coarse and fine
//! macrostate partitions.

use everett_dm::branching::worlds::{GridSpec, ThreeBranchWorld};
use everett_dm::branching::{decompose, merge_macrostates, BranchReport};
use everett_dm::Tolerances;

fn main() -> everett_dm::Result<()> {
    let tol = Tolerances::default();
    let world = ThreeBranchWorld::new(GridSpec::default())?;
    let rho = world.rho_t2(&tol)?;
    println!("|⟨A|A_δ⟩| = {:.6}\n", world.micro_overlap());

    let coarse = decompose(&rho, &world.coarse_partition()?, &tol)?;
    println!("coarse\n{}\n", BranchReport::new(&coarse));

    let fine_part = world.fine_partition(&tol)?;
    let fine = decompose(&rho, &fine_part, &tol)?;
    println!("fine\n{}\n", BranchReport::new(&fine));

    let merged = merge_macrostates(&fine_part, &ThreeBranchWorld::fine_to_coarse(), &tol)?;
    println!("fine, merged back\n{}", BranchReport::new(&decompose(&rho, &merged, &tol)?));
    Ok(())
}
