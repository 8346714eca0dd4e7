//! Self-locating credences from the two-display and four-display set-ups.

use everett_dm::sebens_carroll::{solve_credences, table1, table2};
use everett_dm::Tolerances;

fn main() -> everett_dm::Result<()> {
    let tol = Tolerances::default();
    for (a, b) in [table1()?, table2()?] {
        let sol = solve_credences(&[a, b], &tol)?;
        println!("target {}", sol.target);
        for line in sol.chain_lines() {
            println!("  {line}");
        }
        for (branch, p) in &sol.branches {
            println!("  P({branch}) = {p}");
        }
        println!();
    }
    Ok(())
}
