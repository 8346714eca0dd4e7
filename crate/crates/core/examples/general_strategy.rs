//! Arbitrary rational weights from equal-weight diagonalization and
//! same-branch set-ups.

use everett_dm::sebens_carroll::{general_strategy_tables, rationalize, solve_credences};
use everett_dm::Tolerances;

fn main() -> everett_dm::Result<()> {
    let tol = Tolerances::default();
    let weights = rationalize(&[0.125, 0.375, 0.5], tol.max_denominator)?;
    let (alpha, beta) = general_strategy_tables(&weights, &tol)?;
    println!("{} columns per set-up", alpha.columns());
    let sol = solve_credences(&[alpha, beta], &tol)?;
    for (i, w) in weights.iter().enumerate() {
        let symbol = (i + 1).to_string();
        println!("outcome {symbol}: weight {w}, credence {}", sol.credence("α", &symbol).expect("determined"));
    }
    Ok(())
}
