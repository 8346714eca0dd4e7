//! Record overlap of a qubit coupled to a random spin bath, with the fitted
//! exponential envelope. Pass `--csv` to dump the sampled curve.

use everett_dm::decoherence::{DecayCurve, SpinBath};

fn main() -> everett_dm::Result<()> {
    let bath = SpinBath::random(30, 0.5, 1.5, 7);
    let curve = DecayCurve::from_bath(&bath)?;
    let fit = curve.fit;
    println!("τ_d = {:.4}, A = {:.4}, R² = {:.4}", fit.tau_d, fit.amplitude, fit.r_squared);
    for k in 0..=5 {
        let t = k as f64 * fit.tau_d;
        println!("t = {k} τ_d  overlap = {:.3e}", bath.overlap(t).abs());
    }
    if std::env::args().any(|a| a == "--csv") {
        curve.write_csv(std::io::stdout())?;
    }
    Ok(())
}
