//! A particle spread over three stations: symmetric credences, then a
//! remote merge of two packets.

use everett_dm::mcqueen_vaidman::{apply_remote, build_symmetric, derive_credences, measure_stations, RemoteTransform};
use everett_dm::Tolerances;

fn main() -> everett_dm::Result<()> {
    let tol = Tolerances::default();
    let s = build_symmetric(3, &tol)?;
    println!("dimension {}", s.layout().dim());

    let creds = derive_credences(&measure_stations(&s)?)?;
    for (label, p) in &creds.credences {
        println!("{label}: {p}");
    }

    let merged = apply_remote(&s, RemoteTransform::merge(&[1, 2])?)?;
    let creds = derive_credences(&measure_stations(&merged)?)?;
    println!("\nafter merging stations 2 and 3");
    for ((label, p), (_, w)) in creds.credences.iter().zip(&creds.born) {
        println!("{label}: credence {p}, weight {w:.6}");
    }
    Ok(())
}
