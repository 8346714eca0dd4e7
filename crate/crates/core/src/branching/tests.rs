use std::collections::BTreeMap;

use num_rational::Ratio;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::worlds::{self, GridSpec, ThreeBranchWorld};
use super::*;
use crate::hilbert::{apply_unitary, partial_trace, Unitary};
use crate::linalg::{kron, random_density, random_unitary, CMatrix};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

#[test]
fn two_branch_pure_state_has_half_weights() {
    let w = ThreeBranchWorld::new(GridSpec::default()).unwrap();
    let rho = w.rho2_t2().unwrap();
    let dec = decompose(&rho, &w.coarse_partition().unwrap(), &tol()).unwrap();
    assert_eq!(dec.len(), 2);
    assert!((dec.weight("A").unwrap() - 0.5).abs() < 1e-12);
    assert!((dec.weight("B").unwrap() - 0.5).abs() < 1e-12);
    // the measured state is the one written down directly
    let direct = DensityMatrix::pure(&w.psi2_t2());
    assert!(rho.max_abs_diff(&direct) < 1e-14);
    // each branch is pure
    for b in &dec.branches {
        assert!((purity(&b.state) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mixed_multiverse_has_three_branches() {
    let w = ThreeBranchWorld::new(GridSpec::default()).unwrap();
    let rho = w.rho_t2(&tol()).unwrap();
    let dec = decompose(&rho, &w.coarse_partition().unwrap(), &tol()).unwrap();
    let labels: Vec<&str> = dec.branches.iter().map(|b| b.label.as_str()).collect();
    assert_eq!(labels, ["A", "B", "C"]);
    let expected = worlds::three_branch_structure();
    for b in &dec.branches {
        let exact = expected[&b.label];
        let exact = *exact.numer() as f64 / *exact.denom() as f64;
        assert!((b.weight - exact).abs() < 1e-12, "{}: {}", b.label, b.weight);
    }
    assert_eq!(expected["A"], Ratio::new(1, 2));

    // A-branch state = ½(A A† + A_δ A_δ†) ⊗ φ^A φ^A†, mixed
    let a = w.a.amplitudes();
    let ad = w.a_delta.amplitudes();
    let sys = (a * a.adjoint() + ad * ad.adjoint()).map(|z| z * 0.5);
    let env = CMatrix::from_fn(4, 4, |i, j| if i == 1 && j == 1 { linalg::ONE } else { linalg::ZERO });
    let oracle = kron(&sys, &env);
    let branch = &dec.branches[0];
    assert!(linalg::max_abs_diff(branch.state.matrix(), &oracle) < 1e-13);
    let s = w.micro_overlap();
    assert!((purity(&branch.state) - (0.5 + 0.5 * s * s)).abs() < 1e-12);
    assert!(purity(&branch.state) < 1.0 - 1e-3);
}

#[test]
fn fine_partition_counts_four_branches() {
    let w = ThreeBranchWorld::new(GridSpec::default()).unwrap();
    let rho = w.rho_t2(&tol()).unwrap();
    let fine = w.fine_partition(&tol()).unwrap();
    let dec = decompose(&rho, &fine, &tol()).unwrap();
    assert_eq!(dec.len(), 4);
    let s2 = w.micro_overlap().powi(2);
    assert!((dec.weight("A1").unwrap() - (1.0 + s2) / 4.0).abs() < 1e-12);
    assert!((dec.weight("A2").unwrap() - (1.0 - s2) / 4.0).abs() < 1e-12);

    let coarse = merge_macrostates(&fine, &ThreeBranchWorld::fine_to_coarse(), &tol()).unwrap();
    let merged = decompose(&rho, &coarse, &tol()).unwrap();
    assert_eq!(merged.len(), 3);
    assert!((merged.weight("A").unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn grid_constraints_are_checked() {
    let w = ThreeBranchWorld::new(GridSpec::default()).unwrap();
    assert!((w.micro_overlap() - (std::f64::consts::PI / 11.0).cos()).abs() < 1e-12);
    assert_eq!(w.a.inner(&w.b).norm(), 0.0);
    let too_small = GridSpec {
        points: 20,
        ..GridSpec::default()
    };
    assert!(matches!(ThreeBranchWorld::new(too_small), Err(Error::Construction(_))));
    let coarse_shift = GridSpec {
        shift: 3,
        points: 40,
        ..GridSpec::default()
    };
    assert!(matches!(ThreeBranchWorld::new(coarse_shift), Err(Error::Construction(_))));
}

#[test]
fn merge_of_four_microstates() {
    let rho = DensityMatrix::diagonal(&[0.25; 4], &tol()).unwrap();
    let part = MacrostatePartition::from_basis_labels(&["A1", "A2", "B", "C"]).unwrap();
    let c = map(&[("A1", "A"), ("A2", "A"), ("B", "B"), ("C", "C")]);
    let merged = merge_macrostates(&part, &c, &tol()).unwrap();
    assert_eq!(merged.len(), 3);
    let dec = decompose(&rho, &merged, &tol()).unwrap();
    assert_eq!(dec.weights(), BTreeMap::from([("A".into(), 0.5), ("B".into(), 0.25), ("C".into(), 0.25)]));
}

#[test]
fn identity_and_total_coarsening() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = DensityMatrix::new(random_density(&mut rng, 4), &tol()).unwrap();
    let part = MacrostatePartition::from_basis_labels(&["a", "b", "b", "c"]).unwrap();
    let same = merge_macrostates(&part, &map(&[("a", "a"), ("b", "b"), ("c", "c")]), &tol()).unwrap();
    assert_eq!(same, part);

    let all = merge_macrostates(&part, &map(&[("a", "u"), ("b", "u"), ("c", "u")]), &tol()).unwrap();
    let dec = decompose(&rho, &all, &tol()).unwrap();
    assert_eq!(dec.len(), 1);
    assert!((dec.branches[0].weight - 1.0).abs() < 1e-12);
    assert!(dec.branches[0].state.max_abs_diff(&rho) < 1e-14);
    assert_eq!(dec.ct_norm, 0.0);

    let missing = merge_macrostates(&part, &map(&[("a", "u")]), &tol());
    assert!(matches!(missing, Err(Error::Partition(_))));
}

#[test]
fn block_diagonal_state_has_zero_ct() {
    let rho = DensityMatrix::diagonal(&[0.5, 0.3, 0.2], &tol()).unwrap();
    let part = MacrostatePartition::from_basis_labels(&["x", "y", "x"]).unwrap();
    assert_eq!(ct_norm(&rho, &part).unwrap(), 0.0);
}

#[test]
fn ct_norm_increases_with_pointer_overlap() {
    let part = worlds::two_site_partition().unwrap();
    let mut last = -1.0;
    for k in 1..20 {
        let s = k as f64 / 20.0;
        let (layout, rho) = worlds::two_branch_with_overlap(s).unwrap();
        let sys = partial_trace(&rho, &layout, &["x"]).unwrap();
        let ct = ct_norm(&sys, &part).unwrap();
        // hand-built: off-block entries ½ s at (0,1) and (1,0)
        let oracle = (2.0 * (0.5 * s) * (0.5 * s)).sqrt();
        assert!((ct - oracle).abs() < 1e-12);
        assert!(ct > last);
        last = ct;
    }
}

#[test]
fn ct_norm_vanishes_after_full_dephasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rho = DensityMatrix::new(random_density(&mut rng, 6), &tol()).unwrap();
    let part = MacrostatePartition::from_basis_labels(&["a", "b", "a", "c", "b", "c"]).unwrap();
    let dephased = DensityMatrix::new(pinch(&rho, &part), &tol()).unwrap();
    assert!(ct_norm(&dephased, &part).unwrap() < 1e-12);
    assert!(ct_norm(&rho, &part).unwrap() > 1e-3);
}

#[test]
fn trace_norm_alternative() {
    // off-block part [[0, x], [x, 0]] has eigenvalues ±x
    let m = CMatrix::from_row_slice(2, 2, &[linalg::r(0.5), linalg::r(0.3), linalg::r(0.3), linalg::r(0.5)]);
    let rho = DensityMatrix::new(m, &tol()).unwrap();
    let part = MacrostatePartition::from_basis_labels(&["a", "b"]).unwrap();
    assert!((ct_norm_with(&rho, &part, CtNorm::Trace).unwrap() - 0.6).abs() < 1e-12);
    assert!((ct_norm(&rho, &part).unwrap() - (0.18f64).sqrt()).abs() < 1e-12);
}

#[test]
fn dense_partition_is_validated() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CMatrix::from_element(2, 2, linalg::r(0.5));
    let minus = CMatrix::from_row_slice(2, 2, &[linalg::r(0.5), linalg::r(-0.5), linalg::r(-0.5), linalg::r(0.5)]);
    let part = MacrostatePartition::new(vec![("+".into(), plus.clone()), ("-".into(), minus)], &tol()).unwrap();
    assert!(part.basis_assignment().is_none());
    let rho = DensityMatrix::pure(&crate::hilbert::Ket::from_real(&[h, h]).unwrap());
    let dec = decompose(&rho, &part, &tol()).unwrap();
    assert_eq!(dec.len(), 1);
    assert!(dec.ct_norm < 1e-15);

    let overlap = MacrostatePartition::new(vec![("p".into(), plus.clone()), ("q".into(), plus)], &tol());
    assert!(matches!(overlap, Err(Error::Partition(_))));
    let incomplete = MacrostatePartition::from_basis_labels::<&str>(&[]);
    assert!(incomplete.is_err());
    let wrong = MacrostatePartition::from_basis_labels(&["a", "b"]).unwrap();
    let rho3 = DensityMatrix::maximally_mixed(3);
    assert!(matches!(decompose(&rho3, &wrong, &tol()), Err(Error::Partition(_))));
}

#[test]
fn tiny_branches_are_omitted() {
    let rho = DensityMatrix::diagonal(&[1.0 - 1e-14, 1e-14], &tol()).unwrap();
    let part = MacrostatePartition::from_basis_labels(&["a", "b"]).unwrap();
    let dec = decompose(&rho, &part, &tol()).unwrap();
    assert_eq!(dec.len(), 1);
    assert!((dec.omitted_weight - 1e-14).abs() < 1e-20);
}

#[test]
fn report_shows_fractions() {
    assert_eq!(nearest_fraction(0.25, 64, 1e-9).as_deref(), Some("1/4"));
    assert_eq!(nearest_fraction(1.0, 64, 1e-9).as_deref(), Some("1"));
    assert_eq!(nearest_fraction(0.3 + 1e-6, 64, 1e-9), None);
    let rho = DensityMatrix::diagonal(&[0.5, 0.25, 0.25], &tol()).unwrap();
    let part = MacrostatePartition::from_basis_labels(&["A", "B", "C"]).unwrap();
    let report = BranchReport::new(&decompose(&rho, &part, &tol()).unwrap());
    let text = report.to_string();
    assert!(text.contains("1/2") && text.contains("1/4"));
    assert_eq!(report.rows.len(), 3);
}

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed_b4a2),
        failure_persistence: None,
        ..Config::default()
    }
}

fn random_partition(dim: usize, blocks: usize, seed: u64) -> (Vec<String>, MacrostatePartition) {
    let labels: Vec<String> = (0..dim)
        .map(|i| format!("m{}", (i as u64 * 7 + seed) % blocks as u64))
        .collect();
    let part = MacrostatePartition::from_basis_labels(&labels).unwrap();
    (labels, part)
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn block_traces_sum_to_one(seed in any::<u64>(), dim in 2usize..7, blocks in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::new(random_density(&mut rng, dim), &tol()).unwrap();
        let (_, part) = random_partition(dim, blocks.min(dim), seed);
        let t = Tolerances { branch: -1.0, ..tol() };
        let dec = decompose(&rho, &part, &t).unwrap();
        let total: f64 = dec.branches.iter().map(|b| b.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn refinement_then_coarsening(seed in any::<u64>(), dim in 3usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::new(random_density(&mut rng, dim), &tol()).unwrap();
        let (_, fine) = random_partition(dim, dim.min(4), seed);
        let c: BTreeMap<String, String> = fine
            .labels()
            .map(|l| (l.to_string(), if l == "m0" || l == "m1" { "lo".into() } else { "hi".into() }))
            .collect();
        let coarse = merge_macrostates(&fine, &c, &tol()).unwrap();
        let t = Tolerances { branch: -1.0, ..tol() };
        let fw = decompose(&rho, &fine, &t).unwrap().weights();
        let cw = decompose(&rho, &coarse, &t).unwrap().weights();
        let mut grouped: BTreeMap<String, f64> = BTreeMap::new();
        for (l, w) in fw {
            *grouped.entry(c[&l].clone()).or_default() += w;
        }
        prop_assert_eq!(grouped.len(), cw.len());
        for (l, w) in grouped {
            prop_assert!((w - cw[&l]).abs() < 1e-10);
        }
    }

    #[test]
    fn block_preserving_unitary_keeps_weights(seed in any::<u64>()) {
        // blocks of sizes 2 and 3 on a 5-dim space
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::new(random_density(&mut rng, 5), &tol()).unwrap();
        let part = MacrostatePartition::from_basis_labels(&["p", "p", "q", "q", "q"]).unwrap();
        let u1 = random_unitary(&mut rng, 2);
        let u2 = random_unitary(&mut rng, 3);
        let mut u = CMatrix::zeros(5, 5);
        u.view_mut((0, 0), (2, 2)).copy_from(&u1);
        u.view_mut((2, 2), (3, 3)).copy_from(&u2);
        let u = Unitary::new(u, &tol()).unwrap();
        let after = apply_unitary(&rho, &u).unwrap();
        let w0 = decompose(&rho, &part, &tol()).unwrap().weights();
        let w1 = decompose(&after, &part, &tol()).unwrap().weights();
        for (l, w) in w0 {
            prop_assert!((w - w1[&l]).abs() < 1e-10);
        }
    }
}
