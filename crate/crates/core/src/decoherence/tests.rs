use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::branching::decompose;
use crate::hilbert::{apply_unitary, partial_trace, spectrum};
use crate::linalg::{c, r, random_density, random_ket, ZERO};

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn overlap_decay_values() {
    assert_eq!(overlap_decay(DecayParams::new(1.0, 0.0).unwrap()), 1.0);
    let tau = 2.5;
    let v = overlap_decay(DecayParams::new(tau, tau).unwrap());
    assert!((v - 0.36787944117144233).abs() < 1e-15);
    assert!(overlap_decay(DecayParams::new(tau, 10.0 * tau).unwrap()) < 5e-5);
    assert!(DecayParams::new(0.0, 1.0).is_err());
    assert!(DecayParams::new(1.0, -1.0).is_err());
}

fn qubit_map(e1: Ket, e2: Ket) -> PointerMap {
    PointerMap::from_pairs([("S1", e1), ("S2", e2)]).unwrap()
}

#[test]
fn premeasurement_correlates_two_outcomes() {
    let layout = SubsystemLayout::new([("S", 2), ("E", 3)]).unwrap();
    let ready = Ket::basis(3, 0);
    let pm = qubit_map(Ket::basis(3, 1), Ket::basis(3, 2));
    let u = premeasurement_unitary(&layout, &pm, &ready, &tol()).unwrap();
    let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
    let input = Ket::new(
        (Ket::basis(2, 0).tensor(&ready).amplitudes() * a + Ket::basis(2, 1).tensor(&ready).amplitudes() * b)
            .iter()
            .copied()
            .collect(),
        &tol(),
    )
    .unwrap();
    let out = u.apply_ket(&input).unwrap();
    // a|S1⟩|E1⟩ + b|S2⟩|E2⟩: indices 0*3+1 and 1*3+2
    let mut expected = vec![ZERO; 6];
    expected[1] = a;
    expected[5] = b;
    for (x, y) in out.amplitudes().iter().zip(&expected) {
        assert!((x - y).norm() < 1e-14);
    }
    assert!(u.residual() < 1e-12);
}

#[test]
fn single_outcome_is_identity_on_ready() {
    let layout = SubsystemLayout::new([("S", 1), ("E", 2)]).unwrap();
    let ready = Ket::basis(2, 0);
    let pm = PointerMap::from_pairs([("only", ready.clone())]).unwrap();
    let u = premeasurement_unitary(&layout, &pm, &ready, &tol()).unwrap();
    assert!(linalg::max_abs_diff(u.matrix(), &CMatrix::identity(2, 2)) < 1e-14);
}

#[test]
fn dependent_pointer_states_rejected() {
    let layout = SubsystemLayout::new([("S", 2), ("E", 2)]).unwrap();
    let pm = qubit_map(Ket::basis(2, 1), Ket::basis(2, 1));
    let err = premeasurement_unitary(&layout, &pm, &Ket::basis(2, 0), &tol());
    assert!(matches!(err, Err(Error::Construction(_))));
    let small = SubsystemLayout::new([("S", 3), ("E", 2)]).unwrap();
    let pm3 = PointerMap::from_pairs([
        ("a", Ket::basis(2, 0)),
        ("b", Ket::basis(2, 1)),
        ("c", Ket::from_real(&[1.0, 1.0]).unwrap()),
    ])
    .unwrap();
    assert!(matches!(
        premeasurement_unitary(&small, &pm3, &Ket::basis(2, 0), &tol()),
        Err(Error::Construction(_))
    ));
}

#[test]
fn premeasurement_of_ready_state_gives_two_decohered_branches() {
    // electron(2) ⊗ [D1(2) ⊗ E(2)], electron in |↓_x⟩, records |↑↑⟩ and |↓↓⟩
    let layout = SubsystemLayout::new([("e", 2), ("D1", 2), ("E", 2)]).unwrap();
    let ready = Ket::basis(4, 0);
    let pm = PointerMap::from_pairs([("up", Ket::basis(4, 0)), ("down", Ket::basis(4, 3))]).unwrap();
    let u = premeasurement_unitary(&layout, &pm, &ready, &tol()).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let down_x = Ket::from_real(&[h, -h]).unwrap();
    let rho_r = DensityMatrix::pure(&down_x.tensor(&ready));
    let rho = apply_unitary(&rho_r, &u).unwrap();

    // explicit: ½ [|↑↑↑⟩⟨↑↑↑| + |↓↓↓⟩⟨↓↓↓|] + c.t.
    let upup = Ket::basis(8, 0).amplitudes().clone();
    let dndn = Ket::basis(8, 7).amplitudes().clone();
    let psi = (&upup - &dndn) * r(h);
    assert!(linalg::max_abs_diff(rho.matrix(), &linalg::outer(&psi)) < 1e-14);

    let part = MacrostatePartition::on_factor(
        &layout,
        "D1",
        &MacrostatePartition::from_basis_labels(&["up", "down"]).unwrap(),
        &tol(),
    )
    .unwrap();
    let dec = decompose(&rho, &part, &tol()).unwrap();
    assert_eq!(dec.len(), 2);
    let diag_up = linalg::outer(&upup);
    let diag_dn = linalg::outer(&dndn);
    assert!((dec.branches[0].weight - 0.5).abs() < 1e-14);
    assert!((dec.branches[1].weight - 0.5).abs() < 1e-14);
    assert!(linalg::max_abs_diff(dec.branches[0].state.matrix(), &diag_up) < 1e-14);
    assert!(linalg::max_abs_diff(dec.branches[1].state.matrix(), &diag_dn) < 1e-14);
}

#[test]
fn spin_bath_overlap_edge_cases() {
    assert_eq!(spin_bath_overlap(0, &[], 3.0).unwrap(), r(1.0));
    let t = 0.7;
    let g = std::f64::consts::PI / (2.0 * t);
    assert!(spin_bath_overlap(1, &[g], t).unwrap().norm() < 1e-15);
    assert!(spin_bath_overlap(2, &[1.0], t).is_err());
}

#[test]
fn spin_bath_overlap_matches_factorwise_product_states() {
    let bath = SpinBath::random(20, 0.5, 1.5, 20);
    let t = 1.0;
    let up = bath.spin_states(t, 0);
    let down = bath.spin_states(t, 1);
    // ⟨E_1|E_2⟩ = Π_k ⟨e_k^1|e_k^2⟩ without forming the 2^20 vectors
    let oracle: num_complex::Complex64 = up
        .iter()
        .zip(&down)
        .map(|(a, b)| a[0].conj() * b[0] + a[1].conj() * b[1])
        .product();
    let v = spin_bath_overlap(20, &bath.couplings, t).unwrap();
    assert!((v - oracle).norm() < 1e-14, "{v} vs {oracle}");
}

#[test]
fn explicit_bath_evolution_reproduces_subsystem_interference() {
    let bath = SpinBath::random(6, 0.5, 1.5, 4);
    let t = 0.9;
    let u = bath.evolution(t, &tol()).unwrap();
    let (a, b) = (0.6, 0.8);
    let sys = Ket::from_real(&[a, b]).unwrap();
    let rho = DensityMatrix::pure(&sys.tensor(&bath.initial_bath()));
    let after = apply_unitary(&rho, &u).unwrap();
    let layout = SubsystemLayout::new([("S", 2), ("bath", 64)]).unwrap();
    let rs = partial_trace(&after, &layout, &["S"]).unwrap();
    let overlap = bath.overlap(t);
    assert!((rs.matrix()[(0, 0)] - r(a * a)).norm() < 1e-13);
    assert!((rs.matrix()[(1, 1)] - r(b * b)).norm() < 1e-13);
    assert!((rs.matrix()[(0, 1)] - r(a * b * overlap)).norm() < 1e-13);
    let too_big = SpinBath::random(13, 0.5, 1.5, 0);
    assert!(matches!(too_big.evolution(t, &tol()), Err(Error::Capacity { .. })));
}

#[test]
fn decay_fit_on_thirty_spin_bath() {
    let bath = SpinBath::random(30, 0.5, 1.5, 30);
    let curve = DecayCurve::from_bath(&bath).unwrap();
    assert!(curve.fit.r_squared >= 0.9, "R² = {}", curve.fit.r_squared);
    assert!(curve.fit.tau_d > 0.0);
    let mut buf = Vec::new();
    curve.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("t,overlap,fitted_tau_d"));
    assert_eq!(text.lines().count(), curve.samples.len() + 1);
}

#[test]
fn decay_fit_recovers_a_pure_exponential() {
    let fit = fit_exponential_envelope(&|t: f64| 0.8 * (-t / 1.7).exp()).unwrap();
    assert!((fit.tau_d - 1.7).abs() < 1e-6);
    assert!((fit.amplitude - 0.8).abs() < 1e-6);
    assert!(fit.r_squared > 1.0 - 1e-10);
}

#[test]
fn dephase_examples() {
    let (a, b) = (0.6, 0.8);
    let rho_s = DensityMatrix::pure(&Ket::from_real(&[a, b]).unwrap());
    let part = MacrostatePartition::from_basis_labels(&["S1", "S2"]).unwrap();
    assert_eq!(dephase(&rho_s, &part, 1.0).unwrap(), rho_s);
    let eq5 = dephase(&rho_s, &part, 0.0).unwrap();
    let oracle = DensityMatrix::diagonal(&[a * a, b * b], &tol()).unwrap();
    assert!(eq5.max_abs_diff(&oracle) < 1e-15);
    assert!(dephase(&rho_s, &part, 1.5).is_err());
    assert!(dephase(&rho_s, &part, -0.1).is_err());
}

#[test]
fn dephase_scales_off_blocks_by_hand() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let rho = DensityMatrix::new(random_density(&mut rng, 5), &tol()).unwrap();
    let labels = ["x", "y", "x", "y", "y"];
    let part = MacrostatePartition::from_basis_labels(&labels).unwrap();
    let decay = overlap_decay(DecayParams::new(1.0, 3.0).unwrap());
    let out = dephase(&rho, &part, decay).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let factor = if labels[i] == labels[j] { 1.0 } else { (-3.0f64).exp() };
            let want = rho.matrix()[(i, j)] * factor;
            assert!((out.matrix()[(i, j)] - want).norm() < 1e-12);
        }
    }
}

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0xdec0_4e4e),
        failure_persistence: None,
        ..Config::default()
    }
}

fn random_labels(rng: &mut ChaCha8Rng, dim: usize, blocks: usize) -> Vec<String> {
    let mut labels: Vec<String> = (0..dim).map(|i| format!("m{}", i % blocks)).collect();
    for i in (1..dim).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    labels
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn dephase_preserves_trace_and_positivity(seed in any::<u64>(), dim in 2usize..8, blocks in 2usize..5, decay in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::new(random_density(&mut rng, dim), &tol()).unwrap();
        let labels = random_labels(&mut rng, dim, blocks.min(dim));
        let part = MacrostatePartition::from_basis_labels(&labels).unwrap();
        let out = dephase(&rho, &part, decay).unwrap();
        prop_assert!((out.trace() - r(1.0)).norm() < 1e-12);
        prop_assert!(*spectrum(&out, &tol()).last().unwrap() >= -1e-12);
        prop_assert!(DensityMatrix::new(out.matrix().clone(), &tol()).is_ok());
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn full_dephasing_is_idempotent(seed in any::<u64>(), dim in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::new(random_density(&mut rng, dim), &tol()).unwrap();
        let labels = random_labels(&mut rng, dim, 2);
        let part = MacrostatePartition::from_basis_labels(&labels).unwrap();
        let once = dephase(&rho, &part, 0.0).unwrap();
        let twice = dephase(&once, &part, 0.0).unwrap();
        prop_assert!(once.max_abs_diff(&twice) < 1e-15);
    }

    #[test]
    fn bath_overlap_shrinks_with_more_spins(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = 1.0;
        // g t ∈ (0, π/2)
        let g: Vec<f64> = (0..=n).map(|_| rng.random_range(0.01..1.57)).collect();
        let smaller = spin_bath_overlap(n, &g[..n], t).unwrap().norm();
        let larger = spin_bath_overlap(n + 1, &g, t).unwrap().norm();
        prop_assert!(larger <= smaller);
    }

    #[test]
    fn premeasurement_is_unitary_and_correlates(seed in any::<u64>(), labels in 1usize..4, extra in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = labels + extra;
        let layout = SubsystemLayout::new([("S", labels), ("E", env)]).unwrap();
        let pm = PointerMap::from_pairs(
            (0..labels).map(|n| (format!("s{n}"), Ket::new(random_ket(&mut rng, env).iter().copied().collect(), &tol()).unwrap())),
        ).unwrap();
        let ready = Ket::new(random_ket(&mut rng, env).iter().copied().collect(), &tol()).unwrap();
        let u = premeasurement_unitary(&layout, &pm, &ready, &tol()).unwrap();
        prop_assert!(u.residual() < 1e-10);
        for (n, e) in pm.ordered_states().enumerate() {
            let out = u.apply_ket(&Ket::basis(labels, n).tensor(&ready)).unwrap();
            let want = Ket::basis(labels, n).tensor(e);
            prop_assert!((out.amplitudes() - want.amplitudes()).norm() < 1e-10);
        }
    }
}
