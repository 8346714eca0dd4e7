use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::branching::worlds::three_branch_structure;
use crate::branching::Branch;
use crate::hilbert::vn_entropy;
use crate::linalg::{c, r};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn conjugate(d: &[f64], seed: u64) -> DensityMatrix {
    let u = Unitary::random(&mut rng(seed), d.len());
    apply_unitary(&DensityMatrix::diagonal(d, &tol()).unwrap(), &u).unwrap()
}

#[test]
fn pure_and_maximally_mixed_are_not_erasable() {
    let pure = DensityMatrix::pure(&Ket::basis(2, 0));
    let mixed = DensityMatrix::maximally_mixed(2);
    let v = erasure_exists(&pure, &mixed, &tol()).unwrap();
    assert!(!v.feasible);
    assert!((v.spectral_distance - 0.5).abs() < 1e-12);
    assert!(v.witnesses.is_none());
    assert!(matches!(
        construct_erasure(&pure, &mixed, &tol()),
        Err(Error::Infeasible { .. })
    ));
}

#[test]
fn identical_states_accept_identity_witnesses() {
    let rho = conjugate(&[0.6, 0.3, 0.1], 1);
    let v = erasure_exists(&rho, &rho, &tol()).unwrap();
    assert!(v.feasible && v.spectral_distance < 1e-12);
    let id = Unitary::identity(3);
    assert!(witness_residual(&rho, &rho, &id, &id).unwrap() < 1e-15);
    assert!(v.residual.unwrap() <= 1e-8);
}

#[test]
fn random_same_spectrum_pair() {
    let d = [0.5, 0.25, 0.15, 0.1];
    let (a, b) = (conjugate(&d, 2), conjugate(&d, 3));
    let v = erasure_exists(&a, &b, &tol()).unwrap();
    assert!(v.feasible);
    let (u, w) = v.witnesses.unwrap();
    assert!(witness_residual(&a, &b, &u, &w).unwrap() <= 1e-8);
    // both land on the sorted diagonal
    let target = DensityMatrix::diagonal(&d, &tol()).unwrap();
    assert!(apply_unitary(&a, &u).unwrap().max_abs_diff(&target) < 1e-10);
}

#[test]
fn rotated_maximally_mixed_frames() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let had = Unitary::new(CMatrix::from_row_slice(2, 2, &[r(h), r(h), r(h), r(-h)]), &tol()).unwrap();
    let in_pm = apply_unitary(&DensityMatrix::maximally_mixed(2), &had).unwrap();
    let (u, v) = construct_erasure(&in_pm, &DensityMatrix::maximally_mixed(2), &tol()).unwrap();
    let half = DensityMatrix::maximally_mixed(2);
    assert!(apply_unitary(&in_pm, &u).unwrap().max_abs_diff(&half) < 1e-14);
    assert!(apply_unitary(&half, &v).unwrap().max_abs_diff(&half) < 1e-14);
}

#[test]
fn degenerate_spectrum_witness() {
    let d = [0.4, 0.4, 0.2];
    let (a, b) = (conjugate(&d, 4), conjugate(&d, 5));
    let (u, v) = construct_erasure(&a, &b, &tol()).unwrap();
    assert!(witness_residual(&a, &b, &u, &v).unwrap() <= 1e-8);
}

#[test]
fn dimension_mismatch() {
    let a = DensityMatrix::maximally_mixed(2);
    let b = DensityMatrix::maximally_mixed(3);
    assert!(matches!(erasure_exists(&a, &b, &tol()), Err(Error::Layout(_))));
}

#[test]
fn equal_weights_give_identical_erased_states() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rep = equivalence_demo(r(h), r(h), &tol()).unwrap();
    assert!(rep.states_equal);
    assert_eq!(rep.verdict.as_deref(), Some("indifferent"));
    assert!((rep.reward_weight_a - 0.5).abs() < 1e-12);
    assert!((rep.reward_weight_b - 0.5).abs() < 1e-12);
    // the erased state is (|0⟩|reward⟩ + |1⟩|no reward⟩)/√2, indices 2s + r
    let expected = Ket::from_real(&[1.0, 0.0, 0.0, 1.0]).unwrap();
    assert!(rep.erased_a.state.max_abs_diff(&DensityMatrix::pure(&expected)) < 1e-12);
    assert_eq!(rep.erasures.len(), 4);
    // the reward branch of A holds |0⟩ after erasure
    let s = branch_system_state(&rep.erased_a, REWARD, &tol()).unwrap();
    assert!(s.max_abs_diff(&DensityMatrix::pure(&Ket::basis(2, 0))) < 1e-12);
}

#[test]
fn equal_magnitudes_with_a_relative_phase() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rep = equivalence_demo(r(h), c(0.0, h), &tol()).unwrap();
    assert!(rep.states_equal, "distance {}", rep.state_distance);
}

#[test]
fn certain_reward_and_certain_loss() {
    let rep = equivalence_demo(r(1.0), r(0.0), &tol()).unwrap();
    assert!((rep.reward_weight_a - 1.0).abs() < 1e-12);
    assert!(rep.reward_weight_b.abs() < 1e-12);
    assert!(!rep.states_equal && rep.verdict.is_none());
}

#[test]
fn unequal_weights_quarter_three_quarters() {
    let rep = equivalence_demo(r(0.5), r(3f64.sqrt() / 2.0), &tol()).unwrap();
    assert!((rep.reward_weight_a - 0.25).abs() < 1e-12);
    assert!((rep.reward_weight_b - 0.75).abs() < 1e-12);
    assert!(!rep.states_equal);
    assert!(rep.verdict.is_none());
    // reward blocks are rank one with traces ¼ and ¾
    assert!((rep.reward_block_distance - 0.5).abs() < 1e-12);
    // cross-check against a decomposition on the erased states
    let dec = rep.erased_b.branches(&tol()).unwrap();
    assert!((dec.weight(REWARD).unwrap() - 0.75).abs() < 1e-12);
    assert!(matches!(equivalence_demo(r(0.5), r(0.5), &tol()), Err(Error::Parameter(_))));
}

fn decomposition(weights: &[(&str, f64)]) -> BranchDecomposition {
    BranchDecomposition {
        branches: weights
            .iter()
            .map(|(l, w)| Branch {
                label: l.to_string(),
                weight: *w,
                state: DensityMatrix::maximally_mixed(1),
            })
            .collect(),
        ct_norm: 0.0,
        omitted_weight: 0.0,
    }
}

fn utilities(u: &[(&str, f64)]) -> BTreeMap<String, f64> {
    u.iter().map(|(l, v)| (l.to_string(), *v)).collect()
}

#[test]
fn expected_utility_examples() {
    let d = decomposition(&[("win", 0.5), ("lose", 0.5)]);
    assert_eq!(expected_utility(&d, &utilities(&[("win", 1.0), ("lose", 0.0)])).unwrap(), 0.5);

    let three = three_branch_structure();
    let d = decomposition(
        &three
            .iter()
            .map(|(l, w)| (l.as_str(), *w.numer() as f64 / *w.denom() as f64))
            .collect::<Vec<_>>(),
    );
    let u = utilities(&[("A", 0.0), ("B", 1.0), ("C", 1.0)]);
    assert!((expected_utility(&d, &u).unwrap() - 0.5).abs() < 1e-15);

    let single = decomposition(&[("only", 1.0)]);
    assert_eq!(expected_utility(&single, &utilities(&[("only", -2.5)])).unwrap(), -2.5);
    assert!(matches!(
        expected_utility(&single, &BTreeMap::new()),
        Err(Error::Domain(_))
    ));
}

#[test]
fn sectors() {
    let a = DensityMatrix::pure(&Ket::from_real(&[1.0, 2.0, 0.5]).unwrap());
    let b = DensityMatrix::pure(&Ket::basis(3, 2));
    assert_eq!(sector_of(&a, &tol()), sector_of(&b, &tol()));
    assert_eq!(sector_of(&a, &tol()).to_string(), "{1, 0, 0}");
    let q = DensityMatrix::pure(&Ket::basis(2, 0));
    assert_ne!(sector_of(&q, &tol()), sector_of(&DensityMatrix::maximally_mixed(2), &tol()));
    let (x, y) = (conjugate(&[0.7, 0.2, 0.1], 8), conjugate(&[0.7, 0.2, 0.1], 9));
    assert_eq!(sector_of(&x, &tol()), sector_of(&y, &tol()));
    assert!(erasure_exists(&x, &y, &tol()).unwrap().feasible);
}

#[test]
fn rewarded_state_validation() {
    let layout = SubsystemLayout::new([("S", 2), ("R", 3)]).unwrap();
    let part = MacrostatePartition::from_basis_labels(&[REWARD, NO_REWARD]).unwrap();
    let err = RewardedState::new(DensityMatrix::maximally_mixed(6), layout, "R", part);
    assert!(matches!(err, Err(Error::Partition(_))));
}

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0xe4a5e),
        failure_persistence: None,
        ..Config::default()
    }
}

fn spectrum_from(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn erasure_is_an_equivalence(raw in proptest::collection::vec(0.05f64..1.0, 3), s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let d = spectrum_from(&raw);
        let (a, b, c3) = (conjugate(&d, s1), conjugate(&d, s2), conjugate(&d, s3));
        let t = tol();
        prop_assert!(erasure_exists(&a, &a, &t).unwrap().feasible);
        let ab = erasure_exists(&a, &b, &t).unwrap();
        let ba = erasure_exists(&b, &a, &t).unwrap();
        prop_assert_eq!(ab.feasible, ba.feasible);
        prop_assert!(ab.feasible);
        let bc = erasure_exists(&b, &c3, &t).unwrap();
        let ac = erasure_exists(&a, &c3, &t).unwrap();
        prop_assert!(bc.feasible && ac.feasible);
        prop_assert!(ac.spectral_distance <= 3.0 * t.erasure);
        prop_assert!(ab.residual.unwrap() <= 1e-8);
    }

    #[test]
    fn sector_matches_erasure(raw1 in proptest::collection::vec(0.05f64..1.0, 3), raw2 in proptest::collection::vec(0.05f64..1.0, 3), same in any::<bool>(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let d1 = spectrum_from(&raw1);
        let d2 = if same { d1.clone() } else { spectrum_from(&raw2) };
        let (a, b) = (conjugate(&d1, s1), conjugate(&d2, s2));
        let t = tol();
        let v = erasure_exists(&a, &b, &t).unwrap();
        prop_assert_eq!(v.feasible, sector_of(&a, &t) == sector_of(&b, &t));
        if v.feasible {
            let (ea, eb) = (vn_entropy(&a, std::f64::consts::E, &t).unwrap(), vn_entropy(&b, std::f64::consts::E, &t).unwrap());
            prop_assert!((ea - eb).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_witnesses(x in 0.05f64..0.45, s1 in any::<u64>(), s2 in any::<u64>()) {
        let d = [x, x, 1.0 - 2.0 * x];
        let (a, b) = (conjugate(&d, s1), conjugate(&d, s2));
        let (u, v) = construct_erasure(&a, &b, &tol()).unwrap();
        prop_assert!(witness_residual(&a, &b, &u, &v).unwrap() <= 1e-8);
    }

    #[test]
    fn expected_utility_is_affine_and_order_free(w in proptest::collection::vec(0.01f64..1.0, 1..5), u in proptest::collection::vec(-5.0f64..5.0, 5), a in 0.1f64..3.0, b in -3.0f64..3.0, rot in 0usize..5) {
        let w = spectrum_from(&w);
        let labels: Vec<String> = (0..w.len()).map(|i| format!("b{i}")).collect();
        let pairs: Vec<(&str, f64)> = labels.iter().map(String::as_str).zip(w.iter().copied()).collect();
        let util: BTreeMap<String, f64> = labels.iter().cloned().zip(u.iter().copied()).collect();
        let base = expected_utility(&decomposition(&pairs), &util).unwrap();
        let scaled: BTreeMap<String, f64> = util.iter().map(|(k, v)| (k.clone(), a * v + b)).collect();
        let s = expected_utility(&decomposition(&pairs), &scaled).unwrap();
        prop_assert!((s - (a * base + b)).abs() < 1e-12);
        let mut rotated = pairs.clone();
        let k = rot % rotated.len();
        rotated.rotate_left(k);
        prop_assert!((expected_utility(&decomposition(&rotated), &util).unwrap() - base).abs() < 1e-12);
    }
}
