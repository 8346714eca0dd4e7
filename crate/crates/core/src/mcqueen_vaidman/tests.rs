use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use super::*;
use crate::branching::decompose;
use crate::hilbert::{partial_trace, purity};
use crate::linalg::r;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Explicit `(1/√3)(|L1⟩+|L2⟩+|L3⟩)|R…R⟩|R_E⟩` assembled factor by factor.
fn explicit_three_station_ket() -> CVector {
    let ready = CVector::from_vec(vec![r(1.0), r(0.0)]);
    let mut rest = ready.clone();
    for _ in 1..6 {
        rest = linalg::kron_vec(&rest, &ready);
    }
    let env = CVector::from_element(3, r(1.0 / 3f64.sqrt()));
    let loc = CVector::from_element(3, r(1.0 / 3f64.sqrt()));
    linalg::kron_vec(&linalg::kron_vec(&loc, &rest), &env)
}

#[test]
fn three_stations_match_explicit_construction() {
    let s = build_symmetric(3, &tol()).unwrap();
    assert_eq!(s.layout().dim(), 576);
    assert_eq!(s.layout().len(), 8);
    let d = (s.ket().amplitudes() - explicit_three_station_ket()).camax();
    assert!(d < 1e-15);
    let rho = s.state(&tol()).unwrap();
    assert!((purity(&rho) - 1.0).abs() < 1e-12);
    for w in s.weights() {
        assert!((w - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn two_stations() {
    let s = build_symmetric(2, &tol()).unwrap();
    assert_eq!(s.weights(), &[0.5, 0.5]);
    let post = measure_stations(&s).unwrap();
    let (rho, part) = (post.state(&tol()).unwrap(), post.station_partition().unwrap());
    let dec = decompose(&rho, &part, &tol()).unwrap();
    assert_eq!(dec.len(), 2);
    assert!(dec.branches.iter().all(|b| (b.weight - 0.5).abs() < 1e-12));
}

#[test]
fn five_stations_fit_as_a_ket() {
    let s = build_symmetric(5, &tol()).unwrap();
    s.validate(&tol()).unwrap();
    assert_eq!(s.layout().dim(), 25600);
    assert!(matches!(s.state(&tol()), Err(Error::Capacity { .. })));
    assert!((s.ket().amplitudes().norm_squared() - 1.0).abs() < 1e-12);

    // oracle: sum |amplitude|² by hand over everything but the location
    let stride = s.layout().strides()[0];
    let a = s.ket().amplitudes();
    let mut by_hand = CMatrix::zeros(5, 5);
    for i in 0..5 {
        for j in 0..5 {
            by_hand[(i, j)] = (0..stride).map(|k| a[i * stride + k] * a[j * stride + k].conj()).sum();
        }
    }
    let pre = s.location_marginal().unwrap();
    assert!(linalg::max_abs_diff(pre.matrix(), &by_hand) < 1e-14);
    // before measurement the packets are coherent; afterwards I/5
    assert!((pre.matrix()[(0, 1)].re - 0.2).abs() < 1e-12);
    let post = measure_stations(&s).unwrap();
    let marginal = post.location_marginal().unwrap();
    let target = CMatrix::identity(5, 5) * r(0.2);
    assert!(linalg::max_abs_diff(marginal.matrix(), &target) < 1e-12);
    for (_, w) in post.branch_weights() {
        assert!((w - 0.2).abs() < 1e-12);
    }
}

#[test]
fn oversized_is_a_capacity_error() {
    assert!(matches!(build_symmetric(9, &tol()), Err(Error::Capacity { .. })));
    let small = Tolerances { max_dim: 20, ..tol() };
    assert!(matches!(build_symmetric(3, &small), Err(Error::Capacity { .. })));
    assert!(matches!(build_symmetric(1, &tol()), Err(Error::Parameter(_))));
}

#[test]
fn measurement_gives_three_third_branches() {
    let s = measure_stations(&build_symmetric(3, &tol()).unwrap()).unwrap();
    let rho = s.state(&tol()).unwrap();
    let dec = decompose(&rho, &s.station_partition().unwrap(), &tol()).unwrap();
    assert_eq!(dec.len(), 3);
    for (i, b) in dec.branches.iter().enumerate() {
        assert_eq!(b.label, station_label(i + 1));
        assert!((b.weight - 1.0 / 3.0).abs() < 1e-12);
    }
    assert!(matches!(measure_stations(&s), Err(Error::Parameter(_))));
}

#[test]
fn subsystem_state_is_the_block_form() {
    let s = measure_stations(&build_symmetric(3, &tol()).unwrap()).unwrap();
    let rho_s = s.subsystem_state().unwrap();
    assert_eq!(rho_s.dim(), 192);
    // ⅓ Σ_m |L_m⟩⟨L_m| ⊗ |R R R⟩⟨R R R| ⊗ |…✓_m…⟩⟨…✓_m…|
    let sub = SubsystemLayout::new(
        std::iter::once((LOCATION.to_string(), 3))
            .chain((1..=3).map(|i| (agent(i), 2)))
            .chain((1..=3).map(|i| (device(i), 2))),
    )
    .unwrap();
    let mut expected = CMatrix::zeros(192, 192);
    for m in 0..3 {
        let mut digits = vec![m, 0, 0, 0, 0, 0, 0];
        digits[4 + m] = 1;
        let i = sub.index(&digits);
        expected[(i, i)] = r(1.0 / 3.0);
    }
    assert!(linalg::max_abs_diff(rho_s.matrix(), &expected) < 1e-12);
    let dense = partial_trace(&s.state(&tol()).unwrap(), s.layout(), &["L", "A1", "A2", "A3", "M1", "M2", "M3"]).unwrap();
    assert!(dense.max_abs_diff(&rho_s) < 1e-14);
}

#[test]
fn symmetry_checks() {
    let s = measure_stations(&build_symmetric(3, &tol()).unwrap()).unwrap();
    assert!(check_symmetry(&s, &[1, 2, 0]).unwrap());
    assert!(check_symmetry(&s, &[0, 1, 2]).unwrap());
    assert!(check_symmetry(&s, &[1, 0, 2]).unwrap());
    assert!(check_symmetry(&s, &[0, 0, 1]).is_err());

    let skew = build_weighted(&[q(1, 3), q(2, 3)], &tol()).unwrap();
    assert!(!check_symmetry(&skew, &[1, 0]).unwrap());
    // the swap exchanges the diagonal blocks: ⅓ against ⅔ in the location marginal
    let post = measure_stations(&skew).unwrap();
    let d = symmetry_distance(&post, &[1, 0]).unwrap();
    assert!((d - 1.0 / 3.0).abs() < 1e-12);
    let c = derive_credences(&post).unwrap();
    assert!(matches!(c.status, CredenceStatus::Underived(_)));
    assert!(c.credences.is_empty());
}

#[test]
fn symmetric_credences() {
    for n in [2, 3, 4] {
        let post = measure_stations(&build_symmetric(n, &tol()).unwrap()).unwrap();
        let c = derive_credences(&post).unwrap();
        assert!(c.is_derived());
        assert_eq!(c.checks.len(), n - 1);
        for m in 1..=n {
            assert_eq!(c.credence(&station_label(m)), Some(&q(1, n as i64)));
        }
        for ((_, born), (_, v)) in c.born.iter().zip(&c.credences) {
            assert!((born - v.to_f64().unwrap()).abs() < 1e-12);
        }
    }
    let pre = build_symmetric(3, &tol()).unwrap();
    assert!(matches!(derive_credences(&pre), Err(Error::Parameter(_))));
}

#[test]
fn remote_transforms_leave_station_one_alone() {
    let post = measure_stations(&build_symmetric(3, &tol()).unwrap()).unwrap();
    let t = RemoteTransform::random_off(3, 0, 7).unwrap();
    assert_eq!(t.unitary.dim(), 32);
    assert!(remote_invariance(&post, 0, &t).unwrap());
    let pre = build_symmetric(3, &tol()).unwrap();
    assert!(remote_invariance(&pre, 0, &t).unwrap());

    let id = RemoteTransform::new("id", vec![1, 2], vec![], Unitary::identity(2)).unwrap();
    assert!(remote_invariance(&post, 0, &id).unwrap());

    let touching = RemoteTransform::new("bad", vec![1], vec![agent(1)], Unitary::identity(4)).unwrap();
    assert!(matches!(remote_invariance(&post, 0, &touching), Err(Error::SupportViolation(_))));
    let on_packet = RemoteTransform::new("bad", vec![0, 1], vec![], Unitary::identity(2)).unwrap();
    assert!(matches!(remote_invariance(&post, 0, &on_packet), Err(Error::SupportViolation(_))));
}

#[test]
fn local_unitary_is_visible() {
    // sanity check of the block form: acting at station 1 itself shows up
    let pre = build_symmetric(3, &tol()).unwrap();
    let flip = CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)]);
    let t = RemoteTransform::new("flip", vec![0], vec![device(1)], Unitary::new(flip, &tol()).unwrap()).unwrap();
    let moved = apply_remote(&pre, t).unwrap();
    let d = local_state(&pre, 0).unwrap().max_abs_diff(&local_state(&moved, 0).unwrap());
    assert!(d > 0.3);
}

#[test]
fn merged_packets_keep_one_third_locally() {
    let parent = build_symmetric(3, &tol()).unwrap();
    let asym = apply_remote(&parent, RemoteTransform::merge(&[1, 2]).unwrap()).unwrap();
    let w = asym.weights();
    assert!((w[0] - 1.0 / 3.0).abs() < 1e-12 && (w[1] - 2.0 / 3.0).abs() < 1e-12 && w[2].abs() < 1e-12);
    let post = measure_stations(&asym).unwrap();
    let c = derive_credences(&post).unwrap();
    assert!(c.is_derived(), "{:?}", c.status);
    assert_eq!(c.credence("station:1"), Some(&q(1, 3)));
    assert_eq!(c.credence("station:2"), Some(&q(2, 3)));
    assert_eq!(c.credence("station:3"), Some(&q(0, 1)));

    let rho = post.state(&tol()).unwrap();
    let dec = decompose(&rho, &post.station_partition().unwrap(), &tol()).unwrap();
    assert_eq!(dec.len(), 2);
    for b in &dec.branches {
        let v = c.credence(&b.label).unwrap().to_f64().unwrap();
        assert!((b.weight - v).abs() < 1e-12);
    }
}

#[test]
fn general_remote_transform_fixes_only_the_group() {
    let parent = build_symmetric(3, &tol()).unwrap();
    let t = RemoteTransform::random_off(3, 0, 11).unwrap();
    let post = measure_stations(&apply_remote(&parent, t).unwrap()).unwrap();
    let c = derive_credences(&post).unwrap();
    assert!(c.is_derived());
    assert_eq!(c.credence("station:1"), Some(&q(1, 3)));
    assert_eq!(c.credence("stations:2,3"), Some(&q(2, 3)));
    assert_eq!(c.undetermined, ["station:2", "station:3"]);
    let born = &c.born[0].1;
    assert!((born - 1.0 / 3.0).abs() < 1e-12);
}

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x3_57a7),
        failure_persistence: None,
        ..Config::default()
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn random_remote_unitaries_are_invisible(seed in any::<u64>(), local in 0usize..3, measured in any::<bool>()) {
        let mut s = build_symmetric(3, &tol()).unwrap();
        if measured {
            s = measure_stations(&s).unwrap();
        }
        let t = RemoteTransform::random_off(3, local, seed).unwrap();
        prop_assert!(remote_invariance(&s, local, &t).unwrap());
    }

    #[test]
    fn relabeling_keeps_credences(n in 2usize..5, seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let post = measure_stations(&build_symmetric(n, &tol()).unwrap()).unwrap();
        let base = derive_credences(&post).unwrap();
        let moved = derive_credences(&permute_stations(&post, &perm).unwrap()).unwrap();
        prop_assert!(moved.is_derived());
        prop_assert_eq!(base.credences, moved.credences);
    }
}
