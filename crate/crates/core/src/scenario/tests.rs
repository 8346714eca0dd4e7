use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use super::*;

fn parse(text: &str) -> Result<ScenarioFile> {
    ScenarioFile::parse(text, "t")
}

fn run_text(text: &str) -> Report {
    run(&parse(text).unwrap(), &RunOptions::default()).unwrap()
}

const CASE1: &str = include_str!("../../scenarios/case1.toml");

#[test]
fn case1_file_gives_halves() {
    let r = run_text(CASE1);
    assert!(r.passed(), "{r}");
    assert_eq!(
        r.get("credence:α:↑"),
        Some(&Quantity::Number {
            value: 0.5,
            exact: Some("1/2".into())
        })
    );
    assert_eq!(r.derivation.len(), 8);
    assert_eq!(r.id, "case1");
}

#[test]
fn missing_display_row_is_named() {
    let text = CASE1.replace(r#"  { label = "D2", kind = "display", cells = ["♢", "♡"] },"#, "");
    match parse(&text) {
        Err(Error::Parse { location, message }) => {
            assert_eq!(location, "set-up `β`, row `D2`");
            assert!(message.contains("missing"), "{message}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn toml_errors_carry_line_and_column() {
    let text = "version = 1\nkind = \"branching\"\n\n[branching]\nworld = \"three_branch\"\ncolour = 3\n";
    match parse(text) {
        Err(Error::Parse { location, message }) => {
            assert!(location.starts_with("t:"), "{location}");
            assert!(message.contains("colour"), "{message}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    let e = parse("version = 1\nkind = \"nope\"\n").unwrap_err();
    assert!(matches!(e, Error::Parse { ref location, .. } if location == "t:2:8"), "{e}");
}

#[test]
fn schema_checks() {
    let wrong_section = "version = 1\nkind = \"branching\"\n[mcqueen_vaidman]\nn = 3\n";
    assert!(matches!(parse(wrong_section), Err(Error::Parse { ref location, .. }) if location.contains("mcqueen_vaidman")));
    let missing = "version = 1\nkind = \"branching\"\n";
    assert!(matches!(parse(missing), Err(Error::Parse { .. })));
    let version = "version = 2\nkind = \"mcqueen_vaidman\"\n[mcqueen_vaidman]\nn = 3\n";
    assert!(matches!(parse(version), Err(Error::Parse { ref location, .. }) if location == "field `version`"));
    let both = "version = 1\nkind = \"mcqueen_vaidman\"\n[mcqueen_vaidman]\nn = 3\nweights = [\"1/2\", \"1/2\"]\n";
    assert!(matches!(parse(both), Err(Error::Parse { .. })));
    let bad_tol = "version = 1\nkind = \"mcqueen_vaidman\"\n[tolerances]\nwobble = 1.0\n[mcqueen_vaidman]\nn = 3\n";
    assert!(matches!(parse(bad_tol), Err(Error::Parse { ref location, .. }) if location == "field `tolerances.wobble`"));
    let empty_check = "version = 1\nkind = \"mcqueen_vaidman\"\n[mcqueen_vaidman]\nn = 3\n[[expect]]\nkey = \"n\"\n";
    assert!(matches!(parse(empty_check), Err(Error::Parse { .. })));
    let station = "version = 1\nkind = \"mcqueen_vaidman\"\n[mcqueen_vaidman]\nn = 3\nremote = { merge = [2, 4] }\n";
    assert!(matches!(parse(station), Err(Error::Parse { .. })));
}

#[test]
fn capacity_errors_pass_through() {
    let text = "version = 1\nkind = \"mcqueen_vaidman\"\n[tolerances]\nmax_dim = 20\n[mcqueen_vaidman]\nn = 3\n";
    let e = run(&parse(text).unwrap(), &RunOptions::default()).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    // a command-line override wins over the file
    let opts = RunOptions {
        tolerances: vec!["max_dim=4096".into()],
        seed: None,
    };
    assert!(run(&parse(text).unwrap(), &opts).is_ok());
}

#[test]
fn failed_expectation_sets_exit_status() {
    let text = "version = 1\nkind = \"mcqueen_vaidman\"\n[mcqueen_vaidman]\nn = 3\n\
                [[expect]]\nkey = \"credence:station:1\"\nequals = \"1/2\"\n\
                [[expect]]\nkey = \"no-such-key\"\nmin = 0.0\n";
    let r = run_text(text);
    assert!(!r.passed());
    assert_eq!(exit_status(&r), 1);
    assert_eq!(r.assertions[0].actual, "1/3 (0.333333333333)");
    assert_eq!(r.assertions[1].actual, "missing");
}

#[test]
fn expectation_forms() {
    let num = Quantity::number(0.25);
    let exact = Quantity::exact(&parse_weight("1/4").unwrap());
    let e = |v: Expected| Expectation::equals("k", v);
    assert!(e(Expected::Number(0.25)).evaluate(Some(&num)).passed);
    assert!(e(Expected::Text("1/4".into())).evaluate(Some(&num)).passed);
    assert!(e(Expected::Text("1/4".into())).evaluate(Some(&exact)).passed);
    assert!(!e(Expected::Text("1/3".into())).evaluate(Some(&exact)).passed);
    assert!(!e(Expected::Flag(true)).evaluate(Some(&num)).passed);
    assert!(e(Expected::Flag(false)).evaluate(Some(&Quantity::Flag(false))).passed);
    let mut range = e(Expected::Number(0.0));
    range.equals = None;
    range.min = Some(0.2);
    range.max = Some(0.3);
    assert!(range.evaluate(Some(&num)).passed);
    range.max = Some(0.24);
    assert!(!range.evaluate(Some(&num)).passed);
}

#[test]
fn matrix_world_reads_a_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let rho = crate::hilbert::DensityMatrix::diagonal(&[0.25, 0.25, 0.25, 0.25], &Tolerances::default()).unwrap();
    std::fs::write(dir.path().join("rho.json"), crate::hilbert::MatrixDocument::from_state(&rho).to_json()).unwrap();
    let path = dir.path().join("m.toml");
    std::fs::write(
        &path,
        "version = 1\nkind = \"branching\"\n[branching]\nworld = \"matrix\"\nstate_file = \"rho.json\"\n\
         basis_labels = [\"A1\", \"A2\", \"B\", \"C\"]\nmerge = { A1 = \"A\", A2 = \"A\" }\n",
    )
    .unwrap();
    let r = run(&ScenarioFile::from_path(&path).unwrap(), &RunOptions::default()).unwrap();
    assert_eq!(r.id, "m");
    assert_eq!(r.get("weight:A"), Some(&Quantity::with_fraction(0.5, Some("1/2".into()))));
    assert_eq!(r.get("branches"), Some(&Quantity::number(3.0)));
}

#[test]
fn decoherence_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.toml");
    std::fs::write(
        &path,
        "version = 1\nkind = \"decoherence\"\n[decoherence]\nn_env = 12\ncoupling = [0.5, 1.5]\nseed = 1\ncsv = \"curve.csv\"\n",
    )
    .unwrap();
    run(&ScenarioFile::from_path(&path).unwrap(), &RunOptions::default()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(csv.starts_with("t,overlap,fitted_tau_d\n"));
    assert!(csv.lines().count() > 100);
}

#[test]
fn unknown_case_lists_ids() {
    match reproduce("nope", &Context::default()) {
        Err(Error::Lookup { id, available }) => {
            assert_eq!(id, "nope");
            assert!(available.iter().any(|a| a == "case2-born"));
        }
        other => panic!("expected lookup error, got {other:?}"),
    }
}

#[test]
fn every_case_passes_in_registry_order() {
    let results = reproduce_all(&Context::default());
    let ids: Vec<String> = results.iter().map(|r| r.as_ref().unwrap().id.clone()).collect();
    assert_eq!(ids, case_ids());
    for r in results {
        let r = r.unwrap();
        assert!(r.passed(), "{r}");
        assert!(!r.assertions.is_empty(), "{} asserts nothing", r.id);
    }
}

#[test]
fn context_overrides() {
    assert!(Context::new(vec!["wobble=1".into()], None).is_err());
    // the ESP distances of case 1 are exactly zero
    let ctx = Context::new(vec!["esp=0".into()], None).unwrap();
    assert!(reproduce("case1-esp", &ctx).unwrap().passed());
    let ctx = Context::new(vec!["max_dim=8".into()], None).unwrap();
    assert_eq!(reproduce("mv-n3", &ctx).unwrap_err().exit_code(), 3);
}

fn quantity() -> impl Strategy<Value = Quantity> {
    prop_oneof![
        (any::<f64>().prop_filter("finite", |x| x.is_finite()), proptest::option::of("[0-9]{1,3}/[1-9]{1,2}"))
            .prop_map(|(value, exact)| Quantity::Number { value, exact }),
        any::<bool>().prop_map(Quantity::Flag),
        "\\PC{0,12}".prop_map(Quantity::Text),
    ]
}

fn report() -> impl Strategy<Value = Report> {
    (
        "[a-z0-9.-]{1,12}",
        proptest::collection::btree_map("[a-z:αμ↑]{1,8}", quantity(), 0..6),
        proptest::collection::vec("\\PC{0,20}", 0..4),
        proptest::collection::vec(("[a-z]{1,5}", "\\PC{0,6}", "\\PC{0,6}", any::<bool>()), 0..4),
        proptest::collection::vec(proptest::collection::vec("\\PC{0,5}", 2), 0..3),
        0.0f64..1e6,
    )
        .prop_map(|(id, quantities, derivation, asserts, rows, wall)| {
            let mut r = Report::new(id, Kind::SebensCarroll);
            r.quantities = quantities;
            r.derivation = derivation;
            for (name, e, a, p) in asserts {
                r.check(name, e, a, p);
            }
            let mut t = Table::new("t", &["a", "b"]);
            for row in rows {
                t.push(row);
            }
            r.tables.push(t);
            r.wall_time_ms = wall;
            r
        })
}

proptest! {
    #![proptest_config(Config {
        cases: 128,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    })]

    #[test]
    fn structured_reports_round_trip(r in report()) {
        prop_assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }
}
