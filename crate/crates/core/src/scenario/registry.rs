//! Built-in cases: canonical scenarios plus a few direct engine checks,
//! each asserting a fixed expected value.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{Quantity, Report};
use super::{run, Expectation, Expected, Kind, RunOptions, ScenarioFile};
use crate::branching::{decompose, MacrostatePartition};
use crate::config::Tolerances;
use crate::decoherence::{dephase, overlap_decay, premeasurement_unitary, DecayParams, PointerMap};
use crate::deutsch_wallace::sector_of;
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, spectral_distance, spectrum, apply_unitary, DensityMatrix, Ket, SubsystemLayout, Unitary};
use crate::linalg::{self, c, r, CMatrix, CVector};
use crate::mcqueen_vaidman as mv;

/// Settings shared by every case of one `reproduce` call.
#[derive(Debug, Clone, Default)]
pub struct Context {
    /// `name=value` tolerance overrides.
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
    tol: Tolerances,
}

impl Context {
    pub fn new(overrides: Vec<String>, seed: Option<u64>) -> Result<Self> {
        let mut tol = Tolerances::default();
        for o in &overrides {
            tol.apply_override(o)?;
        }
        Ok(Context { overrides, seed, tol })
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }
}

type CaseFn = fn(&Context) -> Result<Report>;

const CASE1: &str = include_str!("../../scenarios/case1.toml");
const CASE2: &str = include_str!("../../scenarios/case2.toml");
const GENERAL_QUARTER: &str = include_str!("../../scenarios/general_quarter.toml");
const THREE_BRANCH: &str = include_str!("../../scenarios/three_branch.toml");
const TWO_BRANCH: &str = include_str!("../../scenarios/two_branch.toml");
const FINE: &str = include_str!("../../scenarios/fine_partition.toml");
const MV_N3: &str = include_str!("../../scenarios/mv_n3.toml");
const MV_REMOTE: &str = include_str!("../../scenarios/mv_remote.toml");
const MV_MERGE: &str = include_str!("../../scenarios/mv_merge.toml");
const DW_PURE_MIXED: &str = include_str!("../../scenarios/dw_pure_mixed.toml");
const DW_SAME_SPECTRUM: &str = include_str!("../../scenarios/dw_same_spectrum.toml");
const DW_EQUIVALENCE: &str = include_str!("../../scenarios/dw_equivalence.toml");
const SPIN_BATH: &str = include_str!("../../scenarios/decoherence.toml");

const CASES: &[(&str, &str, CaseFn)] = &[
    ("eq2-premeasurement", "two-outcome premeasurement produces a|S1⟩|E1⟩ + b|S2⟩|E2⟩", eq2_premeasurement),
    ("eq5-reduced-state", "orthogonal records leave the system in diag(|a|², |b|²)", eq5_reduced_state),
    ("eq5-dephase", "full dephasing of the system state keeps only the diagonal blocks", eq5_dephase),
    ("decay-approach-zero", "record overlap at ten decoherence times is e^-10", decay_approach_zero),
    ("decay-envelope", "spin-bath overlap follows an exponential envelope", decay_envelope),
    ("spectrum-invariance", "unitary conjugation preserves the sorted spectrum", spectrum_invariance),
    ("sec2.2-two-branches", "(A + B)/√2 after measurement has two ½ branches", sec22_two_branches),
    ("sec2.3-three-branches", "the mixed post-measurement state has branches ½, ¼, ¼", sec23_three_branches),
    ("sec2.3-merge", "merging microstates A1, A2 of weight ¼ each gives ½, ¼, ¼", sec23_merge),
    ("sec2.3-fine-vs-coarse", "four branches under the fine partition, three under the coarse", sec23_fine_vs_coarse),
    ("table1-alpha-branches", "set-up α has two branches of weight ½", table1_alpha_branches),
    ("table2-mu-branches", "set-up μ has four branches of weight ¼", table2_mu_branches),
    ("case1-esp", "α and β agree on (A, D1) and on (A, D2)", case1_esp),
    ("same-branch-classes", "same-branch symbol classes of α and ν", same_branch_classes),
    ("case1-credences", "P(↑|α) = P(↓|α) = ½", case1_credences),
    ("case2-born", "P(↑|μ) = ¼ and P(↓|μ) = ¾, equal to the branch weights", case2_born),
    ("general-quarter", "outcome weights ¼, ¾ are recovered from equal-weight tables", general_quarter),
    ("mv-n3-state", "three-station state matches the explicit superposition", mv_n3_state),
    ("mv-n3-branches", "three station branches of weight ⅓", mv_n3_branches),
    ("mv-subsystem-block", "reduced state of location, agents and detectors is block diagonal", mv_subsystem_block),
    ("mv-symmetry", "the symmetric state is invariant under cyclic station shifts", mv_symmetry),
    ("mv-n3", "each of three symmetric stations gets credence ⅓", mv_n3),
    ("mv-remote-invariance", "a random unitary on stations 2 and 3 leaves station 1 unchanged", mv_remote_invariance),
    ("mv-merge", "merging packets 2 and 3 keeps station 1 at ⅓", mv_merge),
    ("dw-erasure-pure-vs-mixed", "pure and maximally mixed qubits admit no erasure", dw_pure_vs_mixed),
    ("dw-erasure-same-spectrum", "rotated states with one spectrum admit erasure", dw_same_spectrum),
    ("dw-equivalence", "with α = β both acts plus erasure give the same state", dw_equivalence),
    ("dw-pure-sector", "all pure states share the sector {1, 0, …}", dw_pure_sector),
];

pub fn case_ids() -> Vec<&'static str> {
    CASES.iter().map(|(id, _, _)| *id).collect()
}

pub fn describe_case(id: &str) -> Option<&'static str> {
    CASES.iter().find(|(i, _, _)| *i == id).map(|(_, d, _)| *d)
}

fn lookup(id: &str) -> Result<&'static (&'static str, &'static str, CaseFn)> {
    CASES.iter().find(|(i, _, _)| *i == id).ok_or_else(|| Error::Lookup {
        id: id.to_string(),
        available: case_ids().iter().map(|s| s.to_string()).collect(),
    })
}

fn run_case(case: &(&str, &str, CaseFn), ctx: &Context) -> Result<Report> {
    let start = Instant::now();
    let (id, description, f) = case;
    let mut report = f(ctx)?;
    report.id = id.to_string();
    report.description = description.to_string();
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Runs one built-in case.
pub fn reproduce(id: &str, ctx: &Context) -> Result<Report> {
    run_case(lookup(id)?, ctx)
}

/// Runs every built-in case concurrently; results keep registry order.
pub fn reproduce_all(ctx: &Context) -> Vec<Result<Report>> {
    CASES.par_iter().map(|case| run_case(case, ctx)).collect()
}

fn embedded(text: &str, ctx: &Context) -> Result<Report> {
    let file = ScenarioFile::parse(text, "embedded")?;
    let opts = RunOptions {
        tolerances: ctx.overrides.clone(),
        seed: ctx.seed,
    };
    run(&file, &opts)
}

fn expect(report: &mut Report, checks: &[(&str, Expected)]) {
    for (key, value) in checks {
        let a = Expectation::equals(*key, value.clone()).evaluate(report.get(key));
        report.assertions.push(a);
    }
}

fn rational(s: &str) -> Expected {
    Expected::Text(s.to_string())
}

fn flag(b: bool) -> Expected {
    Expected::Flag(b)
}

fn number(x: f64) -> Expected {
    Expected::Number(x)
}

/// Checks computed in place with a fixed bound on a distance.
fn bound(report: &mut Report, name: &str, distance: f64, limit: f64) {
    report.set(name, Quantity::number(distance));
    report.check(name, format!("<= {limit:e}"), format!("{distance:e}"), distance <= limit);
}

const A: f64 = 0.6;
const B: f64 = 0.8;

/// System amplitudes `a = 0.6`, `b = 0.8i` and two orthonormal records.
fn premeasured(tol: &Tolerances) -> Result<(SubsystemLayout, Ket, DensityMatrix)> {
    let layout = SubsystemLayout::new([("S", 2), ("E", 2)])?;
    let pm = PointerMap::from_pairs([("S1", Ket::basis(2, 0)), ("S2", Ket::basis(2, 1))])?;
    let u = premeasurement_unitary(&layout, &pm, &Ket::basis(2, 0), tol)?;
    let s = Ket::new(vec![r(A), c(0.0, B)], tol)?;
    let out = u.apply_ket(&s.tensor(&Ket::basis(2, 0)))?;
    let rho = DensityMatrix::pure(&out);
    Ok((layout, out, rho))
}

fn eq2_premeasurement(ctx: &Context) -> Result<Report> {
    let mut report = Report::new("", Kind::Decoherence);
    let (_, out, _) = premeasured(&ctx.tol)?;
    // a|S1⟩|E1⟩ + b|S2⟩|E2⟩ in the basis |S⟩|E⟩
    let expected = CVector::from_vec(vec![r(A), r(0.0), r(0.0), c(0.0, B)]);
    bound(&mut report, "ket_distance", (out.amplitudes() - expected).camax(), 1e-12);
    Ok(report)
}

fn eq5_reduced_state(ctx: &Context) -> Result<Report> {
    let mut report = Report::new("", Kind::Decoherence);
    let (layout, _, rho) = premeasured(&ctx.tol)?;
    let rho_s = partial_trace(&rho, &layout, &["S"])?;
    let target = DensityMatrix::diagonal(&[A * A, B * B], &ctx.tol)?;
    report.set("rho_s:11", Quantity::number(rho_s.matrix()[(0, 0)].re));
    report.set("rho_s:22", Quantity::number(rho_s.matrix()[(1, 1)].re));
    bound(&mut report, "distance_to_diagonal", rho_s.max_abs_diff(&target), 1e-12);
    Ok(report)
}

fn eq5_dephase(ctx: &Context) -> Result<Report> {
    let mut report = Report::new("", Kind::Decoherence);
    // records with overlap 0.3 leave coherence a b* s in the system state
    let layout = SubsystemLayout::new([("S", 2), ("E", 2)])?;
    let e2 = Ket::from_real(&[0.3, (1.0f64 - 0.09).sqrt()])?;
    let pm = PointerMap::from_pairs([("S1", Ket::basis(2, 0)), ("S2", e2)])?;
    let u = premeasurement_unitary(&layout, &pm, &Ket::basis(2, 0), &ctx.tol)?;
    let s = Ket::new(vec![r(A), c(0.0, B)], &ctx.tol)?;
    let rho = DensityMatrix::pure(&u.apply_ket(&s.tensor(&Ket::basis(2, 0)))?);
    let rho_s = partial_trace(&rho, &layout, &["S"])?;
    report.set("coherence_before", Quantity::number(rho_s.matrix()[(0, 1)].norm()));
    let part = MacrostatePartition::from_basis_labels(&["S1", "S2"])?;
    let out = dephase(&rho_s, &part, 0.0)?;
    let target = DensityMatrix::diagonal(&[A * A, B * B], &ctx.tol)?;
    bound(&mut report, "distance_to_diagonal", out.max_abs_diff(&target), 1e-12);
    Ok(report)
}

fn decay_approach_zero(_: &Context) -> Result<Report> {
    let mut report = Report::new("", Kind::Decoherence);
    let v = overlap_decay(DecayParams::new(1.0, 10.0)?);
    report.set("overlap_at_10tau", Quantity::number(v));
    bound(&mut report, "distance_to_exp_minus_10", (v - (-10f64).exp()).abs(), 1e-15);
    report.check("below 5e-5", "< 5e-5", format!("{v:e}"), v < 5e-5);
    Ok(report)
}

fn decay_envelope(ctx: &Context) -> Result<Report> {
    embedded(SPIN_BATH, ctx)
}

fn spectrum_invariance(ctx: &Context) -> Result<Report> {
    let mut report = Report::new("", Kind::DeutschWallace);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.unwrap_or(17));
    let mut worst: f64 = 0.0;
    for dim in 2..=8 {
        let rho = DensityMatrix::new(linalg::random_density(&mut rng, dim), &ctx.tol)?;
        let u = Unitary::random(&mut rng, dim);
        let moved = apply_unitary(&rho, &u)?;
        worst = worst.max(spectral_distance(&spectrum(&rho, &ctx.tol), &spectrum(&moved, &ctx.tol)));
    }
    bound(&mut report, "max_spectral_distance", worst, 1e-10);
    Ok(report)
}

fn sec22_two_branches(ctx: &Context) -> Result<Report> {
    embedded(TWO_BRANCH, ctx)
}

fn sec23_three_branches(ctx: &Context) -> Result<Report> {
    let mut report = embedded(THREE_BRANCH, ctx)?;
    expect(
        &mut report,
        &[
            ("structural:A", rational("1/2")),
            ("structural:B", rational("1/4")),
            ("structural:C", rational("1/4")),
        ],
    );
    Ok(report)
}

fn sec23_merge(ctx: &Context) -> Result<Report> {
    let mut report = Report::new("", Kind::Branching);
    let rho = DensityMatrix::diagonal(&[0.25; 4], &ctx.tol)?;
    let fine = MacrostatePartition::from_basis_labels(&["A1", "A2", "B", "C"])?;
    let map: BTreeMap<String, String> = [("A1", "A"), ("A2", "A"), ("B", "B"), ("C", "C")]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let coarse = fine.merge(&map, &ctx.tol)?;
    let dec = decompose(&rho, &coarse, &ctx.tol)?;
    report.set("branches", Quantity::number(dec.len() as f64));
    for b in &dec.branches {
        report.set(
            format!("weight:{}", b.label),
            Quantity::with_fraction(b.weight, crate::branching::nearest_fraction(b.weight, 64, 1e-9)),
        );
    }
    expect(
        &mut report,
        &[
            ("branches", number(3.0)),
            ("weight:A", rational("1/2")),
            ("weight:B", rational("1/4")),
            ("weight:C", rational("1/4")),
        ],
    );
    Ok(report)
}

fn sec23_fine_vs_coarse(ctx: &Context) -> Result<Report> {
    let mut report = embedded(FINE, ctx)?;
    let coarse = embedded(THREE_BRANCH, ctx)?;
    if let Some(q) = coarse.get("branches") {
        report.set("coarse:branches", q.clone());
    }
    expect(&mut report, &[("coarse:branches", number(3.0))]);
    Ok(report)
}

fn table1_alpha_branches(ctx: &Context) -> Result<Report> {
    let mut report = embedded(CASE1, ctx)?;
    expect(
        &mut report,
        &[
            ("branches:α", number(2.0)),
            ("weight:α:1", rational("1/2")),
            ("weight:α:2", rational("1/2")),
        ],
    );
    Ok(report)
}

fn table2_mu_branches(ctx: &Context) -> Result<Report> {
    let mut report = embedded(CASE2, ctx)?;
    let mut checks = vec![("branches:μ", number(4.0))];
    let keys: Vec<String> = (1..=4).map(|c| format!("weight:μ:{c}")).collect();
    checks.extend(keys.iter().map(|k| (k.as_str(), rational("1/4"))));
    expect(&mut report, &checks);
    Ok(report)
}

fn case1_esp(ctx: &Context) -> Result<Report> {
    let mut report = embedded(CASE1, ctx)?;
    expect(&mut report, &[("esp:α/β:D1", flag(true)), ("esp:α/β:D2", flag(true))]);
    Ok(report)
}

fn same_branch_classes(ctx: &Context) -> Result<Report> {
    let mut report = embedded(CASE1, ctx)?;
    let nu = embedded(CASE2, ctx)?;
    if let Some(q) = nu.get("classes:ν") {
        report.set("classes:ν", q.clone());
    }
    expect(
        &mut report,
        &[
            ("classes:α", Expected::Text("{↑, ♡} {↓, ♢}".into())),
            ("classes:ν", Expected::Text("{↑, ♡, ♠, ✕} {↓, ♢, ♣, ⋆}".into())),
        ],
    );
    Ok(report)
}

fn case1_credences(ctx: &Context) -> Result<Report> {
    embedded(CASE1, ctx)
}

fn case2_born(ctx: &Context) -> Result<Report> {
    let mut report = embedded(CASE2, ctx)?;
    expect(&mut report, &[("born:μ:↑", rational("1/4")), ("born:μ:↓", rational("3/4"))]);
    Ok(report)
}

fn general_quarter(ctx: &Context) -> Result<Report> {
    embedded(GENERAL_QUARTER, ctx)
}

fn mv_n3_state(ctx: &Context) -> Result<Report> {
    let mut report = Report::new("", Kind::McqueenVaidman);
    let s = mv::build_symmetric(3, &ctx.tol)?;
    // (1/√3)(|L1⟩ + |L2⟩ + |L3⟩) ⊗ |ready⟩^6 ⊗ uniform environment
    let third = 1.0 / 3f64.sqrt();
    let mut expected = CVector::from_element(3, r(third));
    for _ in 0..6 {
        expected = linalg::kron_vec(&expected, &linalg::basis(2, 0));
    }
    expected = linalg::kron_vec(&expected, &CVector::from_element(3, r(third)));
    report.set("dim", Quantity::number(s.layout().dim() as f64));
    bound(&mut report, "ket_distance", (s.ket().amplitudes() - expected).camax(), 1e-12);
    Ok(report)
}

fn mv_n3_branches(ctx: &Context) -> Result<Report> {
    let mut report = embedded(MV_N3, ctx)?;
    expect(
        &mut report,
        &[
            ("born:station:1", rational("1/3")),
            ("born:station:2", rational("1/3")),
            ("born:station:3", rational("1/3")),
        ],
    );
    Ok(report)
}

fn mv_subsystem_block(ctx: &Context) -> Result<Report> {
    let mut report = Report::new("", Kind::McqueenVaidman);
    let s = mv::measure_stations(&mv::build_symmetric(3, &ctx.tol)?)?;
    let rho_s = s.subsystem_state()?;
    // ⅓ Σ_m |L_m⟩⟨L_m| ⊗ |ready⟩⟨ready|^3 ⊗ |…found_m…⟩⟨…found_m…|
    let sub = SubsystemLayout::new(
        std::iter::once((mv::LOCATION.to_string(), 3))
            .chain((1..=3).map(|i| (mv::agent(i), 2)))
            .chain((1..=3).map(|i| (mv::device(i), 2))),
    )?;
    let mut expected = CMatrix::zeros(sub.dim(), sub.dim());
    for m in 0..3 {
        let mut digits = vec![m, 0, 0, 0, 0, 0, 0];
        digits[4 + m] = 1;
        let i = sub.index(&digits);
        expected[(i, i)] = r(1.0 / 3.0);
    }
    bound(&mut report, "block_distance", linalg::max_abs_diff(rho_s.matrix(), &expected), 1e-12);
    Ok(report)
}

fn mv_symmetry(ctx: &Context) -> Result<Report> {
    let mut report = embedded(MV_N3, ctx)?;
    expect(
        &mut report,
        &[("check:cyclic shift by 1", flag(true)), ("check:cyclic shift by 2", flag(true))],
    );
    Ok(report)
}

fn mv_n3(ctx: &Context) -> Result<Report> {
    embedded(MV_N3, ctx)
}

fn mv_remote_invariance(ctx: &Context) -> Result<Report> {
    embedded(MV_REMOTE, ctx)
}

fn mv_merge(ctx: &Context) -> Result<Report> {
    let mut report = embedded(MV_MERGE, ctx)?;
    expect(&mut report, &[("credence:station:3", rational("0"))]);
    Ok(report)
}

fn dw_pure_vs_mixed(ctx: &Context) -> Result<Report> {
    embedded(DW_PURE_MIXED, ctx)
}

fn dw_same_spectrum(ctx: &Context) -> Result<Report> {
    embedded(DW_SAME_SPECTRUM, ctx)
}

fn dw_equivalence(ctx: &Context) -> Result<Report> {
    embedded(DW_EQUIVALENCE, ctx)
}

fn dw_pure_sector(ctx: &Context) -> Result<Report> {
    let mut report = Report::new("", Kind::DeutschWallace);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.unwrap_or(5));
    let mut all = true;
    for dim in 2..=6 {
        let ket = Ket::normalized(linalg::random_ket(&mut rng, dim).iter().copied().collect())?;
        let sector = sector_of(&DensityMatrix::pure(&ket), &ctx.tol);
        let mut want = vec!["1".to_string()];
        want.extend(std::iter::repeat_n("0".to_string(), dim - 1));
        let want = format!("{{{}}}", want.join(", "));
        report.set(format!("sector:dim{dim}"), Quantity::Text(sector.to_string()));
        all &= sector.to_string() == want;
    }
    report.check("pure states in sector {1, 0, …}", true, all, all);
    Ok(report)
}
