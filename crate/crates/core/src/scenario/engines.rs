//! One runner per scenario kind. Each turns validated parameters into a
//! report whose quantities come straight from engine calls.

use std::collections::BTreeMap;
use std::fs::File;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::report::{Quantity, Report, Table};
use super::{
    DecoherenceParams, DeutschWallaceParams, Grain, McQueenVaidmanParams, Parameters, RemoteSpec, RunOptions,
    ScenarioFile, SebensCarrollParams, StateSpec, Time, World,
};
use crate::branching::worlds::{three_branch_structure, two_branch_with_overlap, two_site_partition, GridSpec, ThreeBranchWorld};
use crate::branching::{decompose, BranchDecomposition, BranchReport, MacrostatePartition};
use crate::config::Tolerances;
use crate::decoherence::{overlap_decay, DecayCurve, DecayParams, SpinBath};
use crate::deutsch_wallace::{self as dw, NON_UNITARY_NOTE};
use crate::error::{Error, Result};
use crate::hilbert::{apply_unitary, partial_trace, purity, vn_entropy, DensityMatrix, Ket, MatrixDocument, Unitary};
use crate::linalg;
use crate::mcqueen_vaidman::{self as mv, CredenceStatus, RemoteTransform};
use crate::sebens_carroll::{
    build_setup, general_strategy_tables, is_diagonalization, is_same_branch, parse_weight, same_branch_classes,
    solve_credences, Row, SetupTable,
};

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn fraction(x: f64, tol: &Tolerances) -> Option<String> {
    crate::branching::nearest_fraction(x, tol.max_denominator as u32, 1e-9)
}

/// Schema checks that need more than the TOML structure.
pub(super) fn validate(p: &Parameters) -> Result<()> {
    match p {
        Parameters::Decoherence(d) => {
            if d.n_env == 0 {
                return Err(parse_err("field `decoherence.n_env`", "must be positive"));
            }
            let [lo, hi] = d.coupling;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(parse_err("field `decoherence.coupling`", "expected finite [lo, hi] with lo <= hi"));
            }
        }
        Parameters::Branching(World::TwoBranch { overlap }) if !(0.0..=1.0).contains(overlap) => {
            return Err(parse_err("field `branching.overlap`", "must lie in [0, 1]"));
        }
        Parameters::Branching(_) => {}
        Parameters::SebensCarroll(sc) => {
            match (&sc.general, sc.setups.is_empty()) {
                (Some(_), false) => {
                    return Err(parse_err("field `sebens_carroll`", "give either `general` or `setups`, not both"))
                }
                (None, true) => return Err(parse_err("field `sebens_carroll`", "needs `setups` or `general`")),
                (Some(w), true) => {
                    for (i, x) in w.iter().enumerate() {
                        parse_weight(x).map_err(|e| parse_err(format!("field `sebens_carroll.general[{i}]`"), e.to_string()))?;
                    }
                }
                (None, false) => {
                    setup_tables(sc)?;
                }
            }
        }
        Parameters::McQueenVaidman(m) => {
            let n = match (m.n, &m.weights) {
                (Some(n), None) => n,
                (None, Some(w)) => w.len(),
                _ => return Err(parse_err("field `mcqueen_vaidman`", "give exactly one of `n` or `weights`")),
            };
            if n < 2 {
                return Err(parse_err("field `mcqueen_vaidman`", "needs at least two stations"));
            }
            if let Some(r) = &m.remote {
                let in_range = |s: usize| (1..=n).contains(&s);
                match (&r.merge, r.random_off) {
                    (Some(b), None) if b.len() >= 2 && b.iter().all(|&s| in_range(s)) => {}
                    (None, Some(l)) if in_range(l) => {}
                    _ => {
                        return Err(parse_err(
                            "field `mcqueen_vaidman.remote`",
                            format!("give `merge` (two or more stations) or `random_off`, with stations in 1..={n}"),
                        ))
                    }
                }
            }
        }
        Parameters::DeutschWallace(DeutschWallaceParams::Erasure { rho1, rho2 }) => {
            for (name, s) in [("rho1", rho1), ("rho2", rho2)] {
                let sources = [s.pure.is_some(), s.mixed.is_some(), s.diagonal.is_some(), s.file.is_some()];
                if sources.iter().filter(|&&b| b).count() != 1 {
                    return Err(parse_err(
                        format!("field `deutsch_wallace.{name}`"),
                        "give exactly one of `pure`, `mixed`, `diagonal`, `file`",
                    ));
                }
            }
        }
        Parameters::DeutschWallace(_) => {}
    }
    Ok(())
}

pub(super) fn execute(file: &ScenarioFile, opts: &RunOptions, tol: &Tolerances) -> Result<Report> {
    let seed = |own: Option<u64>| opts.seed.or(own).or(file.seed).unwrap_or(0);
    let mut report = Report::new(file.id.clone(), file.kind());
    match &file.parameters {
        Parameters::Decoherence(p) => decoherence(&mut report, file, p, seed(p.seed))?,
        Parameters::Branching(w) => branching(&mut report, file, w, tol)?,
        Parameters::SebensCarroll(p) => sebens_carroll(&mut report, p, tol)?,
        Parameters::McQueenVaidman(p) => {
            let s = seed(p.remote.as_ref().and_then(|r| r.seed));
            mcqueen_vaidman(&mut report, p, s, tol)?
        }
        Parameters::DeutschWallace(p) => deutsch_wallace(&mut report, file, p, &seed, tol)?,
    }
    Ok(report)
}

fn decoherence(report: &mut Report, file: &ScenarioFile, p: &DecoherenceParams, seed: u64) -> Result<()> {
    let bath = SpinBath::random(p.n_env, p.coupling[0], p.coupling[1], seed);
    let curve = DecayCurve::from_bath(&bath)?;
    let fit = curve.fit;
    report.set("n_env", Quantity::number(p.n_env as f64));
    report.set("tau_d", Quantity::number(fit.tau_d));
    report.set("amplitude", Quantity::number(fit.amplitude));
    report.set("r_squared", Quantity::number(fit.r_squared));
    let late = 10.0 * fit.tau_d;
    report.set("overlap_at_10tau", Quantity::number(bath.overlap(late).abs()));
    report.set("envelope_at_10tau", Quantity::number(overlap_decay(DecayParams::new(fit.tau_d, late)?)));

    let mut t = Table::new("overlap |⟨E1(t)|E2(t)⟩| against the fitted envelope", &["t", "overlap", "fit"]);
    let stride = (curve.samples.len() / 10).max(1);
    for &(time, y) in curve.samples.iter().step_by(stride) {
        let model = fit.amplitude * (-time / fit.tau_d).exp();
        t.push(vec![format!("{time:.4}"), format!("{y:.6}"), format!("{model:.6}")]);
    }
    report.tables.push(t);
    if let Some(path) = &p.csv {
        let path = file.resolve(path);
        let out = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        curve.write_csv(out)?;
        report.notes.push(format!("decay curve written to {}", path.display()));
    }
    Ok(())
}

fn with_identity(part: &MacrostatePartition, merge: &BTreeMap<String, String>, tol: &Tolerances) -> Result<MacrostatePartition> {
    if merge.is_empty() {
        return Ok(part.clone());
    }
    let mut full = merge.clone();
    for l in part.labels() {
        full.entry(l.to_string()).or_insert_with(|| l.to_string());
    }
    part.merge(&full, tol)
}

fn branch_quantities(report: &mut Report, dec: &BranchDecomposition, tol: &Tolerances) {
    report.set("branches", Quantity::number(dec.len() as f64));
    report.set("ct_norm", Quantity::number(dec.ct_norm));
    report.set("omitted_weight", Quantity::number(dec.omitted_weight));
    for b in &dec.branches {
        report.set(format!("weight:{}", b.label), Quantity::with_fraction(b.weight, fraction(b.weight, tol)));
        report.set(format!("purity:{}", b.label), Quantity::number(purity(&b.state)));
    }
    let br = BranchReport::new(dec);
    let mut t = Table::new("branches", &["branch", "weight", "exact", "purity"]);
    for r in br.rows {
        t.push(vec![
            r.label,
            format!("{:.12}", r.weight),
            r.rational.unwrap_or_else(|| "-".into()),
            format!("{:.6}", r.purity),
        ]);
    }
    report.tables.push(t);
}

fn branching(report: &mut Report, file: &ScenarioFile, w: &World, tol: &Tolerances) -> Result<()> {
    match w {
        World::ThreeBranch {
            partition,
            time,
            merge,
            component,
        } => {
            let world = ThreeBranchWorld::new(GridSpec::default())?;
            let rho = match (component, time) {
                (super::Component::Mixture, Time::T1) => world.rho_t1(tol)?,
                (super::Component::Mixture, Time::T2) => world.rho_t2(tol)?,
                (super::Component::Psi2, Time::T1) => world.rho2_t1(),
                (super::Component::Psi2, Time::T2) => world.rho2_t2()?,
                (super::Component::Psi3, Time::T1) => world.rho3_t1(),
                (super::Component::Psi3, Time::T2) => world.rho3_t2()?,
            };
            let base = match partition {
                Grain::Coarse => world.coarse_partition()?,
                Grain::Fine => world.fine_partition(tol)?,
            };
            let part = with_identity(&base, merge, tol)?;
            let dec = decompose(&rho, &part, tol)?;
            branch_quantities(report, &dec, tol);
            report.set("micro_overlap", Quantity::number(world.micro_overlap()));
            if *partition == Grain::Coarse && merge.is_empty() && *time == Time::T2 && *component == super::Component::Mixture {
                let mut t = Table::new("structural weights", &["branch", "weight"]);
                for (label, r) in three_branch_structure() {
                    report.set(
                        format!("structural:{label}"),
                        Quantity::with_fraction(*r.numer() as f64 / *r.denom() as f64, Some(r.to_string())),
                    );
                    t.push(vec![label, r.to_string()]);
                }
                report.tables.push(t);
            }
        }
        World::TwoBranch { overlap } => {
            let (layout, rho) = two_branch_with_overlap(*overlap)?;
            let sub = partial_trace(&rho, &layout, &["x"])?;
            let dec = decompose(&sub, &two_site_partition()?, tol)?;
            branch_quantities(report, &dec, tol);
            report.notes.push(format!("branches of the subsystem state; pointer overlap {overlap}"));
        }
        World::Matrix {
            state_file,
            basis_labels,
            merge,
        } => {
            let path = file.resolve(state_file);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let doc = MatrixDocument::from_json(&text)?;
            tol.check_dim(doc.dim)?;
            let rho = doc.to_state(tol)?;
            if basis_labels.len() != rho.dim() {
                return Err(parse_err(
                    "field `branching.basis_labels`",
                    format!("{} labels for a state of dimension {}", basis_labels.len(), rho.dim()),
                ));
            }
            let part = with_identity(&MacrostatePartition::from_basis_labels(basis_labels)?, merge, tol)?;
            let dec = decompose(&rho, &part, tol)?;
            branch_quantities(report, &dec, tol);
        }
    }
    Ok(())
}

/// Set-up tables of a scenario, with row sets checked across set-ups.
pub(super) fn setup_tables(p: &SebensCarrollParams) -> Result<Vec<SetupTable>> {
    let mut all_rows: Vec<(String, String)> = Vec::new();
    for s in &p.setups {
        for r in &s.rows {
            if !all_rows.iter().any(|(l, _)| *l == r.label) {
                all_rows.push((r.label.clone(), s.label.clone()));
            }
        }
    }
    let mut tables = Vec::new();
    for s in &p.setups {
        for (label, owner) in &all_rows {
            if !s.rows.iter().any(|r| r.label == *label) {
                return Err(parse_err(
                    format!("set-up `{}`, row `{label}`", s.label),
                    format!("row is missing; set-up `{owner}` has it"),
                ));
            }
        }
        let rows: Vec<Row> = s.rows.iter().map(|r| Row::new(r.kind, r.label.clone(), r.cells.clone())).collect();
        let table = match &s.weights {
            Some(w) => {
                let weights = w
                    .iter()
                    .map(|x| parse_weight(x))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| parse_err(format!("set-up `{}`, weights", s.label), e.to_string()))?;
                SetupTable::new(s.label.clone(), rows, weights)?
            }
            None => SetupTable::equal_weight(s.label.clone(), rows)?,
        };
        tables.push(table);
    }
    Ok(tables)
}

fn table_view(t: &SetupTable) -> Table {
    let mut columns = vec!["row".to_string()];
    columns.extend((0..t.columns()).map(|c| t.column_label(c)));
    let mut out = Table {
        title: format!("set-up {}", t.label()),
        columns,
        rows: Vec::new(),
    };
    for r in t.rows() {
        let mut row = vec![r.label.clone()];
        row.extend(r.cells.iter().cloned());
        out.push(row);
    }
    let mut w = vec!["weight".to_string()];
    w.extend(t.weights().iter().map(|x| x.to_string()));
    out.push(w);
    out
}

/// Born weight of each outcome-display symbol, summed over its columns.
fn born_weights(t: &SetupTable) -> Vec<(String, BigRational)> {
    let d = t.outcome_display();
    d.alphabet
        .iter()
        .map(|s| {
            let w = t
                .column_set(&d.label, s)
                .iter()
                .map(|&c| t.weights()[c].clone())
                .sum();
            (s.clone(), w)
        })
        .collect()
}

fn sebens_carroll(report: &mut Report, p: &SebensCarrollParams, tol: &Tolerances) -> Result<()> {
    let tables = match &p.general {
        Some(w) => {
            let weights = w.iter().map(|x| parse_weight(x)).collect::<Result<Vec<_>>>()?;
            let (a, b) = general_strategy_tables(&weights, tol)?;
            report.set(format!("diagonalization:{}", a.label()), Quantity::Flag(is_diagonalization(&a)));
            report.set(format!("same_branch:{}", b.label()), Quantity::Flag(is_same_branch(&b)));
            vec![a, b]
        }
        None => setup_tables(p)?,
    };
    for t in &tables {
        report.tables.push(table_view(t));
        for (symbol, w) in born_weights(t) {
            report.set(format!("born:{}:{symbol}", t.label()), Quantity::exact(&w));
        }
        let classes: Vec<String> = same_branch_classes(t)
            .iter()
            .map(|(_, members)| {
                let syms: Vec<&str> = members.iter().map(|(_, s)| s.as_str()).collect();
                format!("{{{}}}", syms.join(", "))
            })
            .collect();
        report.set(format!("classes:{}", t.label()), Quantity::Text(classes.join(" ")));
        match build_setup(t, tol) {
            Ok((rho, _, part)) => {
                let dec = decompose(&rho, &part, tol)?;
                report.set(format!("branches:{}", t.label()), Quantity::number(dec.len() as f64));
                for b in &dec.branches {
                    report.set(format!("weight:{}", b.label), Quantity::with_fraction(b.weight, fraction(b.weight, tol)));
                }
            }
            Err(Error::Capacity { requested, limit }) => report.notes.push(format!(
                "set-up {} has dimension {requested} > {limit}; branch weights taken from the table",
                t.label()
            )),
            Err(e) => return Err(e),
        }
    }

    let sol = solve_credences(&tables, tol)?;
    report.set("target", Quantity::Text(sol.target.clone()));
    report.set("chain_length", Quantity::number(sol.derivation.len() as f64));
    for (label, v) in &sol.branches {
        report.set(format!("branch:{label}"), Quantity::exact(v));
    }
    for t in &tables {
        let outcome = &t.outcome_display().label;
        for (r, v) in sol.symbols.iter().filter(|(r, _)| r.setup == t.label()) {
            report.set(format!("symbol:{}:{}:{}", r.setup, r.display, r.symbol), Quantity::exact(v));
            if r.display == *outcome {
                report.set(format!("credence:{}:{}", r.setup, r.symbol), Quantity::exact(v));
            }
        }
    }
    let mut esp = Table::new("ESP comparisons", &["set-ups", "display", "distance", "passed"]);
    for c in &sol.esp_checks {
        report.set(format!("esp:{}/{}:{}", c.left, c.right, c.display), Quantity::Flag(c.passed));
        esp.push(vec![
            format!("{} / {}", c.left, c.right),
            c.display.clone(),
            format!("{:.3e}", c.distance),
            c.passed.to_string(),
        ]);
    }
    report.tables.push(esp);
    let mut creds = Table::new(format!("credences in {}", sol.target), &["branch", "credence", "decimal"]);
    for (label, v) in &sol.branches {
        creds.push(vec![label.clone(), v.to_string(), format!("{:.12}", super::report::rational_value(v))]);
    }
    report.tables.push(creds);
    report.derivation = sol.chain_lines();
    Ok(())
}

fn mcqueen_vaidman(report: &mut Report, p: &McQueenVaidmanParams, seed: u64, tol: &Tolerances) -> Result<()> {
    let base = match (&p.weights, p.n) {
        (Some(w), _) => {
            let w = w.iter().map(|x| parse_weight(x)).collect::<Result<Vec<_>>>()?;
            mv::build_weighted(&w, tol)?
        }
        (None, Some(n)) => mv::build_symmetric(n, tol)?,
        (None, None) => unreachable!("validated"),
    };
    let n = base.n();
    let transform = match &p.remote {
        None => None,
        Some(RemoteSpec { merge: Some(b), .. }) => {
            Some(RemoteTransform::merge(&b.iter().map(|s| s - 1).collect::<Vec<_>>())?)
        }
        Some(RemoteSpec {
            random_off: Some(l), ..
        }) => Some(RemoteTransform::random_off(n, l - 1, seed)?),
        Some(_) => unreachable!("validated"),
    };
    let pre = match &transform {
        Some(t) => {
            let parent_post = mv::measure_stations(&base)?;
            for m in (0..n).filter(|m| !t.block.contains(m)) {
                let inv = mv::remote_invariance(&parent_post, m, t)?;
                report.set(format!("remote_invariance:{}", mv::station_label(m + 1)), Quantity::Flag(inv));
            }
            mv::apply_remote(&base, t.clone())?
        }
        None => base,
    };
    let post = mv::measure_stations(&pre)?;
    let creds = mv::derive_credences(&post)?;
    report.set("n", Quantity::number(n as f64));
    report.set("derived", Quantity::Flag(creds.is_derived()));
    if let CredenceStatus::Underived(reason) = &creds.status {
        report.notes.push(format!("credences not derived: {reason}"));
    }
    for c in &creds.checks {
        report.set(format!("check:{}", c.description), Quantity::Flag(c.passed));
    }
    let mut t = Table::new("station branches", &["branch", "born weight", "credence"]);
    for (label, w) in &creds.born {
        report.set(format!("born:{label}"), Quantity::with_fraction(*w, fraction(*w, tol)));
        let c = creds.credence(label).map_or_else(|| "-".to_string(), |v| v.to_string());
        t.push(vec![label.clone(), format!("{w:.12}"), c]);
    }
    report.tables.push(t);
    for (label, v) in &creds.credences {
        report.set(format!("credence:{label}"), Quantity::exact(v));
    }
    if !creds.undetermined.is_empty() {
        report.set("undetermined", Quantity::Text(creds.undetermined.join(", ")));
        report.notes.push(format!(
            "individual credences of {} are not fixed; only their total is",
            creds.undetermined.join(", ")
        ));
    }
    report.derivation = creds
        .checks
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let verdict = if c.passed { "holds" } else { "fails" };
            format!("{}. {} (distance {:.3e}): {verdict}", i + 1, c.description, c.distance)
        })
        .collect();
    Ok(())
}

fn load_state(spec: &StateSpec, file: &ScenarioFile, seed: u64, tol: &Tolerances) -> Result<DensityMatrix> {
    if let Some(d) = spec.pure {
        tol.check_dim(d)?;
        return Ok(DensityMatrix::pure(&Ket::basis(d, 0)));
    }
    if let Some(d) = spec.mixed {
        tol.check_dim(d)?;
        return Ok(DensityMatrix::maximally_mixed(d));
    }
    if let Some(values) = &spec.diagonal {
        tol.check_dim(values.len())?;
        let rho = DensityMatrix::diagonal(values, tol)?;
        return match spec.seed.map(|s| s ^ seed) {
            Some(s) => {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                apply_unitary(&rho, &Unitary::random(&mut rng, values.len()))
            }
            None => Ok(rho),
        };
    }
    let path = file.resolve(spec.file.as_ref().expect("validated"));
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let doc = MatrixDocument::from_json(&text)?;
    tol.check_dim(doc.dim)?;
    doc.to_state(tol)
}

fn spectrum_text(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn deutsch_wallace(
    report: &mut Report,
    file: &ScenarioFile,
    p: &DeutschWallaceParams,
    seed: &dyn Fn(Option<u64>) -> u64,
    tol: &Tolerances,
) -> Result<()> {
    match p {
        DeutschWallaceParams::Erasure { rho1, rho2 } => {
            let base = seed(None);
            let a = load_state(rho1, file, base, tol)?;
            let b = load_state(rho2, file, base, tol)?;
            let v = dw::erasure_exists(&a, &b, tol)?;
            report.set("feasible", Quantity::Flag(v.feasible));
            report.set(
                "spectral_distance",
                Quantity::with_fraction(v.spectral_distance, fraction(v.spectral_distance, tol)),
            );
            if let Some(r) = v.residual {
                report.set("residual", Quantity::number(r));
            }
            let (sa, sb) = (dw::sector_of(&a, tol), dw::sector_of(&b, tol));
            report.set("sector:rho1", Quantity::Text(sa.to_string()));
            report.set("sector:rho2", Quantity::Text(sb.to_string()));
            report.set("same_sector", Quantity::Flag(sa == sb));
            report.set("entropy:rho1", Quantity::number(vn_entropy(&a, 2.0, tol)?));
            report.set("entropy:rho2", Quantity::number(vn_entropy(&b, 2.0, tol)?));
            let mut t = Table::new("spectra", &["state", "eigenvalues", "purity"]);
            t.push(vec!["rho1".into(), spectrum_text(&v.spectra.0), format!("{:.6}", purity(&a))]);
            t.push(vec!["rho2".into(), spectrum_text(&v.spectra.1), format!("{:.6}", purity(&b))]);
            report.tables.push(t);
            report.notes.push(NON_UNITARY_NOTE.to_string());
        }
        DeutschWallaceParams::Equivalence { alpha, beta } => {
            let r = dw::equivalence_demo(linalg::c(alpha[0], alpha[1]), linalg::c(beta[0], beta[1]), tol)?;
            report.set("reward_weight:A", Quantity::with_fraction(r.reward_weight_a, fraction(r.reward_weight_a, tol)));
            report.set("reward_weight:B", Quantity::with_fraction(r.reward_weight_b, fraction(r.reward_weight_b, tol)));
            report.set("state_distance", Quantity::number(r.state_distance));
            report.set("states_equal", Quantity::Flag(r.states_equal));
            report.set("reward_block_distance", Quantity::number(r.reward_block_distance));
            report.set("verdict", Quantity::Text(r.verdict.clone().unwrap_or_else(|| "none".into())));
            let mut t = Table::new("erasures", &["act", "branch", "unitary residual"]);
            for e in &r.erasures {
                t.push(vec![e.act.clone(), e.branch.clone(), format!("{:.3e}", e.unitary.residual())]);
            }
            report.tables.push(t);
            report.notes.extend(r.notes.iter().cloned());
        }
        DeutschWallaceParams::Utility { weights, utility } => {
            let labels: Vec<&String> = weights.keys().collect();
            let exact = weights
                .iter()
                .map(|(k, w)| parse_weight(w).map_err(|e| parse_err(format!("field `deutsch_wallace.weights.{k}`"), e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let values: Vec<f64> = exact.iter().map(super::report::rational_value).collect();
            let rho = DensityMatrix::diagonal(&values, tol)?;
            let part = MacrostatePartition::from_basis_labels(&labels)?;
            let dec = decompose(&rho, &part, tol)?;
            for (l, w) in labels.iter().zip(&exact) {
                report.set(format!("weight:{l}"), Quantity::exact(w));
            }
            let eu = dw::expected_utility(&dec, utility)?;
            report.set("expected_utility", Quantity::number(eu));
        }
    }
    Ok(())
}
