use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use super::table::{Row, RowKind, SetupTable};
use crate::config::Tolerances;
use crate::error::{Error, Result};

pub const OUTCOME_DISPLAY: &str = "D0";

pub fn star(j: usize) -> String {
    format!("⋆{j}")
}

pub fn star_prime(j: usize) -> String {
    format!("⋆′{j}")
}

/// Equal-amplitude set-up pair realizing `outcome_weights = k_i / N`.
///
/// Both tables have `N` columns; `D0` shows outcome `i` on `k_i` of them.
/// Display `D_j` shows `⋆′_j` on column `j` in α (diagonalization) and on
/// column 1 in β (same branch), `⋆_j` elsewhere.
pub fn general_strategy_tables(
    outcome_weights: &[BigRational],
    tol: &Tolerances,
) -> Result<(SetupTable, SetupTable)> {
    if outcome_weights.is_empty() {
        return Err(Error::UnsupportedWeights("no outcome weights".into()));
    }
    if let Some(w) = outcome_weights.iter().find(|w| !w.is_positive()) {
        return Err(Error::UnsupportedWeights(format!("weight {w} is not positive")));
    }
    let total: BigRational = outcome_weights.iter().sum();
    if !total.is_one() {
        return Err(Error::UnsupportedWeights(format!("weights sum to {total}, not 1")));
    }
    let n_big = outcome_weights
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let n = match n_big.to_usize() {
        Some(n) if n <= tol.max_denominator => n,
        _ => {
            return Err(Error::Capacity {
                requested: n_big.to_usize().unwrap_or(usize::MAX),
                limit: tol.max_denominator,
            })
        }
    };
    let mut outcomes = Vec::with_capacity(n);
    for (i, w) in outcome_weights.iter().enumerate() {
        let k = (w * BigRational::from_integer(n_big.clone()))
            .to_integer()
            .to_usize()
            .expect("k_i <= N");
        outcomes.extend(std::iter::repeat_n(i + 1, k));
    }
    let system = Row::new(RowKind::System, "System", outcomes.iter().map(|i| format!("O{i}")).collect());
    let d0 = Row::new(RowKind::Display, OUTCOME_DISPLAY, outcomes.iter().map(|i| i.to_string()).collect());
    let aux = |diagonal: bool| -> Vec<Row> {
        (1..=n)
            .map(|j| {
                let primed = if diagonal { j - 1 } else { 0 };
                let cells = (0..n)
                    .map(|c| if c == primed { star_prime(j) } else { star(j) })
                    .collect();
                let mut row = Row::new(RowKind::Display, format!("D{j}"), cells);
                row.alphabet = vec![star(j), star_prime(j)];
                row
            })
            .collect()
    };
    let build = |label: &str, diagonal: bool| {
        let mut rows = vec![system.clone(), d0.clone()];
        rows.extend(aux(diagonal));
        SetupTable::equal_weight(label, rows)
    };
    Ok((build("α", true)?, build("β", false)?))
}

/// Every `⋆′_j` of the table sits in a distinct column.
pub fn is_diagonalization(table: &SetupTable) -> bool {
    let mut used = std::collections::BTreeSet::new();
    table.displays().filter(|d| d.label != OUTCOME_DISPLAY).all(|d| {
        let j = &d.label[1..];
        let cols = table.column_set(&d.label, &format!("⋆′{j}"));
        cols.len() == 1 && used.insert(*cols.first().expect("one column"))
    })
}

/// Every `⋆′_j` of the table sits in one common column.
pub fn is_same_branch(table: &SetupTable) -> bool {
    let sets: Vec<_> = table
        .displays()
        .filter(|d| d.label != OUTCOME_DISPLAY)
        .map(|d| table.column_set(&d.label, &format!("⋆′{}", &d.label[1..])))
        .collect();
    sets.first()
        .is_some_and(|first| first.len() == 1 && sets.iter().all(|s| s == first))
}

/// Exact rationals for decimal weights, accepted only when each lies within
/// `1e-12` of a fraction with denominator at most `max_den`.
pub fn rationalize(weights: &[f64], max_den: usize) -> Result<Vec<BigRational>> {
    weights
        .iter()
        .map(|&w| {
            (1..=max_den)
                .find_map(|q| {
                    let p = (w * q as f64).round();
                    ((w - p / q as f64).abs() <= 1e-12)
                        .then(|| BigRational::new(BigInt::from(p as i64), BigInt::from(q)))
                })
                .ok_or_else(|| {
                    Error::UnsupportedWeights(format!(
                        "{w} is not a rational with denominator <= {max_den}"
                    ))
                })
        })
        .collect()
}
