//! Redundancy by value: a core rule is dropped when the rest of the core
//! already catches every failure it would raise.
//!
//! Two mechanisms are provided. The symbolic check looks for another rule
//! with the same canonical body, a covering context and a weaker predicate.
//! The empirical check uses an [`OutcomeMatrix`] and asks whether every
//! group where the rule fails is also failed by some other rule.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::containment::context_covers;
use crate::decimal::Decimal;
use crate::evaluation::{OutcomeKind, OutcomeMatrix};
use crate::partition::{Witness, WitnessKind};
use crate::rule::{Context, Predicate, Relop, Rule};

pub const SYMBOLIC_PREFIX: &str = "symbolic";
pub const EMPIRICAL_PREFIX: &str = "empirical";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueCheckMode {
    Off,
    #[default]
    Symbolic,
    Empirical,
    Both,
}

impl ValueCheckMode {
    pub fn needs_data(self) -> bool {
        matches!(self, ValueCheckMode::Empirical | ValueCheckMode::Both)
    }
}

impl fmt::Display for ValueCheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueCheckMode::Off => "off",
            ValueCheckMode::Symbolic => "symbolic",
            ValueCheckMode::Empirical => "empirical",
            ValueCheckMode::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueCheckConfig {
    pub mode: ValueCheckMode,
    /// Minimum number of observed failures before an empirical verdict.
    pub min_support: usize,
}

impl Default for ValueCheckConfig {
    fn default() -> Self {
        ValueCheckConfig { mode: ValueCheckMode::Symbolic, min_support: 1 }
    }
}

impl ValueCheckConfig {
    pub fn new(mode: ValueCheckMode, min_support: usize) -> Self {
        ValueCheckConfig { mode, min_support: min_support.max(1) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueCheckError {
    #[error("value check mode `{0}` needs a dataset")]
    DataMissing(ValueCheckMode),
}

/// The set of body values on which a predicate holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionSet {
    Point(Decimal),
    AllExcept(Decimal),
    Below { bound: Decimal, inclusive: bool },
    Above { bound: Decimal, inclusive: bool },
}

impl SolutionSet {
    pub fn of(p: &Predicate) -> Self {
        let v = p.threshold.clone();
        match p.relop {
            Relop::Eq => SolutionSet::Point(v),
            Relop::Ne => SolutionSet::AllExcept(v),
            Relop::Lt => SolutionSet::Below { bound: v, inclusive: false },
            Relop::Le => SolutionSet::Below { bound: v, inclusive: true },
            Relop::Gt => SolutionSet::Above { bound: v, inclusive: false },
            Relop::Ge => SolutionSet::Above { bound: v, inclusive: true },
        }
    }

    pub fn contains(&self, x: &Decimal) -> bool {
        match self {
            SolutionSet::Point(v) => x == v,
            SolutionSet::AllExcept(v) => x != v,
            SolutionSet::Below { bound, inclusive } => x < bound || (*inclusive && x == bound),
            SolutionSet::Above { bound, inclusive } => x > bound || (*inclusive && x == bound),
        }
    }

    pub fn is_subset_of(&self, other: &SolutionSet) -> bool {
        use SolutionSet::*;
        match (self, other) {
            (Point(v), _) => other.contains(v),
            // the only strict superset of R \ {v} is R, which no predicate denotes
            (AllExcept(v), AllExcept(w)) => v == w,
            (AllExcept(_), _) => false,
            (Below { .. } | Above { .. }, AllExcept(w)) => !self.contains(w),
            (Below { bound: u, inclusive: a }, Below { bound: w, inclusive: b }) => u < w || (u == w && (*b || !*a)),
            (Above { bound: u, inclusive: a }, Above { bound: w, inclusive: b }) => u > w || (u == w && (*b || !*a)),
            (Below { .. }, _) | (Above { .. }, _) => false,
        }
    }
}

/// Every value satisfying `pi` also satisfies `pj`.
pub fn predicate_implies(pi: &Predicate, pj: &Predicate) -> bool {
    SolutionSet::of(pi).is_subset_of(&SolutionSet::of(pj))
}

/// First rule in `others` (by id) with the same canonical body, a context
/// that evaluates the body the same way wherever `ri` applies, and a
/// predicate implied by `ri`'s.
pub fn value_check_symbolic(ri: &Rule, others: &[&Rule]) -> Option<Witness> {
    let body = ri.canonical_body();
    let mut sorted: Vec<&&Rule> = others.iter().filter(|r| r.id != ri.id).collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    sorted
        .into_iter()
        .find(|rj| {
            same_value_scope(&rj.context, &ri.context)
                && predicate_implies(&ri.predicate, &rj.predicate)
                && rj.canonical_body() == body
        })
        .map(|rj| Witness {
            kind: WitnessKind::ValueImpliedBy,
            by: vec![rj.id.clone()],
            detail: format!("{SYMBOLIC_PREFIX}: ({}) implies ({})", ri.predicate, rj.predicate),
        })
}

/// `outer` sees the same rows and columns as `inner` on every group `inner`
/// applies to. Class and currency scopes change the body's value, so they
/// must match; the period only has to cover.
fn same_value_scope(outer: &Context, inner: &Context) -> bool {
    outer.classes == inner.classes && outer.ccy == inner.ccy && context_covers(outer, inner)
}

/// Result of the empirical check, with the reason when it does not fire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmpiricalVerdict {
    Implied(Witness),
    InsufficientSupport { failures: usize },
    Uncovered { uncovered: usize },
}

impl EmpiricalVerdict {
    pub fn into_witness(self) -> Option<Witness> {
        match self {
            EmpiricalVerdict::Implied(w) => Some(w),
            _ => None,
        }
    }
}

pub fn empirical_verdict(ri: &Rule, others: &[&Rule], matrix: &OutcomeMatrix, min_support: usize) -> EmpiricalVerdict {
    let Some(row) = matrix.row(&ri.id) else {
        return EmpiricalVerdict::InsufficientSupport { failures: 0 };
    };
    let failing: Vec<usize> =
        row.iter().enumerate().filter(|(_, o)| o.kind == OutcomeKind::Fail).map(|(g, _)| g).collect();
    if failing.len() < min_support.max(1) {
        return EmpiricalVerdict::InsufficientSupport { failures: failing.len() };
    }
    let other_rows: Vec<(&str, &[crate::evaluation::Outcome])> = others
        .iter()
        .filter(|r| r.id != ri.id)
        .filter_map(|r| matrix.row(&r.id).map(|row| (r.id.as_str(), row)))
        .collect();
    let mut by = BTreeSet::new();
    let mut uncovered = 0;
    for &g in &failing {
        let mut covered = false;
        for (id, row) in &other_rows {
            if row[g].kind == OutcomeKind::Fail {
                by.insert(id.to_string());
                covered = true;
            }
        }
        if !covered {
            uncovered += 1;
        }
    }
    if uncovered > 0 {
        return EmpiricalVerdict::Uncovered { uncovered };
    }
    EmpiricalVerdict::Implied(Witness {
        kind: WitnessKind::ValueImpliedBy,
        by: by.into_iter().collect(),
        detail: format!("{EMPIRICAL_PREFIX}: {} failing groups covered", failing.len()),
    })
}

/// Fires when every group where `ri` fails (at least `min_support` of
/// them) is failed by some rule in `others`. NOT_EVALUABLE cells never
/// count as failures.
pub fn value_check_empirical(
    ri: &Rule,
    others: &[&Rule],
    matrix: &OutcomeMatrix,
    min_support: usize,
) -> Option<Witness> {
    empirical_verdict(ri, others, matrix, min_support).into_witness()
}

/// Dispatches on `config.mode`; `Both` tries symbolic first.
pub fn value_check(
    ri: &Rule,
    others: &[&Rule],
    config: &ValueCheckConfig,
    matrix: Option<&OutcomeMatrix>,
) -> Result<Option<Witness>, ValueCheckError> {
    let need_matrix = || matrix.ok_or(ValueCheckError::DataMissing(config.mode));
    Ok(match config.mode {
        ValueCheckMode::Off => None,
        ValueCheckMode::Symbolic => value_check_symbolic(ri, others),
        ValueCheckMode::Empirical => value_check_empirical(ri, others, need_matrix()?, config.min_support),
        ValueCheckMode::Both => {
            let m = need_matrix()?;
            value_check_symbolic(ri, others).or_else(|| value_check_empirical(ri, others, m, config.min_support))
        }
    })
}
