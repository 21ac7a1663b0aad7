//! Splitting a rule set into core and correlated rules.
//!
//! A rule is core when its body has height 1, or when no other rule's body
//! is properly contained in it (with that rule's context covering its own).
//! Rules that contain another rule's body are correlated: the contained
//! rule already checks the shared sub-expression. Exact duplicates keep
//! only their lexicographically smallest id. Finally each core rule is
//! value-checked against the remaining core, and rules whose failures are
//! already caught elsewhere move to the correlated set.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::containment::{relate_canonical, ContainmentMode, RelationKind};
use crate::decimal::Decimal;
use crate::evaluation::OutcomeMatrix;
use crate::expr::CanonicalTree;
use crate::rule::{Action, Context, Predicate, Rule, RuleSet};
use crate::value_check::{value_check, ValueCheckConfig, ValueCheckError, EMPIRICAL_PREFIX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `by` names the rule whose body sits inside this one.
    ContainedBy,
    DuplicateOf,
    ValueImpliedBy,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::ContainedBy => "CONTAINED_BY",
            WitnessKind::DuplicateOf => "DUPLICATE_OF",
            WitnessKind::ValueImpliedBy => "VALUE_IMPLIED_BY",
        })
    }
}

/// Why a rule was moved to the correlated set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub by: Vec<String>,
    pub detail: String,
}

impl Witness {
    /// Edge kind this witness draws in the relationship graph; duplicates draw none.
    pub fn edge_kind(&self) -> Option<EdgeKind> {
        match self.kind {
            WitnessKind::ContainedBy => Some(EdgeKind::Containment),
            WitnessKind::DuplicateOf => None,
            WitnessKind::ValueImpliedBy if self.detail.starts_with(EMPIRICAL_PREFIX) => Some(EdgeKind::ValueEmpirical),
            WitnessKind::ValueImpliedBy => Some(EdgeKind::ValueSymbolic),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Containment,
    ValueSymbolic,
    ValueEmpirical,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Containment => "containment",
            EdgeKind::ValueSymbolic => "value-symbolic",
            EdgeKind::ValueEmpirical => "value-empirical",
        })
    }
}

/// From the surviving rule to the rule it makes redundant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correlated {
    pub id: String,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub total: usize,
    pub core: usize,
    pub correlated: usize,
    /// `correlated / total` as a percentage with one decimal, e.g. `17.0%`.
    pub correlated_pct: String,
}

impl Stats {
    pub fn new(core: usize, correlated: usize) -> Self {
        let total = core + correlated;
        let pct = if total == 0 {
            Decimal::zero()
        } else {
            Decimal::from_i64(correlated as i64 * 100).checked_div(&Decimal::from_i64(total as i64)).expect("total > 0")
        };
        Stats { total, core, correlated, correlated_pct: format!("{}%", pct.to_fixed(1)) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub mode: ContainmentMode,
    pub rules: Vec<String>,
    pub core: Vec<String>,
    pub correlated: Vec<Correlated>,
    pub duplicates: Vec<Vec<String>>,
    pub edges: Vec<Edge>,
    pub stats: Stats,
}

impl PartitionReport {
    pub fn is_core(&self, id: &str) -> bool {
        self.core.binary_search_by(|c| c.as_str().cmp(id)).is_ok()
    }

    pub fn correlated_entry(&self, id: &str) -> Option<&Correlated> {
        self.correlated.iter().find(|c| c.id == id)
    }

    pub fn correlated_ids(&self) -> Vec<&str> {
        self.correlated.iter().map(|c| c.id.as_str()).collect()
    }

    /// Structural invariants every report must satisfy.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut all: Vec<&str> = self.core.iter().map(String::as_str).collect();
        all.extend(self.correlated_ids());
        all.sort_unstable();
        let input: Vec<&str> = self.rules.iter().map(String::as_str).collect();
        if all != input {
            return Err("core and correlated do not partition the input".into());
        }
        for c in &self.correlated {
            if c.witnesses.is_empty() {
                return Err(format!("correlated rule {} has no witness", c.id));
            }
            for w in &c.witnesses {
                let single = matches!(w.kind, WitnessKind::ContainedBy | WitnessKind::DuplicateOf);
                if w.by.is_empty() || (single && w.by.len() != 1) {
                    return Err(format!("malformed {} witness on {}", w.kind, c.id));
                }
                if let Some(b) = w.by.iter().find(|b| input.binary_search(&b.as_str()).is_err()) {
                    return Err(format!("witness {b} on {} is not an input rule", c.id));
                }
            }
        }
        for group in &self.duplicates {
            if group.len() < 2 {
                return Err("duplicate group smaller than 2".into());
            }
            if group.iter().filter(|id| self.is_core(id)).count() > 1 {
                return Err(format!("more than one core member in duplicate group {group:?}"));
            }
        }
        if self.stats != Stats::new(self.core.len(), self.correlated.len()) {
            return Err("stats do not match set sizes".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PartitionOptions {
    pub mode: ContainmentMode,
    pub value_check: ValueCheckConfig,
    /// Evaluate pairwise relations on the rayon pool. Output is identical.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error(transparent)]
    ValueCheck(#[from] ValueCheckError),
}

/// Groups of rules with equal canonical bodies, equal contexts, equal
/// predicates and equal actions. Each group is sorted; groups are sorted.
pub fn duplicates(rules: &RuleSet) -> Vec<Vec<String>> {
    let bodies: Vec<CanonicalTree> = rules.iter().map(Rule::canonical_body).collect();
    duplicate_groups(rules, &bodies)
}

fn duplicate_groups(rules: &RuleSet, bodies: &[CanonicalTree]) -> Vec<Vec<String>> {
    let mut by_key: HashMap<(&CanonicalTree, &Context, &Predicate, Action), Vec<String>> = HashMap::new();
    for (r, body) in rules.iter().zip(bodies) {
        by_key.entry((body, &r.context, &r.predicate, r.action)).or_default().push(r.id.clone());
    }
    let mut groups: Vec<Vec<String>> = by_key
        .into_values()
        .filter(|g| g.len() >= 2)
        .map(|mut g| {
            g.sort();
            g
        })
        .collect();
    groups.sort();
    groups
}

/// Shared per-rule state for the structural pass.
struct Prepared<'a> {
    rules: &'a RuleSet,
    bodies: Vec<CanonicalTree>,
    /// rule index -> smallest id of its duplicate group, when it is not that id
    duplicate_of: HashMap<usize, String>,
    groups: Vec<Vec<String>>,
}

impl<'a> Prepared<'a> {
    fn new(rules: &'a RuleSet) -> Self {
        let bodies: Vec<CanonicalTree> = rules.iter().map(Rule::canonical_body).collect();
        let groups = duplicate_groups(rules, &bodies);
        let mut duplicate_of = HashMap::new();
        for g in &groups {
            for id in &g[1..] {
                duplicate_of.insert(rules.position(id).expect("id from rule set"), g[0].clone());
            }
        }
        Prepared { rules, bodies, duplicate_of, groups }
    }

    /// Structural witnesses against rule `i`; empty means core.
    fn witnesses(&self, i: usize, mode: ContainmentMode) -> Vec<Witness> {
        let rule = &self.rules.rules()[i];
        let mut out = Vec::new();
        if let Some(first) = self.duplicate_of.get(&i) {
            out.push(Witness {
                kind: WitnessKind::DuplicateOf,
                by: vec![first.clone()],
                detail: "identical body, context, predicate and action".into(),
            });
        }
        if self.bodies[i].height() > 1 {
            for (j, other) in self.rules.iter().enumerate() {
                if j == i {
                    continue;
                }
                let rel = relate_canonical((&self.bodies[j], &other.context), (&self.bodies[i], &rule.context), mode);
                if rel == RelationKind::IInJ {
                    out.push(Witness {
                        kind: WitnessKind::ContainedBy,
                        by: vec![other.id.clone()],
                        detail: format!("{} inside {} ({mode})", self.bodies[j], self.bodies[i]),
                    });
                }
            }
        }
        sort_witnesses(&mut out);
        out
    }
}

fn sort_witnesses(ws: &mut [Witness]) {
    ws.sort_by(|a, b| a.by.cmp(&b.by).then(a.kind.cmp(&b.kind)));
}

/// Whether `rule` is a core rule of `rules` before value checking.
pub fn classify_core(rule: &Rule, rules: &RuleSet, mode: ContainmentMode) -> bool {
    let Some(i) = rules.position(&rule.id) else {
        return false;
    };
    Prepared::new(rules).witnesses(i, mode).is_empty()
}

/// Runs the full core/correlated split.
pub fn partition(
    rules: &RuleSet,
    options: &PartitionOptions,
    matrix: Option<&OutcomeMatrix>,
) -> Result<PartitionReport, PartitionError> {
    let vc = &options.value_check;
    if vc.mode.needs_data() && matrix.is_none() {
        return Err(ValueCheckError::DataMissing(vc.mode).into());
    }

    let prepared = Prepared::new(rules);
    let n = rules.len();
    let structural: Vec<Vec<Witness>> = if options.parallel {
        (0..n).into_par_iter().map(|i| prepared.witnesses(i, options.mode)).collect()
    } else {
        (0..n).map(|i| prepared.witnesses(i, options.mode)).collect()
    };

    // id -> witnesses, for every correlated rule
    let mut correlated: BTreeMap<String, Vec<Witness>> = BTreeMap::new();
    let mut core: Vec<&Rule> = Vec::new();
    for (rule, ws) in rules.iter().zip(structural) {
        if ws.is_empty() {
            core.push(rule);
        } else {
            correlated.insert(rule.id.clone(), ws);
        }
    }
    core.sort_by(|a, b| a.id.cmp(&b.id));

    // Value check in ascending id order against the current core; a rule
    // leaves only when the rules still in the core catch its failures.
    let candidates: Vec<&Rule> = core.clone();
    for ri in candidates {
        let others: Vec<&Rule> = core.iter().copied().filter(|r| r.id != ri.id).collect();
        if let Some(w) = value_check(ri, &others, vc, matrix)? {
            core.retain(|r| r.id != ri.id);
            correlated.insert(ri.id.clone(), vec![w]);
        }
    }

    let mut edges: Vec<Edge> = correlated
        .iter()
        .flat_map(|(id, ws)| {
            ws.iter()
                .filter_map(|w| w.edge_kind().map(|k| (w, k)))
                .flat_map(move |(w, kind)| w.by.iter().map(move |b| Edge { from: b.clone(), to: id.clone(), kind }))
        })
        .collect();
    edges.sort();
    edges.dedup();

    let mut ids: Vec<String> = rules.iter().map(|r| r.id.clone()).collect();
    ids.sort();
    let core_ids: Vec<String> = core.iter().map(|r| r.id.clone()).collect();
    let stats = Stats::new(core_ids.len(), correlated.len());
    Ok(PartitionReport {
        mode: options.mode,
        rules: ids,
        core: core_ids,
        correlated: correlated.into_iter().map(|(id, witnesses)| Correlated { id, witnesses }).collect(),
        duplicates: prepared.groups,
        edges,
        stats,
    })
}
