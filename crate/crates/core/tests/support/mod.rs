//! Reference implementations and generators shared by the integration tests.
//!
//! The oracles work on plain strings and brute-force enumeration so they do
//! not share code paths with the library under test.

#![allow(dead_code)]

pub mod props;

use std::collections::BTreeSet;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruleprune::rule::{CurrencyScope, Period};
use ruleprune::{Action, Context, Decimal, ExprTree, OpKind, Predicate, Relop, Rule, RuleSet};

pub const PARAMS: [&str; 8] = ["a", "b", "c", "d", "nav", "units", "fx_rate", "price"];

// ---------------------------------------------------------------------------
// canonical form

/// Canonical tree as an owned string tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OTree {
    pub text: String,
    pub label: &'static str,
    pub ac: bool,
    pub kids: Vec<OTree>,
}

fn op_label(op: OpKind) -> &'static str {
    match op {
        OpKind::Add => "add",
        OpKind::Sub => "sub",
        OpKind::Mul => "mul",
        OpKind::Div => "div",
        OpKind::Sum => "sum",
    }
}

fn node(label: &'static str, ac: bool, kids: Vec<OTree>) -> OTree {
    let text = format!("{label}({})", kids.iter().map(|k| k.text.as_str()).collect::<Vec<_>>().join(","));
    OTree { text, label, ac, kids }
}

pub fn oracle_tree(e: &ExprTree) -> OTree {
    match e {
        ExprTree::Param { name } => OTree { text: name.clone(), label: "", ac: false, kids: vec![] },
        ExprTree::Value { value } => OTree { text: value.to_string(), label: "", ac: false, kids: vec![] },
        ExprTree::Op { op, children } => {
            let label = op_label(*op);
            let ac = matches!(op, OpKind::Add | OpKind::Mul);
            let mut kids = Vec::new();
            for c in children {
                let t = oracle_tree(c);
                if ac && t.label == label {
                    kids.extend(t.kids);
                } else {
                    kids.push(t);
                }
            }
            if ac {
                kids.sort_by(|x, y| x.text.cmp(&y.text));
            }
            node(label, ac, kids)
        }
    }
}

pub fn oracle_canon(e: &ExprTree) -> String {
    oracle_tree(e).text
}

pub fn oracle_height(t: &OTree) -> usize {
    1 + t.kids.iter().map(oracle_height).max().unwrap_or(0)
}

/// Every rooted subtree's text, including the tree itself.
pub fn oracle_subtrees(t: &OTree) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn walk(t: &OTree, out: &mut BTreeSet<String>) {
        out.insert(t.text.clone());
        for k in &t.kids {
            walk(k, out);
        }
    }
    walk(t, &mut out);
    out
}

/// Subtrees plus every proper sub-multiset (size >= 2) of AC children.
pub fn oracle_embeddings(t: &OTree) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn walk(t: &OTree, out: &mut BTreeSet<String>) {
        out.insert(t.text.clone());
        if t.ac {
            let k = t.kids.len();
            for mask in 1u32..(1u32 << k) - 1 {
                if mask.count_ones() >= 2 {
                    let picked: Vec<OTree> =
                        (0..k).filter(|i| mask & (1 << i) != 0).map(|i| t.kids[i].clone()).collect();
                    out.insert(node(t.label, true, picked).text);
                }
            }
        }
        for c in &t.kids {
            walk(c, out);
        }
    }
    walk(t, &mut out);
    out
}

/// Proper containment of `candidate` inside `container`.
pub fn oracle_contains(container: &OTree, candidate: &OTree, ac: bool) -> bool {
    if container.text == candidate.text {
        return false;
    }
    let set = if ac { oracle_embeddings(container) } else { oracle_subtrees(container) };
    set.contains(&candidate.text)
}

pub fn oracle_covers(outer: &Context, inner: &Context) -> bool {
    let classes = match (&outer.classes, &inner.classes) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(o), Some(i)) => i.iter().all(|c| o.contains(c)),
    };
    let ccy = outer.ccy.is_none() || outer.ccy == inner.ccy;
    let period = match (&outer.period, &inner.period) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(o), Some(i)) => o.start <= i.start && i.end <= o.end,
    };
    classes && ccy && period
}

/// Brute-force core/correlated split with value checking off.
/// Returns the sorted core ids and the sorted correlated ids.
pub fn oracle_partition(rules: &[Rule], ac: bool) -> (Vec<String>, Vec<String>) {
    let trees: Vec<OTree> = rules.iter().map(|r| oracle_tree(&r.body)).collect();
    let mut core = Vec::new();
    let mut correlated = Vec::new();
    for (i, ri) in rules.iter().enumerate() {
        let mut redundant = false;
        for (j, rj) in rules.iter().enumerate() {
            if i == j {
                continue;
            }
            let duplicate = trees[i].text == trees[j].text
                && ri.context == rj.context
                && ri.predicate == rj.predicate
                && ri.action == rj.action;
            if duplicate && rj.id < ri.id {
                redundant = true;
            }
            if oracle_height(&trees[i]) > 1
                && oracle_contains(&trees[i], &trees[j], ac)
                && oracle_covers(&rj.context, &ri.context)
            {
                redundant = true;
            }
        }
        if redundant {
            correlated.push(ri.id.clone());
        } else {
            core.push(ri.id.clone());
        }
    }
    core.sort();
    correlated.sort();
    (core, correlated)
}

// ---------------------------------------------------------------------------
// predicates

fn relop_holds(op: Relop, x: i64, t: i64) -> bool {
    match op {
        Relop::Eq => x == t,
        Relop::Ne => x != t,
        Relop::Lt => x < t,
        Relop::Le => x <= t,
        Relop::Gt => x > t,
        Relop::Ge => x >= t,
    }
}

fn millis(d: &Decimal) -> i64 {
    let v: f64 = d.to_string().parse().unwrap();
    (v * 1000.0).round() as i64
}

/// Implication checked on the 10^4 + 1 points of [-5, 5] in steps of 0.001.
/// Thresholds must be multiples of 0.5 inside [-3, 3].
pub fn sampled_implies(pi: &Predicate, pj: &Predicate) -> bool {
    let (ti, tj) = (millis(&pi.threshold), millis(&pj.threshold));
    (-5000..=5000).all(|x| !relop_holds(pi.relop, x, ti) || relop_holds(pj.relop, x, tj))
}

pub fn half_step_threshold(rng: &mut impl Rng) -> Decimal {
    Decimal::from_scaled(rng.gen_range(-6..=6) * 5, 1)
}

// ---------------------------------------------------------------------------
// generators

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_expr(rng: &mut impl Rng, depth: usize) -> ExprTree {
    if depth <= 1 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.85) {
            ExprTree::param(*PARAMS.choose(rng).unwrap())
        } else {
            ExprTree::value(Decimal::from_scaled(rng.gen_range(-10..40), rng.gen_range(0..3)))
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => ExprTree::add((0..rng.gen_range(2..=3)).map(|_| gen_expr(rng, d)).collect()),
        1 => ExprTree::mul((0..rng.gen_range(2..=3)).map(|_| gen_expr(rng, d)).collect()),
        2 => ExprTree::sub(gen_expr(rng, d), gen_expr(rng, d)),
        3 => ExprTree::div(gen_expr(rng, d), gen_expr(rng, d)),
        _ => ExprTree::sum(gen_expr(rng, d)),
    }
}

fn gen_context(rng: &mut impl Rng) -> Context {
    let mut ctx = Context::universal();
    if rng.gen_bool(0.2) {
        let pool = ["equity", "bond", "cash"];
        let n = rng.gen_range(1..=2);
        ctx.classes = Some(pool.choose_multiple(rng, n).map(|s| s.to_string()).collect());
    }
    if rng.gen_bool(0.1) {
        ctx.ccy = Some(
            [CurrencyScope::Local, CurrencyScope::Base, CurrencyScope::Iso("EUR".into())][rng.gen_range(0..3)].clone(),
        );
    }
    if rng.gen_bool(0.1) {
        let start = NaiveDate::from_ymd_opt(2011, 1, 1).unwrap() + chrono::Days::new(rng.gen_range(0..100));
        let end = start + chrono::Days::new(rng.gen_range(1..300));
        ctx.period = Period::new(start, end);
    }
    ctx
}

fn gen_predicate(rng: &mut impl Rng) -> Predicate {
    Predicate::new(*Relop::ALL.choose(rng).unwrap(), half_step_threshold(rng))
}

/// Random rule set; bodies often reuse earlier bodies so containment is common.
pub fn gen_rules(rng: &mut impl Rng, max_rules: usize) -> Vec<Rule> {
    let n = rng.gen_range(0..=max_rules);
    gen_rules_exact(rng, n)
}

pub fn gen_rules_exact(rng: &mut impl Rng, n: usize) -> Vec<Rule> {
    let mut bodies: Vec<ExprTree> = Vec::new();
    let mut rules = Vec::with_capacity(n);
    for i in 0..n {
        let body = if !bodies.is_empty() && rng.gen_bool(0.4) {
            let base = bodies.choose(rng).unwrap().clone();
            match rng.gen_range(0..5) {
                0 => base,
                1 => ExprTree::div(base, gen_expr(rng, 1)),
                2 => ExprTree::sub(base, gen_expr(rng, 2)),
                3 => ExprTree::mul(vec![gen_expr(rng, 1), base]),
                _ => ExprTree::sum(base),
            }
        } else {
            gen_expr(rng, 4)
        };
        let body = if oracle_height(&oracle_tree(&body)) > 4 { gen_expr(rng, 4) } else { body };
        bodies.push(body.clone());
        let action = if rng.gen_bool(0.8) { Action::Fail } else { Action::Warn };
        let (predicate, context) = if rng.gen_bool(0.1) && !rules.is_empty() {
            let prev: &Rule = rules.choose(rng).unwrap();
            (prev.predicate.clone(), prev.context.clone())
        } else {
            (gen_predicate(rng), gen_context(rng))
        };
        rules.push(Rule { id: format!("R{i:03}"), body, predicate, action, context });
    }
    rules
}

pub fn gen_rule_set(seed: u64, max_rules: usize) -> RuleSet {
    RuleSet::new(gen_rules(&mut rng(seed), max_rules)).expect("generated ids are unique")
}

/// Rebuilds `e` with AC children shuffled and AC nodes randomly re-nested.
pub fn scramble(rng: &mut impl Rng, e: &ExprTree) -> ExprTree {
    match e {
        ExprTree::Op { op, children } => {
            let mut kids: Vec<ExprTree> = children.iter().map(|c| scramble(rng, c)).collect();
            if op.is_ac() {
                kids.shuffle(rng);
                if kids.len() >= 3 && rng.gen_bool(0.5) {
                    let tail = kids.split_off(1);
                    kids.push(ExprTree::op(*op, tail));
                }
            }
            ExprTree::op(*op, kids)
        }
        leaf => leaf.clone(),
    }
}

pub fn sorted_ids(ids: &[String]) -> Vec<String> {
    let mut v = ids.to_vec();
    v.sort();
    v
}
