//! Seeded property checks. Each returns `Err` with a counterexample.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use ruleprune::evaluation::GroupKey;
use ruleprune::report::report_from_json;
use ruleprune::value_check::{value_check_empirical, value_check_symbolic};
use ruleprune::{
    canonicalize, contains, evaluate_all, format_rule, parse_rules, partition, predicate_implies, report_json, Action,
    CanonicalTree, ContainmentMode, Context, Dataset, ExprTree, OutcomeKind, OutcomeMatrix, PartitionOptions,
    Predicate, Relop, Rule, RuleSet, ValueCheckConfig, ValueCheckMode, WitnessKind,
};

use super::*;

pub type Property = fn(u64) -> Result<(), String>;

/// Every property, by name.
pub const ALL: &[(&str, Property)] = &[
    ("canonical idempotence", canonical_idempotence),
    ("canonical AC invariance", canonical_ac_invariance),
    ("containment irreflexivity", containment_irreflexive),
    ("containment antisymmetry", containment_antisymmetric),
    ("containment transitivity", containment_transitive),
    ("containment mode monotonicity", containment_mode_monotone),
    ("containment height law", containment_height_law),
    ("containment oracle agreement", containment_oracle_agreement),
    ("partition completeness", partition_complete),
    ("partition order insensitivity", partition_order_insensitive),
    ("partition witness soundness", partition_witnesses_sound),
    ("predicate implication vs sampling", implication_vs_sampling),
    ("predicate implication reflexive and transitive", implication_preorder),
    ("rule format/parse round trip", dsl_round_trip),
    ("empirical monotonicity", empirical_monotone),
    ("symbolic implies empirical", symbolic_implies_empirical),
    ("context filter ignores other classes", context_filter_poisoning),
    ("report JSON round trip", report_round_trip),
];

const MODES: [ContainmentMode; 2] = [ContainmentMode::Strict, ContainmentMode::AcEmbed];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn canonical_idempotence(seed: u64) -> Result<(), String> {
    let e = gen_expr(&mut rng(seed), 5);
    let c = canonicalize(&e);
    let again = canonicalize(&c.to_expr());
    ensure(again == c && again.digest() == c.digest(), || format!("not idempotent: {c} vs {again}"))?;
    let t = oracle_tree(&e);
    ensure(c.pretty() == t.text, || format!("canonical {} but oracle {}", c.pretty(), t.text))?;
    ensure(c.height() == oracle_height(&t), || format!("height {} vs oracle {} for {c}", c.height(), oracle_height(&t)))
}

pub fn canonical_ac_invariance(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let e = gen_expr(&mut r, 5);
    let s = scramble(&mut r, &e);
    let (a, b) = (canonicalize(&e), canonicalize(&s));
    ensure(a == b && a.digest() == b.digest(), || format!("{a} vs {b} after reordering"))
}

/// Distinct canonical subtrees of a random rule set's bodies.
fn tree_pool(seed: u64) -> Vec<CanonicalTree> {
    let rules = gen_rules(&mut rng(seed), 10);
    let mut pool = BTreeSet::new();
    for r in &rules {
        for n in r.canonical_body().nodes() {
            pool.insert(n.clone());
        }
    }
    let mut pool: Vec<CanonicalTree> = pool.into_iter().collect();
    pool.shuffle(&mut rng(seed ^ 0x5eed));
    pool.truncate(40);
    pool
}

fn matrix(pool: &[CanonicalTree], mode: ContainmentMode) -> Vec<Vec<bool>> {
    pool.iter().map(|a| pool.iter().map(|b| contains(a, b, mode)).collect()).collect()
}

pub fn containment_irreflexive(seed: u64) -> Result<(), String> {
    for t in tree_pool(seed) {
        let copy = canonicalize(&t.to_expr());
        for mode in MODES {
            ensure(!contains(&t, &copy, mode), || format!("{t} contains itself ({mode})"))?;
        }
    }
    Ok(())
}

pub fn containment_antisymmetric(seed: u64) -> Result<(), String> {
    let pool = tree_pool(seed);
    for mode in MODES {
        let m = matrix(&pool, mode);
        for i in 0..pool.len() {
            for j in 0..pool.len() {
                ensure(!(m[i][j] && m[j][i]), || format!("{} and {} contain each other ({mode})", pool[i], pool[j]))?;
            }
        }
    }
    Ok(())
}

pub fn containment_transitive(seed: u64) -> Result<(), String> {
    let pool = tree_pool(seed);
    for mode in MODES {
        let m = matrix(&pool, mode);
        let n = pool.len();
        for a in 0..n {
            for b in (0..n).filter(|&b| m[a][b]) {
                for c in (0..n).filter(|&c| m[b][c]) {
                    ensure(m[a][c], || {
                        format!("{} > {} > {} but not {} > {} ({mode})", pool[a], pool[b], pool[c], pool[a], pool[c])
                    })?;
                }
            }
        }
    }
    Ok(())
}

pub fn containment_mode_monotone(seed: u64) -> Result<(), String> {
    let pool = tree_pool(seed);
    let strict = matrix(&pool, ContainmentMode::Strict);
    let ac = matrix(&pool, ContainmentMode::AcEmbed);
    for i in 0..pool.len() {
        for j in 0..pool.len() {
            ensure(!strict[i][j] || ac[i][j], || format!("{} > {} strictly but not under AC", pool[i], pool[j]))?;
        }
    }
    Ok(())
}

pub fn containment_height_law(seed: u64) -> Result<(), String> {
    let pool = tree_pool(seed);
    for a in &pool {
        for b in &pool {
            if contains(a, b, ContainmentMode::Strict) {
                ensure(b.height() < a.height(), || {
                    format!("strict: {a} > {b} with height {} >= {}", b.height(), a.height())
                })?;
            }
            if contains(a, b, ContainmentMode::AcEmbed) {
                ensure(b.height() <= a.height(), || {
                    format!("ac: {a} > {b} with height {} > {}", b.height(), a.height())
                })?;
            }
        }
    }
    Ok(())
}

pub fn containment_oracle_agreement(seed: u64) -> Result<(), String> {
    let pool = tree_pool(seed);
    let trees: Vec<OTree> = pool.iter().map(|t| oracle_tree(&t.to_expr())).collect();
    for (i, a) in pool.iter().enumerate() {
        for (j, b) in pool.iter().enumerate() {
            for (mode, ac) in [(ContainmentMode::Strict, false), (ContainmentMode::AcEmbed, true)] {
                let got = contains(a, b, mode);
                let want = oracle_contains(&trees[i], &trees[j], ac);
                ensure(got == want, || format!("contains({a}, {b}, {mode}) = {got}, oracle {want}"))?;
            }
        }
    }
    Ok(())
}

fn options(mode: ContainmentMode, vc: ValueCheckMode) -> PartitionOptions {
    PartitionOptions { mode, value_check: ValueCheckConfig::new(vc, 1), parallel: false }
}

pub fn partition_complete(seed: u64) -> Result<(), String> {
    let set = gen_rule_set(seed, 30);
    for mode in MODES {
        let r = partition(&set, &options(mode, ValueCheckMode::Symbolic), None).map_err(|e| e.to_string())?;
        let core: BTreeSet<&str> = r.core.iter().map(String::as_str).collect();
        let corr: BTreeSet<&str> = r.correlated_ids().into_iter().collect();
        ensure(core.is_disjoint(&corr), || format!("core and correlated overlap: {core:?} / {corr:?}"))?;
        ensure(core.len() + corr.len() == set.len(), || format!("{} + {} != {}", core.len(), corr.len(), set.len()))?;
        let all: BTreeSet<&str> = set.iter().map(|r| r.id.as_str()).collect();
        ensure(core.union(&corr).copied().collect::<BTreeSet<_>>() == all, || "union is not the input".into())?;
        r.check_invariants()?;
    }
    Ok(())
}

pub fn partition_order_insensitive(seed: u64) -> Result<(), String> {
    let mut rules = gen_rules(&mut rng(seed), 30);
    let set = RuleSet::new(rules.clone()).unwrap();
    rules.shuffle(&mut rng(seed.wrapping_add(1)));
    let shuffled = RuleSet::new(rules).unwrap();
    for mode in MODES {
        let o = options(mode, ValueCheckMode::Symbolic);
        let a = report_json(&partition(&set, &o, None).unwrap());
        let b = report_json(&partition(&shuffled, &o, None).unwrap());
        ensure(a == b, || format!("reordering changed the report ({mode}):\n{a}\n{b}"))?;
    }
    Ok(())
}

pub fn partition_witnesses_sound(seed: u64) -> Result<(), String> {
    let set = gen_rule_set(seed, 30);
    for (mode, ac) in [(ContainmentMode::Strict, false), (ContainmentMode::AcEmbed, true)] {
        let r = partition(&set, &options(mode, ValueCheckMode::Symbolic), None).unwrap();
        for c in &r.correlated {
            let rule = set.get(&c.id).unwrap();
            for w in &c.witnesses {
                let by = set.get(&w.by[0]).unwrap();
                let ok = match w.kind {
                    WitnessKind::ContainedBy => {
                        oracle_contains(&oracle_tree(&rule.body), &oracle_tree(&by.body), ac)
                            && oracle_covers(&by.context, &rule.context)
                    }
                    WitnessKind::DuplicateOf => {
                        oracle_canon(&rule.body) == oracle_canon(&by.body)
                            && rule.context == by.context
                            && rule.predicate == by.predicate
                            && rule.action == by.action
                            && by.id < rule.id
                    }
                    WitnessKind::ValueImpliedBy => {
                        oracle_canon(&rule.body) == oracle_canon(&by.body)
                            && oracle_covers(&by.context, &rule.context)
                            && sampled_implies(&rule.predicate, &by.predicate)
                    }
                };
                ensure(ok, || format!("unsound {} witness {} on {} ({mode})", w.kind, by.id, rule.id))?;
            }
        }
    }
    Ok(())
}

fn random_predicate(r: &mut impl Rng) -> Predicate {
    Predicate::new(*Relop::ALL.choose(r).unwrap(), half_step_threshold(r))
}

pub fn implication_vs_sampling(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for pi_op in Relop::ALL {
        for pj_op in Relop::ALL {
            let pi = Predicate::new(pi_op, half_step_threshold(&mut r));
            let pj = Predicate::new(pj_op, half_step_threshold(&mut r));
            let got = predicate_implies(&pi, &pj);
            let want = sampled_implies(&pi, &pj);
            ensure(got == want, || format!("({pi}) implies ({pj}): {got}, sampling says {want}"))?;
        }
    }
    Ok(())
}

pub fn implication_preorder(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let (p, q, s) = (random_predicate(&mut r), random_predicate(&mut r), random_predicate(&mut r));
    ensure(predicate_implies(&p, &p), || format!("({p}) does not imply itself"))?;
    ensure(!(predicate_implies(&p, &q) && predicate_implies(&q, &s)) || predicate_implies(&p, &s), || {
        format!("({p}) => ({q}) => ({s}) but not ({p}) => ({s})")
    })
}

pub fn dsl_round_trip(seed: u64) -> Result<(), String> {
    for rule in gen_rules(&mut rng(seed), 10) {
        let text = format_rule(&rule);
        let parsed = parse_rules(&text).map_err(|e| format!("`{text}` does not parse: {e}"))?;
        let again = parse_rules(&text).unwrap();
        ensure(parsed.rules() == again.rules(), || format!("`{text}` parses two ways"))?;
        let back = &parsed.rules()[0];
        ensure(*back == rule, || format!("`{text}` parsed to {back:?}, expected {rule:?}"))?;
    }
    Ok(())
}

fn stub_rule(id: &str) -> Rule {
    Rule {
        id: id.into(),
        body: ExprTree::param("a"),
        predicate: Predicate::new(Relop::Eq, Decimal::zero()),
        action: Action::Fail,
        context: Context::universal(),
    }
}

pub fn empirical_monotone(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let n_rules = r.gen_range(2..8);
    let n_groups = r.gen_range(1..10);
    let ids: Vec<String> = (0..n_rules).map(|i| format!("R{i}")).collect();
    let groups: Vec<GroupKey> = (0..n_groups)
        .map(|g| GroupKey { fund_id: format!("F{g}"), date: NaiveDate::from_ymd_opt(2011, 1, 1).unwrap() })
        .collect();
    let kinds = [OutcomeKind::Pass, OutcomeKind::Fail, OutcomeKind::NotEvaluable];
    let rows = (0..n_rules).map(|_| (0..n_groups).map(|_| *kinds.choose(&mut r).unwrap()).collect()).collect();
    let m = OutcomeMatrix::from_kinds(ids.clone(), groups, rows);
    let rules: Vec<Rule> = ids.iter().map(|id| stub_rule(id)).collect();
    let small: Vec<&Rule> = rules[1..].iter().filter(|_| r.gen_bool(0.5)).collect();
    let large: Vec<&Rule> =
        rules[1..].iter().filter(|x| small.iter().any(|s| s.id == x.id) || r.gen_bool(0.5)).collect();
    let support = r.gen_range(1..3);
    if value_check_empirical(&rules[0], &small, &m, support).is_some() {
        ensure(value_check_empirical(&rules[0], &large, &m, support).is_some(), || {
            format!(
                "witness lost when growing {:?} to {:?}",
                small.iter().map(|r| &r.id).collect::<Vec<_>>(),
                large.iter().map(|r| &r.id).collect::<Vec<_>>()
            )
        })?;
    }
    Ok(())
}

/// Positions CSV with columns a..d, `groups` groups of `per_group` rows.
fn random_positions(r: &mut impl Rng, groups: usize, per_group: usize) -> String {
    let mut csv = String::from("fund_id,date,position_id,asset_class,a,b,c,d\n");
    for g in 0..groups {
        let date = if g % 2 == 0 { "2011-03-31" } else { "2012-03-31" };
        for p in 0..per_group {
            let class = ["equity", "bond"][r.gen_range(0..2)];
            let v: Vec<String> = (0..4).map(|_| Decimal::from_scaled(r.gen_range(-20..20), 1).to_string()).collect();
            csv.push_str(&format!("F{g},{date},P{p},{class},{}\n", v.join(",")));
        }
    }
    csv
}

pub fn symbolic_implies_empirical(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let inner = loop {
        let e = gen_expr(&mut r, 3);
        if e.params().iter().all(|p| ["a", "b", "c", "d"].contains(p)) {
            break e;
        }
    };
    let body = ExprTree::sum(inner);
    let (pi, pj) = loop {
        let (p, q) = (random_predicate(&mut r), random_predicate(&mut r));
        if predicate_implies(&p, &q) {
            break (p, q);
        }
    };
    let mut ctx = Context::universal();
    if r.gen_bool(0.5) {
        ctx.classes = Some(["equity".to_string()].into());
    }
    let mut ri =
        Rule { id: "RI".into(), body: body.clone(), predicate: pi, action: Action::Fail, context: ctx.clone() };
    let rj = Rule { id: "RJ".into(), body, predicate: pj, action: Action::Fail, context: ctx };
    if r.gen_bool(0.5) {
        ri.context.period = ruleprune::rule::Period::new(
            NaiveDate::from_ymd_opt(2011, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2011, 12, 31).unwrap(),
        );
    }
    ensure(value_check_symbolic(&ri, &[&rj]).is_some(), || format!("symbolic check missed {ri:?} / {rj:?}"))?;
    let set = RuleSet::new(vec![ri.clone(), rj.clone()]).unwrap();
    let data = Dataset::from_csv_str(&random_positions(&mut r, 8, 4)).map_err(|e| e.to_string())?;
    let m = evaluate_all(&set, &data, false).map_err(|e| e.to_string())?;
    let fails = m.row("RI").unwrap().iter().filter(|o| o.kind == OutcomeKind::Fail).count();
    if fails > 0 {
        ensure(value_check_empirical(&ri, &[&rj], &m, 1).is_some(), || {
            format!("symbolic fired but {} fails outside {}: {:?} / {:?}", ri.id, rj.id, m.row("RI"), m.row("RJ"))
        })?;
    }
    Ok(())
}

pub fn context_filter_poisoning(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let clean = random_positions(&mut r, 4, 5);
    let poisoned: String = clean
        .lines()
        .map(|line| {
            if line.contains(",bond,") {
                let cols: Vec<&str> = line.split(',').collect();
                format!("{},999999,-999999,0,999999", cols[..4].join(","))
            } else {
                line.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let body = ExprTree::sum(gen_expr(&mut r, 3));
    if !body.params().iter().all(|p| ["a", "b", "c", "d"].contains(p)) {
        return Ok(());
    }
    let mut ctx = Context::universal();
    ctx.classes = Some(["equity".to_string()].into());
    let rule = Rule { id: "EQ".into(), body, predicate: random_predicate(&mut r), action: Action::Fail, context: ctx };
    let set = RuleSet::new(vec![rule]).unwrap();
    let run = |csv: &str| {
        let data = Dataset::from_csv_str(csv).unwrap();
        evaluate_all(&set, &data, false).unwrap().row("EQ").unwrap().to_vec()
    };
    let (a, b) = (run(&clean), run(&poisoned));
    ensure(a == b, || format!("bond rows changed an equity-only rule: {a:?} vs {b:?}"))
}

pub fn report_round_trip(seed: u64) -> Result<(), String> {
    let set = gen_rule_set(seed, 20);
    let r = partition(&set, &options(ContainmentMode::AcEmbed, ValueCheckMode::Symbolic), None).unwrap();
    let json = report_json(&r);
    let back = report_from_json(&json).map_err(|e| e.to_string())?;
    ensure(back == r, || format!("JSON round trip changed the report: {json}"))
}
