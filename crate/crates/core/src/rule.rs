//! Business rules: body expression, verification predicate, action and
//! applicability context.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;
use crate::expr::{canonicalize, CanonicalTree, ExprTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relop {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Ne,
}

impl Relop {
    pub const ALL: [Relop; 6] = [Relop::Eq, Relop::Lt, Relop::Gt, Relop::Le, Relop::Ge, Relop::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            Relop::Eq => "=",
            Relop::Lt => "<",
            Relop::Gt => ">",
            Relop::Le => "<=",
            Relop::Ge => ">=",
            Relop::Ne => "!=",
        }
    }

    pub fn holds(self, lhs: &Decimal, rhs: &Decimal) -> bool {
        match self {
            Relop::Eq => lhs == rhs,
            Relop::Lt => lhs < rhs,
            Relop::Gt => lhs > rhs,
            Relop::Le => lhs <= rhs,
            Relop::Ge => lhs >= rhs,
            Relop::Ne => lhs != rhs,
        }
    }
}

/// `body <relop> threshold`; the rule's failure condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Predicate {
    pub relop: Relop,
    pub threshold: Decimal,
}

impl Predicate {
    pub fn new(relop: Relop, threshold: Decimal) -> Self {
        Predicate { relop, threshold }
    }

    pub fn holds(&self, value: &Decimal) -> bool {
        self.relop.holds(value, &self.threshold)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.relop.symbol(), self.threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Action {
    Fail,
    Warn,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Fail => "FAIL",
            Action::Warn => "WARN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurrencyScope {
    Local,
    Base,
    /// Three-letter ISO 4217 code.
    Iso(String),
}

impl CurrencyScope {
    /// Column-name suffix this scope selects, e.g. `_local`.
    pub fn column_suffix(&self) -> String {
        match self {
            CurrencyScope::Local => "_local".to_string(),
            CurrencyScope::Base => "_base".to_string(),
            CurrencyScope::Iso(code) => format!("_{}", code.to_ascii_lowercase()),
        }
    }
}

impl fmt::Display for CurrencyScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurrencyScope::Local => f.write_str("local"),
            CurrencyScope::Base => f.write_str("base"),
            CurrencyScope::Iso(code) => f.write_str(code),
        }
    }
}

/// Closed date interval with `start < end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Period {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Period {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Option<Self> {
        (start < end).then_some(Period { start, end })
    }

    pub fn contains_date(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    pub fn covers(&self, other: &Period) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// Where a rule applies. `None` in a field means unrestricted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    pub classes: Option<BTreeSet<String>>,
    pub ccy: Option<CurrencyScope>,
    pub period: Option<Period>,
}

impl Context {
    pub fn universal() -> Self {
        Context::default()
    }

    pub fn is_universal(&self) -> bool {
        self.classes.is_none() && self.ccy.is_none() && self.period.is_none()
    }

    pub fn admits_class(&self, class: &str) -> bool {
        self.classes.as_ref().is_none_or(|c| c.contains(class))
    }
}

impl fmt::Display for Context {
    /// DSL atom syntax joined by ` AND `; `universal` when unrestricted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_universal() {
            return f.write_str("universal");
        }
        let mut atoms = Vec::new();
        if let Some(classes) = &self.classes {
            atoms.push(format!("class={}", classes.iter().cloned().collect::<Vec<_>>().join(",")));
        }
        if let Some(ccy) = &self.ccy {
            atoms.push(format!("ccy={ccy}"));
        }
        if let Some(p) = &self.period {
            atoms.push(format!("period=[{},{}]", p.start.format("%Y-%m-%d"), p.end.format("%Y-%m-%d")));
        }
        f.write_str(&atoms.join(" AND "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub body: ExprTree,
    pub predicate: Predicate,
    pub action: Action,
    pub context: Context,
}

impl Rule {
    pub fn canonical_body(&self) -> CanonicalTree {
        canonicalize(&self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("duplicate rule id `{0}`")]
pub struct DuplicateRuleId(pub String);

/// Rules in declaration order with unique ids.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
    index: HashMap<String, usize>,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Result<Self, DuplicateRuleId> {
        let mut index = HashMap::with_capacity(rules.len());
        for (i, r) in rules.iter().enumerate() {
            if index.insert(r.id.clone(), i).is_some() {
                return Err(DuplicateRuleId(r.id.clone()));
            }
        }
        Ok(RuleSet { rules, index })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn get(&self, id: &str) -> Option<&Rule> {
        self.index.get(id).map(|&i| &self.rules[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rule> {
        self.rules.iter()
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }
}

impl<'a> IntoIterator for &'a RuleSet {
    type Item = &'a Rule;
    type IntoIter = std::slice::Iter<'a, Rule>;

    fn into_iter(self) -> Self::IntoIter {
        self.rules.iter()
    }
}
