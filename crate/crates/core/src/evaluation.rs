//! Evaluating rules against fund snapshot data.
//!
//! Positions are loaded from CSV and grouped by `(fund_id, date)`. A rule
//! is evaluated once per group: rows are filtered by the rule's context,
//! `sum(...)` aggregates its operand over the remaining rows, and the
//! resulting body value is compared with the rule's predicate. A rule
//! FAILs when its predicate holds.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;
use crate::expr::{ExprTree, OpKind};
use crate::rule::{Rule, RuleSet};

pub const KEY_COLUMNS: [&str; 4] = ["fund_id", "date", "position_id", "asset_class"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing key column `{0}`")]
    MissingKeyColumn(String),
    #[error("row {row}: duplicate position key ({fund_id}, {date}, {position_id})")]
    DuplicatePositionKey { row: usize, fund_id: String, date: NaiveDate, position_id: String },
    #[error("row {row}, column `{column}`: invalid decimal `{value}`")]
    BadDecimal { row: usize, column: String, value: String },
    #[error("row {row}: invalid date `{value}`")]
    BadDate { row: usize, value: String },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule {rule}: unknown parameter `{name}`")]
pub struct UnknownParameter {
    pub rule: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub fund_id: String,
    pub date: NaiveDate,
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.fund_id, self.date)
    }
}

#[derive(Debug, Clone)]
pub struct Position {
    pub position_id: String,
    pub asset_class: String,
    /// One entry per parameter column; `None` is a missing cell.
    pub values: Vec<Option<Decimal>>,
}

/// Positions grouped by `(fund_id, date)`.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    columns: Vec<String>,
    column_index: HashMap<String, usize>,
    groups: BTreeMap<GroupKey, Vec<Position>>,
}

impl Dataset {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DatasetError> {
        Self::from_reader(text.as_bytes())
    }

    pub fn from_reader(reader: impl Read) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

        let mut seen = HashSet::new();
        for h in &header {
            if !seen.insert(h.as_str()) {
                return Err(DatasetError::DuplicateColumn(h.clone()));
            }
        }
        let key_pos = |name: &str| {
            header.iter().position(|h| h == name).ok_or_else(|| DatasetError::MissingKeyColumn(name.to_string()))
        };
        let (fund_col, date_col, pos_col, class_col) =
            (key_pos("fund_id")?, key_pos("date")?, key_pos("position_id")?, key_pos("asset_class")?);
        let params: Vec<(usize, String)> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| !KEY_COLUMNS.contains(&h.as_str()))
            .map(|(i, h)| (i, h.clone()))
            .collect();

        let mut ds = Dataset {
            columns: params.iter().map(|(_, h)| h.clone()).collect(),
            column_index: params.iter().enumerate().map(|(i, (_, h))| (h.clone(), i)).collect(),
            groups: BTreeMap::new(),
        };
        let mut keys = HashSet::new();
        for (n, record) in rdr.records().enumerate() {
            let record = record?;
            // 1-based data row number, header excluded
            let row = n + 1;
            let field = |i: usize| record.get(i).unwrap_or("");
            let date = NaiveDate::parse_from_str(field(date_col), "%Y-%m-%d")
                .map_err(|_| DatasetError::BadDate { row, value: field(date_col).to_string() })?;
            let key = GroupKey { fund_id: field(fund_col).to_string(), date };
            let position_id = field(pos_col).to_string();
            if !keys.insert((key.clone(), position_id.clone())) {
                return Err(DatasetError::DuplicatePositionKey { row, fund_id: key.fund_id, date, position_id });
            }
            let mut values = Vec::with_capacity(params.len());
            for (i, name) in &params {
                let raw = field(*i);
                if raw.is_empty() {
                    values.push(None);
                } else {
                    values.push(Some(raw.parse().map_err(|_| DatasetError::BadDecimal {
                        row,
                        column: name.clone(),
                        value: raw.to_string(),
                    })?));
                }
            }
            ds.groups.entry(key).or_default().push(Position {
                position_id,
                asset_class: field(class_col).to_string(),
                values,
            });
        }
        Ok(ds)
    }

    /// Parameter column names, in file order.
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn group_keys(&self) -> impl Iterator<Item = &GroupKey> {
        self.groups.keys()
    }

    pub fn groups(&self) -> impl Iterator<Item = (&GroupKey, &[Position])> {
        self.groups.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn group(&self, key: &GroupKey) -> Option<&[Position]> {
        self.groups.get(key).map(Vec::as_slice)
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Resolves every parameter of `rule` to a column index, applying the
    /// context's currency suffix where a suffixed column exists.
    pub fn bind(&self, rule: &Rule) -> Result<Binding, UnknownParameter> {
        let suffix = rule.context.ccy.as_ref().map(|c| c.column_suffix());
        let mut map = HashMap::new();
        for name in rule.body.params() {
            let suffixed = suffix.as_ref().and_then(|s| self.column_index.get(&format!("{name}{s}")));
            let idx = suffixed
                .or_else(|| self.column_index.get(name))
                .ok_or_else(|| UnknownParameter { rule: rule.id.clone(), name: name.to_string() })?;
            map.insert(name.to_string(), *idx);
        }
        Ok(Binding(map))
    }
}

/// Parameter name to column index for one rule.
#[derive(Debug, Clone)]
pub struct Binding(HashMap<String, usize>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OutcomeKind {
    Pass,
    Fail,
    NotEvaluable,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeKind::Pass => "PASS",
            OutcomeKind::Fail => "FAIL",
            OutcomeKind::NotEvaluable => "NOT_EVALUABLE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// Body value, or why there is none.
    pub detail: String,
}

impl Outcome {
    fn not_evaluable(why: impl Into<String>) -> Self {
        Outcome { kind: OutcomeKind::NotEvaluable, detail: why.into() }
    }
}

pub const CONTEXT_EXCLUDED: &str = "context-excluded";

/// Evaluates `rule` on one group of positions.
pub fn evaluate_rule(rule: &Rule, binding: &Binding, key: &GroupKey, rows: &[Position]) -> Outcome {
    if let Some(period) = &rule.context.period {
        if !period.contains_date(key.date) {
            return Outcome { kind: OutcomeKind::Pass, detail: CONTEXT_EXCLUDED.into() };
        }
    }
    let filtered: Vec<&Position> = rows.iter().filter(|p| rule.context.admits_class(&p.asset_class)).collect();
    let eval = Evaluator { binding, rows: &filtered };
    match eval.scalar(&rule.body) {
        Ok(value) => {
            let kind = if rule.predicate.holds(&value) { OutcomeKind::Fail } else { OutcomeKind::Pass };
            Outcome { kind, detail: value.to_string() }
        }
        Err(why) => Outcome::not_evaluable(why),
    }
}

struct Evaluator<'a> {
    binding: &'a Binding,
    rows: &'a [&'a Position],
}

impl Evaluator<'_> {
    fn cell(&self, row: &Position, name: &str) -> Result<Decimal, String> {
        let idx = self.binding.0[name];
        row.values[idx].clone().ok_or_else(|| format!("missing value for `{name}` in position {}", row.position_id))
    }

    /// Value outside any row scope: parameters must be constant across the group.
    fn scalar(&self, tree: &ExprTree) -> Result<Decimal, String> {
        match tree {
            ExprTree::Param { name } => {
                let mut values = self.rows.iter().map(|r| self.cell(r, name));
                let first = values.next().ok_or_else(|| format!("no rows to bind `{name}`"))??;
                for v in values {
                    if v? != first {
                        return Err(format!("non-scalar outside sum: `{name}`"));
                    }
                }
                Ok(first)
            }
            ExprTree::Value { value } => Ok(value.clone()),
            ExprTree::Op { op: OpKind::Sum, children } => self.sum(&children[0]),
            ExprTree::Op { op, children } => {
                let vals = children.iter().map(|c| self.scalar(c)).collect::<Result<Vec<_>, _>>()?;
                combine(*op, &vals)
            }
        }
    }

    fn sum(&self, inner: &ExprTree) -> Result<Decimal, String> {
        self.rows.iter().try_fold(Decimal::zero(), |acc, row| Ok(acc.add(&self.row_value(inner, row)?)))
    }

    fn row_value(&self, tree: &ExprTree, row: &Position) -> Result<Decimal, String> {
        match tree {
            ExprTree::Param { name } => self.cell(row, name),
            ExprTree::Value { value } => Ok(value.clone()),
            // a nested sum aggregates over the whole filtered group
            ExprTree::Op { op: OpKind::Sum, children } => self.sum(&children[0]),
            ExprTree::Op { op, children } => {
                let vals = children.iter().map(|c| self.row_value(c, row)).collect::<Result<Vec<_>, _>>()?;
                combine(*op, &vals)
            }
        }
    }
}

fn combine(op: OpKind, vals: &[Decimal]) -> Result<Decimal, String> {
    match op {
        OpKind::Add => Ok(vals.iter().fold(Decimal::zero(), |a, b| a.add(b))),
        OpKind::Mul => Ok(vals.iter().fold(Decimal::from_i64(1), |a, b| a.mul(b))),
        OpKind::Sub => Ok(vals[0].sub(&vals[1])),
        OpKind::Div => vals[0].checked_div(&vals[1]).ok_or_else(|| "division by zero".to_string()),
        OpKind::Sum => unreachable!("sum handled by caller"),
    }
}

/// Outcomes for every (rule, group) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeMatrix {
    rule_ids: Vec<String>,
    groups: Vec<GroupKey>,
    /// `cells[rule][group]`
    cells: Vec<Vec<Outcome>>,
    rule_index: HashMap<String, usize>,
}

impl OutcomeMatrix {
    pub fn rule_ids(&self) -> &[String] {
        &self.rule_ids
    }

    pub fn groups(&self) -> &[GroupKey] {
        &self.groups
    }

    pub fn row(&self, rule_id: &str) -> Option<&[Outcome]> {
        self.rule_index.get(rule_id).map(|&i| self.cells[i].as_slice())
    }

    pub fn get(&self, rule_id: &str, group: usize) -> Option<&Outcome> {
        self.row(rule_id).and_then(|r| r.get(group))
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    /// Builds a matrix directly from outcome kinds; `rows[i][g]` is rule `i` on group `g`.
    pub fn from_kinds(rule_ids: Vec<String>, groups: Vec<GroupKey>, rows: Vec<Vec<OutcomeKind>>) -> Self {
        let cells = rows
            .into_iter()
            .map(|r| r.into_iter().map(|kind| Outcome { kind, detail: String::new() }).collect())
            .collect();
        Self::assemble(rule_ids, groups, cells)
    }

    fn assemble(rule_ids: Vec<String>, groups: Vec<GroupKey>, cells: Vec<Vec<Outcome>>) -> Self {
        let rule_index = rule_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        OutcomeMatrix { rule_ids, groups, cells, rule_index }
    }

    /// Per-rule `(pass, fail, not_evaluable)` counts, in matrix rule order.
    pub fn counts(&self) -> Vec<(&str, [usize; 3])> {
        self.rule_ids
            .iter()
            .zip(&self.cells)
            .map(|(id, row)| {
                let mut c = [0; 3];
                for o in row {
                    c[match o.kind {
                        OutcomeKind::Pass => 0,
                        OutcomeKind::Fail => 1,
                        OutcomeKind::NotEvaluable => 2,
                    }] += 1;
                }
                (id.as_str(), c)
            })
            .collect()
    }

    /// `rule_id,pass,fail,not_evaluable` CSV, one line per rule.
    pub fn counts_csv(&self) -> String {
        let mut out = String::from("rule_id,pass,fail,not_evaluable\n");
        for (id, [p, f, n]) in self.counts() {
            out.push_str(&format!("{id},{p},{f},{n}\n"));
        }
        out
    }
}

/// Evaluates every rule on every group. Per-cell problems become
/// `NOT_EVALUABLE`; an unbindable parameter aborts with the rule named.
pub fn evaluate_all(rules: &RuleSet, data: &Dataset, parallel: bool) -> Result<OutcomeMatrix, UnknownParameter> {
    let bindings = rules.iter().map(|r| data.bind(r)).collect::<Result<Vec<_>, _>>()?;
    let groups: Vec<(&GroupKey, &[Position])> = data.groups().collect();
    let row = |(rule, binding): (&Rule, &Binding)| -> Vec<Outcome> {
        groups.iter().map(|(k, rows)| evaluate_rule(rule, binding, k, rows)).collect()
    };
    let pairs: Vec<(&Rule, &Binding)> = rules.iter().zip(&bindings).collect();
    let cells: Vec<Vec<Outcome>> =
        if parallel { pairs.into_par_iter().map(row).collect() } else { pairs.into_iter().map(row).collect() };
    Ok(OutcomeMatrix::assemble(
        rules.iter().map(|r| r.id.clone()).collect(),
        groups.iter().map(|(k, _)| (*k).clone()).collect(),
        cells,
    ))
}
