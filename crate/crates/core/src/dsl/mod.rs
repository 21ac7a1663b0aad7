//! The textual rule language.
//!
//! One rule per line:
//!
//! ```text
//! HLD001: IF sum(txn_price * units * fx_rate) = 0 THEN FAIL CONTEXT ccy=local
//! ```
//!
//! Blank lines and `#` comments are ignored. `*` and `/` bind tighter than
//! `+` and `-`; `-` and `/` associate to the left; `sum(...)` aggregates
//! over the positions of a fund snapshot.

mod lexer;
mod parser;

use chrono::NaiveDate;
use thiserror::Error;

use crate::expr::{ExprTree, OpKind};
use crate::rule::{Rule, RuleSet};
use parser::Parser;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: expected {expected}, found {found}")]
    Syntax { line: usize, column: usize, expected: String, found: String },
    #[error("{line}: duplicate rule id `{id}`")]
    DuplicateRuleId { id: String, line: usize },
    #[error("{line}:{column}: unknown context keyword `{token}`")]
    UnknownContextKeyword { token: String, line: usize, column: usize },
    #[error("{line}:{column}: invalid period: start {start} is not before end {end}")]
    InvalidPeriod { line: usize, column: usize, start: NaiveDate, end: NaiveDate },
}

impl ParseError {
    /// 1-based source line of the error.
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::DuplicateRuleId { line, .. }
            | ParseError::UnknownContextKeyword { line, .. }
            | ParseError::InvalidPeriod { line, .. } => *line,
        }
    }
}

/// Parses a whole rules file into a [`RuleSet`] in declaration order.
pub fn parse_rules(source: &str) -> Result<RuleSet, ParseError> {
    let mut rules: Vec<Rule> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, text) in source.lines().enumerate() {
        let line = i + 1;
        let mut p = Parser::new(line, text)?;
        if p.is_blank() {
            continue;
        }
        let rule = p.rule()?;
        if !seen.insert(rule.id.clone()) {
            return Err(ParseError::DuplicateRuleId { id: rule.id, line });
        }
        rules.push(rule);
    }
    Ok(RuleSet::new(rules).expect("ids checked above"))
}

/// Parses a single rule body.
pub fn parse_expression(text: &str) -> Result<ExprTree, ParseError> {
    single_line(text, |p| p.expr())
}

/// Parses context atoms joined by `AND`. Blank input is the universal context.
pub fn parse_context(text: &str) -> Result<crate::rule::Context, ParseError> {
    single_line(text, |p| if p.is_blank() { Ok(crate::rule::Context::universal()) } else { p.context() })
}

fn single_line<T>(text: &str, f: impl FnOnce(&mut Parser) -> Result<T, ParseError>) -> Result<T, ParseError> {
    if let Some(pos) = text.find(['\n', '\r']) {
        return Err(ParseError::Syntax {
            line: 1,
            column: text[..pos].chars().count() + 1,
            expected: "single line".into(),
            found: "line break".into(),
        });
    }
    let mut p = Parser::new(1, text)?;
    let out = f(&mut p)?;
    p.expect_eof()?;
    Ok(out)
}

/// Renders a rule as one DSL line; `parse_rules` on the result yields an
/// equal rule.
pub fn format_rule(rule: &Rule) -> String {
    let mut out = format!("{}: IF {} {} THEN {}", rule.id, format_expression(&rule.body), rule.predicate, rule.action);
    if !rule.context.is_universal() {
        out.push_str(" CONTEXT ");
        out.push_str(&rule.context.to_string());
    }
    out
}

/// Infix rendering with the minimum parentheses needed to reparse the same tree.
pub fn format_expression(tree: &ExprTree) -> String {
    let mut out = String::new();
    write_expr(tree, &mut out);
    out
}

fn write_expr(tree: &ExprTree, out: &mut String) {
    match tree {
        ExprTree::Param { name } => out.push_str(name),
        ExprTree::Value { value } => out.push_str(&value.to_string()),
        ExprTree::Op { op, children } => {
            if *op == OpKind::Sum {
                out.push_str("sum(");
                write_expr(&children[0], out);
                out.push(')');
                return;
            }
            let sep = match op {
                OpKind::Add => " + ",
                OpKind::Sub => " - ",
                OpKind::Mul => " * ",
                _ => " / ",
            };
            for (i, child) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                if needs_parens(*op, i, child) {
                    out.push('(');
                    write_expr(child, out);
                    out.push(')');
                } else {
                    write_expr(child, out);
                }
            }
        }
    }
}

fn needs_parens(parent: OpKind, index: usize, child: &ExprTree) -> bool {
    let ExprTree::Op { op: child_op, .. } = child else {
        return false;
    };
    use OpKind::*;
    let additive = matches!(child_op, Add | Sub);
    let multiplicative = matches!(child_op, Mul | Div);
    match (parent, index) {
        // an unparenthesized ADD child would merge into the parent's run
        (Add, 0) => *child_op == Add,
        (Sub, 0) => false,
        (Add | Sub, _) => additive,
        (Mul, 0) => additive || *child_op == Mul,
        (Div, 0) => additive,
        (Mul | Div, _) => additive || multiplicative,
        (Sum, _) => false,
    }
}
