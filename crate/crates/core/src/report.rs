//! Serializing partition results: JSON report, DOT graph, per-rule text.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dsl::format_expression;
use crate::expr::{CanonicalNode, CanonicalTree};
use crate::partition::{Edge, PartitionReport, WitnessKind};
use crate::rule::RuleSet;

/// Compact JSON with the report's fixed key order.
pub fn report_json(report: &PartitionReport) -> String {
    serde_json::to_string(report).expect("report serializes")
}

pub fn report_from_json(text: &str) -> Result<PartitionReport, serde_json::Error> {
    serde_json::from_str(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Core,
    Correlated,
    Duplicate,
}

impl NodeClass {
    fn attrs(self) -> (&'static str, &'static str) {
        match self {
            NodeClass::Core => ("box", "\"filled,bold\""),
            NodeClass::Correlated => ("ellipse", "dashed"),
            NodeClass::Duplicate => ("ellipse", "dotted"),
        }
    }

    fn name(self) -> &'static str {
        match self {
            NodeClass::Core => "core",
            NodeClass::Correlated => "correlated",
            NodeClass::Duplicate => "duplicate",
        }
    }
}

/// Rule relationship graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDoc {
    /// Sorted by id.
    pub nodes: Vec<(String, NodeClass)>,
    /// Sorted; identical to the report's edges.
    pub edges: Vec<Edge>,
}

impl GraphDoc {
    pub fn from_report(report: &PartitionReport) -> Self {
        let nodes = report
            .rules
            .iter()
            .map(|id| {
                let class = if report.is_core(id) {
                    NodeClass::Core
                } else if report
                    .correlated_entry(id)
                    .is_some_and(|c| c.witnesses.iter().any(|w| w.kind == WitnessKind::DuplicateOf))
                {
                    NodeClass::Duplicate
                } else {
                    NodeClass::Correlated
                };
                (id.clone(), class)
            })
            .collect();
        GraphDoc { nodes, edges: report.edges.clone() }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n"))
}

/// Plain DOT digraph; nodes styled by class, edges labeled by kind.
pub fn export_dot(graph: &GraphDoc) -> String {
    if graph.nodes.is_empty() && graph.edges.is_empty() {
        return "digraph rules { }\n".to_string();
    }
    let mut out = String::from("digraph rules {\n");
    for (id, class) in &graph.nodes {
        let (shape, style) = class.attrs();
        let label = match class {
            NodeClass::Core => id.clone(),
            _ => format!("{id}\n({})", class.name()),
        };
        let _ = writeln!(out, "  {} [shape={shape}, style={style}, label={}];", quote(id), quote(&label));
    }
    for e in &graph.edges {
        let _ = writeln!(out, "  {} -> {} [label={}];", quote(&e.from), quote(&e.to), quote(&e.kind.to_string()));
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule id `{0}`")]
pub struct UnknownRuleId(pub String);

/// Multi-line description of one rule and its place in the partition.
pub fn explain_rule(rule_id: &str, rules: &RuleSet, report: &PartitionReport) -> Result<String, UnknownRuleId> {
    let rule = rules.get(rule_id).ok_or_else(|| UnknownRuleId(rule_id.to_string()))?;
    let body = rule.canonical_body();
    let mut out = String::new();
    let _ = writeln!(out, "rule {}", rule.id);
    let _ = writeln!(out, "  source:    {}", format_expression(&rule.body));
    let _ = writeln!(out, "  canonical: {body}");
    let _ = writeln!(out, "  height:    {}", body.height());
    let _ = writeln!(out, "  context:   {}", rule.context);
    let _ = writeln!(out, "  predicate: {}", rule.predicate);
    let _ = writeln!(out, "  action:    {}", rule.action);
    out.push_str("  tree:\n");
    write_tree(&body, 2, &mut out);

    let class = if report.is_core(rule_id) { "core" } else { "correlated" };
    let _ = writeln!(out, "  class:     {class}");
    match report.correlated_entry(rule_id) {
        Some(c) => {
            out.push_str("  witnesses:\n");
            for w in &c.witnesses {
                let _ = writeln!(out, "    {} {} ({})", w.kind, w.by.join(", "), w.detail);
            }
        }
        None => out.push_str("  witnesses: none\n"),
    }
    let touching: Vec<&Edge> = report.edges.iter().filter(|e| e.from == rule_id || e.to == rule_id).collect();
    if touching.is_empty() {
        out.push_str("  edges:     none\n");
    } else {
        out.push_str("  edges:\n");
        for e in touching {
            let _ = writeln!(out, "    {} -> {} [{}]", e.from, e.to, e.kind);
        }
    }
    Ok(out)
}

fn write_tree(t: &CanonicalTree, depth: usize, out: &mut String) {
    let label = match t.node() {
        CanonicalNode::Param(name) => name.clone(),
        CanonicalNode::Value(v) => v.to_string(),
        CanonicalNode::Op(op, _) => op.name().to_string(),
    };
    let _ = writeln!(out, "{}{label}", "  ".repeat(depth));
    for c in t.children() {
        write_tree(c, depth + 1, out);
    }
}
