//! Rule body expression trees and their canonical (AC-normalized) form.
//!
//! [`ExprTree`] is what the parser produces. [`CanonicalTree`] is the
//! comparable form: ADD/MUL nodes are flattened and their children sorted,
//! so two bodies that differ only by operand order or bracketing of `+`/`*`
//! canonicalize to the same tree. SUB, DIV and SUM keep their structure.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::decimal::Decimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Div,
    Sum,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::Div => "div",
            OpKind::Sum => "sum",
        }
    }

    /// Associative and commutative.
    pub fn is_ac(self) -> bool {
        matches!(self, OpKind::Add | OpKind::Mul)
    }
}

/// A rule body as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum ExprTree {
    Param { name: String },
    Value { value: Decimal },
    Op { op: OpKind, children: Vec<ExprTree> },
}

impl ExprTree {
    pub fn param(name: impl Into<String>) -> Self {
        ExprTree::Param { name: name.into() }
    }

    pub fn value(value: Decimal) -> Self {
        ExprTree::Value { value }
    }

    pub fn op(op: OpKind, children: Vec<ExprTree>) -> Self {
        ExprTree::Op { op, children }
    }

    pub fn add(children: Vec<ExprTree>) -> Self {
        Self::op(OpKind::Add, children)
    }

    pub fn mul(children: Vec<ExprTree>) -> Self {
        Self::op(OpKind::Mul, children)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(lhs: ExprTree, rhs: ExprTree) -> Self {
        Self::op(OpKind::Sub, vec![lhs, rhs])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(lhs: ExprTree, rhs: ExprTree) -> Self {
        Self::op(OpKind::Div, vec![lhs, rhs])
    }

    pub fn sum(inner: ExprTree) -> Self {
        Self::op(OpKind::Sum, vec![inner])
    }

    /// Checks operator arity: ADD/MUL at least 2, SUB/DIV exactly 2, SUM exactly 1.
    pub fn is_well_formed(&self) -> bool {
        match self {
            ExprTree::Param { .. } | ExprTree::Value { .. } => true,
            ExprTree::Op { op, children } => {
                let arity_ok = match op {
                    OpKind::Add | OpKind::Mul => children.len() >= 2,
                    OpKind::Sub | OpKind::Div => children.len() == 2,
                    OpKind::Sum => children.len() == 1,
                };
                arity_ok && children.iter().all(ExprTree::is_well_formed)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            ExprTree::Op { children, .. } => 1 + children.iter().map(ExprTree::node_count).sum::<usize>(),
            _ => 1,
        }
    }

    /// Parameter names referenced anywhere in the tree, sorted.
    pub fn params(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ExprTree::Param { name } => {
                out.insert(name.as_str());
            }
            ExprTree::Value { .. } => {}
            ExprTree::Op { children, .. } => children.iter().for_each(|c| c.collect_params(out)),
        }
    }
}

/// SHA-256 of a canonical tree's prefix rendering.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    fn of(text: &str) -> Self {
        Digest(Sha256::digest(text.as_bytes()).into())
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", &self.to_hex()[..16])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CanonicalNode {
    Param(String),
    Value(Decimal),
    Op(OpKind, Vec<CanonicalTree>),
}

#[derive(Debug)]
struct Inner {
    node: CanonicalNode,
    pretty: String,
    digest: Digest,
    height: usize,
    size: usize,
}

/// An expression tree in canonical form, with its prefix rendering,
/// digest, height and node count cached at every node.
///
/// Equality compares digests first and confirms on the rendering, which
/// is injective over canonical trees.
#[derive(Clone)]
pub struct CanonicalTree(Arc<Inner>);

impl CanonicalTree {
    fn build(node: CanonicalNode) -> Self {
        let pretty = match &node {
            CanonicalNode::Param(name) => name.clone(),
            CanonicalNode::Value(v) => v.to_string(),
            CanonicalNode::Op(op, children) => {
                let inner: Vec<&str> = children.iter().map(|c| c.pretty()).collect();
                format!("{}({})", op.name(), inner.join(","))
            }
        };
        let (height, size) = match &node {
            CanonicalNode::Op(_, children) => (
                1 + children.iter().map(|c| c.height()).max().unwrap_or(0),
                1 + children.iter().map(|c| c.size()).sum::<usize>(),
            ),
            _ => (1, 1),
        };
        let digest = Digest::of(&pretty);
        CanonicalTree(Arc::new(Inner { node, pretty, digest, height, size }))
    }

    pub fn node(&self) -> &CanonicalNode {
        &self.0.node
    }

    /// Prefix functional rendering, e.g. `div(sum(mul(fx_rate,txn_price,units)),nav)`.
    pub fn pretty(&self) -> &str {
        &self.0.pretty
    }

    pub fn digest(&self) -> Digest {
        self.0.digest
    }

    /// 1 for a leaf, 1 + max child height otherwise.
    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn children(&self) -> &[CanonicalTree] {
        match &self.0.node {
            CanonicalNode::Op(_, children) => children,
            _ => &[],
        }
    }

    pub fn op(&self) -> Option<OpKind> {
        match &self.0.node {
            CanonicalNode::Op(op, _) => Some(*op),
            _ => None,
        }
    }

    pub fn to_expr(&self) -> ExprTree {
        match &self.0.node {
            CanonicalNode::Param(name) => ExprTree::param(name.clone()),
            CanonicalNode::Value(v) => ExprTree::value(v.clone()),
            CanonicalNode::Op(op, children) => ExprTree::op(*op, children.iter().map(CanonicalTree::to_expr).collect()),
        }
    }

    /// Pre-order walk over every node, including `self`.
    pub fn nodes(&self) -> Vec<&CanonicalTree> {
        let mut out = Vec::with_capacity(self.size());
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            stack.extend(t.children().iter().rev());
        }
        out
    }
}

impl PartialEq for CanonicalTree {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.digest == other.0.digest && self.0.pretty == other.0.pretty)
    }
}

impl Eq for CanonicalTree {}

impl Hash for CanonicalTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.digest.hash(state);
    }
}

impl PartialOrd for CanonicalTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by rendering, then digest.
impl Ord for CanonicalTree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pretty().cmp(other.pretty()).then_with(|| self.digest().cmp(&other.digest()))
    }
}

impl fmt::Debug for CanonicalTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalTree({})", self.pretty())
    }
}

impl fmt::Display for CanonicalTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.pretty())
    }
}

/// Flattens nested ADD/MUL nodes and sorts their children.
pub fn canonicalize(tree: &ExprTree) -> CanonicalTree {
    match tree {
        ExprTree::Param { name } => CanonicalTree::build(CanonicalNode::Param(name.clone())),
        ExprTree::Value { value } => CanonicalTree::build(CanonicalNode::Value(value.clone())),
        ExprTree::Op { op, children } => {
            let mut canon: Vec<CanonicalTree> = Vec::with_capacity(children.len());
            for child in children.iter().map(canonicalize) {
                match child.node() {
                    CanonicalNode::Op(k, grand) if op.is_ac() && k == op => canon.extend(grand.iter().cloned()),
                    _ => canon.push(child),
                }
            }
            if op.is_ac() {
                canon.sort();
            }
            CanonicalTree::build(CanonicalNode::Op(*op, canon))
        }
    }
}

/// Distinct subtrees rooted at every node of `tree`, including `tree`.
pub fn subtrees(tree: &CanonicalTree) -> BTreeSet<CanonicalTree> {
    tree.nodes().into_iter().cloned().collect()
}
