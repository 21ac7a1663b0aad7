//! Proper containment between canonical rule bodies, and the pairwise
//! relation between rules that it induces.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::CanonicalTree;
use crate::rule::{Context, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContainmentMode {
    /// The candidate must equal a rooted subtree of the container.
    Strict,
    /// Also accepts a same-operator node over a proper sub-multiset
    /// (size >= 2) of the children of an ADD/MUL node.
    #[default]
    AcEmbed,
}

impl fmt::Display for ContainmentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContainmentMode::Strict => "strict",
            ContainmentMode::AcEmbed => "ac_embed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    None,
    /// The first rule's body sits inside the second's.
    IInJ,
    /// The second rule's body sits inside the first's.
    JInI,
    Equal,
}

/// Whether `candidate` is properly contained in `container`.
pub fn contains(container: &CanonicalTree, candidate: &CanonicalTree, mode: ContainmentMode) -> bool {
    if candidate.size() >= container.size() {
        return false;
    }
    container.nodes().into_iter().any(|node| {
        if node.height() < candidate.height() {
            return false;
        }
        if node == candidate {
            return true;
        }
        mode == ContainmentMode::AcEmbed && is_ac_sub_node(node, candidate)
    })
}

/// `candidate` is `op(S)` where `node` is `op(M)`, op is ADD or MUL, and S is a
/// proper sub-multiset of M with |S| >= 2. Both child lists are sorted.
fn is_ac_sub_node(node: &CanonicalTree, candidate: &CanonicalTree) -> bool {
    let Some(op) = node.op().filter(|op| op.is_ac()) else {
        return false;
    };
    if candidate.op() != Some(op) {
        return false;
    }
    let (big, small) = (node.children(), candidate.children());
    if small.len() < 2 || small.len() >= big.len() {
        return false;
    }
    let mut it = big.iter();
    'outer: for want in small {
        for have in it.by_ref() {
            match have.cmp(want) {
                Ordering::Less => continue,
                Ordering::Equal => continue 'outer,
                Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// Whether a rule scoped by `outer` applies everywhere a rule scoped by
/// `inner` does.
pub fn context_covers(outer: &Context, inner: &Context) -> bool {
    let classes = match (&outer.classes, &inner.classes) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(o), Some(i)) => o.is_superset(i),
    };
    let ccy = match (&outer.ccy, &inner.ccy) {
        (None, _) => true,
        (Some(o), Some(i)) => o == i,
        (Some(_), None) => false,
    };
    let period = match (&outer.period, &inner.period) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(o), Some(i)) => o.covers(i),
    };
    classes && ccy && period
}

/// Relation between two rule bodies, gated on context.
///
/// `IInJ` means `ri`'s body is properly inside `rj`'s and `ri` applies
/// wherever `rj` does, so `ri` can stand in for `rj`.
pub fn relate(ri: &Rule, rj: &Rule, mode: ContainmentMode) -> RelationKind {
    relate_canonical((&ri.canonical_body(), &ri.context), (&rj.canonical_body(), &rj.context), mode)
}

/// [`relate`] over pre-canonicalized bodies.
pub fn relate_canonical(
    (ti, ci): (&CanonicalTree, &Context),
    (tj, cj): (&CanonicalTree, &Context),
    mode: ContainmentMode,
) -> RelationKind {
    if ti == tj {
        return if context_covers(ci, cj) && context_covers(cj, ci) { RelationKind::Equal } else { RelationKind::None };
    }
    if contains(tj, ti, mode) && context_covers(ci, cj) {
        RelationKind::IInJ
    } else if contains(ti, tj, mode) && context_covers(cj, ci) {
        RelationKind::JInI
    } else {
        RelationKind::None
    }
}
