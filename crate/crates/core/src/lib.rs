//! Redundancy analysis for NAV-validation business rules.
//!
//! Rules are written in a small `IF <expr> <relop> <value> THEN FAIL|WARN`
//! language ([`dsl`]). Each rule body is turned into a canonical expression
//! tree ([`expr`]); a rule whose body contains another rule's body is
//! redundant with it ([`containment`]). [`partition`] splits a rule set into
//! core and correlated rules, optionally refined by predicate implication or
//! by evaluating the rules on fund snapshot data ([`value_check`],
//! [`evaluation`]). Results are exported as JSON, DOT or text ([`report`]).
//!
//! ```
//! use ruleprune::{parse_rules, partition, PartitionOptions};
//!
//! let rules = parse_rules(
//!     "HLD003: IF sum(price * units) = 0 THEN FAIL\n\
//!      HLD002: IF sum(price * units) / nav > 0.2 THEN FAIL\n",
//! )
//! .unwrap();
//! let report = partition(&rules, &PartitionOptions::default(), None).unwrap();
//! assert_eq!(report.core, ["HLD003"]);
//! assert_eq!(report.correlated_ids(), ["HLD002"]);
//! ```

pub mod cli;
pub mod containment;
pub mod decimal;
pub mod dsl;
pub mod evaluation;
pub mod expr;
pub mod partition;
pub mod report;
pub mod rule;
pub mod value_check;

pub use containment::{contains, context_covers, relate, ContainmentMode, RelationKind};
pub use decimal::Decimal;
pub use dsl::{format_rule, parse_context, parse_expression, parse_rules, ParseError};
pub use evaluation::{evaluate_all, evaluate_rule, Dataset, Outcome, OutcomeKind, OutcomeMatrix};
pub use expr::{canonicalize, subtrees, CanonicalTree, ExprTree, OpKind};
pub use partition::{classify_core, duplicates, partition, PartitionOptions, PartitionReport, Witness, WitnessKind};
pub use report::{explain_rule, export_dot, report_json, GraphDoc};
pub use rule::{Action, Context, Predicate, Relop, Rule, RuleSet};
pub use value_check::{predicate_implies, value_check, ValueCheckConfig, ValueCheckMode};
