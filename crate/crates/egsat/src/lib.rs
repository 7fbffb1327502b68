//! Goal-model compiler and analysis toolkit for hierarchies of emotional,
//! functional and quality goals.
//!
//! The pipeline: parse an `.egsat` source into an immutable [`model::GoalModel`],
//! validate it ([`analysis::check`]), query it (How/Why traces, coverage,
//! AND/OR satisfaction), consolidate similar goals, and export to DOT,
//! JSON or Markdown. The [`stats`] module reproduces the evaluation
//! mathematics used to assess the method: frequency grouping of elicited
//! goals, the Wilcoxon signed-rank test and Cohen's kappa.

pub mod analysis;
pub mod consolidate;
pub mod diag;
pub mod lexer;
pub mod model;
pub mod parser;
pub mod printer;
pub mod render;
pub mod stats;

pub use analysis::{check, coverage, satisfies, trace_how, trace_why};
pub use diag::{Diagnostic, Severity};
pub use model::{build_model, GoalId, GoalKind, GoalModel};
pub use parser::{parse, parse_named, ParseResult};
pub use printer::format;
