//! Diagnostics shared by the parser, the model builder and the checker.
//!
//! A diagnostic is a plain value, not a Rust error: operations that can
//! report several findings return `Vec<Diagnostic>` and keep going where
//! recovery is possible.

use std::fmt;

use crate::model::{GoalId, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => write!(f, "warning"),
            Severity::Error => write!(f, "error"),
        }
    }
}

/// A machine-readable finding with a stable rule code.
///
/// Codes follow the pattern `[EWPCSX][0-9]{3}`. Codes starting with `E`,
/// `P`, `C`, `S` or `X` are errors; `W` codes are warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub severity: Severity,
    pub message: String,
    pub span: Option<SourceSpan>,
    pub related: Vec<GoalId>,
}

impl Diagnostic {
    pub fn error(code: &'static str, message: impl Into<String>) -> Self {
        debug_assert!(!code.starts_with('W'));
        Diagnostic {
            code,
            severity: Severity::Error,
            message: message.into(),
            span: None,
            related: Vec::new(),
        }
    }

    pub fn warning(code: &'static str, message: impl Into<String>) -> Self {
        debug_assert!(code.starts_with('W'));
        Diagnostic {
            code,
            severity: Severity::Warning,
            message: message.into(),
            span: None,
            related: Vec::new(),
        }
    }

    pub fn with_span(mut self, span: Option<SourceSpan>) -> Self {
        self.span = span;
        self
    }

    pub fn with_related(mut self, related: Vec<GoalId>) -> Self {
        self.related = related;
        self
    }

    /// One-line rendering for editors and CI:
    /// `FILE:LINE:COL: CODE severity: message`.
    pub fn render_line(&self) -> String {
        match &self.span {
            Some(s) => format!(
                "{}:{}:{}: {} {}: {}",
                s.file, s.start_line, s.start_col, self.code, self.severity, self.message
            ),
            None => format!("{} {}: {}", self.code, self.severity, self.message),
        }
    }
}

/// Deterministic diagnostic order: rule code, then source position, then
/// related ids. Spanless diagnostics sort before spanned ones of the same
/// code.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        let ka = (a.code, span_key(&a.span), &a.related, &a.message);
        let kb = (b.code, span_key(&b.span), &b.related, &b.message);
        ka.cmp(&kb)
    });
}

fn span_key(span: &Option<SourceSpan>) -> (u8, String, u32, u32) {
    match span {
        None => (0, String::new(), 0, 0),
        Some(s) => (1, s.file.clone(), s.start_line, s.start_col),
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_with_and_without_span() {
        let d = Diagnostic::error("E008", "duplicate id `a`");
        assert_eq!(d.render_line(), "E008 error: duplicate id `a`");
        let d = d.with_span(Some(SourceSpan::new("m.egsat", 3, 5, 3, 9)));
        assert_eq!(d.render_line(), "m.egsat:3:5: E008 error: duplicate id `a`");
    }

    #[test]
    fn sort_is_code_then_position() {
        let mut v = vec![
            Diagnostic::error("E009", "b").with_span(Some(SourceSpan::new("f", 1, 1, 1, 2))),
            Diagnostic::error("E001", "a").with_span(Some(SourceSpan::new("f", 9, 1, 9, 2))),
            Diagnostic::error("E001", "a").with_span(Some(SourceSpan::new("f", 2, 1, 2, 2))),
        ];
        sort_diagnostics(&mut v);
        assert_eq!(v[0].span.as_ref().unwrap().start_line, 2);
        assert_eq!(v[1].span.as_ref().unwrap().start_line, 9);
        assert_eq!(v[2].code, "E009");
    }
}
