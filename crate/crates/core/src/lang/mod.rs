//! The `.sfd` model language and the `.scn` scenario language.
//!
//! ```text
//! model vinasse_plant [CLP]
//! param TotalCapacity = 18000 [m3]
//! stock AccumulatedVinasse { initial = 0 unit = m3 in = [vinasseInflow] }
//! flow vinasseInflow = min(200, TotalCapacity - AccumulatedVinasse) [m3]
//! event pickup every 30 start 30 { AccumulatedVinasse -= 10; }
//! ```

mod format;
mod lexer;
mod lint;
mod parser;
mod scenario_file;

use std::fmt;

pub use format::{format_expr, format_model};
pub use lexer::{tokenize, LexError, Token, TokenKind, KEYWORDS};
pub use lint::{lint_naming, lint_naming_at};
pub use parser::{parse_expr, parse_model, ParseOutcome, Positions};
pub use scenario_file::{format_scenarios, parse_scenarios};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A located message. Line and column are 1-based; 0 means "no source position".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl ParseDiagnostic {
    pub fn error(code: &'static str, message: impl Into<String>, line: usize, column: usize) -> Self {
        ParseDiagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            line,
            column,
        }
    }

    pub fn warning(code: &'static str, message: impl Into<String>, line: usize, column: usize) -> Self {
        ParseDiagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            line,
            column,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}[{}]: {}",
            self.line, self.column, self.severity, self.code, self.message
        )
    }
}

/// Sorts by position, keeping insertion order among equal positions.
pub fn sort_diagnostics(diags: &mut [ParseDiagnostic]) {
    diags.sort_by_key(|d| (d.line, d.column));
}
