//! Line-oriented model language.

pub mod diag;
pub mod format;
pub mod lexer;
pub mod parser;

pub use diag::{Diagnostic, Severity, SourceSpan};
pub use format::format_model;
pub use parser::{parse_assumption, parse_expr, parse_expr_in, parse_model, Scope};
