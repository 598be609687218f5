use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub severity: Severity,
    pub message: String,
    pub span: SourceSpan,
    pub hint: Option<String>,
}

/// Stable diagnostic codes.
pub mod codes {
    pub const SYNTAX: &str = "E001";
    pub const UNKNOWN_IDENT: &str = "E002";
    pub const DUPLICATE: &str = "E003";
    pub const ARITY: &str = "E004";
    pub const ENTROPY_COUNT: &str = "E005";
    pub const MISSING_LEADING: &str = "E006";
    pub const BAD_DECL: &str = "E007";
    pub const UNKNOWN_KEYWORD: &str = "E008";
    pub const BAD_NUMBER: &str = "E009";
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic { code: code.into(), severity: Severity::Error, message: message.into(), span, hint: None }
    }

    pub fn with_hint(mut self, h: impl Into<String>) -> Self {
        self.hint = Some(h.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}:{}-{}: {}[{}]: {}",
            self.span.file, self.span.line, self.span.col_start, self.span.col_end, sev, self.code, self.message
        )?;
        if let Some(h) = &self.hint {
            write!(f, "\n  hint: {h}")?;
        }
        Ok(())
    }
}
