//! Non-fatal diagnostics.
//!
//! Parsing and analysis never abort on malformed data; they emit diagnostics
//! and continue. Each diagnostic renders as one line of the run log in the
//! form `LEVEL<TAB>location<TAB>message`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    /// Informational note (e.g. nodes pruned by an edge threshold).
    Info,
    /// Data problem handled with a documented default; bumps the process
    /// exit code to "completed with warnings".
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Info => "INFO",
            Severity::Warning => "WARN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Where the problem was observed: `file:line` for parser diagnostics,
    /// a stage name (e.g. `corpus`, `network/author`) elsewhere.
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    pub fn info(location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Info,
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn warning(location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            location: location.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}\t{}\t{}",
            self.severity.as_str(),
            self.location,
            self.message
        )
    }
}

/// True when any diagnostic in the slice is a warning (drives the
/// "completed with warnings" exit status).
pub fn has_warnings(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Warning)
}
