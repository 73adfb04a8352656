//! Structured diagnostics shared by every conversion phase.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tex::Locator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
    Fatal,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
            Severity::Fatal => "fatal",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub category: String,
    pub message: String,
    pub locator: Option<Locator>,
}

impl Diagnostic {
    pub fn new(severity: Severity, category: &str, message: impl Into<String>, locator: Option<Locator>) -> Self {
        Diagnostic { severity, category: category.to_string(), message: message.into(), locator }
    }

    pub fn warning(category: &str, message: impl Into<String>, locator: Option<Locator>) -> Self {
        Self::new(Severity::Warning, category, message, locator)
    }

    pub fn error(category: &str, message: impl Into<String>, locator: Option<Locator>) -> Self {
        Self::new(Severity::Error, category, message, locator)
    }

    pub fn fatal(category: &str, message: impl Into<String>, locator: Option<Locator>) -> Self {
        Self::new(Severity::Fatal, category, message, locator)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.severity, self.category)?;
        if let Some(loc) = &self.locator {
            write!(f, " {loc}")?;
        }
        write!(f, ": {}", self.message)
    }
}
