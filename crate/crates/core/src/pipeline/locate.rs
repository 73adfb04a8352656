use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, Severity};
use crate::math::{MathToken, OperatorTree};
use crate::tex::{Locator, Token};

/// Something a diagnostic can point at.
#[derive(Clone, Copy, Debug)]
pub enum Fault<'a> {
    Token(&'a Token),
    MathToken(&'a MathToken),
    /// The first real source token in the subtree.
    Node(&'a OperatorTree),
    /// No provenance at all.
    Unknown,
}

/// The source position to report for `fault`. Tokens produced by macro
/// expansion already carry their call site; anything synthetic falls back
/// to an approximate document locator.
pub fn locate(fault: Fault<'_>, source_id: &str) -> Locator {
    let found = match fault {
        Fault::Token(t) => Some(t.locator.clone()),
        Fault::MathToken(t) => (!t.synthetic).then(|| t.locator.clone()),
        Fault::Node(n) => {
            let mut first = None;
            n.walk(&mut |node| {
                if first.is_none() {
                    first = node.token().filter(|t| !t.synthetic).map(|t| t.locator.clone());
                }
            });
            first
        }
        Fault::Unknown => None,
    };
    found.unwrap_or_else(|| Locator::document(source_id))
}

/// One serialized log line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub severity: Severity,
    pub category: String,
    pub message: String,
    pub locator: Option<Locator>,
    pub version: String,
}

impl LogRecord {
    pub fn new(entry: &Diagnostic, version: &str) -> Self {
        LogRecord {
            severity: entry.severity,
            category: entry.category.clone(),
            message: entry.message.clone(),
            locator: entry.locator.clone(),
            version: version.to_string(),
        }
    }
}

/// One JSON object per line, in emission order.
pub fn log_to_json_lines(log: &[Diagnostic], version: &str) -> String {
    let mut out = String::new();
    for entry in log {
        out.push_str(&serde_json::to_string(&LogRecord::new(entry, version)).expect("log records serialize"));
        out.push('\n');
    }
    out
}
