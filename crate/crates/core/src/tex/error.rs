use thiserror::Error;

use super::token::Locator;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TexError {
    #[error("invalid character U+{:04X} at {locator}", *.ch as u32)]
    InvalidCharacter { ch: char, locator: Locator },
    #[error("control sequence left unterminated at end of input at {locator}")]
    UnterminatedControlSequence { locator: Locator },
    #[error("undefined control sequence \\{name} at {locator}")]
    UnknownControlSequence { name: String, locator: Locator },
    #[error("expansion of \\{name} exceeded depth limit {limit} at {locator}")]
    ExpansionDepthExceeded { name: String, limit: usize, locator: Locator },
    #[error("expansion exceeded token limit {limit} at {locator}")]
    TokenCountExceeded { limit: usize, locator: Locator },
    #[error("malformed definition: {reason} at {locator}")]
    MalformedDefinition { reason: String, locator: Locator },
    #[error("\\{name} is a builtin and cannot be redefined without override at {locator}")]
    BuiltinRedefinition { name: String, locator: Locator },
    #[error("\\{name} is already defined at {locator}")]
    AlreadyDefined { name: String, locator: Locator },
    #[error("use of \\{name} does not match its definition: {reason} at {locator}")]
    ArgumentMismatch { name: String, reason: String, locator: Locator },
    #[error("macro fixture line {line}: {message}")]
    Fixture { line: usize, message: String },
}

impl TexError {
    pub fn locator(&self) -> Option<&Locator> {
        match self {
            TexError::InvalidCharacter { locator, .. }
            | TexError::UnterminatedControlSequence { locator }
            | TexError::UnknownControlSequence { locator, .. }
            | TexError::ExpansionDepthExceeded { locator, .. }
            | TexError::TokenCountExceeded { locator, .. }
            | TexError::MalformedDefinition { locator, .. }
            | TexError::BuiltinRedefinition { locator, .. }
            | TexError::AlreadyDefined { locator, .. }
            | TexError::ArgumentMismatch { locator, .. } => Some(locator),
            TexError::Fixture { .. } => None,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            TexError::InvalidCharacter { .. } => "invalid-character",
            TexError::UnterminatedControlSequence { .. } => "unterminated-control-sequence",
            TexError::UnknownControlSequence { .. } => "unknown-control-sequence",
            TexError::ExpansionDepthExceeded { .. } => "expansion-depth-exceeded",
            TexError::TokenCountExceeded { .. } => "token-count-exceeded",
            TexError::MalformedDefinition { .. } => "malformed-definition",
            TexError::BuiltinRedefinition { .. } => "builtin-redefinition",
            TexError::AlreadyDefined { .. } => "already-defined",
            TexError::ArgumentMismatch { .. } => "argument-mismatch",
            TexError::Fixture { .. } => "fixture",
        }
    }
}
