use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::catcode::Catcode;

/// A source position: document, 1-based line and 1-based column (in chars).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Locator {
    pub source: Arc<str>,
    pub line: u32,
    pub column: u32,
    /// Set when the position is a document-level stand-in rather than the
    /// position of a real source character.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub approximate: bool,
}

impl Locator {
    pub fn new(source: impl Into<Arc<str>>, line: u32, column: u32) -> Self {
        assert!(line >= 1 && column >= 1, "locators are 1-based");
        Locator { source: source.into(), line, column, approximate: false }
    }

    /// Document-level fallback for faults without provenance.
    pub fn document(source: impl Into<Arc<str>>) -> Self {
        Locator { source: source.into(), line: 1, column: 1, approximate: true }
    }

    fn position(&self) -> (u32, u32) {
        (self.line, self.column)
    }
}

impl PartialOrd for Locator {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.source != other.source {
            return None;
        }
        Some(self.position().cmp(&other.position()))
    }
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.source, self.line, self.column)?;
        if self.approximate {
            f.write_str(" (approximate)")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Character(Catcode),
    /// `text` holds the name without the escape character.
    ControlSequence,
    /// `#1`..`#9` inside a macro body.
    Parameter(u8),
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub locator: Locator,
    /// Name of the macro whose expansion produced this token, if any.
    pub expanded_from: Option<Arc<str>>,
}

impl Token {
    pub fn character(ch: char, cat: Catcode, locator: Locator) -> Self {
        Token { kind: TokenKind::Character(cat), text: ch.to_string(), locator, expanded_from: None }
    }

    pub fn control_sequence(name: impl Into<String>, locator: Locator) -> Self {
        let text = name.into();
        debug_assert!(!text.is_empty());
        Token { kind: TokenKind::ControlSequence, text, locator, expanded_from: None }
    }

    pub fn parameter(index: u8, locator: Locator) -> Self {
        assert!((1..=9).contains(&index), "parameter index out of range");
        Token { kind: TokenKind::Parameter(index), text: format!("#{index}"), locator, expanded_from: None }
    }

    pub fn catcode(&self) -> Option<Catcode> {
        match self.kind {
            TokenKind::Character(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_cs(&self, name: &str) -> bool {
        self.kind == TokenKind::ControlSequence && self.text == name
    }

    pub fn cs_name(&self) -> Option<&str> {
        (self.kind == TokenKind::ControlSequence).then_some(self.text.as_str())
    }

    pub fn is(&self, cat: Catcode) -> bool {
        self.kind == TokenKind::Character(cat)
    }

    pub fn is_space(&self) -> bool {
        self.is(Catcode::Space)
    }

    /// Same kind and text, ignoring provenance.
    pub fn same_meaning(&self, other: &Token) -> bool {
        self.kind == other.kind && self.text == other.text
    }

    /// Source spelling of this token.
    pub fn to_source(&self) -> String {
        match self.kind {
            TokenKind::ControlSequence => format!("\\{}", self.text),
            _ => self.text.clone(),
        }
    }
}

/// Tokens compare by meaning; provenance is ignored.
impl PartialEq for Token {
    fn eq(&self, other: &Self) -> bool {
        self.same_meaning(other)
    }
}
impl Eq for Token {}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source())
    }
}

/// Spell a token list back as source text, inserting a space after control
/// words that are followed by a letter.
pub fn detokenize(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        out.push_str(&tok.to_source());
        let word = tok.kind == TokenKind::ControlSequence
            && tok.text.chars().all(|c| c.is_ascii_alphabetic());
        if word {
            if let Some(next) = tokens.get(i + 1) {
                if next.is(Catcode::Letter) {
                    out.push(' ');
                }
            }
        }
    }
    out
}
