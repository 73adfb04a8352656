//! Grammatical roles and Unicode targets for math tokens.

mod unicode;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::tex::{Catcode, Token, TokenKind};

pub use unicode::{decode_styled, map_unicode, Glyph};

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.txt");

/// Binding strength of infix operators, weakest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecClass {
    Logical,
    Set,
    Additive,
    Multiplicative,
    /// Implicit multiplication; only invisible operators live here.
    Juxtaposition,
    Composition,
}

impl PrecClass {
    pub const ALL: [PrecClass; 6] = [
        PrecClass::Logical,
        PrecClass::Set,
        PrecClass::Additive,
        PrecClass::Multiplicative,
        PrecClass::Juxtaposition,
        PrecClass::Composition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrecClass::Logical => "logical",
            PrecClass::Set => "set",
            PrecClass::Additive => "additive",
            PrecClass::Multiplicative => "multiplicative",
            PrecClass::Juxtaposition => "juxtaposition",
            PrecClass::Composition => "composition",
        }
    }
}

impl FromStr for PrecClass {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        PrecClass::ALL.into_iter().find(|p| p.name() == s).ok_or(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Atom,
    Function,
    Infix(PrecClass),
    Prefix,
    Postfix,
    Relation,
    OpenDelimiter,
    CloseDelimiter,
    Separator,
    BigOperator,
    Accent,
    Unknown,
}

impl Role {
    fn from_fixture(role: &str, prec: &str) -> Result<Role, String> {
        let no_prec = |r: Role| if prec == "-" { Ok(r) } else { Err(format!("role {role} takes no precedence, got {prec}")) };
        match role {
            "infix" => prec.parse().map(Role::Infix).map_err(|_| format!("unknown precedence class {prec:?}")),
            "atom" => no_prec(Role::Atom),
            "function" => no_prec(Role::Function),
            "prefix" => no_prec(Role::Prefix),
            "postfix" => no_prec(Role::Postfix),
            "relation" => no_prec(Role::Relation),
            "open" => no_prec(Role::OpenDelimiter),
            "close" => no_prec(Role::CloseDelimiter),
            "separator" => no_prec(Role::Separator),
            "bigop" => no_prec(Role::BigOperator),
            "accent" => no_prec(Role::Accent),
            "unknown" => no_prec(Role::Unknown),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MathStyle {
    Upright,
    Italic,
    Bold,
    BoldItalic,
    DoubleStruck,
    Script,
    Fraktur,
    Sans,
    Monospace,
}

impl MathStyle {
    pub const ALL: [MathStyle; 9] = [
        MathStyle::Upright,
        MathStyle::Italic,
        MathStyle::Bold,
        MathStyle::BoldItalic,
        MathStyle::DoubleStruck,
        MathStyle::Script,
        MathStyle::Fraktur,
        MathStyle::Sans,
        MathStyle::Monospace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MathStyle::Upright => "upright",
            MathStyle::Italic => "italic",
            MathStyle::Bold => "bold",
            MathStyle::BoldItalic => "bold-italic",
            MathStyle::DoubleStruck => "double-struck",
            MathStyle::Script => "script",
            MathStyle::Fraktur => "fraktur",
            MathStyle::Sans => "sans",
            MathStyle::Monospace => "monospace",
        }
    }

    /// The MathML `mathvariant` value.
    pub fn mathvariant(self) -> &'static str {
        match self {
            MathStyle::Upright => "normal",
            MathStyle::Sans => "sans-serif",
            other => other.name(),
        }
    }
}

impl FromStr for MathStyle {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        MathStyle::ALL.into_iter().find(|v| v.name() == s).ok_or(())
    }
}

impl fmt::Display for MathStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LexEntry {
    pub key: String,
    pub role: Role,
    /// Target text, before any style mapping.
    pub unicode: String,
    pub variant: MathStyle,
    /// Content-MathML symbol; `None` means the meaning is unknown.
    pub content: Option<String>,
}

impl LexEntry {
    pub fn unknown_meaning(&self) -> bool {
        self.role == Role::Unknown || self.content.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("lexicon line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("cannot map {input:?} to {style}")]
    Unmappable { input: String, style: MathStyle },
}

/// An immutable key → entry table.
#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    entries: HashMap<String, Arc<LexEntry>>,
}

impl Lexicon {
    pub fn get(&self, key: &str) -> Option<&Arc<LexEntry>> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// The shipped default lexicon.
    pub fn builtin() -> &'static Lexicon {
        static CELL: OnceLock<Lexicon> = OnceLock::new();
        CELL.get_or_init(|| load_lexicon(DEFAULT_LEXICON).expect("shipped lexicon parses"))
    }

    /// Control-sequence names (without backslash) this lexicon knows.
    pub fn control_sequences(&self) -> impl Iterator<Item = &str> {
        self.keys().filter_map(|k| k.strip_prefix('\\'))
    }
}

fn parse_unicode(field: &str) -> Result<String, String> {
    if !field.starts_with("U+") {
        return Ok(field.to_string());
    }
    field
        .split('+')
        .collect::<Vec<_>>()
        .chunks(2)
        .map(|pair| match pair {
            ["U", hex] => u32::from_str_radix(hex, 16)
                .ok()
                .and_then(char::from_u32)
                .filter(|c| !('\u{FDD0}'..='\u{FDEF}').contains(c))
                .ok_or_else(|| format!("invalid codepoint U+{hex}")),
            _ => Err(format!("malformed codepoint list {field:?}")),
        })
        .collect()
}

/// Parse fixture lines `key role precedence unicode variant [content-symbol]`.
pub fn load_lexicon(fixture: &str) -> Result<Lexicon, LexiconError> {
    let mut entries = HashMap::new();
    for (idx, raw) in fixture.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let err = |message: String| LexiconError::Parse { line, message };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if !(5..=6).contains(&fields.len()) {
            return Err(err(format!("expected 5 or 6 fields, found {}", fields.len())));
        }
        let role = Role::from_fixture(fields[1], fields[2]).map_err(err)?;
        let unicode = parse_unicode(fields[3]).map_err(err)?;
        let variant: MathStyle = fields[4].parse().map_err(|_| err(format!("unknown variant {:?}", fields[4])))?;
        let content = fields.get(5).map(|s| s.to_string());
        let key = fields[0].to_string();
        let entry = LexEntry { key: key.clone(), role, unicode, variant, content };
        if entries.insert(key.clone(), Arc::new(entry)).is_some() {
            return Err(LexiconError::DuplicateKey { line, key });
        }
    }
    Ok(Lexicon { entries })
}

fn fallback_entry(token: &Token) -> LexEntry {
    let key = token.to_source();
    let ch = token.text.chars().next();
    let (role, variant) = match (&token.kind, ch) {
        (TokenKind::Character(Catcode::Letter), _) => (Role::Atom, MathStyle::Italic),
        (TokenKind::Character(_), Some(c)) if c.is_ascii_digit() => (Role::Atom, MathStyle::Upright),
        (TokenKind::Character(_), Some(c)) if c.is_alphabetic() => (Role::Atom, MathStyle::Italic),
        _ => (Role::Unknown, MathStyle::Upright),
    };
    LexEntry { key, role, unicode: token.text.clone(), variant, content: None }
}

/// Classify a math-mode token. Never fails: tokens unknown to both the
/// given lexicon and the builtin one fall back to character-class rules,
/// and control sequences end up as `Role::Unknown`.
pub fn classify(token: &Token, lexicon: &Lexicon) -> Arc<LexEntry> {
    let key = token.to_source();
    lexicon
        .get(&key)
        .or_else(|| Lexicon::builtin().get(&key))
        .cloned()
        .unwrap_or_else(|| Arc::new(fallback_entry(token)))
}
