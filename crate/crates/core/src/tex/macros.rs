use std::collections::{HashMap, HashSet};
use std::sync::{Arc, OnceLock};

use super::catcode::{Catcode, CatcodeTable};
use super::error::TexError;
use super::token::{Locator, Token, TokenKind};
use super::tokenizer::tokenize;

const TEXVC_MACROS: &str = include_str!("../../data/texvc_macros.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Builtin,
    User,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternPart {
    Param(u8),
    /// A delimiter token that must appear literally in the call.
    Literal(Token),
}

#[derive(Clone, Debug)]
pub struct MacroDefinition {
    pub name: String,
    pub arity: u8,
    pub pattern: Vec<PatternPart>,
    /// Body with `#n` already turned into parameter tokens.
    pub body: Vec<Token>,
    pub origin: Origin,
}

impl MacroDefinition {
    /// Build an undelimited macro of `arity` parameters.
    pub fn simple(name: &str, arity: u8, body: Vec<Token>, origin: Origin) -> Result<Self, TexError> {
        let pattern = (1..=arity).map(PatternPart::Param).collect();
        let def = MacroDefinition { name: name.to_string(), arity, pattern, body, origin };
        def.check_body(&Locator::document("<definition>"))?;
        Ok(def)
    }

    fn check_body(&self, at: &Locator) -> Result<(), TexError> {
        for tok in &self.body {
            if let TokenKind::Parameter(n) = tok.kind {
                if n > self.arity {
                    return Err(TexError::MalformedDefinition {
                        reason: format!("body of \\{} refers to #{n} but arity is {}", self.name, self.arity),
                        locator: at.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// How a definition interacts with existing ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefineMode {
    /// `\def`: replaces user macros, refuses builtins.
    Def,
    /// `\newcommand`: refuses anything already defined.
    New,
    /// `\renewcommand`: explicit override, builtins included.
    Renew,
    /// `\providecommand`: silently keeps an existing definition.
    Provide,
}

type MacroMap = HashMap<String, Arc<MacroDefinition>>;

/// Builtin macros plus per-document user definitions.
///
/// The builtin layer and the set of expansion-opaque primitives are shared;
/// cloning a table is cheap and gives an independent user layer.
#[derive(Clone, Debug, Default)]
pub struct MacroTable {
    base: Arc<MacroMap>,
    local: MacroMap,
    opaque: Arc<HashSet<String>>,
}

fn texvc_builtins() -> Arc<MacroMap> {
    static CELL: OnceLock<Arc<MacroMap>> = OnceLock::new();
    CELL.get_or_init(|| {
        let defs = parse_fixture(TEXVC_MACROS, "builtin:texvc", Origin::Builtin)
            .expect("shipped texvc macro fixture parses");
        Arc::new(defs.into_iter().map(|d| (d.name.clone(), Arc::new(d))).collect())
    })
    .clone()
}

impl MacroTable {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The texvc alias macros (`\R`, `\infin`, `\dfrac`, ...).
    pub fn texvc() -> Self {
        MacroTable { base: texvc_builtins(), ..Self::default() }
    }

    /// Declare control sequences that pass through expansion untouched.
    pub fn with_opaque<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = (*self.opaque).clone();
        set.extend(names.into_iter().map(Into::into));
        self.opaque = Arc::new(set);
        self
    }

    pub fn lookup(&self, name: &str) -> Option<&Arc<MacroDefinition>> {
        self.local.get(name).or_else(|| self.base.get(name))
    }

    pub fn is_opaque(&self, name: &str) -> bool {
        self.opaque.contains(name)
    }

    pub fn is_builtin(&self, name: &str) -> bool {
        self.base.contains_key(name) || self.opaque.contains(name)
    }

    /// Register a definition. Returns `false` when `Provide` kept an
    /// existing one.
    pub fn define(&mut self, def: MacroDefinition, mode: DefineMode, at: &Locator) -> Result<bool, TexError> {
        let name = def.name.clone();
        let builtin = self.is_builtin(&name) && !self.local.contains_key(&name);
        let exists = builtin || self.local.contains_key(&name);
        match mode {
            DefineMode::Provide if exists => return Ok(false),
            DefineMode::Renew => {}
            _ if builtin => return Err(TexError::BuiltinRedefinition { name, locator: at.clone() }),
            DefineMode::New if exists => return Err(TexError::AlreadyDefined { name, locator: at.clone() }),
            _ => {}
        }
        def.check_body(at)?;
        self.local.insert(name, Arc::new(def));
        Ok(true)
    }

    /// Parse a full definition (`\def...` or `\newcommand...`) and register it.
    pub fn define_from_source(&mut self, source: &str) -> Result<Arc<MacroDefinition>, TexError> {
        let tokens = tokenize(source, "<definition>", &CatcodeTable::plain())?;
        let mut src = SliceSource { tokens: &tokens, pos: 0 };
        skip_spaces(&mut src);
        let cmd = src.next_token().ok_or_else(|| malformed("empty definition", Locator::document("<definition>")))?;
        let (def, mode) = read_definition(&cmd, &mut src)?;
        let name = def.name.clone();
        self.define(def, mode, &cmd.locator)?;
        Ok(self.lookup(&name).cloned().expect("just defined"))
    }

    /// Load `name arity body` fixture lines as user macros.
    pub fn load_fixture(&mut self, text: &str, source_id: &str) -> Result<usize, TexError> {
        let defs = parse_fixture(text, source_id, Origin::User)?;
        let n = defs.len();
        for def in defs {
            let at = Locator::document(source_id);
            self.define(def, DefineMode::Def, &at)?;
        }
        Ok(n)
    }

    pub fn user_definitions(&self) -> impl Iterator<Item = &Arc<MacroDefinition>> {
        self.local.values()
    }
}

/// Parse the line-oriented macro fixture format: `name arity body-tokens`.
///
/// Blank lines and lines starting with `%` are skipped.
pub fn parse_fixture(text: &str, source_id: &str, origin: Origin) -> Result<Vec<MacroDefinition>, TexError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fixture_err = |message: String| TexError::Fixture { line: line_no, message };
        let mut parts = line.splitn(3, char::is_whitespace);
        let name = parts.next().unwrap_or_default().trim_start_matches('\\');
        let arity_text = parts.next().ok_or_else(|| fixture_err("missing arity".into()))?;
        let body_text = parts.next().unwrap_or("").trim();
        if name.is_empty() {
            return Err(fixture_err("missing macro name".into()));
        }
        let arity: u8 = arity_text
            .parse()
            .ok()
            .filter(|a| *a <= 9)
            .ok_or_else(|| fixture_err(format!("arity must be 0..9, got {arity_text:?}")))?;
        if !seen.insert(name.to_string()) {
            return Err(fixture_err(format!("duplicate macro \\{name}")));
        }
        let body_id = format!("{source_id}:{line_no}");
        let raw_body = tokenize(body_text, &body_id, &CatcodeTable::plain()).map_err(|e| fixture_err(e.to_string()))?;
        let body = convert_parameters(raw_body, arity).map_err(|e| fixture_err(e.to_string()))?;
        let def = MacroDefinition::simple(name, arity, body, origin).map_err(|e| fixture_err(e.to_string()))?;
        out.push(def);
    }
    Ok(out)
}

pub(crate) trait TokenSource {
    fn next_token(&mut self) -> Option<Token>;
    fn peek_token(&self) -> Option<&Token>;
}

pub(crate) struct SliceSource<'a> {
    pub tokens: &'a [Token],
    pub pos: usize,
}

impl TokenSource for SliceSource<'_> {
    fn next_token(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek_token(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }
}

fn malformed(reason: &str, locator: Locator) -> TexError {
    TexError::MalformedDefinition { reason: reason.to_string(), locator }
}

pub(crate) fn skip_spaces(src: &mut impl TokenSource) {
    while src.peek_token().is_some_and(|t| t.is_space()) {
        src.next_token();
    }
}

/// Read a `{...}` group and return its contents without the outer braces.
pub(crate) fn read_group(src: &mut impl TokenSource, at: &Locator) -> Result<Vec<Token>, TexError> {
    skip_spaces(src);
    match src.next_token() {
        Some(t) if t.is(Catcode::BeginGroup) => {}
        Some(t) => return Err(malformed("expected `{`", t.locator)),
        None => return Err(malformed("expected `{` before end of input", at.clone())),
    }
    read_balanced(src, at)
}

/// Collect tokens up to the `}` matching an already-consumed `{`.
pub(crate) fn read_balanced(src: &mut impl TokenSource, at: &Locator) -> Result<Vec<Token>, TexError> {
    let mut depth = 0usize;
    let mut out = Vec::new();
    loop {
        let Some(t) = src.next_token() else {
            return Err(malformed("unterminated group", at.clone()));
        };
        if t.is(Catcode::BeginGroup) {
            depth += 1;
        } else if t.is(Catcode::EndGroup) {
            if depth == 0 {
                return Ok(out);
            }
            depth -= 1;
        }
        out.push(t);
    }
}

/// Turn `#n` pairs into parameter tokens and `##` into a literal `#`.
fn convert_parameters(tokens: Vec<Token>, arity: u8) -> Result<Vec<Token>, TexError> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut it = tokens.into_iter().peekable();
    while let Some(t) = it.next() {
        if !t.is(Catcode::Parameter) {
            out.push(t);
            continue;
        }
        match it.next() {
            Some(n) if n.is(Catcode::Parameter) => out.push(n),
            Some(n) => {
                let index = n.text.parse::<u8>().ok().filter(|i| (1..=9).contains(i));
                match index {
                    Some(i) if i <= arity => out.push(Token::parameter(i, t.locator)),
                    Some(i) => {
                        return Err(malformed(&format!("#{i} exceeds arity {arity}"), t.locator));
                    }
                    None => return Err(malformed("`#` must be followed by a digit", t.locator)),
                }
            }
            None => return Err(malformed("`#` at end of body", t.locator)),
        }
    }
    Ok(out)
}

/// Parse the remainder of a definition whose command token (`\def`,
/// `\newcommand`, `\renewcommand`, `\providecommand`) was already consumed.
pub(crate) fn read_definition(cmd: &Token, src: &mut impl TokenSource) -> Result<(MacroDefinition, DefineMode), TexError> {
    let at = &cmd.locator;
    match cmd.cs_name() {
        Some("def") => read_def(src, at).map(|d| (d, DefineMode::Def)),
        Some("newcommand") => read_newcommand(src, at).map(|d| (d, DefineMode::New)),
        Some("renewcommand") => read_newcommand(src, at).map(|d| (d, DefineMode::Renew)),
        Some("providecommand") => read_newcommand(src, at).map(|d| (d, DefineMode::Provide)),
        _ => Err(malformed("not a definition command", at.clone())),
    }
}

fn read_def(src: &mut impl TokenSource, at: &Locator) -> Result<MacroDefinition, TexError> {
    skip_spaces(src);
    let name = match src.next_token() {
        Some(t) if t.kind == TokenKind::ControlSequence => t.text,
        Some(t) => return Err(malformed("\\def must be followed by a control sequence", t.locator)),
        None => return Err(malformed("\\def at end of input", at.clone())),
    };
    let mut pattern = Vec::new();
    let mut arity = 0u8;
    loop {
        let Some(t) = src.peek_token() else {
            return Err(malformed("missing body", at.clone()));
        };
        if t.is(Catcode::BeginGroup) {
            break;
        }
        let t = src.next_token().expect("peeked");
        if t.is(Catcode::Parameter) {
            let next = src.next_token().ok_or_else(|| malformed("`#` at end of parameter text", t.locator.clone()))?;
            let expected = arity + 1;
            if next.text != expected.to_string() {
                return Err(malformed(&format!("parameters must be numbered consecutively; expected #{expected}"), next.locator));
            }
            arity = expected;
            pattern.push(PatternPart::Param(arity));
        } else if t.is(Catcode::EndGroup) {
            return Err(malformed("unexpected `}` in parameter text", t.locator));
        } else {
            pattern.push(PatternPart::Literal(t));
        }
    }
    let body = convert_parameters(read_group(src, at)?, arity)?;
    Ok(MacroDefinition { name, arity, pattern, body, origin: Origin::User })
}

fn read_newcommand(src: &mut impl TokenSource, at: &Locator) -> Result<MacroDefinition, TexError> {
    skip_spaces(src);
    let name = match src.next_token() {
        Some(t) if t.kind == TokenKind::ControlSequence => t.text,
        Some(t) if t.is(Catcode::BeginGroup) => {
            let inner: Vec<Token> = read_balanced(src, at)?.into_iter().filter(|t| !t.is_space()).collect();
            match inner.as_slice() {
                [cs] if cs.kind == TokenKind::ControlSequence => cs.text.clone(),
                _ => return Err(malformed("expected a single control sequence name", t.locator)),
            }
        }
        Some(t) => return Err(malformed("expected a control sequence name", t.locator)),
        None => return Err(malformed("definition at end of input", at.clone())),
    };
    skip_spaces(src);
    let mut arity = 0u8;
    if src.peek_token().is_some_and(|t| t.is(Catcode::Other) && t.text == "[") {
        let open = src.next_token().expect("peeked");
        let mut digits = String::new();
        loop {
            match src.next_token() {
                Some(t) if t.text == "]" => break,
                Some(t) if !t.is_space() => digits.push_str(&t.text),
                Some(_) => {}
                None => return Err(malformed("unterminated `[`", open.locator)),
            }
        }
        arity = digits
            .parse::<u8>()
            .ok()
            .filter(|a| *a <= 9)
            .ok_or_else(|| malformed("argument count must be 0..9", open.locator.clone()))?;
        skip_spaces(src);
        if src.peek_token().is_some_and(|t| t.text == "[") {
            return Err(malformed("optional-argument defaults are not supported", open.locator));
        }
    }
    let body = convert_parameters(read_group(src, at)?, arity)?;
    let pattern = (1..=arity).map(PatternPart::Param).collect();
    Ok(MacroDefinition { name, arity, pattern, body, origin: Origin::User })
}
