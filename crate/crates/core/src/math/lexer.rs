use std::sync::Arc;

use super::grammar::Term;
use super::tree::{MathToken, NodeKind, OperatorTree, TokenClass};
use super::MathConfig;
use crate::diag::Diagnostic;
use crate::lexicon::{classify, map_unicode, Glyph, LexEntry, MathStyle, PrecClass, Role};
use crate::tex::{Catcode, Locator, Token, TokenKind};

/// One grammar terminal with its prebuilt subtree.
#[derive(Clone, Debug)]
pub(crate) struct Lexeme {
    pub term: Term,
    pub tree: OperatorTree,
    pub span: (u32, u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Style {
    Map(MathStyle),
    /// `\mathrm` and friends: letter runs form one upright identifier.
    Word,
}

const SPACING: &[&str] = &[
    ",", ";", ":", "!", " ", "quad", "qquad", "enspace", "thinspace", "medspace", "thickspace", "negthinspace",
    "negmedspace", "negthickspace", "displaystyle", "textstyle", "scriptstyle", "scriptscriptstyle", "limits",
    "nolimits", "relax", "nonumber", "notag", "par", "strut", "allowbreak", "nobreak",
];
const SKIP_WITH_ARG: &[&str] = &["hspace", "vspace", "mspace", "kern", "label", "color", "phantom", "hphantom", "vphantom"];
const TEXT: &[&str] = &["text", "mbox", "textrm", "textit", "textbf", "textsf", "texttt", "textnormal", "hbox"];
const BIG: &[&str] = &["big", "Big", "bigg", "Bigg"];
const BIG_OPEN: &[&str] = &["bigl", "Bigl", "biggl", "Biggl"];
const BIG_CLOSE: &[&str] = &["bigr", "Bigr", "biggr", "Biggr"];
const BIG_MID: &[&str] = &["bigm", "Bigm", "biggm", "Biggm", "middle"];

const STRUCTURAL: &[&str] = &[
    "frac", "binom", "sqrt", "operatorname", "mathop", "left", "right", "not", "begin", "end", "\\", "cr", "newline",
];
const STYLES: &[&str] = &[
    "mathrm", "mathup", "rm", "mathbf", "bf", "bold", "mathit", "mathnormal", "it", "boldsymbol", "bm", "mathbb", "Bbb",
    "mathcal", "mathscr", "cal", "mathfrak", "frak", "mathsf", "sf", "mathtt", "tt",
];

/// Control sequences the lexer interprets itself.
pub(crate) fn structural_commands() -> impl Iterator<Item = &'static str> {
    [SPACING, SKIP_WITH_ARG, TEXT, BIG, BIG_OPEN, BIG_CLOSE, BIG_MID, STRUCTURAL, STYLES].into_iter().flatten().copied()
}

fn style_command(name: &str) -> Option<Style> {
    Some(match name {
        "mathrm" | "mathup" | "rm" => Style::Word,
        "mathbf" | "bf" | "bold" => Style::Map(MathStyle::Bold),
        "mathit" | "mathnormal" | "it" => Style::Map(MathStyle::Italic),
        "boldsymbol" | "bm" => Style::Map(MathStyle::BoldItalic),
        "mathbb" | "Bbb" => Style::Map(MathStyle::DoubleStruck),
        "mathcal" | "mathscr" | "cal" => Style::Map(MathStyle::Script),
        "mathfrak" | "frak" => Style::Map(MathStyle::Fraktur),
        "mathsf" | "sf" => Style::Map(MathStyle::Sans),
        "mathtt" | "tt" => Style::Map(MathStyle::Monospace),
        _ => return None,
    })
}

/// Spacing counterpart of a combining accent, used when the accent sits
/// over a compound expression.
fn spacing_accent(c: char) -> char {
    match c {
        '\u{0300}' => '`',
        '\u{0301}' => '\u{00B4}',
        '\u{0302}' => '^',
        '\u{0303}' => '~',
        '\u{0304}' | '\u{0305}' => '\u{00AF}',
        '\u{0306}' => '\u{02D8}',
        '\u{0307}' => '\u{02D9}',
        '\u{0308}' => '\u{00A8}',
        '\u{030C}' => '\u{02C7}',
        '\u{0332}' => '_',
        '\u{20D7}' => '\u{2192}',
        other => other,
    }
}

fn term_for(entry: &LexEntry, text: &str) -> Term {
    match entry.role {
        Role::Atom => {
            if !text.is_empty() && text.chars().all(char::is_alphabetic) {
                Term::Id
            } else {
                Term::Atom
            }
        }
        Role::Function => Term::Func,
        Role::Infix(PrecClass::Logical) => Term::Logic,
        Role::Infix(PrecClass::Set) => Term::Set,
        Role::Infix(PrecClass::Additive) => {
            if matches!(entry.key.as_str(), "+" | "-" | "\\pm" | "\\mp") {
                Term::Sign
            } else {
                Term::Add
            }
        }
        Role::Infix(PrecClass::Multiplicative) => Term::Mul,
        Role::Infix(PrecClass::Juxtaposition) => Term::Juxt,
        Role::Infix(PrecClass::Composition) => Term::Comp,
        Role::Prefix => Term::Prefix,
        Role::Postfix => Term::Postfix,
        Role::Relation => Term::Rel,
        Role::OpenDelimiter if matches!(entry.key.as_str(), "|" | "\\|") => Term::Bar,
        Role::OpenDelimiter => Term::Open,
        Role::CloseDelimiter => Term::Close,
        Role::Separator => Term::Sep,
        Role::BigOperator => Term::BigOp,
        Role::Accent | Role::Unknown => Term::Atom,
    }
}

fn class_for(entry: &LexEntry, text: &str) -> TokenClass {
    match entry.role {
        Role::Atom | Role::Function => {
            if !text.is_empty() && text.chars().all(|c| c.is_ascii_digit() || c == '.') {
                TokenClass::Number
            } else {
                TokenClass::Identifier
            }
        }
        Role::Unknown if entry.key.starts_with('\\') => TokenClass::Text,
        Role::Unknown => TokenClass::Identifier,
        _ => TokenClass::Operator,
    }
}

/// Apply a math style to `base`, preferring styled codepoints.
fn styled(base: &str, style: MathStyle) -> (String, Option<MathStyle>) {
    let single_letter = base.chars().count() == 1 && base.chars().all(char::is_alphabetic);
    if style == MathStyle::Upright {
        return (base.to_string(), single_letter.then_some(MathStyle::Upright));
    }
    let mut out = String::new();
    let mut pending = None;
    for c in base.chars() {
        match map_unicode(c, style) {
            Ok(Glyph::Char(m)) => out.push(m),
            Ok(Glyph::Styled { base, style }) => {
                out.push(base);
                pending = Some(style);
            }
            Err(_) => out.push(c),
        }
    }
    if pending.is_some() {
        (base.to_string(), pending)
    } else {
        (out, None)
    }
}

pub(crate) struct Session<'a> {
    pub config: &'a MathConfig,
    pub tokens: &'a [Token],
    pub diagnostics: Vec<Diagnostic>,
    pub depth: usize,
    /// Chart items still available to this formula across all its rows.
    pub items_left: usize,
}

type Lexed<T> = Result<T, Diagnostic>;

impl<'a> Session<'a> {
    pub fn new(config: &'a MathConfig, tokens: &'a [Token]) -> Self {
        Session { config, tokens, diagnostics: Vec::new(), depth: 0, items_left: super::FORMULA_ITEM_BUDGET }
    }

    pub fn imbalance(&mut self, message: &str, locator: &Locator) -> Lexed<()> {
        if self.config.strict {
            return Err(Diagnostic::fatal("delimiter-imbalance", message, Some(locator.clone())));
        }
        self.diagnostics.push(Diagnostic::warning("delimiter-imbalance", message, Some(locator.clone())));
        Ok(())
    }

    fn token_tree(&self, entry: Arc<LexEntry>, source: String, text: String, variant: Option<MathStyle>, at: usize, end: usize) -> OperatorTree {
        let class = class_for(&entry, &text);
        let tok = MathToken { entry, source, text, variant, class, locator: self.tokens[at].locator.clone(), synthetic: false };
        OperatorTree::new(NodeKind::Token(tok), (at as u32, end as u32))
    }

    fn lexeme(&self, term: Term, tree: OperatorTree, start: usize, end: usize) -> Lexeme {
        Lexeme { term, tree, span: (start as u32, end as u32) }
    }

    /// Lex `tokens[start..end]` into grammar terminals.
    pub fn lex(&mut self, start: usize, end: usize, style: Option<Style>) -> Lexed<Vec<Lexeme>> {
        let mut out = Vec::new();
        let mut i = start;
        while i < end {
            i = self.lex_one(i, end, style, &mut out)?;
        }
        Ok(out)
    }

    fn skip_spaces(&self, mut i: usize, end: usize) -> usize {
        while i < end && (self.tokens[i].is_space() || self.tokens[i].is(Catcode::Ignored)) {
            i += 1;
        }
        i
    }

    /// Index of the `}` matching the `{` at `open`, or `end` if unmatched.
    fn matching_close(&mut self, open: usize, end: usize) -> Lexed<usize> {
        let mut depth = 0usize;
        for j in open..end {
            let t = &self.tokens[j];
            if t.is(Catcode::BeginGroup) {
                depth += 1;
            } else if t.is(Catcode::EndGroup) {
                depth -= 1;
                if depth == 0 {
                    return Ok(j);
                }
            }
        }
        let loc = self.tokens[open].locator.clone();
        self.imbalance("unmatched `{`", &loc)?;
        Ok(end)
    }

    /// Read one macro argument: a group, a control sequence with its own
    /// arguments, or a single character.
    fn read_arg(&mut self, i: usize, end: usize, style: Option<Style>) -> Lexed<(OperatorTree, usize)> {
        let mut i = self.skip_spaces(i, end);
        if i >= end {
            let at = i.min(self.tokens.len().saturating_sub(1));
            let loc = self.tokens.get(at).map(|t| t.locator.clone());
            self.diagnostics.push(Diagnostic::warning("missing-argument", "expected an argument", loc));
            return Ok((empty_row(i), i));
        }
        if self.tokens[i].is(Catcode::BeginGroup) {
            let close = self.matching_close(i, end)?;
            let tree = self.parse_best(i + 1, close, style)?;
            return Ok((tree, (close + 1).min(end)));
        }
        if matches!(self.tokens[i].kind, TokenKind::Character(_)) {
            let lx = self.lex(i, i + 1, style)?;
            let tree = lx.into_iter().next().map_or_else(|| empty_row(i), |l| l.tree);
            return Ok((tree, i + 1));
        }
        loop {
            let mut tmp = Vec::new();
            let next = self.lex_one(i, end, style, &mut tmp)?;
            if let Some(l) = tmp.into_iter().next() {
                return Ok((l.tree, next));
            }
            i = next;
            if i >= end {
                return Ok((empty_row(i), i));
            }
        }
    }

    fn lex_one(&mut self, i: usize, end: usize, style: Option<Style>, out: &mut Vec<Lexeme>) -> Lexed<usize> {
        let tok = self.tokens[i].clone();
        match tok.kind {
            TokenKind::Character(cat) => self.lex_char(i, end, cat, style, out),
            TokenKind::Parameter(_) => {
                let entry = classify(&tok, &self.config.lexicon);
                let tree = self.token_tree(entry, tok.to_source(), tok.to_source(), None, i, i + 1);
                out.push(self.lexeme(Term::Atom, tree, i, i + 1));
                Ok(i + 1)
            }
            TokenKind::ControlSequence => self.lex_cs(i, end, style, out),
        }
    }

    fn lex_char(&mut self, i: usize, end: usize, cat: Catcode, style: Option<Style>, out: &mut Vec<Lexeme>) -> Lexed<usize> {
        let tok = &self.tokens[i];
        match cat {
            Catcode::Space | Catcode::Ignored | Catcode::MathShift | Catcode::Active | Catcode::EndOfLine | Catcode::Comment => Ok(i + 1),
            Catcode::BeginGroup => {
                let close = self.matching_close(i, end)?;
                let tree = self.parse_best(i + 1, close, style)?;
                let next = (close + 1).min(end);
                out.push(self.lexeme(Term::Atom, tree, i, next));
                Ok(next)
            }
            Catcode::EndGroup => {
                let loc = tok.locator.clone();
                self.imbalance("unmatched `}`", &loc)?;
                Ok(i + 1)
            }
            Catcode::Superscript | Catcode::Subscript => {
                let (tree, next) = self.read_arg(i + 1, end, style)?;
                let term = if cat == Catcode::Superscript { Term::Sup } else { Term::Sub };
                out.push(self.lexeme(term, tree, i, next));
                Ok(next)
            }
            Catcode::Alignment => {
                out.push(self.separator(i));
                Ok(i + 1)
            }
            Catcode::Letter => Ok(self.lex_letters(i, end, style, out)),
            _ if tok.text == "'" => self.lex_primes(i, end, style, out),
            _ if tok.text.chars().all(|c| c.is_ascii_digit()) => Ok(self.lex_number(i, end, style, out)),
            _ => {
                let entry = classify(tok, &self.config.lexicon);
                Ok(self.push_entry(entry, i, i + 1, style, out))
            }
        }
    }

    fn separator(&self, i: usize) -> Lexeme {
        let text = "\u{2063}".to_string();
        let entry = LexEntry { key: self.tokens[i].to_source(), role: Role::Separator, unicode: text.clone(), variant: MathStyle::Upright, content: None };
        let tree = self.token_tree(Arc::new(entry), self.tokens[i].to_source(), text, None, i, i + 1);
        self.lexeme(Term::Sep, tree, i, i + 1)
    }

    fn lex_letters(&mut self, i: usize, end: usize, style: Option<Style>, out: &mut Vec<Lexeme>) -> usize {
        if style == Some(Style::Word) {
            let mut j = i;
            while j < end && self.tokens[j].is(Catcode::Letter) {
                j += 1;
            }
            let word: String = self.tokens[i..j].iter().map(|t| t.text.as_str()).collect();
            let entry = classify(&self.tokens[i], &self.config.lexicon);
            let entry = Arc::new(LexEntry { key: word.clone(), variant: MathStyle::Upright, ..(*entry).clone() });
            let (text, variant) = styled(&word, MathStyle::Upright);
            let tree = self.token_tree(entry, word.clone(), text, variant, i, j);
            out.push(self.lexeme(Term::Id, tree, i, j));
            return j;
        }
        let entry = classify(&self.tokens[i], &self.config.lexicon);
        self.push_entry(entry, i, i + 1, style, out)
    }

    fn lex_number(&mut self, i: usize, end: usize, style: Option<Style>, out: &mut Vec<Lexeme>) -> usize {
        let digit = |t: &Token| matches!(t.kind, TokenKind::Character(Catcode::Other)) && t.text.chars().all(|c| c.is_ascii_digit());
        let mut j = i;
        while j < end && digit(&self.tokens[j]) {
            j += 1;
        }
        if j + 1 < end && self.tokens[j].text == "." && digit(&self.tokens[j + 1]) {
            j += 1;
            while j < end && digit(&self.tokens[j]) {
                j += 1;
            }
        }
        let number: String = self.tokens[i..j].iter().map(|t| t.text.as_str()).collect();
        let entry = Arc::new(LexEntry { key: number.clone(), role: Role::Atom, unicode: number.clone(), variant: MathStyle::Upright, content: None });
        let (text, variant) = match style {
            Some(Style::Map(s)) => styled(&number, s),
            _ => (number.clone(), None),
        };
        let tree = self.token_tree(entry, number, text, variant, i, j);
        out.push(self.lexeme(Term::Num, tree, i, j));
        j
    }

    fn lex_primes(&mut self, i: usize, end: usize, style: Option<Style>, out: &mut Vec<Lexeme>) -> Lexed<usize> {
        let mut j = i;
        while j < end && self.tokens[j].text == "'" && !self.tokens[j].is_cs("'") {
            j += 1;
        }
        let n = j - i;
        let text = match n {
            1 => "\u{2032}".to_string(),
            2 => "\u{2033}".to_string(),
            3 => "\u{2034}".to_string(),
            _ => "\u{2032}".repeat(n),
        };
        let prime = Token::control_sequence("prime", self.tokens[i].locator.clone());
        let entry = classify(&prime, &self.config.lexicon);
        let prime_tree = self.token_tree(entry, "'".repeat(n), text, None, i, j);
        let k = self.skip_spaces(j, end);
        if k < end && self.tokens[k].is(Catcode::Superscript) {
            let (arg, next) = self.read_arg(k + 1, end, style)?;
            let span = (i as u32, next as u32);
            let row = OperatorTree::new(NodeKind::Row { items: vec![prime_tree, arg], separators: Vec::new(), unparsed: false }, span);
            out.push(self.lexeme(Term::Sup, row, i, next));
            return Ok(next);
        }
        out.push(self.lexeme(Term::Sup, prime_tree, i, j));
        Ok(j)
    }

    /// Emit a lexeme for a classified token covering `tokens[i..j]`.
    fn push_entry(&mut self, entry: Arc<LexEntry>, i: usize, j: usize, style: Option<Style>, out: &mut Vec<Lexeme>) -> usize {
        let source: String = self.tokens[i..j].iter().map(Token::to_source).collect();
        let base = entry.unicode.clone();
        let styleable = matches!(entry.role, Role::Atom) && base.chars().count() == 1 && base.chars().all(char::is_alphanumeric);
        let (text, variant) = if styleable {
            let s = match style {
                Some(Style::Map(s)) => s,
                Some(Style::Word) => MathStyle::Upright,
                None => entry.variant,
            };
            styled(&base, s)
        } else {
            (base, None)
        };
        let term = term_for(&entry, &text);
        let tree = self.token_tree(entry, source, text, variant, i, j);
        out.push(self.lexeme(term, tree, i, j));
        j
    }

    fn lex_cs(&mut self, i: usize, end: usize, style: Option<Style>, out: &mut Vec<Lexeme>) -> Lexed<usize> {
        let name = self.tokens[i].text.clone();
        let n = name.as_str();
        if SPACING.contains(&n) {
            return Ok(i + 1);
        }
        if SKIP_WITH_ARG.contains(&n) {
            let (_, next) = self.read_arg(i + 1, end, None)?;
            return Ok(next);
        }
        if n == "\\" || n == "cr" || n == "newline" {
            out.push(self.separator(i));
            return Ok(i + 1);
        }
        if n == "begin" || n == "end" {
            let (_, next) = self.read_raw_group(i + 1, end)?;
            return Ok(next);
        }
        if let Some(s) = style_command(n) {
            let k = self.skip_spaces(i + 1, end);
            if k < end && self.tokens[k].is(Catcode::BeginGroup) {
                let close = self.matching_close(k, end)?;
                let inner = self.lex(k + 1, close, Some(s))?;
                out.extend(inner);
                return Ok((close + 1).min(end));
            }
            let mut tmp = Vec::new();
            let next = if k < end { self.lex_one(k, k + 1, Some(s), &mut tmp)? } else { k };
            out.extend(tmp);
            return Ok(next);
        }
        match n {
            "frac" => {
                let (num, a) = self.read_arg(i + 1, end, style)?;
                let (den, b) = self.read_arg(a, end, style)?;
                let tree = OperatorTree::new(NodeKind::Frac { num: Box::new(num), den: Box::new(den) }, (i as u32, b as u32));
                out.push(self.lexeme(Term::Atom, tree, i, b));
                Ok(b)
            }
            "binom" => {
                let (top, a) = self.read_arg(i + 1, end, style)?;
                let (bottom, b) = self.read_arg(a, end, style)?;
                let tree = OperatorTree::new(NodeKind::Binom { top: Box::new(top), bottom: Box::new(bottom) }, (i as u32, b as u32));
                out.push(self.lexeme(Term::Atom, tree, i, b));
                Ok(b)
            }
            "sqrt" => {
                let mut k = self.skip_spaces(i + 1, end);
                let mut index = None;
                if k < end && self.tokens[k].text == "[" && !self.tokens[k].is_cs("[") {
                    let close = self.matching_bracket(k, end);
                    index = Some(Box::new(self.parse_best(k + 1, close, style)?));
                    k = (close + 1).min(end);
                }
                let (radicand, b) = self.read_arg(k, end, style)?;
                let tree = OperatorTree::new(NodeKind::Radical { radicand: Box::new(radicand), index }, (i as u32, b as u32));
                out.push(self.lexeme(Term::Atom, tree, i, b));
                Ok(b)
            }
            _ if TEXT.contains(&n) => {
                let (text, next) = self.read_raw_group(i + 1, end)?;
                let entry = Arc::new(LexEntry { key: format!("\\{n}"), role: Role::Atom, unicode: text.clone(), variant: MathStyle::Upright, content: None });
                let tok = MathToken {
                    entry,
                    source: format!("\\{n}{{{text}}}"),
                    text,
                    variant: None,
                    class: TokenClass::Text,
                    locator: self.tokens[i].locator.clone(),
                    synthetic: false,
                };
                out.push(self.lexeme(Term::Atom, OperatorTree::new(NodeKind::Token(tok), (i as u32, next as u32)), i, next));
                Ok(next)
            }
            "operatorname" | "mathop" => {
                let mut k = i + 1;
                if k < end && self.tokens[k].text == "*" {
                    k += 1;
                }
                let (word, next) = self.read_raw_group(k, end)?;
                let word: String = word.split_whitespace().collect();
                let role = if n == "mathop" { Role::BigOperator } else { Role::Function };
                let entry = Arc::new(LexEntry { key: format!("\\{n}{{{word}}}"), role, unicode: word.clone(), variant: MathStyle::Upright, content: None });
                let (text, variant) = styled(&word, MathStyle::Upright);
                let source = format!("\\{n}{{{word}}}");
                let tree = self.token_tree(entry.clone(), source, text, variant, i, next);
                let term = if role == Role::Function { Term::Func } else { Term::BigOp };
                out.push(self.lexeme(term, tree, i, next));
                Ok(next)
            }
            "left" | "right" => self.lex_delimiter(i, end, if n == "left" { Term::Open } else { Term::Close }, out),
            _ if BIG_OPEN.contains(&n) => self.lex_delimiter(i, end, Term::Open, out),
            _ if BIG_CLOSE.contains(&n) => self.lex_delimiter(i, end, Term::Close, out),
            _ if BIG_MID.contains(&n) => self.lex_delimiter(i, end, Term::Rel, out),
            _ if BIG.contains(&n) => Ok(i + 1),
            "not" => self.lex_not(i, end, out),
            _ => {
                let entry = classify(&self.tokens[i], &self.config.lexicon);
                if entry.role == Role::Accent {
                    return self.lex_accent(entry, i, end, style, out);
                }
                Ok(self.push_entry(entry, i, i + 1, style, out))
            }
        }
    }

    /// Matching `]` for an optional argument, or `end`.
    fn matching_bracket(&self, open: usize, end: usize) -> usize {
        let mut depth = 0i32;
        for j in open + 1..end {
            let t = &self.tokens[j];
            if t.is(Catcode::BeginGroup) {
                depth += 1;
            } else if t.is(Catcode::EndGroup) {
                depth -= 1;
            } else if depth == 0 && t.text == "]" && !t.is_cs("]") {
                return j;
            }
        }
        end
    }

    /// A group read as plain text (spaces kept as single blanks).
    fn read_raw_group(&mut self, i: usize, end: usize) -> Lexed<(String, usize)> {
        let k = self.skip_spaces(i, end);
        if k >= end || !self.tokens[k].is(Catcode::BeginGroup) {
            let text = self.tokens.get(k).filter(|_| k < end).map(|t| t.text.clone()).unwrap_or_default();
            return Ok((text, (k + 1).min(end)));
        }
        let close = self.matching_close(k, end)?;
        let mut text = String::new();
        for t in &self.tokens[k + 1..close] {
            if t.is_space() {
                text.push(' ');
            } else if !t.is(Catcode::BeginGroup) && !t.is(Catcode::EndGroup) {
                text.push_str(&if matches!(t.kind, TokenKind::Character(_)) { t.text.clone() } else { t.to_source() });
            }
        }
        Ok((text, (close + 1).min(end)))
    }

    fn lex_delimiter(&mut self, i: usize, end: usize, term: Term, out: &mut Vec<Lexeme>) -> Lexed<usize> {
        let k = self.skip_spaces(i + 1, end);
        if k >= end {
            let loc = self.tokens[i].locator.clone();
            self.diagnostics.push(Diagnostic::warning("missing-delimiter", "expected a delimiter", Some(loc)));
            return Ok(k);
        }
        let d = &self.tokens[k];
        let (entry, text) = if d.text == "." && !d.is_cs(".") {
            let role = if term == Term::Open { Role::OpenDelimiter } else { Role::CloseDelimiter };
            (Arc::new(LexEntry { key: ".".into(), role, unicode: String::new(), variant: MathStyle::Upright, content: None }), String::new())
        } else {
            let e = classify(d, &self.config.lexicon);
            let t = e.unicode.clone();
            (e, t)
        };
        let source: String = self.tokens[i..=k].iter().map(Token::to_source).collect();
        let tree = self.token_tree(entry, source, text, None, i, k + 1);
        out.push(self.lexeme(term, tree, i, k + 1));
        Ok(k + 1)
    }

    fn lex_not(&mut self, i: usize, end: usize, out: &mut Vec<Lexeme>) -> Lexed<usize> {
        let k = self.skip_spaces(i + 1, end);
        if k >= end {
            return Ok(k);
        }
        let target = &self.tokens[k];
        let preset = match target.to_source().as_str() {
            "=" => Some("\\neq"),
            "\\in" => Some("\\notin"),
            _ => None,
        };
        let entry = match preset {
            Some(key) => classify(&Token::control_sequence(&key[1..], target.locator.clone()), &self.config.lexicon),
            None => {
                let base = classify(target, &self.config.lexicon);
                Arc::new(LexEntry {
                    key: format!("\\not{}", base.key),
                    role: Role::Relation,
                    unicode: format!("{}\u{0338}", base.unicode),
                    variant: MathStyle::Upright,
                    content: None,
                })
            }
        };
        let source: String = self.tokens[i..=k].iter().map(Token::to_source).collect();
        let text = entry.unicode.clone();
        let tree = self.token_tree(entry, source, text, None, i, k + 1);
        out.push(self.lexeme(Term::Rel, tree, i, k + 1));
        Ok(k + 1)
    }

    fn lex_accent(&mut self, accent: Arc<LexEntry>, i: usize, end: usize, style: Option<Style>, out: &mut Vec<Lexeme>) -> Lexed<usize> {
        let (arg, next) = self.read_arg(i + 1, end, style)?;
        let mark = accent.unicode.chars().next().unwrap_or('^');
        if let Some(t) = arg.token() {
            if t.class == TokenClass::Identifier && t.text.chars().count() == 1 {
                let mut tok = t.clone();
                tok.text.push(mark);
                tok.source = format!("\\{}{{{}}}", self.tokens[i].text, t.source);
                let term = term_for(&tok.entry, &t.text);
                let tree = OperatorTree::new(NodeKind::Token(tok), (i as u32, next as u32));
                out.push(self.lexeme(term, tree, i, next));
                return Ok(next);
            }
        }
        let spacing = spacing_accent(mark).to_string();
        let accent_tree = self.token_tree(accent.clone(), self.tokens[i].to_source(), spacing, None, i, i + 1);
        let tree = OperatorTree::new(NodeKind::Accent { base: Box::new(arg), accent: Box::new(accent_tree) }, (i as u32, next as u32));
        out.push(self.lexeme(Term::Atom, tree, i, next));
        Ok(next)
    }
}

pub(crate) fn empty_row(at: usize) -> OperatorTree {
    OperatorTree::new(NodeKind::Row { items: Vec::new(), separators: Vec::new(), unparsed: false }, (at as u32, at as u32))
}
