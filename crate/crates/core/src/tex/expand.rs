use std::collections::VecDeque;
use std::sync::Arc;

use super::catcode::{Catcode, CatcodeTable};
use super::error::TexError;
use super::macros::{read_balanced, read_definition, read_group, skip_spaces, MacroDefinition, MacroTable, PatternPart, TokenSource};
use super::token::{Token, TokenKind};
use super::tokenizer::tokenize;
use crate::diag::Diagnostic;

/// Control sequences every expander passes through silently.
const PRIMITIVES: &[&str] = &["par", " ", "relax"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpansionLimits {
    pub max_depth: usize,
    pub max_tokens: usize,
}

impl Default for ExpansionLimits {
    fn default() -> Self {
        ExpansionLimits { max_depth: 256, max_tokens: 100_000 }
    }
}

/// Supplies the text of files named by `\input`/`\include`.
pub trait InputResolver: Send + Sync {
    fn resolve(&self, name: &str) -> Option<String>;
}

struct Pending {
    token: Token,
    depth: usize,
}

struct QueueSource<'a> {
    queue: &'a mut VecDeque<Pending>,
    /// depth of the last token handed out
    depth: usize,
}

impl TokenSource for QueueSource<'_> {
    fn next_token(&mut self) -> Option<Token> {
        self.queue.pop_front().map(|p| {
            self.depth = p.depth;
            p.token
        })
    }

    fn peek_token(&self) -> Option<&Token> {
        self.queue.front().map(|p| &p.token)
    }
}

/// One expansion run over a document's token stream.
///
/// Definitions encountered in the stream go into this expander's private
/// copy of the macro table.
pub struct Expander<'r> {
    table: MacroTable,
    limits: ExpansionLimits,
    strict: bool,
    resolver: Option<&'r dyn InputResolver>,
    warnings: Vec<Diagnostic>,
}

impl<'r> Expander<'r> {
    pub fn new(table: MacroTable, limits: ExpansionLimits) -> Self {
        Expander { table, limits, strict: false, resolver: None, warnings: Vec::new() }
    }

    /// Make unknown control sequences fatal.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn with_resolver(mut self, resolver: &'r dyn InputResolver) -> Self {
        self.resolver = Some(resolver);
        self
    }

    pub fn table(&self) -> &MacroTable {
        &self.table
    }

    pub fn take_warnings(&mut self) -> Vec<Diagnostic> {
        std::mem::take(&mut self.warnings)
    }

    pub fn expand(&mut self, tokens: Vec<Token>) -> Result<Vec<Token>, TexError> {
        let mut queue: VecDeque<Pending> = tokens.into_iter().map(|token| Pending { token, depth: 0 }).collect();
        let mut out = Vec::new();
        while let Some(Pending { token, depth }) = queue.pop_front() {
            let Some(name) = token.cs_name() else {
                out.push(token);
                self.check_count(&out, &queue)?;
                continue;
            };
            match name {
                "def" | "newcommand" | "renewcommand" | "providecommand" => {
                    let mut src = QueueSource { queue: &mut queue, depth };
                    let (def, mode) = read_definition(&token, &mut src)?;
                    self.table.define(def, mode, &token.locator)?;
                    continue;
                }
                "input" | "include" => {
                    self.include(&token, depth, &mut queue)?;
                    self.check_count(&out, &queue)?;
                    continue;
                }
                _ => {}
            }
            if let Some(def) = self.table.lookup(name).cloned() {
                if depth >= self.limits.max_depth {
                    return Err(TexError::ExpansionDepthExceeded {
                        name: name.to_string(),
                        limit: self.limits.max_depth,
                        locator: token.locator.clone(),
                    });
                }
                let args = read_arguments(&def, &token, &mut queue)?;
                let body = substitute(&def, args, &token);
                for t in body.into_iter().rev() {
                    queue.push_front(Pending { token: t, depth: depth + 1 });
                }
                self.check_count(&out, &queue).map_err(|_| TexError::TokenCountExceeded {
                    limit: self.limits.max_tokens,
                    locator: token.locator.clone(),
                })?;
            } else if self.table.is_opaque(name) || PRIMITIVES.contains(&name) {
                out.push(token);
            } else if self.strict {
                return Err(TexError::UnknownControlSequence { name: name.to_string(), locator: token.locator });
            } else {
                self.warnings.push(Diagnostic::warning(
                    "unknown-control-sequence",
                    format!("undefined control sequence \\{name} passed through"),
                    Some(token.locator.clone()),
                ));
                out.push(token);
            }
        }
        Ok(out)
    }

    fn check_count(&self, out: &[Token], queue: &VecDeque<Pending>) -> Result<(), TexError> {
        if out.len() + queue.len() > self.limits.max_tokens {
            let locator = out
                .last()
                .or_else(|| queue.front().map(|p| &p.token))
                .map(|t| t.locator.clone())
                .expect("nonempty when over limit");
            return Err(TexError::TokenCountExceeded { limit: self.limits.max_tokens, locator });
        }
        Ok(())
    }

    fn include(&mut self, cmd: &Token, depth: usize, queue: &mut VecDeque<Pending>) -> Result<(), TexError> {
        let mut src = QueueSource { queue, depth };
        let name: String = read_group(&mut src, &cmd.locator)?.iter().map(|t| t.to_source()).collect();
        let name = name.trim().to_string();
        if depth >= self.limits.max_depth {
            return Err(TexError::ExpansionDepthExceeded {
                name: cmd.text.clone(),
                limit: self.limits.max_depth,
                locator: cmd.locator.clone(),
            });
        }
        let text = self.resolver.and_then(|r| {
            r.resolve(&name).or_else(|| if name.ends_with(".tex") { None } else { r.resolve(&format!("{name}.tex")) })
        });
        match text {
            Some(text) => {
                let tokens = tokenize(&text, &name, &CatcodeTable::plain())?;
                for t in tokens.into_iter().rev() {
                    queue.push_front(Pending { token: t, depth: depth + 1 });
                }
            }
            None => self.warnings.push(Diagnostic::warning(
                "missing-input",
                format!("cannot resolve \\{}{{{name}}}", cmd.text),
                Some(cmd.locator.clone()),
            )),
        }
        Ok(())
    }
}

/// Expand with the default limits and no file resolver.
pub fn expand(tokens: Vec<Token>, table: &MacroTable, limits: ExpansionLimits) -> Result<(Vec<Token>, Vec<Diagnostic>), TexError> {
    let mut ex = Expander::new(table.clone(), limits);
    let out = ex.expand(tokens)?;
    Ok((out, ex.take_warnings()))
}

fn read_arguments(def: &MacroDefinition, call: &Token, queue: &mut VecDeque<Pending>) -> Result<Vec<Vec<Token>>, TexError> {
    let mismatch = |reason: &str| TexError::ArgumentMismatch {
        name: def.name.clone(),
        reason: reason.to_string(),
        locator: call.locator.clone(),
    };
    let mut src = QueueSource { queue, depth: 0 };
    let mut args = vec![Vec::new(); def.arity as usize];
    let mut i = 0;
    while i < def.pattern.len() {
        match &def.pattern[i] {
            PatternPart::Literal(expected) => {
                match src.next_token() {
                    Some(t) if t.same_meaning(expected) => {}
                    _ => return Err(mismatch(&format!("expected `{}`", expected.to_source()))),
                }
                i += 1;
            }
            PatternPart::Param(n) => {
                let delims: Vec<&Token> = def.pattern[i + 1..]
                    .iter()
                    .map_while(|p| match p {
                        PatternPart::Literal(t) => Some(t),
                        PatternPart::Param(_) => None,
                    })
                    .collect();
                let arg = if delims.is_empty() {
                    read_undelimited(&mut src).ok_or_else(|| mismatch("missing argument"))?
                } else {
                    read_delimited(&mut src, &delims).ok_or_else(|| mismatch("delimiter not found"))?
                };
                args[*n as usize - 1] = arg;
                i += 1 + delims.len();
            }
        }
    }
    Ok(args)
}

fn read_undelimited(src: &mut QueueSource<'_>) -> Option<Vec<Token>> {
    skip_spaces(src);
    let t = src.next_token()?;
    if t.is(Catcode::BeginGroup) {
        read_balanced(src, &t.locator).ok()
    } else if t.is(Catcode::EndGroup) {
        None
    } else {
        Some(vec![t])
    }
}

fn read_delimited(src: &mut QueueSource<'_>, delims: &[&Token]) -> Option<Vec<Token>> {
    let mut buf: Vec<Token> = Vec::new();
    let mut depth = 0usize;
    loop {
        let t = src.next_token()?;
        if t.is(Catcode::BeginGroup) {
            depth += 1;
        } else if t.is(Catcode::EndGroup) {
            depth = depth.checked_sub(1)?;
        }
        buf.push(t);
        if depth == 0 && buf.len() >= delims.len() {
            let tail = &buf[buf.len() - delims.len()..];
            if tail.iter().zip(delims).all(|(a, b)| a.same_meaning(b)) {
                buf.truncate(buf.len() - delims.len());
                return Some(strip_outer_group(buf));
            }
        }
    }
}

fn strip_outer_group(arg: Vec<Token>) -> Vec<Token> {
    let wrapped = arg.len() >= 2 && arg[0].is(Catcode::BeginGroup) && arg[arg.len() - 1].is(Catcode::EndGroup) && {
        let mut depth = 0usize;
        arg.iter().enumerate().all(|(i, t)| {
            if t.is(Catcode::BeginGroup) {
                depth += 1;
            } else if t.is(Catcode::EndGroup) {
                depth -= 1;
            }
            depth > 0 || i == arg.len() - 1
        })
    };
    if wrapped {
        arg[1..arg.len() - 1].to_vec()
    } else {
        arg
    }
}

/// Body tokens take the call-site locator; argument tokens keep their own.
fn substitute(def: &MacroDefinition, args: Vec<Vec<Token>>, call: &Token) -> Vec<Token> {
    let origin: Arc<str> = Arc::from(def.name.as_str());
    let mut out = Vec::with_capacity(def.body.len());
    for t in &def.body {
        match t.kind {
            TokenKind::Parameter(n) => out.extend(args[n as usize - 1].iter().cloned()),
            _ => {
                let mut t = t.clone();
                t.locator = call.locator.clone();
                t.expanded_from = Some(origin.clone());
                out.push(t);
            }
        }
    }
    out
}
