use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::profile::{InputKind, OutputFormat, Profile};
use super::VERSION;
use crate::diag::{Diagnostic, Severity};
use crate::math::{parse_math, MathConfig, OperatorTree};
use crate::mathml::{emit_content, emit_parallel, emit_presentation, wrap_html, HtmlOptions, XmlChild, XmlNode};
use crate::tex::{tokenize, Catcode, CatcodeTable, ExpansionLimits, Expander, InputResolver, Locator, Token};

pub type LogEntry = Diagnostic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    SuccessWithWarnings,
    Failed,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Success => "success",
            Status::SuccessWithWarnings => "success-with-warnings",
            Status::Failed => "failed",
        }
    }

    pub fn from_log(log: &[LogEntry]) -> Status {
        let worst = log.iter().map(|e| e.severity).max();
        match worst {
            Some(Severity::Fatal) => Status::Failed,
            Some(Severity::Warning | Severity::Error) => Status::SuccessWithWarnings,
            _ => Status::Success,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Tokenize,
    Expand,
    Parse,
    Emit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub phases: Vec<(Phase, Duration)>,
    pub total: Duration,
}

impl Timings {
    pub fn phase_sum(&self) -> Duration {
        self.phases.iter().map(|(_, d)| *d).sum()
    }

    pub fn get(&self, phase: Phase) -> Duration {
        self.phases.iter().filter(|(p, _)| *p == phase).map(|(_, d)| *d).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversionResult {
    pub status: Status,
    pub output: String,
    pub log: Vec<LogEntry>,
    pub version: String,
    pub timings: Timings,
}

const TEXT_COMMANDS: &[&str] = &[
    "section",
    "subsection",
    "subsubsection",
    "paragraph",
    "emph",
    "textit",
    "textbf",
    "texttt",
    "documentclass",
    "usepackage",
    "title",
    "author",
    "date",
    "label",
    "maketitle",
    "noindent",
    "centering",
    "(",
    ")",
    "[",
    "]",
];

const MATH_ENVIRONMENTS: &[&str] = &["equation", "equation*", "displaymath", "math", "align", "align*", "gather", "gather*"];

/// Convert `source` under `profile`. Never panics; every failure is a
/// fatal log entry on a `Failed` result.
pub fn convert(source: &str, profile: &Profile) -> ConversionResult {
    convert_document(source, "input", profile, None)
}

/// [`convert`] with a source name for locators and an `\input` resolver.
pub fn convert_document(source: &str, source_id: &str, profile: &Profile, resolver: Option<&dyn InputResolver>) -> ConversionResult {
    run(source, source_id, profile, resolver, None).expect("no cancellation flag")
}

/// [`convert_document`] that gives up with `None` once `cancel` is set.
/// The flag is checked between phases and between formulas.
pub fn convert_cancellable(
    source: &str,
    source_id: &str,
    profile: &Profile,
    resolver: Option<&dyn InputResolver>,
    cancel: &AtomicBool,
) -> Option<ConversionResult> {
    run(source, source_id, profile, resolver, Some(cancel))
}

/// Stack for conversion threads; parse trees of long rows nest deeply.
const CONVERSION_STACK: usize = 64 << 20;

fn run(source: &str, source_id: &str, profile: &Profile, resolver: Option<&dyn InputResolver>, cancel: Option<&AtomicBool>) -> Option<ConversionResult> {
    std::thread::scope(|scope| {
        let worker = std::thread::Builder::new()
            .name("texmath-convert".into())
            .stack_size(CONVERSION_STACK)
            .spawn_scoped(scope, || run_here(source, source_id, profile, resolver, cancel));
        match worker {
            Ok(handle) => handle.join().expect("conversion panics are caught"),
            Err(_) => run_here(source, source_id, profile, resolver, cancel),
        }
    })
}

fn run_here(source: &str, source_id: &str, profile: &Profile, resolver: Option<&dyn InputResolver>, cancel: Option<&AtomicBool>) -> Option<ConversionResult> {
    let start = Instant::now();
    let mut run = Run::new(profile, cancel);
    let outcome = catch_unwind(AssertUnwindSafe(|| run.convert(source, source_id, resolver)));
    if run.cancelled {
        return None;
    }
    let output = match outcome {
        Ok(Some(out)) => out,
        Ok(None) => String::new(),
        Err(_) => {
            run.log.push(Diagnostic::fatal("internal-error", "conversion aborted by an internal error", Some(Locator::document(source_id))));
            String::new()
        }
    };
    let status = Status::from_log(&run.log);
    let output = if status == Status::Failed { String::new() } else { output };
    let phases = vec![
        (Phase::Tokenize, run.tokenize),
        (Phase::Expand, run.expand),
        (Phase::Parse, run.parse),
        (Phase::Emit, run.emit),
    ];
    Some(ConversionResult { status, output, log: run.log, version: VERSION.to_string(), timings: Timings { phases, total: start.elapsed() } })
}

struct Run<'p> {
    profile: &'p Profile,
    cancel: Option<&'p AtomicBool>,
    cancelled: bool,
    config: MathConfig,
    log: Vec<LogEntry>,
    /// Formulas emitted so far; ids are prefixed once there is text around them.
    formulas: usize,
    tokenize: Duration,
    expand: Duration,
    parse: Duration,
    emit: Duration,
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    *slot += t.elapsed();
    out
}

fn tex_fatal(e: crate::tex::TexError, source_id: &str) -> Diagnostic {
    let loc = e.locator().cloned().unwrap_or_else(|| Locator::document(source_id));
    Diagnostic::fatal(e.category(), e.to_string(), Some(loc))
}

#[derive(Clone, Copy, PartialEq)]
enum Closer {
    Dollar,
    DoubleDollar,
    Paren,
    Bracket,
}

impl<'p> Run<'p> {
    fn new(profile: &'p Profile, cancel: Option<&'p AtomicBool>) -> Self {
        let config = MathConfig {
            mode: profile.grammar_mode,
            cap: profile.ambiguity_cap,
            strict: profile.strict,
            lexicon: profile.lexicon.clone(),
            ..MathConfig::default()
        };
        Run {
            profile,
            cancel,
            cancelled: false,
            config,
            log: Vec::new(),
            formulas: 0,
            tokenize: Duration::ZERO,
            expand: Duration::ZERO,
            parse: Duration::ZERO,
            emit: Duration::ZERO,
        }
    }

    /// True once the caller asked to stop; the run then unwinds with `None`.
    fn stop(&mut self) -> bool {
        self.cancelled = self.cancelled || self.cancel.is_some_and(|c| c.load(Ordering::Relaxed));
        self.cancelled
    }

    fn convert(&mut self, source: &str, source_id: &str, resolver: Option<&dyn InputResolver>) -> Option<String> {
        if self.stop() {
            return None;
        }
        let tokens = match timed(&mut self.tokenize, || tokenize(source, source_id, &CatcodeTable::plain())) {
            Ok(t) => t,
            Err(e) => {
                self.log.push(tex_fatal(e, source_id));
                return None;
            }
        };
        if self.stop() {
            return None;
        }
        let mut table = (*self.profile.macros).clone();
        if self.profile.input != InputKind::Formula {
            table = table.with_opaque(TEXT_COMMANDS.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        }
        let mut ex = Expander::new(table, ExpansionLimits::default()).strict(self.profile.strict_macros);
        if let Some(r) = resolver {
            ex = ex.with_resolver(r);
        }
        let expanded = timed(&mut self.expand, || ex.expand(tokens));
        self.log.append(&mut ex.take_warnings());
        let expanded = match expanded {
            Ok(t) => t,
            Err(e) => {
                self.log.push(tex_fatal(e, source_id));
                return None;
            }
        };
        if self.stop() {
            return None;
        }
        match self.profile.input {
            InputKind::Formula => {
                let math = self.formula(&expanded, false)?;
                let t = Instant::now();
                let out = match self.profile.format {
                    OutputFormat::Html5 => self.page(vec![math]),
                    _ => math.to_xml(),
                };
                self.emit += t.elapsed();
                Some(out)
            }
            InputKind::Fragment | InputKind::Document => {
                let body = if self.profile.input == InputKind::Document { document_body(&expanded) } else { &expanded[..] };
                let blocks = self.blocks(body)?;
                let t = Instant::now();
                let out = match self.profile.format {
                    OutputFormat::Html5 => self.page(blocks),
                    _ => XmlNode::new("div")
                        .with_attr("xmlns", "http://www.w3.org/1999/xhtml")
                        .with_attr("class", "texmath")
                        .with_children(blocks)
                        .to_xml(),
                };
                self.emit += t.elapsed();
                Some(out)
            }
        }
    }

    fn page(&self, body: Vec<XmlNode>) -> String {
        let options = HtmlOptions { title: self.profile.title.clone(), lang: None, generator: Some(format!("texmath {VERSION}")) };
        wrap_html(&body, &self.profile.resources, &options)
    }

    /// Parse and emit one formula; `None` after a fatal entry.
    fn formula(&mut self, tokens: &[Token], display: bool) -> Option<XmlNode> {
        if self.stop() {
            return None;
        }
        let parsed = timed(&mut self.parse, || parse_math(tokens, &self.config));
        let mut parsed = match parsed {
            Ok(p) => p,
            Err(d) => {
                self.log.push(d);
                return None;
            }
        };
        self.log.append(&mut parsed.diagnostics);
        let tree: &OperatorTree = &parsed.best().tree;
        let t = Instant::now();
        let mut math = match self.profile.format {
            OutputFormat::MathmlPresentation => emit_presentation(tree),
            OutputFormat::MathmlContent => emit_content(tree),
            OutputFormat::MathmlParallel | OutputFormat::Html5 => emit_parallel(tree),
        };
        if display {
            math.set_attr("display", "block");
        }
        self.formulas += 1;
        if self.profile.input != InputKind::Formula {
            math.prefix_ids(&format!("m{}.", self.formulas));
        }
        self.emit += t.elapsed();
        Some(math)
    }

    /// Paragraphs, headings and inline math for a text fragment.
    fn blocks(&mut self, tokens: &[Token]) -> Option<Vec<XmlNode>> {
        let mut blocks = Vec::new();
        let mut para = XmlNode::new("p");
        let mut i = 0;
        while i < tokens.len() {
            let tok = &tokens[i];
            let heading = match tok.cs_name() {
                Some("section") => Some("h2"),
                Some("subsection") => Some("h3"),
                Some("subsubsection" | "paragraph") => Some("h4"),
                _ => None,
            };
            if tok.is_cs("par") || heading.is_some() {
                flush(&mut blocks, &mut para);
                i += 1;
                if let Some(h) = heading {
                    let arg = group_arg(tokens, &mut i);
                    let mut el = XmlNode::new(h);
                    self.inline(arg, &mut el)?;
                    blocks.push(el);
                }
                continue;
            }
            let end = next_break(tokens, i);
            self.inline(&tokens[i..end], &mut para)?;
            i = end;
        }
        flush(&mut blocks, &mut para);
        Some(blocks)
    }

    fn inline(&mut self, tokens: &[Token], into: &mut XmlNode) -> Option<()> {
        let mut i = 0;
        while i < tokens.len() {
            let tok = &tokens[i];
            i += 1;
            if let Some(closer) = opener(tokens, &mut i, tok) {
                let (body, closed) = math_body(tokens, &mut i, closer);
                if !closed {
                    self.unclosed(tok, "math shift")?;
                }
                let math = self.formula(body, closer != Closer::Dollar && closer != Closer::Paren)?;
                into.push(math);
                continue;
            }
            match tok.cs_name() {
                Some("begin") => {
                    let name = arg_text(group_arg(tokens, &mut i));
                    if MATH_ENVIRONMENTS.contains(&name.as_str()) {
                        let (body, closed) = environment_body(tokens, &mut i, &name);
                        if !closed {
                            self.unclosed(tok, &format!("environment {name}"))?;
                        }
                        let math = self.formula(body, name != "math")?;
                        into.push(math);
                    }
                }
                Some("end") => {
                    group_arg(tokens, &mut i);
                }
                Some(name @ ("emph" | "textit" | "textbf" | "texttt")) => {
                    let tag = match name {
                        "textbf" => "strong",
                        "texttt" => "code",
                        _ => "em",
                    };
                    let arg = group_arg(tokens, &mut i);
                    let mut el = XmlNode::new(tag);
                    self.inline(arg, &mut el)?;
                    into.push(el);
                }
                Some("documentclass" | "usepackage" | "title" | "author" | "date" | "label") => {
                    skip_optional(tokens, &mut i);
                    group_arg(tokens, &mut i);
                }
                Some("\\" | "newline") => into.push(XmlNode::new("br")),
                Some(" ") => push_text(into, " "),
                Some(s) if s.len() == 1 && !s.chars().all(char::is_alphanumeric) => push_text(into, s),
                Some(_) => {}
                None => match tok.catcode() {
                    Some(Catcode::BeginGroup | Catcode::EndGroup) => {}
                    Some(Catcode::Space | Catcode::EndOfLine) => push_text(into, " "),
                    Some(Catcode::Active) if tok.text == "~" => push_text(into, "\u{a0}"),
                    Some(Catcode::MathShift) => {
                        self.log.push(Diagnostic::warning("stray-math-shift", "unmatched math shift in text", Some(tok.locator.clone())));
                    }
                    _ => push_text(into, &tok.text),
                },
            }
        }
        Some(())
    }

    fn unclosed(&mut self, open: &Token, what: &str) -> Option<()> {
        let msg = format!("{what} opened here is never closed");
        if self.profile.strict {
            self.log.push(Diagnostic::fatal("delimiter-imbalance", msg, Some(open.locator.clone())));
            return None;
        }
        self.log.push(Diagnostic::error("delimiter-imbalance", msg, Some(open.locator.clone())));
        Some(())
    }
}

fn flush(blocks: &mut Vec<XmlNode>, para: &mut XmlNode) {
    let p = std::mem::replace(para, XmlNode::new("p"));
    let blank = p.children.iter().all(|c| matches!(c, XmlChild::Text(t) if t.trim().is_empty()));
    if !blank {
        blocks.push(trim_text(p));
    }
}

fn trim_text(mut p: XmlNode) -> XmlNode {
    if let Some(XmlChild::Text(t)) = p.children.first_mut() {
        *t = t.trim_start().to_string();
    }
    if let Some(XmlChild::Text(t)) = p.children.last_mut() {
        *t = t.trim_end().to_string();
    }
    p.children.retain(|c| !matches!(c, XmlChild::Text(t) if t.is_empty()));
    p
}

fn push_text(into: &mut XmlNode, text: &str) {
    if let Some(XmlChild::Text(t)) = into.children.last_mut() {
        if text == " " && t.ends_with(' ') {
            return;
        }
        t.push_str(text);
    } else {
        into.children.push(XmlChild::Text(text.to_string()));
    }
}

/// Index of the next paragraph or heading break outside math and groups.
fn next_break(tokens: &[Token], from: usize) -> usize {
    let mut depth = 0usize;
    let mut in_math = false;
    for (k, t) in tokens.iter().enumerate().skip(from) {
        match t.catcode() {
            Some(Catcode::BeginGroup) => depth += 1,
            Some(Catcode::EndGroup) => depth = depth.saturating_sub(1),
            Some(Catcode::MathShift) => in_math = !in_math,
            _ => {}
        }
        if depth == 0 && !in_math && k > from && matches!(t.cs_name(), Some("par" | "section" | "subsection" | "subsubsection" | "paragraph")) {
            return k;
        }
    }
    tokens.len()
}

fn opener(tokens: &[Token], i: &mut usize, tok: &Token) -> Option<Closer> {
    if tok.is(Catcode::MathShift) {
        if tokens.get(*i).is_some_and(|t| t.is(Catcode::MathShift)) {
            *i += 1;
            return Some(Closer::DoubleDollar);
        }
        return Some(Closer::Dollar);
    }
    match tok.cs_name() {
        Some("(") => Some(Closer::Paren),
        Some("[") => Some(Closer::Bracket),
        _ => None,
    }
}

fn math_body<'t>(tokens: &'t [Token], i: &mut usize, closer: Closer) -> (&'t [Token], bool) {
    let start = *i;
    while *i < tokens.len() {
        let t = &tokens[*i];
        let hit = match closer {
            Closer::Dollar | Closer::DoubleDollar => t.is(Catcode::MathShift),
            Closer::Paren => t.is_cs(")"),
            Closer::Bracket => t.is_cs("]"),
        };
        if hit {
            let body = &tokens[start..*i];
            *i += 1;
            if closer == Closer::DoubleDollar && tokens.get(*i).is_some_and(|t| t.is(Catcode::MathShift)) {
                *i += 1;
            }
            return (body, true);
        }
        *i += 1;
    }
    (&tokens[start..], false)
}

fn environment_body<'t>(tokens: &'t [Token], i: &mut usize, name: &str) -> (&'t [Token], bool) {
    let start = *i;
    while *i < tokens.len() {
        if tokens[*i].is_cs("end") {
            let mut j = *i + 1;
            if arg_text(group_arg(tokens, &mut j)) == name {
                let body = &tokens[start..*i];
                *i = j;
                return (body, true);
            }
        }
        *i += 1;
    }
    (&tokens[start..], false)
}

fn skip_spaces(tokens: &[Token], i: &mut usize) {
    while tokens.get(*i).is_some_and(|t| t.is_space() || t.is(Catcode::EndOfLine)) {
        *i += 1;
    }
}

/// The contents of a braced group at `i` (or the single next token).
fn group_arg<'t>(tokens: &'t [Token], i: &mut usize) -> &'t [Token] {
    skip_spaces(tokens, i);
    let Some(first) = tokens.get(*i) else { return &[] };
    if !first.is(Catcode::BeginGroup) {
        *i += 1;
        return &tokens[*i - 1..*i];
    }
    let start = *i + 1;
    let mut depth = 0usize;
    while *i < tokens.len() {
        match tokens[*i].catcode() {
            Some(Catcode::BeginGroup) => depth += 1,
            Some(Catcode::EndGroup) => {
                depth -= 1;
                if depth == 0 {
                    *i += 1;
                    return &tokens[start..*i - 1];
                }
            }
            _ => {}
        }
        *i += 1;
    }
    &tokens[start..]
}

fn skip_optional(tokens: &[Token], i: &mut usize) {
    skip_spaces(tokens, i);
    if tokens.get(*i).is_some_and(|t| t.is(Catcode::Other) && t.text == "[") {
        while *i < tokens.len() && !(tokens[*i].is(Catcode::Other) && tokens[*i].text == "]") {
            *i += 1;
        }
        *i += 1;
    }
}

fn arg_text(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.to_source()).collect::<String>().trim().to_string()
}

/// The tokens between `\begin{document}` and `\end{document}`, or all of
/// them when there is no document environment.
fn document_body(tokens: &[Token]) -> &[Token] {
    let find = |cmd: &str, from: usize| {
        (from..tokens.len()).find(|&k| {
            tokens[k].is_cs(cmd) && {
                let mut j = k + 1;
                arg_text(group_arg(tokens, &mut j)) == "document"
            }
        })
    };
    let Some(begin) = find("begin", 0) else { return tokens };
    let mut start = begin + 1;
    group_arg(tokens, &mut start);
    let end = find("end", start).unwrap_or(tokens.len());
    &tokens[start..end]
}
