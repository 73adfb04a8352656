//! Math-specific grammar, reading construction and ranking.

mod build;
mod grammar;
mod lexer;
mod score;
mod tree;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::diag::Diagnostic;
use crate::earley;
use crate::lexicon::Lexicon;
use crate::tex::{tokenize, CatcodeTable, ExpansionLimits, Expander, MacroTable, Token};

pub use grammar::{MathGrammar, Term};
pub use score::{penalty_tags, score_reading, ScoringError, ScoringTable, TAGS as PENALTY_TAGS};
pub use tree::{insert_invisibles, Form, Head, InvisibleOp, MathToken, NodeKind, OperatorTree, TokenClass};

use build::TreeBuilder;
use lexer::{empty_row, Lexeme, Session, Style};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrammarMode {
    /// One reading: the best-ranked one.
    StrictHeuristic,
    /// All readings up to the cap, ranked.
    Ambiguous,
}

impl GrammarMode {
    pub fn name(self) -> &'static str {
        match self {
            GrammarMode::StrictHeuristic => "strict-heuristic",
            GrammarMode::Ambiguous => "ambiguous",
        }
    }
}

impl fmt::Display for GrammarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GrammarMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strict-heuristic" | "heuristic" | "strict" => Ok(GrammarMode::StrictHeuristic),
            "ambiguous" => Ok(GrammarMode::Ambiguous),
            _ => Err(format!("unknown grammar mode {s:?} (expected strict-heuristic or ambiguous)")),
        }
    }
}

pub const DEFAULT_CAP: usize = 64;

/// Longest lexeme row handed to the grammar; longer rows are emitted flat.
pub const MAX_PARSE_LEXEMES: usize = 2048;

/// Chart size at which the main grammar gives up on a row.
pub const MAIN_ITEM_BUDGET: usize = 600_000;

/// Chart items one formula may build over all of its rows.
pub const FORMULA_ITEM_BUDGET: usize = 3_000_000;

/// Chart size at which the error-recovery grammar gives up.
pub const RECOVERY_ITEM_BUDGET: usize = 250_000;

#[derive(Clone, Debug)]
pub struct MathConfig {
    pub mode: GrammarMode,
    /// Maximum number of readings enumerated per formula.
    pub cap: usize,
    /// Delimiter imbalance becomes fatal.
    pub strict: bool,
    pub scoring: Arc<ScoringTable>,
    /// Consulted before the builtin lexicon.
    pub lexicon: Arc<Lexicon>,
}

impl Default for MathConfig {
    fn default() -> Self {
        MathConfig {
            mode: GrammarMode::StrictHeuristic,
            cap: DEFAULT_CAP,
            strict: false,
            scoring: Arc::new(ScoringTable::builtin().clone()),
            lexicon: Arc::new(Lexicon::default()),
        }
    }
}

impl MathConfig {
    pub fn ambiguous() -> Self {
        MathConfig { mode: GrammarMode::Ambiguous, ..Self::default() }
    }
}

/// One scored interpretation of a formula.
#[derive(Clone, Debug, Serialize)]
pub struct Reading {
    pub tree: OperatorTree,
    pub score: f64,
    /// Heuristic tags that contributed to the score.
    pub provenance: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct MathParse {
    /// Sorted by score, best first; never empty.
    pub readings: Vec<Reading>,
    /// Number of readings in the forest (saturating).
    pub total: u128,
    /// More readings existed than the cap allowed.
    pub truncated: bool,
    /// Only the error-recovery grammar accepted the input.
    pub recovered: bool,
    /// No grammar accepted the input; the reading is a flat row.
    pub unparsed: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl MathParse {
    pub fn best(&self) -> &Reading {
        &self.readings[0]
    }
}

struct Ranked {
    trees: Vec<OperatorTree>,
    total: u128,
    truncated: bool,
    recovered: bool,
    unparsed: bool,
}

impl Session<'_> {
    /// Best reading of `tokens[start..end]`, used for nested material.
    fn parse_best(&mut self, start: usize, end: usize, style: Option<Style>) -> Result<OperatorTree, Diagnostic> {
        self.depth += 1;
        if self.depth > 200 {
            let loc = self.tokens.get(start).map(|t| t.locator.clone());
            return Err(Diagnostic::fatal("nesting-too-deep", "formula nesting exceeds 200 levels", loc));
        }
        let lexemes = self.lex(start, end, style)?;
        let ranked = self.rank(lexemes, 1)?;
        self.depth -= 1;
        Ok(ranked.trees.into_iter().next().unwrap_or_else(|| empty_row(start)))
    }

    fn check_fences(&mut self, lexemes: &[Lexeme]) -> Result<(), Diagnostic> {
        let mut open: Vec<usize> = Vec::new();
        for (i, l) in lexemes.iter().enumerate() {
            match l.term {
                Term::Open => open.push(i),
                Term::Close if open.pop().is_none() => {
                    let loc = lexemes[i].tree.token().map(|t| t.locator.clone()).unwrap_or_else(|| self.tokens[l.span.0 as usize].locator.clone());
                    self.imbalance("closing delimiter without an opening one", &loc)?;
                }
                _ => {}
            }
        }
        for i in open {
            let loc = self.tokens[lexemes[i].span.0 as usize].locator.clone();
            self.imbalance("opening delimiter is never closed", &loc)?;
        }
        Ok(())
    }

    /// Parse lexemes and return up to `limit` trees in rank order.
    fn rank(&mut self, lexemes: Vec<Lexeme>, limit: usize) -> Result<Ranked, Diagnostic> {
        self.check_fences(&lexemes)?;
        if lexemes.len() > MAX_PARSE_LEXEMES {
            let loc = lexemes.first().map(|l| self.tokens[l.span.0 as usize].locator.clone());
            let msg = format!("{} symbols in one row exceed the parser limit of {MAX_PARSE_LEXEMES}; emitting a flat row", lexemes.len());
            self.diagnostics.push(Diagnostic::warning("formula-too-long", msg, loc));
            return Ok(flat_row(lexemes));
        }
        let cap = self.config.cap.max(1);
        let main = MathGrammar::main();
        let input: Vec<u32> = lexemes.iter().map(|l| main.terminal(l.term)).collect();
        let budget = MAIN_ITEM_BUDGET.min(self.items_left);
        let chart = earley::recognize_within(&main.grammar, input.as_slice(), budget);
        self.items_left -= chart.as_ref().map_or(budget, |c| c.item_count().min(budget));
        let Some(chart) = chart else {
            let loc = lexemes.first().map(|l| self.tokens[l.span.0 as usize].locator.clone());
            if !self.diagnostics.iter().any(|d| d.category == "parse-budget-exceeded") {
                let msg = "formula is too ambiguous to parse within the chart budget; emitting flat rows";
                self.diagnostics.push(Diagnostic::warning("parse-budget-exceeded", msg, loc));
            }
            return Ok(flat_row(lexemes));
        };
        let mut forest = earley::build_forest(&main.grammar, &chart, input.as_slice());
        let mut grammar = main;
        let mut recovered = false;
        if !chart.accepted() {
            let rec = MathGrammar::recovery();
            let input: Vec<u32> = lexemes.iter().map(|l| rec.terminal(l.term)).collect();
            let budget = RECOVERY_ITEM_BUDGET.min(self.items_left);
            let chart = earley::recognize_within(&rec.grammar, input.as_slice(), budget);
            self.items_left -= chart.as_ref().map_or(budget, |c| c.item_count().min(budget));
            if let Some(chart) = chart.filter(|c| c.accepted()) {
                let f = earley::build_forest(&rec.grammar, &chart, input.as_slice());
                forest = f;
                grammar = rec;
                recovered = true;
                let loc = lexemes.first().map(|l| self.tokens[l.span.0 as usize].locator.clone());
                self.diagnostics.push(Diagnostic::warning("parse-recovery", "formula parsed with error recovery", loc));
            }
        }
        if forest.is_empty() {
            let loc = lexemes.first().map(|l| self.tokens[l.span.0 as usize].locator.clone());
            self.diagnostics.push(Diagnostic::warning("no-parse", "formula could not be parsed; emitting a flat row", loc));
            return Ok(flat_row(lexemes));
        }
        let en = forest.enumerate(cap);
        let builder = TreeBuilder { grammar, lexemes: &lexemes };
        let mut scored: Vec<(f64, usize, OperatorTree)> = en
            .trees
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let tree = builder.build(t);
                (score_reading(&tree, &self.config.scoring), i, tree)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let trees = scored.into_iter().take(limit).map(|(_, _, t)| t).collect();
        Ok(Ranked { trees, total: en.total, truncated: en.truncated, recovered, unparsed: false })
    }
}

fn flat_row(lexemes: Vec<Lexeme>) -> Ranked {
    let span = (lexemes.first().map_or(0, |l| l.span.0), lexemes.last().map_or(0, |l| l.span.1));
    let items = lexemes.into_iter().map(|l| l.tree).collect();
    let row = OperatorTree::new(NodeKind::Row { items, separators: Vec::new(), unparsed: true }, span);
    Ranked { trees: vec![row], total: 1, truncated: false, recovered: false, unparsed: true }
}

/// Parse an expanded math token sequence into ranked readings.
///
/// Never returns an empty reading list; the only error is a fatal
/// diagnostic (strict delimiter checking or runaway nesting).
pub fn parse_math(tokens: &[Token], config: &MathConfig) -> Result<MathParse, Diagnostic> {
    let mut session = Session::new(config, tokens);
    let lexemes = session.lex(0, tokens.len(), None)?;
    let limit = match config.mode {
        GrammarMode::StrictHeuristic => 1,
        GrammarMode::Ambiguous => config.cap.max(1),
    };
    let ranked = session.rank(lexemes, limit)?;
    if ranked.truncated {
        let loc = tokens.first().map(|t| t.locator.clone());
        session.diagnostics.push(Diagnostic::new(
            crate::diag::Severity::Info,
            "ambiguity-truncated",
            format!("{} readings exist; only {} were ranked", ranked.total, config.cap.max(1)),
            loc,
        ));
    }
    let readings = ranked
        .trees
        .into_iter()
        .map(|mut tree| {
            tree.renumber();
            let provenance = penalty_tags(&tree).into_iter().map(String::from).collect();
            let score = score_reading(&tree, &config.scoring);
            Reading { tree, score, provenance }
        })
        .collect();
    Ok(MathParse {
        readings,
        total: ranked.total,
        truncated: ranked.truncated,
        recovered: ranked.recovered,
        unparsed: ranked.unparsed,
        diagnostics: session.diagnostics,
    })
}

/// The texvc macro set with every command the math layer understands
/// marked expansion-opaque.
pub fn math_macros(lexicon: &Lexicon) -> MacroTable {
    static BASE: OnceLock<MacroTable> = OnceLock::new();
    let base = BASE.get_or_init(|| {
        let names: Vec<String> =
            lexer::structural_commands().map(String::from).chain(Lexicon::builtin().control_sequences().map(String::from)).collect();
        MacroTable::texvc().with_opaque(names)
    });
    if lexicon.is_empty() {
        base.clone()
    } else {
        base.clone().with_opaque(lexicon.control_sequences().map(String::from).collect::<Vec<_>>())
    }
}

/// Tokenize and expand `tex` with the texvc macro set, then parse it.
pub fn parse_formula(tex: &str, config: &MathConfig) -> Result<MathParse, Diagnostic> {
    let tokens = tokenize(tex, "formula", &CatcodeTable::plain())
        .map_err(|e| Diagnostic::fatal(e.category(), e.to_string(), e.locator().cloned()))?;
    let mut ex = Expander::new(math_macros(&config.lexicon), ExpansionLimits::default());
    let expanded = ex.expand(tokens).map_err(|e| Diagnostic::fatal(e.category(), e.to_string(), e.locator().cloned()))?;
    let mut parsed = parse_math(&expanded, config)?;
    let mut diags = ex.take_warnings();
    diags.append(&mut parsed.diagnostics);
    parsed.diagnostics = diags;
    Ok(parsed)
}
