use std::collections::BTreeMap;
use std::sync::OnceLock;

use thiserror::Error;

use super::tree::{Form, NodeKind, OperatorTree, TokenClass};
use crate::lexicon::{PrecClass, Role};

pub const TAGS: [&str; 12] = [
    "unknown-meaning-head",
    "function-as-factor",
    "atom-applied",
    "wide-argument",
    "function-in-argument",
    "function-scope",
    "bigop-scope",
    "bare-fenced-argument",
    "relation-under-operator",
    "precedence-violation",
    "unbalanced-fence",
    "incomplete-expression",
];

const DEFAULT_TABLE: &str = include_str!("../../data/scoring.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoringError {
    #[error("scoring line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Penalty weight per heuristic tag.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoringTable {
    weights: BTreeMap<String, f64>,
}

impl ScoringTable {
    pub fn builtin() -> &'static ScoringTable {
        static CELL: OnceLock<ScoringTable> = OnceLock::new();
        CELL.get_or_init(|| {
            let zeros = TAGS.iter().map(|t| (t.to_string(), 0.0)).collect();
            ScoringTable::parse_over(zeros, DEFAULT_TABLE).expect("shipped scoring table parses")
        })
    }

    /// Parse `tag weight` lines. Tags missing from the text keep their
    /// builtin weight; unknown tags are rejected.
    pub fn parse(text: &str) -> Result<ScoringTable, ScoringError> {
        Self::parse_over(Self::builtin().weights.clone(), text)
    }

    fn parse_over(mut weights: BTreeMap<String, f64>, text: &str) -> Result<ScoringTable, ScoringError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split(['#', '%']).next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| ScoringError::Parse { line, message };
            let mut parts = body.split_whitespace();
            let (Some(tag), Some(w), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err("expected `tag weight`".into()));
            };
            if !TAGS.contains(&tag) {
                return Err(err(format!("unknown tag {tag:?}")));
            }
            let w: f64 = w.parse().map_err(|_| err(format!("bad weight {w:?}")))?;
            if !w.is_finite() || w < 0.0 {
                return Err(err(format!("weight must be finite and non-negative, got {w}")));
            }
            weights.insert(tag.to_string(), w);
        }
        Ok(ScoringTable { weights })
    }

    pub fn weight(&self, tag: &str) -> f64 {
        self.weights.get(tag).copied().unwrap_or(0.0)
    }

    pub fn scaled(&self, factor: f64) -> ScoringTable {
        ScoringTable { weights: self.weights.iter().map(|(k, v)| (k.clone(), v * factor)).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Heuristic tags found in a tree, in preorder.
pub fn penalty_tags(tree: &OperatorTree) -> Vec<&'static str> {
    let mut tags = Vec::new();
    visit(tree, false, &mut tags);
    tags
}

/// Score of a reading: minus the summed weights of its tags.
pub fn score_reading(tree: &OperatorTree, table: &ScoringTable) -> f64 {
    -penalty_tags(tree).iter().map(|t| table.weight(t)).sum::<f64>()
}

/// Binding level of a node for precedence checks; `None` for atoms.
fn level(tree: &OperatorTree) -> Option<u8> {
    match &tree.kind {
        NodeKind::Chain { .. } => Some(0),
        NodeKind::Apply { form: Form::Juxtaposition, .. } => Some(class_level(PrecClass::Juxtaposition)),
        NodeKind::Apply { form: Form::Infix, head, .. } => match head.token().map(|t| t.role()) {
            Some(Role::Infix(c)) => Some(class_level(c)),
            Some(Role::Relation) => Some(0),
            _ => None,
        },
        _ => None,
    }
}

fn class_level(c: PrecClass) -> u8 {
    PrecClass::ALL.iter().position(|x| *x == c).expect("listed") as u8 + 1
}

fn is_function_apply(t: &OperatorTree, forms: &[Form]) -> bool {
    matches!(&t.kind, NodeKind::Apply { form, .. } if forms.contains(form))
}

fn visit(node: &OperatorTree, is_head: bool, tags: &mut Vec<&'static str>) {
    match &node.kind {
        NodeKind::Token(t) => {
            if !is_head && matches!(t.role(), Role::Function | Role::BigOperator) && !t.synthetic {
                tags.push("function-as-factor");
            }
        }
        NodeKind::Apply { head, args, form, ops } => {
            if let Some(t) = head.token() {
                if t.class == TokenClass::Operator && !t.synthetic && t.entry.unknown_meaning() {
                    tags.push("unknown-meaning-head");
                }
                if *form == Form::FunctionFenced && t.role() != Role::Function {
                    tags.push("atom-applied");
                }
            }
            match form {
                Form::FunctionWide | Form::BigOpWide => tags.push("wide-argument"),
                Form::FunctionBare => {
                    if let Some(a) = args.first() {
                        if matches!(a.kind, NodeKind::Fenced { .. }) {
                            tags.push("bare-fenced-argument");
                        }
                        if let NodeKind::Apply { form: Form::Juxtaposition, args: factors, .. } = &a.kind {
                            if factors.iter().any(|f| is_function_apply(f, &[Form::FunctionBare])) {
                                tags.push("function-in-argument");
                            }
                        }
                    }
                }
                Form::Juxtaposition => {
                    for a in &args[..args.len().saturating_sub(1)] {
                        if is_function_apply(a, &[Form::FunctionBare]) {
                            tags.push("function-scope");
                        }
                        if is_function_apply(a, &[Form::BigOp]) {
                            tags.push("bigop-scope");
                        }
                    }
                }
                _ => {}
            }
            if matches!(form, Form::Infix | Form::Juxtaposition | Form::Prefix | Form::Postfix) {
                let own = level(node);
                for a in args {
                    match (level(a), own) {
                        (Some(0), _) => tags.push("relation-under-operator"),
                        (Some(l), Some(p)) if l < p && *form != Form::Prefix => tags.push("precedence-violation"),
                        _ => {}
                    }
                }
            }
            let head_is_head = form.is_function() || matches!(form, Form::BigOp | Form::BigOpWide);
            if let Some(h) = head.node() {
                visit(h, head_is_head, tags);
            }
            for o in ops.iter().filter_map(|o| o.node()) {
                visit(o, true, tags);
            }
            for a in args {
                visit(a, false, tags);
            }
            return;
        }
        NodeKind::Fenced { recovered: true, .. } => tags.push("unbalanced-fence"),
        NodeKind::Row { items, unparsed: true, .. } if items.is_empty() => tags.push("incomplete-expression"),
        NodeKind::Script { base, sub, sup } => {
            visit(base, is_head, tags);
            for s in [sub, sup].into_iter().flatten() {
                visit(s, false, tags);
            }
            return;
        }
        _ => {}
    }
    for c in node.children() {
        visit(c, false, tags);
    }
}
