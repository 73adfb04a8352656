use crate::earley::ParseTree;

use super::grammar::MathGrammar;
use super::lexer::Lexeme;
use super::tree::{Form, Head, InvisibleOp, NodeKind, OperatorTree, TokenClass};

/// Partial results while folding a parse tree.
enum Built {
    Tree(OperatorTree),
    Scripts { sub: Option<OperatorTree>, sup: Option<OperatorTree> },
    List { items: Vec<OperatorTree>, seps: Vec<OperatorTree> },
    Chain { operands: Vec<OperatorTree>, relations: Vec<OperatorTree> },
}

const ASSOCIATIVE: &[&str] = &["plus", "times", "and", "or", "union", "intersect", "compose"];

pub(crate) struct TreeBuilder<'a> {
    pub grammar: &'a MathGrammar,
    pub lexemes: &'a [Lexeme],
}

impl TreeBuilder<'_> {
    pub fn build(&self, tree: &ParseTree) -> OperatorTree {
        self.tree(tree)
    }

    fn span_of(&self, tree: &ParseTree) -> (u32, u32) {
        let (s, e) = tree.span();
        let (s, e) = (s as usize, e as usize);
        if s < e {
            (self.lexemes[s].span.0, self.lexemes[e - 1].span.1)
        } else {
            let at = self.lexemes.get(s).map_or_else(|| self.lexemes.last().map_or(0, |l| l.span.1), |l| l.span.0);
            (at, at)
        }
    }

    fn placeholder(&self, at: (u32, u32)) -> OperatorTree {
        OperatorTree::new(NodeKind::Row { items: Vec::new(), separators: Vec::new(), unparsed: true }, (at.1, at.1))
    }

    fn finish(&self, b: Built, span: (u32, u32)) -> OperatorTree {
        match b {
            Built::Tree(t) => t,
            Built::List { items, seps } => OperatorTree::new(NodeKind::Row { items, separators: seps, unparsed: false }, span),
            Built::Chain { operands, relations } => OperatorTree::new(NodeKind::Chain { operands, relations }, span),
            Built::Scripts { sub, sup } => {
                // scripts with no base only arise in recovery
                let base = self.placeholder((span.0, span.0));
                OperatorTree::new(NodeKind::Script { base: Box::new(base), sub: sub.map(Box::new), sup: sup.map(Box::new) }, span)
            }
        }
    }

    fn tree(&self, t: &ParseTree) -> OperatorTree {
        let b = self.fold(t);
        self.finish(b, self.span_of(t))
    }

    fn fold(&self, t: &ParseTree) -> Built {
        let (rule, children) = match t {
            ParseTree::Leaf { position, .. } => return Built::Tree(self.lexemes[*position as usize].tree.clone()),
            ParseTree::Node { rule, children, .. } => (*rule, children),
        };
        let span = self.span_of(t);
        let tag = self.grammar.tag(rule);
        let lhs = self.grammar.grammar.nonterminal_name(self.grammar.grammar.rule(rule).lhs);
        let node = |kind| Built::Tree(OperatorTree::new(kind, span));
        match (tag, children.as_slice()) {
            ("pass" | "token", [c]) => self.fold(c),
            ("empty", []) => node(NodeKind::Row { items: Vec::new(), separators: Vec::new(), unparsed: false }),
            ("list", [l, sep, r]) => {
                let (mut items, mut seps) = self.list_parts(l);
                seps.push(self.tree(sep));
                items.push(self.tree(r));
                Built::List { items, seps }
            }
            ("rel", [l, rel, r]) => {
                let (mut operands, mut relations) = self.chain_parts(l);
                relations.push(self.tree(rel));
                operands.push(self.tree(r));
                Built::Chain { operands, relations }
            }
            ("infix", [l, op, r]) => Built::Tree(infix(self.tree(l), self.tree(op), self.tree(r), span)),
            ("prefix", [op, x]) => node(apply(self.tree(op), vec![self.tree(x)], Form::Prefix)),
            ("postfix", [x, op]) => node(apply(self.tree(op), vec![self.tree(x)], Form::Postfix)),
            ("juxt", [l, r]) => Built::Tree(juxtapose(self.tree(l), self.tree(r), span)),
            ("apply-fenced" | "apply-bare" | "apply-wide" | "bigop" | "bigop-wide", [h, a]) => {
                let form = match tag {
                    "apply-fenced" => Form::FunctionFenced,
                    "apply-bare" => Form::FunctionBare,
                    "apply-wide" => Form::FunctionWide,
                    "bigop" => Form::BigOp,
                    _ => Form::BigOpWide,
                };
                let mut kind = apply(self.tree(h), vec![self.tree(a)], form);
                if form.is_function() {
                    if let NodeKind::Apply { ops, .. } = &mut kind {
                        ops.push(Head::Implicit(InvisibleOp::ApplyFunction));
                    }
                }
                node(kind)
            }
            ("script", [base, scripts]) => {
                let base = self.tree(base);
                match self.fold(scripts) {
                    Built::Scripts { sub, sup } => node(NodeKind::Script {
                        base: Box::new(base),
                        sub: sub.map(|s| Box::new(separate_indices(s))),
                        sup: sup.map(Box::new),
                    }),
                    other => Built::Tree(self.finish(other, span)),
                }
            }
            ("sub", [s]) => Built::Scripts { sub: Some(self.tree(s)), sup: None },
            ("sup", [s]) => Built::Scripts { sub: None, sup: Some(self.tree(s)) },
            ("subsup", [a, b]) => Built::Scripts { sub: Some(self.tree(a)), sup: Some(self.tree(b)) },
            ("supsub", [a, b]) => Built::Scripts { sub: Some(self.tree(b)), sup: Some(self.tree(a)) },
            ("fenced", [open, close]) => node(NodeKind::Fenced {
                open: Some(Box::new(self.tree(open))),
                items: Vec::new(),
                separators: Vec::new(),
                close: Some(Box::new(self.tree(close))),
                recovered: false,
            }),
            ("fenced", [open, body, close]) => {
                let (items, separators) = self.list_parts(body);
                node(NodeKind::Fenced {
                    open: Some(Box::new(self.tree(open))),
                    items,
                    separators,
                    close: Some(Box::new(self.tree(close))),
                    recovered: false,
                })
            }
            ("unclosed", [open, rest @ ..]) => {
                let (items, separators) = rest.first().map_or((Vec::new(), Vec::new()), |b| self.list_parts(b));
                node(NodeKind::Fenced { open: Some(Box::new(self.tree(open))), items, separators, close: None, recovered: true })
            }
            ("stray", [close]) => node(NodeKind::Fenced {
                open: None,
                items: Vec::new(),
                separators: Vec::new(),
                close: Some(Box::new(self.tree(close))),
                recovered: true,
            }),
            ("missing-base", [scripts]) => {
                let base = self.placeholder((span.0, span.0));
                match self.fold(scripts) {
                    Built::Scripts { sub, sup } => {
                        node(NodeKind::Script { base: Box::new(base), sub: sub.map(Box::new), sup: sup.map(Box::new) })
                    }
                    other => other,
                }
            }
            (t, kids) if t.starts_with("missing-") => self.missing(lhs, t, kids, span),
            _ => unreachable!("rule tag {tag:?} with {} children", children.len()),
        }
    }

    fn missing(&self, lhs: &str, tag: &str, kids: &[ParseTree], span: (u32, u32)) -> Built {
        let ph = self.placeholder(span);
        match (lhs, tag, kids) {
            ("Rel", "missing-left", [rel, r]) => Built::Chain { operands: vec![ph, self.tree(r)], relations: vec![self.tree(rel)] },
            ("Rel", "missing-right", [l, rel]) => {
                let (mut operands, mut relations) = self.chain_parts(l);
                relations.push(self.tree(rel));
                operands.push(ph);
                Built::Chain { operands, relations }
            }
            ("Rel", "missing-both", [rel]) => {
                Built::Chain { operands: vec![ph.clone(), self.placeholder(span)], relations: vec![self.tree(rel)] }
            }
            ("List", "missing-right", [l, sep]) => {
                let (mut items, mut seps) = self.list_parts(l);
                seps.push(self.tree(sep));
                items.push(ph);
                Built::List { items, seps }
            }
            ("List", "missing-left", [sep, r]) => Built::List { items: vec![ph, self.tree(r)], seps: vec![self.tree(sep)] },
            (_, "missing-right", [l, op]) => Built::Tree(infix(self.tree(l), self.tree(op), ph, span)),
            (_, "missing-left", [op, r]) => Built::Tree(infix(ph, self.tree(op), self.tree(r), span)),
            (_, "missing-operand", [op]) => Built::Tree(OperatorTree::new(apply(self.tree(op), vec![ph], Form::Prefix), span)),
            _ => unreachable!("recovery rule {lhs} {tag}"),
        }
    }

    fn list_parts(&self, t: &ParseTree) -> (Vec<OperatorTree>, Vec<OperatorTree>) {
        match self.fold(t) {
            Built::List { items, seps } => (items, seps),
            other => (vec![self.finish(other, self.span_of(t))], Vec::new()),
        }
    }

    fn chain_parts(&self, t: &ParseTree) -> (Vec<OperatorTree>, Vec<OperatorTree>) {
        match self.fold(t) {
            Built::Chain { operands, relations } => (operands, relations),
            other => (vec![self.finish(other, self.span_of(t))], Vec::new()),
        }
    }
}

fn apply(head: OperatorTree, args: Vec<OperatorTree>, form: Form) -> NodeKind {
    NodeKind::Apply { head: Head::Node(Box::new(head)), args, form, ops: Vec::new() }
}

fn infix(left: OperatorTree, op: OperatorTree, right: OperatorTree, span: (u32, u32)) -> OperatorTree {
    let op_key = op.token().map(|t| (t.entry.key.clone(), t.entry.content.clone()));
    let flatten = match (&left.kind, &op_key) {
        (NodeKind::Apply { head, form: Form::Infix, .. }, Some((key, content))) => {
            head.token().is_some_and(|h| &h.entry.key == key) && content.as_deref().is_some_and(|c| ASSOCIATIVE.contains(&c))
        }
        _ => false,
    };
    match left.kind {
        NodeKind::Apply { head, mut args, form, mut ops } if flatten => {
            args.push(right);
            ops.push(Head::Node(Box::new(op)));
            OperatorTree::new(NodeKind::Apply { head, args, form, ops }, span)
        }
        kind => OperatorTree::new(apply(op, vec![OperatorTree { kind, ..left }, right], Form::Infix), span),
    }
}

fn juxtapose(left: OperatorTree, right: OperatorTree, span: (u32, u32)) -> OperatorTree {
    if let NodeKind::Apply { head: Head::Implicit(InvisibleOp::InvisibleTimes), args, form: Form::Juxtaposition, ops } = left.kind {
        let mut args = args;
        let mut ops = ops;
        args.push(right);
        ops.push(Head::Implicit(InvisibleOp::InvisibleTimes));
        return OperatorTree::new(
            NodeKind::Apply { head: Head::Implicit(InvisibleOp::InvisibleTimes), args, form: Form::Juxtaposition, ops },
            span,
        );
    }
    let kind = NodeKind::Apply { head: Head::Implicit(InvisibleOp::InvisibleTimes), args: vec![left, right], form: Form::Juxtaposition, ops: Vec::new() };
    OperatorTree::new(kind, span)
}

/// `a_{ij}`: a product of single letters in a subscript is an index list.
fn separate_indices(sub: OperatorTree) -> OperatorTree {
    let OperatorTree { id, span, kind } = sub;
    match kind {
        NodeKind::Apply { head: Head::Implicit(InvisibleOp::InvisibleTimes), args, form: Form::Juxtaposition, ops }
            if args.iter().all(|a| a.token().is_some_and(|t| t.class == TokenClass::Identifier && t.text.chars().count() == 1)) =>
        {
            let ops = ops.into_iter().map(|_| Head::Implicit(InvisibleOp::InvisibleSeparator)).collect();
            OperatorTree {
                id,
                span,
                kind: NodeKind::Apply { head: Head::Implicit(InvisibleOp::InvisibleSeparator), args, form: Form::Juxtaposition, ops },
            }
        }
        kind => OperatorTree { id, span, kind },
    }
}
