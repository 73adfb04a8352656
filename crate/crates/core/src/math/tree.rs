use std::fmt::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::lexicon::{LexEntry, MathStyle, PrecClass, Role};
use crate::tex::Locator;

/// The three invisible operators that make implicit notation explicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvisibleOp {
    ApplyFunction,
    InvisibleTimes,
    InvisibleSeparator,
}

impl InvisibleOp {
    pub fn codepoint(self) -> char {
        match self {
            InvisibleOp::ApplyFunction => '\u{2061}',
            InvisibleOp::InvisibleTimes => '\u{2062}',
            InvisibleOp::InvisibleSeparator => '\u{2063}',
        }
    }

    pub fn content_name(self) -> &'static str {
        match self {
            InvisibleOp::ApplyFunction => "apply",
            InvisibleOp::InvisibleTimes => "times",
            InvisibleOp::InvisibleSeparator => "list",
        }
    }
}

/// How a token is rendered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenClass {
    Identifier,
    Number,
    Operator,
    Text,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MathToken {
    pub entry: Arc<LexEntry>,
    /// Source spelling, e.g. `\alpha` or `42`.
    pub source: String,
    /// Rendered text after style mapping.
    pub text: String,
    /// Style that could not be folded into a codepoint.
    pub variant: Option<MathStyle>,
    pub class: TokenClass,
    pub locator: Locator,
    /// Inserted by the parser rather than read from the source.
    pub synthetic: bool,
}

impl MathToken {
    pub fn invisible(op: InvisibleOp, locator: Locator) -> Self {
        let text = op.codepoint().to_string();
        let (role, content) = match op {
            InvisibleOp::ApplyFunction => (Role::Infix(PrecClass::Composition), None),
            InvisibleOp::InvisibleTimes => (Role::Infix(PrecClass::Juxtaposition), Some("times".to_string())),
            InvisibleOp::InvisibleSeparator => (Role::Separator, Some("list".to_string())),
        };
        let entry = LexEntry { key: text.clone(), role, unicode: text.clone(), variant: MathStyle::Upright, content };
        MathToken {
            entry: Arc::new(entry),
            source: String::new(),
            text,
            variant: None,
            class: TokenClass::Operator,
            locator: Locator { approximate: true, ..locator },
            synthetic: true,
        }
    }

    pub fn role(&self) -> Role {
        self.entry.role
    }

    /// Label used in compact tree dumps: the content symbol if known,
    /// otherwise the rendered text.
    pub fn label(&self) -> String {
        match (&self.entry.content, self.class) {
            (Some(c), TokenClass::Operator) => c.clone(),
            _ => self.plain_text(),
        }
    }

    /// Rendered text with the default italic mapping undone.
    pub fn plain_text(&self) -> String {
        if self.class == TokenClass::Identifier && self.variant.is_none() {
            let mut out = String::new();
            for c in self.text.chars() {
                match crate::lexicon::decode_styled(c) {
                    Some((base, MathStyle::Italic)) => out.push(base),
                    _ => out.push(c),
                }
            }
            if out != self.text && self.entry.variant == MathStyle::Italic {
                return out;
            }
        }
        self.text.clone()
    }
}

/// The head of an application. `Implicit` marks an invisible operator
/// that has not been materialised as a token yet.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Head {
    Node(Box<OperatorTree>),
    Implicit(InvisibleOp),
}

impl Head {
    pub fn node(&self) -> Option<&OperatorTree> {
        match self {
            Head::Node(n) => Some(n),
            Head::Implicit(_) => None,
        }
    }

    /// The token that carries the head's meaning, looking through scripts.
    pub fn token(&self) -> Option<&MathToken> {
        self.node().and_then(OperatorTree::head_token)
    }
}

/// Which notation an application came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    Infix,
    Prefix,
    Postfix,
    /// Implicit multiplication (or separation) between juxtaposed factors.
    Juxtaposition,
    /// `f(x)`: head applied to a fenced argument.
    FunctionFenced,
    /// `\sin x`: argument without fences, at most a product.
    FunctionBare,
    /// `\sin x + y` read as `sin(x + y)`.
    FunctionWide,
    BigOp,
    BigOpWide,
}

impl Form {
    pub fn is_function(self) -> bool {
        matches!(self, Form::FunctionFenced | Form::FunctionBare | Form::FunctionWide)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NodeKind {
    Token(MathToken),
    /// `ops` holds the operator occurrences beyond the head: repeated
    /// infix operators in an n-ary application, or the invisible
    /// apply-function operator for function applications.
    Apply { head: Head, args: Vec<OperatorTree>, form: Form, ops: Vec<Head> },
    /// A chain `a R b S c` of relations.
    Chain { operands: Vec<OperatorTree>, relations: Vec<OperatorTree> },
    Row { items: Vec<OperatorTree>, separators: Vec<OperatorTree>, unparsed: bool },
    Fenced {
        open: Option<Box<OperatorTree>>,
        items: Vec<OperatorTree>,
        separators: Vec<OperatorTree>,
        close: Option<Box<OperatorTree>>,
        recovered: bool,
    },
    Script { base: Box<OperatorTree>, sub: Option<Box<OperatorTree>>, sup: Option<Box<OperatorTree>> },
    Frac { num: Box<OperatorTree>, den: Box<OperatorTree> },
    Binom { top: Box<OperatorTree>, bottom: Box<OperatorTree> },
    Radical { radicand: Box<OperatorTree>, index: Option<Box<OperatorTree>> },
    Accent { base: Box<OperatorTree>, accent: Box<OperatorTree> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorTree {
    pub id: u32,
    /// Half-open range of expanded-token indices this node covers.
    pub span: (u32, u32),
    #[serde(flatten)]
    pub kind: NodeKind,
}

impl OperatorTree {
    pub fn new(kind: NodeKind, span: (u32, u32)) -> Self {
        OperatorTree { id: 0, span, kind }
    }

    pub fn token(&self) -> Option<&MathToken> {
        match &self.kind {
            NodeKind::Token(t) => Some(t),
            _ => None,
        }
    }

    /// The token giving this node its meaning as an operator head.
    pub fn head_token(&self) -> Option<&MathToken> {
        match &self.kind {
            NodeKind::Token(t) => Some(t),
            NodeKind::Script { base, .. } => base.head_token(),
            _ => None,
        }
    }

    pub fn is_empty_row(&self) -> bool {
        matches!(&self.kind, NodeKind::Row { items, .. } if items.is_empty())
    }

    /// Direct children in presentation order, heads and operators included.
    pub fn children(&self) -> Vec<&OperatorTree> {
        let mut out = Vec::new();
        match &self.kind {
            NodeKind::Token(_) => {}
            NodeKind::Apply { head, args, ops, .. } => {
                if let Head::Node(h) = head {
                    out.push(&**h);
                }
                for o in ops {
                    if let Head::Node(n) = o {
                        out.push(&**n);
                    }
                }
                out.extend(args.iter());
            }
            NodeKind::Chain { operands, relations } => {
                out.extend(operands.iter());
                out.extend(relations.iter());
            }
            NodeKind::Row { items, separators, .. } => {
                out.extend(items.iter());
                out.extend(separators.iter());
            }
            NodeKind::Fenced { open, items, separators, close, .. } => {
                out.extend(open.as_deref());
                out.extend(items.iter());
                out.extend(separators.iter());
                out.extend(close.as_deref());
            }
            NodeKind::Script { base, sub, sup } => {
                out.push(base);
                out.extend(sub.as_deref());
                out.extend(sup.as_deref());
            }
            NodeKind::Frac { num, den } => out.extend([&**num, &**den]),
            NodeKind::Binom { top, bottom } => out.extend([&**top, &**bottom]),
            NodeKind::Radical { radicand, index } => {
                out.push(radicand);
                out.extend(index.as_deref());
            }
            NodeKind::Accent { base, accent } => out.extend([&**base, &**accent]),
        }
        out
    }

    fn children_mut(&mut self) -> Vec<&mut OperatorTree> {
        let mut out: Vec<&mut OperatorTree> = Vec::new();
        match &mut self.kind {
            NodeKind::Token(_) => {}
            NodeKind::Apply { head, args, ops, .. } => {
                if let Head::Node(h) = head {
                    out.push(&mut **h);
                }
                for o in ops.iter_mut() {
                    if let Head::Node(n) = o {
                        out.push(&mut **n);
                    }
                }
                out.extend(args.iter_mut());
            }
            NodeKind::Chain { operands, relations } => {
                out.extend(operands.iter_mut());
                out.extend(relations.iter_mut());
            }
            NodeKind::Row { items, separators, .. } => {
                out.extend(items.iter_mut());
                out.extend(separators.iter_mut());
            }
            NodeKind::Fenced { open, items, separators, close, .. } => {
                out.extend(open.as_deref_mut());
                out.extend(items.iter_mut());
                out.extend(separators.iter_mut());
                out.extend(close.as_deref_mut());
            }
            NodeKind::Script { base, sub, sup } => {
                out.push(&mut **base);
                out.extend(sub.as_deref_mut());
                out.extend(sup.as_deref_mut());
            }
            NodeKind::Frac { num, den } => out.extend([&mut **num, &mut **den]),
            NodeKind::Binom { top, bottom } => out.extend([&mut **top, &mut **bottom]),
            NodeKind::Radical { radicand, index } => {
                out.push(&mut **radicand);
                out.extend(index.as_deref_mut());
            }
            NodeKind::Accent { base, accent } => out.extend([&mut **base, &mut **accent]),
        }
        out
    }

    /// Assign preorder ids starting at 1.
    pub fn renumber(&mut self) {
        let mut next = 1u32;
        let mut stack: Vec<&mut OperatorTree> = vec![self];
        while let Some(node) = stack.pop() {
            node.id = next;
            next += 1;
            let mut kids = node.children_mut();
            kids.reverse();
            stack.extend(kids);
        }
    }

    pub fn node_count(&self) -> usize {
        let mut count = 0;
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            count += 1;
            stack.extend(n.children());
        }
        count
    }

    /// Preorder walk over every node.
    pub fn walk(&self, f: &mut dyn FnMut(&OperatorTree)) {
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            f(n);
            let mut kids = n.children();
            kids.reverse();
            stack.extend(kids);
        }
    }

    /// Compact one-line dump, e.g. `plus(a,itimes(b,c))`.
    pub fn sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(&mut out);
        out
    }

    fn write_sexpr(&self, out: &mut String) {
        let list = |out: &mut String, name: &str, items: &[&OperatorTree]| {
            out.push_str(name);
            out.push('(');
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                it.write_sexpr(out);
            }
            out.push(')');
        };
        match &self.kind {
            NodeKind::Token(t) => out.push_str(&t.label()),
            NodeKind::Apply { head, args, form, .. } => {
                let args: Vec<&OperatorTree> = args.iter().collect();
                if form.is_function() || matches!(form, Form::BigOp | Form::BigOpWide) {
                    let mut all = vec![head.node().expect("function head")];
                    all.extend(args);
                    list(out, "apply", &all);
                } else {
                    let name = match head {
                        Head::Implicit(InvisibleOp::InvisibleTimes) => "itimes".to_string(),
                        Head::Implicit(InvisibleOp::InvisibleSeparator) => "isep".to_string(),
                        Head::Implicit(InvisibleOp::ApplyFunction) => "apply".to_string(),
                        Head::Node(n) => match n.token() {
                            Some(t) if t.synthetic && t.text == "\u{2062}" => "itimes".to_string(),
                            Some(t) if t.synthetic && t.text == "\u{2063}" => "isep".to_string(),
                            Some(t) => t.label(),
                            None => n.sexpr(),
                        },
                    };
                    list(out, &name, &args);
                }
            }
            NodeKind::Chain { operands, relations } => {
                let first = relations[0].sexpr();
                if relations.iter().all(|r| r.sexpr() == first) {
                    list(out, &first, &operands.iter().collect::<Vec<_>>());
                } else {
                    out.push_str("chain(");
                    for (i, o) in operands.iter().enumerate() {
                        if i > 0 {
                            let _ = write!(out, ",{},", relations[i - 1].sexpr());
                        }
                        o.write_sexpr(out);
                    }
                    out.push(')');
                }
            }
            NodeKind::Row { items, unparsed, .. } => {
                list(out, if *unparsed { "unparsed" } else { "row" }, &items.iter().collect::<Vec<_>>())
            }
            NodeKind::Fenced { open, items, separators, close, .. } => {
                if let Some(o) = open {
                    out.push_str(&o.token().map(|t| t.text.clone()).unwrap_or_default());
                }
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(&separators.get(i - 1).and_then(|s| s.token()).map_or(",".into(), |t| t.text.clone()));
                    }
                    it.write_sexpr(out);
                }
                if let Some(c) = close {
                    out.push_str(&c.token().map(|t| t.text.clone()).unwrap_or_default());
                }
            }
            NodeKind::Script { base, sub, sup } => match (sub, sup) {
                (Some(b), Some(p)) => list(out, "subsup", &[base, b, p]),
                (Some(b), None) => list(out, "sub", &[base, b]),
                (None, Some(p)) => list(out, "sup", &[base, p]),
                (None, None) => base.write_sexpr(out),
            },
            NodeKind::Frac { num, den } => list(out, "frac", &[num, den]),
            NodeKind::Binom { top, bottom } => list(out, "binom", &[top, bottom]),
            NodeKind::Radical { radicand, index: None } => list(out, "sqrt", &[radicand]),
            NodeKind::Radical { radicand, index: Some(i) } => list(out, "root", &[radicand, i]),
            NodeKind::Accent { base, accent } => list(out, "accent", &[base, accent]),
        }
    }
}

/// Replace every implicit head or operator with an explicit invisible
/// operator token. Running it twice changes nothing.
pub fn insert_invisibles(mut tree: OperatorTree) -> OperatorTree {
    let doc = first_source(&tree).map_or_else(|| Locator::document("formula"), Locator::document);
    let mut stack: Vec<&mut OperatorTree> = vec![&mut tree];
    while let Some(node) = stack.pop() {
        let at = (node.span.0, node.span.0);
        if let NodeKind::Apply { head, ops, .. } = &mut node.kind {
            for h in std::iter::once(head).chain(ops.iter_mut()) {
                if let Head::Implicit(op) = *h {
                    let tok = MathToken::invisible(op, doc.clone());
                    *h = Head::Node(Box::new(OperatorTree::new(NodeKind::Token(tok), at)));
                }
            }
        }
        stack.extend(node.children_mut());
    }
    tree.renumber();
    tree
}

fn first_source(tree: &OperatorTree) -> Option<Arc<str>> {
    let mut found = None;
    tree.walk(&mut |n| {
        if let (None, Some(t)) = (&found, n.token()) {
            if !t.synthetic {
                found = Some(t.locator.source.clone());
            }
        }
    });
    found
}
