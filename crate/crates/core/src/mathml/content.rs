use std::collections::{HashMap, HashSet};

use super::xml::XmlNode;
use crate::lexicon::Role;
use crate::math::{Form, Head, MathToken, NodeKind, OperatorTree, TokenClass};

/// Content dictionary for escapes whose meaning is not known.
pub const UNKNOWN_CD: &str = "unknown";
/// Content dictionary for notation that is known to be ambiguous.
pub const AMBIGUOUS_CD: &str = "ambiguous";
/// Content dictionary for lexicon meanings without a MathML element.
pub const PRIVATE_CD: &str = "texmath";

/// Lexicon meanings that have a MathML content element of the same name.
const ELEMENTS: &[&str] = &[
    "and", "approx", "arccos", "arcsin", "arctan", "arg", "compose", "cos", "cosh", "cot", "coth", "csc", "determinant",
    "divide", "emptyset", "eq", "equivalent", "exists", "exp", "factorial", "forall", "gcd", "geq", "gt", "implies", "in",
    "infinity", "int", "intersect", "leq", "limit", "ln", "log", "lt", "max", "min", "minus", "neq", "not", "notin", "or",
    "plus", "power", "product", "prsubset", "rem", "root", "sec", "setdiff", "sin", "sinh", "subset", "sum", "tan", "tanh",
    "tendsto", "times", "union", "abs", "floor", "ceiling", "pi", "exponentiale", "imaginaryi",
];

pub fn is_content_element(name: &str) -> bool {
    ELEMENTS.contains(&name)
}

pub(crate) struct Contentifier<'a> {
    next: u32,
    /// tree node id → presentation id, when emitting parallel markup
    xrefs: Option<&'a HashMap<u32, String>>,
    used: HashSet<String>,
}

impl<'a> Contentifier<'a> {
    pub fn new(xrefs: Option<&'a HashMap<u32, String>>) -> Self {
        Contentifier { next: 0, xrefs, used: HashSet::new() }
    }

    /// A fresh element with the next content id; linked to `node` when
    /// emitting parallel markup and that presentation id is still free.
    fn element(&mut self, name: &str, node: Option<&OperatorTree>) -> XmlNode {
        self.next += 1;
        let mut el = XmlNode::new(name).with_attr("id", format!("c{}", self.next));
        if let (Some(map), Some(n)) = (self.xrefs, node) {
            if let Some(p) = map.get(&n.id) {
                if self.used.insert(p.clone()) {
                    el.set_attr("xref", p.clone());
                }
            }
        }
        el
    }

    fn csymbol(&mut self, cd: &str, name: &str, node: Option<&OperatorTree>) -> XmlNode {
        self.element("csymbol", node).with_attr("cd", cd).with_text(name)
    }

    fn apply(&mut self, node: Option<&OperatorTree>) -> XmlNode {
        self.element("apply", node)
    }

    /// The meaning of a token used as an operator or symbol.
    fn symbol(&mut self, node: &OperatorTree, t: &MathToken) -> XmlNode {
        match t.entry.content.as_deref() {
            Some(name) if is_content_element(name) => self.element(name, Some(node)),
            Some(name) => self.csymbol(PRIVATE_CD, name, Some(node)),
            None => match t.class {
                TokenClass::Identifier => self.element("ci", Some(node)).with_text(t.plain_text()),
                TokenClass::Number => self.element("cn", Some(node)).with_text(t.text.clone()),
                TokenClass::Text => self.element("cs", Some(node)).with_text(t.text.clone()),
                TokenClass::Operator if t.role() == Role::Atom && t.text.chars().all(char::is_alphabetic) => {
                    self.element("ci", Some(node)).with_text(t.text.clone())
                }
                TokenClass::Operator => self.csymbol(UNKNOWN_CD, &t.text, Some(node)),
            },
        }
    }

    fn head(&mut self, head: &Head) -> XmlNode {
        match head {
            Head::Node(n) => self.node(n),
            Head::Implicit(op) => {
                let name = op.content_name();
                if is_content_element(name) {
                    self.element(name, None)
                } else {
                    self.csymbol(PRIVATE_CD, name, None)
                }
            }
        }
    }

    pub fn node(&mut self, tree: &OperatorTree) -> XmlNode {
        match &tree.kind {
            NodeKind::Token(t) => self.symbol(tree, t),
            NodeKind::Apply { head, args, form, .. } => {
                if matches!(form, Form::BigOp | Form::BigOpWide) {
                    return self.big_operator(tree, head, args);
                }
                if head_meaning(head) == Some("list") {
                    let mut list = self.element("list", Some(tree));
                    if let Head::Node(h) = head {
                        // the separator itself has no content counterpart
                        self.reserve(h);
                    }
                    for a in args {
                        list.push(self.node(a));
                    }
                    return list;
                }
                let mut app = self.apply(Some(tree));
                app.push(self.head(head));
                for a in args {
                    match argument_tuple(*form, a) {
                        Some((fences, items)) => {
                            for f in fences {
                                self.reserve(f);
                            }
                            for it in items {
                                app.push(self.node(it));
                            }
                        }
                        None => app.push(self.node(a)),
                    }
                }
                app
            }
            NodeKind::Chain { operands, relations } => self.chain(tree, operands, relations),
            NodeKind::Row { items, unparsed: true, .. } => {
                let mut err = self.element("cerror", Some(tree));
                err.push(self.csymbol("moreerrors", "unparsed", None));
                for it in items {
                    err.push(self.node(it));
                }
                err
            }
            NodeKind::Row { items, .. } if items.len() == 1 => self.node(&items[0]),
            NodeKind::Row { items, .. } => {
                let mut list = self.element("list", Some(tree));
                for it in items {
                    list.push(self.node(it));
                }
                list
            }
            NodeKind::Fenced { open, items, close, .. } => self.fenced(tree, open.as_deref(), items, close.as_deref()),
            NodeKind::Script { base, sub, sup } => self.script(tree, base, sub.as_deref(), sup.as_deref()),
            NodeKind::Frac { num, den } => {
                let app = self.apply(Some(tree));
                let op = self.element("divide", None);
                let n = self.node(num);
                let d = self.node(den);
                app.with_child(op).with_child(n).with_child(d)
            }
            NodeKind::Binom { top, bottom } => {
                let app = self.apply(Some(tree));
                let op = self.csymbol("combinat1", "binomial", None);
                let t = self.node(top);
                let b = self.node(bottom);
                app.with_child(op).with_child(t).with_child(b)
            }
            NodeKind::Radical { radicand, index } => {
                let mut app = self.apply(Some(tree));
                app.push(self.element("root", None));
                if let Some(i) = index {
                    let deg = self.element("degree", None);
                    let i = self.node(i);
                    app.push(deg.with_child(i));
                }
                app.push(self.node(radicand));
                app
            }
            NodeKind::Accent { base, accent } => {
                let mut app = self.apply(Some(tree));
                let op = match accent.token() {
                    Some(t) => match t.entry.content.as_deref() {
                        Some(_) => self.symbol(accent, t),
                        None => self.csymbol(UNKNOWN_CD, &t.text, Some(accent)),
                    },
                    None => self.node(accent),
                };
                app.push(op);
                app.push(self.node(base));
                app
            }
        }
    }

    /// Mark the presentation of `node` as accounted for without emitting
    /// a content element for it.
    fn reserve(&mut self, node: &OperatorTree) {
        if let Some(p) = self.xrefs.and_then(|m| m.get(&node.id)) {
            self.used.insert(p.clone());
        }
    }

    fn chain(&mut self, tree: &OperatorTree, operands: &[OperatorTree], relations: &[OperatorTree]) -> XmlNode {
        let label = |r: &OperatorTree| r.token().map(|t| (t.entry.content.clone(), t.text.clone()));
        let uniform = relations.iter().all(|r| label(r) == label(&relations[0]));
        if uniform {
            let mut app = self.apply(Some(tree));
            app.push(self.node(&relations[0]));
            for r in &relations[1..] {
                self.reserve(r);
            }
            for o in operands {
                app.push(self.node(o));
            }
            return app;
        }
        let mut and = self.apply(Some(tree));
        and.push(self.element("and", None));
        let mut previous: Option<String> = None;
        for (i, rel) in relations.iter().enumerate() {
            let mut part = self.apply(None);
            part.push(self.node(rel));
            match previous.take() {
                Some(id) => part.push(self.element("share", None).with_attr("href", format!("#{id}"))),
                None => part.push(self.node(&operands[i])),
            }
            let right = self.node(&operands[i + 1]);
            previous = right.attr("id").map(String::from);
            part.push(right);
            and.push(part);
        }
        and
    }

    fn fenced(&mut self, tree: &OperatorTree, open: Option<&OperatorTree>, items: &[OperatorTree], close: Option<&OperatorTree>) -> XmlNode {
        let text = |n: Option<&OperatorTree>| n.and_then(|n| n.token()).map(|t| t.text.clone()).unwrap_or_default();
        let (o, c) = (text(open), text(close));
        let single = items.len() == 1;
        let element = match (o.as_str(), c.as_str()) {
            ("(" | "[", _) if single => {
                for n in [open, close].into_iter().flatten() {
                    self.reserve(n);
                }
                return self.node(&items[0]);
            }
            ("|", "|" | "") if single => Some("abs"),
            ("\u{230A}", "\u{230B}" | "") if single => Some("floor"),
            ("\u{2308}", "\u{2309}" | "") if single => Some("ceiling"),
            ("{", _) => Some("set"),
            _ => None,
        };
        match element {
            Some("set") => {
                let mut set = self.element("set", Some(tree));
                for n in [open, close].into_iter().flatten() {
                    self.reserve(n);
                }
                if let [item] = items {
                    if let Some((var, cond)) = set_builder(item) {
                        let bvar = self.element("bvar", None);
                        let v = self.node(var);
                        set.push(bvar.with_child(v));
                        let condition = self.element("condition", None);
                        let c = self.node(&cond);
                        set.push(condition.with_child(c));
                        if let NodeKind::Chain { relations, .. } = &item.kind {
                            self.reserve(&relations[0]);
                        }
                        return set;
                    }
                }
                for it in items {
                    set.push(self.node(it));
                }
                set
            }
            Some(name) => {
                let mut app = self.apply(Some(tree));
                app.push(match open {
                    Some(o) => self.element(name, Some(o)),
                    None => self.element(name, None),
                });
                if let Some(c) = close {
                    self.reserve(c);
                }
                app.push(self.node(&items[0]));
                app
            }
            None => {
                let mut app = self.apply(Some(tree));
                let name = format!("{o}{c}");
                app.push(self.csymbol(UNKNOWN_CD, &name, open));
                if let Some(c) = close {
                    self.reserve(c);
                }
                for it in items {
                    app.push(self.node(it));
                }
                app
            }
        }
    }

    fn script(&mut self, tree: &OperatorTree, base: &OperatorTree, sub: Option<&OperatorTree>, sup: Option<&OperatorTree>) -> XmlNode {
        let mut inner = None;
        if let Some(s) = sub {
            let app = self.apply(Some(tree));
            let op = self.csymbol(AMBIGUOUS_CD, "subscript", None);
            let b = self.node(base);
            let s = self.node(s);
            inner = Some(app.with_child(op).with_child(b).with_child(s));
        }
        let Some(p) = sup else {
            return inner.expect("script has a sub or sup");
        };
        let app = self.apply(Some(tree));
        let op = if is_prime(p) { self.csymbol(AMBIGUOUS_CD, "superscript", None) } else { self.element("power", None) };
        let b = match inner {
            Some(i) => i,
            None => self.node(base),
        };
        let s = self.node(p);
        app.with_child(op).with_child(b).with_child(s)
    }

    /// `\sum_{i=1}^n a_i` and friends, with scripts read as limits.
    fn big_operator(&mut self, tree: &OperatorTree, head: &Head, args: &[OperatorTree]) -> XmlNode {
        let mut app = self.apply(Some(tree));
        let Some(h) = head.node() else {
            app.push(self.head(head));
            for a in args {
                app.push(self.node(a));
            }
            return app;
        };
        let (base, sub, sup) = match &h.kind {
            NodeKind::Script { base, sub, sup } => (base.as_ref(), sub.as_deref(), sup.as_deref()),
            _ => (h, None, None),
        };
        app.push(self.node(base));
        let is_int = base.token().and_then(|t| t.entry.content.as_deref()) == Some("int");
        if let Some(s) = sub {
            match (lower_bound(s), is_int) {
                (Some((var, low)), false) => {
                    let bvar = self.element("bvar", None);
                    let v = self.node(var);
                    app.push(bvar.with_child(v));
                    if let NodeKind::Chain { relations, .. } = &s.kind {
                        self.reserve(&relations[0]);
                    }
                    let low_el = self.element("lowlimit", None);
                    let l = self.node(low);
                    app.push(low_el.with_child(l));
                }
                (_, true) => {
                    let low_el = self.element("lowlimit", None);
                    let l = self.node(s);
                    app.push(low_el.with_child(l));
                }
                (None, false) => {
                    let cond = self.element("condition", None);
                    let c = self.node(s);
                    app.push(cond.with_child(c));
                }
            }
        }
        if let Some(p) = sup {
            let up = self.element("uplimit", None);
            let u = self.node(p);
            app.push(up.with_child(u));
        }
        for a in args {
            app.push(self.node(a));
        }
        app
    }
}

fn head_meaning(head: &Head) -> Option<&str> {
    match head {
        Head::Implicit(op) => Some(op.content_name()),
        Head::Node(n) => n.token().and_then(|t| t.entry.content.as_deref()),
    }
}

/// A parenthesised comma list given to a function: its items are the
/// arguments, and the fences and commas have no content of their own.
fn argument_tuple(form: Form, arg: &OperatorTree) -> Option<(Vec<&OperatorTree>, &[OperatorTree])> {
    if form != Form::FunctionFenced {
        return None;
    }
    let NodeKind::Fenced { open: Some(open), items, separators, close, recovered: false } = &arg.kind else { return None };
    if items.len() < 2 || open.token().map(|t| t.text.as_str()) != Some("(") {
        return None;
    }
    let marks = std::iter::once(&**open).chain(close.as_deref()).chain(separators).collect();
    Some((marks, items))
}

fn is_prime(node: &OperatorTree) -> bool {
    let prime = |t: &MathToken| t.role() == Role::Postfix && t.text.chars().all(|c| matches!(c, '\u{2032}'..='\u{2034}'));
    match &node.kind {
        NodeKind::Token(t) => prime(t),
        NodeKind::Row { items, .. } => items.first().and_then(|i| i.token()).is_some_and(prime),
        _ => false,
    }
}

/// `i = 1` under a big operator: variable and lower bound.
fn lower_bound(sub: &OperatorTree) -> Option<(&OperatorTree, &OperatorTree)> {
    match &sub.kind {
        NodeKind::Chain { operands, relations } if operands.len() == 2 => {
            let eq = relations[0].token()?.entry.content.as_deref() == Some("eq");
            (eq && operands[0].token().is_some_and(|t| t.class == TokenClass::Identifier)).then(|| (&operands[0], &operands[1]))
        }
        _ => None,
    }
}

/// `x \mid P(x)` inside braces: the variable and the condition. A longer
/// chain after the bar becomes a chain of its own.
fn set_builder(item: &OperatorTree) -> Option<(&OperatorTree, OperatorTree)> {
    let NodeKind::Chain { operands, relations } = &item.kind else { return None };
    let t = relations[0].token()?;
    if !matches!(t.text.as_str(), "\u{2223}" | ":") {
        return None;
    }
    let cond = if operands.len() == 2 {
        operands[1].clone()
    } else {
        let span = (operands[1].span.0, item.span.1);
        let kind = NodeKind::Chain { operands: operands[1..].to_vec(), relations: relations[1..].to_vec() };
        // id 0 is never assigned, so the synthetic chain gets no xref
        OperatorTree::new(kind, span)
    };
    Some((&operands[0], cond))
}
