use std::collections::HashMap;

use super::xml::XmlNode;
use crate::math::{Head, MathToken, NodeKind, OperatorTree, TokenClass};

/// Builds the presentation branch and remembers which element each tree
/// node became.
#[derive(Default)]
pub(crate) struct Presenter {
    next: u32,
    /// tree node id → presentation element id
    pub ids: HashMap<u32, String>,
}

impl Presenter {
    fn element(&mut self, name: &str, node: Option<&OperatorTree>) -> XmlNode {
        self.next += 1;
        let id = format!("p{}", self.next);
        if let Some(n) = node {
            self.ids.entry(n.id).or_insert_with(|| id.clone());
        }
        XmlNode::new(name).with_attr("id", id)
    }

    fn token(&mut self, node: &OperatorTree, t: &MathToken) -> XmlNode {
        let name = match t.class {
            TokenClass::Identifier => "mi",
            TokenClass::Number => "mn",
            TokenClass::Operator => "mo",
            TokenClass::Text => "mtext",
        };
        let mut el = self.element(name, Some(node));
        if let Some(style) = t.variant {
            el.set_attr("mathvariant", style.mathvariant());
        }
        el.with_text(t.text.clone())
    }

    fn synthetic_mo(&mut self, text: &str) -> XmlNode {
        self.element("mo", None).with_text(text)
    }

    fn head(&mut self, head: &Head) -> XmlNode {
        match head {
            Head::Node(n) => self.node(n),
            Head::Implicit(op) => self.synthetic_mo(&op.codepoint().to_string()),
        }
    }

    fn fence_mo(&mut self, node: &OperatorTree, attr: &str) -> XmlNode {
        let mut el = self.node(node);
        if el.name == "mo" {
            el.set_attr(attr, "true");
        }
        el
    }

    pub fn node(&mut self, tree: &OperatorTree) -> XmlNode {
        match &tree.kind {
            NodeKind::Token(t) => self.token(tree, t),
            NodeKind::Apply { head, args, form, ops } => {
                let mut row = self.element("mrow", Some(tree));
                use crate::math::Form::*;
                match form {
                    Prefix => {
                        row.push(self.head(head));
                        for a in args {
                            row.push(self.node(a));
                        }
                    }
                    Postfix => {
                        for a in args {
                            row.push(self.node(a));
                        }
                        row.push(self.head(head));
                    }
                    Infix | Juxtaposition => {
                        let mut operators = std::iter::once(head).chain(ops);
                        for (i, a) in args.iter().enumerate() {
                            if i > 0 {
                                if let Some(op) = operators.next() {
                                    row.push(self.head(op));
                                }
                            }
                            row.push(self.node(a));
                        }
                    }
                    FunctionFenced | FunctionBare | FunctionWide | BigOp | BigOpWide => {
                        row.push(self.head(head));
                        for op in ops {
                            row.push(self.head(op));
                        }
                        for a in args {
                            row.push(self.node(a));
                        }
                    }
                }
                row
            }
            NodeKind::Chain { operands, relations } => {
                let mut row = self.element("mrow", Some(tree));
                for (i, o) in operands.iter().enumerate() {
                    if i > 0 {
                        row.push(self.node(&relations[i - 1]));
                    }
                    row.push(self.node(o));
                }
                row
            }
            NodeKind::Row { items, separators, .. } => {
                let mut row = self.element("mrow", Some(tree));
                self.interleave(&mut row, items, separators);
                row
            }
            NodeKind::Fenced { open, items, separators, close, .. } => {
                let mut row = self.element("mrow", Some(tree));
                if let Some(o) = open {
                    row.push(self.fence_mo(o, "fence"));
                }
                self.interleave(&mut row, items, separators);
                if let Some(c) = close {
                    row.push(self.fence_mo(c, "fence"));
                }
                row
            }
            NodeKind::Script { base, sub, sup } => {
                let name = match (sub, sup) {
                    (Some(_), Some(_)) => "msubsup",
                    (Some(_), None) => "msub",
                    (None, Some(_)) => "msup",
                    (None, None) => "mrow",
                };
                let mut el = self.element(name, Some(tree));
                el.push(self.node(base));
                for s in [sub, sup].into_iter().flatten() {
                    el.push(self.node(s));
                }
                el
            }
            NodeKind::Frac { num, den } => {
                let el = self.element("mfrac", Some(tree));
                let n = self.node(num);
                let d = self.node(den);
                el.with_child(n).with_child(d)
            }
            NodeKind::Binom { top, bottom } => {
                let row = self.element("mrow", Some(tree));
                let open = self.synthetic_mo("(");
                let frac = self.element("mfrac", None).with_attr("linethickness", "0");
                let t = self.node(top);
                let b = self.node(bottom);
                let close = self.synthetic_mo(")");
                row.with_child(open).with_child(frac.with_child(t).with_child(b)).with_child(close)
            }
            NodeKind::Radical { radicand, index } => match index {
                None => {
                    let el = self.element("msqrt", Some(tree));
                    let r = self.node(radicand);
                    el.with_child(r)
                }
                Some(i) => {
                    let el = self.element("mroot", Some(tree));
                    let r = self.node(radicand);
                    let i = self.node(i);
                    el.with_child(r).with_child(i)
                }
            },
            NodeKind::Accent { base, accent } => {
                // no mover in the element set: the accent rides as a script
                let under = accent.token().is_some_and(|t| t.source == "\\underline");
                let el = self.element(if under { "msub" } else { "msup" }, Some(tree));
                let b = self.node(base);
                let a = self.node(accent);
                el.with_child(b).with_child(a)
            }
        }
    }

    fn interleave(&mut self, row: &mut XmlNode, items: &[OperatorTree], separators: &[OperatorTree]) {
        for (i, it) in items.iter().enumerate() {
            if i > 0 {
                if let Some(s) = separators.get(i - 1) {
                    let el = self.fence_mo(s, "separator");
                    row.push(el);
                }
            }
            row.push(self.node(it));
        }
        for s in separators.iter().skip(items.len().saturating_sub(1)) {
            let el = self.fence_mo(s, "separator");
            row.push(el);
        }
    }
}
