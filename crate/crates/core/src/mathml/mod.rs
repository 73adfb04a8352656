//! Presentation, content, and parallel MathML from operator trees.

mod content;
mod html;
mod presentation;
mod xml;

pub use content::{is_content_element, AMBIGUOUS_CD, PRIVATE_CD, UNKNOWN_CD};
pub use html::{wrap_html, HtmlOptions, ResourceKind, ResourcePayload, ResourceRequest};
pub use xml::{XmlChild, XmlNode};

use crate::math::{insert_invisibles, OperatorTree};
use content::Contentifier;
use presentation::Presenter;

pub const MATHML_NS: &str = "http://www.w3.org/1998/Math/MathML";

/// Every element the presentation branch may use.
pub const PRESENTATION_ELEMENTS: &[&str] =
    &["math", "mrow", "mi", "mo", "mn", "msup", "msub", "msubsup", "mfrac", "msqrt", "mroot", "mtext", "mstyle", "mspace"];

fn math_root() -> XmlNode {
    XmlNode::new("math").with_attr("xmlns", MATHML_NS)
}

fn presentation_branch(tree: &OperatorTree) -> (XmlNode, Presenter) {
    let tree = insert_invisibles(tree.clone());
    let mut p = Presenter::default();
    let node = p.node(&tree);
    (node, p)
}

pub fn emit_presentation(tree: &OperatorTree) -> XmlNode {
    math_root().with_child(presentation_branch(tree).0)
}

pub fn emit_content(tree: &OperatorTree) -> XmlNode {
    let tree = insert_invisibles(tree.clone());
    math_root().with_child(Contentifier::new(None).node(&tree))
}

/// `math[semantics[presentation, annotation-xml[content]]]` with content
/// nodes pointing back at presentation ids through `xref`.
pub fn emit_parallel(tree: &OperatorTree) -> XmlNode {
    let tree = insert_invisibles(tree.clone());
    let mut p = Presenter::default();
    let pres = p.node(&tree);
    let content = Contentifier::new(Some(&p.ids)).node(&tree);
    let annotation = XmlNode::new("annotation-xml").with_attr("encoding", "MathML-Content").with_child(content);
    math_root().with_child(XmlNode::new("semantics").with_child(pres).with_child(annotation))
}
