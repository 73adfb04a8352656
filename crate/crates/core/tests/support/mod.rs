#![allow(dead_code)]

pub mod earley;
pub mod fixtures;

use std::collections::HashSet;

pub const PRESENTATION_WHITELIST: &[&str] =
    &["math", "mrow", "mi", "mo", "mn", "msup", "msub", "msubsup", "mfrac", "msqrt", "mroot", "mtext", "mstyle", "mspace"];

const CONTENT_TOKENS: &[&str] = &["ci", "cn", "cs", "csymbol"];

/// Check parsed parallel markup: well-formed, presentation restricted to the
/// whitelist, every xref resolves, xrefs distinct, and every content token
/// that came from the source carries one.
pub fn check_parallel(xml: &str) -> Result<(), String> {
    if xml.contains("mfenced") {
        return Err("mfenced present".into());
    }
    let doc = roxmltree::Document::parse(xml).map_err(|e| format!("not well-formed: {e}"))?;
    let root = doc.root_element();
    if root.tag_name().name() != "math" {
        return Err("root is not math".into());
    }
    let semantics = root.first_element_child().ok_or("empty math")?;
    if semantics.tag_name().name() != "semantics" {
        return Err("no semantics".into());
    }
    let mut kids = semantics.children().filter(|n| n.is_element());
    let pres = kids.next().ok_or("no presentation branch")?;
    let ann = kids.next().ok_or("no annotation-xml")?;
    if ann.tag_name().name() != "annotation-xml" {
        return Err("second child is not annotation-xml".into());
    }
    let mut ids = HashSet::new();
    for n in doc.descendants().filter(|n| n.is_element()) {
        if let Some(id) = n.attribute("id") {
            if !ids.insert(id.to_string()) {
                return Err(format!("duplicate id {id}"));
            }
        }
    }
    let mut pres_ids = HashSet::new();
    for n in pres.descendants().filter(|n| n.is_element()) {
        let name = n.tag_name().name();
        if !PRESENTATION_WHITELIST.contains(&name) {
            return Err(format!("presentation element {name} outside whitelist"));
        }
        if let Some(id) = n.attribute("id") {
            pres_ids.insert(id.to_string());
        }
    }
    let mut xrefs = HashSet::new();
    for n in ann.descendants().filter(|n| n.is_element()) {
        if let Some(x) = n.attribute("xref") {
            if !pres_ids.contains(x) {
                return Err(format!("xref {x} does not resolve"));
            }
            if !xrefs.insert(x.to_string()) {
                return Err(format!("xref {x} used twice"));
            }
        }
        let name = n.tag_name().name();
        let synthetic_symbol = name == "csymbol" && matches!(n.attribute("cd"), Some("ambiguous" | "combinat1" | "moreerrors"));
        if CONTENT_TOKENS.contains(&name) && !synthetic_symbol && n.attribute("xref").is_none() {
            return Err(format!("content token {name} {:?} without xref", n.text()));
        }
    }
    Ok(())
}

/// Text of every `csymbol cd="unknown"` escape, in document order.
pub fn escapes(xml: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(xml).expect("well-formed");
    doc.descendants()
        .filter(|n| n.has_tag_name("csymbol") && n.attribute("cd") == Some("unknown"))
        .map(|n| n.text().unwrap_or_default().to_string())
        .collect()
}
