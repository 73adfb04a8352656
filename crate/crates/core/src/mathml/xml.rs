use std::io::Cursor;

use quick_xml::events::{BytesEnd, BytesStart, BytesText, Event};
use quick_xml::Writer;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum XmlChild {
    Element(XmlNode),
    Text(String),
}

/// A minimal element tree. Attribute order is insertion order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct XmlNode {
    pub name: String,
    pub attributes: Vec<(String, String)>,
    pub children: Vec<XmlChild>,
}

impl XmlNode {
    pub fn new(name: impl Into<String>) -> Self {
        XmlNode { name: name.into(), attributes: Vec::new(), children: Vec::new() }
    }

    pub fn text_element(name: impl Into<String>, text: impl Into<String>) -> Self {
        XmlNode::new(name).with_text(text)
    }

    /// Set an attribute, replacing an existing value of the same name.
    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        let value = value.into();
        match self.attributes.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.attributes.push((name.to_string(), value)),
        }
    }

    pub fn with_attr(mut self, name: &str, value: impl Into<String>) -> Self {
        self.set_attr(name, value);
        self
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, child: XmlNode) {
        self.children.push(XmlChild::Element(child));
    }

    pub fn with_child(mut self, child: XmlNode) -> Self {
        self.push(child);
        self
    }

    pub fn with_children(mut self, children: impl IntoIterator<Item = XmlNode>) -> Self {
        self.children.extend(children.into_iter().map(XmlChild::Element));
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.children.push(XmlChild::Text(text.into()));
        self
    }

    pub fn elements(&self) -> impl Iterator<Item = &XmlNode> {
        self.children.iter().filter_map(|c| match c {
            XmlChild::Element(e) => Some(e),
            XmlChild::Text(_) => None,
        })
    }

    /// Concatenated text content of this subtree.
    pub fn text(&self) -> String {
        let mut out = String::new();
        self.walk(&mut |n| {
            for c in &n.children {
                if let XmlChild::Text(t) = c {
                    out.push_str(t);
                }
            }
        });
        out
    }

    /// Preorder visit of this element and all descendant elements.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a XmlNode)) {
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            f(n);
            let kids: Vec<&XmlNode> = n.elements().collect();
            stack.extend(kids.into_iter().rev());
        }
    }

    /// Prefix every `id`, `xref` and `#`-fragment `href` in the subtree.
    pub fn prefix_ids(&mut self, prefix: &str) {
        for (k, v) in self.attributes.iter_mut() {
            match k.as_str() {
                "id" | "xref" => *v = format!("{prefix}{v}"),
                "href" if v.starts_with('#') => *v = format!("#{prefix}{}", &v[1..]),
                _ => {}
            }
        }
        for c in self.children.iter_mut() {
            if let XmlChild::Element(e) = c {
                e.prefix_ids(prefix);
            }
        }
    }

    pub fn find(&self, name: &str) -> Option<&XmlNode> {
        let mut found = None;
        self.walk(&mut |n| {
            if found.is_none() && n.name == name {
                found = Some(n);
            }
        });
        found
    }

    /// Compact serialization without an XML declaration.
    pub fn to_xml(&self) -> String {
        self.serialize(None)
    }

    /// Indented serialization; elements holding only text stay on one line.
    pub fn to_pretty_xml(&self) -> String {
        self.serialize(Some(2))
    }

    fn serialize(&self, indent: Option<usize>) -> String {
        let mut writer = match indent {
            Some(n) => Writer::new_with_indent(Cursor::new(Vec::new()), b' ', n),
            None => Writer::new(Cursor::new(Vec::new())),
        };
        write_node(&mut writer, self);
        String::from_utf8(writer.into_inner().into_inner()).expect("writer emits UTF-8")
    }
}

fn write_node(w: &mut Writer<Cursor<Vec<u8>>>, node: &XmlNode) {
    let mut start = BytesStart::new(node.name.as_str());
    for (k, v) in &node.attributes {
        start.push_attribute((k.as_str(), v.as_str()));
    }
    // Writing into a Vec cannot fail.
    if node.children.is_empty() {
        w.write_event(Event::Empty(start)).expect("in-memory write");
        return;
    }
    w.write_event(Event::Start(start)).expect("in-memory write");
    for c in &node.children {
        match c {
            XmlChild::Element(e) => write_node(w, e),
            XmlChild::Text(t) => w.write_event(Event::Text(BytesText::new(t))).expect("in-memory write"),
        }
    }
    w.write_event(Event::End(BytesEnd::new(node.name.as_str()))).expect("in-memory write");
}
