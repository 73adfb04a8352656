use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::xml::XmlNode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Stylesheet,
    Script,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourcePayload {
    /// Linked by path or URL.
    External(String),
    /// Embedded verbatim.
    Inline(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResourceRequest {
    pub kind: ResourceKind,
    pub payload: ResourcePayload,
}

impl ResourceRequest {
    pub fn stylesheet(path: impl Into<String>) -> Self {
        ResourceRequest { kind: ResourceKind::Stylesheet, payload: ResourcePayload::External(path.into()) }
    }

    pub fn script(path: impl Into<String>) -> Self {
        ResourceRequest { kind: ResourceKind::Script, payload: ResourcePayload::External(path.into()) }
    }

    pub fn inline(kind: ResourceKind, text: impl Into<String>) -> Self {
        ResourceRequest { kind, payload: ResourcePayload::Inline(text.into()) }
    }

    /// Requests with equal keys are emitted once.
    pub fn dedup_key(&self) -> (ResourceKind, &ResourcePayload) {
        (self.kind, &self.payload)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtmlOptions {
    pub title: Option<String>,
    pub lang: Option<String>,
    /// Written to a `generator` meta tag.
    pub generator: Option<String>,
}

fn escape(text: &str) -> String {
    quick_xml::escape::escape(text).into_owned()
}

/// A standalone HTML5 page holding `body` inline. Stylesheets precede
/// scripts in the head; repeated requests collapse to the first.
pub fn wrap_html(body: &[XmlNode], resources: &[ResourceRequest], options: &HtmlOptions) -> String {
    let mut seen = HashSet::new();
    let unique: Vec<&ResourceRequest> = resources.iter().filter(|r| seen.insert(r.dedup_key())).collect();
    let mut out = String::from("<!DOCTYPE html>\n");
    out.push_str(&format!("<html lang=\"{}\">\n<head>\n<meta charset=\"utf-8\">\n", escape(options.lang.as_deref().unwrap_or("en"))));
    if let Some(g) = &options.generator {
        out.push_str(&format!("<meta name=\"generator\" content=\"{}\">\n", escape(g)));
    }
    out.push_str(&format!("<title>{}</title>\n", escape(options.title.as_deref().unwrap_or("texmath"))));
    for kind in [ResourceKind::Stylesheet, ResourceKind::Script] {
        for r in unique.iter().filter(|r| r.kind == kind) {
            let line = match (&r.kind, &r.payload) {
                (ResourceKind::Stylesheet, ResourcePayload::External(p)) => format!("<link rel=\"stylesheet\" href=\"{}\">", escape(p)),
                (ResourceKind::Stylesheet, ResourcePayload::Inline(t)) => format!("<style>{t}</style>"),
                (ResourceKind::Script, ResourcePayload::External(p)) => format!("<script src=\"{}\"></script>", escape(p)),
                (ResourceKind::Script, ResourcePayload::Inline(t)) => format!("<script>{t}</script>"),
            };
            out.push_str(&line);
            out.push('\n');
        }
    }
    out.push_str("</head>\n<body>\n");
    for node in body {
        out.push_str(&node.to_xml());
        out.push('\n');
    }
    out.push_str("</body>\n</html>\n");
    out
}
