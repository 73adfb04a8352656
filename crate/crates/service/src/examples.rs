//! The curated showcase list served at `/examples`.

use std::path::Path;

use serde::{Deserialize, Serialize};

const SHIPPED: &str = include_str!("../../../fixtures/examples.tsv");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub name: String,
    pub source: String,
}

/// `name<TAB>source` lines; blank lines and `#` comments are skipped.
pub fn parse_examples(text: &str) -> Result<Vec<Example>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, source) = line.split_once('\t').ok_or_else(|| format!("examples line {}: expected name<TAB>source", i + 1))?;
        out.push(Example { name: name.trim().to_string(), source: source.to_string() });
    }
    Ok(out)
}

pub fn shipped_examples() -> Vec<Example> {
    parse_examples(SHIPPED).expect("shipped examples parse")
}

pub fn load_examples(path: &Path) -> Result<Vec<Example>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_examples(&text)
}
