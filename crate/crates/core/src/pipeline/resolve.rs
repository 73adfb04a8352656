use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};

use crate::tex::InputResolver;

/// True for relative paths made only of normal segments.
pub fn is_safe_relative(name: &str) -> bool {
    let path = Path::new(name);
    !name.is_empty()
        && !name.starts_with('/')
        && !name.starts_with('\\')
        && !name.contains('\\')
        && path.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

/// Serves `\input` from files under one directory; names escaping it are
/// never resolved.
#[derive(Clone, Debug)]
pub struct DirResolver {
    root: PathBuf,
}

impl DirResolver {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DirResolver { root: root.into() }
    }
}

impl InputResolver for DirResolver {
    fn resolve(&self, name: &str) -> Option<String> {
        if !is_safe_relative(name) {
            return None;
        }
        std::fs::read_to_string(self.root.join(name)).ok()
    }
}

/// Serves `\input` from an in-memory file set, such as an unpacked archive.
#[derive(Clone, Debug, Default)]
pub struct MapResolver {
    files: BTreeMap<String, String>,
}

impl MapResolver {
    pub fn new(files: BTreeMap<String, String>) -> Self {
        MapResolver { files }
    }

    pub fn insert(&mut self, name: impl Into<String>, text: impl Into<String>) {
        self.files.insert(name.into(), text.into());
    }
}

impl InputResolver for MapResolver {
    fn resolve(&self, name: &str) -> Option<String> {
        let name = name.strip_prefix("./").unwrap_or(name);
        self.files.get(name).cloned()
    }
}
