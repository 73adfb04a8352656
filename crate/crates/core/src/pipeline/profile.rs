use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{load_lexicon, Lexicon};
use crate::math::{math_macros, GrammarMode, DEFAULT_CAP};
use crate::mathml::ResourceRequest;
use crate::tex::{tokenize, CatcodeTable, ExpansionLimits, Expander, MacroTable};

pub const BUILTIN_PROFILES: &[&str] = &["math", "fragment", "standard"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    MathmlParallel,
    MathmlPresentation,
    MathmlContent,
    Html5,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::MathmlParallel => "mathml-parallel",
            OutputFormat::MathmlPresentation => "mathml-presentation",
            OutputFormat::MathmlContent => "mathml-content",
            OutputFormat::Html5 => "html5",
        }
    }

    /// File extension for converted outputs.
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Html5 => "html",
            _ => "xml",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mathml-parallel" | "mathml" | "parallel" => Ok(OutputFormat::MathmlParallel),
            "mathml-presentation" | "presentation" | "pmml" => Ok(OutputFormat::MathmlPresentation),
            "mathml-content" | "content" | "cmml" => Ok(OutputFormat::MathmlContent),
            "html5" | "html" => Ok(OutputFormat::Html5),
            _ => Err("expected mathml-parallel, mathml-presentation, mathml-content or html5".into()),
        }
    }
}

/// How the source is split into math and text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// The whole source is one formula.
    Formula,
    /// Text with `$...$`, `$$...$$`, `\(...\)` and `\[...\]` math.
    Fragment,
    /// A fragment that may carry a preamble and `\begin{document}`.
    Document,
}

impl FromStr for InputKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "formula" | "math" => Ok(InputKind::Formula),
            "fragment" => Ok(InputKind::Fragment),
            "document" => Ok(InputKind::Document),
            _ => Err("expected formula, fragment or document".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("unknown profile {name:?}; available: {}", available.join(", "))]
    Unknown { name: String, available: Vec<String> },
    #[error("invalid value {value:?} for option {option}: {reason}")]
    InvalidOption { option: String, value: String, reason: String },
    #[error("unknown option {option:?}")]
    UnknownOption { option: String },
    #[error("{path}:{line}: {message}")]
    Syntax { path: String, line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("include cycle through {path}")]
    IncludeCycle { path: String },
    #[error("profile {name:?} is already registered")]
    Duplicate { name: String },
}

impl ProfileError {
    pub fn category(&self) -> &'static str {
        match self {
            ProfileError::Unknown { .. } => "unknown-profile",
            ProfileError::InvalidOption { .. } | ProfileError::UnknownOption { .. } => "invalid-option",
            ProfileError::Syntax { .. } => "profile-syntax",
            ProfileError::Io { .. } => "profile-io",
            ProfileError::IncludeCycle { .. } => "include-cycle",
            ProfileError::Duplicate { .. } => "duplicate-profile",
        }
    }
}

/// Every key a profile file or override may set.
pub const OPTION_KEYS: &[&str] = &[
    "name",
    "format",
    "input",
    "grammar-mode",
    "ambiguity-cap",
    "preload",
    "lexicon",
    "stylesheet",
    "script",
    "strict",
    "strict-macros",
    "title",
];

/// An option map; merging is last-writer-wins per key.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProfileOptions(pub BTreeMap<String, String>);

impl ProfileOptions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.0.insert(key.into(), value.into());
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// `other` wins on every key it sets.
    pub fn merge(&self, other: &ProfileOptions) -> ProfileOptions {
        let mut out = self.clone();
        out.0.extend(other.0.iter().map(|(k, v)| (k.clone(), v.clone())));
        out
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for ProfileOptions {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        ProfileOptions(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

fn builtin_options(name: &str) -> Option<ProfileOptions> {
    let base = ProfileOptions::new()
        .with("grammar-mode", "strict-heuristic")
        .with("ambiguity-cap", DEFAULT_CAP.to_string())
        .with("strict", "false")
        .with("strict-macros", "false");
    let opts = match name {
        "math" => base.with("format", "mathml-parallel").with("input", "formula"),
        "fragment" => base.with("format", "mathml-parallel").with("input", "fragment"),
        "standard" => base.with("format", "html5").with("input", "document"),
        _ => return None,
    };
    Some(opts.with("name", name))
}

/// A resolved, immutable conversion preset.
#[derive(Clone, Debug)]
pub struct Profile {
    pub name: String,
    pub format: OutputFormat,
    pub input: InputKind,
    pub grammar_mode: GrammarMode,
    pub ambiguity_cap: usize,
    /// Macro fixture files, already loaded into `macros`.
    pub preload: Vec<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
    pub resources: Vec<ResourceRequest>,
    /// Delimiter imbalance is fatal.
    pub strict: bool,
    /// Undefined control sequences are fatal.
    pub strict_macros: bool,
    pub title: Option<String>,
    /// The merged options this profile was built from.
    pub options: ProfileOptions,
    pub macros: Arc<MacroTable>,
    pub lexicon: Arc<Lexicon>,
}

fn invalid(option: &str, value: &str, reason: impl Into<String>) -> ProfileError {
    ProfileError::InvalidOption { option: option.into(), value: value.into(), reason: reason.into() }
}

fn parse_bool(option: &str, value: &str) -> Result<bool, ProfileError> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(invalid(option, value, "expected true or false")),
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn read(path: &Path) -> Result<String, ProfileError> {
    std::fs::read_to_string(path).map_err(|e| ProfileError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Load macro definitions from a fixture (`\name arity body` lines) or,
/// for `.tex` and `.sty` files, from the definitions the file makes.
fn preload(table: MacroTable, path: &Path) -> Result<MacroTable, ProfileError> {
    let text = read(path)?;
    let id = path.display().to_string();
    let fail = |e: crate::tex::TexError| invalid("preload", &id, e.to_string());
    let is_tex = matches!(path.extension().and_then(|e| e.to_str()), Some("tex" | "sty"));
    if is_tex {
        let tokens = tokenize(&text, &id, &CatcodeTable::plain()).map_err(fail)?;
        let mut ex = Expander::new(table, ExpansionLimits::default());
        ex.expand(tokens).map_err(fail)?;
        Ok(ex.table().clone())
    } else {
        let mut table = table;
        table.load_fixture(&text, &id).map_err(fail)?;
        Ok(table)
    }
}

impl Profile {
    /// Validate `options` and load every referenced fixture.
    pub fn from_options(options: ProfileOptions) -> Result<Profile, ProfileError> {
        for key in options.0.keys() {
            if !OPTION_KEYS.contains(&key.as_str()) {
                return Err(ProfileError::UnknownOption { option: key.clone() });
            }
        }
        let get = |k: &str| options.get(k).unwrap_or_default();
        let name = get("name").trim().to_string();
        if name.is_empty() {
            return Err(invalid("name", "", "profile names are nonempty"));
        }
        let format = get("format").parse().map_err(|e: String| invalid("format", get("format"), e))?;
        let input = get("input").parse().map_err(|e: String| invalid("input", get("input"), e))?;
        let grammar_mode = get("grammar-mode").parse().map_err(|e: String| invalid("grammar-mode", get("grammar-mode"), e))?;
        let cap_text = get("ambiguity-cap");
        let ambiguity_cap = match cap_text.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(invalid("ambiguity-cap", cap_text, "expected a positive integer")),
        };
        let strict = parse_bool("strict", get("strict"))?;
        let strict_macros = parse_bool("strict-macros", get("strict-macros"))?;

        let lexicon_path = options.get("lexicon").filter(|s| !s.trim().is_empty()).map(|s| PathBuf::from(s.trim()));
        let lexicon = match &lexicon_path {
            Some(p) => load_lexicon(&read(p)?).map_err(|e| invalid("lexicon", &p.display().to_string(), e.to_string()))?,
            None => Lexicon::default(),
        };
        let preload_paths: Vec<PathBuf> = list(get("preload")).map(PathBuf::from).collect();
        let mut macros = math_macros(&lexicon);
        for p in &preload_paths {
            macros = preload(macros, p)?;
        }

        let mut resources: Vec<ResourceRequest> = list(get("stylesheet")).map(ResourceRequest::stylesheet).collect();
        resources.extend(list(get("script")).map(ResourceRequest::script));
        let title = options.get("title").map(String::from);

        Ok(Profile {
            name,
            format,
            input,
            grammar_mode,
            ambiguity_cap,
            preload: preload_paths,
            lexicon_path,
            resources,
            strict,
            strict_macros,
            title,
            options,
            macros: Arc::new(macros),
            lexicon: Arc::new(lexicon),
        })
    }

    pub fn builtin(name: &str) -> Option<Profile> {
        builtin_options(name).map(|o| Profile::from_options(o).expect("builtin profiles are valid"))
    }
}

/// Parse a profile file into options. `include <name-or-path>` (or
/// `include = <name-or-path>`) splices in a builtin or another file at
/// that point; later lines win. Path-valued
/// options resolve against the including file's directory.
pub fn read_profile_file(path: &Path) -> Result<ProfileOptions, ProfileError> {
    let mut stack = Vec::new();
    read_file_inner(path, &mut stack)
}

fn read_file_inner(path: &Path, stack: &mut Vec<PathBuf>) -> Result<ProfileOptions, ProfileError> {
    let canonical = path.canonicalize().map_err(|e| ProfileError::Io { path: path.display().to_string(), message: e.to_string() })?;
    if stack.contains(&canonical) {
        return Err(ProfileError::IncludeCycle { path: path.display().to_string() });
    }
    stack.push(canonical);
    let text = read(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut opts = ProfileOptions::new();
    let shown = path.display().to_string();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let syntax = |message: &str| ProfileError::Syntax { path: shown.clone(), line: idx + 1, message: message.into() };
        if let Some(target) = line.strip_prefix("include").filter(|r| r.starts_with(|c: char| c.is_whitespace() || c == '=')) {
            let target = target.trim().trim_start_matches('=').trim();
            let mut included = match builtin_options(target) {
                Some(o) if !dir.join(target).exists() => o,
                _ => read_file_inner(&dir.join(target), stack)?,
            };
            // the including file names the profile
            included.0.remove("name");
            opts = opts.merge(&included);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected `key = value` or `include <profile>`"))?;
        let key = key.trim();
        let value = value.trim();
        if !OPTION_KEYS.contains(&key) {
            return Err(syntax(&format!("unknown option {key:?}")));
        }
        let value = match key {
            "preload" | "lexicon" => {
                list(value).map(|p| dir.join(p).display().to_string()).collect::<Vec<_>>().join(",")
            }
            _ => value.to_string(),
        };
        opts.set(key, value);
    }
    stack.pop();
    if opts.get("name").is_none() {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("profile");
        opts.set("name", stem);
    }
    Ok(opts)
}

/// Named profiles: the builtins plus any registered later.
#[derive(Clone, Debug)]
pub struct ProfileRegistry {
    entries: BTreeMap<String, (ProfileOptions, Arc<Profile>)>,
}

impl Default for ProfileRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl ProfileRegistry {
    pub fn with_builtins() -> Self {
        let mut entries = BTreeMap::new();
        for name in BUILTIN_PROFILES {
            let opts = builtin_options(name).expect("builtin");
            let profile = Arc::new(Profile::from_options(opts.clone()).expect("builtin profiles are valid"));
            entries.insert(name.to_string(), (opts, profile));
        }
        ProfileRegistry { entries }
    }

    /// Register every `*.profile` file in `dir` under its name.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, ProfileError> {
        let io = |e: std::io::Error| ProfileError::Io { path: dir.display().to_string(), message: e.to_string() };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "profile"))
            .collect();
        paths.sort();
        for p in &paths {
            let opts = builtin_options("math").expect("builtin").merge(&read_profile_file(p)?);
            self.register(opts)?;
        }
        Ok(paths.len())
    }

    pub fn register(&mut self, options: ProfileOptions) -> Result<Arc<Profile>, ProfileError> {
        let profile = Arc::new(Profile::from_options(options.clone())?);
        if self.entries.contains_key(&profile.name) {
            return Err(ProfileError::Duplicate { name: profile.name.clone() });
        }
        self.entries.insert(profile.name.clone(), (options, profile.clone()));
        Ok(profile)
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn get(&self, name: &str) -> Option<Arc<Profile>> {
        self.entries.get(name).map(|(_, p)| p.clone())
    }

    /// Like [`ProfileRegistry::load`] but never reads a profile file.
    pub fn load_registered(&self, name: &str, overrides: &ProfileOptions) -> Result<Arc<Profile>, ProfileError> {
        match self.entries.get(name) {
            Some((_, profile)) if overrides.is_empty() => Ok(profile.clone()),
            Some((opts, _)) => Ok(Arc::new(Profile::from_options(opts.merge(overrides))?)),
            None => Err(ProfileError::Unknown { name: name.to_string(), available: self.names() }),
        }
    }

    /// Resolve a registered name or a profile file, then apply overrides.
    /// Precedence: overrides, then file values, then builtin defaults.
    pub fn load(&self, name_or_path: &str, overrides: &ProfileOptions) -> Result<Arc<Profile>, ProfileError> {
        let base = if let Some((opts, profile)) = self.entries.get(name_or_path) {
            if overrides.is_empty() {
                return Ok(profile.clone());
            }
            opts.clone()
        } else {
            let path = Path::new(name_or_path);
            if !path.is_file() {
                return Err(ProfileError::Unknown { name: name_or_path.to_string(), available: self.names() });
            }
            builtin_options("math").expect("builtin").merge(&read_profile_file(path)?)
        };
        Ok(Arc::new(Profile::from_options(base.merge(overrides))?))
    }
}

/// [`ProfileRegistry::load`] against the builtin registry.
pub fn load_profile(name_or_path: &str, overrides: &ProfileOptions) -> Result<Arc<Profile>, ProfileError> {
    static BUILTINS: std::sync::OnceLock<ProfileRegistry> = std::sync::OnceLock::new();
    BUILTINS.get_or_init(ProfileRegistry::with_builtins).load(name_or_path, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_math_defaults() {
        let p = load_profile("math", &ProfileOptions::new()).unwrap();
        assert_eq!(p.format, OutputFormat::MathmlParallel);
        assert_eq!(p.grammar_mode, GrammarMode::StrictHeuristic);
        assert_eq!(p.input, InputKind::Formula);
    }

    #[test]
    fn unknown_lists_available() {
        let err = load_profile("nope", &ProfileOptions::new()).unwrap_err();
        let ProfileError::Unknown { available, .. } = &err else { panic!("{err}") };
        assert_eq!(available, &["fragment", "math", "standard"]);
    }

    #[test]
    fn invalid_value_names_option() {
        let err = load_profile("math", &ProfileOptions::new().with("ambiguity-cap", "zero")).unwrap_err();
        assert!(matches!(err, ProfileError::InvalidOption { ref option, .. } if option == "ambiguity-cap"));
    }
}
