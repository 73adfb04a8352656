use std::collections::BTreeMap;
use std::fs;
use std::sync::Arc;

use proptest::prelude::*;
use texmath::diag::Severity;
use texmath::math::GrammarMode;
use texmath::pipeline::*;

fn math() -> Arc<Profile> {
    load_profile("math", &ProfileOptions::new()).unwrap()
}

fn with(name: &str, key: &str, value: &str) -> Arc<Profile> {
    load_profile(name, &ProfileOptions::new().with(key, value)).unwrap()
}

#[test]
fn plain_sum_converts_cleanly() {
    let r = convert("a+b", &math());
    assert_eq!(r.status, Status::Success);
    assert!(r.output.contains("<semantics>"));
    assert!(r.log.iter().all(|e| e.severity < Severity::Warning), "{:?}", r.log);
    assert!(!r.version.is_empty());
    roxmltree::Document::parse(&r.output).unwrap();
}

#[test]
fn undefined_command_passes_through_with_located_warning() {
    let r = convert(r"a+\undefinedcmd b", &math());
    assert_eq!(r.status, Status::SuccessWithWarnings);
    let w = r.log.iter().find(|e| e.category == "unknown-control-sequence").unwrap();
    assert_eq!(w.severity, Severity::Warning);
    let loc = w.locator.as_ref().unwrap();
    assert_eq!((loc.line, loc.column), (1, 3));
    assert!(!r.output.is_empty());
}

#[test]
fn strict_unbalanced_brace_fails() {
    let r = convert("{a", &with("math", "strict", "true"));
    assert_eq!(r.status, Status::Failed);
    let f = r.log.iter().find(|e| e.severity == Severity::Fatal).unwrap();
    assert_eq!(f.category, "delimiter-imbalance");
    let loc = f.locator.as_ref().unwrap();
    assert_eq!((loc.line, loc.column), (1, 1));
    assert!(r.output.is_empty());
}

#[test]
fn strict_macros_make_unknown_fatal() {
    let r = convert(r"a+\nope", &with("math", "strict-macros", "true"));
    assert_eq!(r.status, Status::Failed);
    assert_eq!(r.log.last().unwrap().category, "unknown-control-sequence");
}

#[test]
fn builtin_profiles() {
    let m = math();
    assert_eq!((m.format, m.grammar_mode, m.input), (OutputFormat::MathmlParallel, GrammarMode::StrictHeuristic, InputKind::Formula));
    let f = load_profile("fragment", &ProfileOptions::new()).unwrap();
    assert_eq!(f.input, InputKind::Fragment);
    let s = load_profile("standard", &ProfileOptions::new()).unwrap();
    assert_eq!((s.format, s.input), (OutputFormat::Html5, InputKind::Document));
    assert_eq!(BUILTIN_PROFILES, ["math", "fragment", "standard"]);
}

#[test]
fn unknown_profile_lists_names() {
    let err = load_profile("nope", &ProfileOptions::new()).unwrap_err();
    assert_eq!(err.category(), "unknown-profile");
    let text = err.to_string();
    for n in BUILTIN_PROFILES {
        assert!(text.contains(n), "{text}");
    }
}

#[test]
fn invalid_values_name_the_option() {
    for (k, v) in [("format", "pdf"), ("ambiguity-cap", "0"), ("grammar-mode", "greedy"), ("strict", "maybe"), ("input", "book")] {
        let err = load_profile("math", &ProfileOptions::new().with(k, v)).unwrap_err();
        match err {
            ProfileError::InvalidOption { option, value, .. } => assert_eq!((option.as_str(), value.as_str()), (k, v)),
            e => panic!("{k}: {e}"),
        }
    }
    let err = load_profile("math", &ProfileOptions::new().with("colour", "red")).unwrap_err();
    assert!(matches!(err, ProfileError::UnknownOption { .. }));
}

#[test]
fn file_profile_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mine.profile");
    fs::write(&path, "# mine\ninclude fragment\nambiguity-cap = 3\ngrammar-mode = ambiguous\n").unwrap();
    let p = load_profile(path.to_str().unwrap(), &ProfileOptions::new()).unwrap();
    assert_eq!((p.name.as_str(), p.ambiguity_cap, p.input), ("mine", 3, InputKind::Fragment));
    assert_eq!(p.grammar_mode, GrammarMode::Ambiguous);
    let p = load_profile(path.to_str().unwrap(), &ProfileOptions::new().with("ambiguity-cap", "8")).unwrap();
    assert_eq!(p.ambiguity_cap, 8);
}

#[test]
fn includes_resolve_relative_and_later_lines_win() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("sub")).unwrap();
    fs::write(dir.path().join("sub/base.profile"), "format = html5\nstrict = true\npreload = macros.txt\n").unwrap();
    fs::write(dir.path().join("sub/macros.txt"), "\\half 0 \\frac{1}{2}\n").unwrap();
    fs::write(dir.path().join("top.profile"), "include sub/base.profile\nstrict = false\n").unwrap();
    let p = load_profile(dir.path().join("top.profile").to_str().unwrap(), &ProfileOptions::new()).unwrap();
    assert_eq!(p.format, OutputFormat::Html5);
    assert!(!p.strict);
    assert!(p.preload[0].ends_with("sub/macros.txt"));
    let r = convert(r"\half", &p);
    assert_eq!(r.status, Status::Success, "{:?}", r.log);
    assert!(r.output.contains("<mfrac"));
}

#[test]
fn tex_preload_collects_definitions() {
    let dir = tempfile::tempdir().unwrap();
    let sty = dir.path().join("defs.sty");
    fs::write(&sty, "\\newcommand{\\norm}[1]{\\|#1\\|}\n\\def\\e{\\mathrm{e}}\n").unwrap();
    let p = with("math", "preload", sty.to_str().unwrap());
    let r = convert(r"\norm{x}+\e", &p);
    assert_eq!(r.status, Status::Success, "{:?}", r.log);
}

#[test]
fn include_cycle_and_syntax_errors() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.profile");
    fs::write(&a, "include b.profile\n").unwrap();
    fs::write(dir.path().join("b.profile"), "include a.profile\n").unwrap();
    assert!(matches!(read_profile_file(&a), Err(ProfileError::IncludeCycle { .. })));
    let c = dir.path().join("c.profile");
    fs::write(&c, "format html5\n").unwrap();
    assert!(matches!(read_profile_file(&c), Err(ProfileError::Syntax { line: 1, .. })));
    let d = dir.path().join("d.profile");
    fs::write(&d, "preload = missing.txt\n").unwrap();
    assert!(matches!(load_profile(d.to_str().unwrap(), &ProfileOptions::new()), Err(ProfileError::Io { .. })));
}

#[test]
fn registry_names_are_unique() {
    let mut reg = ProfileRegistry::with_builtins();
    let opts = load_profile("math", &ProfileOptions::new()).unwrap().options.clone().with("name", "custom");
    reg.register(opts.clone()).unwrap();
    assert!(matches!(reg.register(opts), Err(ProfileError::Duplicate { .. })));
    let dup = math().options.clone();
    assert!(matches!(reg.register(dup), Err(ProfileError::Duplicate { .. })));
    assert_eq!(reg.names(), ["custom", "fragment", "math", "standard"]);

    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("wide.profile"), "grammar-mode = ambiguous\n").unwrap();
    assert_eq!(reg.load_dir(dir.path()).unwrap(), 1);
    assert_eq!(reg.get("wide").unwrap().grammar_mode, GrammarMode::Ambiguous);
    assert_eq!(reg.load("wide", &ProfileOptions::new()).unwrap().ambiguity_cap, 64);
}

fn options() -> impl Strategy<Value = ProfileOptions> {
    let key = prop::sample::select(OPTION_KEYS.to_vec());
    prop::collection::btree_map(key.prop_map(String::from), "[a-z0-9]{1,4}", 0..6).prop_map(ProfileOptions)
}

/// Reference semantics: replay every assignment in order; the last write per key stands.
fn replay(layers: &[&ProfileOptions]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for layer in layers {
        for (k, v) in &layer.0 {
            out.insert(k.clone(), v.clone());
        }
    }
    out
}

proptest! {
    #[test]
    fn merge_is_associative_last_writer_wins(a in options(), b in options(), c in options()) {
        let left = a.merge(&b).merge(&c);
        let right = a.merge(&b.merge(&c));
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left.0, replay(&[&a, &b, &c]));
        prop_assert_eq!(a.merge(&ProfileOptions::new()), a.clone());
        prop_assert_eq!(ProfileOptions::new().merge(&a), a);
    }

    #[test]
    fn overrides_beat_file_beat_builtin(cap_file in 1usize..50, cap_override in prop::option::of(1usize..50)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.profile");
        fs::write(&path, format!("ambiguity-cap = {cap_file}\n")).unwrap();
        let mut over = ProfileOptions::new();
        if let Some(c) = cap_override {
            over.set("ambiguity-cap", c.to_string());
        }
        let p = load_profile(path.to_str().unwrap(), &over).unwrap();
        prop_assert_eq!(p.ambiguity_cap, cap_override.unwrap_or(cap_file));
        prop_assert_eq!(p.format, OutputFormat::MathmlParallel);
    }
}

#[test]
fn locator_through_macro_is_call_site() {
    let src = "\\newcommand{\\half}{\\frac{1}{2}\\oops}\n\n x = \\half";
    let r = convert(src, &math());
    let w = r.log.iter().find(|e| e.category == "unknown-control-sequence").unwrap();
    let loc = w.locator.as_ref().unwrap();
    assert_eq!((loc.line, loc.column), (3, 6));
    assert!(!loc.approximate);
}

#[test]
fn locator_in_raw_text_is_exact() {
    let r = convert("a+b\n+ c\\bad", &math());
    let loc = r.log[0].locator.as_ref().unwrap();
    assert_eq!((loc.line, loc.column), (2, 4));
}

#[test]
fn locate_faults() {
    use texmath::math::{insert_invisibles, parse_formula, MathConfig, NodeKind};
    let tree = parse_formula("a\n  b", &MathConfig::default()).unwrap().best().tree.clone();
    let tree = insert_invisibles(tree);
    let NodeKind::Apply { head, .. } = &tree.kind else { panic!("{}", tree.sexpr()) };
    let synthetic = head.token().expect("implicit times");
    assert!(synthetic.synthetic);
    let loc = locate(Fault::MathToken(synthetic), "doc");
    assert!(loc.approximate);
    assert_eq!(&*loc.source, "doc");
    let loc = locate(Fault::Node(&tree), "doc");
    assert_eq!((loc.line, loc.column, loc.approximate), (1, 1, false));
    let NodeKind::Apply { args, .. } = &tree.kind else { unreachable!() };
    let b = locate(Fault::Node(&args[1]), "doc");
    assert_eq!((b.line, b.column), (2, 3));
    assert!(locate(Fault::Unknown, "doc").approximate);
}

#[test]
fn json_log_lines_carry_version() {
    let r = convert(r"\foo + \bar", &math());
    let text = log_to_json_lines(&r.log, &r.version);
    assert_eq!(text.lines().count(), r.log.len());
    for (line, entry) in text.lines().zip(&r.log) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for field in ["severity", "category", "message", "locator", "version"] {
            assert!(v.get(field).is_some(), "{field} missing in {line}");
        }
        assert_eq!(v["version"], VERSION);
        let back: LogRecord = serde_json::from_str(line).unwrap();
        assert_eq!(back.message, entry.message);
    }
}

#[test]
fn output_formats() {
    let pres = convert("x^2", &with("math", "format", "mathml-presentation")).output;
    assert!(pres.contains("<msup") && !pres.contains("annotation-xml"));
    let content = convert("x^2", &with("math", "format", "mathml-content")).output;
    assert!(content.contains("<apply") && !content.contains("<msup"));
    let page = convert("x^2", &with("math", "format", "html5")).output;
    assert!(page.starts_with("<!DOCTYPE html>") && page.contains(VERSION));
}

#[test]
fn fragments_and_documents() {
    let frag = load_profile("fragment", &ProfileOptions::new()).unwrap();
    let r = convert("Let $x$ and \\(y\\).\n\n\\section{Next} $$a=b$$", &frag);
    assert_eq!(r.status, Status::Success, "{:?}", r.log);
    let doc = roxmltree::Document::parse(&r.output).unwrap();
    let maths: Vec<_> = doc.descendants().filter(|n| n.tag_name().name() == "math").collect();
    assert_eq!(maths.len(), 3);
    assert_eq!(maths[2].attribute("display"), Some("block"));
    let ids: Vec<_> = doc.descendants().filter_map(|n| n.attribute("id")).collect();
    let unique: std::collections::HashSet<_> = ids.iter().collect();
    assert_eq!(unique.len(), ids.len());
    assert!(doc.descendants().any(|n| n.tag_name().name() == "h2"));

    let std = load_profile("standard", &ProfileOptions::new()).unwrap();
    let r = convert("\\documentclass{article}\n\\newcommand{\\sq}[1]{#1^2}\n\\begin{document}\nSo $\\sq{y}$.\n\\end{document}\n", &std);
    assert_eq!(r.status, Status::Success, "{:?}", r.log);
    assert!(r.output.contains("<msup") && !r.output.contains("article"));

    let r = convert("open $x", &frag);
    assert_eq!(r.status, Status::SuccessWithWarnings);
    assert_eq!(r.log[0].category, "delimiter-imbalance");
    let r = convert("open $x", &with("fragment", "strict", "true"));
    assert_eq!(r.status, Status::Failed);
}

#[test]
fn input_resolves_through_resolver() {
    let mut files = MapResolver::default();
    files.insert("defs.tex", "\\newcommand{\\two}{2}");
    let frag = load_profile("fragment", &ProfileOptions::new()).unwrap();
    let r = convert_document("\\input{defs}$\\two$", "main.tex", &frag, Some(&files));
    assert_eq!(r.status, Status::Success, "{:?}", r.log);
    assert!(r.output.contains("<mn"));
    let r = convert_document("\\input{../etc/passwd}$x$", "main.tex", &frag, Some(&DirResolver::new("/tmp")));
    assert_eq!(r.log[0].category, "missing-input");
}

#[test]
fn phase_accounting_and_determinism() {
    let src = r"\frac{-b \pm \sqrt{b^2-4ac}}{2a} + \foo";
    let a = convert(src, &math());
    let b = convert(src, &math());
    assert_eq!((&a.output, &a.log, a.status), (&b.output, &b.log, b.status));
    assert!(a.timings.phase_sum() <= a.timings.total);
    assert_eq!(a.timings.phases.len(), 4);
}

#[test]
fn concurrent_conversions_match_sequential() {
    let p = math();
    let inputs: Vec<String> = (0..32).map(|i| format!("x_{i} + \\frac{{{i}}}{{y}}")).collect();
    let expected: Vec<String> = inputs.iter().map(|s| convert(s, &p).output).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = inputs.iter().map(|src| s.spawn(|| convert(src, &p).output)).collect();
        for (h, want) in handles.into_iter().zip(&expected) {
            assert_eq!(&h.join().unwrap(), want);
        }
    });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]
    #[test]
    fn conversion_is_total(src in r"[a-z0-9+\-*/^_{}()\[\]|=<>$&\\ \n]{0,30}") {
        for name in BUILTIN_PROFILES {
            let p = load_profile(name, &ProfileOptions::new()).unwrap();
            let r = convert(&src, &p);
            let fatal = r.log.iter().any(|e| e.severity == Severity::Fatal);
            prop_assert_eq!(r.status == Status::Failed, fatal);
            prop_assert!(!r.version.is_empty());
            prop_assert!(r.timings.phase_sum() <= r.timings.total);
            prop_assert!(r.log.iter().filter(|e| e.severity >= Severity::Warning).all(|e| e.locator.is_some()));
            prop_assert!(!r.output.contains("mfenced"));
            if r.status != Status::Failed && p.format != OutputFormat::Html5 {
                prop_assert!(roxmltree::Document::parse(&r.output).is_ok(), "{}", r.output);
            }
        }
    }
}

#[test]
fn cancellation_stops_before_work() {
    use std::sync::atomic::AtomicBool;
    let flag = AtomicBool::new(true);
    assert!(convert_cancellable("a+b", "x", &math(), None, &flag).is_none());
    let flag = AtomicBool::new(false);
    let r = convert_cancellable("a+b", "x", &math(), None, &flag).unwrap();
    assert_eq!(r.output, convert("a+b", &math()).output);
}
