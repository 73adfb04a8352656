//! Checks over the checked-in fixture corpora. Each returns a list of
//! failure descriptions; empty means the check passed.

use serde_json::Value;
use texmath::earley::{parse, parse_bnf};
use texmath::pipeline::{convert, load_profile, InputKind, OutputFormat, ProfileOptions, Status};

use super::{check_parallel, escapes};

pub const CORPUS: &str = include_str!("../../../../fixtures/corpus.txt");
pub const TEXVC: &str = include_str!("../../../../fixtures/texvc.tsv");
pub const LOCATORS: &str = include_str!("../../../../fixtures/locators.jsonl");
pub const EXAMPLES: &str = include_str!("../../../../fixtures/examples.tsv");

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
}

pub fn corpus() -> Vec<&'static str> {
    data_lines(CORPUS).collect()
}

/// `(formula, expected escapes)`; `-` means none.
pub fn texvc() -> Vec<(&'static str, String)> {
    data_lines(TEXVC)
        .map(|l| {
            let (f, e) = l.split_once('\t').expect("formula<TAB>escapes");
            (f, if e == "-" { String::new() } else { e.to_string() })
        })
        .collect()
}

pub fn example_sources() -> Vec<&'static str> {
    data_lines(EXAMPLES).map(|l| l.split_once('\t').expect("name<TAB>source").1).collect()
}

/// Every formula a fixture file holds, for corpus-wide sweeps.
pub fn all_formulas() -> Vec<&'static str> {
    let mut all = corpus();
    all.extend(texvc().into_iter().map(|(f, _)| f));
    all.extend(example_sources());
    all
}

/// Binomial form of the Catalan numbers, independent of any parser.
pub fn catalan(n: u128) -> u128 {
    let mut c = 1u128;
    for k in 0..n {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// `S -> S '+' S | 'a'` over `n` operands must yield Catalan(n-1) trees.
pub fn check_catalan(range: std::ops::RangeInclusive<usize>) -> Vec<String> {
    let g = parse_bnf("S -> S '+' S | 'a'").expect("grammar");
    let mut failures = Vec::new();
    for n in range {
        let input = g.chars_to_terminals(&vec!["a"; n].join("+")).expect("terminals");
        let (_, forest) = parse(&g, input.as_slice());
        let want = catalan(n as u128 - 1);
        let counted = forest.tree_count();
        let mut listed = forest.enumerate(10_000).trees;
        listed.sort();
        listed.dedup();
        if counted != want || listed.len() as u128 != want {
            failures.push(format!("n={n}: expected {want}, counted {counted}, enumerated {}", listed.len()));
        }
    }
    failures
}

/// Parallel-markup structure over the 500-formula corpus.
pub fn check_corpus_bijection() -> Vec<String> {
    let profile = load_profile("math", &ProfileOptions::new()).expect("math profile");
    let mut failures = Vec::new();
    for f in corpus() {
        let r = convert(f, &profile);
        if r.status == Status::Failed {
            failures.push(format!("{f}: failed"));
        } else if let Err(e) = check_parallel(&r.output) {
            failures.push(format!("{f}: {e}"));
        }
    }
    failures
}

/// Every fixture formula through every output format and input kind; no
/// output may mention mfenced.
pub fn check_mfenced_absence() -> (usize, Vec<String>) {
    let mut outputs = 0;
    let mut failures = Vec::new();
    let formats = [OutputFormat::MathmlParallel, OutputFormat::MathmlPresentation, OutputFormat::MathmlContent, OutputFormat::Html5];
    let formulas = all_formulas();
    for format in formats {
        for input in [InputKind::Formula, InputKind::Fragment] {
            let opts = ProfileOptions::new().with("format", format.name()).with("input", input_name(input));
            let profile = load_profile("math", &opts).expect("profile");
            for f in &formulas {
                let source = if input == InputKind::Fragment { format!("Text ${f}$ and $${f}$$.") } else { f.to_string() };
                let out = convert(&source, &profile).output;
                outputs += 1;
                if out.contains("mfenced") {
                    failures.push(format!("{format} {input:?}: {f}"));
                }
            }
        }
    }
    (outputs, failures)
}

fn input_name(k: InputKind) -> &'static str {
    match k {
        InputKind::Formula => "formula",
        InputKind::Fragment => "fragment",
        InputKind::Document => "document",
    }
}

/// texvc subset: never failed, and unknown escapes exactly as annotated.
pub fn check_texvc() -> (usize, Vec<String>) {
    let profile = load_profile("math", &ProfileOptions::new()).expect("math profile");
    let cases = texvc();
    let mut failures = Vec::new();
    for (f, want) in &cases {
        let r = convert(f, &profile);
        if r.status == Status::Failed {
            failures.push(format!("{f}: failed"));
            continue;
        }
        let got = escapes(&r.output).concat();
        if &got != want {
            failures.push(format!("{f}: escapes {got:?}, annotated {want:?}"));
        }
    }
    (cases.len(), failures)
}

/// Injected faults reported at their exact line and column.
pub fn check_locators() -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let mut n = 0;
    for line in data_lines(LOCATORS) {
        n += 1;
        let case: Value = serde_json::from_str(line).expect("locator fixture");
        let source = case["source"].as_str().expect("source");
        let strict = case["strict"].as_bool().unwrap_or(false).to_string();
        let profile = load_profile(case["profile"].as_str().expect("profile"), &ProfileOptions::new().with("strict", strict)).expect("profile");
        let (line, column, category) = (case["line"].as_u64().unwrap(), case["column"].as_u64().unwrap(), case["category"].as_str().unwrap());
        let r = convert(source, &profile);
        let hit = r.log.iter().find(|d| d.category == category);
        match hit.and_then(|d| d.locator.as_ref()) {
            Some(l) if l.line as u64 == line && l.column as u64 == column && !l.approximate => {}
            Some(l) => failures.push(format!("{source:?}: {category} at {}:{} (approximate {}), want {line}:{column}", l.line, l.column, l.approximate)),
            None => failures.push(format!("{source:?}: no located {category} entry")),
        }
    }
    (n, failures)
}
