use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use proptest::prelude::*;
use texmath::diag::Severity;
use texmath::lexicon::{load_lexicon, Lexicon};
use texmath::math::*;

/// Weights read straight from the shipped table file, without going
/// through `ScoringTable`.
fn shipped_weights() -> HashMap<String, f64> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/scoring.txt")).unwrap();
    text.lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().to_string(), it.next().unwrap().parse().unwrap())
        })
        .collect()
}

fn hand_score(tags: &[&str]) -> f64 {
    let w = shipped_weights();
    -tags.iter().map(|t| w[*t]).sum::<f64>()
}

fn ambiguous() -> MathConfig {
    MathConfig::ambiguous()
}

fn with_function_f(mut config: MathConfig) -> MathConfig {
    config.lexicon = Arc::new(load_lexicon("f function - U+0066 italic\n").unwrap());
    config
}

fn reading<'a>(parse: &'a MathParse, sexpr: &str) -> &'a Reading {
    parse
        .readings
        .iter()
        .find(|r| r.tree.sexpr() == sexpr)
        .unwrap_or_else(|| panic!("no reading {sexpr}; have {:?}", parse.readings.iter().map(|r| r.tree.sexpr()).collect::<Vec<_>>()))
}

fn sorted(tags: &[String]) -> Vec<String> {
    let mut v = tags.to_vec();
    v.sort();
    v
}

#[test]
fn juxtaposition_binds_tighter_than_plus() {
    for config in [MathConfig::default(), ambiguous()] {
        let p = parse_formula("a+b c", &config).unwrap();
        assert_eq!(p.best().tree.sexpr(), "plus(a,itimes(b,c))");
    }
}

#[test]
fn declared_function_prefers_application() {
    let p = parse_formula("f(x)", &with_function_f(ambiguous())).unwrap();
    // fenced application, bare application of a fenced argument, product
    assert_eq!(p.total, 3);
    let apply = reading(&p, "apply(f,(x))");
    let bare = p.readings.iter().find(|r| matches!(r.tree.kind, NodeKind::Apply { form: Form::FunctionBare, .. })).unwrap();
    assert_eq!(bare.score, hand_score(&["bare-fenced-argument"]));
    let times = reading(&p, "itimes(f,(x))");
    assert!(apply.provenance.is_empty());
    assert_eq!(times.provenance, vec!["function-as-factor"]);
    assert_eq!(apply.score, hand_score(&[]));
    assert_eq!(times.score, hand_score(&["function-as-factor"]));
    assert_eq!(p.best().tree.sexpr(), "apply(f,(x))");

    let strict = parse_formula("f(x)", &with_function_f(MathConfig::default())).unwrap();
    assert_eq!(strict.readings.len(), 1);
    assert_eq!(strict.best().tree.sexpr(), "apply(f,(x))");
}

#[test]
fn undeclared_identifier_prefers_product() {
    let p = parse_formula("f(x)", &ambiguous()).unwrap();
    assert_eq!(p.best().tree.sexpr(), "itimes(f,(x))");
    assert_eq!(reading(&p, "apply(f,(x))").score, hand_score(&["atom-applied"]));
}

#[test]
fn sine_scope_stops_at_plus() {
    let p = parse_formula(r"\sin x + 1", &ambiguous()).unwrap();
    let good = reading(&p, "plus(apply(sin,x),1)");
    let wide = reading(&p, "apply(sin,plus(x,1))");
    assert_eq!(good.score, hand_score(&[]));
    assert_eq!(wide.score, hand_score(&["wide-argument"]));
    assert!(good.score > wide.score);
    assert_eq!(p.best().tree.sexpr(), "plus(apply(sin,x),1)");
}

#[test]
fn nested_functions_oracle() {
    let p = parse_formula(r"\sin x \cos y", &ambiguous()).unwrap();
    assert_eq!(p.total, 7);
    let cases: &[(&str, &[&str])] = &[
        ("itimes(apply(sin,x),apply(cos,y))", &["function-scope"]),
        ("apply(sin,itimes(x,apply(cos,y)))", &["function-in-argument"]),
        ("apply(sin,itimes(x,cos,y))", &["function-as-factor"]),
        ("itimes(apply(sin,x),cos,y)", &["function-as-factor", "function-scope"]),
    ];
    for (sexpr, tags) in cases {
        let r = reading(&p, sexpr);
        assert_eq!(r.score, hand_score(tags), "{sexpr}");
        let want: Vec<String> = tags.iter().map(|t| t.to_string()).collect();
        assert_eq!(sorted(&r.provenance), sorted(&want), "{sexpr}");
    }
}

#[test]
fn readings_are_totally_ordered() {
    for f in CORPUS {
        let p = parse_formula(f, &ambiguous()).unwrap();
        for w in p.readings.windows(2) {
            assert!(w[0].score >= w[1].score, "{f}");
            assert!(w[0].score.is_finite());
        }
    }
}

const CORPUS: &[&str] = &[
    "a+b c",
    "x^2+y^2=z^2",
    r"\frac{-b \pm \sqrt{b^2-4ac}}{2a}",
    r"\sin x + 1",
    r"\sin x \cos y",
    r"\sin \sin x",
    r"\sum_{i=1}^n a_i",
    r"\int_0^1 f(x)\,dx",
    r"\lim_{n\to\infty} \frac{1}{n}",
    r"a<b\le c",
    r"|x|+|y|",
    "a_{ij}",
    r"\mathbb{R}^n",
    r"\{x \mid x>0\}",
    r"\binom{n}{k}",
    r"\sqrt[3]{x}",
    "-x^2",
    "x=-1",
    r"\log_2 n",
    r"e^{i\pi}+1=0",
    "(a,b)",
    r"\hat{x}",
    r"\overline{ab}",
    "f'(x)",
    r"\alpha\beta\gamma",
    "a, b, c",
    r"a \cdot b \times c",
    r"\lfloor x \rfloor",
    r"A \cup B \cap C",
    r"p \land q \lor r",
    r"\sin x \cos y \tan z",
];

#[test]
fn forest_fidelity_up_to_cap() {
    for cap in [1usize, 3, 64] {
        let config = MathConfig { cap, ..ambiguous() };
        for f in CORPUS {
            let p = parse_formula(f, &config).unwrap();
            let expect = p.total.min(cap as u128) as usize;
            assert_eq!(p.readings.len(), expect, "{f} cap {cap}");
            assert_eq!(p.truncated, p.total > cap as u128, "{f}");
            let distinct: HashSet<String> = p.readings.iter().map(|r| format!("{:?}", r.tree)).collect();
            assert_eq!(distinct.len(), p.readings.len(), "{f}: readings must be distinct trees");
            if p.truncated {
                assert!(p.diagnostics.iter().any(|d| d.category == "ambiguity-truncated"));
            }
        }
    }
}

#[test]
fn strict_mode_returns_one_reading_matching_ambiguous_top() {
    for f in CORPUS {
        let strict = parse_formula(f, &MathConfig::default()).unwrap();
        let amb = parse_formula(f, &ambiguous()).unwrap();
        assert_eq!(strict.readings.len(), 1, "{f}");
        assert_eq!(strict.best().tree, amb.best().tree, "{f}");
        if amb.total == 1 {
            assert_eq!(amb.readings.len(), 1);
        }
    }
}

#[test]
fn mode_agreement_on_unambiguous_inputs() {
    let mut checked = 0;
    for f in CORPUS {
        let amb = parse_formula(f, &ambiguous()).unwrap();
        if amb.total != 1 {
            continue;
        }
        let strict = parse_formula(f, &MathConfig::default()).unwrap();
        assert_eq!(strict.best().tree.sexpr(), amb.best().tree.sexpr(), "{f}");
        checked += 1;
    }
    assert!(checked >= 15, "only {checked} unambiguous fixtures");
}

fn no_implicit(tree: &OperatorTree) -> bool {
    let mut ok = true;
    tree.walk(&mut |n| {
        if let NodeKind::Apply { head, ops, .. } = &n.kind {
            ok &= !matches!(head, Head::Implicit(_)) && ops.iter().all(|o| !matches!(o, Head::Implicit(_)));
        }
    });
    ok
}

#[test]
fn invisible_insertion_is_total_and_idempotent() {
    for f in CORPUS {
        for r in parse_formula(f, &ambiguous()).unwrap().readings {
            let once = insert_invisibles(r.tree.clone());
            assert!(no_implicit(&once), "{f}");
            let twice = insert_invisibles(once.clone());
            assert_eq!(once, twice, "{f}");
        }
    }
}

#[test]
fn invisible_heads_have_expected_codepoints() {
    let t = insert_invisibles(parse_formula("b c", &MathConfig::default()).unwrap().best().tree.clone());
    let NodeKind::Apply { head, .. } = &t.kind else { panic!("{}", t.sexpr()) };
    assert_eq!(head.token().unwrap().text, "\u{2062}");

    let t = insert_invisibles(parse_formula(r"\sin x", &MathConfig::default()).unwrap().best().tree.clone());
    let NodeKind::Apply { ops, .. } = &t.kind else { panic!("{}", t.sexpr()) };
    assert_eq!(ops[0].token().unwrap().text, "\u{2061}");

    assert_eq!(InvisibleOp::InvisibleTimes.codepoint(), '\u{2062}');
    assert_eq!(InvisibleOp::ApplyFunction.codepoint(), '\u{2061}');
    assert_eq!(InvisibleOp::InvisibleSeparator.codepoint(), '\u{2063}');
}

#[test]
fn ids_unique_and_spans_nest() {
    for f in CORPUS {
        for r in parse_formula(f, &ambiguous()).unwrap().readings {
            let tree = insert_invisibles(r.tree);
            let mut ids = HashSet::new();
            tree.walk(&mut |n| {
                assert!(ids.insert(n.id), "{f}: duplicate id {}", n.id);
                for c in n.children() {
                    let synthetic = c.token().is_some_and(|t| t.synthetic);
                    if !synthetic {
                        assert!(c.span.0 >= n.span.0 && c.span.1 <= n.span.1, "{f}: {:?} outside {:?}", c.span, n.span);
                    }
                }
            });
        }
    }
}

#[test]
fn apply_heads_have_operator_roles() {
    use texmath::lexicon::Role;
    for f in CORPUS {
        for r in parse_formula(f, &ambiguous()).unwrap().readings {
            r.tree.walk(&mut |n| {
                if let NodeKind::Apply { head: Head::Node(h), .. } = &n.kind {
                    let Some(t) = h.head_token() else { return };
                    assert!(
                        matches!(
                            t.role(),
                            Role::Function | Role::Infix(_) | Role::Prefix | Role::Postfix | Role::Relation | Role::BigOperator | Role::Atom | Role::Unknown
                        ),
                        "{f}: head {:?}",
                        t.role()
                    );
                }
            });
        }
    }
}

fn hand_tree(tex: &str) -> OperatorTree {
    parse_formula(tex, &MathConfig::default()).unwrap().best().tree.clone()
}

/// Re-associate `a+b\cdot c` as `(a+b)\cdot c` without fences.
fn precedence_violating() -> OperatorTree {
    let respecting = hand_tree(r"a+b\cdot c");
    let NodeKind::Apply { head: plus_head, args: plus_args, form, .. } = respecting.kind.clone() else { panic!() };
    let NodeKind::Apply { head: dot_head, args: dot_args, .. } = plus_args[1].kind.clone() else { panic!() };
    let inner = OperatorTree::new(
        NodeKind::Apply { head: plus_head, args: vec![plus_args[0].clone(), dot_args[0].clone()], form, ops: vec![] },
        (0, 3),
    );
    let mut t = OperatorTree::new(
        NodeKind::Apply { head: dot_head, args: vec![inner, dot_args[1].clone()], form: Form::Infix, ops: vec![] },
        (0, 5),
    );
    t.renumber();
    t
}

#[test]
fn precedence_violation_scores_lower() {
    let table = ScoringTable::builtin();
    let good = hand_tree(r"a+b\cdot c");
    let bad = precedence_violating();
    assert_eq!(bad.sexpr(), "times(plus(a,b),c)");
    assert_eq!(penalty_tags(&bad), vec!["precedence-violation"]);
    assert!(score_reading(&good, table) > score_reading(&bad, table));
    assert_eq!(score_reading(&bad, table), hand_score(&["precedence-violation"]));
}

#[test]
fn each_penalty_strictly_decreases_score() {
    let table = ScoringTable::builtin();
    let cases: &[(&str, &str)] = &[
        (r"a \star b", "unknown-meaning-head"),
        ("(a", "unbalanced-fence"),
        ("a+", "incomplete-expression"),
    ];
    for (tex, tag) in cases {
        let p = parse_formula(tex, &MathConfig::default()).unwrap();
        let tags = penalty_tags(&p.best().tree);
        assert!(tags.contains(tag), "{tex}: {tags:?}");
        assert!(score_reading(&p.best().tree, table) <= -table.weight(tag));
        assert!(table.weight(tag) > 0.0);
    }
    for tag in PENALTY_TAGS {
        assert!(table.weight(tag) > 0.0, "{tag}");
    }
}

#[test]
fn relation_under_operator_is_penalised() {
    let chain = hand_tree("a=b");
    let c = hand_tree("c");
    let plus = hand_tree("x+y");
    let NodeKind::Apply { head, form, .. } = plus.kind else { panic!() };
    let mut t = OperatorTree::new(NodeKind::Apply { head, args: vec![chain, c], form, ops: vec![] }, (0, 5));
    t.renumber();
    assert_eq!(penalty_tags(&t), vec!["relation-under-operator"]);
    assert_eq!(score_reading(&t, ScoringTable::builtin()), hand_score(&["relation-under-operator"]));
}

#[test]
fn identical_trees_score_identically() {
    for f in CORPUS {
        let a = parse_formula(f, &ambiguous()).unwrap();
        let b = parse_formula(f, &ambiguous()).unwrap();
        for (x, y) in a.readings.iter().zip(&b.readings) {
            assert_eq!(x.tree, y.tree);
            assert_eq!(x.score.to_bits(), y.score.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn argmax_stable_under_scaling(factor in 0.001f64..1000.0, idx in 0usize..CORPUS.len()) {
        let f = CORPUS[idx];
        let base = parse_formula(f, &ambiguous()).unwrap();
        let scaled = MathConfig { scoring: Arc::new(ScoringTable::builtin().scaled(factor)), ..ambiguous() };
        let p = parse_formula(f, &scaled).unwrap();
        prop_assert_eq!(&base.best().tree, &p.best().tree);
    }
}

#[test]
fn custom_scoring_table_changes_ranking() {
    let table = ScoringTable::parse("wide-argument 0\nfunction-scope 0\n").unwrap();
    assert_eq!(table.weight("wide-argument"), 0.0);
    assert_eq!(table.weight("function-as-factor"), shipped_weights()["function-as-factor"]);
    assert!(ScoringTable::parse("no-such-tag 1").is_err());
    assert!(ScoringTable::parse("wide-argument -1").is_err());
    assert!(ScoringTable::parse("wide-argument").is_err());
}

#[test]
fn shipped_table_matches_builtin() {
    let w = shipped_weights();
    assert_eq!(w.len(), PENALTY_TAGS.len());
    for (tag, weight) in ScoringTable::builtin().iter() {
        assert_eq!(w[tag], weight, "{tag}");
    }
}

#[test]
fn unparsable_input_falls_back_to_row() {
    let p = parse_formula(", ,", &MathConfig::default()).unwrap();
    assert!(p.unparsed);
    assert_eq!(p.readings.len(), 1);
    assert!(matches!(p.best().tree.kind, NodeKind::Row { unparsed: true, .. }));
    assert!(p.diagnostics.iter().any(|d| d.category == "no-parse"));
}

#[test]
fn recovery_flags_imbalance_with_locator() {
    let p = parse_formula("x+(a", &MathConfig::default()).unwrap();
    assert!(p.recovered);
    let d = p.diagnostics.iter().find(|d| d.category == "delimiter-imbalance").expect("imbalance warning");
    assert_eq!(d.severity, Severity::Warning);
    let loc = d.locator.as_ref().unwrap();
    assert_eq!((loc.line, loc.column), (1, 3));
}

#[test]
fn strict_brace_imbalance_is_fatal() {
    let strict = MathConfig { strict: true, ..MathConfig::default() };
    assert!(parse_formula("{a", &strict).is_err());
    let lenient = parse_formula("{a", &MathConfig::default()).unwrap();
    assert!(lenient.diagnostics.iter().any(|d| d.severity == Severity::Warning));
}

#[test]
fn empty_formula_parses() {
    let p = parse_formula("", &MathConfig::default()).unwrap();
    assert!(!p.unparsed);
    assert_eq!(p.readings.len(), 1);
}

#[test]
fn lexicon_commands_do_not_warn() {
    for f in CORPUS {
        let p = parse_formula(f, &MathConfig::default()).unwrap();
        assert!(!p.diagnostics.iter().any(|d| d.category == "unknown-control-sequence"), "{f}: {:?}", p.diagnostics);
    }
    let p = parse_formula(r"\foo", &MathConfig::default()).unwrap();
    assert!(p.diagnostics.iter().any(|d| d.category == "unknown-control-sequence"));
    let _ = Lexicon::builtin();
}
