mod support;

use proptest::prelude::*;
use texmath::math::{parse_formula, MathConfig, OperatorTree};
use texmath::mathml::*;

fn tree(tex: &str) -> OperatorTree {
    parse_formula(tex, &MathConfig::default()).unwrap().best().tree.clone()
}

fn pres(tex: &str) -> XmlNode {
    emit_presentation(&tree(tex))
}

#[test]
fn plus_uses_italic_smp_letters() {
    let m = pres("a+b");
    let row = m.elements().next().unwrap();
    assert_eq!(row.name, "mrow");
    let kids: Vec<_> = row.elements().map(|e| (e.name.as_str(), e.text())).collect();
    // MATHEMATICAL ITALIC SMALL A sits 26 past MATHEMATICAL ITALIC CAPITAL A (U+1D434)
    let italic_a = char::from_u32(0x1D434 + 26).unwrap().to_string();
    let italic_b = char::from_u32(0x1D434 + 27).unwrap().to_string();
    assert_eq!(kids, vec![("mi", italic_a), ("mo", "+".to_string()), ("mi", italic_b)]);
}

#[test]
fn fences_become_mo_in_mrow() {
    let m = pres("(x)");
    let row = m.elements().next().unwrap();
    let kids: Vec<_> = row.elements().map(|e| e.name.as_str()).collect();
    assert_eq!(kids, ["mo", "mi", "mo"]);
    assert!(!m.to_xml().contains("mfenced"));
}

#[test]
fn juxtaposition_carries_invisible_times() {
    let m = pres("b c");
    let row = m.elements().next().unwrap();
    let texts: Vec<_> = row.elements().map(|e| e.text()).collect();
    assert_eq!(texts[1], "\u{2062}");
    assert_eq!(row.elements().nth(1).unwrap().name, "mo");
}

#[test]
fn function_application_carries_apply_function() {
    let m = pres(r"\sin x");
    assert!(m.to_xml().contains("\u{2061}"));
}

#[test]
fn content_plus_and_numbers() {
    let c = emit_content(&tree("a+b"));
    let app = c.elements().next().unwrap();
    let names: Vec<_> = app.elements().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["plus", "ci", "ci"]);
    let n = emit_content(&tree("42"));
    let cn = n.elements().next().unwrap();
    assert_eq!((cn.name.as_str(), cn.text()), ("cn", "42".to_string()));
    for el in [&c, &n] {
        el.elements().next().unwrap().walk(&mut |e| assert!(e.attr("id").is_some(), "{}", e.name));
    }
}

#[test]
fn unknown_operator_escapes() {
    let c = emit_content(&tree(r"a \star b"));
    let app = c.elements().next().unwrap();
    let head = app.elements().next().unwrap();
    assert_eq!(head.name, "csymbol");
    assert_eq!(head.attr("cd"), Some(UNKNOWN_CD));
    assert_eq!(head.text(), "\u{22C6}");
    let rest: Vec<_> = app.elements().skip(1).map(|e| e.name.as_str()).collect();
    assert_eq!(rest, ["ci", "ci"]);
}

#[test]
fn parallel_plus_has_three_token_pairs() {
    let xml = emit_parallel(&tree("a+b")).to_xml();
    support::check_parallel(&xml).unwrap();
    let doc = roxmltree::Document::parse(&xml).unwrap();
    let tokens = doc.descendants().filter(|n| n.attribute("xref").is_some() && n.tag_name().name() != "apply").count();
    assert_eq!(tokens, 3);
}

#[test]
fn parallel_single_atom() {
    let p = emit_parallel(&tree("x"));
    let sem = p.elements().next().unwrap();
    let mut kids = sem.elements();
    let mi = kids.next().unwrap();
    assert_eq!((mi.name.as_str(), mi.attr("id")), ("mi", Some("p1")));
    let ann = kids.next().unwrap();
    assert_eq!(ann.attr("encoding"), Some("MathML-Content"));
    let ci = ann.elements().next().unwrap();
    assert_eq!((ci.name.as_str(), ci.attr("xref")), ("ci", Some("p1")));
}

#[test]
fn math_root_has_namespace() {
    assert_eq!(pres("x").attr("xmlns"), Some(MATHML_NS));
}

#[test]
fn presentation_ids_are_preorder() {
    let m = pres(r"\frac{a}{b}+c");
    let mut ids = Vec::new();
    m.walk(&mut |e| ids.extend(e.attr("id").map(String::from)));
    let want: Vec<String> = (1..=ids.len()).map(|i| format!("p{i}")).collect();
    assert_eq!(ids, want);
}

#[test]
fn emission_is_deterministic() {
    for f in [r"\frac{-b \pm \sqrt{b^2-4ac}}{2a}", r"a<b\le c", r"\sum_{i=1}^n a_i"] {
        let t = tree(f);
        assert_eq!(emit_parallel(&t).to_xml(), emit_parallel(&t).to_xml());
    }
}

#[test]
fn structural_examples_are_consistent() {
    let corpus = [
        r"\frac{-b \pm \sqrt{b^2-4ac}}{2a}",
        r"a<b\le c",
        r"a=b=c",
        r"\sum_{i=1}^n a_i",
        r"\int_0^1 f(x)\,dx",
        r"\lim_{n\to\infty} \frac{1}{n}",
        r"\{x \mid x>0\}",
        r"\binom{n}{k}",
        r"\sqrt[3]{x}",
        r"|x|",
        r"\lfloor x \rfloor",
        r"\overline{ab}",
        r"\hat{x}",
        "f'(x)",
        "(a,b)",
        "a_{ij}",
        r"\mathbf{v}\cdot\mathbb{R}",
        r"\text{if } x>0",
        ", ,",
        "(a",
        "",
        r"\log_2 n",
        r"\sin^2 x",
        "x^{y^z}",
        r"\sqrt{\frac{a}{b}}",
        "a \\\\ b",
    ];
    for f in corpus {
        let xml = emit_parallel(&tree(f)).to_xml();
        support::check_parallel(&xml).unwrap_or_else(|e| panic!("{f}: {e}\n{xml}"));
        let pres = emit_presentation(&tree(f)).to_xml();
        roxmltree::Document::parse(&pres).unwrap();
        let content = emit_content(&tree(f)).to_xml();
        roxmltree::Document::parse(&content).unwrap();
    }
}

#[test]
fn escapes_follow_the_unknown_path_only() {
    let xml = emit_parallel(&tree(r"\sup_n a_n + \max(a,b)")).to_xml();
    assert!(!support::escapes(&xml).contains(&"sup".to_string()));
    assert!(xml.contains(&format!("cd=\"{PRIVATE_CD}\"")));
}

fn piece() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        "[a-e]".prop_map(String::from),
        "[0-9]{1,2}".prop_map(String::from),
        Just(r"\alpha".to_string()),
        Just(r"\infty".to_string()),
        Just(r"\pi".to_string()),
    ];
    leaf.prop_recursive(4, 40, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}+{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!(r"{a}\cdot {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}={b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!(r"{a}\le {b}<{a}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!(r"\frac{{{a}}}{{{b}}}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{{{a}}}^{{{b}}}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{{{a}}}_{{{b}}}")),
            inner.clone().prop_map(|a| format!("({a})")),
            inner.clone().prop_map(|a| format!("|{a}|")),
            inner.clone().prop_map(|a| format!(r"\sqrt{{{a}}}")),
            inner.clone().prop_map(|a| format!(r"\sin {a}")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!(r"\sum_{{i=1}}^n {a}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a},{b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!(r"{a} \star {b}")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn random_trees_keep_the_bijection(f in piece()) {
        let p = parse_formula(&f, &MathConfig::ambiguous()).unwrap();
        for r in p.readings.iter().take(4) {
            let xml = emit_parallel(&r.tree).to_xml();
            prop_assert!(support::check_parallel(&xml).is_ok(), "{}: {:?}\n{}", f, support::check_parallel(&xml), xml);
        }
    }
}
