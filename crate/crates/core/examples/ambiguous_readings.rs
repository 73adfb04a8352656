//! Rank every reading of ambiguous formulas.

use texmath::math::{parse_formula, MathConfig};
use texmath::mathml::emit_content;

fn main() {
    let config = MathConfig::ambiguous();
    for tex in [r"\sin x y", "f(x+1)", "a/b/c", r"|a|b|c|"] {
        let parsed = parse_formula(tex, &config).expect("parse");
        println!("{tex}: {} readings{}", parsed.total, if parsed.truncated { " (truncated)" } else { "" });
        for r in parsed.readings.iter().take(3) {
            println!("  {:>7.2} {}  {:?}", r.score, emit_content(&r.tree).to_xml(), r.provenance);
        }
    }
}
