//! Parallel presentation and content markup for one formula.

use texmath::math::{parse_formula, MathConfig};
use texmath::mathml::emit_parallel;

fn main() {
    let tex = std::env::args().nth(1).unwrap_or_else(|| r"\int_0^1 \frac{\sin x}{x}\,dx".to_string());
    let parsed = parse_formula(&tex, &MathConfig::default()).expect("parse");
    println!("{}", emit_parallel(&parsed.best().tree).to_pretty_xml());
    for d in &parsed.diagnostics {
        println!("{:?}: {} [{}]", d.severity, d.message, d.category);
    }
}
