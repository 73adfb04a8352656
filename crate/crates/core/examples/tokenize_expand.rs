//! Tokenize a formula, expand user and texvc macros, and print the result.

use texmath::lexicon::Lexicon;
use texmath::math::math_macros;
use texmath::tex::{detokenize, expand, tokenize, CatcodeTable, ExpansionLimits};

fn main() {
    let source = r"\def\sq#1{#1^2}\sq{x}+\R";
    let tokens = tokenize(source, "example", &CatcodeTable::plain()).expect("tokenize");
    println!("{} tokens", tokens.len());
    for t in tokens.iter().take(8) {
        println!("  {:?} at {}:{}", t.kind, t.locator.line, t.locator.column);
    }
    let (expanded, warnings) = expand(tokens, &math_macros(&Lexicon::default()), ExpansionLimits::default()).expect("expand");
    println!("expanded: {}", detokenize(&expanded));
    for w in warnings {
        println!("warning: {} [{}]", w.message, w.category);
    }
}
