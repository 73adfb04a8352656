//! Build a shared parse forest for an ambiguous grammar and list its trees.

use texmath::earley::{parse, parse_bnf};

fn main() {
    let grammar = parse_bnf("S -> S '+' S | 'a'").expect("grammar");
    for n in 2..=6 {
        let text = vec!["a"; n].join("+");
        let input = grammar.chars_to_terminals(&text).expect("terminals");
        let (chart, forest) = parse(&grammar, input.as_slice());
        println!("{text}: accepted {}, {} trees, {} forest nodes", chart.accepted(), forest.tree_count(), forest.node_count());
    }
    let input = grammar.chars_to_terminals("a+a+a+a").expect("terminals");
    let (_, forest) = parse(&grammar, input.as_slice());
    for tree in forest.enumerate(10).trees {
        println!("  {}", tree.bracketed(&grammar));
    }
}
