//! Earley recognition with Leo's right-recursion optimisation, and a shared
//! packed parse forest built from the finished chart.

mod bnf;
mod chart;
mod forest;
mod grammar;

pub use bnf::parse_bnf;
pub use chart::{recognize, recognize_within, Chart, Input, Item};
pub use forest::{build_forest, Enumeration, Forest, ForestNode, NodeId, NodeLabel, Packed, ParseTree};
pub use grammar::{Grammar, GrammarBuilder, GrammarError, Rule, Symbol};

/// Recognize and build the forest in one call.
pub fn parse<I: Input + ?Sized>(grammar: &Grammar, input: &I) -> (Chart, Forest) {
    let chart = recognize(grammar, input);
    let forest = build_forest(grammar, &chart, input);
    (chart, forest)
}
