use std::sync::OnceLock;

use crate::earley::{parse_bnf, Grammar};

/// Lexeme classes; each is one terminal of the math grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Id,
    Num,
    Atom,
    Func,
    BigOp,
    Rel,
    Logic,
    Set,
    Add,
    Sign,
    Mul,
    Juxt,
    Comp,
    Prefix,
    Postfix,
    Open,
    Close,
    Bar,
    Sep,
    Sub,
    Sup,
}

impl Term {
    pub const ALL: [Term; 21] = [
        Term::Id,
        Term::Num,
        Term::Atom,
        Term::Func,
        Term::BigOp,
        Term::Rel,
        Term::Logic,
        Term::Set,
        Term::Add,
        Term::Sign,
        Term::Mul,
        Term::Juxt,
        Term::Comp,
        Term::Prefix,
        Term::Postfix,
        Term::Open,
        Term::Close,
        Term::Bar,
        Term::Sep,
        Term::Sub,
        Term::Sup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Term::Id => "ID",
            Term::Num => "NUM",
            Term::Atom => "ATOM",
            Term::Func => "FUNC",
            Term::BigOp => "BIGOP",
            Term::Rel => "REL",
            Term::Logic => "LOGIC",
            Term::Set => "SET",
            Term::Add => "ADD",
            Term::Sign => "SIGN",
            Term::Mul => "MUL",
            Term::Juxt => "JUXT",
            Term::Comp => "COMP",
            Term::Prefix => "PREFIX",
            Term::Postfix => "POSTFIX",
            Term::Open => "OPEN",
            Term::Close => "CLOSE",
            Term::Bar => "BAR",
            Term::Sep => "SEP",
            Term::Sub => "SUB",
            Term::Sup => "SUP",
        }
    }
}

const MAIN: &str = include_str!("../../data/math.bnf");
const RECOVERY: &str = include_str!("../../data/math_recovery.bnf");

/// A loaded math grammar plus its terminal numbering.
pub struct MathGrammar {
    pub grammar: Grammar,
    terminals: Vec<u32>,
}

impl MathGrammar {
    fn load(text: &str) -> MathGrammar {
        let grammar = parse_bnf(text).expect("shipped math grammar is valid");
        let terminals = Term::ALL.iter().map(|t| grammar.terminal(t.name()).unwrap_or(u32::MAX)).collect();
        MathGrammar { grammar, terminals }
    }

    pub fn main() -> &'static MathGrammar {
        static CELL: OnceLock<MathGrammar> = OnceLock::new();
        CELL.get_or_init(|| MathGrammar::load(MAIN))
    }

    /// The main grammar extended with error-recovery productions.
    pub fn recovery() -> &'static MathGrammar {
        static CELL: OnceLock<MathGrammar> = OnceLock::new();
        CELL.get_or_init(|| MathGrammar::load(&format!("{MAIN}\n{RECOVERY}")))
    }

    pub fn terminal(&self, term: Term) -> u32 {
        self.terminals[Term::ALL.iter().position(|t| *t == term).expect("listed")]
    }

    pub fn tag(&self, rule: u32) -> &str {
        &self.grammar.rule(rule).tag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammars_load_and_share_rule_ids() {
        let main = MathGrammar::main();
        let rec = MathGrammar::recovery();
        assert!(rec.grammar.rules().len() > main.grammar.rules().len());
        for r in main.grammar.rules() {
            assert_eq!(rec.grammar.rule(r.id).tag, r.tag);
        }
        for t in Term::ALL {
            assert_ne!(main.terminal(t), u32::MAX, "{t:?} unused by the grammar");
        }
    }
}
