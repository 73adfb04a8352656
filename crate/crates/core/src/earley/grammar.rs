use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Nonterminal(u32),
    Terminal(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: u32,
    pub lhs: u32,
    pub rhs: Vec<Symbol>,
    /// Free-form label used by tree builders.
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("undeclared symbol {0:?}")]
    Undeclared(String),
    #[error("start symbol {0:?} has no rules")]
    BadStart(String),
    #[error("nonterminal {0:?} derives itself with an empty yield; cyclic grammars are rejected")]
    Cyclic(String),
    #[error("grammar line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// A validated context-free grammar. Immutable once built.
#[derive(Clone, Debug)]
pub struct Grammar {
    nonterminals: Vec<String>,
    terminals: Vec<String>,
    rules: Vec<Rule>,
    start: u32,
    nullable: Vec<bool>,
    by_lhs: Vec<Vec<u32>>,
}

impl Grammar {
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: u32) -> &Rule {
        &self.rules[id as usize]
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn nullable(&self, nt: u32) -> bool {
        self.nullable[nt as usize]
    }

    pub fn rules_for(&self, nt: u32) -> &[u32] {
        &self.by_lhs[nt as usize]
    }

    pub fn nonterminal_count(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals.len()
    }

    pub fn nonterminal_name(&self, nt: u32) -> &str {
        &self.nonterminals[nt as usize]
    }

    pub fn terminal_name(&self, t: u32) -> &str {
        &self.terminals[t as usize]
    }

    pub fn terminal(&self, name: &str) -> Option<u32> {
        self.terminals.iter().position(|t| t == name).map(|i| i as u32)
    }

    pub fn nonterminal(&self, name: &str) -> Option<u32> {
        self.nonterminals.iter().position(|t| t == name).map(|i| i as u32)
    }

    pub fn symbol_name(&self, sym: Symbol) -> &str {
        match sym {
            Symbol::Nonterminal(n) => self.nonterminal_name(n),
            Symbol::Terminal(t) => self.terminal_name(t),
        }
    }

    /// Map each character of `text` to the terminal of the same name.
    pub fn chars_to_terminals(&self, text: &str) -> Option<Vec<u32>> {
        text.chars().map(|c| self.terminal(&c.to_string())).collect()
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            write!(f, "{} ->", self.nonterminal_name(r.lhs))?;
            if r.rhs.is_empty() {
                write!(f, " ε")?;
            }
            for s in &r.rhs {
                match s {
                    Symbol::Nonterminal(n) => write!(f, " {}", self.nonterminal_name(*n))?,
                    Symbol::Terminal(t) => write!(f, " '{}'", self.terminal_name(*t))?,
                }
            }
            if !r.tag.is_empty() {
                write!(f, " @{}", r.tag)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Default, Debug, Clone)]
pub struct GrammarBuilder {
    nonterminals: Vec<String>,
    nt_index: HashMap<String, u32>,
    terminals: Vec<String>,
    t_index: HashMap<String, u32>,
    rules: Vec<(u32, Vec<Symbol>, String)>,
}

impl GrammarBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nonterminal(&mut self, name: &str) -> Symbol {
        let next = self.nonterminals.len() as u32;
        let id = *self.nt_index.entry(name.to_string()).or_insert_with(|| {
            self.nonterminals.push(name.to_string());
            next
        });
        Symbol::Nonterminal(id)
    }

    pub fn terminal(&mut self, name: &str) -> Symbol {
        let next = self.terminals.len() as u32;
        let id = *self.t_index.entry(name.to_string()).or_insert_with(|| {
            self.terminals.push(name.to_string());
            next
        });
        Symbol::Terminal(id)
    }

    /// Add `lhs -> rhs`; returns the rule id.
    pub fn rule(&mut self, lhs: Symbol, rhs: Vec<Symbol>, tag: &str) -> u32 {
        let Symbol::Nonterminal(lhs) = lhs else {
            panic!("rule lhs must be a nonterminal");
        };
        self.rules.push((lhs, rhs, tag.to_string()));
        (self.rules.len() - 1) as u32
    }

    pub fn build(self, start: &str) -> Result<Grammar, GrammarError> {
        let start_id = *self.nt_index.get(start).ok_or_else(|| GrammarError::Undeclared(start.to_string()))?;
        let n = self.nonterminals.len();
        let rules: Vec<Rule> = self
            .rules
            .into_iter()
            .enumerate()
            .map(|(i, (lhs, rhs, tag))| Rule { id: i as u32, lhs, rhs, tag })
            .collect();
        for r in &rules {
            for s in &r.rhs {
                let ok = match *s {
                    Symbol::Nonterminal(x) => (x as usize) < n,
                    Symbol::Terminal(t) => (t as usize) < self.terminals.len(),
                };
                if !ok {
                    return Err(GrammarError::Undeclared(format!("{s:?}")));
                }
            }
        }
        let mut by_lhs = vec![Vec::new(); n];
        for r in &rules {
            by_lhs[r.lhs as usize].push(r.id);
        }
        if by_lhs[start_id as usize].is_empty() {
            return Err(GrammarError::BadStart(start.to_string()));
        }
        let nullable = compute_nullable(n, &rules);
        let g = Grammar { nonterminals: self.nonterminals, terminals: self.terminals, rules, start: start_id, nullable, by_lhs };
        check_cycles(&g)?;
        Ok(g)
    }
}

fn compute_nullable(n: usize, rules: &[Rule]) -> Vec<bool> {
    let mut nullable = vec![false; n];
    loop {
        let mut changed = false;
        for r in rules {
            if nullable[r.lhs as usize] {
                continue;
            }
            let all = r.rhs.iter().all(|s| matches!(s, Symbol::Nonterminal(x) if nullable[*x as usize]));
            if all {
                nullable[r.lhs as usize] = true;
                changed = true;
            }
        }
        if !changed {
            return nullable;
        }
    }
}

/// Reject `A =>+ A` derivations (unit chains through nullable context).
fn check_cycles(g: &Grammar) -> Result<(), GrammarError> {
    let n = g.nonterminal_count();
    let mut edges: Vec<Vec<u32>> = vec![Vec::new(); n];
    for r in g.rules() {
        let nt_only: Option<Vec<u32>> = r
            .rhs
            .iter()
            .map(|s| match s {
                Symbol::Nonterminal(x) => Some(*x),
                Symbol::Terminal(_) => None,
            })
            .collect();
        let Some(nts) = nt_only else { continue };
        for (i, &b) in nts.iter().enumerate() {
            let others_nullable = nts.iter().enumerate().all(|(j, &x)| j == i || g.nullable(x));
            if others_nullable {
                edges[r.lhs as usize].push(b);
            }
        }
    }
    // iterative three-colour DFS
    let mut colour = vec![0u8; n];
    for root in 0..n {
        if colour[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = edges[v].get(*next) {
                *next += 1;
                match colour[w as usize] {
                    0 => {
                        colour[w as usize] = 1;
                        stack.push((w as usize, 0));
                    }
                    1 => return Err(GrammarError::Cyclic(g.nonterminal_name(w).to_string())),
                    _ => {}
                }
            } else {
                colour[v] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}
