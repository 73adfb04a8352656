//! Exhaustive reference parser for cross-checking the Earley forest.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use texmath::earley::{parse, Grammar, GrammarBuilder, ParseTree, Symbol};

pub const TREE_CAP: usize = 400;

/// Exhaustive top-down enumeration with memoization on (symbol, span).
pub struct Oracle<'a> {
    g: &'a Grammar,
    input: &'a [u32],
    counts: HashMap<(u32, usize, usize), u128>,
    trees: HashMap<(u32, usize, usize), Vec<ParseTree>>,
    min_len: Vec<usize>,
}

fn min_lengths(g: &Grammar) -> Vec<usize> {
    let mut min = vec![usize::MAX; g.nonterminal_count()];
    loop {
        let mut changed = false;
        for r in g.rules() {
            let len = r.rhs.iter().try_fold(0usize, |acc, s| match s {
                Symbol::Terminal(_) => Some(acc + 1),
                Symbol::Nonterminal(n) => (min[*n as usize] != usize::MAX).then(|| acc + min[*n as usize]),
            });
            if let Some(len) = len {
                if len < min[r.lhs as usize] {
                    min[r.lhs as usize] = len;
                    changed = true;
                }
            }
        }
        if !changed {
            return min;
        }
    }
}

impl<'a> Oracle<'a> {
    pub fn new(g: &'a Grammar, input: &'a [u32]) -> Self {
        Oracle { g, input, counts: HashMap::new(), trees: HashMap::new(), min_len: min_lengths(g) }
    }

    /// Shortest yield of a symbol sequence; `None` if it derives nothing.
    fn seq_min(&self, rhs: &[Symbol]) -> Option<usize> {
        rhs.iter().try_fold(0usize, |acc, s| match s {
            Symbol::Terminal(_) => Some(acc + 1),
            Symbol::Nonterminal(n) => (self.min_len[*n as usize] != usize::MAX).then(|| acc + self.min_len[*n as usize]),
        })
    }

    pub fn count(&mut self, nt: u32, i: usize, j: usize) -> u128 {
        if let Some(&c) = self.counts.get(&(nt, i, j)) {
            return c;
        }
        let mut total = 0u128;
        for r in self.g.rules_for(nt).to_vec() {
            let rhs = self.g.rule(r).rhs.clone();
            total = total.saturating_add(self.count_seq(&rhs, i, j));
        }
        self.counts.insert((nt, i, j), total);
        total
    }

    fn count_seq(&mut self, rhs: &[Symbol], i: usize, j: usize) -> u128 {
        let Some((&first, rest)) = rhs.split_first() else {
            return u128::from(i == j);
        };
        let Some(rest_min) = self.seq_min(rest) else { return 0 };
        let mut total = 0u128;
        for m in i..=j {
            if m + rest_min > j {
                break;
            }
            let head = match first {
                Symbol::Terminal(t) => u128::from(m == i + 1 && self.input[i] == t),
                Symbol::Nonterminal(n) => self.count(n, i, m),
            };
            if head == 0 {
                continue;
            }
            let tail = self.count_seq(rest, m, j);
            total = total.saturating_add(head.saturating_mul(tail));
        }
        total
    }

    pub fn trees(&mut self, nt: u32, i: usize, j: usize) -> Vec<ParseTree> {
        if let Some(t) = self.trees.get(&(nt, i, j)) {
            return t.clone();
        }
        let mut out = Vec::new();
        for r in self.g.rules_for(nt).to_vec() {
            let rhs = self.g.rule(r).rhs.clone();
            for children in self.seq_trees(&rhs, i, j) {
                out.push(ParseTree::Node { rule: r, start: i as u32, end: j as u32, children });
            }
        }
        self.trees.insert((nt, i, j), out.clone());
        out
    }

    fn seq_trees(&mut self, rhs: &[Symbol], i: usize, j: usize) -> Vec<Vec<ParseTree>> {
        let Some((&first, rest)) = rhs.split_first() else {
            return if i == j { vec![Vec::new()] } else { Vec::new() };
        };
        let Some(rest_min) = self.seq_min(rest) else { return Vec::new() };
        let mut out = Vec::new();
        for m in i..=j {
            if m + rest_min > j {
                break;
            }
            let heads = match first {
                Symbol::Terminal(t) if m == i + 1 && self.input[i] == t => {
                    vec![ParseTree::Leaf { terminal: t, position: i as u32 }]
                }
                Symbol::Terminal(_) => continue,
                Symbol::Nonterminal(n) => self.trees(n, i, m),
            };
            if heads.is_empty() {
                continue;
            }
            let tails = self.seq_trees(rest, m, j);
            for h in &heads {
                for t in &tails {
                    let mut v = vec![h.clone()];
                    v.extend(t.iter().cloned());
                    out.push(v);
                }
            }
        }
        out
    }
}

pub fn random_grammar(rng: &mut ChaCha8Rng) -> Option<Grammar> {
    let mut b = GrammarBuilder::new();
    let n_nt = rng.gen_range(1..=6);
    let nts: Vec<Symbol> = (0..n_nt).map(|i| b.nonterminal(&format!("N{i}"))).collect();
    let ts: Vec<Symbol> = ["a", "b", "c"].iter().map(|t| b.terminal(t)).collect();
    let n_rules = rng.gen_range(1..=12);
    // make sure the start symbol has at least one rule
    for k in 0..n_rules {
        let lhs = if k == 0 { nts[0] } else { nts[rng.gen_range(0..n_nt)] };
        let len = rng.gen_range(0..=3);
        let rhs = (0..len)
            .map(|_| if rng.gen_bool(0.5) { nts[rng.gen_range(0..n_nt)] } else { ts[rng.gen_range(0..3)] })
            .collect();
        b.rule(lhs, rhs, "");
    }
    b.build("N0").ok()
}

/// Sample a sentence by random expansion, bounded in depth.
pub fn sample_sentence(g: &Grammar, rng: &mut ChaCha8Rng) -> Option<Vec<u32>> {
    let mut out = Vec::new();
    let mut stack = vec![(Symbol::Nonterminal(g.start()), 0usize)];
    while let Some((sym, depth)) = stack.pop() {
        match sym {
            Symbol::Terminal(t) => out.push(t),
            Symbol::Nonterminal(n) => {
                if depth > 8 || out.len() > 10 {
                    return None;
                }
                let rules = g.rules_for(n);
                if rules.is_empty() {
                    return None;
                }
                let r = g.rule(rules[rng.gen_range(0..rules.len())]);
                for s in r.rhs.iter().rev() {
                    stack.push((*s, depth + 1));
                }
            }
        }
    }
    (out.len() <= 10).then_some(out)
}

pub fn check_tree(g: &Grammar, t: &ParseTree, input: &[u32]) {
    match t {
        ParseTree::Leaf { terminal, position } => assert_eq!(input[*position as usize], *terminal),
        ParseTree::Node { rule, start, end, children } => {
            let r = g.rule(*rule);
            assert_eq!(r.rhs.len(), children.len());
            let mut pos = *start;
            for (sym, c) in r.rhs.iter().zip(children) {
                let (s, e) = c.span();
                assert_eq!(s, pos);
                pos = e;
                match (sym, c) {
                    (Symbol::Terminal(a), ParseTree::Leaf { terminal, .. }) => assert_eq!(a, terminal),
                    (Symbol::Nonterminal(a), ParseTree::Node { rule, .. }) => assert_eq!(*a, g.rule(*rule).lhs),
                    _ => panic!("child does not match rule symbol"),
                }
                check_tree(g, c, input);
            }
            assert_eq!(pos, *end);
        }
    }
}

#[derive(Debug, Default)]
pub struct SuiteStats {
    pub grammars: usize,
    pub inputs: usize,
    pub accepted: usize,
    pub ambiguous: usize,
    /// Inputs where acceptance, tree count or the tree set disagreed.
    pub mismatches: Vec<String>,
}

/// Parse inputs of length at most 10 (random strings plus sampled
/// sentences) for `grammars` random grammars and compare against the
/// exhaustive parser.
pub fn run_suite(seed: u64, grammars: usize) -> SuiteStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = SuiteStats::default();
    while stats.grammars < grammars {
        let Some(g) = random_grammar(&mut rng) else { continue };
        stats.grammars += 1;
        let mut inputs: Vec<Vec<u32>> = (0..6)
            .map(|_| {
                let len = rng.gen_range(0..=10);
                (0..len).map(|_| rng.gen_range(0..3u32)).collect()
            })
            .collect();
        for _ in 0..20 {
            if let Some(s) = sample_sentence(&g, &mut rng) {
                inputs.push(s);
            }
            if inputs.len() >= 12 {
                break;
            }
        }
        for input in &inputs {
            stats.inputs += 1;
            let (chart, forest) = parse(&g, input.as_slice());
            let mut oracle = Oracle::new(&g, input);
            let expect = oracle.count(g.start(), 0, input.len());
            let mut fail = |what: &str| stats.mismatches.push(format!("{what}\ngrammar:\n{g}input {input:?}"));
            if chart.accepted() != (expect > 0) {
                fail("acceptance");
            }
            if forest.tree_count() != expect {
                fail("tree count");
            }
            if expect as usize <= TREE_CAP && expect > 0 {
                let e = forest.enumerate(TREE_CAP);
                let mut got = e.trees.clone();
                for t in &got {
                    check_tree(&g, t, input);
                }
                let mut want = oracle.trees(g.start(), 0, input.len());
                got.sort();
                want.sort();
                if e.truncated || got != want {
                    fail("tree set");
                }
                if forest.enumerate(TREE_CAP).trees != e.trees {
                    fail("enumeration order");
                }
            }
            if expect > 0 {
                stats.accepted += 1;
            }
            if expect > 1 {
                stats.ambiguous += 1;
            }
        }
    }
    stats
}
