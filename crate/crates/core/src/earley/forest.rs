use std::collections::HashMap;

use super::chart::{completed_items, Chart, Input, Item};
use super::grammar::{Grammar, Symbol};

pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeLabel {
    Symbol(Symbol),
    /// First `dot` symbols of `rule`; appears only inside binarized rules.
    Intermediate { rule: u32, dot: u32 },
}

/// One way of deriving a node: the rule, the split position, and up to two
/// children (left is the rule prefix, right the last symbol).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Packed {
    pub rule: u32,
    pub split: u32,
    pub left: Option<NodeId>,
    pub right: Option<NodeId>,
}

#[derive(Clone, Debug)]
pub struct ForestNode {
    pub label: NodeLabel,
    pub start: u32,
    pub end: u32,
    /// Sorted by `(rule, split)`. Empty for terminal leaves.
    pub packed: Vec<Packed>,
}

/// Shared packed parse forest.
#[derive(Clone, Debug, Default)]
pub struct Forest {
    nodes: Vec<ForestNode>,
    root: Option<NodeId>,
    counts: Vec<u128>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParseTree {
    Leaf { terminal: u32, position: u32 },
    Node { rule: u32, start: u32, end: u32, children: Vec<ParseTree> },
}

impl ParseTree {
    pub fn span(&self) -> (u32, u32) {
        match self {
            ParseTree::Leaf { position, .. } => (*position, position + 1),
            ParseTree::Node { start, end, .. } => (*start, *end),
        }
    }

    /// Compact bracketed form, e.g. `S(S('a') '+' S('a'))`.
    pub fn bracketed(&self, g: &Grammar) -> String {
        let mut out = String::new();
        self.write_bracketed(g, &mut out);
        out
    }

    fn write_bracketed(&self, g: &Grammar, out: &mut String) {
        match self {
            ParseTree::Leaf { terminal, .. } => {
                out.push('\'');
                out.push_str(g.terminal_name(*terminal));
                out.push('\'');
            }
            ParseTree::Node { rule, children, .. } => {
                out.push_str(g.nonterminal_name(g.rule(*rule).lhs));
                out.push('(');
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    c.write_bracketed(g, out);
                }
                out.push(')');
            }
        }
    }
}

/// Result of enumerating a forest under a tree cap.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub trees: Vec<ParseTree>,
    /// True when the forest holds more trees than were returned.
    pub truncated: bool,
    /// Total number of trees, saturating at `u128::MAX`.
    pub total: u128,
}

impl Forest {
    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &ForestNode {
        &self.nodes[id as usize]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Number of distinct parse trees (saturating).
    pub fn tree_count(&self) -> u128 {
        self.root.map_or(0, |r| self.counts[r as usize])
    }

    /// Ambiguous nodes: nodes with more than one packed alternative.
    pub fn ambiguous_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| n.packed.len() > 1).count()
    }

    /// Return up to `limit` trees in a fixed order: alternatives are taken by
    /// `(rule, split)`, left subtree varying slowest.
    pub fn enumerate(&self, limit: usize) -> Enumeration {
        let total = self.tree_count();
        let take = (limit as u128).min(total) as usize;
        let trees = (0..take).map(|k| self.tree(k as u128).expect("index below count")).collect();
        Enumeration { trees, truncated: total > take as u128, total }
    }

    /// The `k`-th tree in enumeration order.
    pub fn tree(&self, k: u128) -> Option<ParseTree> {
        let root = self.root?;
        if k >= self.counts[root as usize] {
            return None;
        }
        Some(self.build_tree(root, k))
    }

    fn build_tree(&self, root: NodeId, k: u128) -> ParseTree {
        struct Frame {
            rule: u32,
            start: u32,
            end: u32,
            pending: Vec<(NodeId, u128)>,
            children: Vec<ParseTree>,
        }
        let open = |id: NodeId, k: u128| -> Result<Frame, ParseTree> {
            let node = self.node(id);
            if let NodeLabel::Symbol(Symbol::Terminal(t)) = node.label {
                return Err(ParseTree::Leaf { terminal: t, position: node.start });
            }
            let mut pending = Vec::new();
            let rule = self.expand(id, k, &mut pending);
            pending.reverse();
            Ok(Frame { rule, start: node.start, end: node.end, pending, children: Vec::new() })
        };
        let mut stack = match open(root, k) {
            Ok(f) => vec![f],
            Err(leaf) => return leaf,
        };
        loop {
            let top = stack.last_mut().unwrap();
            if let Some((child, ck)) = top.pending.pop() {
                match open(child, ck) {
                    Ok(f) => stack.push(f),
                    Err(leaf) => top.children.push(leaf),
                }
                continue;
            }
            let done = stack.pop().unwrap();
            let tree = ParseTree::Node { rule: done.rule, start: done.start, end: done.end, children: done.children };
            match stack.last_mut() {
                Some(parent) => parent.children.push(tree),
                None => return tree,
            }
        }
    }

    /// Pick the alternative for index `k` of a node and push the symbol
    /// children, flattening intermediate nodes. Returns the rule used.
    fn expand(&self, id: NodeId, mut k: u128, out: &mut Vec<(NodeId, u128)>) -> u32 {
        let mut right_parts: Vec<(NodeId, u128)> = Vec::new();
        let mut current = id;
        let rule;
        loop {
            let node = self.node(current);
            let mut chosen = None;
            for p in &node.packed {
                let c = self.packed_count(p);
                if k < c {
                    chosen = Some(*p);
                    break;
                }
                k -= c;
            }
            let p = chosen.expect("index within node count");
            let rc = p.right.map_or(1, |r| self.counts[r as usize]);
            let (lk, rk) = (k / rc, k % rc);
            if let Some(r) = p.right {
                right_parts.push((r, rk));
            }
            match p.left {
                Some(l) if matches!(self.node(l).label, NodeLabel::Intermediate { .. }) => {
                    current = l;
                    k = lk;
                }
                Some(l) => {
                    right_parts.push((l, lk));
                    rule = p.rule;
                    break;
                }
                None => {
                    rule = p.rule;
                    break;
                }
            }
        }
        right_parts.reverse();
        out.extend(right_parts);
        rule
    }

    fn packed_count(&self, p: &Packed) -> u128 {
        let l = p.left.map_or(1, |l| self.counts[l as usize]);
        let r = p.right.map_or(1, |r| self.counts[r as usize]);
        l.saturating_mul(r)
    }

    fn compute_counts(&mut self) {
        let n = self.nodes.len();
        self.counts = vec![0; n];
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        let Some(root) = self.root else { return };
        let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
        state[root as usize] = 1;
        while let Some(&mut (id, ref mut next)) = stack.last_mut() {
            let node = &self.nodes[id as usize];
            if *next < 2 * node.packed.len() {
                let p = &node.packed[*next / 2];
                let child = if *next % 2 == 0 { p.left } else { p.right };
                *next += 1;
                if let Some(c) = child.filter(|c| state[*c as usize] == 0) {
                    state[c as usize] = 1;
                    stack.push((c, 0));
                }
                continue;
            }
            let count = if let NodeLabel::Symbol(Symbol::Terminal(_)) = node.label {
                1
            } else {
                node.packed.iter().fold(0u128, |acc, p| acc.saturating_add(self.packed_count(p)))
            };
            self.counts[id as usize] = count;
            state[id as usize] = 2;
            stack.pop();
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    label: NodeLabel,
    start: u32,
    end: u32,
}

/// Completed items of one chart set, by `(lhs, origin)` and by `lhs`.
#[derive(Default)]
struct Completed {
    rules: HashMap<(u32, u32), Vec<u32>>,
    origins: HashMap<u32, Vec<u32>>,
}

struct Builder<'a, I: Input + ?Sized> {
    grammar: &'a Grammar,
    chart: &'a Chart,
    input: &'a I,
    completed: HashMap<usize, Completed>,
    index: HashMap<Key, NodeId>,
    nodes: Vec<ForestNode>,
    work: Vec<NodeId>,
}

impl<I: Input + ?Sized> Builder<'_, I> {
    fn completed_at(&mut self, i: usize) -> &Completed {
        let (grammar, chart) = (self.grammar, self.chart);
        self.completed.entry(i).or_insert_with(|| {
            let mut c = Completed::default();
            for it in completed_items(grammar, chart, i) {
                let lhs = grammar.rule(it.rule).lhs;
                c.rules.entry((lhs, it.origin)).or_default().push(it.rule);
                c.origins.entry(lhs).or_default().push(it.origin);
            }
            for v in c.rules.values_mut().chain(c.origins.values_mut()) {
                v.sort_unstable();
                v.dedup();
            }
            c
        })
    }

    fn node(&mut self, label: NodeLabel, start: u32, end: u32) -> NodeId {
        let key = Key { label, start, end };
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(ForestNode { label, start, end, packed: Vec::new() });
        self.index.insert(key, id);
        self.work.push(id);
        id
    }

    fn derives(&mut self, sym: Symbol, l: u32, i: u32) -> bool {
        match sym {
            Symbol::Terminal(t) => l + 1 == i && self.input.matches(l as usize, t),
            Symbol::Nonterminal(x) => self.completed_at(i as usize).rules.contains_key(&(x, l)),
        }
    }

    /// Packed alternatives for the first `d` symbols of `rule` spanning `[j, i]`.
    fn splits(&mut self, rule: u32, d: u32, j: u32, i: u32) -> Vec<Packed> {
        let rhs = &self.grammar.rule(rule).rhs;
        let last = rhs[d as usize - 1];
        let candidates: Vec<u32> = if d == 1 {
            vec![j]
        } else {
            let prefix = Item { rule, dot: d - 1, origin: j };
            let ends = self.chart.ends.get(&prefix).map_or(&[][..], Vec::as_slice);
            let ends = &ends[ends.partition_point(|&l| l < j)..ends.partition_point(|&l| l <= i)];
            match last {
                Symbol::Terminal(_) => (i > j && ends.binary_search(&(i - 1)).is_ok()).then_some(i - 1).into_iter().collect(),
                Symbol::Nonterminal(x) => {
                    let origins = self.completed_at(i as usize).origins.get(&x).map_or(&[][..], Vec::as_slice);
                    if origins.len() < ends.len() {
                        origins.iter().copied().filter(|l| ends.binary_search(l).is_ok()).collect()
                    } else {
                        ends.to_vec()
                    }
                }
            }
        };
        let first = rhs[0];
        let mut out = Vec::new();
        for l in candidates {
            if !self.derives(last, l, i) {
                continue;
            }
            let left = match d {
                1 => None,
                2 => Some(self.node(NodeLabel::Symbol(first), j, l)),
                _ => Some(self.node(NodeLabel::Intermediate { rule, dot: d - 1 }, j, l)),
            };
            let right = Some(self.node(NodeLabel::Symbol(last), l, i));
            out.push(Packed { rule, split: l, left, right });
        }
        out
    }

    fn run(&mut self) {
        while let Some(id) = self.work.pop() {
            let ForestNode { label, start: j, end: i, .. } = self.nodes[id as usize];
            let mut packed = Vec::new();
            match label {
                NodeLabel::Symbol(Symbol::Terminal(_)) => {}
                NodeLabel::Symbol(Symbol::Nonterminal(a)) => {
                    let rules = self.completed_at(i as usize).rules.get(&(a, j)).cloned().unwrap_or_default();
                    for r in rules {
                        let len = self.grammar.rule(r).rhs.len() as u32;
                        if len == 0 {
                            if j == i {
                                packed.push(Packed { rule: r, split: j, left: None, right: None });
                            }
                        } else {
                            packed.extend(self.splits(r, len, j, i));
                        }
                    }
                }
                NodeLabel::Intermediate { rule, dot } => packed.extend(self.splits(rule, dot, j, i)),
            }
            packed.sort_by_key(|p| (p.rule, p.split));
            self.nodes[id as usize].packed = packed;
        }
    }
}

/// Build the shared packed parse forest for an accepted chart. Returns an
/// empty forest when the input was rejected.
pub fn build_forest<I: Input + ?Sized>(grammar: &Grammar, chart: &Chart, input: &I) -> Forest {
    if !chart.accepted() {
        return Forest::default();
    }
    let mut b = Builder {
        grammar,
        chart,
        input,
        completed: HashMap::new(),
        index: HashMap::new(),
        nodes: Vec::new(),
        work: Vec::new(),
    };
    let n = chart.input_len() as u32;
    let root = b.node(NodeLabel::Symbol(Symbol::Nonterminal(chart.start())), 0, n);
    b.run();
    let mut forest = Forest { nodes: b.nodes, root: Some(root), counts: Vec::new() };
    forest.compute_counts();
    forest
}
