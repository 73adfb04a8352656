use std::collections::{HashMap, HashSet};

use super::grammar::{Grammar, Symbol};

/// Token stream seen by the recognizer. A position may match several
/// terminals, which is how lexical ambiguity reaches the grammar.
pub trait Input {
    fn len(&self) -> usize;
    fn matches(&self, pos: usize, terminal: u32) -> bool;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Input for [u32] {
    fn len(&self) -> usize {
        <[u32]>::len(self)
    }
    fn matches(&self, pos: usize, terminal: u32) -> bool {
        self[pos] == terminal
    }
}

impl Input for [Vec<u32>] {
    fn len(&self) -> usize {
        <[Vec<u32>]>::len(self)
    }
    fn matches(&self, pos: usize, terminal: u32) -> bool {
        self[pos].contains(&terminal)
    }
}

/// A dotted rule with its origin set; the set index it lives in is implicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item {
    pub rule: u32,
    pub dot: u32,
    pub origin: u32,
}

impl Item {
    fn advance(self) -> Item {
        Item { dot: self.dot + 1, ..self }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LeoItem {
    /// The completed item at the top of the deterministic chain.
    pub top: Item,
    /// The unique penultimate item in the originating set.
    pub penult: Item,
    /// Next link `(set, nonterminal)` further up the chain, if any.
    pub next: Option<(u32, u32)>,
}

#[derive(Default, Debug)]
pub(crate) struct EarleySet {
    pub items: Vec<Item>,
    seen: HashSet<Item>,
    /// Incomplete items keyed by the nonterminal after the dot.
    waiting: HashMap<u32, Vec<Item>>,
    predicted: HashSet<u32>,
    /// Completions routed through a Leo item: `(origin set, nonterminal)`.
    pub leo_events: Vec<(u32, u32)>,
}

/// Recognizer state for one input. Keep it around to build a forest.
#[derive(Debug)]
pub struct Chart {
    pub(crate) sets: Vec<EarleySet>,
    pub(crate) leo: HashMap<(u32, u32), Option<LeoItem>>,
    /// Every set index where an incomplete item occurs; used to find
    /// split points while building the forest.
    pub(crate) ends: HashMap<Item, Vec<u32>>,
    start: u32,
    accepted: bool,
}

impl Chart {
    pub fn accepted(&self) -> bool {
        self.accepted
    }

    pub fn input_len(&self) -> usize {
        self.sets.len() - 1
    }

    /// Number of items stored explicitly in the chart.
    pub fn item_count(&self) -> usize {
        self.sets.iter().map(|s| s.items.len()).sum()
    }

    pub fn set_items(&self, i: usize) -> &[Item] {
        &self.sets[i].items
    }

    pub(crate) fn start(&self) -> u32 {
        self.start
    }
}

/// Run the recognizer over `input`.
pub fn recognize<I: Input + ?Sized>(grammar: &Grammar, input: &I) -> Chart {
    recognize_within(grammar, input, usize::MAX).expect("unbounded budget")
}

/// [`recognize`] that gives up with `None` once the chart holds more than
/// `max_items` items.
pub fn recognize_within<I: Input + ?Sized>(grammar: &Grammar, input: &I, max_items: usize) -> Option<Chart> {
    let n = input.len();
    let mut total = 0usize;
    let mut chart = Chart {
        sets: (0..=n).map(|_| EarleySet::default()).collect(),
        leo: HashMap::new(),
        ends: HashMap::new(),
        start: grammar.start(),
        accepted: false,
    };
    for &r in grammar.rules_for(grammar.start()) {
        add(grammar, &mut chart, 0, Item { rule: r, dot: 0, origin: 0 });
    }
    for i in 0..=n {
        if i > 0 {
            total += chart.sets[i - 1].items.len();
            if total > max_items {
                return None;
            }
        }
        let mut cursor = 0;
        while cursor < chart.sets[i].items.len() {
            let item = chart.sets[i].items[cursor];
            cursor += 1;
            let rule = grammar.rule(item.rule);
            match rule.rhs.get(item.dot as usize) {
                None => complete(grammar, &mut chart, i, item),
                Some(&Symbol::Terminal(t)) => {
                    if i < n && input.matches(i, t) {
                        add(grammar, &mut chart, i + 1, item.advance());
                    }
                }
                Some(&Symbol::Nonterminal(b)) => {
                    if chart.sets[i].predicted.insert(b) {
                        for &r in grammar.rules_for(b) {
                            add(grammar, &mut chart, i, Item { rule: r, dot: 0, origin: i as u32 });
                        }
                    }
                    if grammar.nullable(b) {
                        add(grammar, &mut chart, i, item.advance());
                    }
                }
            }
        }
    }
    for ends in chart.ends.values_mut() {
        ends.sort_unstable();
    }
    chart.accepted = completed_origins(grammar, &chart, n, grammar.start()).contains(&0);
    Some(chart)
}

fn add(grammar: &Grammar, chart: &mut Chart, set: usize, item: Item) {
    let s = &mut chart.sets[set];
    if s.seen.insert(item) {
        s.items.push(item);
        if let Some(&Symbol::Nonterminal(b)) = grammar.rule(item.rule).rhs.get(item.dot as usize) {
            s.waiting.entry(b).or_default().push(item);
        }
        chart.ends.entry(item).or_default().push(set as u32);
    }
}

fn complete(grammar: &Grammar, chart: &mut Chart, i: usize, item: Item) {
    let b = grammar.rule(item.rule).lhs;
    let k = item.origin as usize;
    if k < i {
        if let Some(leo) = leo_item(grammar, chart, k as u32, b) {
            chart.sets[i].leo_events.push((k as u32, b));
            add(grammar, chart, i, leo.top);
            return;
        }
    }
    let parents: Vec<Item> = chart.sets[k].waiting.get(&b).cloned().unwrap_or_default();
    for p in parents {
        add(grammar, chart, i, p.advance());
    }
}

/// Leo item for completions of `b` that started in set `k`. Computed
/// iteratively and memoized; chains may be long under right recursion.
pub(crate) fn leo_item(grammar: &Grammar, chart: &mut Chart, k: u32, b: u32) -> Option<LeoItem> {
    let mut pending: Vec<(u32, u32, Item)> = Vec::new();
    let (mut set, mut sym) = (k, b);
    let tail: Option<LeoItem>;
    loop {
        if let Some(found) = chart.leo.get(&(set, sym)) {
            tail = *found;
            break;
        }
        match unique_penult(grammar, chart, set, sym) {
            Some(p) => {
                pending.push((set, sym, p));
                let lhs = grammar.rule(p.rule).lhs;
                let origin = p.origin;
                if pending.iter().any(|&(s, y, _)| s == origin && y == lhs) {
                    // cannot happen for acyclic grammars; stop the chain here
                    tail = None;
                    break;
                }
                set = origin;
                sym = lhs;
            }
            None => {
                chart.leo.insert((set, sym), None);
                tail = None;
                break;
            }
        }
    }
    let mut above: Option<(u32, u32, LeoItem)> = tail.map(|t| (set, sym, t));
    while let Some((s, y, p)) = pending.pop() {
        let leo = match above {
            Some((ns, ny, up)) => LeoItem { top: up.top, penult: p, next: Some((ns, ny)) },
            None => LeoItem { top: p.advance(), penult: p, next: None },
        };
        chart.leo.insert((s, y), Some(leo));
        above = Some((s, y, leo));
    }
    chart.leo.get(&(k, b)).copied().flatten()
}

fn unique_penult(grammar: &Grammar, chart: &Chart, set: u32, sym: u32) -> Option<Item> {
    let waiting = chart.sets[set as usize].waiting.get(&sym)?;
    if waiting.len() != 1 {
        return None;
    }
    let p = waiting[0];
    let len = grammar.rule(p.rule).rhs.len() as u32;
    (p.dot + 1 == len).then_some(p)
}

/// Origins `j` such that nonterminal `a` derives the span `[j, i]`,
/// including completions implied by Leo chains.
pub(crate) fn completed_origins(grammar: &Grammar, chart: &Chart, i: usize, a: u32) -> Vec<u32> {
    let mut out: Vec<u32> = completed_items(grammar, chart, i)
        .into_iter()
        .filter(|it| grammar.rule(it.rule).lhs == a)
        .map(|it| it.origin)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// All completed items in set `i`, explicit and Leo-implied.
pub(crate) fn completed_items(grammar: &Grammar, chart: &Chart, i: usize) -> Vec<Item> {
    let s = &chart.sets[i];
    let mut out: Vec<Item> = s
        .items
        .iter()
        .copied()
        .filter(|it| it.dot as usize == grammar.rule(it.rule).rhs.len())
        .collect();
    let mut visited = HashSet::new();
    for &(k, b) in &s.leo_events {
        let mut link = Some((k, b));
        while let Some(key) = link {
            if !visited.insert(key) {
                break;
            }
            let Some(Some(leo)) = chart.leo.get(&key) else { break };
            out.push(leo.penult.advance());
            link = leo.next;
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}
