//! Finite automata over a small dense alphabet `0..k`.
//!
//! [`Dfa`] values are always complete, trimmed to reachable states, minimal,
//! and numbered in breadth-first order from the initial state 0. Two DFAs over
//! the same alphabet are therefore equal as values exactly when they accept
//! the same language.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

pub type Symbol = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dfa {
    alphabet: usize,
    /// `delta[q * alphabet + a]`
    delta: Vec<u32>,
    accepting: Vec<bool>,
}

/// Nondeterministic automaton without ε-moves, used as a construction scratchpad.
#[derive(Debug, Clone)]
pub struct Nfa {
    alphabet: usize,
    trans: Vec<Vec<(Symbol, u32)>>,
    initial: Vec<u32>,
    accepting: Vec<bool>,
}

impl Nfa {
    pub fn new(alphabet: usize) -> Self {
        Nfa {
            alphabet,
            trans: Vec::new(),
            initial: Vec::new(),
            accepting: Vec::new(),
        }
    }

    pub fn add_state(&mut self, accepting: bool) -> u32 {
        self.trans.push(Vec::new());
        self.accepting.push(accepting);
        (self.trans.len() - 1) as u32
    }

    pub fn add_initial(&mut self, q: u32) {
        self.initial.push(q);
    }

    pub fn add_edge(&mut self, from: u32, sym: Symbol, to: u32) {
        debug_assert!(sym < self.alphabet);
        self.trans[from as usize].push((sym, to));
    }

    pub fn set_accepting(&mut self, q: u32, accepting: bool) {
        self.accepting[q as usize] = accepting;
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    /// Subset construction followed by minimization.
    pub fn determinize(&self) -> Dfa {
        let k = self.alphabet;
        let start: BTreeSet<u32> = self.initial.iter().copied().collect();
        let mut index: HashMap<BTreeSet<u32>, u32> = HashMap::new();
        let mut sets = vec![start.clone()];
        index.insert(start, 0);
        let mut delta = Vec::new();
        let mut accepting = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let set = sets[i].clone();
            accepting.push(set.iter().any(|&q| self.accepting[q as usize]));
            let mut targets = vec![BTreeSet::new(); k];
            for &q in &set {
                for &(a, t) in &self.trans[q as usize] {
                    targets[a].insert(t);
                }
            }
            for t in targets {
                let next = sets.len() as u32;
                let id = *index.entry(t.clone()).or_insert_with(|| {
                    sets.push(t);
                    next
                });
                delta.push(id);
            }
            i += 1;
        }
        Dfa::canonical(k, delta, accepting)
    }
}

impl Dfa {
    /// Builds the canonical form of an arbitrary complete DFA with initial state 0.
    pub fn canonical(alphabet: usize, delta: Vec<u32>, accepting: Vec<bool>) -> Dfa {
        assert_eq!(delta.len(), accepting.len() * alphabet);
        let raw = Dfa {
            alphabet,
            delta,
            accepting,
        };
        raw.minimized()
    }

    pub fn empty(alphabet: usize) -> Dfa {
        Dfa {
            alphabet,
            delta: vec![0; alphabet],
            accepting: vec![false],
        }
    }

    pub fn universe(alphabet: usize) -> Dfa {
        Dfa {
            alphabet,
            delta: vec![0; alphabet],
            accepting: vec![true],
        }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn step(&self, q: u32, a: Symbol) -> u32 {
        self.delta[q as usize * self.alphabet + a]
    }

    pub fn is_accepting(&self, q: u32) -> bool {
        self.accepting[q as usize]
    }

    pub fn accepts(&self, word: &[Symbol]) -> bool {
        let q = word.iter().fold(0, |q, &a| self.step(q, a));
        self.is_accepting(q)
    }

    /// Canonical DFAs have an accepting state iff their language is nonempty.
    pub fn is_empty(&self) -> bool {
        !self.accepting.iter().any(|&a| a)
    }

    /// A shortest accepted word, preferring smaller symbols.
    pub fn shortest_word(&self) -> Option<Vec<Symbol>> {
        let mut parent: Vec<Option<(u32, Symbol)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([0u32]);
        seen[0] = true;
        while let Some(q) = queue.pop_front() {
            if self.is_accepting(q) {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((p, a)) = parent[cur as usize] {
                    word.push(a);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for a in 0..self.alphabet {
                let t = self.step(q, a);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((q, a));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub fn complement(&self) -> Dfa {
        Dfa {
            alphabet: self.alphabet,
            delta: self.delta.clone(),
            accepting: self.accepting.iter().map(|a| !a).collect(),
        }
    }

    pub fn product(&self, other: &Dfa, combine: impl Fn(bool, bool) -> bool) -> Dfa {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch");
        let k = self.alphabet;
        let mut index: HashMap<(u32, u32), u32> = HashMap::from([((0, 0), 0)]);
        let mut pairs = vec![(0u32, 0u32)];
        let mut delta = Vec::new();
        let mut accepting = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            accepting.push(combine(self.is_accepting(p), other.is_accepting(q)));
            for a in 0..k {
                let t = (self.step(p, a), other.step(q, a));
                let next = pairs.len() as u32;
                let id = *index.entry(t).or_insert_with(|| {
                    pairs.push(t);
                    next
                });
                delta.push(id);
            }
            i += 1;
        }
        Dfa::canonical(k, delta, accepting)
    }

    pub fn union(&self, other: &Dfa) -> Dfa {
        self.product(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Dfa) -> Dfa {
        self.product(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Dfa) -> Dfa {
        self.product(other, |a, b| a && !b)
    }

    pub fn is_subset(&self, other: &Dfa) -> bool {
        self.difference(other).is_empty()
    }

    pub fn to_nfa(&self) -> Nfa {
        let mut n = Nfa::new(self.alphabet);
        for q in 0..self.num_states() {
            n.add_state(self.accepting[q]);
        }
        for q in 0..self.num_states() as u32 {
            for a in 0..self.alphabet {
                n.add_edge(q, a, self.step(q, a));
            }
        }
        n.add_initial(0);
        n
    }

    /// Moore partition refinement on the reachable part, then BFS renumbering.
    fn minimized(&self) -> Dfa {
        let k = self.alphabet;
        let reach = self.reachable();
        let mut class: Vec<u32> = vec![u32::MAX; self.num_states()];
        for &q in &reach {
            class[q as usize] = self.accepting[q as usize] as u32;
        }
        let mut count = 0;
        loop {
            let mut sig_index: HashMap<Vec<u32>, u32> = HashMap::new();
            let mut next = vec![u32::MAX; self.num_states()];
            for &q in &reach {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[q as usize]);
                for a in 0..k {
                    sig.push(class[self.step(q, a) as usize]);
                }
                let fresh = sig_index.len() as u32;
                next[q as usize] = *sig_index.entry(sig).or_insert(fresh);
            }
            let classes = sig_index.len();
            class = next;
            if classes == count {
                break;
            }
            count = classes;
        }
        // BFS from the initial class gives the canonical numbering.
        let mut order: HashMap<u32, u32> = HashMap::new();
        let mut rep: Vec<u32> = Vec::new();
        let mut queue = VecDeque::from([0u32]);
        order.insert(class[0], 0);
        rep.push(0);
        let mut delta = Vec::new();
        let mut accepting = Vec::new();
        while let Some(q) = queue.pop_front() {
            accepting.push(self.accepting[q as usize]);
            for a in 0..k {
                let t = self.step(q, a);
                let c = class[t as usize];
                let next = rep.len() as u32;
                let id = *order.entry(c).or_insert_with(|| {
                    rep.push(t);
                    queue.push_back(t);
                    next
                });
                delta.push(id);
            }
        }
        Dfa {
            alphabet: k,
            delta,
            accepting,
        }
    }

    fn reachable(&self) -> Vec<u32> {
        let mut seen = vec![false; self.num_states()];
        let mut out = vec![0u32];
        seen[0] = true;
        let mut i = 0;
        while i < out.len() {
            let q = out[i];
            for a in 0..self.alphabet {
                let t = self.step(q, a);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    out.push(t);
                }
            }
            i += 1;
        }
        out
    }

    /// Transition table for export, with symbols rendered by `label`.
    pub fn to_table(&self, label: impl Fn(Symbol) -> String) -> AutomatonTable {
        let mut delta = Vec::new();
        for q in 0..self.num_states() as u32 {
            for a in 0..self.alphabet {
                delta.push((q, label(a), self.step(q, a)));
            }
        }
        AutomatonTable {
            states: self.num_states(),
            initial: 0,
            accepting: (0..self.num_states() as u32)
                .filter(|&q| self.is_accepting(q))
                .collect(),
            delta,
        }
    }

    /// Graphviz rendering; parallel edges are merged into one labelled edge.
    pub fn to_dot(&self, name: &str, label: impl Fn(Symbol) -> String) -> String {
        let mut out = format!("digraph \"{name}\" {{\n  rankdir=LR;\n  start [shape=point];\n");
        for q in 0..self.num_states() as u32 {
            let shape = if self.is_accepting(q) {
                "doublecircle"
            } else {
                "circle"
            };
            out.push_str(&format!("  q{q} [shape={shape}];\n"));
        }
        out.push_str("  start -> q0;\n");
        for q in 0..self.num_states() as u32 {
            let mut grouped: Vec<(u32, Vec<String>)> = Vec::new();
            for a in 0..self.alphabet {
                let t = self.step(q, a);
                match grouped.iter_mut().find(|(to, _)| *to == t) {
                    Some((_, labels)) => labels.push(label(a)),
                    None => grouped.push((t, vec![label(a)])),
                }
            }
            for (t, labels) in grouped {
                out.push_str(&format!(
                    "  q{q} -> q{t} [label=\"{}\"];\n",
                    labels.join(",")
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AutomatonTable {
    pub states: usize,
    pub initial: u32,
    pub accepting: Vec<u32>,
    pub delta: Vec<(u32, String, u32)>,
}
