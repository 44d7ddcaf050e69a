//! Regular sets of channel-system configurations.
//!
//! For every pair (control, bit) a [`ConfigLanguage`] keeps one canonical DFA
//! over the messages plus a separator `#`. Contents `w1, …, wk` of the `k`
//! channels are encoded as the word `w1#w2#…#wk`. Every accepted word has
//! exactly `k − 1` separators, so complement is taken relative to the set of
//! well-formed words.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::automaton::{AutomatonTable, Dfa, Nfa, Symbol};
use crate::lcs::{ChannelId, Configuration, ControlId, Msg, Op, Rule, Sglcs};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegsetError {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
}

/// Shape shared by all languages over one channel system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub controls: usize,
    pub channels: usize,
    pub messages: usize,
}

impl Signature {
    pub fn of(lcs: &Sglcs) -> Signature {
        Signature {
            controls: lcs.num_controls(),
            channels: lcs.num_channels(),
            messages: lcs.num_messages(),
        }
    }

    /// Size of the automaton alphabet: every message and the separator.
    pub fn symbols(&self) -> usize {
        self.messages + 1
    }

    pub fn separator(&self) -> Symbol {
        self.messages
    }

    pub fn encode(&self, contents: &[Vec<Msg>]) -> Vec<Symbol> {
        let mut word = Vec::new();
        for (i, w) in contents.iter().enumerate() {
            if i > 0 {
                word.push(self.separator());
            }
            word.extend(w.iter().map(|&m| m as Symbol));
        }
        word
    }

    pub fn decode(&self, word: &[Symbol]) -> Vec<Vec<Msg>> {
        word.split(|&a| a == self.separator())
            .map(|seg| seg.iter().map(|&a| a as Msg).collect())
            .collect()
    }

    fn check_config(&self, c: &Configuration) -> Result<(), RegsetError> {
        if c.control >= self.controls {
            return Err(RegsetError::SignatureMismatch(format!(
                "control {} out of range",
                c.control
            )));
        }
        if c.contents.len() != self.channels {
            return Err(RegsetError::SignatureMismatch(format!(
                "{} channel words for {} channels",
                c.contents.len(),
                self.channels
            )));
        }
        if c.contents
            .iter()
            .flatten()
            .any(|&m| m as usize >= self.messages)
        {
            return Err(RegsetError::SignatureMismatch("unknown message".into()));
        }
        Ok(())
    }

    /// All well-formed words.
    pub fn well_formed(&self) -> Dfa {
        let mut n = Nfa::new(self.symbols());
        let states: Vec<u32> = (0..self.channels)
            .map(|i| n.add_state(i + 1 == self.channels))
            .collect();
        n.add_initial(states[0]);
        for (i, &q) in states.iter().enumerate() {
            for m in 0..self.messages {
                n.add_edge(q, m, q);
            }
            if let Some(&next) = states.get(i + 1) {
                n.add_edge(q, self.separator(), next);
            }
        }
        n.determinize()
    }

    /// Well-formed words whose channel `chan` starts with `msg`.
    pub fn head_is(&self, chan: ChannelId, msg: Msg) -> Dfa {
        let mut n = Nfa::new(self.symbols());
        // Segment i before/after its first symbol when i == chan.
        let seg: Vec<u32> = (0..self.channels)
            .map(|i| n.add_state(i + 1 == self.channels && i != chan))
            .collect();
        let after = n.add_state(chan + 1 == self.channels);
        n.add_initial(seg[0]);
        for i in 0..self.channels {
            let q = seg[i];
            let body = if i == chan {
                n.add_edge(q, msg as Symbol, after);
                after
            } else {
                q
            };
            for m in 0..self.messages {
                n.add_edge(body, m, body);
            }
            if i + 1 < self.channels {
                n.add_edge(body, self.separator(), seg[i + 1]);
            }
        }
        n.determinize()
    }

    /// Well-formed words with every channel empty.
    pub fn all_empty(&self) -> Dfa {
        let mut n = Nfa::new(self.symbols());
        let states: Vec<u32> = (0..self.channels)
            .map(|i| n.add_state(i + 1 == self.channels))
            .collect();
        n.add_initial(states[0]);
        for i in 1..self.channels {
            n.add_edge(states[i - 1], self.separator(), states[i]);
        }
        n.determinize()
    }

    /// The finite set of encodings of `contents`.
    pub fn words(&self, contents: &[Vec<Vec<Msg>>]) -> Dfa {
        let mut n = Nfa::new(self.symbols());
        let root = n.add_state(false);
        n.add_initial(root);
        for c in contents {
            let word = self.encode(c);
            let mut q = root;
            for &a in &word {
                let t = n.add_state(false);
                n.add_edge(q, a, t);
                q = t;
            }
            n.set_accepting(q, true);
        }
        n.determinize()
    }

    pub fn symbol_label(&self, lcs: &Sglcs, a: Symbol) -> String {
        if a == self.separator() {
            "#".to_string()
        } else {
            lcs.alphabet()[a].clone()
        }
    }
}

/// Adds a self-loop for every message on every state.
pub fn upward_dfa(sig: &Signature, dfa: &Dfa) -> Dfa {
    let mut n = dfa.to_nfa();
    for q in 0..n.num_states() as u32 {
        for m in 0..sig.messages {
            n.add_edge(q, m, q);
        }
    }
    n.determinize()
}

/// Contents `x` whose channel `chan` is `msg·w` and such that `x` with `w` in
/// channel `chan` is in `dfa`.
fn recv_pre_dfa(sig: &Signature, dfa: &Dfa, chan: ChannelId, msg: Msg) -> Dfa {
    segment_product(sig, dfa, SegmentEdit::StripHead(chan, msg))
}

/// Contents `x` such that `x` with `msg` appended to channel `chan` is in `dfa`.
fn send_pre_dfa(sig: &Signature, dfa: &Dfa, chan: ChannelId, msg: Msg) -> Dfa {
    segment_product(sig, dfa, SegmentEdit::Append(chan, msg))
}

#[derive(Clone, Copy)]
enum SegmentEdit {
    StripHead(ChannelId, Msg),
    Append(ChannelId, Msg),
}

/// Deterministic product of `dfa` with a segment counter that reads the
/// input word while simulating `dfa` on the edited word.
fn segment_product(sig: &Signature, dfa: &Dfa, edit: SegmentEdit) -> Dfa {
    use std::collections::HashMap;
    let k = sig.symbols();
    let sep = sig.separator();
    let channels = sig.channels;
    // `need` marks the start of the stripped segment, before its head is read.
    let needs_head = |seg: usize| matches!(edit, SegmentEdit::StripHead(c, _) if c == seg);
    // Feeds the appended message when segment `seg` ends.
    let leave = |q: u32, seg: usize| match edit {
        SegmentEdit::Append(c, m) if c == seg => dfa.step(q, m as Symbol),
        _ => q,
    };
    // States are (q, seg, need); `None` is the rejecting sink.
    let mut index: HashMap<(u32, usize, bool), u32> = HashMap::new();
    let mut states: Vec<(u32, usize, bool)> = Vec::new();
    let mut delta: Vec<Option<(u32, usize, bool)>> = Vec::new();
    let mut accepting = Vec::new();
    let start = (0, 0, needs_head(0));
    index.insert(start, 0);
    states.push(start);
    let mut i = 0;
    while i < states.len() {
        let (q, seg, need) = states[i];
        accepting.push(!need && seg + 1 == channels && dfa.is_accepting(leave(q, seg)));
        for a in 0..k {
            let target = if need {
                match edit {
                    SegmentEdit::StripHead(_, m) if a == m as Symbol => Some((q, seg, false)),
                    _ => None,
                }
            } else if a == sep {
                (seg + 1 < channels)
                    .then(|| (dfa.step(leave(q, seg), sep), seg + 1, needs_head(seg + 1)))
            } else {
                Some((dfa.step(q, a), seg, false))
            };
            if let Some(t) = target {
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(t) {
                    e.insert(states.len() as u32);
                    states.push(t);
                }
            }
            delta.push(target);
        }
        i += 1;
    }
    let sink = states.len() as u32;
    let mut table: Vec<u32> = delta
        .into_iter()
        .map(|t| t.map_or(sink, |t| index[&t]))
        .collect();
    table.extend(std::iter::repeat_n(sink, k));
    accepting.push(false);
    Dfa::canonical(k, table, accepting)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigLanguage {
    sig: Signature,
    /// Indexed by `control * 2 + bit`.
    slots: Vec<Dfa>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    Union,
    Intersect,
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreMode {
    Pre,
    DualPre,
}

impl ConfigLanguage {
    pub fn empty(sig: Signature) -> Self {
        ConfigLanguage {
            sig,
            slots: vec![Dfa::empty(sig.symbols()); sig.controls * 2],
        }
    }

    pub fn universe(sig: Signature) -> Self {
        let wf = sig.well_formed();
        ConfigLanguage {
            sig,
            slots: vec![wf; sig.controls * 2],
        }
    }

    /// Configurations with every channel empty.
    pub fn attractor(sig: Signature) -> Self {
        let e = sig.all_empty();
        ConfigLanguage {
            sig,
            slots: vec![e; sig.controls * 2],
        }
    }

    /// Builds a language slot by slot; each slot is clipped to well-formed words.
    pub fn from_slots(sig: Signature, mut f: impl FnMut(ControlId, u8) -> Dfa) -> Self {
        let wf = sig.well_formed();
        let slots = (0..sig.controls * 2)
            .map(|i| f(i / 2, (i % 2) as u8).intersection(&wf))
            .collect();
        ConfigLanguage { sig, slots }
    }

    /// The finite set of the given configurations.
    pub fn from_configs(sig: Signature, configs: &[Configuration]) -> Self {
        Self::from_slots(sig, |s, b| {
            let contents: Vec<Vec<Vec<Msg>>> = configs
                .iter()
                .filter(|c| c.control == s && c.bit == b)
                .map(|c| c.contents.clone())
                .collect();
            sig.words(&contents)
        })
    }

    /// All configurations whose (control, bit) satisfies `pick`.
    pub fn slots_where(sig: Signature, mut pick: impl FnMut(ControlId, u8) -> bool) -> Self {
        let wf = sig.well_formed();
        let empty = Dfa::empty(sig.symbols());
        let slots = (0..sig.controls * 2)
            .map(|i| {
                if pick(i / 2, (i % 2) as u8) {
                    wf.clone()
                } else {
                    empty.clone()
                }
            })
            .collect();
        ConfigLanguage { sig, slots }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn slot(&self, control: ControlId, bit: u8) -> &Dfa {
        &self.slots[control * 2 + bit as usize]
    }

    pub fn with_slot(&self, control: ControlId, bit: u8, dfa: Dfa) -> Self {
        let mut out = self.clone();
        out.slots[control * 2 + bit as usize] = dfa.intersection(&self.sig.well_formed());
        out
    }

    fn zip(&self, other: &Self, f: impl Fn(&Dfa, &Dfa) -> Dfa) -> Self {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        ConfigLanguage {
            sig: self.sig,
            slots: self
                .slots
                .iter()
                .zip(&other.slots)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Panics if the signatures differ; see [`ConfigLanguage::combine`].
    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, Dfa::union)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, Dfa::intersection)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip(other, Dfa::difference)
    }

    pub fn complement(&self) -> Self {
        let wf = self.sig.well_formed();
        ConfigLanguage {
            sig: self.sig,
            slots: self.slots.iter().map(|d| wf.difference(d)).collect(),
        }
    }

    /// Checked boolean operation; `other` is ignored for complement.
    pub fn combine(&self, other: &Self, op: BoolOp) -> Result<Self, RegsetError> {
        if self.sig != other.sig {
            return Err(RegsetError::SignatureMismatch(format!(
                "{:?} vs {:?}",
                self.sig, other.sig
            )));
        }
        Ok(match op {
            BoolOp::Union => self.union(other),
            BoolOp::Intersect => self.intersection(other),
            BoolOp::Complement => self.complement(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(Dfa::is_empty)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    pub fn contains(&self, config: &Configuration) -> Result<bool, RegsetError> {
        self.sig.check_config(config)?;
        Ok(self
            .slot(config.control, config.bit)
            .accepts(&self.sig.encode(&config.contents)))
    }

    /// Some member with the shortest encoding in the lowest (control, bit) slot.
    pub fn witness(&self) -> Option<Configuration> {
        self.slots.iter().enumerate().find_map(|(i, d)| {
            d.shortest_word()
                .map(|w| Configuration::new(i / 2, self.sig.decode(&w), (i % 2) as u8))
        })
    }

    /// Total number of DFA states over all slots.
    pub fn size(&self) -> usize {
        self.slots.iter().map(Dfa::num_states).sum()
    }

    /// Keeps only the configurations whose (control, bit) satisfies `keep`.
    pub fn filter_slots(&self, mut keep: impl FnMut(ControlId, u8) -> bool) -> Self {
        let empty = Dfa::empty(self.sig.symbols());
        ConfigLanguage {
            sig: self.sig,
            slots: self
                .slots
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    if keep(i / 2, (i % 2) as u8) {
                        d.clone()
                    } else {
                        empty.clone()
                    }
                })
                .collect(),
        }
    }

    /// Configurations dominating a member in the channel-wise subword order.
    pub fn upward_closure(&self) -> Self {
        ConfigLanguage {
            sig: self.sig,
            slots: self
                .slots
                .iter()
                .map(|d| upward_dfa(&self.sig, d))
                .collect(),
        }
    }

    /// Configurations `(rule.from, x, 1)` that `rule` sends into `self`.
    pub fn pre_rule(&self, rule: &Rule) -> Self {
        let target = self.slot(rule.to, 0);
        let dfa = match rule.op {
            Op::Nop => target.clone(),
            Op::Send { chan, msg } => send_pre_dfa(&self.sig, target, chan, msg),
            Op::Recv { chan, msg } => recv_pre_dfa(&self.sig, target, chan, msg),
        };
        ConfigLanguage::empty(self.sig).with_slot(rule.from, 1, dfa)
    }

    /// Loss-step predecessors: `(s, x, 0)` with some `x' ⪯ x` such that
    /// `(s, x', 1)` is in `self`.
    pub fn pre_loss(&self) -> Self {
        let empty = Dfa::empty(self.sig.symbols());
        ConfigLanguage {
            sig: self.sig,
            slots: (0..self.slots.len())
                .map(|i| {
                    if i % 2 == 0 {
                        upward_dfa(&self.sig, &self.slots[i + 1])
                    } else {
                        empty.clone()
                    }
                })
                .collect(),
        }
    }

    /// Deadlocked `(s, x, 1)` whose completion step `(s, x, 0)` is in `self`.
    pub fn pre_deadlock(&self, lcs: &Sglcs) -> Self {
        let mut out = ConfigLanguage::empty(self.sig);
        for s in 0..self.sig.controls {
            let stuck = deadlock_contents(lcs, s);
            out.slots[s * 2 + 1] = stuck.intersection(self.slot(s, 0));
        }
        out
    }

    /// All one-step predecessors in the completed game.
    pub fn pre(&self, lcs: &Sglcs) -> Self {
        let mut out = self.pre_loss().union(&self.pre_deadlock(lcs));
        for rule in lcs.rules() {
            out = out.union(&self.pre_rule(rule));
        }
        out
    }

    /// Predecessor or dual predecessor inside the sub-game on `restrict_to`.
    pub fn pre_full(&self, lcs: &Sglcs, mode: PreMode, restrict_to: Option<&Self>) -> Self {
        match (mode, restrict_to) {
            (PreMode::Pre, None) => self.pre(lcs),
            (PreMode::Pre, Some(r)) => r.intersection(&self.intersection(r).pre(lcs)),
            (PreMode::DualPre, None) => self.complement().pre(lcs).complement(),
            (PreMode::DualPre, Some(r)) => {
                let outside = r.difference(self);
                r.difference(&outside.pre_full(lcs, PreMode::Pre, Some(r)))
            }
        }
    }

    pub fn to_tables(&self, lcs: &Sglcs) -> Vec<SlotTable> {
        (0..self.slots.len())
            .map(|i| SlotTable {
                control: lcs.control_name(i / 2).to_string(),
                bit: (i % 2) as u8,
                automaton: self.slots[i].to_table(|a| self.sig.symbol_label(lcs, a)),
            })
            .collect()
    }

    pub fn to_dot(&self, lcs: &Sglcs, name: &str) -> String {
        let mut out = String::new();
        for i in 0..self.slots.len() {
            let slot = format!("{name} {}:{}", lcs.control_name(i / 2), i % 2);
            out.push_str(&self.slots[i].to_dot(&slot, |a| self.sig.symbol_label(lcs, a)));
        }
        out
    }
}

impl fmt::Display for ConfigLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self
            .slots
            .iter()
            .map(|d| d.num_states().to_string())
            .collect();
        write!(f, "[{}]", sizes.join(" "))
    }
}

/// Contents at which no rule from `s` is enabled, as a well-formed language.
pub fn deadlock_contents(lcs: &Sglcs, s: ControlId) -> Dfa {
    let sig = Signature::of(lcs);
    let mut stuck = sig.well_formed();
    for (_, rule) in lcs.rules_from(s) {
        match rule.op {
            Op::Nop | Op::Send { .. } => return Dfa::empty(sig.symbols()),
            Op::Recv { chan, msg } => stuck = stuck.difference(&sig.head_is(chan, msg)),
        }
    }
    stuck
}

/// Contents at which `rule` is enabled.
pub fn enabled_contents(lcs: &Sglcs, rule: &Rule) -> Dfa {
    let sig = Signature::of(lcs);
    match rule.op {
        Op::Recv { chan, msg } => sig.head_is(chan, msg),
        _ => sig.well_formed(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlotTable {
    pub control: String,
    pub bit: u8,
    #[serde(flatten)]
    pub automaton: AutomatonTable,
}
