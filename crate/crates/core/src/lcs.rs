//! Stochastic game lossy channel systems and the local semantics of the game
//! they induce.
//!
//! A configuration `(s, x, 1)` is a player move: the owner of control `s`
//! fires an enabled rule and lands on `(s', x', 0)`. If nothing is enabled the
//! configuration steps to `(s, x, 0)` instead. A configuration `(s, x, 0)`
//! is a loss step: every message is dropped independently with probability
//! `lambda` and play continues at `(s, x', 1)`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{ExplicitGame, GameBuilder, Owner, Player};

pub type ControlId = usize;
pub type ChannelId = usize;
pub type Msg = u8;
pub type RuleId = usize;

/// Longest total channel content whose loss outcomes are enumerated.
pub const LOSS_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LcsError {
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error("configuration is in the wrong phase for this operation")]
    PhaseMismatch,
    #[error("total channel length {len} exceeds the enumeration limit {limit}")]
    TooLong { len: usize, limit: usize },
    #[error("reachable state space exceeds {0} configurations")]
    StateSpaceTooLarge(usize),
    #[error("bad configuration literal `{literal}`: {reason}")]
    Literal { literal: String, reason: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> LcsError {
    LcsError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Nop,
    Send { chan: ChannelId, msg: Msg },
    Recv { chan: ChannelId, msg: Msg },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rule {
    pub from: ControlId,
    pub op: Op,
    pub to: ControlId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sglcs {
    controls: Vec<String>,
    owner: Vec<Player>,
    color: Vec<u32>,
    channels: Vec<String>,
    alphabet: Vec<String>,
    rules: Vec<Rule>,
    lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub control: ControlId,
    pub contents: Vec<Vec<Msg>>,
    /// 1 for a player move, 0 for a loss step.
    pub bit: u8,
}

impl Configuration {
    pub fn new(control: ControlId, contents: Vec<Vec<Msg>>, bit: u8) -> Self {
        assert!(bit <= 1, "turn bit must be 0 or 1");
        Configuration {
            control,
            contents,
            bit,
        }
    }

    pub fn channels_empty(&self) -> bool {
        self.contents.iter().all(Vec::is_empty)
    }

    pub fn total_len(&self) -> usize {
        self.contents.iter().map(Vec::len).sum()
    }
}

/// One outgoing transition of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub target: Configuration,
    /// Set on loss steps.
    pub prob: Option<f64>,
    /// The rule fired, for player moves that are not a deadlock completion.
    pub rule: Option<RuleId>,
}

impl Sglcs {
    pub fn controls(&self) -> &[String] {
        &self.controls
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn control_name(&self, s: ControlId) -> &str {
        &self.controls[s]
    }

    pub fn control_index(&self, name: &str) -> Option<ControlId> {
        self.controls.iter().position(|c| c == name)
    }

    pub fn owner(&self, s: ControlId) -> Player {
        self.owner[s]
    }

    pub fn color(&self, s: ControlId) -> u32 {
        self.color[s]
    }

    pub fn max_color(&self) -> u32 {
        self.color.iter().copied().max().unwrap_or(0)
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn num_messages(&self) -> usize {
        self.alphabet.len()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rules_from(&self, s: ControlId) -> impl Iterator<Item = (RuleId, &Rule)> + '_ {
        self.rules
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.from == s)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Sglcs, LcsError> {
        check_lambda(lambda)?;
        Ok(Sglcs {
            lambda,
            ..self.clone()
        })
    }

    pub fn has_send_rules(&self) -> bool {
        self.rules.iter().any(|r| matches!(r.op, Op::Send { .. }))
    }

    /// Whether `rule` can fire at `config`.
    pub fn enabled(&self, rule: &Rule, config: &Configuration) -> Result<bool, LcsError> {
        if config.bit != 1 || config.control != rule.from {
            return Err(LcsError::PhaseMismatch);
        }
        Ok(match rule.op {
            Op::Nop | Op::Send { .. } => true,
            Op::Recv { chan, msg } => config.contents[chan].first() == Some(&msg),
        })
    }

    /// The image of `config` under `rule`, assuming it is enabled.
    pub fn apply(&self, rule: &Rule, config: &Configuration) -> Configuration {
        let mut contents = config.contents.clone();
        match rule.op {
            Op::Nop => {}
            Op::Send { chan, msg } => contents[chan].push(msg),
            Op::Recv { chan, .. } => {
                contents[chan].remove(0);
            }
        }
        Configuration {
            control: rule.to,
            contents,
            bit: 0,
        }
    }

    /// Enabled rules at a player-move configuration, in declaration order.
    pub fn enabled_rules(&self, config: &Configuration) -> Vec<RuleId> {
        debug_assert_eq!(config.bit, 1);
        self.rules_from(config.control)
            .filter(|(_, r)| match r.op {
                Op::Recv { chan, msg } => config.contents[chan].first() == Some(&msg),
                _ => true,
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// All transitions out of `config`. Loss steps are enumerated only up to
    /// [`LOSS_ENUMERATION_LIMIT`] messages.
    pub fn successors(&self, config: &Configuration) -> Result<Vec<Transition>, LcsError> {
        if config.bit == 1 {
            let enabled = self.enabled_rules(config);
            if enabled.is_empty() {
                return Ok(vec![Transition {
                    target: Configuration {
                        bit: 0,
                        ..config.clone()
                    },
                    prob: None,
                    rule: None,
                }]);
            }
            return Ok(enabled
                .into_iter()
                .map(|i| Transition {
                    target: self.apply(&self.rules[i], config),
                    prob: None,
                    rule: Some(i),
                })
                .collect());
        }
        let dist = loss_distribution(&config.contents, self.lambda)?;
        Ok(dist
            .into_iter()
            .map(|(contents, p)| Transition {
                target: Configuration {
                    control: config.control,
                    contents,
                    bit: 1,
                },
                prob: Some(p),
                rule: None,
            })
            .collect())
    }

    /// Parses `control:bit:w1#w2#…`. Messages are single characters when every
    /// message name is one character long, and `.`-separated otherwise.
    pub fn parse_config(&self, literal: &str) -> Result<Configuration, LcsError> {
        let fail = |reason: &str| LcsError::Literal {
            literal: literal.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = literal.splitn(3, ':');
        let (Some(control), Some(bit), Some(words)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(fail("expected control:bit:contents"));
        };
        let control = self
            .control_index(control)
            .ok_or_else(|| fail("unknown control"))?;
        let bit = match bit {
            "0" => 0,
            "1" => 1,
            _ => return Err(fail("bit must be 0 or 1")),
        };
        let segments: Vec<&str> = words.split('#').collect();
        if segments.len() != self.num_channels() {
            return Err(fail(&format!(
                "expected {} channel segments",
                self.num_channels()
            )));
        }
        let single_char = self.alphabet.iter().all(|m| m.chars().count() == 1);
        let mut contents = Vec::new();
        for seg in segments {
            let names: Vec<String> = if seg.is_empty() {
                Vec::new()
            } else if single_char {
                seg.chars().map(String::from).collect()
            } else {
                seg.split('.').map(String::from).collect()
            };
            let mut word = Vec::new();
            for name in names {
                let m = self
                    .alphabet
                    .iter()
                    .position(|a| *a == name)
                    .ok_or_else(|| fail(&format!("unknown message `{name}`")))?;
                word.push(m as Msg);
            }
            contents.push(word);
        }
        Ok(Configuration::new(control, contents, bit))
    }

    pub fn format_config(&self, config: &Configuration) -> String {
        let single_char = self.alphabet.iter().all(|m| m.chars().count() == 1);
        let sep = if single_char { "" } else { "." };
        let words: Vec<String> = config
            .contents
            .iter()
            .map(|w| {
                w.iter()
                    .map(|&m| self.alphabet[m as usize].as_str())
                    .collect::<Vec<_>>()
                    .join(sep)
            })
            .collect();
        format!(
            "{}:{}:{}",
            self.controls[config.control],
            config.bit,
            words.join("#")
        )
    }

    /// Every configuration with total content length at most `max_len`.
    pub fn configs_up_to(&self, max_len: usize) -> Vec<Configuration> {
        let mut out = Vec::new();
        for contents in contents_up_to(self.num_channels(), self.num_messages(), max_len) {
            for control in 0..self.num_controls() {
                for bit in 0..2 {
                    out.push(Configuration::new(control, contents.clone(), bit));
                }
            }
        }
        out
    }

    /// The finite game reachable from `starts`, with state `i` standing for
    /// the `i`-th returned configuration. Only finite for systems whose
    /// reachable contents stay bounded, e.g. those without send rules.
    pub fn reachable_game(
        &self,
        starts: &[Configuration],
        limit: usize,
    ) -> Result<(ExplicitGame, Vec<Configuration>), LcsError> {
        let mut index: HashMap<Configuration, usize> = HashMap::new();
        let mut configs: Vec<Configuration> = Vec::new();
        let mut queue = VecDeque::new();
        for c in starts {
            if !index.contains_key(c) {
                index.insert(c.clone(), configs.len());
                configs.push(c.clone());
                queue.push_back(c.clone());
            }
        }
        let mut edges: Vec<Vec<(usize, Option<f64>)>> = Vec::new();
        while let Some(c) = queue.pop_front() {
            let mut out = Vec::new();
            for t in self.successors(&c)? {
                let id = match index.get(&t.target) {
                    Some(&id) => id,
                    None => {
                        if configs.len() >= limit {
                            return Err(LcsError::StateSpaceTooLarge(limit));
                        }
                        let id = configs.len();
                        index.insert(t.target.clone(), id);
                        configs.push(t.target.clone());
                        queue.push_back(t.target);
                        id
                    }
                };
                out.push((id, t.prob));
            }
            edges.push(out);
        }
        let mut b = GameBuilder::new();
        for c in &configs {
            let owner = if c.bit == 1 {
                Owner::Player(self.owner[c.control])
            } else {
                Owner::Random
            };
            b.add_state(owner, self.color[c.control]);
        }
        for (s, out) in edges.into_iter().enumerate() {
            for (t, p) in out {
                match p {
                    Some(p) => b.random_edge(s, t, p),
                    None => b.edge(s, t),
                };
            }
        }
        Ok((b.build(), configs))
    }

    pub fn from_document(doc: &LcsDocument) -> Result<Sglcs, LcsError> {
        check_lambda(doc.lambda)?;
        let mut seen = BTreeMap::new();
        for (i, c) in doc.controls.iter().enumerate() {
            if seen.insert(c.id.clone(), i).is_some() {
                return Err(invalid(
                    format!("controls[{i}].id"),
                    format!("duplicate control `{}`", c.id),
                ));
            }
        }
        if doc.channels.is_empty() {
            return Err(invalid("channels", "at least one channel is required"));
        }
        unique(&doc.channels, "channels")?;
        unique(&doc.alphabet, "alphabet")?;
        if doc.alphabet.len() > Msg::MAX as usize {
            return Err(invalid("alphabet", "too many messages"));
        }
        for m in &doc.alphabet {
            if m.is_empty() || m.contains(['#', ':', '.']) {
                return Err(invalid(
                    "alphabet",
                    format!("message name `{m}` must be nonempty without `#`, `:` or `.`"),
                ));
            }
        }
        let owner = doc
            .controls
            .iter()
            .enumerate()
            .map(|(i, c)| match c.owner.as_str() {
                "P0" => Ok(Player::Zero),
                "P1" => Ok(Player::One),
                other => Err(invalid(
                    format!("controls[{i}].owner"),
                    format!("expected P0 or P1, got `{other}`"),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let control = |i: usize, field: &str, name: &str| {
            seen.get(name).copied().ok_or_else(|| {
                invalid(
                    format!("rules[{i}].{field}"),
                    format!("unknown control `{name}`"),
                )
            })
        };
        let mut rules = Vec::new();
        for (i, r) in doc.rules.iter().enumerate() {
            let from = control(i, "from", &r.from)?;
            let to = control(i, "to", &r.to)?;
            let chan_msg = || -> Result<(ChannelId, Msg), LcsError> {
                let chan = r
                    .chan
                    .as_ref()
                    .ok_or_else(|| invalid(format!("rules[{i}].chan"), "missing"))?;
                let msg = r
                    .msg
                    .as_ref()
                    .ok_or_else(|| invalid(format!("rules[{i}].msg"), "missing"))?;
                let chan = doc.channels.iter().position(|c| c == chan).ok_or_else(|| {
                    invalid(
                        format!("rules[{i}].chan"),
                        format!("unknown channel `{chan}`"),
                    )
                })?;
                let msg = doc.alphabet.iter().position(|m| m == msg).ok_or_else(|| {
                    invalid(
                        format!("rules[{i}].msg"),
                        format!("unknown message `{msg}`"),
                    )
                })?;
                Ok((chan, msg as Msg))
            };
            let op = match r.op.as_str() {
                "nop" => {
                    if r.chan.is_some() || r.msg.is_some() {
                        return Err(invalid(
                            format!("rules[{i}]"),
                            "nop takes no channel or message",
                        ));
                    }
                    Op::Nop
                }
                "send" => {
                    let (chan, msg) = chan_msg()?;
                    Op::Send { chan, msg }
                }
                "recv" => {
                    let (chan, msg) = chan_msg()?;
                    Op::Recv { chan, msg }
                }
                other => {
                    return Err(invalid(
                        format!("rules[{i}].op"),
                        format!("expected nop, send or recv, got `{other}`"),
                    ))
                }
            };
            rules.push(Rule { from, op, to });
        }
        Ok(Sglcs {
            controls: doc.controls.iter().map(|c| c.id.clone()).collect(),
            owner,
            color: doc.controls.iter().map(|c| c.color).collect(),
            channels: doc.channels.clone(),
            alphabet: doc.alphabet.clone(),
            rules,
            lambda: doc.lambda,
        })
    }

    pub fn to_document(&self) -> LcsDocument {
        LcsDocument {
            channels: self.channels.clone(),
            alphabet: self.alphabet.clone(),
            lambda: self.lambda,
            controls: (0..self.num_controls())
                .map(|s| ControlDocument {
                    id: self.controls[s].clone(),
                    owner: self.owner[s].to_string(),
                    color: self.color[s],
                })
                .collect(),
            rules: self
                .rules
                .iter()
                .map(|r| {
                    let (op, chan, msg) = match r.op {
                        Op::Nop => ("nop", None, None),
                        Op::Send { chan, msg } => ("send", Some(chan), Some(msg)),
                        Op::Recv { chan, msg } => ("recv", Some(chan), Some(msg)),
                    };
                    RuleDocument {
                        from: self.controls[r.from].clone(),
                        op: op.to_string(),
                        chan: chan.map(|c| self.channels[c].clone()),
                        msg: msg.map(|m| self.alphabet[m as usize].clone()),
                        to: self.controls[r.to].clone(),
                    }
                })
                .collect(),
        }
    }

    pub fn describe_rule(&self, rule: &Rule) -> String {
        let op = match rule.op {
            Op::Nop => "nop".to_string(),
            Op::Send { chan, msg } => {
                format!("{}!{}", self.channels[chan], self.alphabet[msg as usize])
            }
            Op::Recv { chan, msg } => {
                format!("{}?{}", self.channels[chan], self.alphabet[msg as usize])
            }
        };
        format!(
            "{} {} {}",
            self.controls[rule.from], op, self.controls[rule.to]
        )
    }
}

fn check_lambda(lambda: f64) -> Result<(), LcsError> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(invalid("lambda", format!("{lambda} is not in (0,1)")))
    }
}

fn unique(names: &[String], field: &str) -> Result<(), LcsError> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(invalid(field, format!("duplicate entry `{n}`")));
        }
    }
    Ok(())
}

/// All per-channel contents with total length at most `max_len`, shortest first.
pub fn contents_up_to(channels: usize, messages: usize, max_len: usize) -> Vec<Vec<Vec<Msg>>> {
    let mut out = Vec::new();
    for total in 0..=max_len {
        let mut acc = Vec::new();
        split_lengths(channels, total, &mut Vec::new(), &mut acc);
        for lens in acc {
            let mut partial: Vec<Vec<Vec<Msg>>> = vec![Vec::new()];
            for len in lens {
                let words = words_of_len(messages, len);
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        words.iter().map(move |w| {
                            let mut next = p.clone();
                            next.push(w.clone());
                            next
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
    }
    out
}

fn split_lengths(channels: usize, total: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if channels == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    if channels == 1 {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for first in 0..=total {
        cur.push(first);
        split_lengths(channels - 1, total - first, cur, out);
        cur.pop();
    }
}

fn words_of_len(messages: usize, len: usize) -> Vec<Vec<Msg>> {
    let mut words = vec![Vec::new()];
    for _ in 0..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                (0..messages).map(move |m| {
                    let mut next = w.clone();
                    next.push(m as Msg);
                    next
                })
            })
            .collect();
    }
    words
}

/// The distribution over contents left after independent message loss.
///
/// Outcome `x'` of `x` has probability `a · λ^(b−c) · (1−λ)^c`, where `b` and
/// `c` are the total lengths of `x` and `x'` and `a` counts the sets of kept
/// positions spelling `x'`.
pub fn loss_distribution(
    contents: &[Vec<Msg>],
    lambda: f64,
) -> Result<BTreeMap<Vec<Vec<Msg>>, f64>, LcsError> {
    let len: usize = contents.iter().map(Vec::len).sum();
    if len > LOSS_ENUMERATION_LIMIT {
        return Err(LcsError::TooLong {
            len,
            limit: LOSS_ENUMERATION_LIMIT,
        });
    }
    // The joint outcome factorizes over channels.
    let mut joint: BTreeMap<Vec<Vec<Msg>>, f64> = BTreeMap::from([(Vec::new(), 1.0)]);
    for word in contents {
        let mut single: BTreeMap<Vec<Msg>, f64> = BTreeMap::new();
        let n = word.len();
        for mask in 0u32..(1 << n) {
            let kept: Vec<Msg> = (0..n)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| word[i])
                .collect();
            let k = kept.len() as i32;
            let p = lambda.powi(n as i32 - k) * (1.0 - lambda).powi(k);
            *single.entry(kept).or_insert(0.0) += p;
        }
        let mut next = BTreeMap::new();
        for (prefix, p) in &joint {
            for (w, q) in &single {
                let mut key = prefix.clone();
                key.push(w.clone());
                next.insert(key, p * q);
            }
        }
        joint = next;
    }
    Ok(joint)
}

/// Drops each message independently with probability `lambda`.
pub fn sample_loss_with<R: Rng>(contents: &[Vec<Msg>], lambda: f64, rng: &mut R) -> Vec<Vec<Msg>> {
    contents
        .iter()
        .map(|w| {
            w.iter()
                .copied()
                .filter(|_| rng.random::<f64>() >= lambda)
                .collect()
        })
        .collect()
}

pub fn sample_loss(contents: &[Vec<Msg>], lambda: f64, seed: u64) -> Vec<Vec<Msg>> {
    sample_loss_with(contents, lambda, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Whether `small` embeds into `big` as a scattered subword.
pub fn is_subword(small: &[Msg], big: &[Msg]) -> bool {
    let mut it = big.iter();
    small.iter().all(|m| it.any(|b| b == m))
}

/// Channel-wise subword order on contents.
pub fn contents_leq(small: &[Vec<Msg>], big: &[Vec<Msg>]) -> bool {
    small.len() == big.len() && small.iter().zip(big).all(|(a, b)| is_subword(a, b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcsDocument {
    pub channels: Vec<String>,
    pub alphabet: Vec<String>,
    pub lambda: f64,
    pub controls: Vec<ControlDocument>,
    pub rules: Vec<RuleDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDocument {
    pub id: String,
    pub owner: String,
    pub color: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDocument {
    pub from: String,
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chan: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub msg: Option<String>,
    pub to: String,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Nop => write!(f, "nop"),
            Op::Send { chan, msg } => write!(f, "c{chan}!{msg}"),
            Op::Recv { chan, msg } => write!(f, "c{chan}?{msg}"),
        }
    }
}
