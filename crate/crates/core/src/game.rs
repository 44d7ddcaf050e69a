//! Finite explicit game graphs.
//!
//! States are dense integer ids. A game carries an `alive` mask so that a
//! sub-game produced by [`ExplicitGame::restrict`] keeps the ids of its parent
//! and sets computed in either game can be combined directly.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type StateId = usize;

/// One of the two strategic players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "P0")]
    Zero,
    #[serde(rename = "P1")]
    One,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::Zero, Player::One];

    /// The player whose parity matches `color`.
    pub fn of_parity(color: u32) -> Player {
        if color.is_multiple_of(2) {
            Player::Zero
        } else {
            Player::One
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::Zero => 0,
            Player::One => 1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Zero => write!(f, "P0"),
            Player::One => write!(f, "P1"),
        }
    }
}

/// Who resolves the choice at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    Player(Player),
    Random,
}

impl Owner {
    pub fn is_random(self) -> bool {
        matches!(self, Owner::Random)
    }
}

/// Dense set of state ids.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    pub fn empty(capacity: usize) -> Self {
        StateSet(FixedBitSet::with_capacity(capacity))
    }

    pub fn full(capacity: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(capacity);
        bits.insert_range(..);
        StateSet(bits)
    }

    pub fn from_ids<I: IntoIterator<Item = StateId>>(capacity: usize, ids: I) -> Self {
        let mut set = StateSet::empty(capacity);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, id: StateId) -> bool {
        self.0.contains(id)
    }

    pub fn insert(&mut self, id: StateId) {
        self.0.insert(id);
    }

    pub fn remove(&mut self, id: StateId) {
        self.0.set(id, false);
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.ones()
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &StateSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut out = self.0.clone();
        out.union_with(&other.0);
        StateSet(out)
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let mut out = self.0.clone();
        out.intersect_with(&other.0);
        StateSet(out)
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        let mut out = self.0.clone();
        out.difference_with(&other.0);
        StateSet(out)
    }

    pub fn union_with(&mut self, other: &StateSet) {
        self.0.union_with(&other.0);
    }

    pub fn to_vec(&self) -> Vec<StateId> {
        self.iter().collect()
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Partial memoryless strategy: state → chosen successor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemorylessStrategy(BTreeMap<StateId, StateId>);

impl MemorylessStrategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, state: StateId) -> Option<StateId> {
        self.0.get(&state).copied()
    }

    pub fn set(&mut self, state: StateId, succ: StateId) {
        self.0.insert(state, succ);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.0.iter().map(|(&s, &t)| (s, t))
    }

    /// Adds every choice of `other`; existing choices win on overlap.
    pub fn absorb(&mut self, other: &MemorylessStrategy) {
        for (s, t) in other.iter() {
            self.0.entry(s).or_insert(t);
        }
    }

    pub fn domain(&self, capacity: usize) -> StateSet {
        StateSet::from_ids(capacity, self.0.keys().copied())
    }
}

impl FromIterator<(StateId, StateId)> for MemorylessStrategy {
    fn from_iter<I: IntoIterator<Item = (StateId, StateId)>>(iter: I) -> Self {
        MemorylessStrategy(iter.into_iter().collect())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("complement of the removed set is not closable")]
    NotClosable,
    #[error("invalid game document: {0}")]
    Document(String),
}

/// Finite 2½-player game graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitGame {
    owner: Vec<Owner>,
    color: Vec<u32>,
    succ: Vec<Vec<StateId>>,
    /// Parallel to `succ` on random states, empty elsewhere.
    prob: Vec<Vec<f64>>,
    alive: StateSet,
}

/// Incremental construction of an [`ExplicitGame`].
#[derive(Debug, Default)]
pub struct GameBuilder {
    owner: Vec<Owner>,
    color: Vec<u32>,
    succ: Vec<Vec<StateId>>,
    prob: Vec<Vec<f64>>,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, owner: Owner, color: u32) -> StateId {
        self.owner.push(owner);
        self.color.push(color);
        self.succ.push(Vec::new());
        self.prob.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn edge(&mut self, from: StateId, to: StateId) -> &mut Self {
        self.succ[from].push(to);
        self
    }

    pub fn random_edge(&mut self, from: StateId, to: StateId, p: f64) -> &mut Self {
        self.succ[from].push(to);
        self.prob[from].push(p);
        self
    }

    pub fn build(self) -> ExplicitGame {
        let n = self.owner.len();
        ExplicitGame {
            owner: self.owner,
            color: self.color,
            succ: self.succ,
            prob: self.prob,
            alive: StateSet::full(n),
        }
    }
}

/// Result of [`classify_set`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetFlags {
    pub sink_free: bool,
    pub closable: bool,
    pub is_trap_for_player: bool,
}

impl ExplicitGame {
    /// Total id range, including states removed by restriction.
    pub fn capacity(&self) -> usize {
        self.owner.len()
    }

    pub fn states(&self) -> &StateSet {
        &self.alive
    }

    pub fn num_states(&self) -> usize {
        self.alive.len()
    }

    pub fn owner(&self, s: StateId) -> Owner {
        self.owner[s]
    }

    pub fn color(&self, s: StateId) -> u32 {
        self.color[s]
    }

    pub fn successors(&self, s: StateId) -> &[StateId] {
        &self.succ[s]
    }

    /// Probabilities parallel to [`successors`](Self::successors); empty for player states.
    pub fn probabilities(&self, s: StateId) -> &[f64] {
        &self.prob[s]
    }

    pub fn max_color(&self) -> u32 {
        self.alive.iter().map(|s| self.color[s]).max().unwrap_or(0)
    }

    pub fn has_random_states(&self) -> bool {
        self.alive.iter().any(|s| self.owner[s].is_random())
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.capacity())
    }

    /// Alive states owned by `owner`.
    pub fn owned_by(&self, owner: Owner) -> StateSet {
        StateSet::from_ids(
            self.capacity(),
            self.alive.iter().filter(|&s| self.owner[s] == owner),
        )
    }

    pub fn with_color(&self, color: u32) -> StateSet {
        StateSet::from_ids(
            self.capacity(),
            self.alive.iter().filter(|&s| self.color[s] == color),
        )
    }

    /// Structural well-formedness; an empty list means the game is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in self.alive.iter() {
            let succ = &self.succ[s];
            if succ.is_empty() {
                out.push(format!("state {s}: no successor"));
                continue;
            }
            if let Some(&t) = succ.iter().find(|&&t| !self.alive.contains(t)) {
                out.push(format!("state {s}: successor {t} out of range"));
            }
            let mut sorted = succ.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != succ.len() {
                out.push(format!("state {s}: duplicate successor"));
            }
            match self.owner[s] {
                Owner::Random => {
                    let probs = &self.prob[s];
                    if probs.len() != succ.len() {
                        out.push(format!("state {s}: prob missing for some successor"));
                        continue;
                    }
                    if let Some(p) = probs.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
                        out.push(format!("state {s}: prob {p} out of (0,1]"));
                    }
                    let sum: f64 = probs.iter().sum();
                    if (sum - 1.0).abs() > 1e-12 {
                        out.push(format!("state {s}: prob sum {sum}"));
                    }
                }
                Owner::Player(_) => {
                    if !self.prob[s].is_empty() {
                        out.push(format!("state {s}: prob on non-random state"));
                    }
                }
            }
        }
        out
    }

    /// The sub-game on the complement of `removed`.
    ///
    /// Ids are preserved; removed states are masked out and edges into them
    /// dropped.
    pub fn restrict(&self, removed: &StateSet) -> Result<ExplicitGame, GameError> {
        let kept = self.alive.difference(removed);
        if kept.is_empty() || !classify_within(self, &self.alive, &kept, Player::Zero).closable {
            return Err(GameError::NotClosable);
        }
        let mut game = self.clone();
        for s in 0..self.capacity() {
            if !kept.contains(s) {
                game.succ[s].clear();
                game.prob[s].clear();
                continue;
            }
            if game.succ[s].iter().all(|&t| kept.contains(t)) {
                continue;
            }
            // Only player states lose edges here: closability keeps random rows intact.
            game.succ[s].retain(|&t| kept.contains(t));
        }
        game.alive = kept;
        Ok(game)
    }

    pub fn to_document(&self) -> GameDocument {
        GameDocument {
            states: self
                .alive
                .iter()
                .map(|s| StateDocument {
                    id: s,
                    owner: match self.owner[s] {
                        Owner::Player(Player::Zero) => OwnerTag::P0,
                        Owner::Player(Player::One) => OwnerTag::P1,
                        Owner::Random => OwnerTag::R,
                    },
                    color: self.color[s],
                    succ: self.succ[s].clone(),
                    prob: self.owner[s].is_random().then(|| {
                        self.succ[s]
                            .iter()
                            .zip(&self.prob[s])
                            .map(|(t, &p)| (t.to_string(), p))
                            .collect()
                    }),
                })
                .collect(),
        }
    }

    /// Builds a game from its JSON document form.
    ///
    /// Ids must be exactly `0..n` in any order. The result is not validated.
    pub fn from_document(doc: &GameDocument) -> Result<ExplicitGame, GameError> {
        let n = doc.states.len();
        let mut seen = vec![false; n];
        for st in &doc.states {
            if st.id >= n || std::mem::replace(&mut seen[st.id], true) {
                return Err(GameError::Document(format!(
                    "state ids must be a permutation of 0..{n}; offending id {}",
                    st.id
                )));
            }
        }
        let mut sorted: Vec<&StateDocument> = doc.states.iter().collect();
        sorted.sort_by_key(|st| st.id);
        let mut b = GameBuilder::new();
        for st in &sorted {
            let owner = match st.owner {
                OwnerTag::P0 => Owner::Player(Player::Zero),
                OwnerTag::P1 => Owner::Player(Player::One),
                OwnerTag::R => Owner::Random,
            };
            b.add_state(owner, st.color);
        }
        for st in &sorted {
            match (&st.owner, &st.prob) {
                (OwnerTag::R, Some(prob)) => {
                    for key in prob.keys() {
                        let ok = key.parse::<usize>().map(|t| st.succ.contains(&t));
                        if ok != Ok(true) {
                            return Err(GameError::Document(format!(
                                "state {}: prob key {key} is not a successor",
                                st.id
                            )));
                        }
                    }
                    for &t in &st.succ {
                        let p = prob.get(&t.to_string()).copied().ok_or_else(|| {
                            GameError::Document(format!("state {}: prob missing for {t}", st.id))
                        })?;
                        b.random_edge(st.id, t, p);
                    }
                }
                (OwnerTag::R, None) => {
                    return Err(GameError::Document(format!(
                        "state {}: random state without prob",
                        st.id
                    )))
                }
                (_, Some(_)) => {
                    return Err(GameError::Document(format!(
                        "state {}: prob given for a player state",
                        st.id
                    )))
                }
                (_, None) => {
                    for &t in &st.succ {
                        b.edge(st.id, t);
                    }
                }
            }
        }
        Ok(b.build())
    }
}

/// JSON form of an explicit game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDocument {
    pub states: Vec<StateDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub id: StateId,
    pub owner: OwnerTag,
    pub color: u32,
    pub succ: Vec<StateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OwnerTag {
    P0,
    P1,
    R,
}

/// `pre` = states with some successor in `q`; `dual_pre` = states with all successors in `q`.
pub fn pre_sets(game: &ExplicitGame, q: &StateSet) -> (StateSet, StateSet) {
    let within = game.states();
    (
        pre_within(game, within, q),
        dual_pre_within(game, within, q),
    )
}

/// Predecessors of `q` inside the sub-game whose states are `within`.
pub fn pre_within(game: &ExplicitGame, within: &StateSet, q: &StateSet) -> StateSet {
    let mut out = game.empty_set();
    for s in within.iter() {
        if game
            .successors(s)
            .iter()
            .any(|&t| q.contains(t) && within.contains(t))
        {
            out.insert(s);
        }
    }
    out
}

pub fn dual_pre_within(game: &ExplicitGame, within: &StateSet, q: &StateSet) -> StateSet {
    within.difference(&pre_within(game, within, &within.difference(q)))
}

/// Sink-freeness, closability and trap status of `q` for `player`.
///
/// `is_trap_for_player` means `player` cannot leave `q`.
pub fn classify_set(game: &ExplicitGame, q: &StateSet, player: Player) -> SetFlags {
    classify_within(game, game.states(), q, player)
}

pub(crate) fn classify_within(
    game: &ExplicitGame,
    within: &StateSet,
    q: &StateSet,
    player: Player,
) -> SetFlags {
    let mut sink_free = true;
    let mut closable_extra = true;
    let mut trap_extra = true;
    for s in q.iter() {
        let succ: Vec<StateId> = game
            .successors(s)
            .iter()
            .copied()
            .filter(|&t| within.contains(t))
            .collect();
        let all_inside = succ.iter().all(|&t| q.contains(t));
        if !succ.iter().any(|&t| q.contains(t)) {
            sink_free = false;
        }
        match game.owner(s) {
            Owner::Random if !all_inside => closable_extra = false,
            Owner::Player(p) if p == player && !all_inside => trap_extra = false,
            _ => {}
        }
    }
    let closable = sink_free && closable_extra;
    SetFlags {
        sink_free,
        closable,
        is_trap_for_player: closable && trap_extra,
    }
}
