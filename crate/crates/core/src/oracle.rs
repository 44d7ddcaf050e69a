//! Independent reference checkers for the explicit solver.
//!
//! None of these reuse the force/parity code in [`crate::finite`]:
//! [`zielonka`] is the classical recursion for games without random states,
//! [`qualitative_mc_check`] analyses the bottom SCCs of the finite Markov chain
//! left once both players fix memoryless strategies, and [`enumerate_verify`]
//! runs that analysis over every memoryless strategy profile.

use petgraph::algo::kosaraju_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use thiserror::Error;

use crate::game::{
    ExplicitGame, GameBuilder, MemorylessStrategy, Owner, Player, StateId, StateSet,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("game has random states")]
    HasRandomStates,
    #[error("{profiles} strategy profiles exceed the enumeration limit of {limit}")]
    TooLarge { profiles: u128, limit: u128 },
}

pub const PROFILE_LIMIT: u128 = 1_000_000;

/// Sure-winning regions and strategies of a game without random states.
#[derive(Debug, Clone)]
pub struct ZielonkaSolution {
    pub regions: [StateSet; 2],
    pub strategies: [MemorylessStrategy; 2],
}

pub fn zielonka(game: &ExplicitGame) -> Result<ZielonkaSolution, OracleError> {
    if game.has_random_states() {
        return Err(OracleError::HasRandomStates);
    }
    Ok(solve_zielonka(game, game.states()))
}

fn solve_zielonka(game: &ExplicitGame, arena: &StateSet) -> ZielonkaSolution {
    let n = game.capacity();
    if arena.is_empty() {
        return ZielonkaSolution {
            regions: [StateSet::empty(n), StateSet::empty(n)],
            strategies: Default::default(),
        };
    }
    let top = arena.iter().map(|s| game.color(s)).max().unwrap_or(0);
    let alpha = Player::of_parity(top);
    let beta = alpha.opponent();
    let heads = StateSet::from_ids(n, arena.iter().filter(|&s| game.color(s) == top));
    let (attr, attr_strategy) = attractor(game, arena, alpha, &heads);

    let first = solve_zielonka(game, &arena.difference(&attr));
    if first.regions[beta.index()].is_empty() {
        let mut strategies = first.strategies;
        strategies[alpha.index()].absorb(&attr_strategy);
        for s in heads.iter() {
            if game.owner(s) == Owner::Player(alpha) {
                let t = game
                    .successors(s)
                    .iter()
                    .copied()
                    .find(|&t| arena.contains(t))
                    .expect("sub-arena of a Zielonka recursion is sink-free");
                strategies[alpha.index()].set(s, t);
            }
        }
        let mut regions = [StateSet::empty(n), StateSet::empty(n)];
        regions[alpha.index()] = arena.clone();
        return ZielonkaSolution {
            regions,
            strategies,
        };
    }

    let lost = &first.regions[beta.index()];
    let (b_attr, b_strategy) = attractor(game, arena, beta, lost);
    let second = solve_zielonka(game, &arena.difference(&b_attr));
    let mut regions = second.regions;
    regions[beta.index()].union_with(&b_attr);
    let mut strategies = second.strategies;
    strategies[beta.index()].absorb(&first.strategies[beta.index()]);
    strategies[beta.index()].absorb(&b_strategy);
    ZielonkaSolution {
        regions,
        strategies,
    }
}

/// Classical sure attractor, written with successor counters.
fn attractor(
    game: &ExplicitGame,
    arena: &StateSet,
    player: Player,
    target: &StateSet,
) -> (StateSet, MemorylessStrategy) {
    let n = game.capacity();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    let mut remaining = vec![0usize; n];
    for s in arena.iter() {
        for &t in game.successors(s) {
            if arena.contains(t) {
                preds[t].push(s);
                remaining[s] += 1;
            }
        }
    }
    let mut attr = target.intersection(arena);
    let mut queue: Vec<StateId> = attr.to_vec();
    let mut strategy = MemorylessStrategy::new();
    while let Some(t) = queue.pop() {
        for &s in &preds[t] {
            if attr.contains(s) {
                continue;
            }
            let joins = if game.owner(s) == Owner::Player(player) {
                strategy.set(s, t);
                true
            } else {
                remaining[s] -= 1;
                remaining[s] == 0
            };
            if joins {
                attr.insert(s);
                queue.push(s);
            }
        }
    }
    (attr, strategy)
}

/// The finite transition graph left when both players fix memoryless strategies.
#[derive(Debug, Clone)]
pub struct InducedChain {
    pub nodes: Vec<StateId>,
    pub edges: Vec<(StateId, StateId)>,
}

/// Qualitative outcome of a fixed strategy profile from one start state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QualitativeOutcome {
    pub as_win_player: Option<Player>,
    /// Indexed by player: does that player win with positive probability?
    pub wpp: [bool; 2],
}

impl QualitativeOutcome {
    pub fn wpp_winners(&self) -> Vec<Player> {
        Player::BOTH
            .into_iter()
            .filter(|p| self.wpp[p.index()])
            .collect()
    }
}

/// Successor choice with deterministic completion: an undefined or illegal
/// choice falls back to the lowest-id alive successor.
fn chosen(game: &ExplicitGame, strategies: [&MemorylessStrategy; 2], s: StateId) -> Vec<StateId> {
    let alive = game.states();
    let legal: Vec<StateId> = game
        .successors(s)
        .iter()
        .copied()
        .filter(|&t| alive.contains(t))
        .collect();
    match game.owner(s) {
        Owner::Random => legal,
        Owner::Player(p) => {
            let pick = strategies[p.index()]
                .get(s)
                .filter(|t| legal.contains(t))
                .or_else(|| legal.iter().copied().min());
            pick.into_iter().collect()
        }
    }
}

pub fn induced_chain(
    game: &ExplicitGame,
    strategies: [&MemorylessStrategy; 2],
    start: StateId,
) -> InducedChain {
    let mut seen = StateSet::empty(game.capacity());
    let mut stack = vec![start];
    seen.insert(start);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    while let Some(s) = stack.pop() {
        nodes.push(s);
        for t in chosen(game, strategies, s) {
            edges.push((s, t));
            if !seen.contains(t) {
                seen.insert(t);
                stack.push(t);
            }
        }
    }
    nodes.sort_unstable();
    InducedChain { nodes, edges }
}

/// Per-state outcomes of one profile, computed over all alive states at once.
fn profile_outcomes(
    game: &ExplicitGame,
    strategies: [&MemorylessStrategy; 2],
) -> Vec<QualitativeOutcome> {
    let n = game.capacity();
    let mut graph: DiGraph<StateId, ()> = DiGraph::new();
    let mut index = vec![NodeIndex::end(); n];
    for s in game.states().iter() {
        index[s] = graph.add_node(s);
    }
    for s in game.states().iter() {
        for t in chosen(game, strategies, s) {
            graph.add_edge(index[s], index[t], ());
        }
    }

    // parity_reach[p][s]: s reaches a bottom SCC whose top color has parity p.
    let mut parity_reach = [vec![false; n], vec![false; n]];
    let mut component = vec![usize::MAX; n];
    let sccs = kosaraju_scc(&graph);
    for (ci, scc) in sccs.iter().enumerate() {
        for &v in scc {
            component[graph[v]] = ci;
        }
    }
    let mut reverse: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for e in graph.edge_indices() {
        let (a, b) = graph.edge_endpoints(e).unwrap();
        reverse[graph[b]].push(graph[a]);
    }
    for (ci, scc) in sccs.iter().enumerate() {
        let bottom = scc
            .iter()
            .all(|&v| graph.neighbors(v).all(|w| component[graph[w]] == ci));
        if !bottom {
            continue;
        }
        let top = scc.iter().map(|&v| game.color(graph[v])).max().unwrap();
        let reach = &mut parity_reach[Player::of_parity(top).index()];
        let mut stack: Vec<StateId> = scc.iter().map(|&v| graph[v]).collect();
        while let Some(s) = stack.pop() {
            if reach[s] {
                continue;
            }
            reach[s] = true;
            stack.extend(reverse[s].iter().copied().filter(|&p| !reach[p]));
        }
    }

    (0..n)
        .map(|s| {
            let wpp = [parity_reach[0][s], parity_reach[1][s]];
            let as_win_player = match wpp {
                [true, false] => Some(Player::Zero),
                [false, true] => Some(Player::One),
                _ => None,
            };
            QualitativeOutcome { as_win_player, wpp }
        })
        .collect()
}

/// Classifies the run distribution from `start` under a fixed memoryless
/// profile by the parity of the top color in each reachable bottom SCC.
///
/// Partial strategies are completed by the lowest-id successor.
pub fn qualitative_mc_check(
    game: &ExplicitGame,
    strategies: [&MemorylessStrategy; 2],
    start: StateId,
) -> QualitativeOutcome {
    let chain = induced_chain(game, strategies, start);
    let mut sub = GameBuilder::new();
    let mut local = vec![usize::MAX; game.capacity()];
    for &s in &chain.nodes {
        local[s] = sub.add_state(Owner::Random, game.color(s));
    }
    for &(s, t) in &chain.edges {
        sub.edge(local[s], local[t]);
    }
    let sub = sub.build();
    let none = MemorylessStrategy::new();
    profile_outcomes(&sub, [&none, &none])[local[start]]
}

/// Every memoryless strategy of `player`, in lexicographic order of choices.
fn all_strategies(game: &ExplicitGame, player: Player) -> Vec<MemorylessStrategy> {
    let owned: Vec<(StateId, Vec<StateId>)> = game
        .states()
        .iter()
        .filter(|&s| game.owner(s) == Owner::Player(player))
        .map(|s| {
            let succ = game
                .successors(s)
                .iter()
                .copied()
                .filter(|&t| game.states().contains(t))
                .collect();
            (s, succ)
        })
        .collect();
    let mut out = vec![MemorylessStrategy::new()];
    for (s, succ) in owned {
        out = out
            .into_iter()
            .flat_map(|base| {
                succ.iter().map(move |&t| {
                    let mut next = base.clone();
                    next.set(s, t);
                    next
                })
            })
            .collect();
    }
    out
}

fn profile_count(game: &ExplicitGame) -> u128 {
    game.states()
        .iter()
        .filter(|&s| !game.owner(s).is_random())
        .map(|s| game.successors(s).len() as u128)
        .product()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Confirmed,
    Refuted(Counterexample),
}

/// A state on which the claim and the enumeration disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub state: StateId,
    /// Whether the state was in the claimed set.
    pub claimed: bool,
    /// For an unclaimed state: an x-strategy winning a.s. from it against every
    /// memoryless opponent.
    pub x_strategy: Option<MemorylessStrategy>,
    /// For a claimed state: an opponent strategy winning with positive
    /// probability against every memoryless x-strategy, when one exists.
    pub y_strategy: Option<MemorylessStrategy>,
}

/// Checks that `claimed` is exactly the set of states from which some
/// memoryless strategy of `x` wins a.s. against every memoryless opponent.
pub fn enumerate_verify(
    game: &ExplicitGame,
    x: Player,
    claimed: &StateSet,
) -> Result<Verdict, OracleError> {
    let profiles = profile_count(game);
    if profiles > PROFILE_LIMIT {
        return Err(OracleError::TooLarge {
            profiles,
            limit: PROFILE_LIMIT,
        });
    }
    let y = x.opponent();
    let xs = all_strategies(game, x);
    let ys = all_strategies(game, y);
    let n = game.capacity();

    // table[i][j] = per-state outcomes of (xs[i], ys[j]).
    let table: Vec<Vec<Vec<QualitativeOutcome>>> = xs
        .par_iter()
        .map(|sx| {
            ys.iter()
                .map(|sy| {
                    let mut pair = [sx, sx];
                    pair[y.index()] = sy;
                    profile_outcomes(game, pair)
                })
                .collect()
        })
        .collect();

    let x_wins = |i: usize, s: StateId| table[i].iter().all(|row| row[s].as_win_player == Some(x));
    let y_refutes = |j: usize, s: StateId| table.iter().all(|rows| rows[j][s].wpp[y.index()]);

    for s in game.states().iter() {
        let winner = (0..xs.len()).find(|&i| x_wins(i, s));
        let in_claim = claimed.contains(s);
        match (in_claim, winner) {
            (true, None) => {
                let refuter = (0..ys.len()).find(|&j| y_refutes(j, s));
                return Ok(Verdict::Refuted(Counterexample {
                    state: s,
                    claimed: true,
                    x_strategy: None,
                    y_strategy: refuter.map(|j| ys[j].clone()),
                }));
            }
            (false, Some(i)) => {
                return Ok(Verdict::Refuted(Counterexample {
                    state: s,
                    claimed: false,
                    x_strategy: Some(xs[i].clone()),
                    y_strategy: None,
                }));
            }
            _ => {}
        }
    }
    debug_assert!(claimed.iter().all(|s| s < n));
    Ok(Verdict::Confirmed)
}

/// Product of `game` with a `size`-valued memory updated only by `mem_player`.
///
/// State `(s, k)` gets id `s * size + k`. At its own states `mem_player` picks
/// the successor together with the next memory value; elsewhere memory is
/// kept. Memoryless strategies of `mem_player` in the product are
/// finite-memory strategies in `game`.
pub fn memory_product(game: &ExplicitGame, mem_player: Player, size: usize) -> ExplicitGame {
    assert!(size >= 1);
    let mut b = GameBuilder::new();
    for s in 0..game.capacity() {
        for _ in 0..size {
            b.add_state(game.owner(s), game.color(s));
        }
    }
    let id = |s: StateId, k: usize| s * size + k;
    for s in game.states().iter() {
        for k in 0..size {
            match game.owner(s) {
                Owner::Random => {
                    for (&t, &p) in game.successors(s).iter().zip(game.probabilities(s)) {
                        b.random_edge(id(s, k), id(t, k), p);
                    }
                }
                Owner::Player(p) if p == mem_player => {
                    for &t in game.successors(s) {
                        for k2 in 0..size {
                            b.edge(id(s, k), id(t, k2));
                        }
                    }
                }
                Owner::Player(_) => {
                    for &t in game.successors(s) {
                        b.edge(id(s, k), id(t, k));
                    }
                }
            }
        }
    }
    let product = b.build();
    let removed = StateSet::from_ids(
        product.capacity(),
        (0..game.capacity())
            .filter(|&s| !game.states().contains(s))
            .flat_map(|s| (0..size).map(move |k| id(s, k))),
    );
    if removed.is_empty() {
        product
    } else {
        product
            .restrict(&removed)
            .expect("dead product states are unreachable from live ones")
    }
}
