//! Force/avoid partitions and the almost-sure parity recursion on explicit games.
//!
//! Every function works inside a sub-game given by a set of alive states
//! (`within`). Sub-games are never materialized; ids stay those of the root
//! game so that results from nested recursion levels combine directly.

use crate::game::{ExplicitGame, MemorylessStrategy, Owner, Player, StateId, StateSet};

/// Partition of the states into the force set of `player` and the avoid set
/// of the opponent, with witnessing memoryless strategies.
#[derive(Debug, Clone)]
pub struct ForceResult {
    pub player: Player,
    pub force_set: StateSet,
    pub avoid_set: StateSet,
    /// Stage at which a state entered the force set; `None` outside it.
    pub layer: Vec<Option<u32>>,
    /// Choices of `player` on non-target states of the force set.
    pub force_strategy: MemorylessStrategy,
    /// Choices of the opponent on the avoid set.
    pub avoid_strategy: MemorylessStrategy,
}

impl ForceResult {
    /// Number of stages before the fixpoint.
    pub fn stages(&self) -> u32 {
        self.layer.iter().flatten().copied().max().unwrap_or(0)
    }
}

pub fn force(game: &ExplicitGame, player: Player, target: &StateSet) -> ForceResult {
    force_within(game, game.states(), player, target)
}

/// Positive-probability attractor of `target` for `player` inside `within`.
pub fn force_within(
    game: &ExplicitGame,
    within: &StateSet,
    player: Player,
    target: &StateSet,
) -> ForceResult {
    let n = game.capacity();
    let mut reached = target.intersection(within);
    let mut layer = vec![None; n];
    for s in reached.iter() {
        layer[s] = Some(0);
    }
    let mut force_strategy = MemorylessStrategy::new();
    let mut stage = 0;
    loop {
        stage += 1;
        let mut added = Vec::new();
        for s in within.difference(&reached).iter() {
            let inside = || {
                game.successors(s)
                    .iter()
                    .copied()
                    .filter(|&t| within.contains(t))
            };
            let joins = match game.owner(s) {
                Owner::Random => inside().any(|t| reached.contains(t)),
                Owner::Player(p) if p == player => {
                    let choice = inside().filter(|&t| reached.contains(t)).min();
                    if let Some(t) = choice {
                        force_strategy.set(s, t);
                    }
                    choice.is_some()
                }
                Owner::Player(_) => inside().all(|t| reached.contains(t)),
            };
            if joins {
                added.push(s);
            }
        }
        if added.is_empty() {
            break;
        }
        for s in added {
            reached.insert(s);
            layer[s] = Some(stage);
        }
    }

    let avoid_set = within.difference(&reached);
    let opponent = Owner::Player(player.opponent());
    let avoid_strategy = avoid_set
        .iter()
        .filter(|&s| game.owner(s) == opponent)
        .filter_map(|s| lowest_successor_in(game, s, &avoid_set).map(|t| (s, t)))
        .collect();

    ForceResult {
        player,
        force_set: reached,
        avoid_set,
        layer,
        force_strategy,
        avoid_strategy,
    }
}

fn lowest_successor_in(game: &ExplicitGame, s: StateId, set: &StateSet) -> Option<StateId> {
    game.successors(s)
        .iter()
        .copied()
        .filter(|&t| set.contains(t))
        .min()
}

/// One stage of the outer parity iteration.
#[derive(Debug, Clone)]
pub struct ParityStage {
    pub x: StateSet,
    pub z: StateSet,
    pub y: StateSet,
}

/// Outcome of the almost-sure parity recursion at one rank.
#[derive(Debug, Clone)]
pub struct ParityResult {
    pub rank: u32,
    /// The player with the parity of `rank`; wins a.s. on `c_set`.
    pub player: Player,
    pub c_set: StateSet,
    /// Memoryless a.s.-winning strategy for `player` on `c_set`.
    pub strategy_x: MemorylessStrategy,
    /// Memoryless positive-probability strategy for the opponent outside `c_set`.
    pub strategy_y: MemorylessStrategy,
    pub trace: Vec<ParityStage>,
}

/// Almost-sure parity winning region for the player with the parity of `rank`.
///
/// # Panics
/// If some state has a color above `rank`.
pub fn parity_as(game: &ExplicitGame, rank: u32) -> ParityResult {
    assert!(
        game.max_color() <= rank,
        "game has color {} above rank {rank}",
        game.max_color()
    );
    parity_within(game, game.states(), rank)
}

pub fn parity_within(game: &ExplicitGame, within: &StateSet, rank: u32) -> ParityResult {
    let x = Player::of_parity(rank);
    let y = x.opponent();

    if rank == 0 || within.is_empty() {
        // Player 0 wins surely; staying inside the sub-game is all that is asked.
        let strategy_x = within
            .iter()
            .filter(|&s| game.owner(s) == Owner::Player(x))
            .filter_map(|s| lowest_successor_in(game, s, within).map(|t| (s, t)))
            .collect();
        return ParityResult {
            rank,
            player: x,
            c_set: within.clone(),
            strategy_x,
            strategy_y: MemorylessStrategy::new(),
            trace: Vec::new(),
        };
    }

    let top_color = StateSet::from_ids(
        game.capacity(),
        within.iter().filter(|&s| game.color(s) == rank),
    );
    let mut trace = Vec::new();
    let mut strategy_y = MemorylessStrategy::new();
    let mut y_union = game.empty_set();
    loop {
        let x_force = force_within(game, within, y, &y_union);
        let x_set = x_force.force_set.clone();
        let rest = within.difference(&x_set);
        let z_force = force_within(game, &rest, x, &top_color.intersection(&rest));
        let inner = rest.difference(&z_force.force_set);
        let sub = parity_within(game, &inner, rank - 1);

        // f1: force toward earlier Y stages; f2: the inner a.s. strategy.
        strategy_y.absorb(&x_force.force_strategy);
        strategy_y.absorb(&sub.strategy_x);

        let y_set = x_set.union(&sub.c_set);
        trace.push(ParityStage {
            x: x_set.clone(),
            z: z_force.force_set.clone(),
            y: y_set.clone(),
        });

        if sub.c_set.is_empty() {
            // Y = X, so the next force set equals X: the sequence is stable.
            let c_set = rest;
            let mut strategy_x = sub.strategy_y.clone();
            strategy_x.absorb(&z_force.force_strategy);
            for s in top_color.intersection(&c_set).iter() {
                if game.owner(s) == Owner::Player(x) {
                    if let Some(t) = lowest_successor_in(game, s, &c_set) {
                        strategy_x.set(s, t);
                    }
                }
            }
            return ParityResult {
                rank,
                player: x,
                c_set,
                strategy_x,
                strategy_y,
                trace,
            };
        }
        y_union = y_set;
    }
}

/// The four qualitative winning regions.
///
/// With `x` the player of the parity of the top color `nmax`: `x` wins a.s. on
/// `C_nmax`, the opponent a.s. on `C_{nmax+1}`, and each player wins with
/// positive probability on the complement of the other's a.s. set.
#[derive(Debug, Clone)]
pub struct WinningReport {
    pub nmax: u32,
    pub x: Player,
    pub x_as: StateSet,
    pub x_wpp: StateSet,
    pub y_as: StateSet,
    pub y_wpp: StateSet,
    /// Result at rank `nmax`.
    pub lower: ParityResult,
    /// Result at rank `nmax + 1`.
    pub upper: ParityResult,
}

impl WinningReport {
    pub fn almost_sure(&self, p: Player) -> &StateSet {
        if p == self.x {
            &self.x_as
        } else {
            &self.y_as
        }
    }

    pub fn positive(&self, p: Player) -> &StateSet {
        if p == self.x {
            &self.x_wpp
        } else {
            &self.y_wpp
        }
    }

    /// Memoryless a.s.-winning strategy of `p` on its a.s. region.
    pub fn almost_sure_strategy(&self, p: Player) -> &MemorylessStrategy {
        if p == self.x {
            &self.lower.strategy_x
        } else {
            &self.upper.strategy_x
        }
    }
}

pub fn winning_report(game: &ExplicitGame) -> WinningReport {
    winning_report_at(game, game.max_color())
}

/// [`winning_report`] with an explicit top rank (at least the maximal color).
pub fn winning_report_at(game: &ExplicitGame, nmax: u32) -> WinningReport {
    let lower = parity_as(game, nmax);
    let upper = parity_as(game, nmax + 1);
    let all = game.states();
    WinningReport {
        nmax,
        x: lower.player,
        x_as: lower.c_set.clone(),
        x_wpp: all.difference(&upper.c_set),
        y_as: upper.c_set.clone(),
        y_wpp: all.difference(&lower.c_set),
        lower,
        upper,
    }
}
