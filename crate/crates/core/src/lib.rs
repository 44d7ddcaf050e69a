//! Qualitative solvers for 2½-player stochastic parity games.
//!
//! Two engines share one scheme. [`finite`] solves explicit finite game graphs;
//! [`symbolic`] solves games induced by stochastic lossy channel systems
//! ([`lcs`]) over regular sets of configurations ([`regset`]). Winning
//! strategies come out of both: memoryless maps for finite games and
//! guarded-rule lists ([`strategy`]) for channel systems. [`oracle`] and
//! [`sim`] check the results independently.

pub mod automaton;
pub mod finite;
pub mod fixtures;
pub mod game;
pub mod gen;
pub mod lcs;
pub mod oracle;
pub mod regset;
pub mod sim;
pub mod strategy;
pub mod symbolic;

pub use game::{ExplicitGame, GameBuilder, MemorylessStrategy, Owner, Player, StateId, StateSet};
pub use lcs::{Configuration, Sglcs};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/games.md")]
    mod games {}
    #[doc = include_str!("../../../book/src/channel-systems.md")]
    mod channel_systems {}
    #[doc = include_str!("../../../book/src/regular-sets.md")]
    mod regular_sets {}
    #[doc = include_str!("../../../book/src/symbolic-solving.md")]
    mod symbolic_solving {}
    #[doc = include_str!("../../../book/src/strategies.md")]
    mod strategies {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/no-attractor.md")]
    mod no_attractor {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
