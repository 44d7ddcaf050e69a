//! Random instances for differential testing.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::automaton::{Dfa, Nfa};
use crate::game::{ExplicitGame, GameBuilder, Owner, Player};
use crate::lcs::{contents_up_to, Op, Sglcs};
use crate::regset::{upward_dfa, ConfigLanguage, Signature};
use crate::strategy::{GuardedRule, RegularStrategy};

#[derive(Debug, Clone, Copy)]
pub struct GameParams {
    pub states: usize,
    pub max_out: usize,
    pub max_color: u32,
    /// Whether random states may occur.
    pub stochastic: bool,
}

pub fn random_game<R: Rng>(rng: &mut R, params: GameParams) -> ExplicitGame {
    let n = params.states.max(1);
    let mut b = GameBuilder::new();
    let mut random = Vec::with_capacity(n);
    for _ in 0..n {
        let owner = match rng.random_range(0..if params.stochastic { 3 } else { 2 }) {
            0 => Owner::Player(Player::Zero),
            1 => Owner::Player(Player::One),
            _ => Owner::Random,
        };
        random.push(owner.is_random());
        b.add_state(owner, rng.random_range(0..=params.max_color));
    }
    let ids: Vec<usize> = (0..n).collect();
    for (s, &is_random) in random.iter().enumerate() {
        let k = rng.random_range(1..=params.max_out.clamp(1, n));
        let succ: Vec<usize> = ids.choose_multiple(rng, k).copied().collect();
        for &t in &succ {
            if is_random {
                b.random_edge(s, t, 1.0 / k as f64);
            } else {
                b.edge(s, t);
            }
        }
    }
    b.build()
}

/// A DFA with a few states and random transitions.
fn random_dfa<R: Rng>(rng: &mut R, symbols: usize) -> Dfa {
    let states = rng.random_range(1..=4);
    let mut n = Nfa::new(symbols);
    for _ in 0..states {
        n.add_state(rng.random_bool(0.4));
    }
    n.add_initial(0);
    for q in 0..states as u32 {
        for a in 0..symbols {
            n.add_edge(q, a, rng.random_range(0..states as u32));
        }
    }
    n.determinize()
}

/// A language mixing empty, full, finite, upward-closed and arbitrary slots.
pub fn random_language<R: Rng>(rng: &mut R, sig: Signature) -> ConfigLanguage {
    let small = contents_up_to(sig.channels, sig.messages, 2);
    ConfigLanguage::from_slots(sig, |_, _| match rng.random_range(0..5) {
        0 => Dfa::empty(sig.symbols()),
        1 => sig.well_formed(),
        k => {
            let count = rng.random_range(1..=3);
            let picked: Vec<_> = small.choose_multiple(rng, count).cloned().collect();
            let finite = sig.words(&picked);
            match k {
                2 => finite,
                3 => upward_dfa(&sig, &finite),
                _ => random_dfa(rng, sig.symbols()),
            }
        }
    })
}

/// A strategy of `player` that, at each owned control, looks at one channel
/// and fires a random rule chosen per case: channel empty, or head equal to
/// each message. Cases without a rule enabled on all of them stay undefined.
pub fn random_regular_strategy<R: Rng>(
    rng: &mut R,
    lcs: &Sglcs,
    player: Player,
) -> RegularStrategy {
    let sig = Signature::of(lcs);
    let mut strategy = RegularStrategy::empty(player);
    for s in (0..lcs.num_controls()).filter(|&s| lcs.owner(s) == player) {
        let chan = rng.random_range(0..lcs.num_channels());
        let mut cases = vec![(None, empty_channel(&sig, chan))];
        for m in 0..lcs.num_messages() {
            cases.push((Some(m as u8), sig.head_is(chan, m as u8)));
        }
        for (head, guard) in cases {
            let options: Vec<usize> = lcs
                .rules_from(s)
                .filter(|(_, r)| match r.op {
                    Op::Nop | Op::Send { .. } => true,
                    Op::Recv { chan: c, msg } => c == chan && head == Some(msg),
                })
                .map(|(i, _)| i)
                .collect();
            if let Some(&rule) = options.choose(rng) {
                strategy.rules.push(GuardedRule {
                    control: s,
                    guard,
                    rule,
                });
            }
        }
    }
    strategy
}

/// Well-formed contents with channel `chan` empty.
fn empty_channel(sig: &Signature, chan: usize) -> Dfa {
    let mut n = Nfa::new(sig.symbols());
    let seg: Vec<u32> = (0..sig.channels)
        .map(|i| n.add_state(i + 1 == sig.channels))
        .collect();
    n.add_initial(seg[0]);
    for i in 0..sig.channels {
        if i != chan {
            for m in 0..sig.messages {
                n.add_edge(seg[i], m, seg[i]);
            }
        }
        if i + 1 < sig.channels {
            n.add_edge(seg[i], sig.separator(), seg[i + 1]);
        }
    }
    n.determinize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::strategy::validate_strategy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn games_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for stochastic in [false, true] {
            for _ in 0..50 {
                let g = random_game(
                    &mut rng,
                    GameParams {
                        states: 7,
                        max_out: 3,
                        max_color: 3,
                        stochastic,
                    },
                );
                assert!(g.validate().is_empty(), "{:?}", g.validate());
                assert!(stochastic || !g.has_random_states());
            }
        }
    }

    #[test]
    fn random_strategies_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (_, lcs) in fixtures::all_lcs() {
            for p in Player::BOTH {
                for _ in 0..10 {
                    let s = random_regular_strategy(&mut rng, &lcs, p);
                    assert!(validate_strategy(&lcs, &s).is_empty());
                }
            }
        }
    }
}
