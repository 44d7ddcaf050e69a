//! Regular memoryless strategies for channel systems.
//!
//! A [`RegularStrategy`] is a list of guarded rules. At a configuration
//! `(s, x, 1)` of its owner it fires the unique rule whose control is `s` and
//! whose guard contains `x`, and is undefined when no guard matches.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::automaton::{AutomatonTable, Dfa};
use crate::game::Player;
use crate::lcs::{Configuration, ControlId, Op, RuleId, Sglcs};
use crate::regset::{deadlock_contents, enabled_contents, ConfigLanguage, Signature};
use crate::symbolic::{SymForceResult, SymParityResult, SymSolver};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("no successor in the target set from {0}")]
    NoSelection(String),
    #[error("set is not a trap for {0}")]
    NotATrap(Player),
    #[error("configuration is in the wrong phase for this operation")]
    PhaseMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedRule {
    pub control: ControlId,
    /// Channel contents, encoded as in [`ConfigLanguage`] slots.
    pub guard: Dfa,
    pub rule: RuleId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularStrategy {
    pub owner: Player,
    pub rules: Vec<GuardedRule>,
}

impl RegularStrategy {
    pub fn empty(owner: Player) -> Self {
        RegularStrategy {
            owner,
            rules: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Appends the rules of `other`, which must have the same owner.
    pub fn extend(&mut self, other: RegularStrategy) {
        assert_eq!(self.owner, other.owner);
        self.rules.extend(other.rules);
    }

    /// The configurations where the strategy is defined.
    pub fn domain(&self, lcs: &Sglcs) -> ConfigLanguage {
        let sig = Signature::of(lcs);
        ConfigLanguage::from_slots(sig, |s, b| {
            let mut d = Dfa::empty(sig.symbols());
            if b == 1 {
                for g in self.rules.iter().filter(|g| g.control == s) {
                    d = d.union(&g.guard);
                }
            }
            d
        })
    }

    /// The rule this strategy fires at `config`, if any.
    pub fn choice(
        &self,
        lcs: &Sglcs,
        config: &Configuration,
    ) -> Result<Option<RuleId>, StrategyError> {
        if config.bit != 1 {
            return Err(StrategyError::PhaseMismatch);
        }
        let word = Signature::of(lcs).encode(&config.contents);
        Ok(self
            .rules
            .iter()
            .find(|g| g.control == config.control && g.guard.accepts(&word))
            .map(|g| g.rule))
    }

    pub fn induced_step(
        &self,
        lcs: &Sglcs,
        config: &Configuration,
    ) -> Result<Option<Configuration>, StrategyError> {
        Ok(self
            .choice(lcs, config)?
            .map(|r| lcs.apply(&lcs.rules()[r], config)))
    }

    /// One line per rule: control, guard size, operation, target.
    pub fn summary(&self, lcs: &Sglcs) -> Vec<String> {
        self.rules
            .iter()
            .map(|g| {
                format!(
                    "{} guard={} {}",
                    lcs.control_name(g.control),
                    g.guard.num_states(),
                    lcs.describe_rule(&lcs.rules()[g.rule])
                )
            })
            .collect()
    }

    pub fn to_document(&self, lcs: &Sglcs) -> StrategyDocument {
        let sig = Signature::of(lcs);
        let mut guards = BTreeMap::new();
        let rules = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let name = format!("g{i}");
                guards.insert(name.clone(), g.guard.to_table(|a| sig.symbol_label(lcs, a)));
                let rule = &lcs.rules()[g.rule];
                RuleEntry {
                    control: lcs.control_name(g.control).to_string(),
                    guard: name,
                    op: lcs.describe_rule(rule),
                    rule: g.rule,
                    to: lcs.control_name(rule.to).to_string(),
                }
            })
            .collect();
        StrategyDocument {
            owner: self.owner.to_string(),
            rules,
            guards,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyDocument {
    pub owner: String,
    pub rules: Vec<RuleEntry>,
    pub guards: BTreeMap<String, AutomatonTable>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleEntry {
    pub control: String,
    pub guard: String,
    pub op: String,
    pub rule: RuleId,
    pub to: String,
}

/// Violations of the guarded-rule conditions, or an empty list.
pub fn validate_strategy(lcs: &Sglcs, strategy: &RegularStrategy) -> Vec<String> {
    let sig = Signature::of(lcs);
    let mut out = Vec::new();
    for (i, g) in strategy.rules.iter().enumerate() {
        let Some(rule) = lcs.rules().get(g.rule) else {
            out.push(format!("rule {i}: unknown rule {}", g.rule));
            continue;
        };
        if rule.from != g.control {
            out.push(format!("rule {i}: rule does not start at its control"));
        }
        if g.control >= lcs.num_controls() || lcs.owner(g.control) != strategy.owner {
            out.push(format!("rule {i}: control not owned by {}", strategy.owner));
        }
        if g.guard.is_empty() {
            out.push(format!("rule {i}: empty guard"));
        }
        if !g.guard.is_subset(&sig.well_formed()) {
            out.push(format!("rule {i}: guard has malformed contents"));
        }
        if let Op::Recv { chan, msg } = rule.op {
            if !g.guard.is_subset(&sig.head_is(chan, msg)) {
                out.push(format!("rule {i}: head condition"));
            }
        }
    }
    for s in 0..lcs.num_controls() {
        let guards: Vec<&GuardedRule> = strategy.rules.iter().filter(|g| g.control == s).collect();
        let overlap = guards.iter().enumerate().any(|(i, a)| {
            guards[i + 1..]
                .iter()
                .any(|b| !a.guard.intersection(&b.guard).is_empty())
        });
        if overlap {
            out.push(format!("{}: guards overlap", lcs.control_name(s)));
        }
    }
    out
}

/// A strategy of `player` picking, from every configuration of `q` it owns, a
/// rule leading into `q_next`.
///
/// Rules are tried in declaration order; the guard of each rule is what it
/// covers that earlier rules have not. Owned configurations without enabled
/// rules move to their loss step on their own and are left out of the domain
/// when that step lands in `q_next`.
pub fn selection_strategy(
    lcs: &Sglcs,
    player: Player,
    q: &ConfigLanguage,
    q_next: &ConfigLanguage,
) -> Result<RegularStrategy, StrategyError> {
    let sig = Signature::of(lcs);
    let mut strategy = RegularStrategy::empty(player);
    for s in (0..lcs.num_controls()).filter(|&s| lcs.owner(s) == player) {
        let need = q.slot(s, 1);
        if need.is_empty() {
            continue;
        }
        let stuck = deadlock_contents(lcs, s).intersection(q_next.slot(s, 0));
        let need = need.difference(&stuck);
        let mut covered = Dfa::empty(sig.symbols());
        for (i, rule) in lcs.rules_from(s) {
            let reach = q_next.pre_rule(rule);
            let fresh = reach.slot(s, 1).intersection(&need).difference(&covered);
            if fresh.is_empty() {
                continue;
            }
            covered = covered.union(&fresh);
            strategy.rules.push(GuardedRule {
                control: s,
                guard: fresh,
                rule: i,
            });
        }
        let missing = need.difference(&covered);
        if let Some(w) = missing.shortest_word() {
            let c = Configuration::new(s, sig.decode(&w), 1);
            return Err(StrategyError::NoSelection(lcs.format_config(&c)));
        }
    }
    Ok(strategy)
}

/// Moves from every layer of a force set into the layer below.
pub fn force_strategy_syn(lcs: &Sglcs, force: &SymForceResult) -> RegularStrategy {
    let sig = Signature::of(lcs);
    let player = force.player;
    let owned = ConfigLanguage::slots_where(sig, |s, b| b == 1 && lcs.owner(s) == player);
    let mut strategy = RegularStrategy::empty(player);
    for w in force.layers.windows(2) {
        let fresh = w[1].difference(&w[0]).intersection(&owned);
        let part = selection_strategy(lcs, player, &fresh, &w[0])
            .expect("every new layer member has a successor in the layer below");
        strategy.extend(part);
    }
    strategy
}

/// Keeps play of `player` inside `trap`, which the opponent must not be able
/// to leave within the sub-game on `restrict`.
pub fn avoid_strategy_syn(
    solver: &SymSolver,
    player: Player,
    trap: &ConfigLanguage,
    restrict: &ConfigLanguage,
) -> Result<RegularStrategy, StrategyError> {
    if !solver.is_trap_for(trap, player.opponent(), restrict) {
        return Err(StrategyError::NotATrap(player.opponent()));
    }
    let need = trap.intersection(solver.owned_by(player));
    selection_strategy(solver.lcs(), player, &need, trap)
}

/// Like [`avoid_strategy_syn`], but only where some successor leaves `trap`.
fn steer_inside(solver: &SymSolver, player: Player, trap: &ConfigLanguage) -> RegularStrategy {
    let stays = solver.dual_pre(trap, solver.universe());
    let need = trap
        .intersection(solver.owned_by(player))
        .difference(&stays);
    selection_strategy(solver.lcs(), player, &need, trap)
        .expect("owned configurations of a trap have a successor inside")
}

/// Winning strategies for both players from a parity result.
///
/// The first strategy belongs to the player the result is solved for and
/// lives on `c_set`; the second belongs to the opponent and lives on the rest
/// of the restriction. At rank 0 the first one only steers configurations
/// that could leave `c_set`.
pub fn parity_strategy_syn(
    solver: &SymSolver,
    result: &SymParityResult,
) -> (RegularStrategy, RegularStrategy) {
    let lcs = solver.lcs();
    let x = result.player;
    let y = x.opponent();
    let mut strategy_x = RegularStrategy::empty(x);
    let mut strategy_y = RegularStrategy::empty(y);
    let Some(last) = result.stages.last() else {
        return (steer_inside(solver, x, &result.c_set), strategy_y);
    };

    let (_, sub_y) = parity_strategy_syn(solver, &last.sub);
    strategy_x.extend(sub_y);
    strategy_x.extend(force_strategy_syn(lcs, &last.z_force));
    let top = solver
        .with_color(result.rank)
        .intersection(&last.z_force.layers[0])
        .intersection(solver.owned_by(x));
    let f3 = selection_strategy(lcs, x, &top, &result.c_set)
        .expect("the avoid set of the opponent is closable for x");
    strategy_x.extend(f3);

    for stage in &result.stages {
        strategy_y.extend(force_strategy_syn(lcs, &stage.x_force));
        let (sub_x, _) = parity_strategy_syn(solver, &stage.sub);
        strategy_y.extend(sub_x);
    }
    (strategy_x, strategy_y)
}

/// The induced memoryless selection of both players at a configuration, with
/// `None` where the strategy of the owner is undefined.
pub fn induced_choice(
    lcs: &Sglcs,
    strategies: [&RegularStrategy; 2],
    config: &Configuration,
) -> Result<Option<RuleId>, StrategyError> {
    let owner = lcs.owner(config.control);
    strategies[owner.index()].choice(lcs, config)
}

/// Contents on which `rule` can fire, for building guards by hand.
pub fn rule_enabled_guard(lcs: &Sglcs, rule: RuleId) -> Dfa {
    enabled_contents(lcs, &lcs.rules()[rule])
}
