//! The force and parity schemes over regular configuration sets.
//!
//! Sub-games are never built as channel systems. Each call carries a
//! restriction language and uses predecessor operators relative to it.
//! Every fixpoint loop counts its stages against a ceiling and fails loudly
//! if the ceiling is reached.

use std::cell::RefCell;

use thiserror::Error;

use crate::game::Player;
use crate::lcs::Sglcs;
use crate::regset::{ConfigLanguage, PreMode, Signature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymError {
    #[error("{stage} did not stabilize within {ceiling} stages")]
    CeilingExceeded { stage: String, ceiling: usize },
    #[error("restriction is not closable")]
    NotClosable,
    #[error("target is not contained in the restriction")]
    TargetOutsideRestriction,
}

#[derive(Debug, Clone)]
pub struct SymForceResult {
    pub player: Player,
    /// `R_0 ⊆ R_1 ⊆ … ⊆ R_j` with `R_0` the target and `R_{j+1} = R_j`.
    pub layers: Vec<ConfigLanguage>,
    pub force_set: ConfigLanguage,
    pub avoid_set: ConfigLanguage,
    pub restrict: ConfigLanguage,
}

impl SymForceResult {
    /// Number of strict growth steps.
    pub fn stages(&self) -> usize {
        self.layers.len() - 1
    }
}

/// One round of the outer loop of the parity scheme.
#[derive(Debug, Clone)]
pub struct SymStage {
    pub x_force: SymForceResult,
    pub z_force: SymForceResult,
    /// The rank − 1 result on what `X` and `Z` leave over.
    pub sub: SymParityResult,
    pub y: ConfigLanguage,
}

#[derive(Debug, Clone)]
pub struct SymParityResult {
    pub rank: u32,
    pub player: Player,
    pub restrict: ConfigLanguage,
    pub c_set: ConfigLanguage,
    pub stages: Vec<SymStage>,
}

impl SymParityResult {
    pub fn x_last(&self) -> ConfigLanguage {
        self.restrict.difference(&self.c_set)
    }
}

#[derive(Debug, Clone)]
pub struct SymReport {
    pub nmax: u32,
    pub x: Player,
    pub x_as: ConfigLanguage,
    pub x_wpp: ConfigLanguage,
    pub y_as: ConfigLanguage,
    pub y_wpp: ConfigLanguage,
    /// The scheme at rank `nmax`, solved for `x`.
    pub lower: SymParityResult,
    /// The scheme at rank `nmax + 1`, solved for the opponent of `x`.
    pub upper: SymParityResult,
}

impl SymReport {
    pub fn almost_sure(&self, p: Player) -> &ConfigLanguage {
        if p == self.x {
            &self.x_as
        } else {
            &self.y_as
        }
    }

    pub fn positive(&self, p: Player) -> &ConfigLanguage {
        if p == self.x {
            &self.x_wpp
        } else {
            &self.y_wpp
        }
    }

    /// The parity result whose `c_set` is the a.s. region of `p`.
    pub fn result_for(&self, p: Player) -> &SymParityResult {
        if p == self.x {
            &self.lower
        } else {
            &self.upper
        }
    }
}

pub fn default_ceiling(lcs: &Sglcs) -> usize {
    10 * lcs.num_controls() * 2
}

/// Solver context: the system, its fixed slot languages, the ceiling and the
/// stage-trace log.
pub struct SymSolver<'a> {
    lcs: &'a Sglcs,
    sig: Signature,
    ceiling: usize,
    universe: ConfigLanguage,
    random: ConfigLanguage,
    owned: [ConfigLanguage; 2],
    trace: RefCell<Vec<String>>,
}

impl<'a> SymSolver<'a> {
    pub fn new(lcs: &'a Sglcs) -> Self {
        Self::with_ceiling(lcs, default_ceiling(lcs))
    }

    pub fn with_ceiling(lcs: &'a Sglcs, ceiling: usize) -> Self {
        let sig = Signature::of(lcs);
        let owned =
            |p: Player| ConfigLanguage::slots_where(sig, |s, b| b == 1 && lcs.owner(s) == p);
        SymSolver {
            lcs,
            sig,
            ceiling,
            universe: ConfigLanguage::universe(sig),
            random: ConfigLanguage::slots_where(sig, |_, b| b == 0),
            owned: [owned(Player::Zero), owned(Player::One)],
            trace: RefCell::new(Vec::new()),
        }
    }

    pub fn lcs(&self) -> &Sglcs {
        self.lcs
    }

    pub fn universe(&self) -> &ConfigLanguage {
        &self.universe
    }

    pub fn ceiling(&self) -> usize {
        self.ceiling
    }

    pub fn owned_by(&self, p: Player) -> &ConfigLanguage {
        &self.owned[p.index()]
    }

    pub fn random_configs(&self) -> &ConfigLanguage {
        &self.random
    }

    /// Configurations of controls with the given color.
    pub fn with_color(&self, color: u32) -> ConfigLanguage {
        ConfigLanguage::slots_where(self.sig, |s, _| self.lcs.color(s) == color)
    }

    /// The stage-trace log collected so far, one line per stage.
    pub fn trace(&self) -> Vec<String> {
        self.trace.borrow().clone()
    }

    fn log(&self, depth: usize, line: String) {
        let line = format!("{}{}", "  ".repeat(depth), line);
        log::debug!("{line}");
        self.trace.borrow_mut().push(line);
    }

    pub fn pre(&self, q: &ConfigLanguage, restrict: &ConfigLanguage) -> ConfigLanguage {
        q.pre_full(self.lcs, PreMode::Pre, self.restriction(restrict))
    }

    pub fn dual_pre(&self, q: &ConfigLanguage, restrict: &ConfigLanguage) -> ConfigLanguage {
        q.pre_full(self.lcs, PreMode::DualPre, self.restriction(restrict))
    }

    fn restriction<'r>(&self, restrict: &'r ConfigLanguage) -> Option<&'r ConfigLanguage> {
        (*restrict != self.universe).then_some(restrict)
    }

    /// Sink-free, and random configurations have all successors inside.
    pub fn is_closable(&self, r: &ConfigLanguage) -> bool {
        if *r == self.universe || r.is_empty() {
            return true;
        }
        let pre = r.pre(self.lcs);
        let dual = r.pre_full(self.lcs, PreMode::DualPre, None);
        r.is_subset(&pre) && r.intersection(&self.random).is_subset(&dual)
    }

    /// Closable inside `restrict`, and configurations of `player` cannot leave.
    pub fn is_trap_for(
        &self,
        q: &ConfigLanguage,
        player: Player,
        restrict: &ConfigLanguage,
    ) -> bool {
        let dual = self.dual_pre(q, restrict);
        let pre = self.pre(q, restrict);
        q.is_subset(restrict)
            && q.is_subset(&pre)
            && q.intersection(&self.random).is_subset(&dual)
            && q.intersection(self.owned_by(player)).is_subset(&dual)
    }

    pub fn force(
        &self,
        player: Player,
        target: &ConfigLanguage,
        restrict: &ConfigLanguage,
    ) -> Result<SymForceResult, SymError> {
        self.force_at(0, player, target, restrict)
    }

    fn force_at(
        &self,
        depth: usize,
        player: Player,
        target: &ConfigLanguage,
        restrict: &ConfigLanguage,
    ) -> Result<SymForceResult, SymError> {
        if !target.is_subset(restrict) {
            return Err(SymError::TargetOutsideRestriction);
        }
        if !self.is_closable(restrict) {
            return Err(SymError::NotClosable);
        }
        let eager = self.random.union(self.owned_by(player));
        let reluctant = self.owned_by(player.opponent());
        let mut layers = vec![target.clone()];
        loop {
            let r = layers.last().unwrap();
            let next = r
                .union(&self.pre(r, restrict).intersection(&eager))
                .union(&self.dual_pre(r, restrict).intersection(reluctant));
            if next == *r {
                break;
            }
            if layers.len() > self.ceiling {
                return Err(SymError::CeilingExceeded {
                    stage: format!("force {player}"),
                    ceiling: self.ceiling,
                });
            }
            self.log(
                depth,
                format!(
                    "force {player} stage {}: size {}",
                    layers.len(),
                    next.size()
                ),
            );
            layers.push(next);
        }
        let force_set = layers.last().unwrap().clone();
        Ok(SymForceResult {
            player,
            avoid_set: restrict.difference(&force_set),
            force_set,
            layers,
            restrict: restrict.clone(),
        })
    }

    pub fn parity(&self, rank: u32) -> Result<SymParityResult, SymError> {
        let max = self.lcs.max_color();
        assert!(max <= rank, "color {max} exceeds rank {rank}");
        self.parity_within(0, &self.universe.clone(), rank)
    }

    fn parity_within(
        &self,
        depth: usize,
        restrict: &ConfigLanguage,
        rank: u32,
    ) -> Result<SymParityResult, SymError> {
        let x = Player::of_parity(rank);
        let mut result = SymParityResult {
            rank,
            player: x,
            restrict: restrict.clone(),
            c_set: restrict.clone(),
            stages: Vec::new(),
        };
        if rank == 0 || restrict.is_empty() {
            return Ok(result);
        }
        let top = self.with_color(rank).intersection(restrict);
        let mut y_union = ConfigLanguage::empty(self.sig);
        loop {
            if result.stages.len() > self.ceiling {
                return Err(SymError::CeilingExceeded {
                    stage: format!("parity rank {rank}"),
                    ceiling: self.ceiling,
                });
            }
            self.log(
                depth,
                format!("parity rank {rank} stage {}", result.stages.len()),
            );
            let x_force = self.force_at(depth + 1, x.opponent(), &y_union, restrict)?;
            let rest = x_force.avoid_set.clone();
            let z_force = self.force_at(depth + 1, x, &top.intersection(&rest), &rest)?;
            let inner = z_force.avoid_set.clone();
            let sub = self.parity_within(depth + 1, &inner, rank - 1)?;
            let y = x_force.force_set.union(&sub.c_set);
            let done = sub.c_set.is_empty();
            result.c_set = rest;
            y_union = y.clone();
            result.stages.push(SymStage {
                x_force,
                z_force,
                sub,
                y,
            });
            if done {
                break;
            }
        }
        self.log(
            depth,
            format!(
                "parity rank {rank} stable after {} stages: c_set size {}",
                result.stages.len(),
                result.c_set.size()
            ),
        );
        Ok(result)
    }

    pub fn report(&self) -> Result<SymReport, SymError> {
        self.report_at(self.lcs.max_color())
    }

    /// The four regions with `nmax` in place of the top color.
    pub fn report_at(&self, nmax: u32) -> Result<SymReport, SymError> {
        let lower = self.parity(nmax)?;
        let upper = self.parity(nmax + 1)?;
        let all = &self.universe;
        Ok(SymReport {
            nmax,
            x: Player::of_parity(nmax),
            x_as: lower.c_set.clone(),
            x_wpp: all.difference(&upper.c_set),
            y_as: upper.c_set.clone(),
            y_wpp: all.difference(&lower.c_set),
            lower,
            upper,
        })
    }
}

pub fn sym_force(
    lcs: &Sglcs,
    player: Player,
    target: &ConfigLanguage,
    restrict: &ConfigLanguage,
) -> Result<SymForceResult, SymError> {
    SymSolver::new(lcs).force(player, target, restrict)
}

pub fn sym_parity(lcs: &Sglcs, rank: u32) -> Result<SymParityResult, SymError> {
    SymSolver::new(lcs).parity(rank)
}

pub fn sym_report(lcs: &Sglcs) -> Result<SymReport, SymError> {
    SymSolver::new(lcs).report()
}
