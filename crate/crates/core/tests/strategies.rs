use lcspg::fixtures;
use lcspg::gen::{random_language, random_regular_strategy};
use lcspg::regset::{ConfigLanguage, Signature};
use lcspg::strategy::{parity_strategy_syn, selection_strategy, validate_strategy, StrategyError};
use lcspg::symbolic::SymSolver;
use lcspg::Player;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn synthesized_strategies_are_legal_and_stay_inside() {
    for (name, lcs) in fixtures::all_lcs() {
        let solver = SymSolver::new(&lcs);
        let report = solver.report().unwrap();
        for p in Player::BOTH {
            let result = report.result_for(p);
            let (mine, theirs) = parity_strategy_syn(&solver, result);
            assert_eq!(mine.owner, p);
            assert!(
                validate_strategy(&lcs, &mine).is_empty(),
                "{name} {p}: {:?}",
                validate_strategy(&lcs, &mine)
            );
            assert!(
                validate_strategy(&lcs, &theirs).is_empty(),
                "{name} {p} opponent"
            );
            for c in lcs.configs_up_to(2) {
                if c.bit != 1 || lcs.owner(c.control) != p {
                    continue;
                }
                if !result.c_set.contains(&c).unwrap() {
                    continue;
                }
                if let Some(next) = mine.induced_step(&lcs, &c).unwrap() {
                    assert!(
                        result.c_set.contains(&next).unwrap(),
                        "{name} {p}: {} leaves the region",
                        lcs.format_config(&c)
                    );
                }
            }
        }
    }
}

#[test]
fn selection_lands_in_the_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (name, lcs) in fixtures::all_lcs() {
        let sig = Signature::of(&lcs);
        for _ in 0..10 {
            let target = random_language(&mut rng, sig);
            let q = target.pre(&lcs);
            for p in Player::BOTH {
                let s = selection_strategy(&lcs, p, &q, &target).unwrap();
                assert!(validate_strategy(&lcs, &s).is_empty(), "{name}");
                for c in lcs.configs_up_to(2) {
                    if let Ok(Some(next)) = s.induced_step(&lcs, &c) {
                        assert!(q.contains(&c).unwrap());
                        assert!(
                            target.contains(&next).unwrap(),
                            "{name}: {}",
                            lcs.format_config(&c)
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn selection_without_successor_fails() {
    let lcs = fixtures::lcs("pump_risk");
    let sig = Signature::of(&lcs);
    let universe = ConfigLanguage::universe(sig);
    let empty = ConfigLanguage::empty(sig);
    let err = selection_strategy(&lcs, Player::One, &universe, &empty).unwrap_err();
    assert!(matches!(err, StrategyError::NoSelection(_)));
}

#[test]
fn random_opponents_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (_, lcs) in fixtures::all_lcs() {
        for p in Player::BOTH {
            for _ in 0..20 {
                let s = random_regular_strategy(&mut rng, &lcs, p);
                assert!(validate_strategy(&lcs, &s).is_empty());
            }
        }
    }
}
