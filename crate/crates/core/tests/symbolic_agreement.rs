use lcspg::finite::winning_report_at;
use lcspg::fixtures;
use lcspg::symbolic::{SymError, SymSolver};
use lcspg::Player;

#[test]
fn send_free_fixtures_match_the_explicit_game() {
    let systems = fixtures::send_free_lcs();
    assert!(systems.len() >= 3);
    for (name, lcs) in systems {
        let solver = SymSolver::new(&lcs);
        let sym = solver.report().unwrap();
        let starts = lcs.configs_up_to(2);
        let (game, configs) = lcs.reachable_game(&starts, 100_000).unwrap();
        let exp = winning_report_at(&game, sym.nmax);
        for (id, c) in configs.iter().enumerate() {
            for p in Player::BOTH {
                assert_eq!(
                    sym.almost_sure(p).contains(c).unwrap(),
                    exp.almost_sure(p).contains(id),
                    "{name}: a.s. {p} at {}",
                    lcs.format_config(c)
                );
                assert_eq!(
                    sym.positive(p).contains(c).unwrap(),
                    exp.positive(p).contains(id),
                    "{name}: w.p.p. {p} at {}",
                    lcs.format_config(c)
                );
            }
        }
    }
}

#[test]
fn counterexample_systems() {
    let lcs = fixtures::lcs("pump_risk");
    let r = SymSolver::new(&lcs).report().unwrap();
    assert_eq!(
        r.almost_sure(Player::Zero),
        &SymSolver::new(&lcs).universe().clone()
    );
    assert!(r.positive(Player::One).is_empty());

    let lcs = fixtures::lcs("pump_penalty");
    let r = SymSolver::new(&lcs).report().unwrap();
    assert!(r.almost_sure(Player::One).is_empty());
    assert!(r.almost_sure(Player::Zero).complement().is_empty());
}

#[test]
fn regions_are_consistent() {
    for (name, lcs) in fixtures::all_lcs() {
        let solver = SymSolver::new(&lcs);
        let r = solver.report().unwrap();
        let a0 = r.almost_sure(Player::Zero);
        let a1 = r.almost_sure(Player::One);
        assert!(a0.intersection(a1).is_empty(), "{name}");
        for p in Player::BOTH {
            assert!(r.almost_sure(p).is_subset(r.positive(p)), "{name}");
            // an a.s. region is closed against the opponent
            assert!(
                solver.is_trap_for(r.almost_sure(p), p.opponent(), solver.universe()),
                "{name} {p}"
            );
        }
    }
}

#[test]
fn tiny_ceiling_is_reported() {
    let lcs = fixtures::lcs("relay");
    let err = SymSolver::with_ceiling(&lcs, 1).report().unwrap_err();
    assert!(matches!(err, SymError::CeilingExceeded { .. }), "{err:?}");
}

#[test]
fn traces_are_reproducible() {
    for (_, lcs) in fixtures::all_lcs() {
        let a = SymSolver::new(&lcs);
        a.report().unwrap();
        let b = SymSolver::new(&lcs);
        b.report().unwrap();
        assert_eq!(a.trace(), b.trace());
    }
}
