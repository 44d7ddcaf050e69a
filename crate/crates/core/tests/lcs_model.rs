use lcspg::fixtures;
use lcspg::lcs::{LcsDocument, LcsError, Sglcs};
use proptest::prelude::*;

fn doc(name: &str) -> LcsDocument {
    let text = fixtures::LCS.iter().find(|(n, _)| *n == name).unwrap().1;
    serde_json::from_str(text).unwrap()
}

fn field_of(err: LcsError) -> String {
    match err {
        LcsError::Validation { field, .. } => field,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn bad_lambda_names_the_field() {
    let mut d = doc("pump_risk");
    d.lambda = 1.2;
    assert_eq!(field_of(Sglcs::from_document(&d).unwrap_err()), "lambda");
}

#[test]
fn duplicate_control_is_rejected() {
    let mut d = doc("pump_risk");
    d.controls[1].id = "p".into();
    assert!(field_of(Sglcs::from_document(&d).unwrap_err()).starts_with("controls"));
}

#[test]
fn documents_round_trip() {
    for (name, lcs) in fixtures::all_lcs() {
        let back = Sglcs::from_document(&lcs.to_document()).unwrap();
        assert_eq!(back.to_document(), lcs.to_document(), "{name}");
        assert_eq!(lcs.to_document(), doc(name), "{name}");
    }
}

#[test]
fn reachable_games_are_valid() {
    for (name, lcs) in fixtures::send_free_lcs() {
        let (game, configs) = lcs.reachable_game(&lcs.configs_up_to(3), 100_000).unwrap();
        assert!(game.validate().is_empty(), "{name}: {:?}", game.validate());
        for (id, c) in configs.iter().enumerate() {
            assert_eq!(game.owner(id).is_random(), c.bit == 0);
        }
    }
}

#[test]
fn send_rules_make_the_reachable_game_unbounded() {
    let lcs = fixtures::lcs("pump_risk");
    let start = lcs.parse_config("p:1:").unwrap();
    let err = lcs.reachable_game(&[start], 500).unwrap_err();
    assert!(
        matches!(
            err,
            LcsError::StateSpaceTooLarge(_) | LcsError::TooLong { .. }
        ),
        "{err:?}"
    );
}

#[test]
fn deadlocked_configurations_pass_to_loss() {
    let lcs = fixtures::lcs("pump_penalty");
    let c = lcs.parse_config("1:1:").unwrap();
    let succ = lcs.successors(&c).unwrap();
    assert!(succ.iter().any(|t| t.rule.is_some()));
    let lcs = fixtures::lcs("drain_duel");
    for c in lcs.configs_up_to(1).into_iter().filter(|c| c.bit == 1) {
        let succ = lcs.successors(&c).unwrap();
        if lcs.enabled_rules(&c).is_empty() {
            assert_eq!(succ.len(), 1);
            assert_eq!(succ[0].target.bit, 0);
            assert_eq!(succ[0].target.control, c.control);
        }
    }
}

proptest! {
    #[test]
    fn literals_round_trip(idx in 0usize..500, which in 0usize..6) {
        let (_, lcs) = &fixtures::all_lcs()[which];
        let configs = lcs.configs_up_to(3);
        let c = &configs[idx % configs.len()];
        let text = lcs.format_config(c);
        prop_assert_eq!(&lcs.parse_config(&text).unwrap(), c);
    }
}

#[test]
fn malformed_literals() {
    let lcs = fixtures::lcs("two_queues");
    for bad in ["", "nowhere:1:#", "a:2:#", "a:1:", "a:1:z#"] {
        let err = lcs.parse_config(bad).unwrap_err();
        assert!(matches!(err, LcsError::Literal { .. }), "{bad}: {err:?}");
    }
}
