//! Channel systems and explicit games bundled with the crate.

use crate::game::{ExplicitGame, GameDocument};
use crate::lcs::{LcsDocument, Sglcs};

/// Bundled channel systems by name, as JSON documents.
pub const LCS: &[(&str, &str)] = &[
    ("pump_risk", include_str!("../fixtures/pump_risk.json")),
    (
        "pump_penalty",
        include_str!("../fixtures/pump_penalty.json"),
    ),
    ("drain_duel", include_str!("../fixtures/drain_duel.json")),
    ("two_queues", include_str!("../fixtures/two_queues.json")),
    ("lossy_lock", include_str!("../fixtures/lossy_lock.json")),
    ("relay", include_str!("../fixtures/relay.json")),
];

/// Bundled explicit games by name, as JSON documents.
pub const GAMES: &[(&str, &str)] = &[
    ("coin_chase", include_str!("../fixtures/coin_chase.json")),
    ("ladder", include_str!("../fixtures/ladder.json")),
];

pub fn lcs(name: &str) -> Sglcs {
    let text = LCS
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no bundled system `{name}`"))
        .1;
    let doc: LcsDocument = serde_json::from_str(text).expect("bundled system parses");
    Sglcs::from_document(&doc).expect("bundled system is valid")
}

pub fn all_lcs() -> Vec<(&'static str, Sglcs)> {
    LCS.iter().map(|(n, _)| (*n, lcs(n))).collect()
}

/// Bundled systems without send rules, whose reachable games stay finite.
pub fn send_free_lcs() -> Vec<(&'static str, Sglcs)> {
    all_lcs()
        .into_iter()
        .filter(|(_, l)| !l.has_send_rules())
        .collect()
}

pub fn game(name: &str) -> ExplicitGame {
    let text = GAMES
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no bundled game `{name}`"))
        .1;
    let doc: GameDocument = serde_json::from_str(text).expect("bundled game parses");
    ExplicitGame::from_document(&doc).expect("bundled game is valid")
}

pub fn all_games() -> Vec<(&'static str, ExplicitGame)> {
    GAMES.iter().map(|(n, _)| (*n, game(n))).collect()
}
