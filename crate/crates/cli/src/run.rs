use std::collections::BTreeMap;
use std::fmt::Write as _;

use lcspg::finite::{winning_report_at, ParityResult, WinningReport};
use lcspg::gen::{random_game, GameParams};
use lcspg::lcs::Configuration;
use lcspg::oracle::{enumerate_verify, zielonka, OracleError, Verdict};
use lcspg::regset::ConfigLanguage;
use lcspg::sim::{sample_batch, summarize_attractor, write_stats_csv, OutcomeEstimate};
use lcspg::strategy::{parity_strategy_syn, validate_strategy, RegularStrategy};
use lcspg::symbolic::{SymReport, SymSolver};
use lcspg::{ExplicitGame, MemorylessStrategy, Owner, Player, Sglcs, StateSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::artifacts::{export_artifacts, Artifact, Manifest};
use crate::model::{parse_model, Model};
use crate::{CliError, Command, RunConfig};

/// What a command printed, found and produced.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Human-readable summary, one line each.
    pub lines: Vec<String>,
    /// Disagreements and invariant violations; any entry means exit status 1.
    pub violations: Vec<String>,
    pub artifacts: Vec<Artifact>,
    /// Set when the artifacts were written.
    pub manifest: Option<Manifest>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.violations.is_empty() {
            0
        } else {
            1
        }
    }
}

pub fn run_command(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let model = config.input.as_deref().map(parse_model).transpose()?;
    if config.lambda.is_some() && matches!(model, Some(Model::Game(_))) {
        return Err(CliError::Usage(
            "--lambda applies to channel systems only".into(),
        ));
    }
    let model = match model {
        Some(Model::Lcs(lcs)) => match config.lambda {
            Some(l) => Some(Model::Lcs(lcs.with_lambda(l).map_err(|e| {
                CliError::Validation {
                    field: "lambda".into(),
                    message: e.to_string(),
                }
            })?)),
            None => Some(Model::Lcs(lcs)),
        },
        other => other,
    };
    let wrong = |expected: &str| {
        Err(CliError::Usage(format!(
            "{} expects {expected}",
            config.command.name()
        )))
    };
    let mut out = match (&config.command, &model) {
        (Command::CheckOracle { random: Some(n) }, None) => check_random(config, *n),
        (Command::CheckOracle { random: Some(_) }, Some(_)) => Err(CliError::Usage(
            "check-oracle --random takes no input model".into(),
        )),
        (_, None) => Err(CliError::Usage("missing input model".into())),
        (Command::SolveFinite, Some(Model::Game(g))) => solve_finite(config, g),
        (Command::SolveFinite, _) => wrong("an explicit game"),
        (Command::SolveLcs, Some(Model::Lcs(l))) => solve_lcs(config, l),
        (Command::SolveLcs, _) => wrong("a channel system"),
        (Command::CheckOracle { .. }, Some(Model::Game(g))) => {
            let mut out = Outcome::default();
            let found = check_game(g, &mut out.lines)?;
            out.violations.extend(found);
            out.artifacts.push(Artifact::json(
                "oracle.json",
                &json!({ "games": 1, "violations": out.violations }),
            ));
            Ok(out)
        }
        (Command::CheckOracle { .. }, Some(Model::Lcs(l))) => check_lcs(config, l),
        (Command::Simulate { start }, Some(Model::Lcs(l))) => simulate(config, l, start.as_deref()),
        (Command::Simulate { .. }, _) => wrong("a channel system"),
        (Command::Member { config: lit }, Some(Model::Lcs(l))) => member_lcs(config, l, lit),
        (Command::Member { config: lit }, Some(Model::Game(g))) => member_game(config, g, lit),
    }?;
    out.artifacts
        .push(Artifact::json("run.json", &run_record(config)));
    if let Some(dir) = &config.out {
        out.manifest = Some(export_artifacts(&out.artifacts, dir)?);
    }
    Ok(out)
}

fn run_record(config: &RunConfig) -> serde_json::Value {
    json!({
        "command": config.command.name(),
        "input": config.input.as_ref().map(|p| p.display().to_string()),
        "rank": config.rank,
        "lambda": config.lambda,
        "seed": config.seed,
        "ceiling": config.ceiling,
        "runs": config.runs,
        "steps": config.steps,
        "window": config.window,
    })
}

fn top_rank(config: &RunConfig, max_color: u32) -> Result<u32, CliError> {
    match config.rank {
        Some(r) if r < max_color => Err(CliError::Usage(format!(
            "--rank {r} is below the top color {max_color}"
        ))),
        Some(r) => Ok(r),
        None => Ok(max_color),
    }
}

const REGION_NAMES: [(&str, Player, bool); 4] = [
    ("p0_as", Player::Zero, true),
    ("p0_wpp", Player::Zero, false),
    ("p1_as", Player::One, true),
    ("p1_wpp", Player::One, false),
];

fn region_label(p: Player, almost_sure: bool) -> String {
    format!("{p} {}", if almost_sure { "a.s." } else { "w.p.p." })
}

// ---- explicit games ----

fn ids(set: &StateSet) -> Vec<usize> {
    set.to_vec()
}

fn strategy_map(s: &MemorylessStrategy) -> BTreeMap<String, usize> {
    s.iter().map(|(a, b)| (a.to_string(), b)).collect()
}

fn finite_region(report: &WinningReport, p: Player, almost_sure: bool) -> &StateSet {
    if almost_sure {
        report.almost_sure(p)
    } else {
        report.positive(p)
    }
}

fn solve_finite(config: &RunConfig, game: &ExplicitGame) -> Result<Outcome, CliError> {
    let nmax = top_rank(config, game.max_color())?;
    let report = winning_report_at(game, nmax);
    let mut out = Outcome::default();
    let mut regions = BTreeMap::new();
    for (name, p, almost_sure) in REGION_NAMES {
        let set = finite_region(&report, p, almost_sure);
        out.lines
            .push(format!("{}: {:?}", region_label(p, almost_sure), ids(set)));
        regions.insert(name, ids(set));
    }
    if !report.x_as.is_disjoint(&report.y_as) {
        out.violations
            .push("the almost-sure regions of both players overlap".into());
    }
    let mut strategies = BTreeMap::new();
    for p in Player::BOTH {
        let s = report.almost_sure_strategy(p);
        let region = report.almost_sure(p);
        for (from, to) in s.iter() {
            if region.contains(from) && !region.contains(to) {
                out.violations
                    .push(format!("{p} strategy leaves its region at state {from}"));
            }
        }
        strategies.insert(p.to_string(), strategy_map(s));
    }
    let mut trace = String::new();
    for result in [&report.lower, &report.upper] {
        finite_trace(result, &mut trace);
    }
    out.artifacts.push(Artifact::json(
        "regions.json",
        &json!({ "nmax": nmax, "x": report.x, "regions": regions }),
    ));
    out.artifacts
        .push(Artifact::json("strategies.json", &strategies));
    out.artifacts
        .push(Artifact::text("game.dot", game_dot(game, &report)));
    out.artifacts.push(Artifact::text("trace.log", trace));
    Ok(out)
}

fn finite_trace(result: &ParityResult, trace: &mut String) {
    for (i, st) in result.trace.iter().enumerate() {
        let _ = writeln!(
            trace,
            "parity rank {} stage {i}: x {} z {} y {}",
            result.rank,
            st.x.len(),
            st.z.len(),
            st.y.len()
        );
    }
    let _ = writeln!(
        trace,
        "parity rank {} stable after {} stages: c_set size {}",
        result.rank,
        result.trace.len(),
        result.c_set.len()
    );
}

fn game_dot(game: &ExplicitGame, report: &WinningReport) -> String {
    let mut out = String::from("digraph game {\n");
    for s in game.states().iter() {
        let shape = match game.owner(s) {
            Owner::Player(Player::Zero) => "box",
            Owner::Player(Player::One) => "diamond",
            Owner::Random => "circle",
        };
        let fill = if report.almost_sure(Player::Zero).contains(s) {
            "lightblue"
        } else if report.almost_sure(Player::One).contains(s) {
            "salmon"
        } else {
            "white"
        };
        let _ = writeln!(
            out,
            "  s{s} [shape={shape}, style=filled, fillcolor={fill}, label=\"{s}:{}\"];",
            game.color(s)
        );
    }
    for s in game.states().iter() {
        for (i, &t) in game.successors(s).iter().enumerate() {
            if game.owner(s).is_random() {
                let p = game.probabilities(s)[i];
                let _ = writeln!(out, "  s{s} -> s{t} [label=\"{p}\"];");
            } else {
                let _ = writeln!(out, "  s{s} -> s{t};");
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Cross-checks both almost-sure regions; returns the disagreements.
fn check_game(game: &ExplicitGame, lines: &mut Vec<String>) -> Result<Vec<String>, CliError> {
    let report = winning_report_at(game, game.max_color());
    let claims = [
        (report.x, &report.x_as),
        (report.x.opponent(), &report.y_as),
    ];
    let mut found = Vec::new();
    if !game.has_random_states() {
        let z = zielonka(game).map_err(oracle_error)?;
        for (p, claimed) in claims {
            if *claimed != z.regions[p.index()] {
                found.push(format!(
                    "{p}: parity scheme {:?}, Zielonka {:?}",
                    ids(claimed),
                    ids(&z.regions[p.index()])
                ));
            }
        }
        lines.push(format!(
            "Zielonka: {}",
            if found.is_empty() {
                "agree"
            } else {
                "DISAGREE"
            }
        ));
        return Ok(found);
    }
    for (p, claimed) in claims {
        match enumerate_verify(game, p, claimed).map_err(oracle_error)? {
            Verdict::Confirmed => {}
            Verdict::Refuted(c) => found.push(format!(
                "{p}: state {} {} the claimed region but enumeration disagrees",
                c.state,
                if c.claimed { "is in" } else { "is outside" }
            )),
        }
    }
    lines.push(format!(
        "enumeration: {}",
        if found.is_empty() {
            "confirmed"
        } else {
            "REFUTED"
        }
    ));
    Ok(found)
}

fn oracle_error(e: OracleError) -> CliError {
    CliError::Usage(format!("oracle cannot handle this game: {e}"))
}

fn check_random(config: &RunConfig, n: usize) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Outcome::default();
    let mut per_game = Vec::new();
    for i in 0..n {
        let game = random_game(
            &mut rng,
            GameParams {
                states: 5,
                max_out: 2,
                max_color: 3,
                stochastic: i % 2 == 1,
            },
        );
        let mut lines = Vec::new();
        let found = check_game(&game, &mut lines)?;
        if !found.is_empty() {
            out.artifacts.push(Artifact::json(
                format!("counterexamples/game_{i}.json"),
                &game.to_document(),
            ));
        }
        out.violations
            .extend(found.iter().map(|f| format!("game {i}: {f}")));
        per_game.push(json!({ "game": i, "stochastic": i % 2 == 1, "violations": found }));
    }
    out.lines.push(format!(
        "{n} random games, {} disagreements",
        out.violations.len()
    ));
    out.artifacts.push(Artifact::json(
        "oracle.json",
        &json!({ "games": n, "results": per_game }),
    ));
    Ok(out)
}

// ---- channel systems ----

fn solver_for<'a>(config: &RunConfig, lcs: &'a Sglcs) -> SymSolver<'a> {
    match config.ceiling {
        Some(c) => SymSolver::with_ceiling(lcs, c),
        None => SymSolver::new(lcs),
    }
}

fn sym_report(config: &RunConfig, solver: &SymSolver) -> Result<SymReport, CliError> {
    let nmax = top_rank(config, solver.lcs().max_color())?;
    solver
        .report_at(nmax)
        .map_err(|e| CliError::Solver(e.to_string()))
}

fn sym_region(report: &SymReport, p: Player, almost_sure: bool) -> &ConfigLanguage {
    if almost_sure {
        report.almost_sure(p)
    } else {
        report.positive(p)
    }
}

fn describe(lcs: &Sglcs, lang: &ConfigLanguage, universe: &ConfigLanguage) -> String {
    if lang.is_empty() {
        "empty".into()
    } else if lang == universe {
        "universe".into()
    } else {
        let w = lang.witness().expect("nonempty language");
        format!("regular {lang}, e.g. {}", lcs.format_config(&w))
    }
}

#[derive(Serialize)]
struct RegionDocument<'a> {
    region: &'a str,
    player: Player,
    almost_sure: bool,
    empty: bool,
    universe: bool,
    slots: Vec<lcspg::regset::SlotTable>,
}

/// The almost-sure strategy of each player, from their own parity result.
fn winner_strategies(solver: &SymSolver, report: &SymReport) -> [RegularStrategy; 2] {
    Player::BOTH.map(|p| parity_strategy_syn(solver, report.result_for(p)).0)
}

fn solve_lcs(config: &RunConfig, lcs: &Sglcs) -> Result<Outcome, CliError> {
    let solver = solver_for(config, lcs);
    let report = sym_report(config, &solver)?;
    let universe = solver.universe();
    let mut out = Outcome::default();
    let mut summary = BTreeMap::new();
    for (name, p, almost_sure) in REGION_NAMES {
        let lang = sym_region(&report, p, almost_sure);
        let text = describe(lcs, lang, universe);
        out.lines
            .push(format!("{}: {text}", region_label(p, almost_sure)));
        summary.insert(name, text);
        out.artifacts.push(Artifact::json(
            format!("regions/{name}.json"),
            &RegionDocument {
                region: name,
                player: p,
                almost_sure,
                empty: lang.is_empty(),
                universe: lang == universe,
                slots: lang.to_tables(lcs),
            },
        ));
        out.artifacts.push(Artifact::text(
            format!("regions/{name}.dot"),
            lang.to_dot(lcs, name),
        ));
    }
    if !report.x_as.intersection(&report.y_as).is_empty() {
        out.violations
            .push("the almost-sure regions of both players overlap".into());
    }
    let mut rule_summary = String::new();
    for (p, s) in Player::BOTH
        .into_iter()
        .zip(winner_strategies(&solver, &report))
    {
        for v in validate_strategy(lcs, &s) {
            out.violations.push(format!("{p} strategy: {v}"));
        }
        out.lines
            .push(format!("{p} strategy: {} guarded rules", s.rules.len()));
        for line in s.summary(lcs) {
            let _ = writeln!(rule_summary, "{p} {line}");
        }
        out.artifacts.push(Artifact::json(
            format!("strategies/p{}.json", p.index()),
            &s.to_document(lcs),
        ));
    }
    let stages = json!({
        "lower": report.lower.stages.len(),
        "upper": report.upper.stages.len(),
        "trace_lines": solver.trace().len(),
    });
    out.lines.push(format!(
        "stages: rank {} {}, rank {} {}",
        report.lower.rank,
        report.lower.stages.len(),
        report.upper.rank,
        report.upper.stages.len()
    ));
    out.artifacts
        .push(Artifact::text("strategies/summary.txt", rule_summary));
    out.artifacts
        .push(Artifact::text("trace.log", trace_text(&solver)));
    out.artifacts.push(Artifact::json(
        "report.json",
        &json!({
            "nmax": report.nmax,
            "lambda": lcs.lambda(),
            "ceiling": solver.ceiling(),
            "regions": summary,
            "stages": stages,
        }),
    ));
    Ok(out)
}

fn trace_text(solver: &SymSolver) -> String {
    let mut text = solver.trace().join("\n");
    text.push('\n');
    text
}

fn check_lcs(config: &RunConfig, lcs: &Sglcs) -> Result<Outcome, CliError> {
    if lcs.has_send_rules() {
        return Err(CliError::Usage(
            "the explicit cross-check needs a system without send rules".into(),
        ));
    }
    let solver = solver_for(config, lcs);
    let report = sym_report(config, &solver)?;
    let (game, configs) = lcs
        .reachable_game(&lcs.configs_up_to(2), 1_000_000)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let explicit = winning_report_at(&game, report.nmax);
    let mut out = Outcome::default();
    for (id, c) in configs.iter().enumerate() {
        for (_, p, almost_sure) in REGION_NAMES {
            let sym = sym_region(&report, p, almost_sure)
                .contains(c)
                .expect("same signature");
            let exp = finite_region(&explicit, p, almost_sure).contains(id);
            if sym != exp {
                out.violations.push(format!(
                    "{} at {}: symbolic {sym}, explicit {exp}",
                    region_label(p, almost_sure),
                    lcs.format_config(c)
                ));
            }
        }
    }
    out.lines.push(format!(
        "{} configurations compared: {}",
        configs.len(),
        if out.violations.is_empty() {
            "agree"
        } else {
            "DISAGREE"
        }
    ));
    out.artifacts.push(Artifact::json(
        "oracle.json",
        &json!({ "configurations": configs.len(), "violations": out.violations }),
    ));
    out.artifacts
        .push(Artifact::text("trace.log", trace_text(&solver)));
    Ok(out)
}

fn literal(lcs: &Sglcs, text: &str) -> Result<Configuration, CliError> {
    lcs.parse_config(text)
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn memberships(report: &SymReport, c: &Configuration) -> Vec<(String, bool)> {
    REGION_NAMES
        .iter()
        .map(|&(_, p, a)| {
            let inside = sym_region(report, p, a)
                .contains(c)
                .expect("same signature");
            (region_label(p, a), inside)
        })
        .collect()
}

fn simulate(config: &RunConfig, lcs: &Sglcs, start: Option<&str>) -> Result<Outcome, CliError> {
    let start = match start {
        Some(text) => literal(lcs, text)?,
        None => Configuration::new(0, vec![Vec::new(); lcs.num_channels()], 1),
    };
    let solver = solver_for(config, lcs);
    let report = sym_report(config, &solver)?;
    let [s0, s1] = winner_strategies(&solver, &report);
    let batch = sample_batch(
        lcs,
        [&s0, &s1],
        std::slice::from_ref(&start),
        config.runs,
        config.steps,
        config.window,
        config.seed,
    );
    let zero = batch
        .iter()
        .filter(|s| s.tail_winner() == Player::Zero)
        .count() as f64
        / batch.len() as f64;
    let estimate = OutcomeEstimate {
        runs: batch.len(),
        freq: [zero, 1.0 - zero],
    };
    let attractor = summarize_attractor(&batch);
    let mut out = Outcome::default();
    let start_text = lcs.format_config(&start);
    for (label, inside) in memberships(&report, &start) {
        out.lines.push(format!("{start_text} in {label}: {inside}"));
    }
    for p in Player::BOTH {
        out.lines.push(format!(
            "tail parity of {p}: {:.3}",
            estimate.freq_parity(p)
        ));
    }
    out.lines.push(format!(
        "empty-channel hit fraction: {:.3}",
        attractor.hit_fraction
    ));
    let mut csv = Vec::new();
    write_stats_csv(lcs, &batch, &mut csv)
        .map_err(|e| CliError::Solver(format!("writing statistics: {e}")))?;
    out.artifacts.push(Artifact {
        name: "stats.csv".into(),
        bytes: csv,
    });
    out.artifacts.push(Artifact::json(
        "summary.json",
        &json!({
            "start": start_text,
            "outcome": estimate,
            "attractor": {
                "runs": attractor.runs,
                "runs_hitting": attractor.runs_hitting,
                "hit_fraction": attractor.hit_fraction,
                "gap_count": attractor.gap_count,
                "median_gap": attractor.median_gap,
                "max_gap": attractor.max_gap,
                "mean_gap": attractor.mean_gap,
            },
        }),
    ));
    for (p, s) in Player::BOTH.into_iter().zip([&s0, &s1]) {
        out.artifacts.push(Artifact::json(
            format!("strategies/p{}.json", p.index()),
            &s.to_document(lcs),
        ));
    }
    out.artifacts
        .push(Artifact::text("trace.log", trace_text(&solver)));
    Ok(out)
}

fn member_lcs(config: &RunConfig, lcs: &Sglcs, text: &str) -> Result<Outcome, CliError> {
    let c = literal(lcs, text)?;
    let solver = solver_for(config, lcs);
    let report = sym_report(config, &solver)?;
    let mut out = Outcome::default();
    let found = memberships(&report, &c);
    for (label, inside) in &found {
        out.lines.push(format!("{label}: {inside}"));
    }
    out.artifacts.push(Artifact::json(
        "member.json",
        &json!({ "configuration": lcs.format_config(&c), "regions": found }),
    ));
    Ok(out)
}

fn member_game(config: &RunConfig, game: &ExplicitGame, text: &str) -> Result<Outcome, CliError> {
    let s: usize = text
        .parse()
        .ok()
        .filter(|&s| s < game.capacity() && game.states().contains(s))
        .ok_or_else(|| CliError::Usage(format!("`{text}` is not a state of the game")))?;
    let report = winning_report_at(game, top_rank(config, game.max_color())?);
    let mut out = Outcome::default();
    let mut found = Vec::new();
    for (_, p, a) in REGION_NAMES {
        let inside = finite_region(&report, p, a).contains(s);
        out.lines.push(format!("{}: {inside}", region_label(p, a)));
        found.push((region_label(p, a), inside));
    }
    out.artifacts.push(Artifact::json(
        "member.json",
        &json!({ "state": s, "regions": found }),
    ));
    Ok(out)
}
