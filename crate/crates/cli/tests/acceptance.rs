//! Acceptance criteria, one result line each. Run with
//! `cargo test -p lcspg-cli --test acceptance`. Set `LCSPG_BLESS=1` to
//! rewrite the golden stage traces.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use lcspg::finite::{parity_as, winning_report, winning_report_at};
use lcspg::fixtures;
use lcspg::gen::{random_game, random_language, random_regular_strategy, GameParams};
use lcspg::lcs::{contents_up_to, loss_distribution, Configuration};
use lcspg::oracle::{enumerate_verify, zielonka, Verdict};
use lcspg::regset::{PreMode, Signature};
use lcspg::sim::{attractor_stats, estimate_outcome};
use lcspg::strategy::{parity_strategy_syn, validate_strategy};
use lcspg::symbolic::{SymError, SymSolver};
use lcspg::Player;
use lcspg_cli::{run_command, Command, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(format!("{name}.json"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn zielonka_differential() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mixed = 0;
    for i in 0..200 {
        let states = rng.random_range(1..=50);
        let g = random_game(
            &mut rng,
            GameParams {
                states,
                max_out: 3,
                max_color: 4,
                stochastic: false,
            },
        );
        let z = zielonka(&g).map_err(|e| e.to_string())?;
        let nmax = g.max_color();
        for rank in [nmax, nmax + 1] {
            let r = parity_as(&g, rank);
            ensure(r.c_set == z.regions[r.player.index()], || {
                format!("game {i}, rank {rank}: regions differ")
            })?;
        }
        if !z.regions[0].is_empty() && !z.regions[1].is_empty() {
            mixed += 1;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(10), || format!("took {t:?}"))?;
    Ok(format!(
        "200 games agree ({mixed} with both regions nonempty) in {t:.2?}"
    ))
}

fn brute_force_determinacy() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mixed = 0;
    for i in 0..100 {
        let states = rng.random_range(4..=7);
        let g = random_game(
            &mut rng,
            GameParams {
                states,
                max_out: 2,
                max_color: 3,
                stochastic: true,
            },
        );
        let r = winning_report(&g);
        if !r.x_as.is_empty() && !r.y_as.is_empty() {
            mixed += 1;
        }
        for (p, claimed) in [(r.x, &r.x_as), (r.x.opponent(), &r.y_as)] {
            match enumerate_verify(&g, p, claimed).map_err(|e| e.to_string())? {
                Verdict::Confirmed => {}
                Verdict::Refuted(c) => {
                    return Err(format!(
                        "game {i}, {p}: counterexample at state {}",
                        c.state
                    ))
                }
            }
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!(
        "100 games ({mixed} with both regions nonempty), 0 counterexamples, in {t:.2?}"
    ))
}

fn loss_normalization() -> Check {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for lambda in [0.1, 0.5, 0.9] {
        for channels in 1..=2 {
            for contents in contents_up_to(channels, 2, 6) {
                let dist = loss_distribution(&contents, lambda).map_err(|e| e.to_string())?;
                let total: f64 = dist.values().sum();
                worst = worst.max((total - 1.0).abs());
                for (to, p) in &dist {
                    let q = support::loss_prob(&contents, to, lambda);
                    ensure((p - q).abs() <= 1e-12, || {
                        format!("{contents:?} -> {to:?}: {p} vs {q}")
                    })?;
                }
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-12, || format!("deviation {worst:e}"))?;
    Ok(format!("{count} contents, max |sum - 1| = {worst:.1e}"))
}

fn regset_differential() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let systems = fixtures::all_lcs();
    let mut checked = 0usize;
    for round in 0..50 {
        let (name, lcs) = &systems[round % systems.len()];
        let sig = Signature::of(lcs);
        let a = random_language(&mut rng, sig);
        let b = random_language(&mut rng, sig);
        let outputs = [
            ("union", a.union(&b)),
            ("intersection", a.intersection(&b)),
            ("difference", a.difference(&b)),
            ("complement", a.complement()),
            ("upward closure", a.upward_closure()),
            ("pre", a.pre(lcs)),
            ("loss pre", a.pre_loss()),
            ("deadlock pre", a.pre_deadlock(lcs)),
            ("dual pre", a.pre_full(lcs, PreMode::DualPre, None)),
            ("pre within", a.pre_full(lcs, PreMode::Pre, Some(&b))),
            (
                "dual pre within",
                a.pre_full(lcs, PreMode::DualPre, Some(&b)),
            ),
        ];
        let rule_pre: Vec<_> = lcs.rules().iter().map(|r| a.pre_rule(r)).collect();
        for c in lcs.configs_up_to(3) {
            let m = |l| support::member(l, &c);
            let stuck = c.bit == 1 && lcs.enabled_rules(&c).is_empty();
            let expected = [
                m(&a) || m(&b),
                m(&a) && m(&b),
                m(&a) && !m(&b),
                !m(&a),
                support::upward(&a, &c),
                support::pre(lcs, &a, &c),
                c.bit == 0 && support::pre(lcs, &a, &c),
                stuck && support::pre(lcs, &a, &c),
                support::dual_pre(lcs, &a, &c),
                support::pre_within(lcs, &b, &a, &c),
                support::dual_pre_within(lcs, &b, &a, &c),
            ];
            for ((op, out), want) in outputs.iter().zip(expected) {
                ensure(support::member(out, &c) == want, || {
                    format!("{name}: {op} at {}", lcs.format_config(&c))
                })?;
                checked += 1;
            }
            for (rule, out) in lcs.rules().iter().zip(&rule_pre) {
                let want = c.bit == 1
                    && c.control == rule.from
                    && lcs.enabled(rule, &c).unwrap()
                    && support::member(&a, &lcs.apply(rule, &c));
                ensure(support::member(out, &c) == want, || {
                    format!("{name}: rule pre at {}", lcs.format_config(&c))
                })?;
                checked += 1;
            }
        }
        let up = a.upward_closure();
        let identities = [
            (
                "De Morgan",
                a.union(&b).complement() == a.complement().intersection(&b.complement()),
            ),
            ("closure idempotence", up.upward_closure() == up),
            (
                "pre distributes over union",
                a.union(&b).pre(lcs) == a.pre(lcs).union(&b.pre(lcs)),
            ),
            (
                "pre/dual duality",
                a.pre_full(lcs, PreMode::DualPre, None) == a.complement().pre(lcs).complement(),
            ),
        ];
        for (law, holds) in identities {
            ensure(holds, || format!("{name}: {law} fails"))?;
        }
    }
    Ok(format!(
        "50 language pairs, {checked} membership checks, 4 identities each"
    ))
}

fn symbolic_explicit() -> Check {
    let systems = fixtures::send_free_lcs();
    ensure(systems.len() >= 3, || {
        "fewer than 3 send-free fixtures".into()
    })?;
    let mut compared = 0;
    for (name, lcs) in systems.iter().take(3) {
        let sym = SymSolver::new(lcs).report().map_err(|e| e.to_string())?;
        let (game, configs) = lcs
            .reachable_game(&lcs.configs_up_to(2), 100_000)
            .map_err(|e| e.to_string())?;
        let exp = winning_report_at(&game, sym.nmax);
        for c in lcs.configs_up_to(2) {
            let id = configs
                .iter()
                .position(|d| *d == c)
                .expect("start is reachable");
            for p in Player::BOTH {
                let pairs = [
                    (
                        sym.almost_sure(p).contains(&c).unwrap(),
                        exp.almost_sure(p).contains(id),
                    ),
                    (
                        sym.positive(p).contains(&c).unwrap(),
                        exp.positive(p).contains(id),
                    ),
                ];
                for (s, e) in pairs {
                    ensure(s == e, || {
                        format!("{name}: {p} at {}", lcs.format_config(&c))
                    })?;
                }
            }
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} start configurations on 3 fixtures, all four regions equal"
    ))
}

/// Runs `solve-lcs` and returns the region documents by name.
fn solve_lcs_regions(name: &str) -> Result<Vec<(String, serde_json::Value)>, String> {
    let config = RunConfig::new(Command::SolveLcs, Some(fixture_path(name)));
    let out = run_command(&config).map_err(|e| e.to_string())?;
    ensure(out.exit_code() == 0, || {
        format!("violations: {:?}", out.violations)
    })?;
    Ok(out
        .artifacts
        .iter()
        .filter(|a| a.name.ends_with(".json"))
        .map(|a| (a.name.clone(), serde_json::from_slice(&a.bytes).unwrap()))
        .collect())
}

fn doc<'a>(docs: &'a [(String, serde_json::Value)], name: &str) -> &'a serde_json::Value {
    &docs
        .iter()
        .find(|(n, _)| n == name)
        .expect("artifact present")
        .1
}

fn pump_risk_regions() -> Check {
    let docs = solve_lcs_regions("pump_risk")?;
    ensure(doc(&docs, "regions/p1_wpp.json")["empty"] == true, || {
        "Player-1 w.p.p. region is not empty".into()
    })?;
    ensure(doc(&docs, "regions/p0_as.json")["universe"] == true, || {
        "Player-0 a.s. region is not the universe".into()
    })?;
    let p1 = doc(&docs, "strategies/p1.json")["rules"]
        .as_array()
        .unwrap()
        .len();
    ensure(p1 == 0, || format!("Player-1 strategy has {p1} rules"))?;
    Ok("P1 w.p.p. = empty, P0 a.s. = universe, P1 strategy empty".into())
}

fn pump_penalty_regions() -> Check {
    let lcs = fixtures::lcs("pump_penalty");
    let colors: Vec<u32> = (0..lcs.num_controls()).map(|s| lcs.color(s)).collect();
    ensure(colors == [0, 1, 2], || format!("colors {colors:?}"))?;
    let docs = solve_lcs_regions("pump_penalty")?;
    ensure(doc(&docs, "regions/p0_as.json")["universe"] == true, || {
        "Player-0 a.s. region is not the universe".into()
    })?;
    Ok("P0 a.s. = universe at colors {0,1,2}".into())
}

fn attractor_recurrence() -> Check {
    let mut parts = Vec::new();
    for (i, (name, lcs)) in fixtures::all_lcs().into_iter().enumerate() {
        ensure(lcs.lambda() >= 0.1, || format!("{name}: lambda below 0.1"))?;
        let solver = SymSolver::new(&lcs);
        let report = solver.report().map_err(|e| e.to_string())?;
        let [s0, s1] = Player::BOTH.map(|p| parity_strategy_syn(&solver, report.result_for(p)).0);
        let starts = lcs.configs_up_to(2);
        let s = attractor_stats(&lcs, [&s0, &s1], &starts, 500, 10_000, 80 + i as u64);
        ensure(s.hit_fraction == 1.0, || {
            format!("{name}: hit fraction {}", s.hit_fraction)
        })?;
        parts.push(format!("{name} median gap {}", s.median_gap.unwrap_or(0)));
    }
    Ok(format!(
        "hit fraction 1.0 on all fixtures ({})",
        parts.join(", ")
    ))
}

fn strategy_validation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 1.0f64;
    let mut cases = 0;
    for (name, lcs) in fixtures::all_lcs() {
        let solver = SymSolver::new(&lcs);
        let report = solver.report().map_err(|e| e.to_string())?;
        for p in Player::BOTH {
            let (mine, theirs) = parity_strategy_syn(&solver, report.result_for(p));
            for s in [&mine, &theirs] {
                let problems = validate_strategy(&lcs, s);
                ensure(problems.is_empty(), || format!("{name} {p}: {problems:?}"))?;
            }
            let region = report.almost_sure(p);
            let starts: Vec<Configuration> = lcs
                .configs_up_to(2)
                .into_iter()
                .filter(|c| region.contains(c).unwrap())
                .collect();
            if starts.is_empty() {
                continue;
            }
            for k in 0..20 {
                let opponent = random_regular_strategy(&mut rng, &lcs, p.opponent());
                let start = &starts[rng.random_range(0..starts.len())];
                let mut pair = [&mine, &mine];
                pair[p.opponent().index()] = &opponent;
                let est = estimate_outcome(&lcs, pair, start, 200, 10_000, 1_000, 1_000 + k);
                let f = est.freq_parity(p);
                worst = worst.min(f);
                ensure(f >= 0.95, || {
                    format!(
                        "{name} {p} from {}: frequency {f}",
                        lcs.format_config(start)
                    )
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!(
        "all strategies valid; {cases} opponent runs, min frequency {worst:.3}"
    ))
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn termination_contract() -> Check {
    let bless = std::env::var_os("LCSPG_BLESS").is_some();
    let mut counts = Vec::new();
    for (name, lcs) in fixtures::all_lcs() {
        let solver = SymSolver::new(&lcs);
        match solver.report() {
            Ok(_) => {}
            Err(e @ SymError::CeilingExceeded { .. }) => return Err(format!("{name}: {e}")),
            Err(e) => return Err(format!("{name}: {e}")),
        }
        let mut trace = solver.trace().join("\n");
        trace.push('\n');
        let path = golden_dir().join(format!("{name}.trace"));
        if bless {
            std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
            std::fs::write(&path, &trace).map_err(|e| e.to_string())?;
        }
        let golden = std::fs::read_to_string(&path)
            .map_err(|_| format!("{name}: no golden trace; rerun with LCSPG_BLESS=1"))?;
        ensure(golden == trace, || {
            format!("{name}: stage trace differs from {}", path.display())
        })?;
        counts.push(format!("{name} {}", solver.trace().len()));
    }
    Ok(format!(
        "no ceiling trips; trace lines {}",
        counts.join(", ")
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Zielonka differential", zielonka_differential),
        ("brute-force determinacy", brute_force_determinacy),
        ("loss normalization", loss_normalization),
        ("regset differential oracle", regset_differential),
        ("symbolic/explicit agreement", symbolic_explicit),
        ("pump_risk regions", pump_risk_regions),
        ("pump_penalty regions", pump_penalty_regions),
        ("attractor recurrence", attractor_recurrence),
        ("strategy validation", strategy_validation),
        ("termination contract", termination_contract),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {title}: {detail} [{t:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {title}: {detail} [{t:.2?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
