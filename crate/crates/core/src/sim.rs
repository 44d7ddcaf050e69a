//! Monte Carlo runs of the game induced by a channel system.
//!
//! Owned configurations follow the owner's strategy where it is defined and
//! pick uniformly among their successors elsewhere. Loss steps drop each
//! message independently. Run `i` of a batch draws from stream `i` of a
//! ChaCha8 generator seeded with the batch seed, so batches are reproducible
//! and runs are independent of scheduling.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::game::Player;
use crate::lcs::{Configuration, Op, Sglcs};
use crate::strategy::RegularStrategy;

pub const DEFAULT_STEPS: u64 = 10_000;
pub const DEFAULT_WINDOW: u64 = 1_000;
pub const DEFAULT_RUNS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStats {
    pub steps: u64,
    /// Indexed by control; counts every visited configuration including the start.
    pub control_visits: Vec<u64>,
    /// Visited configurations with every channel empty, either bit.
    pub attractor_hits: u64,
    pub first_hit: Option<u64>,
    /// Step distances between consecutive attractor hits.
    pub returned_to_empty_gaps: Vec<u64>,
    /// Largest color among the last `window` visited configurations.
    pub tail_max_color: u32,
    pub window: u64,
}

impl TraceStats {
    /// The player favoured by the parity of the tail color.
    pub fn tail_winner(&self) -> Player {
        Player::of_parity(self.tail_max_color)
    }
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn guard_accepts(guard: &crate::automaton::Dfa, contents: &[Vec<u8>], sep: usize) -> bool {
    let mut q = 0;
    for (i, w) in contents.iter().enumerate() {
        if i > 0 {
            q = guard.step(q, sep);
        }
        for &m in w {
            q = guard.step(q, m as usize);
        }
    }
    guard.is_accepting(q)
}

/// Advances `config` by one transition.
pub fn step<R: Rng>(
    lcs: &Sglcs,
    strategies: [&RegularStrategy; 2],
    config: &mut Configuration,
    rng: &mut R,
) {
    if config.bit == 0 {
        let lambda = lcs.lambda();
        for w in config.contents.iter_mut() {
            w.retain(|_| rng.random::<f64>() >= lambda);
        }
        config.bit = 1;
        return;
    }
    let sep = lcs.num_messages();
    let rules = lcs.rules();
    let enabled = |r: usize| match rules[r].op {
        Op::Recv { chan, msg } => config.contents[chan].first() == Some(&msg),
        _ => true,
    };
    let strategy = strategies[lcs.owner(config.control).index()];
    let chosen = strategy
        .rules
        .iter()
        .find(|g| g.control == config.control && guard_accepts(&g.guard, &config.contents, sep))
        .map(|g| g.rule)
        .filter(|&r| enabled(r));
    let rule = chosen.or_else(|| {
        let options: Vec<usize> = lcs
            .rules_from(config.control)
            .map(|(i, _)| i)
            .filter(|&i| enabled(i))
            .collect();
        (!options.is_empty()).then(|| options[rng.random_range(0..options.len())])
    });
    if let Some(r) = rule {
        let rule = rules[r];
        match rule.op {
            Op::Nop => {}
            Op::Send { chan, msg } => config.contents[chan].push(msg),
            Op::Recv { chan, .. } => {
                config.contents[chan].remove(0);
            }
        }
        config.control = rule.to;
    }
    config.bit = 0;
}

/// Plays `steps` transitions from `start`.
pub fn sample_run(
    lcs: &Sglcs,
    strategies: [&RegularStrategy; 2],
    start: &Configuration,
    steps: u64,
    window: u64,
    seed: u64,
) -> TraceStats {
    run_with(lcs, strategies, start, steps, window, &mut seeded(seed, 0))
}

fn run_with<R: Rng>(
    lcs: &Sglcs,
    strategies: [&RegularStrategy; 2],
    start: &Configuration,
    steps: u64,
    window: u64,
    rng: &mut R,
) -> TraceStats {
    assert!(steps >= 1, "a run needs at least one step");
    let window = window.clamp(1, steps);
    let mut stats = TraceStats {
        steps,
        control_visits: vec![0; lcs.num_controls()],
        attractor_hits: 0,
        first_hit: None,
        returned_to_empty_gaps: Vec::new(),
        tail_max_color: 0,
        window,
    };
    let mut config = start.clone();
    let mut last_hit: Option<u64> = None;
    for t in 0..=steps {
        if t > 0 {
            step(lcs, strategies, &mut config, rng);
        }
        stats.control_visits[config.control] += 1;
        if config.channels_empty() {
            stats.attractor_hits += 1;
            if let Some(prev) = last_hit {
                stats.returned_to_empty_gaps.push(t - prev);
            }
            stats.first_hit.get_or_insert(t);
            last_hit = Some(t);
        }
        if t > steps - window {
            stats.tail_max_color = stats.tail_max_color.max(lcs.color(config.control));
        }
    }
    stats
}

/// Runs `runs` independent plays, run `i` on stream `i` of `seed`.
pub fn sample_batch(
    lcs: &Sglcs,
    strategies: [&RegularStrategy; 2],
    starts: &[Configuration],
    runs: usize,
    steps: u64,
    window: u64,
    seed: u64,
) -> Vec<TraceStats> {
    assert!(!starts.is_empty(), "no start configuration");
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let start = &starts[i % starts.len()];
            run_with(
                lcs,
                strategies,
                start,
                steps,
                window,
                &mut seeded(seed, i as u64),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeEstimate {
    pub runs: usize,
    /// Indexed by player: fraction of runs whose tail color has that parity.
    pub freq: [f64; 2],
}

impl OutcomeEstimate {
    pub fn freq_parity(&self, p: Player) -> f64 {
        self.freq[p.index()]
    }
}

pub fn estimate_outcome(
    lcs: &Sglcs,
    strategies: [&RegularStrategy; 2],
    start: &Configuration,
    runs: usize,
    steps: u64,
    window: u64,
    seed: u64,
) -> OutcomeEstimate {
    assert!(runs >= 1);
    let batch = sample_batch(
        lcs,
        strategies,
        std::slice::from_ref(start),
        runs,
        steps,
        window,
        seed,
    );
    let zero = batch
        .iter()
        .filter(|s| s.tail_winner() == Player::Zero)
        .count();
    let f0 = zero as f64 / runs as f64;
    OutcomeEstimate {
        runs,
        freq: [f0, 1.0 - f0],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorSummary {
    pub runs: usize,
    pub runs_hitting: usize,
    pub hit_fraction: f64,
    pub first_hits: Vec<Option<u64>>,
    pub gap_count: usize,
    pub median_gap: Option<u64>,
    pub max_gap: Option<u64>,
    pub mean_gap: Option<f64>,
}

pub fn attractor_stats(
    lcs: &Sglcs,
    strategies: [&RegularStrategy; 2],
    starts: &[Configuration],
    runs: usize,
    steps: u64,
    seed: u64,
) -> AttractorSummary {
    let batch = sample_batch(lcs, strategies, starts, runs, steps, 1, seed);
    summarize_attractor(&batch)
}

pub fn summarize_attractor(batch: &[TraceStats]) -> AttractorSummary {
    let runs_hitting = batch.iter().filter(|s| s.first_hit.is_some()).count();
    let mut gaps: Vec<u64> = batch
        .iter()
        .flat_map(|s| s.returned_to_empty_gaps.iter().copied())
        .collect();
    gaps.sort_unstable();
    let mean_gap = (!gaps.is_empty()).then(|| gaps.iter().sum::<u64>() as f64 / gaps.len() as f64);
    AttractorSummary {
        runs: batch.len(),
        runs_hitting,
        hit_fraction: if batch.is_empty() {
            0.0
        } else {
            runs_hitting as f64 / batch.len() as f64
        },
        first_hits: batch.iter().map(|s| s.first_hit).collect(),
        gap_count: gaps.len(),
        median_gap: gaps.get(gaps.len() / 2).copied(),
        max_gap: gaps.last().copied(),
        mean_gap,
    }
}

/// One CSV row per run: counters, tail color, gap summary and per-control visits.
pub fn write_stats_csv<W: Write>(lcs: &Sglcs, batch: &[TraceStats], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "run",
        "steps",
        "attractor_hits",
        "first_hit",
        "gaps",
        "max_gap",
        "tail_max_color",
        "window",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(lcs.controls().iter().map(|c| format!("visits_{c}")));
    w.write_record(&header)?;
    for (i, s) in batch.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            s.steps.to_string(),
            s.attractor_hits.to_string(),
            s.first_hit.map_or(String::new(), |h| h.to_string()),
            s.returned_to_empty_gaps.len().to_string(),
            s.returned_to_empty_gaps
                .iter()
                .max()
                .map_or(String::new(), |g| g.to_string()),
            s.tail_max_color.to_string(),
            s.window.to_string(),
        ];
        row.extend(s.control_visits.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::regset::Signature;
    use crate::strategy::GuardedRule;

    fn none() -> [RegularStrategy; 2] {
        [
            RegularStrategy::empty(Player::Zero),
            RegularStrategy::empty(Player::One),
        ]
    }

    #[test]
    fn single_step_applies_the_only_rule() {
        let lcs = fixtures::lcs("pump_penalty");
        let [a, b] = none();
        // At control 2 the only rule is nop to 0.
        let start = lcs.parse_config("2:1:1").unwrap();
        let stats = sample_run(&lcs, [&a, &b], &start, 1, 1, 3);
        assert_eq!(stats.control_visits, vec![1, 0, 1]);
        assert_eq!(stats.tail_max_color, 0);
    }

    #[test]
    fn runs_are_reproducible() {
        let lcs = fixtures::lcs("relay");
        let [a, b] = none();
        let start = lcs.parse_config("s:1:").unwrap();
        let one = sample_run(&lcs, [&a, &b], &start, 500, 50, 11);
        let two = sample_run(&lcs, [&a, &b], &start, 500, 50, 11);
        assert_eq!(one, two);
        assert_eq!(one.control_visits.iter().sum::<u64>(), 501);
        assert_eq!(one.first_hit, Some(0));
    }

    #[test]
    fn strategy_choice_is_followed() {
        let lcs = fixtures::lcs("pump_risk");
        let sig = Signature::of(&lcs);
        let always_nop = RegularStrategy {
            owner: Player::One,
            rules: vec![GuardedRule {
                control: 0,
                guard: sig.well_formed(),
                rule: 1,
            }],
        };
        let p0 = RegularStrategy::empty(Player::Zero);
        let start = lcs.parse_config("p:1:").unwrap();
        let stats = sample_run(&lcs, [&p0, &always_nop], &start, 1000, 100, 5);
        // From p with an empty channel, nop leads to q where nothing can be received.
        assert_eq!(stats.control_visits[2], 0);
        assert_eq!(stats.control_visits[0], 1);
    }

    #[test]
    fn uniform_colors_decide_outcome() {
        let doc = r#"{"channels":["c"],"alphabet":["a"],"lambda":0.5,
            "controls":[{"id":"s","owner":"P1","color":COLOR}],
            "rules":[{"from":"s","op":"nop","to":"s"},{"from":"s","op":"send","chan":"c","msg":"a","to":"s"}]}"#;
        for (color, winner) in [(0, Player::Zero), (1, Player::One)] {
            let text = doc.replace("COLOR", &color.to_string());
            let lcs = Sglcs::from_document(&serde_json::from_str(&text).unwrap()).unwrap();
            let [a, b] = none();
            let start = lcs.parse_config("s:1:").unwrap();
            let est = estimate_outcome(&lcs, [&a, &b], &start, 20, 200, 50, 1);
            assert_eq!(est.freq_parity(winner), 1.0);
        }
    }

    #[test]
    fn empty_start_hits_at_zero() {
        let lcs = fixtures::lcs("pump_risk");
        let [a, b] = none();
        let start = lcs.parse_config("p:1:").unwrap();
        let summary = attractor_stats(&lcs, [&a, &b], &[start], 10, 100, 2);
        assert!(summary.first_hits.iter().all(|h| *h == Some(0)));
        assert_eq!(summary.hit_fraction, 1.0);
    }

    #[test]
    fn csv_has_one_row_per_run() {
        let lcs = fixtures::lcs("pump_risk");
        let [a, b] = none();
        let start = lcs.parse_config("p:1:1").unwrap();
        let batch = sample_batch(&lcs, [&a, &b], &[start], 3, 20, 5, 9);
        let mut buf = Vec::new();
        write_stats_csv(&lcs, &batch, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("run,steps,attractor_hits"));
    }
}
