//! Reference semantics computed straight from the definitions, without
//! automata. Shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use lcspg::lcs::{Configuration, Msg, Sglcs};
use lcspg::regset::ConfigLanguage;

/// Number of index sets of `big` that spell `small`.
pub fn embeddings(small: &[Msg], big: &[Msg]) -> u64 {
    // ways[j] = embeddings of small[..j] into the prefix read so far
    let mut ways = vec![0u64; small.len() + 1];
    ways[0] = 1;
    for &b in big {
        for j in (0..small.len()).rev() {
            if small[j] == b {
                ways[j + 1] += ways[j];
            }
        }
    }
    ways[small.len()]
}

/// Probability that loss turns `from` into `to`, channel by channel.
pub fn loss_prob(from: &[Vec<Msg>], to: &[Vec<Msg>], lambda: f64) -> f64 {
    from.iter()
        .zip(to)
        .map(|(x, y)| {
            let a = embeddings(y, x) as f64;
            a * lambda.powi((x.len() - y.len()) as i32) * (1.0 - lambda).powi(y.len() as i32)
        })
        .product()
}

/// All distinct results of deleting messages from `contents`.
pub fn subword_contents(contents: &[Vec<Msg>]) -> Vec<Vec<Vec<Msg>>> {
    let mut out: Vec<Vec<Vec<Msg>>> = vec![Vec::new()];
    for w in contents {
        let mut subs: Vec<Vec<Msg>> = (0u32..1 << w.len())
            .map(|mask| {
                (0..w.len())
                    .filter(|&i| mask & (1 << i) != 0)
                    .map(|i| w[i])
                    .collect()
            })
            .collect();
        subs.sort();
        subs.dedup();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                subs.iter().map(move |s| {
                    let mut next = prefix.clone();
                    next.push(s.clone());
                    next
                })
            })
            .collect();
    }
    out
}

/// One-step successors in the completed game, without probabilities.
pub fn successors(lcs: &Sglcs, c: &Configuration) -> Vec<Configuration> {
    if c.bit == 0 {
        return subword_contents(&c.contents)
            .into_iter()
            .map(|contents| Configuration::new(c.control, contents, 1))
            .collect();
    }
    let mut out: Vec<Configuration> = lcs
        .rules_from(c.control)
        .filter_map(|(_, r)| {
            let mut contents = c.contents.clone();
            match r.op {
                lcspg::lcs::Op::Nop => {}
                lcspg::lcs::Op::Send { chan, msg } => contents[chan].push(msg),
                lcspg::lcs::Op::Recv { chan, msg } => {
                    if contents[chan].first() != Some(&msg) {
                        return None;
                    }
                    contents[chan].remove(0);
                }
            }
            Some(Configuration::new(r.to, contents, 0))
        })
        .collect();
    if out.is_empty() {
        out.push(Configuration::new(c.control, c.contents.clone(), 0));
    }
    out
}

pub fn member(lang: &ConfigLanguage, c: &Configuration) -> bool {
    lang.contains(c).expect("configuration fits the signature")
}

pub fn pre(lcs: &Sglcs, lang: &ConfigLanguage, c: &Configuration) -> bool {
    successors(lcs, c).iter().any(|t| member(lang, t))
}

pub fn dual_pre(lcs: &Sglcs, lang: &ConfigLanguage, c: &Configuration) -> bool {
    successors(lcs, c).iter().all(|t| member(lang, t))
}

/// Predecessor inside the sub-game on `r`.
pub fn pre_within(
    lcs: &Sglcs,
    r: &ConfigLanguage,
    lang: &ConfigLanguage,
    c: &Configuration,
) -> bool {
    member(r, c)
        && successors(lcs, c)
            .iter()
            .any(|t| member(r, t) && member(lang, t))
}

/// Dual predecessor inside the sub-game on `r`: successors outside `r` are cut.
pub fn dual_pre_within(
    lcs: &Sglcs,
    r: &ConfigLanguage,
    lang: &ConfigLanguage,
    c: &Configuration,
) -> bool {
    member(r, c)
        && successors(lcs, c)
            .iter()
            .all(|t| !member(r, t) || member(lang, t))
}

/// Some member of `lang` lies channel-wise below `c`.
pub fn upward(lang: &ConfigLanguage, c: &Configuration) -> bool {
    subword_contents(&c.contents)
        .into_iter()
        .any(|contents| member(lang, &Configuration::new(c.control, contents, c.bit)))
}
