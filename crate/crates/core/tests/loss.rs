mod support;

use lcspg::lcs::{contents_up_to, is_subword, loss_distribution, sample_loss_with, Msg};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn contents_strategy() -> impl Strategy<Value = Vec<Vec<Msg>>> {
    prop::collection::vec(prop::collection::vec(0u8..3, 0..4), 1..3)
}

proptest! {
    #[test]
    fn matches_embedding_count(contents in contents_strategy(), lambda in 0.05f64..0.95) {
        let dist = loss_distribution(&contents, lambda).unwrap();
        let expected = support::subword_contents(&contents);
        prop_assert_eq!(dist.len(), expected.len());
        for to in expected {
            let p = dist.get(&to).copied().unwrap_or(0.0);
            let q = support::loss_prob(&contents, &to, lambda);
            prop_assert!((p - q).abs() < 1e-12, "{:?} -> {:?}: {} vs {}", contents, to, p, q);
        }
    }

    #[test]
    fn outcomes_are_subwords(contents in contents_strategy(), lambda in 0.05f64..0.95) {
        for to in loss_distribution(&contents, lambda).unwrap().keys() {
            for (x, y) in contents.iter().zip(to) {
                prop_assert!(is_subword(y, x));
            }
        }
    }
}

#[test]
fn sums_to_one_up_to_length_six() {
    for lambda in [0.1, 0.5, 0.9] {
        for channels in 1..=2 {
            for contents in contents_up_to(channels, 2, 6) {
                let total: f64 = loss_distribution(&contents, lambda).unwrap().values().sum();
                assert!(
                    (total - 1.0).abs() <= 1e-12,
                    "{contents:?} at {lambda}: {total}"
                );
            }
        }
    }
}

#[test]
fn sampling_follows_the_distribution() {
    let contents = vec![vec![0, 1, 0], vec![1]];
    let lambda = 0.4;
    let n = 40_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..n {
        *counts
            .entry(sample_loss_with(&contents, lambda, &mut rng))
            .or_insert(0u32) += 1;
    }
    for (to, p) in loss_distribution(&contents, lambda).unwrap() {
        let freq = counts.get(&to).copied().unwrap_or(0) as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (freq - p).abs() < 5.0 * sigma + 1e-9,
            "{to:?}: {freq} vs {p}"
        );
    }
}
