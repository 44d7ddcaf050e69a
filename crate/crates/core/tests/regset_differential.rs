mod support;

use lcspg::fixtures;
use lcspg::gen::random_language;
use lcspg::lcs::{Configuration, Sglcs};
use lcspg::regset::{ConfigLanguage, PreMode, Signature};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::member;

type Reference<'a> = Box<dyn Fn(&Configuration) -> bool + 'a>;

fn check_all(lcs: &Sglcs, a: &ConfigLanguage, b: &ConfigLanguage, configs: &[Configuration]) {
    let ops: Vec<(&str, ConfigLanguage, Reference)> = vec![
        (
            "union",
            a.union(b),
            Box::new(|c| member(a, c) || member(b, c)),
        ),
        (
            "intersection",
            a.intersection(b),
            Box::new(|c| member(a, c) && member(b, c)),
        ),
        (
            "difference",
            a.difference(b),
            Box::new(|c| member(a, c) && !member(b, c)),
        ),
        ("complement", a.complement(), Box::new(|c| !member(a, c))),
        (
            "upward closure",
            a.upward_closure(),
            Box::new(|c| support::upward(a, c)),
        ),
        (
            "loss pre",
            a.pre_loss(),
            Box::new(|c| c.bit == 0 && support::pre(lcs, a, c)),
        ),
        ("pre", a.pre(lcs), Box::new(|c| support::pre(lcs, a, c))),
        (
            "dual pre",
            a.pre_full(lcs, PreMode::DualPre, None),
            Box::new(|c| support::dual_pre(lcs, a, c)),
        ),
        (
            "pre within",
            a.pre_full(lcs, PreMode::Pre, Some(b)),
            Box::new(|c| support::pre_within(lcs, b, a, c)),
        ),
        (
            "dual pre within",
            a.pre_full(lcs, PreMode::DualPre, Some(b)),
            Box::new(|c| support::dual_pre_within(lcs, b, a, c)),
        ),
    ];
    for (name, out, reference) in &ops {
        for c in configs {
            assert_eq!(
                member(out, c),
                reference(c),
                "{name} at {}",
                lcs.format_config(c)
            );
        }
    }
    for (i, rule) in lcs.rules().iter().enumerate() {
        let out = a.pre_rule(rule);
        for c in configs {
            let expected = c.bit == 1
                && c.control == rule.from
                && lcs.enabled(rule, c).unwrap()
                && member(a, &lcs.apply(rule, c));
            assert_eq!(
                member(&out, c),
                expected,
                "rule {i} at {}",
                lcs.format_config(c)
            );
        }
    }
    let stuck = a.pre_deadlock(lcs);
    for c in configs {
        let expected = c.bit == 1
            && lcs.enabled_rules(c).is_empty()
            && member(a, &Configuration::new(c.control, c.contents.clone(), 0));
        assert_eq!(
            member(&stuck, c),
            expected,
            "deadlock pre at {}",
            lcs.format_config(c)
        );
    }
}

#[test]
fn operations_match_set_comprehension() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let systems = fixtures::all_lcs();
    for round in 0..50 {
        let (_, lcs) = &systems[round % systems.len()];
        let sig = Signature::of(lcs);
        let a = random_language(&mut rng, sig);
        let b = random_language(&mut rng, sig);
        check_all(lcs, &a, &b, &lcs.configs_up_to(3));
    }
}

#[test]
fn algebraic_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (_, lcs) in fixtures::all_lcs() {
        let sig = Signature::of(&lcs);
        for _ in 0..8 {
            let a = random_language(&mut rng, sig);
            let b = random_language(&mut rng, sig);
            assert_eq!(
                a.union(&b).complement(),
                a.complement().intersection(&b.complement())
            );
            assert_eq!(
                a.intersection(&b).complement(),
                a.complement().union(&b.complement())
            );
            assert_eq!(a.complement().complement(), a);
            let up = a.upward_closure();
            assert_eq!(up.upward_closure(), up);
            assert!(a.is_subset(&up));
            assert_eq!(a.union(&b).pre(&lcs), a.pre(&lcs).union(&b.pre(&lcs)));
            assert_eq!(
                a.pre_full(&lcs, PreMode::DualPre, None),
                a.complement().pre(&lcs).complement()
            );
            // every configuration has a successor, so dual_pre ⊆ pre
            assert!(a
                .pre_full(&lcs, PreMode::DualPre, None)
                .is_subset(&a.pre(&lcs)));
            // loss predecessors are upward closed
            let lp = a.pre_loss();
            assert_eq!(lp.upward_closure(), lp);
        }
    }
}

#[test]
fn witness_and_size_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (_, lcs) in fixtures::all_lcs() {
        let sig = Signature::of(&lcs);
        for _ in 0..10 {
            let a = random_language(&mut rng, sig);
            match a.witness() {
                Some(c) => assert!(member(&a, &c)),
                None => assert!(a.is_empty()),
            }
        }
    }
}
