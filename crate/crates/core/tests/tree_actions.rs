use proptest::prelude::*;
use tdlc_core::boolalg::{Address, TreeShape};
use tdlc_core::permgrp::Perm;
use tdlc_core::presets;
use tdlc_core::specfile::GroupSpec;
use tdlc_core::tree::{Automorphism, UniversalGroup};

fn generators(text: &str) -> (TreeShape, Vec<Automorphism>, UniversalGroup) {
    let spec = GroupSpec::parse(text).unwrap();
    let gens = spec.elements.iter().map(|(_, g)| g.clone()).collect();
    (spec.shape, gens, spec.universal().unwrap())
}

fn word_element(shape: TreeShape, gens: &[Automorphism], word: &[(usize, bool)]) -> Automorphism {
    word.iter()
        .fold(Automorphism::identity(shape), |acc, &(i, inv)| {
            let g = &gens[i % gens.len()];
            acc.compose(&if inv { g.inverse() } else { g.clone() })
        })
}

/// Neighbour of `v` across the edge coloured `c` in the regular tree.
fn across(v: &Address, c: u8) -> Address {
    if v.last() == Some(c) {
        v.parent().unwrap()
    } else {
        v.child(c)
    }
}

fn distance(a: &Address, b: &Address) -> usize {
    let common = a
        .letters()
        .iter()
        .zip(b.letters())
        .take_while(|(x, y)| x == y)
        .count();
    a.len() + b.len() - 2 * common
}

fn words() -> impl Strategy<Value = Vec<(usize, bool)>> {
    proptest::collection::vec((0..32usize, any::<bool>()), 0..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn cocycle_identity(w1 in words(), w2 in words()) {
        for text in [presets::U_S3, presets::ROOTED_S3, presets::TWO_COPY] {
            let (shape, gens, _) = generators(text);
            let g = word_element(shape, &gens, &w1);
            let h = word_element(shape, &gens, &w2);
            let gh = g.compose(&h);
            for v in std::iter::once(Address::root()).chain(shape.ball_addresses(3)) {
                prop_assert_eq!(gh.image(&v), g.image(&h.image(&v)));
                let expected: Perm = g.local_action(&h.image(&v)).compose(&h.local_action(&v));
                prop_assert_eq!(gh.local_action(&v), expected);
            }
        }
    }

    #[test]
    fn inverses_and_isometry(w in words()) {
        let (shape, gens, u) = generators(presets::U_S3);
        let g = word_element(shape, &gens, &w);
        prop_assert!(g.compose(&g.inverse()).is_identity());
        prop_assert!(u.contains(&g));
        let ball: Vec<Address> = std::iter::once(Address::root()).chain(shape.ball_addresses(3)).collect();
        for v in &ball {
            prop_assert_eq!(g.preimage(&g.image(v)), v.clone());
            for c in 0..3u8 {
                let across_image = across(&g.image(v), g.local_action(v).apply(c as usize) as u8);
                prop_assert_eq!(g.image(&across(v, c)), across_image);
            }
            for x in &ball {
                prop_assert_eq!(distance(&g.image(v), &g.image(x)), distance(v, x));
            }
        }
    }

    #[test]
    fn normal_form_is_canonical(w1 in words(), w2 in words()) {
        let (shape, gens, _) = generators(presets::U_S3);
        let g = word_element(shape, &gens, &w1);
        let h = word_element(shape, &gens, &w2);
        let same_action = std::iter::once(Address::root())
            .chain(shape.ball_addresses(6))
            .all(|v| g.image(&v) == h.image(&v));
        // elements here have finite portraits of depth at most 6, so agreement
        // on the radius-6 ball forces equality
        prop_assume!(g.portrait().decorations().keys().all(|a| a.len() < 6));
        prop_assume!(h.portrait().decorations().keys().all(|a| a.len() < 6));
        prop_assert_eq!(same_action, g == h);
        let reparsed = GroupSpec::parse(&format!(
            "[tree]\nkind = regular\ndegree = 3\n[local_group]\ngenerators = (0 1 2), (0 1)\n[elements]\nx = {}\n",
            g.render()
        ))
        .unwrap();
        prop_assert_eq!(reparsed.element("x").unwrap(), &g);
    }
}

#[test]
fn translation_lengths() {
    let (shape, gens, _) = generators(presets::U_S3);
    let t0 = &gens[0];
    assert_eq!(t0.translation_length(), 1);
    assert_eq!(t0.pow(3).translation_length(), 3);
    assert_eq!(Automorphism::identity(shape).translation_length(), 0);
    let r = gens
        .iter()
        .find(|g| g.translation_length() == 0 && !g.is_identity());
    assert!(r.is_some());
}
