use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdlc_core::boolalg::{parse_clopen, Address, CylinderClopen, TreeShape};
use tdlc_core::localstruct::{
    class_join, class_meet, decomposition_factors, perp, perp_report, region_join, ClassKind,
    LocalClass,
};
use tdlc_core::permgrp::FiniteGroup;
use tdlc_core::tree::UniversalGroup;

fn t3() -> TreeShape {
    TreeShape::regular(3)
}

fn u_s3() -> UniversalGroup {
    UniversalGroup::new(t3(), FiniteGroup::symmetric(3)).unwrap()
}

fn random_class(shape: TreeShape, rng: &mut ChaCha8Rng) -> LocalClass {
    let k = rng.gen_range(1..=4);
    let cyls = shape.sphere(k);
    let region =
        CylinderClopen::from_addresses(shape, cyls.into_iter().filter(|_| rng.gen_bool(0.4)));
    LocalClass::from_region(region, k)
}

#[test]
fn perp_formula_matches_region_union() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for shape in [t3(), TreeShape::forest(2, 3), TreeShape::rooted(2)] {
        for _ in 0..500 {
            let a = random_class(shape, &mut rng);
            let b = random_class(shape, &mut rng);
            assert_eq!(
                class_join(shape, &a, &b),
                region_join(shape, &a, &b),
                "{a} v {b}"
            );
        }
    }
}

#[test]
fn half_tree_perp_commutes_to_depth_five() {
    let a = LocalClass::from_region(parse_clopen(t3(), "{0}").unwrap(), 1);
    assert_eq!(perp(t3(), &a).to_string(), "{1,2}");
    let r = perp_report(&u_s3(), &a, 5).unwrap();
    assert!(r.verified, "{:?}", r.checks);
    assert!(r.levels.iter().all(|l| l.commute));
    assert_eq!(r.levels.len(), 5);
}

#[test]
fn decomposition_shapes() {
    let d = decomposition_factors(&u_s3(), 2).unwrap();
    assert_eq!(d.factors.len(), 3);
    assert!(d.verified);
    let w = UniversalGroup::new(TreeShape::rooted(2), FiniteGroup::cyclic(2)).unwrap();
    let d = decomposition_factors(&w, 2).unwrap();
    assert_eq!(d.factor_orders, vec![2, 2]);
    let d = decomposition_factors(&u_s3(), 0).unwrap();
    assert_eq!(d.factors.len(), 1);
    assert_eq!(d.factors[0].kind, ClassKind::Top);
}

/// Every subset of the depth-2 cylinders gives a distinct class, and the
/// class operations are the set operations on those subsets.
#[test]
fn classes_at_fixed_depth_form_the_power_set() {
    let shape = t3();
    let cyls = shape.sphere(2);
    let subsets: Vec<BTreeSet<Address>> = (0u32..1 << cyls.len())
        .map(|m| {
            (0..cyls.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| cyls[i].clone())
                .collect()
        })
        .collect();
    let class = |s: &BTreeSet<Address>| {
        LocalClass::from_region(CylinderClopen::from_addresses(shape, s.iter().cloned()), 2)
    };
    let back = |c: &LocalClass| -> BTreeSet<Address> {
        c.region(shape).refine(2).unwrap().into_iter().collect()
    };
    let images: HashSet<String> = subsets.iter().map(|s| class(s).to_string()).collect();
    assert_eq!(images.len(), 64);
    let all: BTreeSet<Address> = cyls.iter().cloned().collect();
    for (i, s) in subsets.iter().enumerate() {
        assert_eq!(back(&class(s)), *s);
        assert_eq!(back(&perp(shape, &class(s))), &all - s);
        for t in subsets.iter().skip(i).step_by(7) {
            assert_eq!(back(&class_meet(shape, &class(s), &class(t))), s & t);
            assert_eq!(back(&class_join(shape, &class(s), &class(t))), s | t);
        }
    }
}
