use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use tdlc_core::boolalg::{parse_clopen, Address, CylinderClopen, TreeShape};

const DEPTH: usize = 6;

fn shapes() -> impl Strategy<Value = TreeShape> {
    prop_oneof![
        Just(TreeShape::regular(3)),
        Just(TreeShape::rooted(2)),
        Just(TreeShape::forest(2, 3)),
        Just(TreeShape::regular(4)),
    ]
}

/// A clopen built from a random subset of the depth-`k` cylinders, `k ≤ 4`.
fn clopen(shape: TreeShape) -> impl Strategy<Value = CylinderClopen> {
    (0..=4usize).prop_flat_map(move |k| {
        let sphere = shape.sphere(k);
        proptest::collection::vec(any::<bool>(), sphere.len()).prop_map(move |bits| {
            CylinderClopen::from_addresses(
                shape,
                sphere
                    .iter()
                    .zip(bits)
                    .filter(|(_, b)| *b)
                    .map(|(a, _)| a.clone()),
            )
        })
    })
}

fn triple() -> impl Strategy<Value = (CylinderClopen, CylinderClopen, CylinderClopen)> {
    shapes().prop_flat_map(|s| (clopen(s), clopen(s), clopen(s)))
}

/// The clopen as an explicit set of depth-6 cylinders.
fn cells(c: &CylinderClopen) -> BTreeSet<Address> {
    c.refine(DEPTH).unwrap().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn operations_agree_with_sets((a, b, _) in triple()) {
        let all: BTreeSet<Address> = a.shape().sphere(DEPTH).into_iter().collect();
        let (sa, sb) = (cells(&a), cells(&b));
        prop_assert_eq!(cells(&a.meet(&b)), &sa & &sb);
        prop_assert_eq!(cells(&a.join(&b)), &sa | &sb);
        prop_assert_eq!(cells(&a.complement()), &all - &sa);
        prop_assert_eq!(cells(&a.difference(&b)), &sa - &sb);
        prop_assert_eq!(a.le(&b), sa.is_subset(&sb));
        prop_assert_eq!(a.is_disjoint(&b), sa.is_disjoint(&sb));
    }

    #[test]
    fn lattice_identities((a, b, c) in triple()) {
        prop_assert_eq!(a.meet(&b), b.meet(&a));
        prop_assert_eq!(a.join(&b), b.join(&a));
        prop_assert_eq!(a.meet(&b).meet(&c), a.meet(&b.meet(&c)));
        prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
        prop_assert_eq!(a.meet(&b.join(&c)), a.meet(&b).join(&a.meet(&c)));
        prop_assert_eq!(a.join(&b.meet(&c)), a.join(&b).meet(&a.join(&c)));
        prop_assert_eq!(a.join(&a.meet(&b)), a.clone());
        prop_assert_eq!(a.meet(&a.join(&b)), a.clone());
        prop_assert_eq!(a.join(&b).complement(), a.complement().meet(&b.complement()));
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert!(a.meet(&a.complement()).is_zero());
        prop_assert!(a.join(&a.complement()).is_top());
    }

    #[test]
    fn measure_is_additive((a, b, _) in triple()) {
        let lhs = a.join(&b).measure() + a.meet(&b).measure();
        prop_assert_eq!(lhs, a.measure() + b.measure());
        prop_assert_eq!(a.measure() + a.complement().measure(), BigRational::one());
        prop_assert_eq!(a.is_zero(), a.measure().is_zero());
    }

    #[test]
    fn text_round_trip(a in shapes().prop_flat_map(clopen)) {
        let back = parse_clopen(a.shape(), &a.to_string()).unwrap();
        prop_assert_eq!(back, a);
    }
}

#[test]
fn canonical_forms() {
    let t3 = TreeShape::regular(3);
    assert_eq!(parse_clopen(t3, "{01,02}").unwrap().to_string(), "{0}");
    assert_eq!(parse_clopen(t3, "{0,1,2}").unwrap().to_string(), "TOP");
    assert_eq!(parse_clopen(t3, "{}").unwrap(), CylinderClopen::zero(t3));
    assert!(parse_clopen(t3, "{00}").is_err());
    assert!(parse_clopen(t3, "{01").is_err());
}
