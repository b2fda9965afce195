mod common;

use common::{mask, small_tree, stopping_time};
use dynkin_core::io::gen_process;
use dynkin_core::snell::{is_martingale_before, is_supermartingale_before, snell_envelope};
use dynkin_core::tree::DEFAULT_ENUMERATION_CAP;
use dynkin_core::Process;
use proptest::prelude::*;

proptest! {
    #[test]
    fn envelope_dominates_and_matches_at_leaves(tree in small_tree(5), seed in any::<u64>()) {
        let u = gen_process(&tree, -2.0, 2.0, seed);
        let res = snell_envelope(&tree, &u).unwrap();
        for v in 0..tree.len() {
            prop_assert!(res.envelope[v] >= u[v]);
        }
        for &l in tree.leaves() {
            prop_assert_eq!(res.envelope[l], u[l]);
        }
        for v in res.first_hit.nodes() {
            prop_assert_eq!(res.envelope[v], u[v]);
        }
        prop_assert_eq!(res.root_value, res.envelope[0]);
    }

    #[test]
    fn envelope_martingale_properties(tree in small_tree(5), seed in any::<u64>()) {
        let u = gen_process(&tree, -2.0, 2.0, seed);
        let res = snell_envelope(&tree, &u).unwrap();
        prop_assert!(is_supermartingale_before(&tree, &res.envelope, &tree.horizon_time(), 1e-9).unwrap());
        prop_assert!(is_martingale_before(&tree, &res.envelope, &res.first_hit, 1e-9).unwrap());
    }

    #[test]
    fn root_value_is_the_supremum(tree in small_tree(3), seed in any::<u64>()) {
        let u = gen_process(&tree, -2.0, 2.0, seed);
        let res = snell_envelope(&tree, &u).unwrap();
        let all = tree.enumerate_stopping_times(DEFAULT_ENUMERATION_CAP).unwrap();
        let best = all.iter().map(|t| tree.expect_at(&u, t).unwrap()).fold(f64::MIN, f64::max);
        prop_assert!((best - res.root_value).abs() <= 1e-12);
        prop_assert!((tree.expect_at(&u, &res.first_hit).unwrap() - res.root_value).abs() <= 1e-12);
    }

    #[test]
    fn envelope_is_monotone_in_the_source(tree in small_tree(5), seed in any::<u64>()) {
        let u = gen_process(&tree, -2.0, 2.0, seed);
        let bump = gen_process(&tree, 0.0, 0.5, seed.wrapping_add(1));
        let u2 = Process::from_fn(&tree, |v| u[v] + bump[v]);
        let w = snell_envelope(&tree, &u).unwrap().envelope;
        let w2 = snell_envelope(&tree, &u2).unwrap().envelope;
        for v in 0..tree.len() {
            prop_assert!(w[v] <= w2[v] + 1e-12);
        }
    }

    #[test]
    fn constants_are_martingales_before_anything(tree in small_tree(4), m in mask(), c in -5.0f64..5.0) {
        let z = Process::constant(&tree, c);
        let bound = stopping_time(&tree, &m);
        prop_assert!(is_martingale_before(&tree, &z, &bound, 1e-12).unwrap());
        prop_assert!(is_supermartingale_before(&tree, &z, &bound, 1e-12).unwrap());
    }
}
