mod common;

use common::{count_by_subsets, mask, small_tree, stopping_time};
use dynkin_core::io::{gen_process, gen_tree};
use dynkin_core::tree::DEFAULT_ENUMERATION_CAP;
use dynkin_core::Tree;
use proptest::prelude::*;

#[test]
fn enumeration_count_matches_subset_oracle() {
    let mut checked = 0;
    for seed in 0..200 {
        let tree = gen_tree(1 + (seed % 3) as usize, 3, seed).unwrap();
        if tree.len() > 16 {
            continue;
        }
        let expected = count_by_subsets(&tree);
        assert_eq!(tree.count_stopping_times(), expected as u128, "seed {seed}");
        assert_eq!(tree.enumerate_stopping_times(DEFAULT_ENUMERATION_CAP).unwrap().len(), expected);
        checked += 1;
    }
    assert!(checked > 50);
    // binary trees: 2, 5, 26, 677
    for (d, n) in [(1, 2), (2, 5), (3, 26)] {
        assert_eq!(count_by_subsets(&Tree::uniform(d, 2).unwrap()), n);
    }
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(tree in small_tree(4), m in mask()) {
        let t = stopping_time(&tree, &m);
        prop_assert_eq!(tree.canonicalize(t.nodes()).unwrap(), t);
    }

    #[test]
    fn stop_sets_partition_the_paths(tree in small_tree(4), m in mask()) {
        let t = stopping_time(&tree, &m);
        let total: f64 = t.nodes().map(|v| tree.node_prob(v)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for &leaf in tree.leaves() {
            let hits = tree.path_to(leaf).into_iter().filter(|&v| t.contains(v)).count();
            prop_assert_eq!(hits, 1);
        }
    }

    #[test]
    fn min_stop_lattice_laws(tree in small_tree(4), a in mask(), b in mask(), c in mask()) {
        let (a, b, c) = (stopping_time(&tree, &a), stopping_time(&tree, &b), stopping_time(&tree, &c));
        let ab = tree.min_stop(&a, &b).unwrap();
        prop_assert_eq!(&ab, &tree.min_stop(&b, &a).unwrap());
        prop_assert_eq!(tree.min_stop(&ab, &c).unwrap(), tree.min_stop(&a, &tree.min_stop(&b, &c).unwrap()).unwrap());
        prop_assert_eq!(&tree.min_stop(&a, &a).unwrap(), &a);
        prop_assert!(tree.leq(&ab, &a).unwrap());
        prop_assert!(tree.leq(&ab, &b).unwrap());
        let da = tree.leaf_depths(&a).unwrap();
        let db = tree.leaf_depths(&b).unwrap();
        let dm = tree.leaf_depths(&ab).unwrap();
        for k in 0..dm.len() {
            prop_assert_eq!(dm[k], da[k].min(db[k]));
        }
    }

    #[test]
    fn leq_is_leafwise(tree in small_tree(4), a in mask(), b in mask()) {
        let (a, b) = (stopping_time(&tree, &a), stopping_time(&tree, &b));
        let da = tree.leaf_depths(&a).unwrap();
        let db = tree.leaf_depths(&b).unwrap();
        prop_assert_eq!(tree.leq(&a, &b).unwrap(), da.iter().zip(&db).all(|(x, y)| x <= y));
        for (k, &leaf) in tree.leaves().iter().enumerate() {
            prop_assert_eq!(tree.stop_depth(&a, leaf).unwrap(), da[k]);
        }
    }

    #[test]
    fn expectation_is_monotone(tree in small_tree(4), m in mask(), seed in any::<u64>(), shift in 0.0f64..1.0) {
        let t = stopping_time(&tree, &m);
        let z = gen_process(&tree, -1.0, 1.0, seed);
        let bump = gen_process(&tree, 0.0, shift + 1e-3, seed ^ 1);
        let z2 = dynkin_core::Process::from_fn(&tree, |v| z[v] + bump[v]);
        prop_assert!(tree.expect_at(&z, &t).unwrap() <= tree.expect_at(&z2, &t).unwrap());
    }

    #[test]
    fn expectation_matches_leafwise_sum(tree in small_tree(4), m in mask(), seed in any::<u64>()) {
        let t = stopping_time(&tree, &m);
        let z = gen_process(&tree, -1.0, 1.0, seed);
        let stops = tree.leaf_stop_nodes(&t).unwrap();
        let leafwise: f64 = tree.leaves().iter().zip(&stops).map(|(&l, &s)| tree.node_prob(l) * z[s]).sum();
        prop_assert!((tree.expect_at(&z, &t).unwrap() - leafwise).abs() < 1e-12);
    }
}
