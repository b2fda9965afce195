#![allow(dead_code)]

use dynkin_core::io::gen_tree;
use dynkin_core::{StoppingTime, Tree};
use proptest::prelude::*;

/// Random tree of depth 1..=max_depth with up to 3 children per node.
pub fn small_tree(max_depth: usize) -> impl Strategy<Value = Tree> {
    (1..=max_depth, 1usize..=3, any::<u64>()).prop_map(|(d, b, seed)| gen_tree(d, b, seed).unwrap())
}

/// Canonical stopping time from a random node mask.
pub fn stopping_time(tree: &Tree, mask: &[bool]) -> StoppingTime {
    tree.canonicalize((0..tree.len()).filter(|&v| mask[v % mask.len()])).unwrap()
}

pub fn mask() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(prop::bool::weighted(0.25), 1..64)
}

/// Counts stop sets by checking every subset of nodes: a subset is a stopping
/// time iff every root-to-leaf path meets it exactly once.
pub fn count_by_subsets(tree: &Tree) -> usize {
    let paths: Vec<Vec<usize>> = tree.leaves().iter().map(|&l| tree.path_to(l)).collect();
    (0u64..(1u64 << tree.len()))
        .filter(|mask| {
            paths
                .iter()
                .all(|p| p.iter().filter(|&&v| mask & (1 << v) != 0).count() == 1)
        })
        .count()
}
