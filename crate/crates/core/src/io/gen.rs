//! Seeded instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::GameError;
use crate::tree::{AdaptedProcess, NodeSpec, TreeError};
use crate::{Game, Tree};

/// Minimum spacing between `X < Q < Y` in generated games.
pub const DEFAULT_GAP: f64 = 0.1;
/// Share of (node, player) pairs where a touching game sets `Q = Y`.
pub const DEFAULT_TOUCHING_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenMode {
    /// `X < Q < Y` everywhere.
    Strict,
    /// As strict, but `Q = Y` on a seeded fraction of nodes.
    Touching,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub players: usize,
    pub depth: usize,
    pub branching: usize,
    pub seed: u64,
    pub mode: GenMode,
    pub gap: f64,
    pub touching_fraction: f64,
}

impl GenParams {
    pub fn new(players: usize, depth: usize, branching: usize, seed: u64, mode: GenMode) -> Self {
        GenParams {
            players,
            depth,
            branching,
            seed,
            mode,
            gap: DEFAULT_GAP,
            touching_fraction: DEFAULT_TOUCHING_FRACTION,
        }
    }
}

/// Random game on a uniform tree satisfying the ordering and inclusion assumptions.
///
/// `X^i` is uniform on `[0, 2)`, `Q^i = X^i + gap + U[0, 0.5)` and
/// `Y^i = Q^i + gap + U[0, 0.5)`; in touching mode `Y^i` is pulled down to
/// `Q^i` with probability `touching_fraction` per node and player. Since
/// `X < Y` at every node either way, the inclusion assumption holds.
pub fn gen_game(params: &GenParams) -> Result<Game, GameError> {
    if params.depth == 0 {
        return Err(TreeError::ZeroHorizon.into());
    }
    let tree = Tree::uniform(params.depth, params.branching)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (x, q, y) = random_payoffs(&tree, params, &mut rng);
    Game::new(tree, x, q, y)
}

type Triples = (Vec<AdaptedProcess<f64>>, Vec<AdaptedProcess<f64>>, Vec<AdaptedProcess<f64>>);

fn random_payoffs(tree: &Tree, params: &GenParams, rng: &mut impl Rng) -> Triples {
    let k = tree.len();
    let mut xs = Vec::with_capacity(params.players);
    let mut qs = Vec::with_capacity(params.players);
    let mut ys = Vec::with_capacity(params.players);
    for _ in 0..params.players {
        let mut x = Vec::with_capacity(k);
        let mut q = Vec::with_capacity(k);
        let mut y = Vec::with_capacity(k);
        for _ in 0..k {
            let xv: f64 = rng.gen_range(0.0..2.0);
            let qv = xv + params.gap + rng.gen_range(0.0..0.5);
            let mut yv = qv + params.gap + rng.gen_range(0.0..0.5);
            if params.mode == GenMode::Touching && rng.gen_bool(params.touching_fraction) {
                yv = qv;
            }
            x.push(xv);
            q.push(qv);
            y.push(yv);
        }
        xs.push(AdaptedProcess::new(x).expect("finite"));
        qs.push(AdaptedProcess::new(q).expect("finite"));
        ys.push(AdaptedProcess::new(y).expect("finite"));
    }
    (xs, qs, ys)
}

/// Every player gets `X = 1/2`, `Q = Y = 1`: every common deterministic stopping
/// time is an equilibrium with payoff 1.
pub fn demo_constant(players: usize, depth: usize, branching: usize) -> Result<Game, GameError> {
    Game::constant(Tree::uniform(depth, branching)?, players, 0.5, 1.0, 1.0)
}

/// Tree of the given depth where each internal node has between 1 and
/// `max_branching` children with random, non-uniform probabilities.
pub fn gen_tree(depth: usize, max_branching: usize, seed: u64) -> Result<Tree, TreeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = vec![NodeSpec { id: 0, parent: None, cond_prob: 1.0 }];
    let mut frontier = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &par in &frontier {
            let b = rng.gen_range(1..=max_branching.max(1));
            let weights: Vec<f64> = (0..b).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for w in weights {
                let id = nodes.len();
                nodes.push(NodeSpec { id, parent: Some(par), cond_prob: w / total });
                next.push(id);
            }
        }
        frontier = next;
    }
    Tree::new(&nodes, depth)
}

/// Process with values uniform on `[lo, hi)`.
pub fn gen_process(tree: &Tree, lo: f64, hi: f64, seed: u64) -> AdaptedProcess<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AdaptedProcess::from_fn(tree, |_| rng.gen_range(lo..hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_game() {
        let p = GenParams::new(3, 3, 2, 42, GenMode::Touching);
        assert_eq!(gen_game(&p).unwrap(), gen_game(&p).unwrap());
        let other = GenParams { seed: 43, ..p.clone() };
        assert_ne!(gen_game(&p).unwrap(), gen_game(&other).unwrap());
    }

    #[test]
    fn generated_games_validate() {
        for seed in 0..20 {
            for mode in [GenMode::Strict, GenMode::Touching] {
                let g = gen_game(&GenParams::new(3, 3, 2, seed, mode)).unwrap();
                let rep = g.validate(0.0);
                assert!(rep.passed, "seed {seed} {mode:?}: {rep:?}");
            }
        }
    }

    #[test]
    fn strict_gaps_hold() {
        let g = gen_game(&GenParams::new(2, 3, 3, 7, GenMode::Strict)).unwrap();
        for i in 0..2 {
            for v in 0..g.tree().len() {
                assert!(g.q(i)[v] - g.x(i)[v] >= DEFAULT_GAP);
                assert!(g.y(i)[v] - g.q(i)[v] >= DEFAULT_GAP);
            }
        }
    }

    #[test]
    fn touching_mode_produces_ties() {
        let g = gen_game(&GenParams::new(2, 4, 2, 1, GenMode::Touching)).unwrap();
        let ties = (0..2)
            .flat_map(|i| (0..g.tree().len()).map(move |v| (i, v)))
            .filter(|&(i, v)| g.q(i)[v] == g.y(i)[v])
            .count();
        assert!(ties > 0);
    }

    #[test]
    fn demo_is_constant_and_valid() {
        let g = demo_constant(4, 2, 3).unwrap();
        assert!(g.validate(0.0).passed);
        assert!(g.x(3).values().iter().all(|&v| v == 0.5));
        assert!(g.y(0).values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn invalid_dimensions() {
        assert!(gen_game(&GenParams::new(1, 2, 2, 0, GenMode::Strict)).is_err());
        assert!(gen_game(&GenParams::new(2, 0, 2, 0, GenMode::Strict)).is_err());
        assert!(gen_game(&GenParams::new(2, 2, 0, 0, GenMode::Strict)).is_err());
    }

    #[test]
    fn random_trees_are_valid() {
        for seed in 0..10 {
            let t = gen_tree(3, 3, seed).unwrap();
            assert_eq!(t.horizon(), 3);
        }
    }
}
