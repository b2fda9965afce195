//! Snell envelope by backward induction and (super)martingale checks.

use crate::scalar::Scalar;
use crate::tree::{AdaptedProcess, ScenarioTree, StoppingTime, TreeError};

/// Slack under which the obstacle counts as hitting the envelope.
pub const DEFAULT_HIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SnellResult<S> {
    /// Smallest supermartingale dominating the source process.
    pub envelope: AdaptedProcess<S>,
    /// First time the envelope meets the source process.
    pub first_hit: StoppingTime,
    /// Envelope value at the root, the optimal expected reward.
    pub root_value: S,
}

/// Snell envelope of `u` with the default hit tolerance.
pub fn snell_envelope<S: Scalar>(
    tree: &ScenarioTree<S>,
    u: &AdaptedProcess<S>,
) -> Result<SnellResult<S>, TreeError> {
    snell_envelope_with_tol(tree, u, S::lit(DEFAULT_HIT_TOL))
}

/// Snell envelope of `u`.
///
/// `W(leaf) = U(leaf)` and `W(v) = max(U(v), E[W | v])` above. A node counts
/// as a hit when `U(v) >= E[W | v] - hit_tol`; the envelope is then set to
/// `U(v)` exactly so that hits and dominance agree bitwise.
pub fn snell_envelope_with_tol<S: Scalar>(
    tree: &ScenarioTree<S>,
    u: &AdaptedProcess<S>,
    hit_tol: S,
) -> Result<SnellResult<S>, TreeError> {
    tree.check_process(u)?;
    let k = tree.len();
    let mut w = u.values().to_vec();
    let mut hit = vec![false; k];
    for v in (0..k).rev() {
        if tree.is_leaf(v) {
            hit[v] = true;
            continue;
        }
        let cont: S = tree.children(v).iter().map(|&c| tree.cond_prob(c) * w[c]).sum();
        if u[v] >= cont - hit_tol {
            hit[v] = true;
        } else {
            w[v] = cont;
        }
    }
    let first_hit = tree.canonicalize(hit.iter().enumerate().filter_map(|(v, &h)| h.then_some(v)))?;
    let root_value = w[0];
    Ok(SnellResult { envelope: AdaptedProcess::new(w)?, first_hit, root_value })
}

/// `Z(v) >= E[Z | v] - tol` at every internal node strictly before `bound`.
pub fn is_supermartingale_before<S: Scalar>(
    tree: &ScenarioTree<S>,
    z: &AdaptedProcess<S>,
    bound: &StoppingTime,
    tol: S,
) -> Result<bool, TreeError> {
    check_before(tree, z, bound, |value, cont| value >= cont - tol)
}

/// `|Z(v) - E[Z | v]| <= tol` at every internal node strictly before `bound`.
pub fn is_martingale_before<S: Scalar>(
    tree: &ScenarioTree<S>,
    z: &AdaptedProcess<S>,
    bound: &StoppingTime,
    tol: S,
) -> Result<bool, TreeError> {
    check_before(tree, z, bound, |value, cont| (value - cont).abs() <= tol)
}

fn check_before<S: Scalar>(
    tree: &ScenarioTree<S>,
    z: &AdaptedProcess<S>,
    bound: &StoppingTime,
    holds: impl Fn(S, S) -> bool,
) -> Result<bool, TreeError> {
    tree.check_process(z)?;
    let anchor = tree.stop_anchor(bound)?;
    Ok((0..tree.len())
        .filter(|&v| anchor[v].is_none() && !tree.is_leaf(v))
        .all(|v| holds(z[v], tree.continuation(z, v))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn process(values: &[f64]) -> AdaptedProcess<f64> {
        AdaptedProcess::new(values.to_vec()).unwrap()
    }

    #[test]
    fn deterministic_chain() {
        let tree = ScenarioTree::<f64>::uniform(2, 1).unwrap();
        let res = snell_envelope(&tree, &process(&[0.5, 0.5, 1.0])).unwrap();
        assert_eq!(res.envelope.values(), &[1.0, 1.0, 1.0]);
        assert_eq!(res.first_hit.nodes().collect::<Vec<_>>(), vec![2]);
        assert_eq!(res.root_value, 1.0);
    }

    #[test]
    fn one_step_stop_at_root() {
        let tree = ScenarioTree::<f64>::uniform(1, 2).unwrap();
        let res = snell_envelope(&tree, &process(&[0.6, 1.0, 0.0])).unwrap();
        assert_eq!(res.root_value, 0.6);
        assert_eq!(res.first_hit, tree.root_time());
        assert_eq!(res.envelope.values(), &[0.6, 1.0, 0.0]);
    }

    #[test]
    fn constant_process() {
        let tree = ScenarioTree::<f64>::uniform(3, 3).unwrap();
        let u = AdaptedProcess::constant(&tree, 2.5);
        let res = snell_envelope(&tree, &u).unwrap();
        assert_eq!(res.envelope, u);
        assert_eq!(res.first_hit, tree.root_time());
        assert_eq!(res.root_value, 2.5);
    }

    #[test]
    fn supermartingale_examples() {
        let tree = ScenarioTree::<f64>::uniform(1, 2).unwrap();
        let h = tree.horizon_time();
        assert!(!is_supermartingale_before(&tree, &process(&[0.0, 1.0, 1.0]), &h, 1e-9).unwrap());
        assert!(is_supermartingale_before(&tree, &process(&[1.0, 1.0, 1.0]), &h, 0.0).unwrap());
        let res = snell_envelope(&tree, &process(&[0.0, 1.0, 3.0])).unwrap();
        assert!(is_supermartingale_before(&tree, &res.envelope, &h, 1e-9).unwrap());
        // nothing lies strictly before the root
        assert!(is_supermartingale_before(&tree, &process(&[0.0, 1.0, 1.0]), &tree.root_time(), 0.0).unwrap());
    }

    #[test]
    fn martingale_examples() {
        let chain = ScenarioTree::<f64>::uniform(2, 1).unwrap();
        let h = chain.horizon_time();
        assert!(!is_martingale_before(&chain, &process(&[1.0, 1.0, 0.0]), &h, 1e-9).unwrap());
        assert!(is_martingale_before(&chain, &process(&[4.0, 4.0, 4.0]), &h, 0.0).unwrap());
        let res = snell_envelope(&chain, &process(&[0.0, 2.0, 1.0])).unwrap();
        assert!(is_martingale_before(&chain, &res.envelope, &res.first_hit, 1e-9).unwrap());
        assert!(!is_martingale_before(&chain, &res.envelope, &h, 1e-9).unwrap());
    }

    #[test]
    fn works_in_single_precision() {
        let tree = ScenarioTree::<f32>::uniform(1, 2).unwrap();
        let u = AdaptedProcess::new(vec![0.6f32, 1.0, 0.0]).unwrap();
        let res = snell_envelope(&tree, &u).unwrap();
        assert_eq!(res.root_value, 0.6f32);
    }
}
