//! Finite scenario trees, adapted processes and stopping times.
//!
//! A node's time is its depth. Every leaf sits at the horizon `M`, so a
//! root-to-leaf path is one scenario and the leaves partition the sample
//! space. A stopping time is stored as its canonical stop set: an antichain
//! of nodes that meets every root-to-leaf path exactly once.

use std::ops::Index;

use thiserror::Error;

use crate::scalar::Scalar;

/// Default limit on the number of stopping times [`ScenarioTree::enumerate_stopping_times`]
/// will materialize.
pub const DEFAULT_ENUMERATION_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("tree has no nodes")]
    Empty,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("branching must be at least 1")]
    ZeroBranching,
    #[error("node at position {position} has id {id}; ids must be 0..K-1 in order")]
    NonSequentialId { position: usize, id: usize },
    #[error("node {node}: parent {parent} does not precede it")]
    ParentOrder { node: usize, parent: usize },
    #[error("node {node} has no parent; only node 0 may be the root")]
    MultipleRoots { node: usize },
    #[error("node 0 must be the root but has parent {parent}")]
    RootHasParent { parent: usize },
    #[error("root has conditional probability {p}, expected 1")]
    RootProbability { p: f64 },
    #[error("node {node}: conditional probability {p} is outside (0, 1]")]
    BadProbability { node: usize, p: f64 },
    #[error("children of node {parent} have probabilities summing to {sum}, expected 1")]
    ProbabilitySum { parent: usize, sum: f64 },
    #[error("leaf {node} has depth {depth} but the horizon is {horizon}")]
    UnevenHorizon { node: usize, depth: usize, horizon: usize },
    #[error("node {node} has depth {depth} beyond the horizon {horizon}")]
    BeyondHorizon { node: usize, depth: usize, horizon: usize },
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("node {0} is not a leaf")]
    NotALeaf(usize),
    #[error("size mismatch: tree has {expected} nodes, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("tree has {count} stopping times, enumeration cap is {cap}")]
    EnumerationCap { count: u128, cap: usize },
}

/// One node of a tree description, as read from a game file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSpec<S> {
    pub id: usize,
    pub parent: Option<usize>,
    pub cond_prob: S,
}

/// A finite event tree carrying conditional branch probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTree<S> {
    parent: Vec<Option<usize>>,
    cond_prob: Vec<S>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
    node_prob: Vec<S>,
    leaves: Vec<usize>,
    horizon: usize,
}

impl<S: Scalar> ScenarioTree<S> {
    pub fn new(nodes: &[NodeSpec<S>], horizon: usize) -> Result<Self, TreeError> {
        if nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        if horizon == 0 {
            return Err(TreeError::ZeroHorizon);
        }
        let k = nodes.len();
        let mut parent = Vec::with_capacity(k);
        let mut cond_prob = Vec::with_capacity(k);
        let mut depth = Vec::with_capacity(k);
        let mut children = vec![Vec::new(); k];
        let mut node_prob: Vec<S> = Vec::with_capacity(k);

        for (position, node) in nodes.iter().enumerate() {
            if node.id != position {
                return Err(TreeError::NonSequentialId { position, id: node.id });
            }
            let p = node.cond_prob;
            match node.parent {
                None if position == 0 => {
                    if (p - S::one()).abs() > S::prob_sum_tol() {
                        return Err(TreeError::RootProbability { p: to_f64(p) });
                    }
                    depth.push(0);
                    node_prob.push(S::one());
                    cond_prob.push(S::one());
                }
                None => return Err(TreeError::MultipleRoots { node: position }),
                Some(par) if position == 0 => {
                    return Err(TreeError::RootHasParent { parent: par })
                }
                Some(par) => {
                    if par >= position {
                        return Err(TreeError::ParentOrder { node: position, parent: par });
                    }
                    if !(p > S::zero() && p <= S::one()) {
                        return Err(TreeError::BadProbability { node: position, p: to_f64(p) });
                    }
                    let d = depth[par] + 1;
                    if d > horizon {
                        return Err(TreeError::BeyondHorizon { node: position, depth: d, horizon });
                    }
                    depth.push(d);
                    node_prob.push(node_prob[par] * p);
                    cond_prob.push(p);
                    children[par].push(position);
                }
            }
            parent.push(node.parent);
        }

        let mut leaves = Vec::new();
        for v in 0..k {
            if children[v].is_empty() {
                if depth[v] != horizon {
                    return Err(TreeError::UnevenHorizon { node: v, depth: depth[v], horizon });
                }
                leaves.push(v);
            } else {
                let sum: S = children[v].iter().map(|&c| cond_prob[c]).sum();
                if (sum - S::one()).abs() > S::prob_sum_tol() {
                    return Err(TreeError::ProbabilitySum { parent: v, sum: to_f64(sum) });
                }
            }
        }

        Ok(Self { parent, cond_prob, depth, children, node_prob, leaves, horizon })
    }

    /// Complete tree where every internal node has `branching` equally likely children.
    pub fn uniform(depth: usize, branching: usize) -> Result<Self, TreeError> {
        if branching == 0 {
            return Err(TreeError::ZeroBranching);
        }
        let p = S::one() / S::lit(branching as f64);
        let mut nodes = vec![NodeSpec { id: 0, parent: None, cond_prob: S::one() }];
        let mut frontier = vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * branching);
            for &par in &frontier {
                for _ in 0..branching {
                    let id = nodes.len();
                    nodes.push(NodeSpec { id, parent: Some(par), cond_prob: p });
                    next.push(id);
                }
            }
            frontier = next;
        }
        Self::new(&nodes, depth)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn cond_prob(&self, v: usize) -> S {
        self.cond_prob[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    /// Leaves in increasing id order.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    /// Unconditional probability of reaching `v`.
    pub fn node_prob(&self, v: usize) -> S {
        self.node_prob[v]
    }

    /// Node descriptions in id order, the inverse of [`ScenarioTree::new`].
    pub fn node_specs(&self) -> Vec<NodeSpec<S>> {
        (0..self.len())
            .map(|id| NodeSpec { id, parent: self.parent[id], cond_prob: self.cond_prob[id] })
            .collect()
    }

    /// Nodes on the path from the root to `v`, root first.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Conditional expectation one step ahead: `sum_c p(c) * z(c)` over the children of `v`.
    pub fn continuation(&self, z: &AdaptedProcess<S>, v: usize) -> S {
        self.children[v].iter().map(|&c| self.cond_prob[c] * z[c]).sum()
    }

    fn check_node(&self, v: usize) -> Result<(), TreeError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(TreeError::UnknownNode(v))
        }
    }

    pub(crate) fn check_time(&self, tau: &StoppingTime) -> Result<(), TreeError> {
        if tau.stop.len() == self.len() {
            Ok(())
        } else {
            Err(TreeError::SizeMismatch { expected: self.len(), got: tau.stop.len() })
        }
    }

    pub(crate) fn check_process(&self, z: &AdaptedProcess<S>) -> Result<(), TreeError> {
        if z.len() == self.len() {
            Ok(())
        } else {
            Err(TreeError::SizeMismatch { expected: self.len(), got: z.len() })
        }
    }

    /// Canonical stopping time induced by a raw set of stop nodes.
    ///
    /// Nodes below an earlier stop are dropped; leaves whose path meets no
    /// stop node are added.
    pub fn canonicalize<I>(&self, raw: I) -> Result<StoppingTime, TreeError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut marked = vec![false; self.len()];
        for v in raw {
            self.check_node(v)?;
            marked[v] = true;
        }
        Ok(self.canonical_from_marks(&marked))
    }

    fn canonical_from_marks(&self, marked: &[bool]) -> StoppingTime {
        let k = self.len();
        let mut stop = vec![false; k];
        // covered[v]: some node on the path root..=v is a kept stop node
        let mut covered = vec![false; k];
        for v in 0..k {
            let above = self.parent[v].is_some_and(|p| covered[p]);
            if above {
                covered[v] = true;
            } else if marked[v] || self.is_leaf(v) {
                stop[v] = true;
                covered[v] = true;
            }
        }
        StoppingTime { stop }
    }

    /// Stop every path at the horizon.
    pub fn horizon_time(&self) -> StoppingTime {
        self.canonical_from_marks(&vec![false; self.len()])
    }

    /// Stop every path at time 0.
    pub fn root_time(&self) -> StoppingTime {
        let mut stop = vec![false; self.len()];
        stop[0] = true;
        StoppingTime { stop }
    }

    /// Deterministic stopping time `t` (clamped to the horizon).
    pub fn constant_time(&self, t: usize) -> StoppingTime {
        let t = t.min(self.horizon);
        let stop = self.depth.iter().map(|&d| d == t).collect();
        StoppingTime { stop }
    }

    /// For every node, the stop node of `tau` at or above it, if any.
    ///
    /// `None` means the node lies strictly before `tau` on its path.
    pub fn stop_anchor(&self, tau: &StoppingTime) -> Result<Vec<Option<usize>>, TreeError> {
        self.check_time(tau)?;
        let mut anchor = vec![None; self.len()];
        for v in 0..self.len() {
            anchor[v] = match self.parent[v].and_then(|p| anchor[p]) {
                Some(a) => Some(a),
                None if tau.stop[v] => Some(v),
                None => None,
            };
        }
        Ok(anchor)
    }

    /// The stop node of `tau` on the path of each leaf, in leaf order.
    pub fn leaf_stop_nodes(&self, tau: &StoppingTime) -> Result<Vec<usize>, TreeError> {
        let anchor = self.stop_anchor(tau)?;
        Ok(self
            .leaves
            .iter()
            .map(|&l| anchor[l].expect("canonical stopping time covers every leaf"))
            .collect())
    }

    /// Stopping depth of `tau` on each leaf's path, in leaf order.
    pub fn leaf_depths(&self, tau: &StoppingTime) -> Result<Vec<usize>, TreeError> {
        Ok(self.leaf_stop_nodes(tau)?.into_iter().map(|v| self.depth[v]).collect())
    }

    pub fn stop_depth(&self, tau: &StoppingTime, leaf: usize) -> Result<usize, TreeError> {
        self.check_node(leaf)?;
        self.check_time(tau)?;
        if !self.is_leaf(leaf) {
            return Err(TreeError::NotALeaf(leaf));
        }
        let mut cur = leaf;
        let mut found = leaf;
        loop {
            if tau.stop[cur] {
                found = cur;
            }
            match self.parent[cur] {
                Some(p) => cur = p,
                None => break,
            }
        }
        Ok(self.depth[found])
    }

    /// Pointwise minimum of two stopping times.
    pub fn min_stop(&self, a: &StoppingTime, b: &StoppingTime) -> Result<StoppingTime, TreeError> {
        self.check_time(a)?;
        self.check_time(b)?;
        let marks: Vec<bool> = a.stop.iter().zip(&b.stop).map(|(&x, &y)| x || y).collect();
        Ok(self.canonical_from_marks(&marks))
    }

    /// Pointwise minimum of any number of stopping times; the horizon for an empty input.
    pub fn min_all<'a, I>(&self, times: I) -> Result<StoppingTime, TreeError>
    where
        I: IntoIterator<Item = &'a StoppingTime>,
    {
        let mut marks = vec![false; self.len()];
        for t in times {
            self.check_time(t)?;
            for (m, &s) in marks.iter_mut().zip(&t.stop) {
                *m |= s;
            }
        }
        Ok(self.canonical_from_marks(&marks))
    }

    /// `a <= b` on every path.
    pub fn leq(&self, a: &StoppingTime, b: &StoppingTime) -> Result<bool, TreeError> {
        let da = self.leaf_depths(a)?;
        let db = self.leaf_depths(b)?;
        Ok(da.iter().zip(&db).all(|(x, y)| x <= y))
    }

    /// `E[Z_tau]`.
    pub fn expect_at(&self, z: &AdaptedProcess<S>, tau: &StoppingTime) -> Result<S, TreeError> {
        self.check_process(z)?;
        self.check_time(tau)?;
        Ok(tau.nodes().map(|v| self.node_prob[v] * z[v]).sum())
    }

    /// Number of canonical stopping times: `s(leaf) = 1`, `s(v) = 1 + prod s(c)`.
    ///
    /// Saturates at `u128::MAX`.
    pub fn count_stopping_times(&self) -> u128 {
        let mut s = vec![1u128; self.len()];
        for v in (0..self.len()).rev() {
            if !self.is_leaf(v) {
                let prod = self.children[v]
                    .iter()
                    .fold(1u128, |acc, &c| acc.saturating_mul(s[c]));
                s[v] = prod.saturating_add(1);
            }
        }
        s[0]
    }

    /// Every canonical stopping time, each exactly once.
    ///
    /// Refuses when the count exceeds `cap`.
    pub fn enumerate_stopping_times(&self, cap: usize) -> Result<Vec<StoppingTime>, TreeError> {
        let count = self.count_stopping_times();
        if count > cap as u128 {
            return Err(TreeError::EnumerationCap { count, cap });
        }
        // lists[v]: all stop-node lists of the subtree rooted at v
        let mut lists: Vec<Vec<Vec<usize>>> = vec![Vec::new(); self.len()];
        for v in (0..self.len()).rev() {
            let mut out = vec![vec![v]];
            if !self.is_leaf(v) {
                let mut product: Vec<Vec<usize>> = vec![Vec::new()];
                for &c in &self.children[v] {
                    let sub = std::mem::take(&mut lists[c]);
                    product = product
                        .iter()
                        .flat_map(|prefix| {
                            sub.iter().map(move |tail| {
                                let mut joined = prefix.clone();
                                joined.extend_from_slice(tail);
                                joined
                            })
                        })
                        .collect();
                }
                out.extend(product);
            }
            lists[v] = out;
        }
        let k = self.len();
        Ok(lists
            .swap_remove(0)
            .into_iter()
            .map(|nodes| {
                let mut stop = vec![false; k];
                for v in nodes {
                    stop[v] = true;
                }
                StoppingTime { stop }
            })
            .collect())
    }
}

fn to_f64<S: Scalar>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// One finite value per tree node.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedProcess<S> {
    values: Vec<S>,
}

impl<S: Scalar> AdaptedProcess<S> {
    pub fn new(values: Vec<S>) -> Result<Self, TreeError> {
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(TreeError::NonFinite { node });
        }
        Ok(Self { values })
    }

    /// Process on `tree` whose value at node `v` is `f(v)`.
    pub fn from_fn(tree: &ScenarioTree<S>, f: impl FnMut(usize) -> S) -> Self {
        let values: Vec<S> = (0..tree.len()).map(f).collect();
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn constant(tree: &ScenarioTree<S>, c: S) -> Self {
        Self { values: vec![c; tree.len()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Applies `f` to every value.
    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

impl<S> Index<usize> for AdaptedProcess<S> {
    type Output = S;

    fn index(&self, v: usize) -> &S {
        &self.values[v]
    }
}

/// A stopping time in canonical stop-set form.
///
/// Only [`ScenarioTree`] builds these, so every value is canonical for the
/// tree that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoppingTime {
    stop: Vec<bool>,
}

impl StoppingTime {
    /// Stop nodes in increasing id order.
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.stop.iter().enumerate().filter_map(|(v, &s)| s.then_some(v))
    }

    pub fn contains(&self, v: usize) -> bool {
        self.stop.get(v).copied().unwrap_or(false)
    }

    /// Number of nodes in the tree this stopping time lives on.
    pub fn tree_len(&self) -> usize {
        self.stop.len()
    }
}
