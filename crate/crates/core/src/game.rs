//! The N-player game: payoff processes, assumption checks and the payoff functional.
//!
//! Player `i` stopping alone first receives `X^i`, stopping together with at
//! least one other player receives `Q^i`, and being preempted by the earliest
//! other player at time `R_i` receives `Y^i_{R_i}`.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::tree::{AdaptedProcess, ScenarioTree, StoppingTime, TreeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("a game needs at least 2 players, got {0}")]
    TooFewPlayers(usize),
    #[error("process counts differ: {x} X, {q} Q, {y} Y")]
    PlayerCountMismatch { x: usize, q: usize, y: usize },
    #[error("{process} of player {player} has {got} values, tree has {expected} nodes")]
    ProcessLength { process: &'static str, player: usize, expected: usize, got: usize },
    #[error("player {player} out of range for {n_players} players")]
    UnknownPlayer { player: usize, n_players: usize },
    #[error("expected {expected} stopping times, got {got}")]
    ProfileLength { expected: usize, got: usize },
}

/// Payoff processes of every player on a shared scenario tree.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec<S> {
    tree: ScenarioTree<S>,
    x: Vec<AdaptedProcess<S>>,
    q: Vec<AdaptedProcess<S>>,
    y: Vec<AdaptedProcess<S>>,
}

impl<S: Scalar> GameSpec<S> {
    pub fn new(
        tree: ScenarioTree<S>,
        x: Vec<AdaptedProcess<S>>,
        q: Vec<AdaptedProcess<S>>,
        y: Vec<AdaptedProcess<S>>,
    ) -> Result<Self, GameError> {
        if x.len() != q.len() || q.len() != y.len() {
            return Err(GameError::PlayerCountMismatch { x: x.len(), q: q.len(), y: y.len() });
        }
        if x.len() < 2 {
            return Err(GameError::TooFewPlayers(x.len()));
        }
        for (process, list) in [("X", &x), ("Q", &q), ("Y", &y)] {
            for (player, p) in list.iter().enumerate() {
                if p.len() != tree.len() {
                    return Err(GameError::ProcessLength {
                        process,
                        player,
                        expected: tree.len(),
                        got: p.len(),
                    });
                }
            }
        }
        Ok(Self { tree, x, q, y })
    }

    /// Every player receives the same constant `x`, `q`, `y` at every node.
    pub fn constant(tree: ScenarioTree<S>, n_players: usize, x: S, q: S, y: S) -> Result<Self, GameError> {
        let mk = |c| vec![AdaptedProcess::constant(&tree, c); n_players];
        let (xs, qs, ys) = (mk(x), mk(q), mk(y));
        Self::new(tree, xs, qs, ys)
    }

    pub fn tree(&self) -> &ScenarioTree<S> {
        &self.tree
    }

    pub fn n_players(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self, i: usize) -> &AdaptedProcess<S> {
        &self.x[i]
    }

    pub fn q(&self, i: usize) -> &AdaptedProcess<S> {
        &self.q[i]
    }

    pub fn y(&self, i: usize) -> &AdaptedProcess<S> {
        &self.y[i]
    }

    /// Multiplies every payoff process by `factor`.
    pub fn scaled(&self, factor: S) -> Self {
        let scale = |v: &Vec<AdaptedProcess<S>>| v.iter().map(|p| p.map(|z| z * factor)).collect();
        Self { tree: self.tree.clone(), x: scale(&self.x), q: scale(&self.q), y: scale(&self.y) }
    }

    pub(crate) fn check_player(&self, player: usize) -> Result<(), GameError> {
        if player < self.n_players() {
            Ok(())
        } else {
            Err(GameError::UnknownPlayer { player, n_players: self.n_players() })
        }
    }

    pub(crate) fn check_profile(&self, profile: &[StoppingTime]) -> Result<(), GameError> {
        if profile.len() != self.n_players() {
            return Err(GameError::ProfileLength { expected: self.n_players(), got: profile.len() });
        }
        for t in profile {
            self.tree.check_time(t)?;
        }
        Ok(())
    }

    /// Checks the ordering `X <= Q <= Y` and the inclusion condition at every node.
    ///
    /// At depth below the horizon, `Y^i - Q^i > strict_tol` for some `i` must
    /// imply `Y^j - X^j > strict_tol` for every `j`.
    pub fn validate(&self, strict_tol: S) -> AssumptionReport {
        let mut a3 = Vec::new();
        let mut a4 = Vec::new();
        let n = self.n_players();
        for v in 0..self.tree.len() {
            for i in 0..n {
                let (x, q, y) = (self.x[i][v], self.q[i][v], self.y[i][v]);
                if !(x <= q && q <= y) {
                    a3.push(OrderViolation { player: i, node: v, x: f(x), q: f(q), y: f(y) });
                }
            }
            if self.tree.depth(v) >= self.tree.horizon() {
                continue;
            }
            for i in 0..n {
                if self.y[i][v] - self.q[i][v] <= strict_tol {
                    continue;
                }
                for j in 0..n {
                    if self.y[j][v] - self.x[j][v] <= strict_tol {
                        a4.push(InclusionViolation {
                            node: v,
                            player: i,
                            blocked_player: j,
                            q: f(self.q[i][v]),
                            y: f(self.y[i][v]),
                            blocked_x: f(self.x[j][v]),
                            blocked_y: f(self.y[j][v]),
                        });
                    }
                }
            }
        }
        AssumptionReport { passed: a3.is_empty() && a4.is_empty(), a3_violations: a3, a4_violations: a4 }
    }

    /// `Y^i` before the horizon, `Q^i` at the horizon.
    pub fn tilde_y(&self, i: usize) -> Result<AdaptedProcess<S>, GameError> {
        self.check_player(i)?;
        Ok(AdaptedProcess::from_fn(&self.tree, |v| self.tilde_y_at(i, v)))
    }

    fn tilde_y_at(&self, i: usize, v: usize) -> S {
        if self.tree.depth(v) < self.tree.horizon() {
            self.y[i][v]
        } else {
            self.q[i][v]
        }
    }

    /// Obstacle of player `i` against the freeze time `theta`:
    /// `X^i` strictly before `theta`, then `tilde_y` frozen at the `theta` stop node.
    pub fn build_u(&self, i: usize, theta: &StoppingTime) -> Result<AdaptedProcess<S>, GameError> {
        self.check_player(i)?;
        let anchor = self.tree.stop_anchor(theta)?;
        Ok(AdaptedProcess::from_fn(&self.tree, |v| match anchor[v] {
            None => self.x[i][v],
            Some(a) => self.tilde_y_at(i, a),
        }))
    }

    /// Process `H` with `J_i(..., tau, ...) = E[H_tau]` for any `tau` of player `i`.
    ///
    /// `others` holds the stopping times of the remaining `N - 1` players.
    pub fn best_response_process(
        &self,
        i: usize,
        others: &[StoppingTime],
    ) -> Result<AdaptedProcess<S>, GameError> {
        self.check_player(i)?;
        if others.len() + 1 != self.n_players() {
            return Err(GameError::ProfileLength { expected: self.n_players() - 1, got: others.len() });
        }
        let r = self.tree.min_all(others)?;
        let anchor = self.tree.stop_anchor(&r)?;
        Ok(AdaptedProcess::from_fn(&self.tree, |v| match anchor[v] {
            None => self.x[i][v],
            Some(a) if a == v => self.q[i][v],
            Some(a) => self.y[i][a],
        }))
    }

    /// `J_i(T_1, ..., T_N)`, evaluated leaf by leaf.
    pub fn payoff(&self, i: usize, profile: &[StoppingTime]) -> Result<S, GameError> {
        self.check_player(i)?;
        self.check_profile(profile)?;
        let own = self.tree.leaf_stop_nodes(&profile[i])?;
        let r = self.tree.min_all(others(profile, i))?;
        let preempt = self.tree.leaf_stop_nodes(&r)?;
        let tree = &self.tree;
        Ok(tree
            .leaves()
            .iter()
            .zip(own.iter().zip(&preempt))
            .map(|(&leaf, (&t, &r))| {
                let value = match tree.depth(t).cmp(&tree.depth(r)) {
                    std::cmp::Ordering::Less => self.x[i][t],
                    std::cmp::Ordering::Equal => self.q[i][t],
                    std::cmp::Ordering::Greater => self.y[i][r],
                };
                tree.node_prob(leaf) * value
            })
            .sum())
    }

    /// Payoffs of every player under `profile`.
    pub fn payoffs(&self, profile: &[StoppingTime]) -> Result<Vec<S>, GameError> {
        (0..self.n_players()).map(|i| self.payoff(i, profile)).collect()
    }
}

/// The stopping times of every player except `i`.
pub fn others(profile: &[StoppingTime], i: usize) -> impl Iterator<Item = &StoppingTime> {
    profile.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, t)| t)
}

/// `profile` with player `i`'s entry replaced by `tau`.
pub fn with_player(profile: &[StoppingTime], i: usize, tau: &StoppingTime) -> Vec<StoppingTime> {
    let mut out = profile.to_vec();
    out[i] = tau.clone();
    out
}

fn f<S: Scalar>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Node where `X <= Q <= Y` fails for one player.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderViolation {
    #[serde(serialize_with = "one_based")]
    pub player: usize,
    pub node: usize,
    pub x: f64,
    pub q: f64,
    pub y: f64,
}

/// Node before the horizon where `player` has `Q < Y` but `blocked_player` has `X = Y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionViolation {
    pub node: usize,
    #[serde(serialize_with = "one_based")]
    pub player: usize,
    #[serde(serialize_with = "one_based")]
    pub blocked_player: usize,
    pub q: f64,
    pub y: f64,
    pub blocked_x: f64,
    pub blocked_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub passed: bool,
    pub a3_violations: Vec<OrderViolation>,
    pub a4_violations: Vec<InclusionViolation>,
}

/// Player indices are 0-based in memory and 1-based in every serialized document.
fn one_based<Ser: serde::Serializer>(player: &usize, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    s.serialize_u64(*player as u64 + 1)
}
