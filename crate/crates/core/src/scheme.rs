//! Cyclic approximation scheme for an equilibrium profile.
//!
//! Every player starts at the horizon. Step `n = N q + i` updates player `i`:
//! the freeze time `theta_n` is the minimum of the other players' latest
//! iterates, `U^n` is player `i`'s obstacle frozen at `theta_n`, `W^n` its
//! Snell envelope and `mu_n` the first hit. The new iterate keeps
//! `mu_n ^ tau_{n-N}` on paths where that is strictly before `theta_n`, and
//! the previous iterate elsewhere. Iterates only move earlier, so a full
//! round with no change is a fixed point.

use thiserror::Error;

use crate::game::{GameError, GameSpec};
use crate::scalar::Scalar;
use crate::snell::snell_envelope;
use crate::tree::{AdaptedProcess, ScenarioTree, StoppingTime, TreeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("state at step {n} is not at a round boundary for {n_players} players")]
    Misaligned { n: usize, n_players: usize },
    #[error("max_rounds must be at least 1")]
    NoRounds,
}

impl From<TreeError> for SchemeError {
    fn from(e: TreeError) -> Self {
        SchemeError::Game(e.into())
    }
}

/// Everything computed at one step of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<S> {
    /// Flat step index `n = N q + i` (1-based, first update is `N + 1`).
    pub n: usize,
    /// Updated player, 0-based.
    pub player: usize,
    /// Every player's iterate just before this step.
    pub profile_before: Vec<StoppingTime>,
    pub theta: StoppingTime,
    pub obstacle: AdaptedProcess<S>,
    pub envelope: AdaptedProcess<S>,
    pub mu: StoppingTime,
    pub tau: StoppingTime,
    /// `E[W^n_0]`.
    pub root_value: S,
}

impl<S> StepRecord<S> {
    /// `tau_{n-N}`: the same player's iterate before this step.
    pub fn previous_tau(&self) -> &StoppingTime {
        &self.profile_before[self.player]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState<S> {
    n: usize,
    current: Vec<StoppingTime>,
    trace: Vec<StepRecord<S>>,
}

impl<S: Scalar> SchemeState<S> {
    /// All players at the horizon, `n = N`, empty trace.
    pub fn init(spec: &GameSpec<S>) -> Self {
        let n_players = spec.n_players();
        Self { n: n_players, current: vec![spec.tree().horizon_time(); n_players], trace: Vec::new() }
    }

    /// Starts from an arbitrary profile.
    ///
    /// Experimental: the convergence theory only covers the all-horizon start
    /// of [`SchemeState::init`].
    pub fn init_from_profile(spec: &GameSpec<S>, profile: Vec<StoppingTime>) -> Result<Self, GameError> {
        spec.check_profile(&profile)?;
        Ok(Self { n: spec.n_players(), current: profile, trace: Vec::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Latest iterate of every player.
    pub fn current(&self) -> &[StoppingTime] {
        &self.current
    }

    pub fn trace(&self) -> &[StepRecord<S>] {
        &self.trace
    }

    /// Performs step `n + 1` and returns its record.
    pub fn step(&mut self, spec: &GameSpec<S>) -> Result<&StepRecord<S>, GameError> {
        spec.check_profile(&self.current)?;
        let tree = spec.tree();
        let n_players = spec.n_players();
        let n = self.n + 1;
        let player = (n - 1) % n_players;

        let theta = tree.min_all(crate::game::others(&self.current, player))?;
        let obstacle = spec.build_u(player, &theta)?;
        let snell = snell_envelope(tree, &obstacle)?;
        let mu = snell.first_hit;
        let old = &self.current[player];

        let mu_nodes = tree.leaf_stop_nodes(&mu)?;
        let old_nodes = tree.leaf_stop_nodes(old)?;
        let theta_nodes = tree.leaf_stop_nodes(&theta)?;
        let chosen = mu_nodes.iter().zip(&old_nodes).zip(&theta_nodes).map(|((&m, &o), &t)| {
            let earlier = if tree.depth(m) <= tree.depth(o) { m } else { o };
            if tree.depth(earlier) < tree.depth(t) {
                earlier
            } else {
                o
            }
        });
        let tau = tree.canonicalize(chosen)?;

        let record = StepRecord {
            n,
            player,
            profile_before: self.current.clone(),
            theta,
            obstacle,
            envelope: snell.envelope,
            mu,
            tau: tau.clone(),
            root_value: snell.root_value,
        };
        self.current[player] = tau;
        self.n = n;
        self.trace.push(record);
        Ok(self.trace.last().expect("just pushed"))
    }
}

/// Limit profile of the scheme with the derived preemption times.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCandidate {
    /// `T_i*` for every player.
    pub t_star: Vec<StoppingTime>,
    /// `R_i* = min_{j != i} T_j*`.
    pub r_star_i: Vec<StoppingTime>,
    /// `R* = min_j T_j*`.
    pub r_star: StoppingTime,
    pub rounds_used: usize,
    pub converged: bool,
}

impl EquilibriumCandidate {
    /// Wraps an arbitrary profile so it can be certified.
    pub fn from_profile<S: Scalar>(
        tree: &ScenarioTree<S>,
        profile: Vec<StoppingTime>,
        rounds_used: usize,
        converged: bool,
    ) -> Result<Self, TreeError> {
        let r_star_i = (0..profile.len())
            .map(|i| tree.min_all(crate::game::others(&profile, i)))
            .collect::<Result<Vec<_>, _>>()?;
        let r_star = tree.min_all(&profile)?;
        Ok(Self { t_star: profile, r_star_i, r_star, rounds_used, converged })
    }
}

/// `N * #leaves * M + 2`: every round before the last lowers some player's
/// stopping depth on some leaf, and there are at most `N * #leaves * M` such moves.
pub fn default_max_rounds<S: Scalar>(spec: &GameSpec<S>) -> usize {
    let tree = spec.tree();
    spec.n_players() * tree.leaves().len() * tree.horizon() + 2
}

/// Runs full rounds from [`SchemeState::init`] until a round changes nothing.
pub fn run<S: Scalar>(
    spec: &GameSpec<S>,
    max_rounds: usize,
) -> Result<(EquilibriumCandidate, SchemeState<S>), SchemeError> {
    run_from(spec, SchemeState::init(spec), max_rounds)
}

/// Runs full rounds from `state` until a round changes nothing or `max_rounds` is spent.
pub fn run_from<S: Scalar>(
    spec: &GameSpec<S>,
    mut state: SchemeState<S>,
    max_rounds: usize,
) -> Result<(EquilibriumCandidate, SchemeState<S>), SchemeError> {
    let n_players = spec.n_players();
    if !state.n.is_multiple_of(n_players) {
        return Err(SchemeError::Misaligned { n: state.n, n_players });
    }
    if max_rounds == 0 {
        return Err(SchemeError::NoRounds);
    }
    let mut rounds_used = 0;
    let mut converged = false;
    while rounds_used < max_rounds {
        let before = state.current.clone();
        for _ in 0..n_players {
            state.step(spec)?;
        }
        rounds_used += 1;
        if state.current == before {
            converged = true;
            break;
        }
    }
    let candidate =
        EquilibriumCandidate::from_profile(spec.tree(), state.current.clone(), rounds_used, converged)?;
    Ok((candidate, state))
}

/// A relation between scheme iterates that failed at step `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditViolation {
    /// `mu_n <= theta_n` fails.
    MuAfterTheta { n: usize },
    /// `tau_n <= tau_{n-N}` fails.
    TauIncreased { n: usize },
    /// `mu_n = tau_n ^ theta_n` fails.
    MuNotMinimum { n: usize },
    /// `tau_n = mu_n 1{mu_n < theta_n} + tau_{n-N} 1{mu_n = theta_n}` fails on some path.
    UpdateForm { n: usize, leaf: usize },
    /// `W^n = U^n` fails at a node at or after `theta_n`.
    EnvelopeOffObstacle { n: usize, node: usize },
    /// `mu_{n+N} <= tau_n` fails.
    NextMuAfterTau { n: usize },
}

/// Checks every trace record against the relations the scheme guarantees.
pub fn audit_iteration<S: Scalar>(
    tree: &ScenarioTree<S>,
    state: &SchemeState<S>,
) -> Result<Vec<AuditViolation>, TreeError> {
    let mut out = Vec::new();
    let trace = state.trace();
    let n_players = state.current.len();
    for (k, rec) in trace.iter().enumerate() {
        let n = rec.n;
        if !tree.leq(&rec.mu, &rec.theta)? {
            out.push(AuditViolation::MuAfterTheta { n });
        }
        if !tree.leq(&rec.tau, rec.previous_tau())? {
            out.push(AuditViolation::TauIncreased { n });
        }
        if tree.min_stop(&rec.tau, &rec.theta)? != rec.mu {
            out.push(AuditViolation::MuNotMinimum { n });
        }
        let mu = tree.leaf_depths(&rec.mu)?;
        let theta = tree.leaf_depths(&rec.theta)?;
        let tau = tree.leaf_depths(&rec.tau)?;
        let prev = tree.leaf_depths(rec.previous_tau())?;
        for (idx, &leaf) in tree.leaves().iter().enumerate() {
            let expected = if mu[idx] < theta[idx] { mu[idx] } else { prev[idx] };
            if tau[idx] != expected {
                out.push(AuditViolation::UpdateForm { n, leaf });
                break;
            }
        }
        let anchor = tree.stop_anchor(&rec.theta)?;
        if let Some(node) =
            (0..tree.len()).find(|&v| anchor[v].is_some() && rec.envelope[v] != rec.obstacle[v])
        {
            out.push(AuditViolation::EnvelopeOffObstacle { n, node });
        }
        if let Some(next) = trace.get(k + n_players) {
            if !tree.leq(&next.mu, &rec.tau)? {
                out.push(AuditViolation::NextMuAfterTau { n });
            }
        }
    }
    Ok(out)
}

/// Step `n` and stopping time `deviation` at which the one-step deviation bound fails.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationBoundViolation {
    pub n: usize,
    pub player: usize,
    pub deviation: StoppingTime,
    pub deviation_payoff: f64,
    pub bound: f64,
}

/// Checks, for every trace record and every stopping time `theta` of the tree,
///
/// `J_i(others, theta) <= J_i(others, tau_n) + E[(Y^i - Q^i)_{tau_n} 1{tau_n = theta_n < M}]`
///
/// where `others` are the iterates the other players held at step `n`.
pub fn audit_deviation_bound<S: Scalar>(
    spec: &GameSpec<S>,
    state: &SchemeState<S>,
    enumeration_cap: usize,
    tol: S,
) -> Result<Vec<DeviationBoundViolation>, GameError> {
    let tree = spec.tree();
    let deviations = tree.enumerate_stopping_times(enumeration_cap)?;
    let mut out = Vec::new();
    for rec in state.trace() {
        let i = rec.player;
        let tau_nodes = tree.leaf_stop_nodes(&rec.tau)?;
        let theta_nodes = tree.leaf_stop_nodes(&rec.theta)?;
        let tie_term: S = tree
            .leaves()
            .iter()
            .zip(tau_nodes.iter().zip(&theta_nodes))
            .filter(|(_, (&t, &th))| tree.depth(t) == tree.depth(th) && tree.depth(t) < tree.horizon())
            .map(|(&leaf, (&t, _))| tree.node_prob(leaf) * (spec.y(i)[t] - spec.q(i)[t]))
            .sum();
        let own = spec.payoff(i, &crate::game::with_player(&rec.profile_before, i, &rec.tau))?;
        let bound = own + tie_term;
        for theta in &deviations {
            let dev = spec.payoff(i, &crate::game::with_player(&rec.profile_before, i, theta))?;
            if dev > bound + tol {
                out.push(DeviationBoundViolation {
                    n: rec.n,
                    player: i,
                    deviation: theta.clone(),
                    deviation_payoff: dev.to_f64().unwrap_or(f64::NAN),
                    bound: bound.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    Ok(out)
}
