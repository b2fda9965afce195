//! Independent certification of candidate equilibria.
//!
//! Three checks that do not trust the scheme: every player's best response
//! against the others (by backward induction, and by brute force on small
//! trees), the sufficient martingale conditions with an explicit witness
//! envelope per player, and the tie residual `E[(Y^i - Q^i) 1{T_i* = R_i* < M}]`.

use std::cmp::Ordering;

use crate::game::{with_player, GameError, GameSpec};
use crate::scalar::Scalar;
use crate::scheme::EquilibriumCandidate;
use crate::snell::{is_martingale_before, is_supermartingale_before, snell_envelope, DEFAULT_HIT_TOL};
use crate::tree::{AdaptedProcess, ScenarioTree, StoppingTime};

/// Largest best-response gain a certified equilibrium may leave on the table.
pub const DEFAULT_NASH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<S> {
    pub value: S,
    pub argmax: StoppingTime,
}

/// Best response of player `i` against `others` via the Snell envelope of
/// the best-response process.
pub fn best_response<S: Scalar>(
    spec: &GameSpec<S>,
    i: usize,
    others: &[StoppingTime],
) -> Result<BestResponse<S>, GameError> {
    let h = spec.best_response_process(i, others)?;
    let snell = snell_envelope(spec.tree(), &h)?;
    Ok(BestResponse { value: snell.root_value, argmax: snell.first_hit })
}

/// Best response of player `i` by evaluating the payoff of every stopping time.
///
/// Among stopping times whose payoff is within `tie_tol` of the maximum, the
/// one with the smallest expected stopping depth is returned; this is the
/// pointwise smallest maximizer whenever one exists.
pub fn brute_force_best_response<S: Scalar>(
    spec: &GameSpec<S>,
    i: usize,
    others: &[StoppingTime],
    cap: usize,
    tie_tol: S,
) -> Result<BestResponse<S>, GameError> {
    spec.check_player(i)?;
    if others.len() + 1 != spec.n_players() {
        return Err(GameError::ProfileLength { expected: spec.n_players() - 1, got: others.len() });
    }
    let tree = spec.tree();
    let candidates = tree.enumerate_stopping_times(cap)?;
    let mut profile: Vec<StoppingTime> = others.to_vec();
    profile.insert(i, tree.horizon_time());

    let mut scored = Vec::with_capacity(candidates.len());
    for tau in candidates {
        let value = spec.payoff(i, &with_player(&profile, i, &tau))?;
        scored.push((value, tau));
    }
    let best = scored.iter().map(|(v, _)| *v).fold(S::neg_infinity(), S::max);
    let (value, argmax) = scored
        .into_iter()
        .filter(|(v, _)| *v >= best - tie_tol)
        .map(|(v, tau)| {
            let depths = tree.leaf_depths(&tau).expect("enumerated on this tree");
            let mean: S = tree
                .leaves()
                .iter()
                .zip(&depths)
                .map(|(&l, &d)| tree.node_prob(l) * S::lit(d as f64))
                .sum();
            (mean, depths, v, tau)
        })
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then_with(|| a.1.cmp(&b.1)))
        .map(|(_, _, v, tau)| (v, tau))
        .expect("a tree has at least one stopping time");
    Ok(BestResponse { value, argmax })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerNash<S> {
    pub equilibrium_payoff: S,
    pub best_response_value: S,
    /// `best_response_value - equilibrium_payoff`.
    pub gap: S,
    pub best_response_time: StoppingTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashCertificate<S> {
    pub players: Vec<PlayerNash<S>>,
    pub is_nash: bool,
    pub tol: S,
}

impl<S: Scalar> NashCertificate<S> {
    pub fn max_gap(&self) -> S {
        self.players.iter().map(|p| p.gap).fold(S::neg_infinity(), S::max)
    }
}

/// Certifies `profile` as a Nash equilibrium: no player can gain more than `tol`
/// by deviating alone.
pub fn verify_nash<S: Scalar>(
    spec: &GameSpec<S>,
    profile: &[StoppingTime],
    tol: S,
) -> Result<NashCertificate<S>, GameError> {
    spec.check_profile(profile)?;
    let mut players = Vec::with_capacity(profile.len());
    for i in 0..profile.len() {
        let equilibrium_payoff = spec.payoff(i, profile)?;
        let others: Vec<StoppingTime> = crate::game::others(profile, i).cloned().collect();
        let br = best_response(spec, i, &others)?;
        players.push(PlayerNash {
            equilibrium_payoff,
            best_response_value: br.value,
            gap: br.value - equilibrium_payoff,
            best_response_time: br.argmax,
        });
    }
    let is_nash = players.iter().all(|p| p.gap <= tol);
    Ok(NashCertificate { players, is_nash, tol })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerStreamline<S> {
    /// Witness stopped at `R*` is a martingale.
    pub martingale_ok: bool,
    /// Witness stopped at `R_i*` is a supermartingale.
    pub supermartingale_ok: bool,
    /// Witness dominates `X^i` strictly before `R_i*`.
    pub dominance_ok: bool,
    /// Witness equals `X^i` where `T_i*` stops strictly before `R_i*`.
    pub hit_equality_ok: bool,
    /// Witness equals `Y^i` (before the horizon) or `Q^i` (at it) where `R_i*` stops.
    pub boundary_ok: bool,
    /// `Y^i = Q^i` where `T_i*` and `R_i*` stop together before the horizon.
    pub residual_ok: bool,
    pub witness: AdaptedProcess<S>,
}

impl<S> PlayerStreamline<S> {
    pub fn all_ok(&self) -> bool {
        self.martingale_ok
            && self.supermartingale_ok
            && self.dominance_ok
            && self.hit_equality_ok
            && self.boundary_ok
            && self.residual_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamlineCertificate<S> {
    pub players: Vec<PlayerStreamline<S>>,
    pub tol: S,
}

impl<S> StreamlineCertificate<S> {
    pub fn all_ok(&self) -> bool {
        self.players.iter().all(PlayerStreamline::all_ok)
    }
}

/// Builds the witness `W^i = Snell(X^i 1{t < R_i*} + tilde_Y^i_{R_i*} 1{t >= R_i*})`
/// for each player and checks the sufficient equilibrium conditions nodewise.
pub fn verify_streamline<S: Scalar>(
    spec: &GameSpec<S>,
    candidate: &EquilibriumCandidate,
    tol: S,
) -> Result<StreamlineCertificate<S>, GameError> {
    spec.check_profile(&candidate.t_star)?;
    let tree = spec.tree();
    let horizon = tree.horizon();
    let mut players = Vec::with_capacity(spec.n_players());
    for i in 0..spec.n_players() {
        let r_i = &candidate.r_star_i[i];
        let t_i = &candidate.t_star[i];
        let witness = snell_envelope(tree, &spec.build_u(i, r_i)?)?.envelope;
        let before_r_i = tree.stop_anchor(r_i)?;
        let x = spec.x(i);

        let martingale_ok = is_martingale_before(tree, &witness, &candidate.r_star, tol)?;
        let supermartingale_ok = is_supermartingale_before(tree, &witness, r_i, tol)?;
        let strictly_before = |v: usize| before_r_i[v].is_none();
        let dominance_ok = (0..tree.len()).filter(|&v| strictly_before(v)).all(|v| witness[v] >= x[v] - tol);
        let hit_equality_ok =
            t_i.nodes().filter(|&v| strictly_before(v)).all(|v| (witness[v] - x[v]).abs() <= tol);
        let boundary_ok = r_i.nodes().all(|v| {
            let target = if tree.depth(v) < horizon { spec.y(i)[v] } else { spec.q(i)[v] };
            (witness[v] - target).abs() <= tol
        });
        let residual_ok = r_i
            .nodes()
            .filter(|&v| t_i.contains(v) && tree.depth(v) < horizon)
            .all(|v| (spec.y(i)[v] - spec.q(i)[v]).abs() <= tol);
        players.push(PlayerStreamline {
            martingale_ok,
            supermartingale_ok,
            dominance_ok,
            hit_equality_ok,
            boundary_ok,
            residual_ok,
            witness,
        });
    }
    Ok(StreamlineCertificate { players, tol })
}

/// `E[(Y^i - Q^i)_{T_i*} 1{T_i* = R_i* < M}]` for every player.
pub fn residual_yq<S: Scalar>(
    spec: &GameSpec<S>,
    candidate: &EquilibriumCandidate,
) -> Result<Vec<S>, GameError> {
    spec.check_profile(&candidate.t_star)?;
    let tree = spec.tree();
    (0..spec.n_players())
        .map(|i| {
            let own = tree.leaf_stop_nodes(&candidate.t_star[i])?;
            let pre = tree.leaf_stop_nodes(&candidate.r_star_i[i])?;
            Ok(tree
                .leaves()
                .iter()
                .zip(own.iter().zip(&pre))
                .filter(|(_, (&t, &r))| t == r && tree.depth(t) < tree.horizon())
                .map(|(&leaf, (&t, _))| tree.node_prob(leaf) * (spec.y(i)[t] - spec.q(i)[t]))
                .sum())
        })
        .collect()
}

/// Tie tolerance used by the brute-force oracle, matched to the Snell hit tolerance.
pub fn default_tie_tol<S: Scalar>() -> S {
    S::lit(DEFAULT_HIT_TOL)
}

/// Same-depth stopping time at every node of depth `t` on `tree`; convenience for
/// certifying constant profiles.
pub fn constant_profile<S: Scalar>(tree: &ScenarioTree<S>, n_players: usize, t: usize) -> Vec<StoppingTime> {
    vec![tree.constant_time(t); n_players]
}
