//! End-to-end solve, run reports and trace tables.

use serde::Serialize;

use crate::game::{AssumptionReport, GameError};
use crate::scheme::{
    audit_iteration, default_max_rounds, run_from, AuditViolation, EquilibriumCandidate, SchemeError,
    SchemeState,
};
use crate::tree::StoppingTime;
use crate::verify::{
    residual_yq, verify_nash, verify_streamline, NashCertificate, StreamlineCertificate, DEFAULT_NASH_TOL,
};
use crate::Game;

/// Largest tie residual accepted when certifying a solution.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Defaults to [`default_max_rounds`].
    pub max_rounds: Option<usize>,
    pub tol: f64,
    pub strict_tol: f64,
    /// Experimental start profile; `None` starts every player at the horizon.
    pub init_profile: Option<Vec<StoppingTime>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_rounds: None, tol: DEFAULT_NASH_TOL, strict_tol: 0.0, init_profile: None }
    }
}

/// A profile with all of its certificates.
#[derive(Debug, Clone)]
pub struct Certification {
    pub profile: Vec<StoppingTime>,
    pub payoffs: Vec<f64>,
    pub nash: NashCertificate<f64>,
    pub streamline: StreamlineCertificate<f64>,
    pub residuals: Vec<f64>,
}

impl Certification {
    pub fn residuals_ok(&self) -> bool {
        self.residuals.iter().all(|r| r.abs() <= RESIDUAL_TOL)
    }

    pub fn all_ok(&self) -> bool {
        self.nash.is_nash && self.streamline.all_ok() && self.residuals_ok()
    }
}

/// Certifies an arbitrary profile.
pub fn certify(game: &Game, candidate: &EquilibriumCandidate, tol: f64) -> Result<Certification, GameError> {
    Ok(Certification {
        profile: candidate.t_star.clone(),
        payoffs: game.payoffs(&candidate.t_star)?,
        nash: verify_nash(game, &candidate.t_star, tol)?,
        streamline: verify_streamline(game, candidate, tol)?,
        residuals: residual_yq(game, candidate)?,
    })
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub assumptions: AssumptionReport,
    pub max_rounds: usize,
    pub candidate: EquilibriumCandidate,
    pub state: SchemeState<f64>,
    pub audit: Vec<AuditViolation>,
    pub certification: Certification,
}

impl Solution {
    /// Converged, every iteration audit clean, and every certificate passed.
    pub fn certified(&self) -> bool {
        self.candidate.converged && self.audit.is_empty() && self.certification.all_ok()
    }
}

/// Runs the scheme, audits every step and certifies the limit profile.
///
/// Assumption checks are reported, not enforced; callers decide whether to proceed.
pub fn solve(game: &Game, opts: &SolveOptions) -> Result<Solution, SchemeError> {
    let assumptions = game.validate(opts.strict_tol);
    let max_rounds = opts.max_rounds.unwrap_or_else(|| default_max_rounds(game));
    let start = match &opts.init_profile {
        Some(p) => SchemeState::init_from_profile(game, p.clone())?,
        None => SchemeState::init(game),
    };
    let (candidate, state) = run_from(game, start, max_rounds)?;
    let audit = audit_iteration(game.tree(), &state)?;
    let certification = certify(game, &candidate, opts.tol)?;
    Ok(Solution { assumptions, max_rounds, candidate, state, audit, certification })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamlineFlags {
    pub martingale_ok: bool,
    pub supermartingale_ok: bool,
    pub dominance_ok: bool,
    pub hit_equality_ok: bool,
    pub boundary_ok: bool,
    pub residual_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerReport {
    /// 1-based.
    pub player: usize,
    pub stop_nodes: Vec<usize>,
    pub leaf_depths: Vec<usize>,
    pub payoff: f64,
    pub best_response_value: f64,
    pub gap: f64,
    pub best_response_nodes: Vec<usize>,
    pub streamline: StreamlineFlags,
    pub witness_root_value: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeSummary {
    pub converged: bool,
    pub rounds_used: usize,
    pub max_rounds: usize,
    pub steps: usize,
    pub audit_violations: Vec<String>,
}

/// Self-contained record of a solve or verify invocation.
///
/// The `profile` field has the shape of a profile file, so a report can be fed
/// back to `verify --profile`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub input_digest: String,
    pub assumptions: AssumptionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeSummary>,
    pub tol: f64,
    pub leaves: Vec<usize>,
    pub profile: Vec<Vec<usize>>,
    pub players: Vec<PlayerReport>,
    pub is_nash: bool,
    pub max_gap: f64,
    pub streamline_ok: bool,
    pub residuals_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

impl RunReport {
    pub fn from_certification(
        game: &Game,
        input_digest: String,
        assumptions: AssumptionReport,
        cert: &Certification,
    ) -> Self {
        let tree = game.tree();
        let players = (0..game.n_players())
            .map(|i| {
                let nash = &cert.nash.players[i];
                let sl = &cert.streamline.players[i];
                PlayerReport {
                    player: i + 1,
                    stop_nodes: cert.profile[i].nodes().collect(),
                    leaf_depths: tree.leaf_depths(&cert.profile[i]).expect("profile on game tree"),
                    payoff: cert.payoffs[i],
                    best_response_value: nash.best_response_value,
                    gap: nash.gap,
                    best_response_nodes: nash.best_response_time.nodes().collect(),
                    streamline: StreamlineFlags {
                        martingale_ok: sl.martingale_ok,
                        supermartingale_ok: sl.supermartingale_ok,
                        dominance_ok: sl.dominance_ok,
                        hit_equality_ok: sl.hit_equality_ok,
                        boundary_ok: sl.boundary_ok,
                        residual_ok: sl.residual_ok,
                    },
                    witness_root_value: sl.witness[0],
                    residual: cert.residuals[i],
                }
            })
            .collect();
        RunReport {
            input_digest,
            assumptions,
            scheme: None,
            tol: cert.nash.tol,
            leaves: tree.leaves().to_vec(),
            profile: cert.profile.iter().map(|t| t.nodes().collect()).collect(),
            players,
            is_nash: cert.nash.is_nash,
            max_gap: cert.nash.max_gap(),
            streamline_ok: cert.streamline.all_ok(),
            residuals_ok: cert.residuals_ok(),
            trace: None,
        }
    }

    pub fn from_solution(game: &Game, input_digest: String, sol: &Solution) -> Self {
        let mut report =
            Self::from_certification(game, input_digest, sol.assumptions.clone(), &sol.certification);
        report.scheme = Some(SchemeSummary {
            converged: sol.candidate.converged,
            rounds_used: sol.candidate.rounds_used,
            max_rounds: sol.max_rounds,
            steps: sol.state.trace().len(),
            audit_violations: sol.audit.iter().map(|v| format!("{v:?}")).collect(),
        });
        report
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Trace as comma-separated text: `n, player, E_W0`, then the stopping depth of
/// `theta`, `mu` and `tau` on every leaf (`theta_<leaf id>`, ...).
pub fn trace_table(game: &Game, state: &SchemeState<f64>) -> String {
    let tree = game.tree();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string(), "player".to_string(), "E_W0".to_string()];
    for prefix in ["theta", "mu", "tau"] {
        header.extend(tree.leaves().iter().map(|l| format!("{prefix}_{l}")));
    }
    w.write_record(&header).expect("in-memory write");
    for rec in state.trace() {
        let mut row = vec![rec.n.to_string(), (rec.player + 1).to_string(), rec.root_value.to_string()];
        for t in [&rec.theta, &rec.mu, &rec.tau] {
            row.extend(tree.leaf_depths(t).expect("trace on game tree").iter().map(|d| d.to_string()));
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
