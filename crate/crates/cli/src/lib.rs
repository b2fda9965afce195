//! `dynkin` command-line interface.
//!
//! Exit codes: 0 success, 1 parse or usage error, 2 invalid game (structure
//! or payoff assumptions), 3 no convergence, 4 certification failure,
//! 5 enumeration cap exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use dynkin_core::io::{
    self, certify, digest, solve, trace_table, write_atomic, FormatError, GenMode, GenParams, RunReport,
    SolveOptions,
};
use dynkin_core::scheme::EquilibriumCandidate;
use dynkin_core::tree::DEFAULT_ENUMERATION_CAP;
use dynkin_core::verify::{best_response, brute_force_best_response, default_tie_tol, DEFAULT_NASH_TOL};
use dynkin_core::{Game, GameError, TreeError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_CERTIFICATION: i32 = 4;
pub const EXIT_CAP: i32 = 5;

/// Largest disagreement tolerated between the oracle and the backward-induction best response.
const ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "dynkin", version, about = "Solve and certify N-player nonzero-sum Dynkin games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the payoff ordering and inclusion assumptions.
    Validate {
        game: PathBuf,
        /// Slack for the strict inequalities of the inclusion assumption.
        #[arg(long, default_value_t = 0.0)]
        strict_tol: f64,
    },
    /// Run the scheme, audit every step and certify the limit profile.
    Solve {
        game: PathBuf,
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_NASH_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0.0)]
        strict_tol: f64,
        /// Write the run report (JSON) here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the per-step trace table (CSV) here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// EXPERIMENTAL: start from this profile instead of the horizon.
        /// Not covered by the convergence theory.
        #[arg(long)]
        init_profile: Option<PathBuf>,
    },
    /// Certify an arbitrary profile.
    Verify {
        game: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NASH_TOL)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Brute-force best response of one player against a profile.
    Oracle {
        game: PathBuf,
        /// 1-based player index.
        #[arg(long)]
        player: usize,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Generate a random game satisfying the assumptions.
    Gen {
        #[arg(long)]
        players: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        branching: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Strict)]
        mode: Mode,
        #[arg(long, default_value_t = io::gen::DEFAULT_GAP)]
        gap: f64,
        #[arg(long, default_value_t = io::gen::DEFAULT_TOUCHING_FRACTION)]
        touching_fraction: f64,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write the constant game X = 1/2, Q = Y = 1.
    Demo {
        #[arg(long)]
        players: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        branching: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Touching,
}

/// A failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = if e.is_parse() { EXIT_PARSE } else { EXIT_VALIDATION };
        Failure::new(code, e.to_string())
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Tree(TreeError::EnumerationCap { .. }) => Failure::new(EXIT_CAP, e.to_string()),
            _ => Failure::new(EXIT_VALIDATION, e.to_string()),
        }
    }
}

/// Runs the CLI on `argv` (including the program name), writing to `out` and `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Validate { game, strict_tol } => {
            let (game, _) = load(&game)?;
            let report = game.validate(strict_tol);
            emit(out, &serde_json::to_string_pretty(&report).expect("serializes"))?;
            Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::Solve { game, max_rounds, tol, strict_tol, report, trace, init_profile } => {
            let (g, input_digest) = load(&game)?;
            let assumptions = g.validate(strict_tol);
            if !assumptions.passed {
                emit(out, &serde_json::to_string_pretty(&assumptions).expect("serializes"))?;
                return Err(Failure::new(EXIT_VALIDATION, "game violates the payoff assumptions"));
            }
            let init_profile = match init_profile {
                Some(p) => Some(io::load_profile(&p, &g)?),
                None => None,
            };
            let opts = SolveOptions { max_rounds, tol, strict_tol, init_profile };
            let sol = solve(&g, &opts).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
            let mut rep = RunReport::from_solution(&g, input_digest, &sol);
            if let Some(path) = &trace {
                write_atomic(path, trace_table(&g, &sol.state).as_bytes())?;
                rep.trace = Some(path.display().to_string());
            }
            let json = rep.to_json();
            match &report {
                Some(path) => write_atomic(path, json.as_bytes())?,
                None => emit(out, &json)?,
            }
            let payoffs: Vec<String> = sol.certification.payoffs.iter().map(|p| p.to_string()).collect();
            emit(
                out,
                &format!(
                    "converged: {} after {} round(s); payoffs: [{}]; nash: {}; streamline: {}; residuals: {}; audit violations: {}",
                    sol.candidate.converged,
                    sol.candidate.rounds_used,
                    payoffs.join(", "),
                    rep.is_nash,
                    rep.streamline_ok,
                    rep.residuals_ok,
                    sol.audit.len()
                ),
            )?;
            if !sol.candidate.converged {
                return Err(Failure::new(
                    EXIT_NON_CONVERGENCE,
                    format!("no fixed point within {} rounds", sol.max_rounds),
                ));
            }
            if !sol.certified() {
                return Err(Failure::new(EXIT_CERTIFICATION, "certification failed"));
            }
            Ok(EXIT_OK)
        }
        Command::Verify { game, profile, tol, report } => {
            let (g, input_digest) = load(&game)?;
            let profile = io::load_profile(&profile, &g)?;
            let candidate = EquilibriumCandidate::from_profile(g.tree(), profile, 0, false)
                .map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
            let cert = certify(&g, &candidate, tol)?;
            let rep = RunReport::from_certification(&g, input_digest, g.validate(0.0), &cert);
            let json = rep.to_json();
            match &report {
                Some(path) => write_atomic(path, json.as_bytes())?,
                None => emit(out, &json)?,
            }
            if !cert.nash.is_nash {
                let worst = rep
                    .players
                    .iter()
                    .max_by(|a, b| a.gap.total_cmp(&b.gap))
                    .expect("at least two players");
                return Err(Failure::new(
                    EXIT_CERTIFICATION,
                    format!(
                        "not a Nash equilibrium: player {} gains {} by deviating (tol {})",
                        worst.player, worst.gap, tol
                    ),
                ));
            }
            Ok(EXIT_OK)
        }
        Command::Oracle { game, player, profile, cap } => {
            let (g, _) = load(&game)?;
            if player == 0 || player > g.n_players() {
                return Err(Failure::new(
                    EXIT_PARSE,
                    format!("--player must be in 1..={}", g.n_players()),
                ));
            }
            let i = player - 1;
            let profile = io::load_profile(&profile, &g)?;
            let others: Vec<_> = dynkin_core::game::others(&profile, i).cloned().collect();
            let bf = brute_force_best_response(&g, i, &others, cap, default_tie_tol())?;
            let br = best_response(&g, i, &others)?;
            let value = serde_json::json!({
                "player": player,
                "stopping_times": g.tree().count_stopping_times().to_string(),
                "brute_force_value": bf.value,
                "brute_force_argmax": bf.argmax.nodes().collect::<Vec<_>>(),
                "backward_induction_value": br.value,
                "backward_induction_argmax": br.argmax.nodes().collect::<Vec<_>>(),
            });
            emit(out, &serde_json::to_string_pretty(&value).expect("serializes"))?;
            if (bf.value - br.value).abs() > ORACLE_TOL || bf.argmax != br.argmax {
                return Err(Failure::new(EXIT_CERTIFICATION, "oracle and backward induction disagree"));
            }
            Ok(EXIT_OK)
        }
        Command::Gen { players, depth, branching, seed, mode, gap, touching_fraction, out: path } => {
            let mode = match mode {
                Mode::Strict => GenMode::Strict,
                Mode::Touching => GenMode::Touching,
            };
            if gap.is_nan() || gap <= 0.0 || !(0.0..=1.0).contains(&touching_fraction) {
                return Err(Failure::new(EXIT_PARSE, "--gap must be positive and --touching-fraction in [0, 1]"));
            }
            let params = GenParams { players, depth, branching, seed, mode, gap, touching_fraction };
            let g = io::gen_game(&params).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
            write_game(&g, path.as_deref(), out)
        }
        Command::Demo { players, depth, branching, out: path } => {
            let g = io::demo_constant(players, depth, branching)
                .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
            write_game(&g, path.as_deref(), out)
        }
    }
}

fn load(path: &Path) -> Result<(Game, String), Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let game = io::parse_game(&text).map_err(|e| {
        let f = Failure::from(e);
        Failure::new(f.code, format!("{}: {}", path.display(), f.message))
    })?;
    Ok((game, digest(text.as_bytes())))
}

fn write_game(game: &Game, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = io::game_to_string(game);
    match path {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => emit(out, text.trim_end())?,
    }
    Ok(EXIT_OK)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure::new(EXIT_PARSE, format!("write failed: {e}")))
}
