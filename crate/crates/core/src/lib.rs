//! Nash equilibria of N-player nonzero-sum Dynkin games on finite scenario trees.
//!
//! Each player picks a stopping time. Whoever stops alone first collects `X`,
//! players stopping together collect `Q`, and the rest collect `Y` at the
//! moment they are preempted. [`scheme::run`] computes an equilibrium
//! profile by cyclic Snell-envelope updates; [`verify`] certifies any profile
//! independently of how it was produced.
//!
//! The numerics are generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the file formats use.

pub mod game;
pub mod io;
pub mod scalar;
pub mod scheme;
pub mod snell;
pub mod tree;
pub mod verify;

pub use game::{AssumptionReport, GameError, GameSpec};
pub use scalar::Scalar;
pub use scheme::{EquilibriumCandidate, SchemeError, SchemeState};
pub use snell::SnellResult;
pub use tree::{AdaptedProcess, ScenarioTree, StoppingTime, TreeError};

pub type Tree = ScenarioTree<f64>;
pub type Process = AdaptedProcess<f64>;
pub type Game = GameSpec<f64>;
pub type State = SchemeState<f64>;
