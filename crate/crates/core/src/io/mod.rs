//! File formats, instance generators and run reports.

pub mod format;
pub mod gen;
pub mod report;

pub use format::{
    digest, game_to_string, load_game, load_profile, parse_game, save_game, save_profile, write_atomic,
    FormatError, GameFile, ProfileFile,
};
pub use gen::{demo_constant, gen_game, gen_process, gen_tree, GenMode, GenParams};
pub use report::{certify, solve, trace_table, Certification, RunReport, Solution, SolveOptions};
