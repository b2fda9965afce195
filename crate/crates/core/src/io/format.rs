//! JSON game and profile files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::game::GameError;
use crate::tree::{AdaptedProcess, NodeSpec, StoppingTime, TreeError};
use crate::{Game, Tree};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Syntax or schema error; the message carries line and column.
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid tree: {0}")]
    Structure(#[from] TreeError),
    #[error("invalid game: {0}")]
    Game(#[from] GameError),
    #[error("'players' is {declared} but {field} has {found} entries")]
    PlayerCount { declared: usize, field: &'static str, found: usize },
    #[error("profile has {found} entries, game has {expected} players")]
    ProfileLength { expected: usize, found: usize },
    #[error("profile entry for player {player}: {source}")]
    ProfileNode { player: usize, source: TreeError },
}

impl FormatError {
    /// True for failures of the document itself (unreadable, malformed JSON,
    /// missing fields) as opposed to well-formed documents describing an invalid game.
    pub fn is_parse(&self) -> bool {
        matches!(self, FormatError::Io { .. } | FormatError::Parse(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: usize,
    pub parent: Option<usize>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessTable {
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<f64>>,
}

/// On-disk game description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub horizon: usize,
    pub players: usize,
    pub nodes: Vec<NodeEntry>,
    pub processes: ProcessTable,
}

impl GameFile {
    pub fn from_game(game: &Game) -> Self {
        let tree = game.tree();
        let nodes = tree
            .node_specs()
            .into_iter()
            .map(|n| NodeEntry { id: n.id, parent: n.parent, p: n.cond_prob })
            .collect();
        let n = game.n_players();
        let table = |f: &dyn Fn(usize) -> Vec<f64>| (0..n).map(f).collect();
        GameFile {
            horizon: tree.horizon(),
            players: n,
            nodes,
            processes: ProcessTable {
                x: table(&|i| game.x(i).values().to_vec()),
                q: table(&|i| game.q(i).values().to_vec()),
                y: table(&|i| game.y(i).values().to_vec()),
            },
        }
    }

    /// Builds the game, enforcing structural invariants (but not the payoff assumptions).
    pub fn into_game(self) -> Result<Game, FormatError> {
        let specs: Vec<NodeSpec<f64>> = self
            .nodes
            .iter()
            .map(|n| NodeSpec { id: n.id, parent: n.parent, cond_prob: n.p })
            .collect();
        let tree = Tree::new(&specs, self.horizon)?;
        let procs = |field: &'static str, rows: Vec<Vec<f64>>| -> Result<Vec<AdaptedProcess<f64>>, FormatError> {
            if rows.len() != self.players {
                return Err(FormatError::PlayerCount { declared: self.players, field, found: rows.len() });
            }
            rows.into_iter().map(|r| AdaptedProcess::new(r).map_err(FormatError::from)).collect()
        };
        let x = procs("X", self.processes.x)?;
        let q = procs("Q", self.processes.q)?;
        let y = procs("Y", self.processes.y)?;
        Ok(Game::new(tree, x, q, y)?)
    }
}

pub fn parse_game(text: &str) -> Result<Game, FormatError> {
    serde_json::from_str::<GameFile>(text)?.into_game()
}

pub fn game_to_string(game: &Game) -> String {
    let mut s = serde_json::to_string_pretty(&GameFile::from_game(game)).expect("game file serializes");
    s.push('\n');
    s
}

pub fn load_game(path: &Path) -> Result<Game, FormatError> {
    parse_game(&read(path)?)
}

pub fn save_game(path: &Path, game: &Game) -> Result<(), FormatError> {
    write_atomic(path, game_to_string(game).as_bytes())
}

/// SHA-256 of the input bytes, hex encoded.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Stop nodes per player.
///
/// A run report carries a `profile` field in the same shape, so reports can be
/// passed wherever a profile file is expected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub profile: Vec<Vec<usize>>,
}

impl ProfileFile {
    pub fn from_profile(profile: &[StoppingTime]) -> Self {
        ProfileFile { profile: profile.iter().map(|t| t.nodes().collect()).collect() }
    }

    /// Canonicalizes every entry on `tree`.
    pub fn to_profile(&self, tree: &Tree, n_players: usize) -> Result<Vec<StoppingTime>, FormatError> {
        if self.profile.len() != n_players {
            return Err(FormatError::ProfileLength { expected: n_players, found: self.profile.len() });
        }
        self.profile
            .iter()
            .enumerate()
            .map(|(player, nodes)| {
                tree.canonicalize(nodes.iter().copied())
                    .map_err(|source| FormatError::ProfileNode { player: player + 1, source })
            })
            .collect()
    }
}

pub fn load_profile(path: &Path, game: &Game) -> Result<Vec<StoppingTime>, FormatError> {
    let file: ProfileFile = serde_json::from_str(&read(path)?)?;
    file.to_profile(game.tree(), game.n_players())
}

pub fn save_profile(path: &Path, profile: &[StoppingTime]) -> Result<(), FormatError> {
    let mut s = serde_json::to_string_pretty(&ProfileFile::from_profile(profile)).expect("profile serializes");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub(crate) fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io { path: path.to_path_buf(), source };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}
