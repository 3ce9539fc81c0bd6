use thiserror::Error;

/// Errors produced by the simulator and the closed-form evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A user and an antenna occupy the same point. The caller must redraw
    /// the stochastic element that produced it; distances are never clamped.
    #[error("coincident user and antenna positions; resample")]
    Coincident,

    #[error("rank-zero channel")]
    RankZero,

    #[error("rank-deficient matrix: measured rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    /// Block diagonalization needs at least as many BS antennas as the
    /// users hold in total.
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("more users ({users}) than small cells ({cells})")]
    TooManyUsers { users: usize, cells: usize },

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("empty sweep")]
    EmptySweep,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
