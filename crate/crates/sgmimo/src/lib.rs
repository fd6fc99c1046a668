//! Monte-Carlo validation, scenario files and the command-line front end for
//! [`sgmimo_core`].

pub mod cli;
pub mod config;
pub mod report;
pub mod sim;

pub use sgmimo_core as core;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] sgmimo_core::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("simulation: {0}")]
    Sim(String),

    #[error("numerical diagnostics: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 for invalid input, 3 for numerical failures,
    /// 4 for infeasible design queries.
    pub fn exit_code(&self) -> i32 {
        use sgmimo_core::Error as E;
        match self {
            Error::Core(E::Infeasible(_) | E::AllInfeasible) => 4,
            Error::Core(E::NonConvergence(_) | E::NonFiniteIntegrand(_)) | Error::Numeric(_) | Error::Sim(_) => 3,
            Error::Io(_) | Error::Csv(_) => 1,
            _ => 2,
        }
    }
}
