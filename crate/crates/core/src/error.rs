use thiserror::Error;

use crate::network::{BranchId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The parent links contain a cycle; the listed branches never reach the root.
    #[error("topology error: branches {0:?} are part of a cycle")]
    Topology(Vec<BranchId>),

    #[error("invalid network: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    /// An argument outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("flux error: f({z}) = {value} is not a nonnegative number")]
    Flux { z: f64, value: f64 },

    #[error("branch {id}: {source}")]
    AtBranch {
        id: BranchId,
        #[source]
        source: Box<Error>,
    },

    #[error("level n = {n}: {source}")]
    AtLevel {
        n: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    /// Parameters violate the exponent conditions a bound or construction needs.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("precondition failed: level n = {n} is below the required n0 = {required}")]
    LevelTooCoarse { n: u32, required: u32 },

    #[error("duplicate path: maximal paths {0} and {1} have identical geometry")]
    DuplicatePath(usize, usize),

    #[error("positive-multiplicity violation: group {group} has multiplicity {value} at s = {s}")]
    ZeroMultiplicity { group: usize, s: f64, value: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_branch(id: BranchId, source: Error) -> Self {
        Error::AtBranch {
            id,
            source: Box::new(source),
        }
    }

    pub(crate) fn at_level(n: u32, source: Error) -> Self {
        Error::AtLevel {
            n,
            source: Box::new(source),
        }
    }

    /// Strips branch and level context and returns the innermost error.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::AtBranch { source, .. } | Error::AtLevel { source, .. } => source.root_cause(),
            e => e,
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
