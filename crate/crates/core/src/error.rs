use thiserror::Error;

use crate::designer::{PlanKind, SearchBounds};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No plan satisfies both risk constraints inside the searched lattice.
    #[error("no feasible {kind} plan within bounds (g <= {}, c <= {}, i <= {})", bounds.g_max, bounds.c_max, bounds.i_max)]
    Infeasible { kind: PlanKind, bounds: SearchBounds },

    /// A computed probability left [0, 1] by more than roundoff.
    #[error("internal numerical error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
