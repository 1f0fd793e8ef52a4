use thiserror::Error;

use crate::net_model::{Link, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown UE id {0}")]
    UnknownUe(usize),
    #[error("UE {ue} has no link {link}")]
    UnknownLink { ue: usize, link: Link },
    #[error("missing gain entry for UE {ue} -> PoA {poa} on channel {channel}")]
    MissingGain { ue: usize, poa: usize, channel: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("I - M is numerically singular")]
    Singular,
    #[error("iteration matrix is not contractive (spectral radius {0})")]
    NotContractive(f64),
    #[error("eigenvalue routine did not converge")]
    EigenNoConvergence,
    #[error("channel assignment infeasible: {0}")]
    InfeasibleChannels(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("policy produced infeasible powers for UE {ue}: p1={p1}, p2={p2}, p_max={p_max}")]
    Infeasible { ue: usize, p1: f64, p2: f64, p_max: f64 },
    #[error("scenario has {} validation violation(s)", .0.len())]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
