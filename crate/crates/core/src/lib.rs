//! Quantum-metrology toolkit for two-qubit X states.
//!
//! The crate computes the interferometric power of a bipartite probe state
//! (the worst-case quantum Fisher information over local phase generators on
//! qubit A, divided by four), quantum discord via projective-measurement
//! minimization, and the time evolution of both quantities under five noise
//! models. Its main point of interest is the sudden-change behaviour: the
//! minimum in the interferometric power switches between closed-form branches
//! as the state evolves, producing kinks at predictable times.
//!
//! Modules mirror the pipeline: [`qmat`] (complex matrices and a Hermitian
//! eigensolver), [`states`] (the X-state parameterization), [`channels`]
//! (noise models as Kraus sets plus closed-form coefficient maps), [`ip`]
//! (interferometric power routes), [`discord`], [`dynamics`] (trajectories,
//! kink detection, analytic kink predictors), and [`cli`] (the command-line
//! front end, also driving the [`verify`] self-check suites).

pub mod channels;
pub mod cli;
pub mod discord;
pub mod dynamics;
mod exec;
pub mod ip;
pub mod qmat;
pub mod sampling;
pub mod states;
pub mod verify;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("eigensolver did not converge (off-diagonal norm {0:.3e} after {1} sweeps)")]
    NoConvergence(f64, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("matrix is not X-shaped (max forbidden entry {0:.3e})")]
    NotXShaped(f64),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("closed form is singular here: {0}")]
    ClosedFormSingular(String),
    #[error("Kraus set is not trace preserving (completeness defect {0:.3e})")]
    NotCptp(f64),
    #[error("quadrature failed to converge for {0}")]
    QuadratureFailure(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("closed-form and Kraus routes disagree ({0:.3e})")]
    RouteMismatch(f64),
    #[error("coefficients c1 = c2 give a constant interferometric power; no crossing to solve")]
    ConstantIp,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
