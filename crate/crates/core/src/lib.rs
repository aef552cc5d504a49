//! Numerical laboratory for weakly nonlinear dispersive waves on periodic
//! boxes. The layers, bottom up:
//!
//! * spectral kit: grids, fields, Fourier multipliers, smooth frequency
//!   decompositions, norms (`grid`, `field`, `multiplier`, `bump`,
//!   `decomp`, `norms`);
//! * exact formal calculus on gauge monomials with rational coefficients,
//!   and the coefficient derivations built on it (`formal`, `functionals`,
//!   `derive`, `thresholds`);
//! * time integration: the oscillatory field equation, its slow normalized
//!   flows, and the change of variables between them (`params`, `wave`,
//!   `integrator`, `nlkg`, `normalized`, `transform`, `errmetrics`);
//! * one-shot dispersive diagnostics: stationary-phase decay fits and
//!   space-time bound probes (`polynomial`, `kernels`, `strichartz`);
//! * study drivers and serialization (`config`, `study`, `output`).

use thiserror::Error;

pub mod bump;
pub mod config;
pub mod decomp;
pub mod derive;
pub mod errmetrics;
pub mod field;
pub mod formal;
pub mod functionals;
pub mod grid;
pub mod kernels;
pub mod multiplier;
pub mod norms;
pub mod integrator;
pub mod nlkg;
pub mod normalized;
pub mod output;
pub mod params;
pub mod polynomial;
pub mod strichartz;
pub mod study;
pub mod thresholds;
pub mod transform;
pub mod wave;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("solver abort: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        LabError::Invalid(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }
    pub fn solver(msg: impl Into<String>) -> Self {
        LabError::Solver(msg.into())
    }
}
