use std::fmt;

use thiserror::Error;

use crate::numeric::pchip::TableError;
use crate::numeric::quad::QuadError;
use crate::numeric::roots::RootError;

/// Last valid integrator state, attached to solver failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LastState {
    pub r: f64,
    pub y: f64,
    pub m: f64,
}

impl fmt::Display for LastState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r = {:e}, y = {:e}, m = {:e}", self.r, self.y, self.m)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("invalid table: {0}")]
    Table(#[from] TableError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("zeta bracket not found for sigma = {sigma:e} after {expansions} expansions (interpolating function not monotone?)")]
    ZetaBracket { sigma: f64, expansions: usize },
    #[error("trivial state: g(y0) = 0, the central value produces no matter")]
    TrivialState,
    #[error("step size underflow at {0}")]
    StepUnderflow(LastState),
    #[error("non-finite state after {0}")]
    NonFinite(LastState),
    #[error("could not bracket the support boundary after {0}")]
    EventBracketing(LastState),
    #[error("step limit reached at {0}")]
    TooManySteps(LastState),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("cutoff convention violation: {0}")]
    Convention(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
