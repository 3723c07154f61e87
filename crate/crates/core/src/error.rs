use thiserror::Error;

use crate::params::Stratum;
use crate::series::Pole;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("parameters (c1={c1}, c2={c2}, c3={c3}) are not in J")]
    NotInJ { c1: f64, c2: f64, c3: f64 },

    #[error("(c, gamma={gamma}) is not on the solution surface (stratum {stratum})")]
    NotInI { gamma: f64, stratum: Stratum },

    #[error("pole value {tau} is a degenerate branch for the series recurrence")]
    DegenerateBranch { tau: f64 },

    #[error("series coefficients diverge (growth estimate {growth} exceeds cap {cap})")]
    SeriesDivergence { growth: f64, cap: f64 },

    #[error("offset {offset} from the {pole} pole exceeds the series radius {radius}")]
    OutOfRadius {
        pole: Pole,
        offset: f64,
        radius: f64,
    },

    #[error("x = {x} is outside the computed domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("solution escaped at x = {x} with U = {value}")]
    Escape { x: f64, value: f64 },

    #[error("step size underflow at x = {x} (h = {h})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("integration exceeded {max_steps} steps before reaching x = {target}")]
    MaxSteps { max_steps: usize, target: f64 },

    #[error("ODE residual bound {bound:e} exceeds the cap {cap:e}")]
    Residual { bound: f64, cap: f64 },

    #[error("cannot match the {pole} endpoint: extrapolated value {extrapolated} is not near {tau_a} or {tau_b}")]
    AmbiguousEndpoint {
        pole: Pole,
        extrapolated: f64,
        tau_a: f64,
        tau_b: f64,
    },

    #[error("x = {x} is within {cutoff:e} of a pole")]
    PoleProximity { x: f64, cutoff: f64 },

    #[error("unclassifiable: {0}")]
    Unclassifiable(Box<Error>),

    #[error("sample is in stratum {found}, expected {expected}")]
    StratumMismatch { expected: Stratum, found: Stratum },

    #[error("precondition failed: {0}")]
    Precondition(String),
}
