//! Axisymmetric no-swirl (-1)-homogeneous Navier-Stokes solutions through the
//! reduced Riccati-type equation
//!
//! ```text
//! (1 - x^2) U' + 2x U + U^2 / 2 = P_c(x),   x = cos(theta) in (-1, 1),
//! P_c(x) = c1 (1 - x) + c2 (1 + x) + c3 (1 - x^2).
//! ```
//!
//! [`params`] holds the parameter geometry, [`series`] the analytic pole
//! expansions, [`solver`] the global curves, [`fields`] the physical fields
//! and [`verify`] the numerical property checks.

// `!(a <= b)` is used deliberately so that NaN fails the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fields;
pub mod grid;
pub mod integrator;
pub mod params;
pub mod series;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{landau, reconstruct, sample_grid, FieldSample};
pub use params::{
    c3_bar, classify, classify_with, p_c, tau_constants, Admissible, BoundaryPosition, Degeneracy,
    EndpointConstants, Extremality, Params, SolutionIndex, Stratum, Tolerances,
};
pub use series::{expand_north, expand_south, Pole, SeriesExpansion};
pub use solver::{
    endpoint_match, endpoint_value, escape_cap, exists, exists_with, explore, extremal,
    extremal_with, gamma_minus, gamma_minus_with, gamma_plus, gamma_plus_with, solve_ivp,
    solve_ivp_with, EndpointMatch, ExistenceReport, ExistenceStatus, Exploration, PoleOutcome,
    ReducedEquation, Root, Sign, SolutionCurve, SolverOptions,
};
pub use verify::{CheckKind, CheckResult, Report, SampleSet, Witness};
