//! Global solutions of `(1-x^2) U' + 2x U + U^2/2 = P_c(x)` on `(-1, 1)`.
//!
//! * Interior solutions (`gamma_minus < gamma < gamma_plus`) are integrated
//!   outward from `x = 0` and stopped at `|x| = 1 - pole_cutoff`.
//! * The extremal solutions `U+` / `U-` are built from the analytic pole
//!   expansions at `tau2(c1)` / `tau1'(c2)` and integrated inward, where they
//!   are attracting.
//! * On the boundary `c3 = c3_bar(c1, c2)` both extremal curves coincide with
//!   the linear profile `U* = (1 + sqrt(1+c1))(1-x) - (1 + sqrt(1+c2))(1+x)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{
    integrate, step_defect, DenseTrack, Run, ScalarOde, StepControl, Termination,
};
use crate::params::{
    classify_with, tau_constants, BoundaryPosition, Degeneracy, EndpointConstants, Extremality,
    Params, SolutionIndex, Stratum, Tolerances,
};
use crate::series::{expand_north, expand_south, Pole, SeriesExpansion};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tolerances: Tolerances,
    pub rtol: f64,
    pub atol: f64,
    /// Integration stops at offset `pole_cutoff` from each pole.
    pub pole_cutoff: f64,
    /// Relative tolerance for matching extrapolated pole values to `tau`.
    pub match_tol: f64,
    /// Multiplier in the escape cap `factor * (2 + sqrt(4 + 2 M))`.
    pub escape_factor: f64,
    pub max_steps: usize,
    pub h_max: f64,
    /// Step cap as a fraction of the distance to the nearer pole.
    pub edge_fraction: f64,
    /// Per-step target for the ODE residual of the dense output.
    pub defect_tol: f64,
    /// Largest accepted ODE residual of a returned curve.
    pub residual_cap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            rtol: 1e-11,
            atol: 1e-13,
            pole_cutoff: 1e-8,
            match_tol: 1e-4,
            escape_factor: 8.0,
            max_steps: 500_000,
            h_max: 0.05,
            edge_fraction: 0.25,
            defect_tol: 2.5e-10,
            residual_cap: 1e-9,
        }
    }
}

impl SolverOptions {
    fn step_control(&self, c: &Params) -> StepControl {
        StepControl {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            h_max: self.h_max,
            edge_fraction: self.edge_fraction,
            defect_tol: self.defect_tol,
            escape_cap: escape_cap(c, self.escape_factor),
        }
    }

    fn cutoff_x(&self, pole: Pole) -> f64 {
        pole.at_offset(self.pole_cutoff)
    }
}

/// Explicit over-estimate of the a-priori bound on `|U|` for all global
/// solutions with parameter `c`.
pub fn escape_cap(c: &Params, factor: f64) -> f64 {
    let m = (2.0 * c.c1).abs().max((2.0 * c.c2).abs()).max(c.p_sup());
    factor * (2.0 + (4.0 + 2.0 * m).sqrt())
}

/// The reduced equation as an explicit ODE `U' = F(x, U) / (1 - x^2)`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedEquation {
    pub params: Params,
}

impl ReducedEquation {
    pub fn new(params: Params) -> Self {
        Self { params }
    }

    #[inline]
    fn weight(x: f64) -> f64 {
        (1.0 - x) * (1.0 + x)
    }

    /// `1 - (x+dx)^2` from the distance to the nearer pole, which is exact
    /// for `|x| >= 1/2` before `dx` is added.
    #[inline]
    fn weight_at(x: f64, dx: f64) -> f64 {
        let s = if x < 0.0 {
            (1.0 + x) + dx
        } else {
            (1.0 - x) - dx
        };
        s * (2.0 - s)
    }

    /// `(1-x^2) U' + 2x U + U^2/2 - P_c(x)`.
    pub fn residual(&self, x: f64, u: f64, du: f64) -> f64 {
        Self::weight(x) * du + 2.0 * x * u + 0.5 * u * u - self.params.p(x)
    }

    /// `[U, U', U'', U''']` at `(x, U)` obtained by differentiating the
    /// equation:
    ///
    /// ```text
    /// (1-x^2) U''  = P' - 2U - U U'
    /// (1-x^2) U''' = P'' - 2U' - U'^2 - U U'' + 2x U''
    /// ```
    pub fn derivs(&self, x: f64, u: f64) -> [f64; 4] {
        let w = Self::weight(x);
        let d1 = self.rate(x, u);
        let d2 = self.second(x, u, d1);
        let d3 = (self.params.p_second() - 2.0 * d1 - d1 * d1 - u * d2 + 2.0 * x * d2) / w;
        [u, d1, d2, d3]
    }
}

impl ScalarOde for ReducedEquation {
    #[inline]
    fn rate(&self, x: f64, u: f64) -> f64 {
        (self.params.p(x) - 2.0 * x * u - 0.5 * u * u) / Self::weight(x)
    }

    #[inline]
    fn rate_at(&self, x: f64, dx: f64, u: f64) -> f64 {
        let y = x + dx;
        (self.params.p(y) - 2.0 * y * u - 0.5 * u * u) / Self::weight_at(x, dx)
    }

    #[inline]
    fn second(&self, x: f64, u: f64, du: f64) -> f64 {
        (self.params.p_prime(x) - 2.0 * u - u * du) / Self::weight(x)
    }

    fn defect_weight(&self, x: f64) -> f64 {
        Self::weight(x)
    }

    fn defect_weight_at(&self, x: f64, dx: f64) -> f64 {
        Self::weight_at(x, dx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// `U = a (1-x) + b (1+x)`.
    Linear { a: f64, b: f64 },
    Numeric {
        track: DenseTrack,
        series: Option<SeriesExpansion>,
    },
}

/// A computed solution `U^{c,gamma}` on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionCurve {
    index: SolutionIndex,
    repr: Repr,
    south_limit: f64,
    north_limit: f64,
    residual_bound: f64,
}

impl SolutionCurve {
    pub fn index(&self) -> &SolutionIndex {
        &self.index
    }

    pub fn params(&self) -> &Params {
        &self.index.params
    }

    /// `U(0)` as computed (equal to the requested `gamma` for interior curves).
    pub fn gamma(&self) -> f64 {
        self.eval(0.0).expect("x = 0 is always inside the domain")
    }

    pub fn south_limit(&self) -> f64 {
        self.south_limit
    }

    pub fn north_limit(&self) -> f64 {
        self.north_limit
    }

    pub fn limit(&self, pole: Pole) -> f64 {
        match pole {
            Pole::South => self.south_limit,
            Pole::North => self.north_limit,
        }
    }

    /// Largest ODE residual sampled inside every step (and on the series piece).
    pub fn residual_bound(&self) -> f64 {
        self.residual_bound
    }

    /// The pole expansion this curve was started from, if any.
    pub fn series(&self) -> Option<&SeriesExpansion> {
        match &self.repr {
            Repr::Numeric { series, .. } => series.as_ref(),
            Repr::Linear { .. } => None,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.repr, Repr::Linear { .. })
    }

    /// Interval on which [`SolutionCurve::eval`] is defined (besides `±1`).
    pub fn domain(&self) -> (f64, f64) {
        match &self.repr {
            Repr::Linear { .. } => (-1.0, 1.0),
            Repr::Numeric { track, series } => {
                let (mut lo, mut hi) = (track.lo(), track.hi());
                if let Some(s) = series {
                    match s.pole {
                        Pole::South => lo = -1.0,
                        Pole::North => hi = 1.0,
                    }
                }
                (lo, hi)
            }
        }
    }

    fn series_covers(series: &Option<SeriesExpansion>, x: f64) -> Option<&SeriesExpansion> {
        series
            .as_ref()
            .filter(|s| (0.0..=s.radius).contains(&s.pole.offset(x)))
    }

    /// `U(x)`. At `x = ±1` the pole limit is returned.
    pub fn eval(&self, x: f64) -> Result<f64> {
        match &self.repr {
            Repr::Linear { a, b } => {
                check_closed_interval(x)?;
                Ok(a * (1.0 - x) + b * (1.0 + x))
            }
            Repr::Numeric { track, series } => {
                if let Some(s) = Self::series_covers(series, x) {
                    return Ok(s.derivs_at_offset(s.pole.offset(x))[0]);
                }
                if track.contains(x) {
                    return Ok(track.eval(x)?.0);
                }
                match x {
                    _ if x == -1.0 => Ok(self.south_limit),
                    _ if x == 1.0 => Ok(self.north_limit),
                    _ => Err(Error::OutOfDomain {
                        x,
                        lo: self.domain().0,
                        hi: self.domain().1,
                    }),
                }
            }
        }
    }

    /// `[U, U', U'', U''']` at an interior point; derivatives come from the
    /// equation (or from the pole series inside its radius).
    pub fn derivs(&self, x: f64) -> Result<[f64; 4]> {
        if !(x > -1.0 && x < 1.0) {
            return Err(Error::PoleProximity { x, cutoff: 0.0 });
        }
        match &self.repr {
            Repr::Linear { a, b } => Ok([a * (1.0 - x) + b * (1.0 + x), b - a, 0.0, 0.0]),
            Repr::Numeric { track, series } => {
                if let Some(s) = Self::series_covers(series, x) {
                    return Ok(s.derivs_at_offset(s.pole.offset(x)));
                }
                let u = self.eval(x)?;
                let _ = track;
                Ok(ReducedEquation::new(self.index.params).derivs(x, u))
            }
        }
    }

    /// Derivative of order `order <= 3` at `x`.
    pub fn deriv(&self, x: f64, order: usize) -> Result<f64> {
        if order > 3 {
            return Err(Error::Domain {
                name: "order",
                value: order as f64,
                expected: "<= 3",
            });
        }
        Ok(self.derivs(x)?[order])
    }

    /// ODE residual at `x` using the representation's own slope (the dense
    /// interpolant's derivative on integrated pieces), so it measures how well
    /// the stored curve satisfies the equation.
    pub fn residual(&self, x: f64) -> Result<f64> {
        let eq = ReducedEquation::new(self.index.params);
        let (u, du) = match &self.repr {
            Repr::Linear { a, b } => {
                check_closed_interval(x)?;
                (a * (1.0 - x) + b * (1.0 + x), b - a)
            }
            Repr::Numeric { track, series } => {
                if let Some(s) = Self::series_covers(series, x) {
                    let d = s.derivs_at_offset(s.pole.offset(x));
                    (d[0], d[1])
                } else {
                    track.eval(x)?
                }
            }
        };
        Ok(eq.residual(x, u, du))
    }

    fn dense_track(&self) -> Option<&DenseTrack> {
        match &self.repr {
            Repr::Numeric { track, .. } => Some(track),
            Repr::Linear { .. } => None,
        }
    }
}

fn check_closed_interval(x: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            x,
            lo: -1.0,
            hi: 1.0,
        })
    }
}

/// Sample fractions per step used for the reported residual bound.
const BOUND_POINTS: [f64; 7] = [0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875];

fn residual_bound(
    eq: &ReducedEquation,
    track: &DenseTrack,
    series: Option<&SeriesExpansion>,
) -> f64 {
    let mut worst: f64 = 0.0;
    for w in track.nodes().windows(2) {
        worst = worst.max(step_defect(eq, &w[0], &w[1], &BOUND_POINTS));
    }
    if let Some(s) = series {
        for k in 0..=16 {
            let d = s.derivs_at_offset(s.radius * k as f64 / 16.0);
            let x = s.pole.at_offset(s.radius * k as f64 / 16.0);
            worst = worst.max(eq.residual(x, d[0], d[1]).abs());
        }
    }
    worst
}

fn boundary_curve(index: SolutionIndex) -> Result<SolutionCurve> {
    let c = index.params;
    let a = 1.0 + (1.0 + c.c1).sqrt();
    let b = -1.0 - (1.0 + c.c2).sqrt();
    Ok(SolutionCurve {
        index,
        repr: Repr::Linear { a, b },
        south_limit: 2.0 * a,
        north_limit: 2.0 * b,
        residual_bound: 0.0,
    })
}

fn finish_numeric(
    index: SolutionIndex,
    track: DenseTrack,
    series: Option<SeriesExpansion>,
    south_limit: f64,
    north_limit: f64,
    opts: &SolverOptions,
) -> Result<SolutionCurve> {
    let eq = ReducedEquation::new(index.params);
    let bound = residual_bound(&eq, &track, series.as_ref());
    if !(bound <= opts.residual_cap) {
        return Err(Error::Residual {
            bound,
            cap: opts.residual_cap,
        });
    }
    Ok(SolutionCurve {
        index,
        repr: Repr::Numeric { track, series },
        south_limit,
        north_limit,
        residual_bound: bound,
    })
}

/// How an outward integration ended at one pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoleOutcome {
    /// Reached the pole cutoff inside the basin of an admissible limit.
    Reached { x: f64, u: f64 },
    /// `|U|` crossed the escape cap (`predicted = false`), or the state at the
    /// cutoff lies beyond the repelling pole constant where the quadratic
    /// term dominates the forcing, so blow-up before the pole is certain
    /// (`predicted = true`).
    Escaped { x: f64, u: f64, predicted: bool },
}

impl PoleOutcome {
    pub fn escaped(&self) -> bool {
        matches!(self, PoleOutcome::Escaped { .. })
    }
}

/// Result of an unconstrained outward integration from `U(0) = gamma`.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub params: Params,
    pub gamma: f64,
    pub track: DenseTrack,
    pub south: PoleOutcome,
    pub north: PoleOutcome,
}

impl Exploration {
    pub fn global(&self) -> bool {
        !self.south.escaped() && !self.north.escaped()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.track.eval(x)?.0)
    }
}

/// Near the south pole, with `s = 1 + x`,
/// `F(x, U) = -(U - tau1)(U - tau2)/2 + s (c2~ - 2U) - c3 s^2`.
/// If `U > tau2` and the quadratic part dominates the forcing for all
/// smaller `s` and larger `U`, `U` grows without bound before `s = 0`.
fn south_escape_certain(c: &Params, s: f64, u: f64) -> bool {
    let Ok(t) = tau_constants(c.c1, c.c2) else {
        return false;
    };
    if !(u - t.tau2 > 1e-10 * t.tau2.abs().max(1.0)) {
        return false;
    }
    let q = 0.5 * (u - t.tau1) * (u - t.tau2);
    let c2t = -c.c1 + c.c2 + 2.0 * c.c3;
    let forcing = s * (c2t - 2.0 * u).max(0.0) + s * s * (-c.c3).max(0.0);
    q > forcing
}

fn escape_certain(c: &Params, pole: Pole, x: f64, u: f64) -> bool {
    let s = pole.offset(x);
    match pole {
        Pole::South => south_escape_certain(c, s, u),
        Pole::North => south_escape_certain(&c.reflect(), s, -u),
    }
}

fn outcome(c: &Params, pole: Pole, run: &Run) -> PoleOutcome {
    match run.end {
        Termination::Escaped { x, u } => PoleOutcome::Escaped {
            x,
            u,
            predicted: false,
        },
        Termination::Reached => {
            let last = run.last();
            if escape_certain(c, pole, last.x, last.u) {
                PoleOutcome::Escaped {
                    x: last.x,
                    u: last.u,
                    predicted: true,
                }
            } else {
                PoleOutcome::Reached {
                    x: last.x,
                    u: last.u,
                }
            }
        }
    }
}

/// Exploratory mode: integrate from `U(0) = gamma` toward both poles without
/// classifying `(c, gamma)` first.
pub fn explore(c: &Params, gamma: f64, opts: &SolverOptions) -> Result<Exploration> {
    let p = c.admissible(&opts.tolerances)?.params;
    let eq = ReducedEquation::new(p);
    let ctl = opts.step_control(&p);
    let south = integrate(&eq, 0.0, gamma, opts.cutoff_x(Pole::South), &ctl)?;
    let north = integrate(&eq, 0.0, gamma, opts.cutoff_x(Pole::North), &ctl)?;
    Ok(Exploration {
        params: p,
        gamma,
        south: outcome(&p, Pole::South, &south),
        north: outcome(&p, Pole::North, &north),
        track: DenseTrack::from_runs([&south, &north]),
    })
}

/// Table of pole limits by stratum.
fn table_limits(t: &EndpointConstants, e: Extremality) -> (f64, f64) {
    let south = if e == Extremality::Upper {
        t.tau2
    } else {
        t.tau1
    };
    let north = if e == Extremality::Lower {
        t.tau1p
    } else {
        t.tau2p
    };
    (south, north)
}

pub fn solve_ivp(c: &Params, gamma: f64) -> Result<SolutionCurve> {
    solve_ivp_with(c, gamma, &SolverOptions::default())
}

/// The unique solution with `U(0) = gamma` for `(c, gamma)` on the surface.
pub fn solve_ivp_with(c: &Params, gamma: f64, opts: &SolverOptions) -> Result<SolutionCurve> {
    let index = classify_with(c, gamma, opts)?;
    match index.stratum {
        Stratum::OutsideI => Err(Error::NotInI {
            gamma,
            stratum: index.stratum,
        }),
        Stratum::Boundary => boundary_curve(index),
        Stratum::Surface(_, Extremality::Upper) => {
            let mut curve = extremal_with(&index.params, Sign::Plus, opts)?;
            curve.index = index;
            Ok(curve)
        }
        Stratum::Surface(_, Extremality::Lower) => {
            let mut curve = extremal_with(&index.params, Sign::Minus, opts)?;
            curve.index = index;
            Ok(curve)
        }
        Stratum::Surface(_, Extremality::Between) => {
            let ex = explore(&index.params, gamma, opts)?;
            for o in [ex.south, ex.north] {
                if let PoleOutcome::Escaped { x, u, .. } = o {
                    return Err(Error::Escape { x, value: u });
                }
            }
            let t = index.params.tau()?;
            let (s, n) = table_limits(&t, Extremality::Between);
            finish_numeric(index, ex.track, None, s, n, opts)
        }
    }
}

fn require_in_j(c: &Params, opts: &SolverOptions) -> Result<(Params, BoundaryPosition)> {
    let not_in_j = || Error::NotInJ {
        c1: c.c1,
        c2: c.c2,
        c3: c.c3,
    };
    let p = c
        .admissible(&opts.tolerances)
        .map_err(|_| not_in_j())?
        .params;
    match p.boundary_position(&opts.tolerances)? {
        BoundaryPosition::Below => Err(not_in_j()),
        pos => Ok((p, pos)),
    }
}

/// Series start for an extremal branch: `U+` from `tau2` at the south pole,
/// `U-` from `tau1'` at the north pole.
fn extremal_series(p: &Params, sign: Sign) -> Result<SeriesExpansion> {
    let t = p.tau()?;
    match sign {
        Sign::Plus => expand_south(p, t.tau2),
        Sign::Minus => expand_north(p, t.tau1p),
    }
}

fn inward_leg(p: &Params, series: &SeriesExpansion, opts: &SolverOptions) -> Result<Run> {
    let eq = ReducedEquation::new(*p);
    let x0 = series.handoff_x();
    let u0 = series.derivs_at_offset(series.radius)[0];
    let run = integrate(&eq, x0, u0, 0.0, &opts.step_control(p))?;
    match run.end {
        Termination::Escaped { x, u } => Err(Error::Escape { x, value: u }),
        Termination::Reached => Ok(run),
    }
}

pub fn extremal(c: &Params, sign: Sign) -> Result<SolutionCurve> {
    extremal_with(c, sign, &SolverOptions::default())
}

/// The extremal solution `U+` (`Sign::Plus`) or `U-` (`Sign::Minus`).
pub fn extremal_with(c: &Params, sign: Sign, opts: &SolverOptions) -> Result<SolutionCurve> {
    let (p, pos) = require_in_j(c, opts)?;
    let ext = match sign {
        Sign::Plus => Extremality::Upper,
        Sign::Minus => Extremality::Lower,
    };
    if pos == BoundaryPosition::On {
        let gamma = p.boundary_gamma()?;
        return boundary_curve(SolutionIndex {
            params: p,
            gamma,
            stratum: Stratum::Boundary,
            clamped: false,
        });
    }
    let series = extremal_series(&p, sign)?;
    let first = inward_leg(&p, &series, opts)?;
    let gamma = first.last().u;
    let far = match sign {
        Sign::Plus => Pole::North,
        Sign::Minus => Pole::South,
    };
    let eq = ReducedEquation::new(p);
    let second = integrate(&eq, 0.0, gamma, opts.cutoff_x(far), &opts.step_control(&p))?;
    if let Termination::Escaped { x, u } = second.end {
        return Err(Error::Escape { x, value: u });
    }
    let index = SolutionIndex {
        params: p,
        gamma,
        stratum: Stratum::Surface(Degeneracy::of(&p), ext),
        clamped: false,
    };
    let (s, n) = table_limits(&p.tau()?, ext);
    finish_numeric(
        index,
        DenseTrack::from_runs([&first, &second]),
        Some(series),
        s,
        n,
        opts,
    )
}

fn gamma_extremal(c: &Params, sign: Sign, opts: &SolverOptions) -> Result<f64> {
    let (p, pos) = require_in_j(c, opts)?;
    if pos == BoundaryPosition::On {
        return p.boundary_gamma();
    }
    let series = extremal_series(&p, sign)?;
    Ok(inward_leg(&p, &series, opts)?.last().u)
}

/// `gamma_plus(c) = U+(c)(0)`.
pub fn gamma_plus(c: &Params) -> Result<f64> {
    gamma_plus_with(c, &SolverOptions::default())
}

pub fn gamma_plus_with(c: &Params, opts: &SolverOptions) -> Result<f64> {
    gamma_extremal(c, Sign::Plus, opts)
}

/// `gamma_minus(c) = U-(c)(0)`.
pub fn gamma_minus(c: &Params) -> Result<f64> {
    gamma_minus_with(c, &SolverOptions::default())
}

pub fn gamma_minus_with(c: &Params, opts: &SolverOptions) -> Result<f64> {
    gamma_extremal(c, Sign::Minus, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExistenceStatus {
    Exists,
    /// `c3 < c3_bar(c1, c2)`.
    NoSolutionC3Below,
    /// `c1 < -1` or `c2 < -1`: no solution is even `C^1` near that pole.
    NoSolutionPoleConstant,
    /// `c` is in `J` but the extremal construction escaped numerically.
    EscapedAt {
        x: f64,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    #[serde(flatten)]
    pub status: ExistenceStatus,
    pub detail: String,
}

pub fn exists(c: &Params) -> ExistenceReport {
    exists_with(c, &SolverOptions::default())
}

/// Existence is decided by the `c3_bar` inequality; integration is run only
/// as a supporting diagnostic.
pub fn exists_with(c: &Params, opts: &SolverOptions) -> ExistenceReport {
    let p = match c.admissible(&opts.tolerances) {
        Ok(a) => a.params,
        Err(e) => {
            return ExistenceReport {
                status: ExistenceStatus::NoSolutionPoleConstant,
                detail: e.to_string(),
            }
        }
    };
    let bar = p.c3_bar().expect("admissible c1, c2");
    match p.boundary_position(&opts.tolerances) {
        Ok(BoundaryPosition::Below) => {
            let diag = match upper_candidate_diagnostic(&p, opts) {
                Some((x, u)) => format!("upper-branch candidate escaped at x = {x}, U = {u}"),
                None => "upper-branch candidate did not escape before the north cutoff".into(),
            };
            ExistenceReport {
                status: ExistenceStatus::NoSolutionC3Below,
                detail: format!("c3 = {} < c3_bar = {bar}; {diag}", p.c3),
            }
        }
        Ok(BoundaryPosition::On) => ExistenceReport {
            status: ExistenceStatus::Exists,
            detail: format!(
                "c3 = c3_bar = {bar}; unique solution U*, gamma = {}",
                p.boundary_gamma().unwrap_or(f64::NAN)
            ),
        },
        Ok(BoundaryPosition::Above) => match extremal_with(&p, Sign::Plus, opts) {
            Ok(curve) => ExistenceReport {
                status: ExistenceStatus::Exists,
                detail: format!("c3 > c3_bar = {bar}; gamma_plus = {}", curve.gamma()),
            },
            Err(Error::Escape { x, value }) => ExistenceReport {
                status: ExistenceStatus::EscapedAt { x, value },
                detail: "upper extremal construction escaped".into(),
            },
            Err(e) => ExistenceReport {
                status: ExistenceStatus::EscapedAt {
                    x: f64::NAN,
                    value: f64::NAN,
                },
                detail: e.to_string(),
            },
        },
        Err(e) => ExistenceReport {
            status: ExistenceStatus::NoSolutionPoleConstant,
            detail: e.to_string(),
        },
    }
}

/// Runs the `U+` construction below the boundary and reports where it escapes.
fn upper_candidate_diagnostic(p: &Params, opts: &SolverOptions) -> Option<(f64, f64)> {
    let series = extremal_series(p, Sign::Plus).ok()?;
    let eq = ReducedEquation::new(*p);
    let ctl = opts.step_control(p);
    let u0 = series.derivs_at_offset(series.radius)[0];
    let run = integrate(
        &eq,
        series.handoff_x(),
        u0,
        opts.cutoff_x(Pole::North),
        &ctl,
    )
    .ok()?;
    match run.end {
        Termination::Escaped { x, u } => Some((x, u)),
        Termination::Reached => {
            let last = run.last();
            escape_certain(p, Pole::North, last.x, last.u).then_some((last.x, last.u))
        }
    }
}

/// Which root a pole limit was matched to (`tau1`/`tau2` at the south pole,
/// `tau1'`/`tau2'` at the north pole).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Root {
    Tau1,
    Tau2,
    /// `tau1 = tau2` (`c1 = -1` or `c2 = -1`).
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointMatch {
    pub pole: Pole,
    /// The matched pole constant.
    pub value: f64,
    pub root: Root,
    /// Extrapolated limit the match was based on.
    pub extrapolated: f64,
    /// Raw curve value at the closest computed point.
    pub raw: f64,
}

pub fn endpoint_value(curve: &SolutionCurve, pole: Pole) -> Result<f64> {
    Ok(endpoint_match(curve, pole, &SolverOptions::default())?.value)
}

/// Match the limit of `curve` at `pole` to one of the admissible constants.
///
/// Closed-form and series-started ends are exact. Integrated ends are
/// extrapolated: with the known local exponents for simple roots, and with
/// the logarithmic model `U ~ 2 + 4 / ln(s/3)` when the roots coincide.
pub fn endpoint_match(
    curve: &SolutionCurve,
    pole: Pole,
    opts: &SolverOptions,
) -> Result<EndpointMatch> {
    let c = curve.params();
    let t = c.tau()?;
    let (r1, r2, theta) = match pole {
        Pole::South => (t.tau1, t.tau2, (1.0 + c.c1).sqrt()),
        Pole::North => (t.tau1p, t.tau2p, (1.0 + c.c2).sqrt()),
    };
    // Roots ordered so that `near` is the extremal one for this pole.
    let (extremal_root, extremal_value) = match pole {
        Pole::South => (Root::Tau2, r2),
        Pole::North => (Root::Tau1, r1),
    };
    if curve.is_closed_form() {
        let v = curve.eval(pole.x())?;
        let root = if r1 == r2 {
            Root::Double
        } else {
            extremal_root
        };
        return Ok(EndpointMatch {
            pole,
            value: extremal_value,
            root,
            extrapolated: v,
            raw: v,
        });
    }
    if let Some(s) = curve.series().filter(|s| s.pole == pole) {
        let root = if r1 == r2 {
            Root::Double
        } else {
            extremal_root
        };
        return Ok(EndpointMatch {
            pole,
            value: s.tau,
            root,
            extrapolated: s.tau,
            raw: s.tau,
        });
    }
    let track = curve.dense_track().expect("numeric curve");
    let x_c = match pole {
        Pole::South => track.lo(),
        Pole::North => track.hi(),
    };
    let s_c = pole.offset(x_c);
    if !(s_c <= 1e-4) {
        return Err(Error::Precondition(format!(
            "curve stops at offset {s_c:e} from the {pole} pole"
        )));
    }
    let u_at = |s: f64| track.eval(pole.at_offset(s)).map(|v| v.0);
    let raw = u_at(s_c)?;
    let ambiguous = |extrapolated: f64| Error::AmbiguousEndpoint {
        pole,
        extrapolated,
        tau_a: r1,
        tau_b: r2,
    };

    if r1 == r2 {
        let extrapolated = double_root_limit(pole, s_c, raw, u_at(10.0 * s_c)?, r1);
        if !((extrapolated - r1).abs() <= opts.match_tol * r1.abs().max(1.0)) {
            return Err(ambiguous(extrapolated));
        }
        return Ok(EndpointMatch {
            pole,
            value: r1,
            root: Root::Double,
            extrapolated,
            raw,
        });
    }

    let exps = local_exponents(theta);
    let mut samples = Vec::with_capacity(exps.len() + 1);
    for j in 0..=exps.len() {
        samples.push(u_at(s_c * 10f64.powi(j as i32))?);
    }
    let extrapolated = richardson(&samples, &exps, 10.0);
    let (root, value) = if (extrapolated - r1).abs() <= (extrapolated - r2).abs() {
        (Root::Tau1, r1)
    } else {
        (Root::Tau2, r2)
    };
    if (extrapolated - value).abs() > opts.match_tol * value.abs().max(1.0) {
        return Err(ambiguous(extrapolated));
    }
    Ok(EndpointMatch {
        pole,
        value,
        root,
        extrapolated,
        raw,
    })
}

/// Limit estimate at a double root from samples `ua = U(s)`, `ub = U(10 s)`.
///
/// Up to `O(s)` terms, `v = ±(U - tau)` obeys `dv/d(ln s) = -v^2/4`, so
/// `1/v = (ln s - ln s0)/4` with a free `s0`. Fitting `L` and `s0` through
/// both samples gives the limit; the root of the resulting quadratic nearest
/// to the fixed-normalization estimate `U - 4/ln(s/3)` is taken. Values
/// already within `1e-6` of `tau` are treated as the analytic approach.
fn double_root_limit(pole: Pole, s: f64, ua: f64, ub: f64, tau: f64) -> f64 {
    let sign = match pole {
        Pole::South => 1.0,
        Pole::North => -1.0,
    };
    if (ua - tau).abs() <= 1e-6 && (ub - tau).abs() <= 1e-5 {
        return ua;
    }
    let (a, b) = (sign * ua, sign * ub);
    let coarse = a - 4.0 / (s / 3.0).ln();
    let d = -std::f64::consts::LN_10 / 4.0;
    let disc = (a - b) * (a - b) + 4.0 * (b - a) / d;
    if !(disc >= 0.0) {
        return sign * coarse;
    }
    let r = disc.sqrt();
    let (y1, y2) = (0.5 * (a + b + r), 0.5 * (a + b - r));
    let y = if (y1 - coarse).abs() <= (y2 - coarse).abs() {
        y1
    } else {
        y2
    };
    sign * y
}

/// Leading exponents of `U - tau` at a simple root with local rate `theta`:
/// multiples of `theta` and the forcing exponent `1`, at most three.
fn local_exponents(theta: f64) -> Vec<f64> {
    let mut cand: Vec<f64> = (1..=3)
        .map(|k| k as f64 * theta)
        .filter(|&p| p <= 1.0)
        .collect();
    cand.push(1.0);
    if theta > 1.0 {
        cand.push(theta);
    }
    cand.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for p in cand {
        if out.last().is_none_or(|&q| p - q > 0.05) {
            out.push(p);
        }
    }
    out.truncate(3);
    out
}

/// Limit `L` of the model `v_j = L + sum_i A_i r^(j p_i)`, `j = 0..=m`.
fn richardson(values: &[f64], exps: &[f64], r: f64) -> f64 {
    let n = exps.len() + 1;
    let mut m = vec![vec![0.0; n + 1]; n];
    for (j, row) in m.iter_mut().enumerate() {
        row[0] = 1.0;
        for (i, p) in exps.iter().enumerate() {
            row[i + 1] = r.powf(j as f64 * p);
        }
        row[n] = values[j];
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            let (top, bottom) = m.split_at_mut(row);
            for (a, b) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *a -= f * b;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x[0]
}
