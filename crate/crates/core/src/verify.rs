//! Numerical property checks.
//!
//! Every check returns a [`CheckResult`] with `passed == (measured <= bound)`.
//! Invalid inputs (wrong stratum, forbidden direction, ...) are `Err`;
//! solver failures inside a check become failed results with witnesses.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{landau, landau_derivs, reconstruct, unit_fields};
use crate::grid::{chebyshev, linspace, pole_refined};
use crate::params::{
    c3_bar, classify_with, Degeneracy, Extremality, Params, SolutionIndex, Stratum,
};
use crate::series::Pole;
use crate::solver::{
    endpoint_match, explore, extremal_with, gamma_minus_with, gamma_plus_with, solve_ivp_with,
    Sign, SolutionCurve, SolverOptions,
};

/// Points used by the grid-based checks.
pub const CHECK_GRID: usize = 1000;
/// Sandwich slack.
pub const SANDWICH_TOL: f64 = 1e-8;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const LANDAU_TOL: f64 = 1e-8;
pub const REFLECTION_TOL: f64 = 1e-9;
pub const UNIQUENESS_TOL: f64 = 1e-8;
/// Offset of the perturbed initial values in the uniqueness check.
pub const UNIQUENESS_PERTURBATION: f64 = 1e-3;
/// Bound on `|g(pole offset 1e-8) - (±4)|` in the log-asymptotic check.
pub const LOG_TOL: f64 = 0.35;
/// Cap on `|U - tau - 4/ln(s/3)| |ln(s/3)|^1.5` along the log sequence.
pub const LOG_REFINEMENT_CAP: f64 = 10.0;
/// Central-difference step of the parameter-derivative check.
pub const FD_STEP: f64 = 1e-5;
/// Largest relative change of a weighted FD maximum when the step is halved.
pub const FD_STABILITY: f64 = 0.1;
/// Cap on weighted first derivatives.
pub const DERIVATIVE_CAP: f64 = 1e3;
/// Required distance from the stratum's boundary in every free parameter.
pub const STRATUM_MARGIN: f64 = 0.05;
pub const FIELD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub input: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub witnesses: Vec<Witness>,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= bound,
            measured,
            bound,
            witnesses: Vec::new(),
            detail: String::new(),
        }
    }

    fn with(mut self, witnesses: Vec<Witness>, detail: impl Into<String>) -> Self {
        self.witnesses = witnesses;
        self.detail = detail.into();
        self
    }
}

fn witness(input: impl Into<String>, value: f64) -> Witness {
    Witness {
        input: input.into(),
        value,
    }
}

fn fmt_c(c: &Params) -> String {
    format!("c=({}, {}, {})", c.c1, c.c2, c.c3)
}

/// Tracks the largest value seen and where it occurred.
struct Worst {
    value: f64,
    at: Option<Witness>,
    failures: Vec<Witness>,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: None,
            failures: Vec::new(),
        }
    }

    fn see(&mut self, value: f64, input: impl FnOnce() -> String) {
        if !(value <= self.value) {
            self.value = value;
            self.at = Some(witness(input(), value));
        }
    }

    fn fail(&mut self, input: String, err: &Error) {
        self.value = f64::INFINITY;
        self.failures
            .push(witness(format!("{input}: {err}"), f64::INFINITY));
    }

    fn finish(self, name: &str, bound: f64, detail: impl Into<String>) -> CheckResult {
        let mut r = CheckResult::new(name, self.value, bound);
        let mut ws = self.failures;
        if !r.passed {
            ws.extend(self.at);
        }
        r.witnesses = ws;
        r.detail = detail.into();
        r
    }
}

fn interior_grid() -> Vec<f64> {
    chebyshev(CHECK_GRID)
}

/// Pointwise strict ordering of `U^{c, gamma_i}` for increasing `gammas`.
///
/// `measured` is minus the smallest gap between neighbouring curves, and the
/// bound is the negative of the smallest positive double, so the check
/// passes exactly when every gap is strictly positive.
pub fn check_foliation(c: &Params, gammas: &[f64], opts: &SolverOptions) -> Result<CheckResult> {
    let name = "foliation";
    let bound = -f64::MIN_POSITIVE;
    let p = c.admissible(&opts.tolerances)?.params;
    if !p.c3_bar().is_ok_and(|b| p.c3 > b) {
        return Err(Error::Precondition(format!(
            "{}: need c3 > c3_bar",
            fmt_c(&p)
        )));
    }
    if gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition(
            "gammas must be strictly increasing".into(),
        ));
    }
    if gammas.len() < 2 {
        let mut r = CheckResult::new(name, bound, bound);
        r.detail = "fewer than two curves".into();
        return Ok(r);
    }
    let xs = interior_grid();
    let mut curves = Vec::with_capacity(gammas.len());
    let mut failures = Vec::new();
    for &g in gammas {
        match solve_ivp_with(&p, g, opts) {
            Ok(curve) => curves.push(Some(curve)),
            Err(e) => {
                failures.push(witness(
                    format!("{} gamma={g}: {e}", fmt_c(&p)),
                    f64::INFINITY,
                ));
                curves.push(None);
            }
        }
    }
    if !failures.is_empty() {
        return Ok(CheckResult::new(name, f64::INFINITY, bound).with(failures, "solver failure"));
    }
    let curves: Vec<SolutionCurve> = curves.into_iter().flatten().collect();
    let mut min_gap = f64::INFINITY;
    let mut at = None;
    let mut violations = Vec::new();
    for (i, pair) in curves.windows(2).enumerate() {
        for &x in &xs {
            let gap = match (pair[0].eval(x), pair[1].eval(x)) {
                (Ok(a), Ok(b)) => b - a,
                (Err(e), _) | (_, Err(e)) => {
                    violations.push(witness(format!("x={x}: {e}"), f64::INFINITY));
                    f64::NEG_INFINITY
                }
            };
            if !(gap > 0.0) && violations.len() < 16 {
                violations.push(witness(
                    format!("gammas=({}, {}) x={x}", gammas[i], gammas[i + 1]),
                    gap,
                ));
            }
            if !(gap >= min_gap) {
                min_gap = gap;
                at = Some((gammas[i], gammas[i + 1], x));
            }
        }
    }
    let mut r = CheckResult::new(name, -min_gap, bound);
    if let Some((a, b, x)) = at {
        r.detail = format!(
            "{}: smallest gap {min_gap:e} between gamma={a} and gamma={b} at x={x}",
            fmt_c(&p)
        );
    }
    r.witnesses = violations;
    Ok(r)
}

/// `U- - tol <= U^{c,gamma} <= U+ + tol` on the check grid.
pub fn check_sandwich(samples: &[(Params, f64)], opts: &SolverOptions) -> CheckResult {
    let mut worst = Worst::new();
    let xs = interior_grid();
    for (c, g) in samples {
        let label = format!("{} gamma={g}", fmt_c(c));
        let curves = solve_ivp_with(c, *g, opts).and_then(|u| {
            Ok((
                u,
                extremal_with(c, Sign::Plus, opts)?,
                extremal_with(c, Sign::Minus, opts)?,
            ))
        });
        let (u, up, down) = match curves {
            Ok(t) => t,
            Err(e) => {
                worst.fail(label, &e);
                continue;
            }
        };
        for &x in &xs {
            match (u.eval(x), up.eval(x), down.eval(x)) {
                (Ok(v), Ok(hi), Ok(lo)) => {
                    worst.see((v - hi).max(lo - v).max(0.0), || format!("{label} x={x}"))
                }
                (Err(e), ..) | (_, Err(e), _) | (.., Err(e)) => {
                    worst.fail(format!("{label} x={x}"), &e)
                }
            }
        }
    }
    worst.finish(
        "sandwich",
        SANDWICH_TOL,
        "largest excursion outside [U-, U+]",
    )
}

/// Largest `|(1-x^2)U' + 2xU + U^2/2 - P_c|` of `curve` on `xs`.
pub fn max_residual(curve: &SolutionCurve, xs: &[f64]) -> Result<(f64, f64)> {
    let mut worst = (0.0, f64::NAN);
    for &x in xs {
        let r = curve.residual(x)?.abs();
        if !(r <= worst.0) {
            worst = (r, x);
        }
    }
    Ok(worst)
}

/// ODE residual of each sampled curve at the interior check grid.
pub fn check_residual(samples: &[(Params, f64)], opts: &SolverOptions) -> CheckResult {
    let mut worst = Worst::new();
    let xs = interior_grid();
    for (c, g) in samples {
        let label = format!("{} gamma={g}", fmt_c(c));
        match solve_ivp_with(c, *g, opts).and_then(|u| max_residual(&u, &xs)) {
            Ok((r, x)) => worst.see(r, || format!("{label} x={x}")),
            Err(e) => worst.fail(label, &e),
        }
    }
    worst.finish("residual", RESIDUAL_TOL, "max ODE residual over samples")
}

/// `sup |U^{0,gamma} - 2(1-x^2)/(x + 2/gamma)|` over `[-0.99, 0.99]`.
pub fn check_landau(gammas: &[f64], opts: &SolverOptions) -> CheckResult {
    let mut worst = Worst::new();
    let xs = linspace(-0.99, 0.99, 1981);
    for &g in gammas {
        let label = format!("gamma={g}");
        let curve = match solve_ivp_with(&Params::ZERO, g, opts) {
            Ok(c) => c,
            Err(e) => {
                worst.fail(label, &e);
                continue;
            }
        };
        for &x in &xs {
            let exact = if g == 0.0 {
                Ok(0.0)
            } else {
                landau(2.0 / g, x)
            };
            match (curve.eval(x), exact) {
                (Ok(u), Ok(e)) => worst.see((u - e).abs(), || format!("{label} x={x}")),
                (Err(e), _) | (_, Err(e)) => worst.fail(format!("{label} x={x}"), &e),
            }
        }
    }
    worst.finish(
        "landau",
        LANDAU_TOL,
        "sup distance to the Landau closed form",
    )
}

/// `U^{c,gamma}(x) = -U^{reflect(c),-gamma}(-x)` on the check grid.
pub fn check_reflection(samples: &[(Params, f64)], opts: &SolverOptions) -> CheckResult {
    let mut worst = Worst::new();
    let xs = interior_grid();
    for (c, g) in samples {
        let label = format!("{} gamma={g}", fmt_c(c));
        let pair = solve_ivp_with(c, *g, opts)
            .and_then(|a| Ok((a, solve_ivp_with(&c.reflect(), -g, opts)?)));
        let (a, b) = match pair {
            Ok(p) => p,
            Err(e) => {
                worst.fail(label, &e);
                continue;
            }
        };
        for &x in &xs {
            match (a.eval(x), b.eval(-x)) {
                (Ok(u), Ok(v)) => worst.see((u + v).abs(), || format!("{label} x={x}")),
                (Err(e), _) | (_, Err(e)) => worst.fail(format!("{label} x={x}"), &e),
            }
        }
    }
    worst.finish("reflection", REFLECTION_TOL, "largest reflection defect")
}

/// Table value of the limit at `pole` for a classified sample.
pub fn table_limit(index: &SolutionIndex, pole: Pole) -> Result<f64> {
    let t = index.params.tau()?;
    let ext = match index.stratum {
        Stratum::Surface(_, e) => e,
        Stratum::Boundary => match pole {
            Pole::South => Extremality::Upper,
            Pole::North => Extremality::Lower,
        },
        Stratum::OutsideI => {
            return Err(Error::NotInI {
                gamma: index.gamma,
                stratum: index.stratum,
            })
        }
    };
    Ok(match (pole, ext) {
        (Pole::South, Extremality::Upper) => t.tau2,
        (Pole::South, _) => t.tau1,
        (Pole::North, Extremality::Lower) => t.tau1p,
        (Pole::North, _) => t.tau2p,
    })
}

/// Extrapolated pole limits against the table. `measured` is the largest
/// relative distance `|extrapolated - table| / max(1, |table|)`.
pub fn check_endpoint_table(samples: &[(Params, f64)], opts: &SolverOptions) -> CheckResult {
    let mut worst = Worst::new();
    for (c, g) in samples {
        let label = format!("{} gamma={g}", fmt_c(c));
        let curve = match solve_ivp_with(c, *g, opts) {
            Ok(u) => u,
            Err(e) => {
                worst.fail(label, &e);
                continue;
            }
        };
        for pole in [Pole::South, Pole::North] {
            let res = endpoint_match(&curve, pole, opts).and_then(|m| {
                let want = table_limit(curve.index(), pole)?;
                if m.value != want {
                    return Ok(f64::INFINITY);
                }
                Ok((m.extrapolated - want).abs() / want.abs().max(1.0))
            });
            match res {
                Ok(d) => worst.see(d, || format!("{label} {pole}")),
                Err(e) => worst.fail(format!("{label} {pole}"), &e),
            }
        }
    }
    worst.finish(
        "endpoint_table",
        opts.match_tol,
        "relative distance of extrapolated pole limits to the table",
    )
}

fn boundary_profile(c1: f64, c2: f64, x: f64) -> f64 {
    (1.0 + (1.0 + c1).sqrt()) * (1.0 - x) + (-1.0 - (1.0 + c2).sqrt()) * (1.0 + x)
}

/// At `c3 = c3_bar`: the solution through `U*(0)` is `U*`, both as returned
/// and as re-integrated from `x = 0`, and `U*(0) ± 1e-3` escapes.
pub fn check_uniqueness_at_boundary(c1: f64, c2: f64, opts: &SolverOptions) -> Result<CheckResult> {
    let c = Params::new(c1, c2, c3_bar(c1, c2)?);
    let label = fmt_c(&c);
    let gamma = c.boundary_gamma()?;
    let xs = linspace(-0.999, 0.999, 1999);
    let mut worst = Worst::new();
    match solve_ivp_with(&c, gamma, opts) {
        Ok(curve) => {
            for &x in &xs {
                match curve.eval(x) {
                    Ok(u) => worst.see((u - boundary_profile(c1, c2, x)).abs(), || {
                        format!("{label} solve x={x}")
                    }),
                    Err(e) => worst.fail(format!("{label} x={x}"), &e),
                }
            }
        }
        Err(e) => worst.fail(label.clone(), &e),
    }
    let mut notes = Vec::new();
    match explore(&c, gamma, opts) {
        Ok(ex) => {
            for &x in &xs {
                match ex.eval(x) {
                    Ok(u) => worst.see((u - boundary_profile(c1, c2, x)).abs(), || {
                        format!("{label} integrated x={x}")
                    }),
                    Err(e) => worst.fail(format!("{label} integrated x={x}"), &e),
                }
            }
        }
        Err(e) => worst.fail(format!("{label} integrated"), &e),
    }
    for d in [-UNIQUENESS_PERTURBATION, UNIQUENESS_PERTURBATION] {
        let g = gamma + d;
        match explore(&c, g, opts) {
            Ok(ex) if !ex.global() => {
                let (pole, o) = if ex.south.escaped() {
                    (Pole::South, ex.south)
                } else {
                    (Pole::North, ex.north)
                };
                notes.push(format!("gamma={g}: escapes toward the {pole} pole ({o:?})"));
            }
            Ok(_) => {
                worst.value = f64::INFINITY;
                worst.failures.push(witness(
                    format!("{label} gamma={g}: reached both poles"),
                    f64::INFINITY,
                ));
            }
            Err(e) => worst.fail(format!("{label} gamma={g}"), &e),
        }
    }
    Ok(worst.finish("uniqueness", UNIQUENESS_TOL, notes.join("; ")))
}

/// Logarithmic approach to a double pole root.
///
/// With `s` the offset from `pole` and `g = (U - tau) ln(s/3)` (`tau = 2` at
/// the south pole, `-2` at the north pole) the sequence at `s = 10^-k`,
/// `k = 3..=8`, must move monotonically toward `±4`, end within [`LOG_TOL`],
/// and keep `|U - tau - 4/ln(s/3)| |ln(s/3)|^1.5` under
/// [`LOG_REFINEMENT_CAP`]. `measured` is the final distance to `±4`, or
/// infinity when monotonicity or the refinement bound fails.
pub fn check_log_asymptotics(
    c: &Params,
    gamma: f64,
    pole: Pole,
    opts: &SolverOptions,
) -> Result<CheckResult> {
    let index = classify_with(c, gamma, opts)?;
    let Stratum::Surface(deg, ext) = index.stratum else {
        return Err(Error::Precondition(format!(
            "stratum {} has no log branch",
            index.stratum
        )));
    };
    let (degenerate, extremal, tau, target) = match pole {
        Pole::South => (deg.south(), ext == Extremality::Upper, 2.0, 4.0),
        Pole::North => (deg.north(), ext == Extremality::Lower, -2.0, -4.0),
    };
    if !degenerate {
        return Err(Error::Precondition(format!(
            "{pole} pole constant is not -1"
        )));
    }
    if extremal {
        return Err(Error::Precondition(format!(
            "the extremal branch is analytic at the {pole} pole"
        )));
    }
    let name = format!("log_asymptotics_{pole}");
    let curve = match solve_ivp_with(&index.params, gamma, opts) {
        Ok(u) => u,
        Err(e) => {
            let w = vec![witness(
                format!("{} gamma={gamma}: {e}", fmt_c(c)),
                f64::INFINITY,
            )];
            return Ok(CheckResult::new(name, f64::INFINITY, LOG_TOL).with(w, "solver failure"));
        }
    };
    let mut gs = Vec::new();
    let mut refine = Vec::new();
    for k in 3..=8 {
        let s = 10f64.powi(-k);
        let u = curve.eval(pole.at_offset(s))?;
        let l = (s / 3.0).ln();
        gs.push((u - tau) * l);
        refine.push((u - tau - target / l).abs() * l.abs().powf(1.5));
    }
    let dist: Vec<f64> = gs.iter().map(|g| (g - target).abs()).collect();
    let monotone = dist.windows(2).all(|w| w[1] < w[0]);
    let refine_max = refine.iter().cloned().fold(0.0, f64::max);
    let last = *dist.last().unwrap();
    let measured = if monotone && refine_max <= LOG_REFINEMENT_CAP {
        last
    } else {
        f64::INFINITY
    };
    let mut witnesses: Vec<Witness> = gs
        .iter()
        .enumerate()
        .map(|(i, g)| witness(format!("g(s=1e-{})", i + 3), *g))
        .collect();
    witnesses.extend(
        refine
            .iter()
            .enumerate()
            .map(|(i, r)| witness(format!("refinement(s=1e-{})", i + 3), *r)),
    );
    let r = CheckResult::new(name, measured, LOG_TOL);
    let detail = format!(
        "{} gamma={gamma}: |g - {target}| at s=1e-8 is {last:.6}, monotone={monotone}, max refinement {refine_max:.4}",
        fmt_c(c)
    );
    let witnesses = if r.passed { Vec::new() } else { witnesses };
    Ok(r.with(witnesses, detail))
}

/// Differentiation directions in `(c1, c2, c3, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    C1,
    C2,
    C3,
    Gamma,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::C1,
        Direction::C2,
        Direction::C3,
        Direction::Gamma,
    ];
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::C1 => "c1",
            Direction::C2 => "c2",
            Direction::C3 => "c3",
            Direction::Gamma => "gamma",
        })
    }
}

/// Logarithmic weight attached to first derivatives in a stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    None,
    South,
    North,
    Both,
}

impl Weight {
    pub fn at(self, x: f64) -> f64 {
        let ls = ((1.0 + x) / 3.0).ln().powi(2);
        let ln = ((1.0 - x) / 3.0).ln().powi(2);
        match self {
            Weight::None => 1.0,
            Weight::South => ls,
            Weight::North => ln,
            Weight::Both => ls * ln,
        }
    }
}

/// Weight and permitted directions of first derivatives on `I_{k,l}`.
pub fn derivative_rule(stratum: Stratum) -> Result<(Weight, Vec<Direction>)> {
    let Some((k, l)) = stratum.kl() else {
        return Err(Error::Precondition(format!(
            "no derivative estimate on {stratum}"
        )));
    };
    let weight = match (k, l) {
        (1, _) | (2, 2) | (3, 3) => Weight::None,
        (2, 1) | (2, 3) | (4, 3) => Weight::South,
        (3, 1) | (3, 2) | (4, 2) => Weight::North,
        _ => Weight::Both,
    };
    let dirs = Direction::ALL
        .into_iter()
        .filter(|d| match d {
            Direction::C1 => k == 1 || k == 3,
            Direction::C2 => k == 1 || k == 2,
            Direction::C3 => true,
            Direction::Gamma => l == 1,
        })
        .collect();
    Ok((weight, dirs))
}

fn shifted(index: &SolutionIndex, d: Direction, h: f64) -> (Params, f64) {
    let mut c = index.params;
    let mut g = index.gamma;
    match d {
        Direction::C1 => c.c1 += h,
        Direction::C2 => c.c2 += h,
        Direction::C3 => c.c3 += h,
        Direction::Gamma => g += h,
    }
    (c, g)
}

/// The curve of `index`'s stratum at shifted parameters: extremal strata
/// follow `gamma_plus(c)` / `gamma_minus(c)`.
fn stratum_curve(
    ext: Extremality,
    c: &Params,
    gamma: f64,
    opts: &SolverOptions,
) -> Result<SolutionCurve> {
    match ext {
        Extremality::Between => solve_ivp_with(c, gamma, opts),
        Extremality::Upper => extremal_with(c, Sign::Plus, opts),
        Extremality::Lower => extremal_with(c, Sign::Minus, opts),
    }
}

fn check_margin(index: &SolutionIndex, opts: &SolverOptions) -> Result<()> {
    let c = index.params;
    let deg = Degeneracy::of(&c);
    let far = |what: &str, gap: f64| {
        if gap >= STRATUM_MARGIN {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "{}: {what} is {gap:e} from the stratum boundary (margin {STRATUM_MARGIN})",
                fmt_c(&c)
            )))
        }
    };
    if !deg.south() {
        far("c1", c.c1 + 1.0)?;
    }
    if !deg.north() {
        far("c2", c.c2 + 1.0)?;
    }
    far("c3", c.c3 - c.c3_bar()?)?;
    if let Stratum::Surface(_, Extremality::Between) = index.stratum {
        far("gamma", gamma_plus_with(&c, opts)? - index.gamma)?;
        far("gamma", index.gamma - gamma_minus_with(&c, opts)?)?;
    }
    Ok(())
}

/// Max over `xs` of `weight(x) |U(p + h e) - U(p - h e)| / (2h)`.
fn weighted_fd(
    index: &SolutionIndex,
    ext: Extremality,
    d: Direction,
    h: f64,
    weight: Weight,
    xs: &[f64],
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let (cp, gp) = shifted(index, d, h);
    let (cm, gm) = shifted(index, d, -h);
    let up = stratum_curve(ext, &cp, gp, opts)?;
    let um = stratum_curve(ext, &cm, gm, opts)?;
    let mut worst = (0.0, f64::NAN);
    for &x in xs {
        let v = weight.at(x) * ((up.eval(x)? - um.eval(x)?) / (2.0 * h)).abs();
        if !(v <= worst.0) {
            worst = (v, x);
        }
    }
    Ok(worst)
}

/// First-order parameter derivatives on one stratum.
///
/// For each sample and each direction (all permitted ones when `directions`
/// is empty) the weighted central difference is maximised over a grid
/// reaching `±(1 - 1e-7)` with step [`FD_STEP`] and again with half the
/// step. `measured` is the largest weighted value, or infinity if any pair
/// differs by more than [`FD_STABILITY`] relative.
pub fn check_param_derivatives(
    samples: &[(Params, f64)],
    stratum: Stratum,
    directions: &[Direction],
    opts: &SolverOptions,
) -> Result<CheckResult> {
    let (weight, allowed) = derivative_rule(stratum)?;
    let dirs: Vec<Direction> = if directions.is_empty() {
        allowed.clone()
    } else {
        directions.to_vec()
    };
    if let Some(d) = dirs.iter().find(|d| !allowed.contains(d)) {
        return Err(Error::Precondition(format!(
            "direction {d} is not covered on {stratum}"
        )));
    }
    let Stratum::Surface(_, ext) = stratum else {
        unreachable!("derivative_rule rejects non-surface strata")
    };
    let mut indices = Vec::with_capacity(samples.len());
    for (c, g) in samples {
        let index = classify_with(c, *g, opts)?;
        if index.stratum != stratum {
            return Err(Error::StratumMismatch {
                expected: stratum,
                found: index.stratum,
            });
        }
        check_margin(&index, opts)?;
        indices.push(index);
    }
    let xs = pole_refined(200, 7);
    let mut measured: f64 = 0.0;
    let mut witnesses = Vec::new();
    let mut notes = Vec::new();
    for index in &indices {
        for &d in &dirs {
            let label = format!("{} gamma={} d/d{d}", fmt_c(&index.params), index.gamma);
            let pair = weighted_fd(index, ext, d, FD_STEP, weight, &xs, opts).and_then(|a| {
                Ok((
                    a,
                    weighted_fd(index, ext, d, 0.5 * FD_STEP, weight, &xs, opts)?,
                ))
            });
            match pair {
                Ok(((a, xa), (b, _))) => {
                    let change = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                    let stable = change < FD_STABILITY || a.max(b) < 1e-12;
                    notes.push(format!("{label}: {a:.6e} (half step {b:.6e}) at x={xa}"));
                    if stable {
                        measured = measured.max(a.max(b));
                        witnesses.push(witness(label, a));
                    } else {
                        measured = f64::INFINITY;
                        witnesses.push(witness(
                            format!("{label} step-unstable, change {change:.3}"),
                            a,
                        ));
                    }
                }
                Err(e) => {
                    measured = f64::INFINITY;
                    witnesses.push(witness(format!("{label}: {e}"), f64::INFINITY));
                }
            }
        }
    }
    let r = CheckResult::new(
        format!("param_derivatives_{stratum}"),
        measured,
        DERIVATIVE_CAP,
    );
    let witnesses = if r.passed { Vec::new() } else { witnesses };
    Ok(r.with(witnesses, notes.join("; ")))
}

fn d1_6(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-f(t - 3.0 * h) + 9.0 * f(t - 2.0 * h) - 45.0 * f(t - h) + 45.0 * f(t + h)
        - 9.0 * f(t + 2.0 * h)
        + f(t + 3.0 * h))
        / (60.0 * h)
}

fn d2_6(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (2.0 * f(t - 3.0 * h) - 27.0 * f(t - 2.0 * h) + 270.0 * f(t - h) - 490.0 * f(t)
        + 270.0 * f(t + h)
        - 27.0 * f(t + 2.0 * h)
        + 2.0 * f(t + 3.0 * h))
        / (180.0 * h * h)
}

/// Pressure from the spherical formula, with theta-derivatives of `u_r`
/// taken by sixth-order central differences of step `h`.
fn pressure_fd(u_r: impl Fn(f64) -> f64, u_theta: impl Fn(f64) -> f64, theta: f64, h: f64) -> f64 {
    let ur = u_r(theta);
    let ut = u_theta(theta);
    let cot = theta.cos() / theta.sin();
    -0.5 * (d2_6(&u_r, theta, h) + (cot - ut) * d1_6(&u_r, theta, h) + ur * ur + ut * ut)
}

/// Field identities for the Landau solution with parameter `lambda`
/// computed by the solver:
///
/// * `field_divergence`: `u_r + du_theta/dtheta + u_theta cot(theta)` with
///   the theta-derivative by finite differences of the computed `u_theta`;
/// * `field_homogeneity`: bitwise scaling for `r = 2, 4`;
/// * `field_pressure`: difference between the reconstructed pressure and a
///   theta-space finite-difference evaluation of the closed form, and the
///   drift of that evaluation when its step is halved.
pub fn check_fields(lambda: f64, opts: &SolverOptions) -> Result<Vec<CheckResult>> {
    landau(lambda, 0.0)?;
    let curve = solve_ivp_with(&Params::ZERO, 2.0 / lambda, opts)?;
    let xs = linspace(-0.95, 0.95, 100);

    let mut div = Worst::new();
    let u_theta = |t: f64| -> f64 {
        let x = t.cos();
        curve.eval(x).map(|u| u / t.sin()).unwrap_or(f64::NAN)
    };
    for &x in &xs {
        let f = reconstruct(&curve, 1.0, x)?;
        let t = x.acos();
        let r = f.u_r + d1_6(u_theta, t, 1e-3) + f.u_theta * t.cos() / t.sin();
        div.see(r.abs(), || format!("lambda={lambda} x={x}"));
    }

    let mut scale = Worst::new();
    for &x in &xs {
        let one = reconstruct(&curve, 1.0, x)?;
        for r in [2.0, 4.0] {
            let s = reconstruct(&curve, r, x)?;
            let k = 1.0 / r;
            let exact = s.u_r == one.u_r * k
                && s.u_theta == one.u_theta * k
                && s.p == one.p * k * k
                && s.u_phi == 0.0;
            scale.see(if exact { 0.0 } else { 1.0 }, || format!("x={x} r={r}"));
        }
    }

    let mut press = Worst::new();
    let ur_exact = |t: f64| {
        landau_derivs(lambda, t.cos())
            .map(|d| d[1])
            .unwrap_or(f64::NAN)
    };
    let ut_exact = |t: f64| {
        let x = t.cos();
        landau(lambda, x).map(|u| u / t.sin()).unwrap_or(f64::NAN)
    };
    let mut drift: f64 = 0.0;
    for &x in &xs {
        let t = x.acos();
        let p1 = pressure_fd(ur_exact, ut_exact, t, 1e-2);
        let p2 = pressure_fd(ur_exact, ut_exact, t, 5e-3);
        drift = drift.max((p1 - p2).abs());
        let p = reconstruct(&curve, 1.0, x)?.p;
        let closed = unit_fields(x, landau_derivs(lambda, x)?).p;
        press.see((p - p2).abs().max((p1 - p2).abs()), || {
            format!("lambda={lambda} x={x}")
        });
        press.see((closed - p2).abs(), || {
            format!("closed form lambda={lambda} x={x}")
        });
    }
    Ok(vec![
        div.finish(
            "field_divergence",
            FIELD_TOL,
            "theta-space divergence relation",
        ),
        scale.finish("field_homogeneity", 0.0, "1 marks an inexact scaled sample"),
        press.finish(
            "field_pressure",
            FIELD_TOL,
            format!("pressure against the FD oracle; drift on halving {drift:e}"),
        ),
    ])
}

/// Check families known to the suite runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Foliation,
    Sandwich,
    Residual,
    Landau,
    Reflection,
    EndpointTable,
    Uniqueness,
    Fields,
    LogAsymptotics,
    ParamDerivatives,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::Foliation,
        CheckKind::Sandwich,
        CheckKind::Residual,
        CheckKind::Landau,
        CheckKind::Reflection,
        CheckKind::EndpointTable,
        CheckKind::Uniqueness,
        CheckKind::Fields,
        CheckKind::LogAsymptotics,
        CheckKind::ParamDerivatives,
    ];

    /// Checks run by the `default` suite.
    pub const DEFAULT: [CheckKind; 8] = [
        CheckKind::Foliation,
        CheckKind::Sandwich,
        CheckKind::Residual,
        CheckKind::Landau,
        CheckKind::Reflection,
        CheckKind::EndpointTable,
        CheckKind::Uniqueness,
        CheckKind::Fields,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Foliation => "foliation",
            CheckKind::Sandwich => "sandwich",
            CheckKind::Residual => "residual",
            CheckKind::Landau => "landau",
            CheckKind::Reflection => "reflection",
            CheckKind::EndpointTable => "endpoint_table",
            CheckKind::Uniqueness => "uniqueness",
            CheckKind::Fields => "fields",
            CheckKind::LogAsymptotics => "log_asymptotics",
            CheckKind::ParamDerivatives => "param_derivatives",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Resolve a suite selector: `default`, `all`, or a comma-separated list of
/// check names.
pub fn parse_suite(spec: &str) -> Result<Vec<CheckKind>> {
    match spec.trim() {
        "default" => Ok(CheckKind::DEFAULT.to_vec()),
        "all" => Ok(CheckKind::ALL.to_vec()),
        list => {
            let mut out = Vec::new();
            for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let kind = CheckKind::from_name(name)
                    .ok_or_else(|| Error::Precondition(format!("unknown check '{name}'")))?;
                if !out.contains(&kind) {
                    out.push(kind);
                }
            }
            if out.is_empty() {
                return Err(Error::Precondition("empty suite".into()));
            }
            Ok(out)
        }
    }
}

/// A parameter point with a rule for picking `gamma` on its surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum GammaSpec {
    Value(f64),
    /// `gamma_minus + t (gamma_plus - gamma_minus)`.
    Fraction(f64),
    Plus,
    Minus,
}

impl GammaSpec {
    pub fn resolve(self, c: &Params, opts: &SolverOptions) -> Result<f64> {
        match self {
            GammaSpec::Value(g) => Ok(g),
            GammaSpec::Plus => gamma_plus_with(c, opts),
            GammaSpec::Minus => gamma_minus_with(c, opts),
            GammaSpec::Fraction(t) => {
                let lo = gamma_minus_with(c, opts)?;
                let hi = gamma_plus_with(c, opts)?;
                Ok(lo + t * (hi - lo))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeSamples {
    pub stratum: Stratum,
    pub directions: Vec<Direction>,
    pub points: Vec<(Params, GammaSpec)>,
}

/// Inputs of every suite check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub name: String,
    pub foliation: Vec<(Params, Vec<GammaSpec>)>,
    pub curves: Vec<(Params, GammaSpec)>,
    pub landau_gammas: Vec<f64>,
    pub endpoint: Vec<(Params, GammaSpec)>,
    pub uniqueness: Vec<(f64, f64)>,
    pub field_lambdas: Vec<f64>,
    pub log: Vec<(Params, f64, Pole)>,
    pub derivatives: Vec<DerivativeSamples>,
}

fn nine_interior() -> Vec<GammaSpec> {
    (1..=9)
        .map(|i| GammaSpec::Fraction(i as f64 / 10.0))
        .collect()
}

impl SampleSet {
    pub fn named(name: &str) -> Result<SampleSet> {
        match name {
            "default" => Ok(Self::default_set()),
            _ => Err(Error::Precondition(format!("unknown sample set '{name}'"))),
        }
    }

    /// The shipped sample set.
    pub fn default_set() -> SampleSet {
        let p = Params::new;
        let f = GammaSpec::Fraction;
        let mut curves = Vec::new();
        for c in [
            p(0.0, 0.0, 0.0),
            p(0.0, 0.0, 1.0),
            p(3.0, 0.0, 0.0),
            p(0.5, 2.0, -1.0),
            p(-1.0, 0.0, 0.0),
            p(-1.0, -1.0, 1.0),
        ] {
            for g in [GammaSpec::Minus, f(0.25), f(0.5), f(0.75), GammaSpec::Plus] {
                curves.push((c, g));
            }
        }
        for (c1, c2) in [(0.0, 0.0), (3.0, 0.0), (0.0, 3.0), (-1.0, -1.0)] {
            curves.push((p(c1, c2, c3_bar(c1, c2).unwrap()), GammaSpec::Plus));
        }
        let mut endpoint = Vec::new();
        for c in [p(0.0, 0.0, 0.0), p(3.0, 0.0, 0.0), p(0.0, 3.0, 0.0)] {
            for g in [GammaSpec::Minus, f(0.5), GammaSpec::Plus] {
                endpoint.push((c, g));
            }
        }
        endpoint.push((p(0.0, 0.0, 0.0), GammaSpec::Value(1.0)));
        SampleSet {
            name: "default".into(),
            foliation: vec![
                (p(0.0, 0.0, 1.0), nine_interior()),
                (
                    p(0.0, 0.0, 0.0),
                    vec![
                        GammaSpec::Value(-1.0),
                        GammaSpec::Value(0.0),
                        GammaSpec::Value(1.0),
                    ],
                ),
                (
                    p(0.0, 0.0, 0.0),
                    vec![GammaSpec::Value(-2.0), GammaSpec::Value(2.0)],
                ),
                (
                    p(0.5, 2.0, -1.0),
                    vec![GammaSpec::Minus, f(0.3), f(0.7), GammaSpec::Plus],
                ),
                (p(-1.0, -1.0, 1.0), nine_interior()),
            ],
            curves,
            landau_gammas: [1.5, -1.5, 2.0, -2.0, 5.0]
                .iter()
                .map(|l| 2.0 / l)
                .collect(),
            endpoint,
            uniqueness: vec![(0.0, 0.0), (3.0, 0.0), (0.0, 3.0), (-1.0, -1.0)],
            field_lambdas: vec![2.0, 1.5],
            log: vec![
                (p(-1.0, 0.0, 0.0), 0.0, Pole::South),
                (p(0.0, -1.0, 0.0), 0.0, Pole::North),
            ],
            derivatives: vec![
                DerivativeSamples {
                    stratum: Stratum::surface(1, 1).unwrap(),
                    directions: Vec::new(),
                    points: vec![
                        (p(0.0, 0.0, 1.0), GammaSpec::Value(0.0)),
                        (p(0.5, 2.0, -1.0), f(0.5)),
                    ],
                },
                DerivativeSamples {
                    stratum: Stratum::surface(2, 1).unwrap(),
                    directions: vec![Direction::C2, Direction::C3, Direction::Gamma],
                    points: vec![
                        (p(-1.0, 0.0, 0.0), GammaSpec::Value(0.0)),
                        (p(-1.0, 1.0, 0.5), f(0.3)),
                    ],
                },
                DerivativeSamples {
                    stratum: Stratum::surface(4, 1).unwrap(),
                    directions: vec![Direction::C3, Direction::Gamma],
                    points: vec![
                        (p(-1.0, -1.0, 1.0), GammaSpec::Value(0.0)),
                        (p(-1.0, -1.0, 0.5), f(0.6)),
                    ],
                },
            ],
        }
    }
}

fn resolve_all(
    points: &[(Params, GammaSpec)],
    opts: &SolverOptions,
) -> std::result::Result<Vec<(Params, f64)>, CheckResult> {
    let mut out = Vec::with_capacity(points.len());
    for (c, g) in points {
        match g.resolve(c, opts) {
            Ok(v) => out.push((*c, v)),
            Err(e) => {
                let w = vec![witness(format!("{} {g:?}: {e}", fmt_c(c)), f64::INFINITY)];
                return Err(CheckResult::new("sample_resolution", f64::INFINITY, 0.0)
                    .with(w, "could not resolve gamma"));
            }
        }
    }
    Ok(out)
}

fn precondition_failure(name: &str, e: Error) -> CheckResult {
    CheckResult::new(name, f64::INFINITY, 0.0).with(
        vec![witness(e.to_string(), f64::INFINITY)],
        "invalid sample",
    )
}

/// Run one check family on a sample set.
pub fn run_check(kind: CheckKind, set: &SampleSet, opts: &SolverOptions) -> Vec<CheckResult> {
    let resolve = |pts: &[(Params, GammaSpec)]| resolve_all(pts, opts);
    match kind {
        CheckKind::Foliation => set
            .foliation
            .iter()
            .map(|(c, gs)| {
                let pts: Vec<(Params, GammaSpec)> = gs.iter().map(|g| (*c, *g)).collect();
                match resolve(&pts) {
                    Ok(v) => {
                        let gammas: Vec<f64> = v.iter().map(|p| p.1).collect();
                        check_foliation(c, &gammas, opts)
                            .unwrap_or_else(|e| precondition_failure("foliation", e))
                    }
                    Err(r) => r,
                }
            })
            .collect(),
        CheckKind::Sandwich => {
            vec![resolve(&set.curves).map_or_else(|r| r, |v| check_sandwich(&v, opts))]
        }
        CheckKind::Residual => {
            let mut pts = set.curves.clone();
            pts.extend(
                set.landau_gammas
                    .iter()
                    .map(|g| (Params::ZERO, GammaSpec::Value(*g))),
            );
            vec![resolve(&pts).map_or_else(|r| r, |v| check_residual(&v, opts))]
        }
        CheckKind::Landau => vec![check_landau(&set.landau_gammas, opts)],
        CheckKind::Reflection => {
            vec![resolve(&set.curves).map_or_else(|r| r, |v| check_reflection(&v, opts))]
        }
        CheckKind::EndpointTable => {
            vec![resolve(&set.endpoint).map_or_else(|r| r, |v| check_endpoint_table(&v, opts))]
        }
        CheckKind::Uniqueness => set
            .uniqueness
            .iter()
            .map(|&(a, b)| {
                check_uniqueness_at_boundary(a, b, opts)
                    .unwrap_or_else(|e| precondition_failure("uniqueness", e))
            })
            .collect(),
        CheckKind::Fields => set
            .field_lambdas
            .iter()
            .flat_map(|&l| {
                check_fields(l, opts).unwrap_or_else(|e| vec![precondition_failure("fields", e)])
            })
            .collect(),
        CheckKind::LogAsymptotics => set
            .log
            .iter()
            .map(|(c, g, pole)| {
                check_log_asymptotics(c, *g, *pole, opts)
                    .unwrap_or_else(|e| precondition_failure("log_asymptotics", e))
            })
            .collect(),
        CheckKind::ParamDerivatives => set
            .derivatives
            .iter()
            .map(|d| match resolve(&d.points) {
                Ok(v) => check_param_derivatives(&v, d.stratum, &d.directions, opts)
                    .unwrap_or_else(|e| precondition_failure("param_derivatives", e)),
                Err(r) => r,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Vec<CheckKind>,
    pub sample_set: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn from_results(
        suite: Vec<CheckKind>,
        sample_set: &str,
        checks: Vec<CheckResult>,
    ) -> Report {
        Report {
            passed: checks.iter().all(|c| c.passed),
            suite,
            sample_set: sample_set.into(),
            checks,
        }
    }
}

/// Run `suite` sequentially.
pub fn run_suite(suite: &[CheckKind], set: &SampleSet, opts: &SolverOptions) -> Report {
    let checks = suite
        .iter()
        .flat_map(|&k| run_check(k, set, opts))
        .collect();
    Report::from_results(suite.to_vec(), &set.name, checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn result_invariant() {
        assert!(CheckResult::new("a", 1.0, 1.0).passed);
        assert!(!CheckResult::new("a", 1.0 + 1e-16 * 4.0, 1.0).passed);
        assert!(!CheckResult::new("a", f64::NAN, 1.0).passed);
    }

    #[test]
    fn foliation_examples() {
        let c = Params::ZERO;
        assert!(
            check_foliation(&c, &[-1.0, 0.0, 1.0], &opts())
                .unwrap()
                .passed
        );
        assert!(check_foliation(&c, &[-2.0, 2.0], &opts()).unwrap().passed);
        assert!(check_foliation(&c, &[0.5], &opts()).unwrap().passed);
        assert!(check_foliation(&Params::new(0.0, 0.0, -4.0), &[0.0], &opts()).is_err());
        // Out-of-surface gamma shows up as a failed check with a witness.
        let r = check_foliation(&c, &[0.0, 2.5], &opts()).unwrap();
        assert!(!r.passed && !r.witnesses.is_empty());
    }

    #[test]
    fn log_guards() {
        let c = Params::new(-1.0, 0.0, 0.0);
        let gp = gamma_plus_with(&c, &opts()).unwrap();
        assert!(check_log_asymptotics(&c, gp, Pole::South, &opts()).is_err());
        assert!(check_log_asymptotics(&c, 0.0, Pole::North, &opts()).is_err());
    }

    #[test]
    fn derivative_rules() {
        let s = |k, l| Stratum::surface(k, l).unwrap();
        let (w, d) = derivative_rule(s(1, 1)).unwrap();
        assert_eq!(w, Weight::None);
        assert_eq!(d, Direction::ALL.to_vec());
        let (w, d) = derivative_rule(s(2, 1)).unwrap();
        assert_eq!(w, Weight::South);
        assert_eq!(d, vec![Direction::C2, Direction::C3, Direction::Gamma]);
        let (w, d) = derivative_rule(s(4, 1)).unwrap();
        assert_eq!(w, Weight::Both);
        assert_eq!(d, vec![Direction::C3, Direction::Gamma]);
        let (w, d) = derivative_rule(s(3, 2)).unwrap();
        assert_eq!(w, Weight::North);
        assert_eq!(d, vec![Direction::C1, Direction::C3]);
        let (w, d) = derivative_rule(s(2, 2)).unwrap();
        assert_eq!(w, Weight::None);
        assert_eq!(d, vec![Direction::C2, Direction::C3]);
        assert!(derivative_rule(Stratum::Boundary).is_err());
    }

    #[test]
    fn forbidden_direction_is_rejected() {
        let r = check_param_derivatives(
            &[(Params::new(-1.0, 0.0, 0.0), 0.0)],
            Stratum::surface(2, 1).unwrap(),
            &[Direction::C1],
            &opts(),
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
        let r = check_param_derivatives(
            &[(Params::new(0.0, 0.0, 1.0), 0.0)],
            Stratum::surface(2, 1).unwrap(),
            &[],
            &opts(),
        );
        assert!(matches!(r, Err(Error::StratumMismatch { .. })));
    }

    #[test]
    fn stencils_are_sixth_order() {
        let f = |t: f64| t.sin();
        assert!((d1_6(f, 0.7, 1e-2) - 0.7f64.cos()).abs() < 1e-13);
        assert!((d2_6(f, 0.7, 1e-2) + 0.7f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn suite_parsing() {
        assert_eq!(parse_suite("default").unwrap(), CheckKind::DEFAULT.to_vec());
        assert_eq!(
            parse_suite("foliation").unwrap(),
            vec![CheckKind::Foliation]
        );
        assert_eq!(
            parse_suite("landau, residual,landau").unwrap(),
            vec![CheckKind::Landau, CheckKind::Residual]
        );
        assert!(parse_suite("nope").is_err());
        assert!(SampleSet::named("other").is_err());
    }
}
