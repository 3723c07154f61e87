//! Parameter-space geometry.
//!
//! A parameter triple `c = (c1, c2, c3)` fixes the quadratic right-hand side
//! `P_c(x) = c1 (1-x) + c2 (1+x) + c3 (1-x^2)` of the reduced equation
//! `(1-x^2) U' + 2x U + U^2/2 = P_c(x)`. Global solutions on `(-1, 1)` exist
//! exactly when `c` lies in the admissible set
//! `J = { c1 >= -1, c2 >= -1, c3 >= c3_bar(c1, c2) }`, and the full solution
//! family is the 4-parameter set of pairs `(c, gamma)` with
//! `gamma_minus(c) <= gamma <= gamma_plus(c)`, where `gamma = U(0)`.
//!
//! Floating point cannot represent the exact set boundaries, so every
//! membership decision goes through [`Tolerances`].

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::solver::{self, SolverOptions};

/// Absolute and relative slack used when comparing against set boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// `|c3 - c3_bar| <= membership * max(1, |c3_bar|)` counts as the boundary.
    pub membership: f64,
    /// `|gamma - gamma_pm| <= extremal * max(1, |gamma_pm|)` counts as extremal.
    pub extremal: f64,
    /// `c1` or `c2` below `-1` by at most this much is snapped to `-1`.
    pub clamp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            membership: 1e-12,
            extremal: 1e-9,
            clamp: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Parameters after snapping `c1`/`c2` onto `-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissible {
    pub params: Params,
    /// Set when an input slightly below `-1` was moved onto `-1`.
    pub clamped: bool,
}

impl Params {
    pub const ZERO: Params = Params {
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
    };

    pub const fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Self { c1, c2, c3 }
    }

    /// Parameters of the reflected problem `x -> -x`, `U -> -U`.
    pub const fn reflect(&self) -> Self {
        Self {
            c1: self.c2,
            c2: self.c1,
            c3: self.c3,
        }
    }

    /// Snap `c1`/`c2` values within `tol.clamp` below `-1` onto `-1`.
    ///
    /// Larger violations are reported as domain errors.
    pub fn admissible(&self, tol: &Tolerances) -> Result<Admissible> {
        let (c1, a) = snap("c1", self.c1, tol.clamp)?;
        let (c2, b) = snap("c2", self.c2, tol.clamp)?;
        if !self.c3.is_finite() {
            return Err(Error::Domain {
                name: "c3",
                value: self.c3,
                expected: "finite",
            });
        }
        Ok(Admissible {
            params: Params::new(c1, c2, self.c3),
            clamped: a || b,
        })
    }

    pub fn c3_bar(&self) -> Result<f64> {
        c3_bar(self.c1, self.c2)
    }

    pub fn tau(&self) -> Result<EndpointConstants> {
        tau_constants(self.c1, self.c2)
    }

    #[inline]
    pub fn p(&self, x: f64) -> f64 {
        p_c(x, self)
    }

    #[inline]
    pub fn p_prime(&self, x: f64) -> f64 {
        self.c2 - self.c1 - 2.0 * self.c3 * x
    }

    #[inline]
    pub fn p_second(&self) -> f64 {
        -2.0 * self.c3
    }

    /// `max |P_c(x)|` over `[-1, 1]`.
    pub fn p_sup(&self) -> f64 {
        let mut m = self.p(-1.0).abs().max(self.p(1.0).abs());
        if self.c3 != 0.0 {
            let vertex = (self.c2 - self.c1) / (2.0 * self.c3);
            if vertex.abs() < 1.0 {
                m = m.max(self.p(vertex).abs());
            }
        }
        m
    }

    /// Position of `c3` relative to `c3_bar(c1, c2)`.
    pub fn boundary_position(&self, tol: &Tolerances) -> Result<BoundaryPosition> {
        let bar = self.c3_bar()?;
        let slack = tol.membership * bar.abs().max(1.0);
        let d = self.c3 - bar;
        Ok(if d.abs() <= slack {
            BoundaryPosition::On
        } else if d < 0.0 {
            BoundaryPosition::Below
        } else {
            BoundaryPosition::Above
        })
    }

    /// Exact set membership in `J`, up to the configured tolerances.
    pub fn in_j(&self, tol: &Tolerances) -> bool {
        match self.admissible(tol) {
            Ok(a) => !matches!(
                a.params.boundary_position(tol),
                Ok(BoundaryPosition::Below) | Err(_)
            ),
            Err(_) => false,
        }
    }

    /// `U*(0) = sqrt(1+c1) - sqrt(1+c2)`, the common value of both extremal
    /// curves at `x = 0` on the boundary `c3 = c3_bar`.
    pub fn boundary_gamma(&self) -> Result<f64> {
        check_pole_constant("c1", self.c1)?;
        check_pole_constant("c2", self.c2)?;
        Ok((1.0 + self.c1).sqrt() - (1.0 + self.c2).sqrt())
    }
}

fn snap(name: &'static str, v: f64, clamp: f64) -> Result<(f64, bool)> {
    if !v.is_finite() {
        return Err(Error::Domain {
            name,
            value: v,
            expected: "finite",
        });
    }
    if v >= -1.0 {
        Ok((v, false))
    } else if v >= -1.0 - clamp {
        Ok((-1.0, true))
    } else {
        Err(Error::Domain {
            name,
            value: v,
            expected: ">= -1",
        })
    }
}

fn check_pole_constant(name: &'static str, v: f64) -> Result<()> {
    if v >= -1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: v,
            expected: ">= -1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPosition {
    Below,
    On,
    Above,
}

/// Lower boundary of admissible `c3`:
/// `-(1/2) (sqrt(1+c1) + sqrt(1+c2)) (sqrt(1+c1) + sqrt(1+c2) + 2)`.
pub fn c3_bar(c1: f64, c2: f64) -> Result<f64> {
    check_pole_constant("c1", c1)?;
    check_pole_constant("c2", c2)?;
    let s = (1.0 + c1).sqrt() + (1.0 + c2).sqrt();
    // `+ 0.0` turns the `-0` at c1 = c2 = -1 into `+0`.
    Ok(-0.5 * s * (s + 2.0) + 0.0)
}

/// The only possible pole limits of a solution.
///
/// South (`x = -1`): `tau1 = 2 - 2 sqrt(1+c1)`, `tau2 = 2 + 2 sqrt(1+c1)`.
/// North (`x = +1`): `tau1p = -2 - 2 sqrt(1+c2)`, `tau2p = -2 + 2 sqrt(1+c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointConstants {
    pub tau1: f64,
    pub tau2: f64,
    pub tau1p: f64,
    pub tau2p: f64,
}

pub fn tau_constants(c1: f64, c2: f64) -> Result<EndpointConstants> {
    check_pole_constant("c1", c1)?;
    check_pole_constant("c2", c2)?;
    let a = 2.0 * (1.0 + c1).sqrt();
    let b = 2.0 * (1.0 + c2).sqrt();
    Ok(EndpointConstants {
        tau1: 2.0 - a,
        tau2: 2.0 + a,
        tau1p: -2.0 - b,
        tau2p: -2.0 + b,
    })
}

/// `P_c(x) = c1 (1-x) + c2 (1+x) + c3 (1-x^2)`.
#[inline]
pub fn p_c(x: f64, c: &Params) -> f64 {
    c.c1 * (1.0 - x) + c.c2 * (1.0 + x) + c.c3 * ((1.0 - x) * (1.0 + x))
}

/// Which of `c1`, `c2` sit on the degenerate value `-1` (the `k` index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degeneracy {
    /// `c1 > -1`, `c2 > -1`.
    None,
    /// `c1 = -1`, `c2 > -1`.
    South,
    /// `c1 > -1`, `c2 = -1`.
    North,
    /// `c1 = c2 = -1`.
    Both,
}

impl Degeneracy {
    pub fn of(c: &Params) -> Self {
        match (c.c1 == -1.0, c.c2 == -1.0) {
            (false, false) => Degeneracy::None,
            (true, false) => Degeneracy::South,
            (false, true) => Degeneracy::North,
            (true, true) => Degeneracy::Both,
        }
    }

    pub fn k(self) -> u8 {
        match self {
            Degeneracy::None => 1,
            Degeneracy::South => 2,
            Degeneracy::North => 3,
            Degeneracy::Both => 4,
        }
    }

    pub fn from_k(k: u8) -> Option<Self> {
        Some(match k {
            1 => Degeneracy::None,
            2 => Degeneracy::South,
            3 => Degeneracy::North,
            4 => Degeneracy::Both,
            _ => return None,
        })
    }

    pub fn south(self) -> bool {
        matches!(self, Degeneracy::South | Degeneracy::Both)
    }

    pub fn north(self) -> bool {
        matches!(self, Degeneracy::North | Degeneracy::Both)
    }
}

/// Where `gamma` sits in `[gamma_minus, gamma_plus]` (the `l` index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extremality {
    Between,
    Upper,
    Lower,
}

impl Extremality {
    pub fn l(self) -> u8 {
        match self {
            Extremality::Between => 1,
            Extremality::Upper => 2,
            Extremality::Lower => 3,
        }
    }

    pub fn from_l(l: u8) -> Option<Self> {
        Some(match l {
            1 => Extremality::Between,
            2 => Extremality::Upper,
            3 => Extremality::Lower,
            _ => return None,
        })
    }
}

/// Piece of the solution surface a pair `(c, gamma)` belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stratum {
    /// `I_{k,l}`: `c3 > c3_bar`.
    Surface(Degeneracy, Extremality),
    /// `c3 = c3_bar` and `gamma = U*(0)`.
    Boundary,
    OutsideI,
}

impl Stratum {
    pub fn surface(k: u8, l: u8) -> Option<Self> {
        Some(Stratum::Surface(
            Degeneracy::from_k(k)?,
            Extremality::from_l(l)?,
        ))
    }

    pub fn kl(&self) -> Option<(u8, u8)> {
        match self {
            Stratum::Surface(d, e) => Some((d.k(), e.l())),
            _ => None,
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stratum::Surface(d, e) => write!(f, "I_{{{},{}}}", d.k(), e.l()),
            Stratum::Boundary => f.write_str("Boundary"),
            Stratum::OutsideI => f.write_str("OutsideI"),
        }
    }
}

impl Serialize for Stratum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A point `(c, gamma)` together with its stratum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionIndex {
    pub params: Params,
    pub gamma: f64,
    pub stratum: Stratum,
    /// `c1`/`c2` were snapped onto `-1`.
    pub clamped: bool,
}

/// Classify `(c, gamma)` with default solver settings.
pub fn classify(c: &Params, gamma: f64) -> Result<SolutionIndex> {
    classify_with(c, gamma, &SolverOptions::default())
}

pub fn classify_with(c: &Params, gamma: f64, opts: &SolverOptions) -> Result<SolutionIndex> {
    let tol = &opts.tolerances;
    let outside = |params: Params, clamped| SolutionIndex {
        params,
        gamma,
        stratum: Stratum::OutsideI,
        clamped,
    };
    if !gamma.is_finite() {
        return Err(Error::Domain {
            name: "gamma",
            value: gamma,
            expected: "finite",
        });
    }
    let adm = match c.admissible(tol) {
        Ok(a) => a,
        // c1 or c2 below -1: no solution near that pole at all.
        Err(_) if c.c1.is_finite() && c.c2.is_finite() && c.c3.is_finite() => {
            return Ok(outside(*c, false));
        }
        Err(e) => return Err(e),
    };
    let p = adm.params;
    let stratum = match p.boundary_position(tol)? {
        BoundaryPosition::Below => Stratum::OutsideI,
        BoundaryPosition::On => {
            let g = p.boundary_gamma()?;
            if (gamma - g).abs() <= tol.extremal * g.abs().max(1.0) {
                Stratum::Boundary
            } else {
                Stratum::OutsideI
            }
        }
        BoundaryPosition::Above => {
            let gp = solver::gamma_plus_with(&p, opts)
                .map_err(|e| Error::Unclassifiable(Box::new(e)))?;
            let gm = solver::gamma_minus_with(&p, opts)
                .map_err(|e| Error::Unclassifiable(Box::new(e)))?;
            let near = |g: f64| (gamma - g).abs() <= tol.extremal * g.abs().max(1.0);
            let ext = if near(gp) {
                Some(Extremality::Upper)
            } else if near(gm) {
                Some(Extremality::Lower)
            } else if gm < gamma && gamma < gp {
                Some(Extremality::Between)
            } else {
                None
            };
            match ext {
                Some(e) => Stratum::Surface(Degeneracy::of(&p), e),
                None => Stratum::OutsideI,
            }
        }
    };
    Ok(SolutionIndex {
        params: p,
        gamma,
        stratum,
        clamped: adm.clamped,
    })
}
