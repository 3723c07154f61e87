//! Analytic power-series solutions at the poles.
//!
//! Near the south pole write `s = 1 + x` and `U = tau + sum_{n>=1} a_n s^n`.
//! Substituting into the reduced equation with
//! `P_c = 2 c1 + (-c1 + c2 + 2 c3) s - c3 s^2` gives `tau^2/2 - 2 tau = 2 c1`
//! (so `tau` is one of the two south pole constants), the seeds
//!
//! ```text
//! a_1 = c2~ / tau - 2,            c2~ = -c1 + c2 + 2 c3
//! a_2 = (c3~ - a_1 - a_1^2/2) / (tau + 2),   c3~ = -c3
//! ```
//!
//! and for `n >= 3`
//!
//! ```text
//! a_n = -( (1/2) sum_{k+l=n} a_k a_l + (3 - n) a_{n-1} ) / (2n - 2 + tau).
//! ```
//!
//! The north pole expansion in `1 - x` is obtained through the reflection
//! `x -> -x`, `U -> -U`, `(c1, c2) -> (c2, c1)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{tau_constants, Params};

/// Hard cap on stored coefficients.
pub const MAX_TERMS: usize = 200;
/// Largest handoff offset from the pole.
pub const MAX_RADIUS: f64 = 0.05;
/// Growth estimates above this are treated as divergence.
pub const GROWTH_CAP: f64 = 1e6;

const TERM_EPS: f64 = 1e-16;
const TAIL_EPS: f64 = 1e-14;
const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    South,
    North,
}

impl Pole {
    /// Location of the pole on the `x` axis.
    pub fn x(self) -> f64 {
        match self {
            Pole::South => -1.0,
            Pole::North => 1.0,
        }
    }

    /// Distance `s >= 0` of `x` from this pole, measured into `(-1, 1)`.
    #[inline]
    pub fn offset(self, x: f64) -> f64 {
        match self {
            Pole::South => 1.0 + x,
            Pole::North => 1.0 - x,
        }
    }

    /// Inverse of [`Pole::offset`].
    #[inline]
    pub fn at_offset(self, s: f64) -> f64 {
        match self {
            Pole::South => -1.0 + s,
            Pole::North => 1.0 - s,
        }
    }

    pub fn opposite(self) -> Pole {
        match self {
            Pole::South => Pole::North,
            Pole::North => Pole::South,
        }
    }
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pole::South => "south",
            Pole::North => "north",
        })
    }
}

/// Truncated pole expansion `U = tau + sum a_n s^n`, `s` the offset from `pole`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesExpansion {
    pub pole: Pole,
    pub params: Params,
    pub tau: f64,
    /// `a_1 ..= a_N`.
    pub coeffs: Vec<f64>,
    /// Handoff radius: evaluation is accepted for offsets `0 <= s <= radius`.
    pub radius: f64,
    /// `max |a_n|^(1/n)` over the stored terms, floored at 1.
    pub growth: f64,
}

/// South pole expansion around `tau` (one of `tau1(c1)`, `tau2(c1)`).
pub fn expand_south(c: &Params, tau: f64) -> Result<SeriesExpansion> {
    let t = tau_constants(c.c1, c.c2)?;
    let close = |r: f64| (tau - r).abs() <= ROOT_TOL * r.abs().max(1.0);
    if !(close(t.tau1) || close(t.tau2)) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            expected: "tau1(c1) or tau2(c1)",
        });
    }
    // Denominators 2n - 2 + tau vanish for tau in {0, -2, -4, ...}.
    if tau <= ROOT_TOL {
        let k = (-tau / 2.0).round();
        if (tau + 2.0 * k).abs() <= ROOT_TOL {
            return Err(Error::DegenerateBranch { tau });
        }
    }
    let c2t = -c.c1 + c.c2 + 2.0 * c.c3;
    let c3t = -c.c3;
    let scale = tau.abs().max(1.0);

    let mut a: Vec<f64> = Vec::with_capacity(64);
    let mut growth: f64 = 1.0;
    let mut small_run = 0usize;
    for n in 1..=MAX_TERMS {
        let an = match n {
            1 => c2t / tau - 2.0,
            2 => (c3t - a[0] - 0.5 * a[0] * a[0]) / (tau + 2.0),
            _ => {
                let conv: f64 = (1..n).map(|k| a[k - 1] * a[n - k - 1]).sum();
                -(0.5 * conv + (3.0 - n as f64) * a[n - 2]) / (2.0 * n as f64 - 2.0 + tau)
            }
        };
        if !an.is_finite() {
            return Err(Error::SeriesDivergence {
                growth: f64::INFINITY,
                cap: GROWTH_CAP,
            });
        }
        a.push(an);
        growth = growth.max(an.abs().powf(1.0 / n as f64));
        if growth > GROWTH_CAP {
            return Err(Error::SeriesDivergence {
                growth,
                cap: GROWTH_CAP,
            });
        }
        let radius = handoff_radius(growth);
        if an.abs() * radius.powi(n as i32) < TERM_EPS * scale {
            small_run += 1;
        } else {
            small_run = 0;
        }
        let q = growth * radius;
        let tail = q.powi(n as i32 + 1) / (1.0 - q);
        if small_run >= 3 && tail <= TAIL_EPS * scale {
            break;
        }
    }
    Ok(SeriesExpansion {
        pole: Pole::South,
        params: *c,
        tau,
        coeffs: a,
        radius: handoff_radius(growth),
        growth,
    })
}

/// North pole expansion around `taup` (one of `tau1'(c2)`, `tau2'(c2)`).
pub fn expand_north(c: &Params, taup: f64) -> Result<SeriesExpansion> {
    let mirrored = expand_south(&c.reflect(), -taup).map_err(|e| match e {
        Error::Domain { value, .. } => Error::Domain {
            name: "taup",
            value: -value,
            expected: "tau1'(c2) or tau2'(c2)",
        },
        Error::DegenerateBranch { tau } => Error::DegenerateBranch { tau: -tau },
        other => other,
    })?;
    // Reflection U(x) = -V(-x): the series in s = 1 - x has negated coefficients.
    Ok(SeriesExpansion {
        pole: Pole::North,
        params: *c,
        tau: taup,
        coeffs: mirrored.coeffs.iter().map(|v| -v).collect(),
        radius: mirrored.radius,
        growth: mirrored.growth,
    })
}

fn handoff_radius(growth: f64) -> f64 {
    MAX_RADIUS.min(0.5 / growth)
}

impl SeriesExpansion {
    /// `(U, dU/dx)` at `x`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let d = self.derivs(x)?;
        Ok((d[0], d[1]))
    }

    /// `U` and its first three `x`-derivatives at `x`.
    pub fn derivs(&self, x: f64) -> Result<[f64; 4]> {
        let s = self.pole.offset(x);
        if !(0.0..=self.radius * (1.0 + 1e-12)).contains(&s) {
            return Err(Error::OutOfRadius {
                pole: self.pole,
                offset: s,
                radius: self.radius,
            });
        }
        Ok(self.derivs_at_offset(s))
    }

    /// Derivatives at offset `s` without the radius check.
    pub(crate) fn derivs_at_offset(&self, s: f64) -> [f64; 4] {
        // Horner on sum_{n=0}^{N} b_n s^n and its s-derivatives.
        let mut v = [0.0f64; 4];
        let n_terms = self.coeffs.len();
        for n in (0..=n_terms).rev() {
            let b = if n == 0 { self.tau } else { self.coeffs[n - 1] };
            v[3] = v[3] * s + 3.0 * v[2];
            v[2] = v[2] * s + 2.0 * v[1];
            v[1] = v[1] * s + v[0];
            v[0] = v[0] * s + b;
        }
        // v[k] = d^k U / ds^k; ds = -dx at the north pole.
        let sign = match self.pole {
            Pole::South => 1.0,
            Pole::North => -1.0,
        };
        [v[0], sign * v[1], v[2], sign * v[3]]
    }

    /// Bound on the neglected tail at offset `s` from the growth estimate.
    pub fn tail_bound(&self, s: f64) -> f64 {
        let q = self.growth * s;
        if q >= 1.0 {
            return f64::INFINITY;
        }
        q.powi(self.coeffs.len() as i32 + 1) / (1.0 - q)
    }

    /// Offset from the pole to the handoff point.
    pub fn handoff_x(&self) -> f64 {
        self.pole.at_offset(self.radius)
    }
}
