//! Physical velocity and pressure fields of a computed profile.
//!
//! With `x = cos(theta)` and `s(x) = sqrt(1 - x^2)`:
//!
//! ```text
//! u_theta = U / s,   u_r = U',   u_phi = 0,
//! p = -1/2 ((1-x^2) U''' - (2x - U) U'' + U'^2 + U^2 / (1-x^2))
//! ```
//!
//! at `r = 1`; velocities scale as `1/r` and pressure as `1/r^2`. The
//! theta-derivatives of the spherical formulas are converted to
//! x-derivatives through `d/dtheta = -s d/dx`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::SolutionCurve;

/// Field evaluation is refused closer than this to either pole.
pub const POLE_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub r: f64,
    pub x: f64,
    pub u_r: f64,
    pub u_theta: f64,
    pub u_phi: f64,
    pub p: f64,
}

impl FieldSample {
    /// The same sample moved to radius `r` by homogeneity.
    pub fn at_radius(&self, r: f64) -> Result<FieldSample> {
        check_radius(r)?;
        let k = self.r / r;
        Ok(FieldSample {
            r,
            x: self.x,
            u_r: self.u_r * k,
            u_theta: self.u_theta * k,
            u_phi: 0.0,
            p: self.p * k * k,
        })
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "r",
            value: r,
            expected: "finite and > 0",
        })
    }
}

fn check_pole(x: f64) -> Result<()> {
    if x.is_finite() && 1.0 - x.abs() >= POLE_CUTOFF {
        Ok(())
    } else {
        Err(Error::PoleProximity {
            x,
            cutoff: POLE_CUTOFF,
        })
    }
}

/// Unit-radius fields from `[U, U', U'', U''']` at `x`.
pub fn unit_fields(x: f64, d: [f64; 4]) -> FieldSample {
    let [u, d1, d2, d3] = d;
    let w = (1.0 - x) * (1.0 + x);
    FieldSample {
        r: 1.0,
        x,
        u_r: d1,
        u_theta: u / w.sqrt(),
        u_phi: 0.0,
        p: -0.5 * (w * d3 - (2.0 * x - u) * d2 + d1 * d1 + u * u / w),
    }
}

fn scaled(unit: &FieldSample, r: f64) -> FieldSample {
    let k = 1.0 / r;
    FieldSample {
        r,
        x: unit.x,
        u_r: unit.u_r * k,
        u_theta: unit.u_theta * k,
        u_phi: 0.0,
        p: unit.p * k * k,
    }
}

/// Fields of `curve` at spherical radius `r` and `x = cos(theta)`.
pub fn reconstruct(curve: &SolutionCurve, r: f64, x: f64) -> Result<FieldSample> {
    check_radius(r)?;
    check_pole(x)?;
    let unit = unit_fields(x, curve.derivs(x)?);
    Ok(scaled(&unit, r))
}

/// `reconstruct` over the product grid, `r` outermost. Derivatives are
/// computed once per `x`; failures are reported per sample.
pub fn sample_grid(
    curve: &SolutionCurve,
    r_values: &[f64],
    x_values: &[f64],
) -> Vec<Result<FieldSample>> {
    let units: Vec<Result<FieldSample>> = x_values
        .iter()
        .map(|&x| {
            check_pole(x)?;
            Ok(unit_fields(x, curve.derivs(x)?))
        })
        .collect();
    let mut out = Vec::with_capacity(r_values.len() * x_values.len());
    for &r in r_values {
        for unit in &units {
            out.push(match (check_radius(r), unit) {
                (Err(e), _) => Err(e),
                (Ok(()), Err(e)) => Err(e.clone()),
                (Ok(()), Ok(u)) => Ok(scaled(u, r)),
            });
        }
    }
    out
}

/// Landau profile `2(1-x^2)/(x+lambda)`, `|lambda| > 1`.
pub fn landau(lambda: f64, x: f64) -> Result<f64> {
    if !(lambda.abs() > 1.0) {
        return Err(Error::Domain {
            name: "lambda",
            value: lambda,
            expected: "|lambda| > 1",
        });
    }
    Ok(2.0 * (1.0 - x * x) / (x + lambda))
}

/// `[U, U', U'', U''']` of the Landau profile.
pub fn landau_derivs(lambda: f64, x: f64) -> Result<[f64; 4]> {
    let u = landau(lambda, x)?;
    // U = 2(1-x^2)/(x+l) = -2(x - l) - 2(l^2 - 1)/(x + l)
    let q = x + lambda;
    let k = 2.0 * (lambda * lambda - 1.0);
    Ok([
        u,
        -2.0 + k / (q * q),
        -2.0 * k / (q * q * q),
        6.0 * k / (q * q * q * q),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;
    use crate::solver::{solve_ivp, ReducedEquation};

    #[test]
    fn landau_values() {
        assert_eq!(landau(2.0, 0.0).unwrap(), 1.0);
        assert_eq!(landau(2.0, 1.0).unwrap(), 0.0);
        assert_eq!(landau(2.0, -1.0).unwrap(), 0.0);
        assert!(landau(1.0, 0.0).is_err());
        assert!(landau(-0.5, 0.0).is_err());
        let d = landau_derivs(2.0, 0.3).unwrap();
        let eq = ReducedEquation::new(Params::ZERO);
        assert!(eq.residual(0.3, d[0], d[1]).abs() < 1e-13);
    }

    #[test]
    fn landau_derivatives_match_equation() {
        let eq = ReducedEquation::new(Params::ZERO);
        for &l in &[1.5, -3.0, 2.0] {
            for &x in &[-0.7, 0.0, 0.45] {
                let d = landau_derivs(l, x).unwrap();
                let from_eq = eq.derivs(x, d[0]);
                for k in 1..4 {
                    assert!((d[k] - from_eq[k]).abs() < 1e-11 * d[k].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn landau_fields_at_equator() {
        let curve = solve_ivp(&Params::ZERO, 1.0).unwrap();
        let f = reconstruct(&curve, 1.0, 0.0).unwrap();
        assert!((f.u_theta - 1.0).abs() < 1e-12);
        assert!((f.u_r + 0.5).abs() < 1e-12);
        assert_eq!(f.u_phi, 0.0);
    }

    #[test]
    fn zero_curve_gives_zero_fields() {
        let curve = solve_ivp(&Params::ZERO, 0.0).unwrap();
        let f = reconstruct(&curve, 3.0, 0.4).unwrap();
        assert_eq!((f.u_r, f.u_theta, f.u_phi, f.p), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn homogeneity_is_exact() {
        let curve = solve_ivp(&Params::ZERO, 1.0).unwrap();
        let one = reconstruct(&curve, 1.0, 0.3).unwrap();
        let two = reconstruct(&curve, 2.0, 0.3).unwrap();
        assert_eq!(two.u_r, one.u_r / 2.0);
        assert_eq!(two.u_theta, one.u_theta / 2.0);
        assert_eq!(two.p, one.p / 4.0);
        assert_eq!(one.at_radius(2.0).unwrap(), two);
    }

    #[test]
    fn pole_and_radius_guards() {
        let curve = solve_ivp(&Params::ZERO, 1.0).unwrap();
        assert!(matches!(
            reconstruct(&curve, 1.0, 1.0 - 1e-7),
            Err(Error::PoleProximity { .. })
        ));
        assert!(reconstruct(&curve, 0.0, 0.0).is_err());
    }

    #[test]
    fn grid_shapes() {
        let curve = solve_ivp(&Params::ZERO, 1.0).unwrap();
        assert!(sample_grid(&curve, &[], &[]).is_empty());
        let one = sample_grid(&curve, &[1.5], &[0.2]);
        assert_eq!(one.len(), 1);
        assert_eq!(
            one[0].as_ref().unwrap(),
            &reconstruct(&curve, 1.5, 0.2).unwrap()
        );
        let mixed = sample_grid(&curve, &[1.0, 2.0], &[0.0, 1.0]);
        assert_eq!(mixed.len(), 4);
        assert!(mixed[0].is_ok() && mixed[1].is_err() && mixed[2].is_ok());
    }
}
