//! Adaptive Dormand-Prince 5(4) integration of scalar ODEs with
//! quintic Hermite dense output.
//!
//! Every accepted step stores `(x, u, u', u'')`, with `u''` supplied by the
//! ODE itself, so the dense interpolant matches value, slope and curvature
//! at both ends of each step.

use crate::error::{Error, Result};

/// A scalar first-order ODE `u' = rate(x, u)` that can also report `u''`.
pub trait ScalarOde {
    fn rate(&self, x: f64, u: f64) -> f64;
    /// `rate` at the abscissa `x + dx`, which need not be representable.
    /// Integration stages call this so that equations singular at fixed
    /// points can measure their distance to them without rounding `x + dx`.
    fn rate_at(&self, x: f64, dx: f64, u: f64) -> f64 {
        self.rate(x + dx, u)
    }
    /// Total second derivative along a solution passing through `(x, u)`
    /// with slope `du`.
    fn second(&self, x: f64, u: f64, du: f64) -> f64;
    /// Factor applied to `|u_hat' - rate(x, u_hat)|` of the dense output
    /// before it is compared with [`StepControl::defect_tol`].
    fn defect_weight(&self, _x: f64) -> f64 {
        1.0
    }
    fn defect_weight_at(&self, x: f64, dx: f64) -> f64 {
        self.defect_weight(x + dx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
    /// Steps are also capped at this fraction of `1 - |x|`, the distance to
    /// the singular points `x = ±1`.
    pub edge_fraction: f64,
    /// Largest weighted defect of the dense output inside an accepted step;
    /// steps exceeding it are retried with a smaller size.
    pub defect_tol: f64,
    /// `|u|` above this value stops the run as an escape.
    pub escape_cap: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            max_steps: 500_000,
            h_max: 0.05,
            edge_fraction: f64::INFINITY,
            defect_tol: f64::INFINITY,
            escape_cap: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
}

impl Node {
    pub fn new<O: ScalarOde>(ode: &O, x: f64, u: f64) -> Self {
        let du = ode.rate(x, u);
        Self {
            x,
            u,
            du,
            d2u: ode.second(x, u, du),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Reached,
    /// `|u|` crossed the escape cap (or stopped being finite) at `x`.
    Escaped {
        x: f64,
        u: f64,
    },
}

/// Accepted nodes of one run, in integration order.
#[derive(Debug, Clone)]
pub struct Run {
    pub nodes: Vec<Node>,
    pub end: Termination,
    pub rejected: usize,
}

impl Run {
    pub fn last(&self) -> &Node {
        self.nodes
            .last()
            .expect("a run always holds its initial node")
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Integrate from `(x0, u0)` to `x_end` (either direction).
///
/// The run ends early with [`Termination::Escaped`] when `|u|` exceeds
/// `ctl.escape_cap`. Step-size collapse without escape is an error.
pub fn integrate<O: ScalarOde>(
    ode: &O,
    x0: f64,
    u0: f64,
    x_end: f64,
    ctl: &StepControl,
) -> Result<Run> {
    let mut nodes = vec![Node::new(ode, x0, u0)];
    if x_end == x0 {
        return Ok(Run {
            nodes,
            end: Termination::Reached,
            rejected: 0,
        });
    }
    let dir = (x_end - x0).signum();
    let span = (x_end - x0).abs();
    let mut x = x0;
    let mut u = u0;
    let mut k1 = nodes[0].du;
    let mut h = initial_step(ode, x0, u0, k1, dir, span, ctl);
    let mut rejected = 0usize;
    let mut last_rejected = false;

    for _ in 0..ctl.max_steps {
        let remaining = (x_end - x).abs();
        let mut last = false;
        if ctl.edge_fraction.is_finite() && x.abs() < 1.0 {
            h = h.min(ctl.edge_fraction * (1.0 - x.abs()));
        }
        if h >= remaining {
            h = remaining;
            last = true;
        } else if h > 0.5 * remaining && h < remaining {
            // Split the tail evenly rather than leave a sliver.
            h = 0.5 * remaining;
        }
        if h <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            if u.abs() >= ctl.escape_cap.min(f64::MAX) * 0.125 {
                return Ok(Run {
                    nodes,
                    end: Termination::Escaped { x, u },
                    rejected,
                });
            }
            return Err(Error::StepUnderflow { x, h });
        }
        // Use the exactly representable step so stored nodes sit where the
        // stages were evaluated; this matters when `h` is near ulp(x) * 1e6.
        let x_new = if last { x_end } else { x + dir * h };
        let hs = x_new - x;

        let k2 = ode.rate_at(x, C2 * hs, u + hs * (A21 * k1));
        let k3 = ode.rate_at(x, C3 * hs, u + hs * (A31 * k1 + A32 * k2));
        let k4 = ode.rate_at(x, C4 * hs, u + hs * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = ode.rate_at(
            x,
            C5 * hs,
            u + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
        );
        let k6 = ode.rate(
            x_new,
            u + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        );
        let u_new = u + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = ode.rate(x_new, u_new);
        let est = hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let sc = ctl.atol + ctl.rtol * u.abs().max(u_new.abs());
        let err = (est / sc).abs();
        let err = if err.is_finite() && u_new.is_finite() {
            err
        } else {
            f64::INFINITY
        };

        let mut defect_fac = FAC_MAX;
        let mut candidate = None;
        if err <= 1.0 {
            let node = Node {
                x: x_new,
                u: u_new,
                du: k7,
                d2u: ode.second(x_new, u_new, k7),
            };
            let escaped = !u_new.is_finite() || u_new.abs() > ctl.escape_cap;
            // Below ~2^20 ulps of x the step length itself is coarsely
            // quantised, so the defect target is not enforced there.
            let resolvable = h > DEFECT_MIN_ULPS * f64::EPSILON * x.abs().max(1.0);
            if !escaped && resolvable && ctl.defect_tol.is_finite() {
                let d = step_defect(ode, nodes.last().unwrap(), &node, &DEFECT_POINTS);
                if d > 0.0 {
                    defect_fac = SAFETY * (ctl.defect_tol / d).powf(0.2);
                }
            }
            if escaped || defect_fac >= SAFETY {
                candidate = Some((node, escaped));
            }
        }

        if let Some((node, escaped)) = candidate {
            x = node.x;
            u = node.u;
            k1 = k7;
            if escaped {
                return Ok(Run {
                    nodes,
                    end: Termination::Escaped { x, u },
                    rejected,
                });
            }
            nodes.push(node);
            if last {
                return Ok(Run {
                    nodes,
                    end: Termination::Reached,
                    rejected,
                });
            }
            let mut fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            fac = fac.min(defect_fac.max(FAC_MIN));
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(ctl.h_max);
            last_rejected = false;
        } else {
            rejected += 1;
            let fac = if !err.is_finite() {
                0.1
            } else if err <= 1.0 {
                defect_fac.clamp(FAC_MIN, SAFETY)
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0)
            };
            h *= fac;
            last_rejected = true;
        }
    }
    Err(Error::MaxSteps {
        max_steps: ctl.max_steps,
        target: x_end,
    })
}

const DEFECT_MIN_ULPS: f64 = 1048576.0;

/// Dense-output sample points inside a step, as fractions of its length.
pub const DEFECT_POINTS: [f64; 3] = [0.2, 0.5, 0.8];

/// Largest weighted defect `w(x) |u_hat'(x) - rate(x, u_hat(x))|` of the
/// interpolant between `a` and `b` at the step fractions `ts`.
pub fn step_defect<O: ScalarOde>(ode: &O, a: &Node, b: &Node, ts: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in ts {
        let dx = t * (b.x - a.x);
        let (u, du) = hermite5(a, b, t);
        let d = ode.defect_weight_at(a.x, dx) * (du - ode.rate_at(a.x, dx, u)).abs();
        worst = if d.is_nan() {
            f64::INFINITY
        } else {
            worst.max(d)
        };
    }
    worst
}

fn initial_step<O: ScalarOde>(
    ode: &O,
    x0: f64,
    u0: f64,
    f0: f64,
    dir: f64,
    span: f64,
    ctl: &StepControl,
) -> f64 {
    let sc = ctl.atol + ctl.rtol * u0.abs();
    let d0 = u0.abs() / sc;
    let d1 = f0.abs() / sc;
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let f1 = ode.rate(x0 + dir * h0, u0 + dir * h0 * f0);
    let d2 = ((f1 - f0) / sc).abs() / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 || !dm.is_finite() {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span).min(ctl.h_max)
}

/// Piecewise quintic Hermite interpolant through sorted nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrack {
    nodes: Vec<Node>,
}

impl DenseTrack {
    /// Builds a track from nodes in any order; duplicate abscissae are merged.
    pub fn from_nodes(mut nodes: Vec<Node>) -> Self {
        nodes.sort_by(|a, b| a.x.total_cmp(&b.x));
        nodes.dedup_by(|a, b| a.x == b.x);
        Self { nodes }
    }

    /// Joins runs that share their starting node (e.g. integrations from
    /// `x = 0` toward both poles).
    pub fn from_runs<'a, I: IntoIterator<Item = &'a Run>>(runs: I) -> Self {
        Self::from_nodes(
            runs.into_iter()
                .flat_map(|r| r.nodes.iter().copied())
                .collect(),
        )
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn lo(&self) -> f64 {
        self.nodes.first().map_or(f64::NAN, |n| n.x)
    }

    pub fn hi(&self) -> f64 {
        self.nodes.last().map_or(f64::NAN, |n| n.x)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    fn locate(&self, x: f64) -> Result<(usize, f64)> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain {
                x,
                lo: self.lo(),
                hi: self.hi(),
            });
        }
        let n = self.nodes.len();
        if n == 1 {
            return Ok((0, 0.0));
        }
        let i = match self.nodes.binary_search_by(|p| p.x.total_cmp(&x)) {
            Ok(i) => return Ok((i.min(n - 2), if i == n - 1 { 1.0 } else { 0.0 })),
            Err(i) => i - 1,
        };
        let h = self.nodes[i + 1].x - self.nodes[i].x;
        Ok((i, (x - self.nodes[i].x) / h))
    }

    /// Interpolated `(u, u')` at `x`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let (i, t) = self.locate(x)?;
        if self.nodes.len() == 1 {
            let n = self.nodes[0];
            return Ok((n.u, n.du));
        }
        let a = self.nodes[i];
        let b = self.nodes[i + 1];
        Ok(hermite5(&a, &b, t))
    }
}

/// Quintic Hermite value and x-derivative between `a` and `b` at `t in [0, 1]`.
fn hermite5(a: &Node, b: &Node, t: f64) -> (f64, f64) {
    let h = b.x - a.x;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;

    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h3 = 0.5 * t3 - t4 + 0.5 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;

    let d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d2 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
    let d3 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
    let d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d5 = -d0;

    let hh = h * h;
    let u = a.u * h0 + h * a.du * h1 + hh * a.d2u * h2 + hh * b.d2u * h3 + h * b.du * h4 + b.u * h5;
    let du = (a.u * d0 + b.u * d5) / h + a.du * d1 + b.du * d4 + h * (a.d2u * d2 + b.d2u * d3);
    (u, du)
}
