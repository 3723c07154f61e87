//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the output.
//! Every criterion has an oracle written here, independent of the library
//! code under test where that is possible. The process exits non-zero if a
//! criterion fails unexpectedly. Criterion 7 is a known failure; its line
//! stays red and the process instead asserts the conditions recorded with it
//! (see `criterion_7`).

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use nsaxi_core::fields::landau_derivs;
use nsaxi_core::grid::{chebyshev, linspace, pole_refined};
use nsaxi_core::verify::{
    check_endpoint_table, check_fields, check_foliation, check_uniqueness_at_boundary, run_check,
    CheckKind, LOG_TOL,
};
use nsaxi_core::{
    c3_bar, endpoint_match, explore, gamma_minus, gamma_plus, reconstruct, solve_ivp,
    tau_constants, Params, Pole, PoleOutcome, SampleSet, SolutionCurve, SolverOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p(c1: f64, c2: f64, c3: f64) -> Params {
    Params::new(c1, c2, c3)
}

/// Residual of the reduced equation, written out independently.
fn residual(c: &Params, x: f64, u: f64, du: f64) -> f64 {
    let pc = c.c1 * (1.0 - x) + c.c2 * (1.0 + x) + c.c3 * (1.0 - x * x);
    (1.0 - x * x) * du + 2.0 * x * u + 0.5 * u * u - pc
}

fn landau_u(lambda: f64, x: f64) -> f64 {
    2.0 * (1.0 - x * x) / (x + lambda)
}

/// Closed form on `c3 = c3_bar`.
fn u_star(c1: f64, c2: f64, x: f64) -> f64 {
    (1.0 + (1.0 + c1).sqrt()) * (1.0 - x) - (1.0 + (1.0 + c2).sqrt()) * (1.0 + x)
}

const LAMBDAS: [f64; 5] = [1.5, -1.5, 2.0, -2.0, 5.0];
const BOUNDARY_PAIRS: [(f64, f64); 4] = [(0.0, 0.0), (3.0, 0.0), (0.0, 3.0), (-1.0, -1.0)];

fn reflection_grid() -> Vec<Params> {
    let cs = [-1.0, -0.5, 0.0, 1.0, 3.0];
    let mut out = Vec::new();
    for &c1 in &cs {
        for &c2 in &cs {
            let bar = c3_bar(c1, c2).unwrap();
            for d in [0.5, 2.0, 5.0] {
                out.push(p(c1, c2, bar + d));
            }
        }
    }
    out
}

fn ulps(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

fn criterion_1() -> Outcome {
    for (c1, c2, want) in [(0.0, 0.0, -4.0), (-1.0, -1.0, 0.0), (3.0, 0.0, -7.5)] {
        let got = c3_bar(c1, c2).unwrap();
        ensure(ulps(got, want) <= 1, || {
            format!("c3_bar({c1},{c2}) = {got}, want {want}")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c1 = rng.gen_range(-1.0..3.0);
        let t = tau_constants(c1, rng.gen_range(-1.0..3.0)).unwrap();
        let a = (t.tau2 - 2.0).powi(2) - 4.0 * (1.0 + c1);
        let b = (t.tau1 - 2.0).powi(2) - 4.0 * (1.0 + c1);
        worst = worst.max(a.abs()).max(b.abs());
    }
    ensure(worst <= 1e-14, || format!("tau identity error {worst:e}"))?;
    Ok(format!(
        "c3_bar exact to 1 ulp; tau identity max error {worst:.1e} over 1000 draws"
    ))
}

fn landau_curves() -> Vec<(f64, SolutionCurve)> {
    LAMBDAS
        .iter()
        .map(|&l| (l, solve_ivp(&Params::ZERO, 2.0 / l).unwrap()))
        .collect()
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for (l, curve) in landau_curves() {
        for x in linspace(-0.99, 0.99, 1981) {
            worst = worst.max((curve.eval(x).unwrap() - landau_u(l, x)).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("sup error {worst:e}"))?;
    Ok(format!("sup |U - Landau| = {worst:.2e} (bound 1e-8)"))
}

fn criterion_3() -> Outcome {
    // The oracle curves 2(1-x) and -2(1+x) solve the equation at c = 0.
    for x in linspace(-0.9, 0.9, 19) {
        ensure(
            residual(&Params::ZERO, x, 2.0 * (1.0 - x), -2.0).abs() < 1e-14,
            || "U+ oracle".into(),
        )?;
        ensure(
            residual(&Params::ZERO, x, -2.0 * (1.0 + x), -2.0).abs() < 1e-14,
            || "U- oracle".into(),
        )?;
    }
    let gp = gamma_plus(&Params::ZERO).unwrap();
    let gm = gamma_minus(&Params::ZERO).unwrap();
    ensure((gp - 2.0).abs() <= 1e-8 && (gm + 2.0).abs() <= 1e-8, || {
        format!("gamma+- = {gp}, {gm}")
    })?;
    for (c1, c2) in BOUNDARY_PAIRS {
        let c = p(c1, c2, c3_bar(c1, c2).unwrap());
        let want = u_star(c1, c2, 0.0);
        for g in [gamma_plus(&c).unwrap(), gamma_minus(&c).unwrap()] {
            ensure((g - want).abs() <= 1e-10, || {
                format!("boundary ({c1},{c2}): {g} vs {want}")
            })?;
        }
    }
    let mut worst: f64 = 0.0;
    for c in reflection_grid() {
        let a = gamma_plus(&c).unwrap() + gamma_minus(&c.reflect()).unwrap();
        let b = gamma_minus(&c).unwrap() + gamma_plus(&c.reflect()).unwrap();
        worst = worst.max(a.abs()).max(b.abs());
    }
    ensure(worst <= 1e-9, || format!("reflection defect {worst:e}"))?;
    Ok(format!(
        "gamma+-(0) = {gp}, {gm}; boundary values within 1e-10; reflection defect {worst:.1e} on 75 points"
    ))
}

fn criterion_4() -> Outcome {
    let opts = SolverOptions::default();
    let xs = linspace(-0.999, 0.999, 1999);
    let mut worst: f64 = 0.0;
    for (c1, c2) in BOUNDARY_PAIRS {
        let c = p(c1, c2, c3_bar(c1, c2).unwrap());
        let g = u_star(c1, c2, 0.0);
        let curve = solve_ivp(&c, g).unwrap();
        // The raw outward integration, independent of the closed-form shortcut.
        let raw = explore(&c, g, &opts).unwrap();
        ensure(raw.global(), || {
            format!("({c1},{c2}): raw integration escaped")
        })?;
        for &x in &xs {
            let exact = u_star(c1, c2, x);
            worst = worst
                .max((curve.eval(x).unwrap() - exact).abs())
                .max((raw.eval(x).unwrap() - exact).abs());
        }
        for dg in [1e-3, -1e-3] {
            let e = explore(&c, g + dg, &opts).unwrap();
            ensure(
                matches!(e.south, PoleOutcome::Escaped { .. })
                    || matches!(e.north, PoleOutcome::Escaped { .. }),
                || format!("({c1},{c2}) gamma offset {dg}: reached both poles"),
            )?;
        }
        let check = check_uniqueness_at_boundary(c1, c2, &opts).unwrap();
        ensure(check.passed, || {
            format!("uniqueness check ({c1},{c2}): {}", check.detail)
        })?;
    }
    ensure(worst <= 1e-8, || format!("sup error {worst:e}"))?;
    Ok(format!(
        "sup |U - U*| = {worst:.2e}; all +-1e-3 offsets escape"
    ))
}

fn criterion_5() -> Outcome {
    let xs = chebyshev(1000);
    let mut curves: Vec<SolutionCurve> = landau_curves().into_iter().map(|(_, c)| c).collect();
    curves.push(solve_ivp(&Params::ZERO, 2.0).unwrap());
    curves.push(solve_ivp(&Params::ZERO, -2.0).unwrap());
    for (c1, c2) in BOUNDARY_PAIRS {
        let c = p(c1, c2, c3_bar(c1, c2).unwrap());
        curves.push(solve_ivp(&c, u_star(c1, c2, 0.0)).unwrap());
    }
    for c in reflection_grid() {
        for r in [c, c.reflect()] {
            curves.push(solve_ivp(&r, gamma_plus(&r).unwrap()).unwrap());
            curves.push(solve_ivp(&r, gamma_minus(&r).unwrap()).unwrap());
        }
    }
    // Slopes must not come from the equation itself: use the stored curve's
    // own derivative (library) and a finite difference of its values (here).
    let mut worst: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for curve in &curves {
        let u = |x: f64| curve.eval(x).unwrap();
        for &x in &xs {
            worst = worst.max(curve.residual(x).unwrap().abs());
            // Near a pole U behaves like tau + a s^alpha, so the stencil must
            // stay well inside the distance s to keep its truncation error small.
            let h = (0.01 * (1.0 - x.abs())).min(1e-3);
            worst_fd = worst_fd.max(residual(curve.params(), x, u(x), d1(u, x, h)).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max residual {worst:e}"))?;
    ensure(worst_fd <= 1e-9, || {
        format!("max finite-difference residual {worst_fd:e}")
    })?;
    Ok(format!(
        "max residual {worst:.2e} (finite-difference slope {worst_fd:.2e}) over {} curves x 1000 points",
        curves.len()
    ))
}

fn criterion_6() -> Outcome {
    let opts = SolverOptions::default();
    let c = p(0.0, 0.0, 1.0);
    let (lo, hi) = (gamma_minus(&c).unwrap(), gamma_plus(&c).unwrap());
    let gammas: Vec<f64> = (1..=9).map(|i| lo + (hi - lo) * i as f64 / 10.0).collect();
    let curves: Vec<SolutionCurve> = gammas.iter().map(|&g| solve_ivp(&c, g).unwrap()).collect();
    let mut min_gap = f64::INFINITY;
    for x in chebyshev(1000) {
        for w in curves.windows(2) {
            min_gap = min_gap.min(w[1].eval(x).unwrap() - w[0].eval(x).unwrap());
        }
    }
    ensure(min_gap > 0.0, || format!("smallest gap {min_gap:e}"))?;
    let lib = check_foliation(&c, &gammas, &opts).unwrap();
    ensure(lib.passed, || lib.detail.clone())?;

    // Expected pole limits: interior and U- take tau1 in the south, interior
    // and U+ take tau2' in the north; U+ takes tau2, U- takes tau1'.
    let mut samples = Vec::new();
    let mut worst: f64 = 0.0;
    for c in [p(0.0, 0.0, 0.0), p(3.0, 0.0, 0.0), p(0.0, 3.0, 0.0)] {
        let s1 = 2.0 * (1.0 + c.c1).sqrt();
        let s2 = 2.0 * (1.0 + c.c2).sqrt();
        let (gm, gp) = (gamma_minus(&c).unwrap(), gamma_plus(&c).unwrap());
        for (g, south, north) in [
            (gm, 2.0 - s1, -2.0 - s2),
            (0.5 * (gm + gp), 2.0 - s1, -2.0 + s2),
            (gp, 2.0 + s1, -2.0 + s2),
        ] {
            let curve = solve_ivp(&c, g).unwrap();
            for (pole, want) in [(Pole::South, south), (Pole::North, north)] {
                let m = endpoint_match(&curve, pole, &opts).unwrap();
                ensure(m.value == want, || {
                    format!("{c:?} gamma={g} {pole}: {} vs {want}", m.value)
                })?;
                let rel = (m.extrapolated - want).abs() / want.abs().max(1.0);
                ensure(rel <= opts.match_tol, || {
                    format!("{c:?} gamma={g} {pole}: extrapolated {}", m.extrapolated)
                })?;
                worst = worst.max(rel);
            }
            samples.push((c, g));
        }
    }
    let table = check_endpoint_table(&samples, &opts);
    ensure(table.passed, || table.detail.clone())?;
    Ok(format!(
        "smallest gap {min_gap:.2e} > 0; endpoint limits matched, worst extrapolation distance {worst:.1e}"
    ))
}

/// `g(s) = (U - 2) ln(s/3)` along the south sequence `s = 10^-k`, `k = 3..=8`.
fn south_sequence(u: impl Fn(f64) -> f64) -> Vec<f64> {
    (3..=8)
        .map(|k| {
            let s = 10f64.powi(-k);
            (u(-1.0 + s) - 2.0) * (s / 3.0).ln()
        })
        .collect()
}

/// Independent oracle for `c = (-1, 0, 0)`, `U(0) = 0`: classical RK4 in
/// `t = ln(1 + x)` from `t = 0` to `ln(1e-8)`, where the equation reads
/// `dU/dt = (P - 2xU - U^2/2) / (1 - x)` with `P = -(1 - x)`.
fn rk4_log_oracle(steps_per_unit: usize) -> Vec<f64> {
    let f = |t: f64, u: f64| {
        let x = t.exp_m1();
        (-(1.0 - x) - 2.0 * x * u - 0.5 * u * u) / (1.0 - x)
    };
    let mut out = Vec::new();
    let (mut t, mut u) = (0.0f64, 0.0f64);
    for k in 3..=8 {
        let target = (10f64.powi(-k)).ln();
        let n = ((t - target) * steps_per_unit as f64).ceil() as usize;
        let h = (target - t) / n as f64;
        for _ in 0..n {
            let k1 = f(t, u);
            let k2 = f(t + 0.5 * h, u + 0.5 * h * k1);
            let k3 = f(t + 0.5 * h, u + 0.5 * h * k2);
            let k4 = f(t + h, u + h * k3);
            u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        t = target;
        let s = 10f64.powi(-k);
        out.push((u - 2.0) * (s / 3.0).ln());
    }
    out
}

/// Known red: the required bound `|g(1e-8) - 4| <= 0.35` is not met.
///
/// The computed sequence is monotone toward 4 but ends at about 3.39. An
/// independent RK4 integration in `ln s` agrees with it to better than
/// 1e-6, so the gap is a property of the solution and not a solver error:
/// near the pole `v = 1/(U - 2)` obeys `dv/d ln s = -1/4 + O(s)`, giving
/// `g = 4 ln(s/3) / ln(s/s0)` with `s0` near 100, which approaches 4 only
/// like `1/|ln s|`. The returned `Err` keeps the line red; the panics below
/// are the conditions this process does enforce.
fn criterion_7() -> Outcome {
    let south = solve_ivp(&p(-1.0, 0.0, 0.0), 0.0).unwrap();
    let north = solve_ivp(&p(0.0, -1.0, 0.0), 0.0).unwrap();
    let gs = south_sequence(|x| south.eval(x).unwrap());
    let gn: Vec<f64> = (3..=8)
        .map(|k| {
            let s = 10f64.powi(-k);
            (north.eval(1.0 - s).unwrap() + 2.0) * (s / 3.0).ln()
        })
        .collect();
    let monotone = |g: &[f64], target: f64| {
        g.windows(2)
            .all(|w| (w[1] - target).abs() < (w[0] - target).abs())
    };
    assert!(
        monotone(&gs, 4.0),
        "south sequence not monotone toward 4: {gs:?}"
    );
    assert!(
        monotone(&gn, -4.0),
        "north sequence not monotone toward -4: {gn:?}"
    );
    for (a, b) in gs.iter().zip(&gn) {
        assert!(
            (a + b).abs() < 1e-8,
            "north sequence is not the mirror of the south one"
        );
    }
    let oracle = rk4_log_oracle(20_000);
    for (a, b) in gs.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-6, "solver {a} vs RK4 oracle {b}");
    }
    let set = SampleSet::default_set();
    for r in run_check(CheckKind::LogAsymptotics, &set, &SolverOptions::default()) {
        assert!(
            r.witnesses.iter().all(|w| w.value.is_finite()),
            "{}: {}",
            r.name,
            r.detail
        );
    }

    let south_err = (gs[5] - 4.0).abs();
    let north_err = (gn[5] + 4.0).abs();
    let summary = format!(
        "g south {gs:.4?}; north {gn:.4?}; |g(1e-8) -+ 4| = {south_err:.4}, {north_err:.4}; RK4 oracle agrees"
    );
    if south_err <= LOG_TOL && north_err <= LOG_TOL {
        Ok(summary)
    } else {
        Err(format!(
            "{summary}; exceeds the bound {LOG_TOL} (unattainable, see notes)"
        ))
    }
}

fn criterion_8() -> Outcome {
    let set = SampleSet::default_set();
    let results = run_check(CheckKind::ParamDerivatives, &set, &SolverOptions::default());
    ensure(results.len() == 3, || {
        format!("{} strata checked", results.len())
    })?;
    for r in &results {
        ensure(r.passed, || {
            format!("{}: measured {} ({})", r.name, r.measured, r.detail)
        })?;
    }
    // Independent central differences in c1 on I_{1,1} (weight 1).
    let xs = pole_refined(200, 7);
    let fd = |h: f64| -> f64 {
        let up = solve_ivp(&p(h, 0.0, 1.0), 0.0).unwrap();
        let um = solve_ivp(&p(-h, 0.0, 1.0), 0.0).unwrap();
        xs.iter()
            .map(|&x| ((up.eval(x).unwrap() - um.eval(x).unwrap()) / (2.0 * h)).abs())
            .fold(0.0, f64::max)
    };
    let (a, b) = (fd(1e-5), fd(5e-6));
    let change = (a - b).abs() / a.max(b);
    ensure(change < 0.1, || {
        format!("c1 derivative changed by {change} on halving")
    })?;
    let measured: Vec<String> = results
        .iter()
        .map(|r| format!("{} {:.3}", r.name, r.measured))
        .collect();
    Ok(format!(
        "{}; independent d/dc1 max {a:.4} (change {change:.1e})",
        measured.join(", ")
    ))
}

/// Sixth-order central difference.
fn d1(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-f(t - 3.0 * h) + 9.0 * f(t - 2.0 * h) - 45.0 * f(t - h) + 45.0 * f(t + h)
        - 9.0 * f(t + 2.0 * h)
        + f(t + 3.0 * h))
        / (60.0 * h)
}

fn criterion_9() -> Outcome {
    let curve = solve_ivp(&Params::ZERO, 1.0).unwrap();
    // Divergence-free condition in theta: u_r = -(1/sin) d(sin u_theta)/dtheta,
    // and sin(theta) u_theta = U(cos theta).
    let mut worst: f64 = 0.0;
    for x in linspace(-0.95, 0.95, 100) {
        let theta = x.acos();
        let f = reconstruct(&curve, 1.0, x).unwrap();
        let flux = |t: f64| curve.eval(t.cos()).unwrap();
        let fd = -d1(flux, theta, 1e-3) / theta.sin();
        worst = worst.max((f.u_r - fd).abs());
        // Homogeneity is exact.
        let g = reconstruct(&curve, 2.0, x).unwrap();
        ensure(
            g.u_r == f.u_r / 2.0 && g.u_theta == f.u_theta / 2.0 && g.p == f.p / 4.0,
            || format!("homogeneity at x={x}"),
        )?;
        // Pressure agrees with the exact Landau derivatives.
        let d = landau_derivs(2.0, x).unwrap();
        let w = 1.0 - x * x;
        let p_exact = -0.5 * (w * d[3] - (2.0 * x - d[0]) * d[2] + d[1] * d[1] + d[0] * d[0] / w);
        ensure((f.p - p_exact).abs() <= 1e-8, || {
            format!("pressure at x={x}: {} vs {p_exact}", f.p)
        })?;
    }
    ensure(worst <= 1e-8, || format!("u_r identity residual {worst:e}"))?;
    let checks = check_fields(2.0, &SolverOptions::default()).unwrap();
    for c in &checks {
        ensure(c.passed, || {
            format!("{}: {} ({})", c.name, c.measured, c.detail)
        })?;
    }
    let pressure = checks.iter().find(|c| c.name == "field_pressure").unwrap();
    Ok(format!(
        "u_r identity residual {worst:.1e}; homogeneity exact; pressure FD drift check {:.1e}",
        pressure.measured
    ))
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_nsaxi");
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let golden = include_bytes!("golden/solve_c0_gamma1_grid5.csv");
    let out = run(&[
        "solve", "--c1", "0", "--c2", "0", "--c3", "0", "--gamma", "1", "--grid", "5", "--format",
        "csv",
    ]);
    ensure(out.status.code() == Some(0), || "solve failed".into())?;
    ensure(out.stdout == golden, || "golden file mismatch".into())?;
    // The golden rows themselves against the Landau lambda = 2 closed form.
    let text = std::str::from_utf8(golden).unwrap();
    for (i, line) in text.lines().skip(1).enumerate() {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let x = v[0];
        let d = landau_derivs(2.0, x).unwrap();
        ensure(
            (v[1] - d[0]).abs() < 1e-8 && (v[2] - d[1]).abs() < 1e-8,
            || format!("golden row {i}"),
        )?;
        ensure((v[4] - d[0] / (1.0 - x * x).sqrt()).abs() < 1e-8, || {
            format!("golden row {i} u_theta")
        })?;
        if i == 2 {
            ensure(
                x == 0.0 && v[1] == 1.0 && v[4] == 1.0 && v[3] == -0.5,
                || "middle row".into(),
            )?;
        }
    }
    ensure(
        run(&["gamma", "--c3", "-5"]).status.code() == Some(2),
        || "exit 2".into(),
    )?;
    ensure(
        run(&["solve", "--gamma", "2.5"]).status.code() == Some(2),
        || "exit 2 (outside I)".into(),
    )?;
    let usage = run(&["solve", "--gamma", "x"]);
    ensure(usage.status.code() == Some(1), || "exit 1".into())?;
    ensure(
        String::from_utf8_lossy(&usage.stderr).contains("Usage"),
        || "usage text".into(),
    )?;
    let verify = run(&["verify"]);
    ensure(verify.status.code() == Some(0), || {
        String::from_utf8_lossy(&verify.stderr).into_owned()
    })?;
    Ok("golden bytes equal; exit codes 2 and 1 as specified; verify default suite exits 0".into())
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    known_red: bool,
    run: fn() -> Outcome,
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion {
            id: 1,
            name: "boundary formulas",
            limit: secs(1),
            known_red: false,
            run: criterion_1,
        },
        Criterion {
            id: 2,
            name: "Landau oracle",
            limit: secs(5),
            known_red: false,
            run: criterion_2,
        },
        Criterion {
            id: 3,
            name: "extremal surface",
            limit: secs(30),
            known_red: false,
            run: criterion_3,
        },
        Criterion {
            id: 4,
            name: "uniqueness on the boundary",
            limit: secs(10),
            known_red: false,
            run: criterion_4,
        },
        Criterion {
            id: 5,
            name: "ODE residual",
            limit: None,
            known_red: false,
            run: criterion_5,
        },
        Criterion {
            id: 6,
            name: "foliation and endpoint table",
            limit: None,
            known_red: false,
            run: criterion_6,
        },
        Criterion {
            id: 7,
            name: "log asymptotics",
            limit: secs(10),
            known_red: true,
            run: criterion_7,
        },
        Criterion {
            id: 8,
            name: "parameter derivatives",
            limit: secs(60),
            known_red: false,
            run: criterion_8,
        },
        Criterion {
            id: 9,
            name: "field reconstruction",
            limit: None,
            known_red: false,
            run: criterion_9,
        },
        Criterion {
            id: 10,
            name: "CLI contract",
            limit: None,
            known_red: false,
            run: criterion_10,
        },
    ];
    let filter: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut unexpected = 0;
    for c in criteria
        .iter()
        .filter(|c| filter.is_empty() || filter.contains(&c.id))
    {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run));
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(Ok(d)) => match c.limit {
                Some(l) if elapsed > l => (false, format!("{d}; took {elapsed:?}, limit {l:?}")),
                _ => (true, d),
            },
            Ok(Err(d)) => (false, d),
            Err(_) => {
                unexpected += 1;
                println!(
                    "criterion {:>2} FAIL {}: enforced condition violated",
                    c.id, c.name
                );
                continue;
            }
        };
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict} {} [{:.2?}]: {detail}",
            c.id, c.name, elapsed
        );
        if !passed && !c.known_red {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected acceptance failure(s)");
        std::process::exit(1);
    }
}
