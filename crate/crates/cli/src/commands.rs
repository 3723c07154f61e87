//! Subcommand implementations.

use std::fs;
use std::io::Write;

use nsaxi_core::grid::{chebyshev, linspace};
use nsaxi_core::verify::{parse_suite, run_check};
use nsaxi_core::{
    classify_with, gamma_minus_with, gamma_plus_with, reconstruct, sample_grid, solve_ivp_with,
    BoundaryPosition, Degeneracy, Error, Params, Report, SampleSet, SolverOptions, Stratum,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{write_json, write_table, Cell, ConfigEcho, Record, Table};
use crate::Command;

pub const SOLVE_COLUMNS: [&str; 6] = ["x", "U", "dU", "u_r", "u_theta", "p"];
pub const SURFACE_COLUMNS: [&str; 7] = [
    "c1",
    "c2",
    "c3",
    "c3_bar",
    "gamma_plus",
    "gamma_minus",
    "status",
];
pub const FIELD_COLUMNS: [&str; 6] = ["r", "x", "u_r", "u_theta", "u_phi", "p"];
pub const GAMMA_COLUMNS: [&str; 8] = [
    "c1",
    "c2",
    "c3",
    "c3_bar",
    "gamma_plus",
    "gamma_minus",
    "on_boundary",
    "degeneracy",
];
pub const CLASSIFY_COLUMNS: [&str; 8] = ["c1", "c2", "c3", "gamma", "stratum", "k", "l", "clamped"];

/// Run `cmd` and return the exit code; errors carry their own code.
pub fn dispatch(
    cmd: &Command,
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let opts = cfg.solver_options();
    let (name, inputs, body) = match cmd {
        Command::Gamma { c } => {
            let p = params(c.c1, c.c2, c.c3);
            ("gamma", params_record(&p), Body::Table(gamma(&p, &opts)?))
        }
        Command::Solve { c, gamma } => {
            let p = params(c.c1, c.c2, c.c3);
            let mut inputs = params_record(&p);
            inputs.push("gamma", Cell::Num(*gamma));
            (
                "solve",
                inputs,
                Body::Table(solve(&p, *gamma, cfg.grid, &opts)?),
            )
        }
        Command::Surface { c1, c2, c3, range } => {
            let axis = |v: &Option<String>| -> Result<(String, Vec<f64>), CliError> {
                let spec = v
                    .clone()
                    .or_else(|| range.clone())
                    .unwrap_or_else(|| "0".into());
                let vals = parse_axis(&spec)?;
                Ok((spec, vals))
            };
            let (s1, a1) = axis(c1)?;
            let (s2, a2) = axis(c2)?;
            let (s3, a3) = axis(c3)?;
            let mut inputs = Record::default();
            inputs.push("c1", Cell::Text(s1));
            inputs.push("c2", Cell::Text(s2));
            inputs.push("c3", Cell::Text(s3));
            let (table, failures) = surface(&a1, &a2, &a3, cfg.jobs, &opts)?;
            for f in &failures {
                let _ = writeln!(stderr, "nsaxi: {f}");
            }
            if cfg.strict && !failures.is_empty() {
                return Err(CliError::Numerical(format!(
                    "{} grid point(s) failed",
                    failures.len()
                )));
            }
            ("surface", inputs, Body::Table(table))
        }
        Command::Field {
            lambda,
            c,
            gamma,
            range,
        } => {
            let (p, g) = match lambda {
                Some(l) if *l == 0.0 => {
                    return Err(CliError::Usage("lambda must be nonzero".into()))
                }
                Some(l) => (Params::ZERO, 2.0 / l),
                None => (
                    params(c.c1, c.c2, c.c3),
                    gamma.expect("required by the parser"),
                ),
            };
            let spec = range.clone().unwrap_or_else(|| "1".into());
            let radii = parse_axis(&spec)?;
            if let Some(r) = radii.iter().find(|r| r.is_nan() || **r <= 0.0) {
                return Err(CliError::Usage(format!("radius {r} must be positive")));
            }
            let mut inputs = params_record(&p);
            inputs.push("gamma", Cell::Num(g));
            if let Some(l) = lambda {
                inputs.push("lambda", Cell::Num(*l));
            }
            inputs.push("r", Cell::Text(spec));
            let (table, failures) = field(&p, g, &radii, cfg.grid, &opts)?;
            for f in &failures {
                let _ = writeln!(stderr, "nsaxi: {f}");
            }
            if cfg.strict && !failures.is_empty() {
                return Err(CliError::Numerical(format!(
                    "{} sample(s) failed",
                    failures.len()
                )));
            }
            ("field", inputs, Body::Table(table))
        }
        Command::Verify { .. } => {
            let report = verify(cfg, &opts)?;
            for r in &report.checks {
                let _ = writeln!(
                    stderr,
                    "{} {} measured={:e} bound={:e}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.measured,
                    r.bound
                );
            }
            let mut inputs = Record::default();
            inputs.push("suite", Cell::Text(cfg.suite.clone()));
            inputs.push("sample_set", Cell::Text(cfg.sample_set.clone()));
            ("verify", inputs, Body::Report(report))
        }
        Command::Classify { c, gamma } => {
            let p = params(c.c1, c.c2, c.c3);
            let mut inputs = params_record(&p);
            inputs.push("gamma", Cell::Num(*gamma));
            (
                "classify",
                inputs,
                Body::Table(classify(&p, *gamma, &opts)?),
            )
        }
    };

    let echo = ConfigEcho {
        command: name,
        inputs,
        settings: cfg,
    };
    let mut buf = Vec::new();
    let code = match &body {
        Body::Table(t) => {
            write_table(t, cfg.format, &echo, &mut buf)?;
            0
        }
        // Reports are always JSON.
        Body::Report(r) => {
            write_json(&echo, Some(r.passed), &r.checks, &mut buf)?;
            if r.passed {
                0
            } else {
                3
            }
        }
    };
    match &cfg.out {
        Some(path) => fs::write(path, &buf)?,
        None => stdout.write_all(&buf)?,
    }
    Ok(code)
}

enum Body {
    Table(Table),
    Report(Report),
}

fn params(c1: f64, c2: f64, c3: f64) -> Params {
    Params::new(c1, c2, c3)
}

fn params_record(p: &Params) -> Record {
    let mut r = Record::default();
    r.push("c1", Cell::Num(p.c1));
    r.push("c2", Cell::Num(p.c2));
    r.push("c3", Cell::Num(p.c3));
    r
}

/// A single value `v` or `start:stop:count` with `count >= 1`.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("range '{spec}': {why}"));
    let num = |s: &str| -> Result<f64, CliError> {
        match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(bad("bounds must be finite numbers")),
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| bad("count must be a positive integer"))?;
            if n == 0 {
                return Err(bad("count must be a positive integer"));
            }
            if n == 1 && a != b {
                return Err(bad("a single point needs start == stop"));
            }
            Ok(linspace(a, b, n))
        }
        _ => Err(bad("expected a value or start:stop:count")),
    }
}

fn require_in_j(p: &Params, opts: &SolverOptions) -> Result<Params, CliError> {
    if !p.in_j(&opts.tolerances) {
        return Err(Error::NotInJ {
            c1: p.c1,
            c2: p.c2,
            c3: p.c3,
        }
        .into());
    }
    Ok(p.admissible(&opts.tolerances)?.params)
}

pub fn gamma(p: &Params, opts: &SolverOptions) -> Result<Table, CliError> {
    let q = require_in_j(p, opts)?;
    let bar = q.c3_bar()?;
    let gp = gamma_plus_with(&q, opts)?;
    let gm = gamma_minus_with(&q, opts)?;
    let on = q.boundary_position(&opts.tolerances)? == BoundaryPosition::On;
    let mut t = Table::new(&GAMMA_COLUMNS);
    t.push(vec![
        Cell::Num(p.c1),
        Cell::Num(p.c2),
        Cell::Num(p.c3),
        Cell::Num(bar),
        Cell::Num(gp),
        Cell::Num(gm),
        Cell::Bool(on),
        Cell::Int(Degeneracy::of(&q).k() as i64),
    ]);
    Ok(t)
}

/// Rows for the profile `U^{c,gamma}` on the Chebyshev grid. Rows whose
/// fields cannot be evaluated this close to a pole are null-marked.
pub fn solve(p: &Params, gamma: f64, n: usize, opts: &SolverOptions) -> Result<Table, CliError> {
    let curve = solve_ivp_with(p, gamma, opts)?;
    let mut t = Table::new(&SOLVE_COLUMNS);
    for x in chebyshev(n) {
        let profile = match curve.derivs(x) {
            Ok(d) => Some(d),
            Err(Error::OutOfDomain { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let fields = match reconstruct(&curve, 1.0, x) {
            Ok(f) => Some(f),
            Err(Error::PoleProximity { .. } | Error::OutOfDomain { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        t.push(vec![
            Cell::Num(x),
            Cell::opt(profile.map(|d| d[0])),
            Cell::opt(profile.map(|d| d[1])),
            Cell::opt(fields.map(|f| f.u_r)),
            Cell::opt(fields.map(|f| f.u_theta)),
            Cell::opt(fields.map(|f| f.p)),
        ]);
    }
    Ok(t)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("jobs = {jobs}: {e}")))
}

/// `gamma_plus`/`gamma_minus` over the product grid, `c1` outermost. Points
/// outside `J` and solver failures are null-marked; failures are also
/// returned as messages.
pub fn surface(
    c1: &[f64],
    c2: &[f64],
    c3: &[f64],
    jobs: usize,
    opts: &SolverOptions,
) -> Result<(Table, Vec<String>), CliError> {
    let mut points = Vec::with_capacity(c1.len() * c2.len() * c3.len());
    for &a in c1 {
        for &b in c2 {
            for &c in c3 {
                points.push(Params::new(a, b, c));
            }
        }
    }
    let rows: Vec<(Vec<Cell>, Option<String>)> =
        pool(jobs)?.install(|| points.par_iter().map(|p| surface_row(p, opts)).collect());
    let mut t = Table::new(&SURFACE_COLUMNS);
    let mut failures = Vec::new();
    for (row, failure) in rows {
        t.push(row);
        failures.extend(failure);
    }
    Ok((t, failures))
}

fn surface_row(p: &Params, opts: &SolverOptions) -> (Vec<Cell>, Option<String>) {
    let bar = p.c3_bar().ok();
    let head = vec![
        Cell::Num(p.c1),
        Cell::Num(p.c2),
        Cell::Num(p.c3),
        Cell::opt(bar),
    ];
    let finish = |gp: Option<f64>, gm: Option<f64>, status: &str| {
        let mut row = head.clone();
        row.extend([Cell::opt(gp), Cell::opt(gm), Cell::Text(status.into())]);
        row
    };
    if !p.in_j(&opts.tolerances) {
        return (finish(None, None, "outside_j"), None);
    }
    match gamma_plus_with(p, opts).and_then(|gp| Ok((gp, gamma_minus_with(p, opts)?))) {
        Ok((gp, gm)) => (finish(Some(gp), Some(gm), "ok"), None),
        Err(e) => (
            finish(None, None, "failed"),
            Some(format!("c=({}, {}, {}): {e}", p.c1, p.c2, p.c3)),
        ),
    }
}

pub fn field(
    p: &Params,
    gamma: f64,
    radii: &[f64],
    n: usize,
    opts: &SolverOptions,
) -> Result<(Table, Vec<String>), CliError> {
    let curve = solve_ivp_with(p, gamma, opts)?;
    let xs = chebyshev(n);
    let samples = sample_grid(&curve, radii, &xs);
    let mut t = Table::new(&FIELD_COLUMNS);
    let mut failures = Vec::new();
    let coords = radii.iter().flat_map(|&r| xs.iter().map(move |&x| (r, x)));
    for ((r, x), s) in coords.zip(samples) {
        match s {
            Ok(f) => t.push(vec![
                Cell::Num(f.r),
                Cell::Num(f.x),
                Cell::Num(f.u_r),
                Cell::Num(f.u_theta),
                Cell::Num(f.u_phi),
                Cell::Num(f.p),
            ]),
            Err(e) => {
                if !matches!(e, Error::PoleProximity { .. }) {
                    failures.push(format!("r={r} x={x}: {e}"));
                }
                t.push(vec![
                    Cell::Num(r),
                    Cell::Num(x),
                    Cell::Null,
                    Cell::Null,
                    Cell::Null,
                    Cell::Null,
                ]);
            }
        }
    }
    Ok((t, failures))
}

pub fn verify(cfg: &RunConfig, opts: &SolverOptions) -> Result<Report, CliError> {
    let suite = parse_suite(&cfg.suite).map_err(|e| CliError::Config(e.to_string()))?;
    let set = SampleSet::named(&cfg.sample_set).map_err(|e| CliError::Config(e.to_string()))?;
    let per_kind: Vec<_> = pool(cfg.jobs)?.install(|| {
        suite
            .par_iter()
            .map(|&k| run_check(k, &set, opts))
            .collect()
    });
    Ok(Report::from_results(
        suite,
        &set.name,
        per_kind.into_iter().flatten().collect(),
    ))
}

pub fn classify(p: &Params, gamma: f64, opts: &SolverOptions) -> Result<Table, CliError> {
    let idx = classify_with(p, gamma, opts)?;
    let (k, l) = match idx.stratum {
        Stratum::Surface(d, e) => (Cell::Int(d.k() as i64), Cell::Int(e.l() as i64)),
        _ => (Cell::Null, Cell::Null),
    };
    let mut t = Table::new(&CLASSIFY_COLUMNS);
    t.push(vec![
        Cell::Num(idx.params.c1),
        Cell::Num(idx.params.c2),
        Cell::Num(idx.params.c3),
        Cell::Num(gamma),
        Cell::Text(idx.stratum.to_string()),
        k,
        l,
        Cell::Bool(idx.clamped),
    ]);
    Ok(t)
}
