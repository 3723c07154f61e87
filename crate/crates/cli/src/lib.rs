//! Command-line front end for `nsaxi-core`.
//!
//! The binary is a thin wrapper around [`run`], which takes the arguments,
//! the environment and the two output streams explicitly so the whole
//! contract can be exercised in-process.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};

pub use config::{Format, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "nsaxi",
    version,
    about = "Axisymmetric (-1)-homogeneous Navier-Stokes profiles"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings that may also come from the config file or the environment.
#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Number of x samples (at least 2).
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,
    /// Worker threads for sweeps (0 = automatic).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Turn null-marked solver failures into exit code 3.
    #[arg(long, global = true)]
    pub strict: bool,
}

fn finite(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err("value must be finite".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_hyphen_values = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_hyphen_values = true)]
    pub c2: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_hyphen_values = true)]
    pub c3: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extremal values gamma+ and gamma- and the boundary c3_bar.
    Gamma {
        #[command(flatten)]
        c: ParamArgs,
    },
    /// Tabulate the profile with U(0) = gamma and its fields at r = 1.
    Solve {
        #[command(flatten)]
        c: ParamArgs,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        gamma: f64,
    },
    /// Sweep gamma+ and gamma- over a parameter grid.
    Surface {
        /// Value or start:stop:count.
        #[arg(long, allow_hyphen_values = true)]
        c1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c2: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c3: Option<String>,
        /// Range used for every axis not given explicitly.
        #[arg(long, allow_hyphen_values = true, value_name = "A:B:N")]
        range: Option<String>,
    },
    /// Velocity and pressure on an (r, x) grid.
    Field {
        #[arg(long, value_parser = finite, allow_hyphen_values = true, conflicts_with_all = ["c1", "c2", "c3", "gamma"])]
        lambda: Option<f64>,
        #[command(flatten)]
        c: ParamArgs,
        #[arg(long, value_parser = finite, allow_hyphen_values = true, required_unless_present = "lambda")]
        gamma: Option<f64>,
        /// Radii as a value or start:stop:count.
        #[arg(long, allow_hyphen_values = true, value_name = "A:B:N")]
        range: Option<String>,
    },
    /// Run numerical property checks and write a JSON report.
    Verify {
        /// `default`, `all` or a comma-separated list of checks.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        sample_set: Option<String>,
    },
    /// Stratum of (c, gamma).
    Classify {
        #[command(flatten)]
        c: ParamArgs,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        gamma: f64,
    },
}

/// Resolve the layered configuration for `cli`.
pub fn load_config<I>(cli: &Cli, env: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.global.config {
        cfg.apply_file(path)?;
    }
    cfg.apply_env(env)?;
    let g = &cli.global;
    if let Some(f) = g.format {
        cfg.format = f;
    }
    if let Some(o) = &g.out {
        cfg.out = Some(o.clone());
    }
    if let Some(n) = g.grid {
        cfg.grid = n;
    }
    if let Some(n) = g.jobs {
        cfg.jobs = n;
    }
    if g.strict {
        cfg.strict = true;
    }
    if let Command::Verify { suite, sample_set } = &cli.command {
        if let Some(s) = suite {
            cfg.suite = s.clone();
        }
        if let Some(s) = sample_set {
            cfg.sample_set = s.clone();
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run the CLI and return the process exit code.
pub fn run<A, T, E>(args: A, env: E, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    A: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    E: IntoIterator<Item = (String, String)>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    if !text.contains("Usage:") {
                        let usage = Cli::command().render_usage().to_string();
                        let _ = writeln!(stderr, "\n{usage}");
                    }
                    1
                }
            };
        }
    };
    let result = load_config(&cli, env)
        .and_then(|cfg| commands::dispatch(&cli.command, &cfg, stdout, stderr));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "nsaxi: {e}");
            e.exit_code()
        }
    }
}
