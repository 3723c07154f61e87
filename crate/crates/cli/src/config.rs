//! Run configuration.
//!
//! Sources are layered: built-in defaults, then a flat `key = value` file,
//! then `NSAXI_<KEY>` environment variables, then command-line flags.
//! Every layer goes through [`RunConfig::set`], so the same keys and value
//! syntax apply everywhere and unknown keys are rejected at every level.

use std::fs;
use std::path::{Path, PathBuf};

use nsaxi_core::verify::parse_suite;
use nsaxi_core::{SampleSet, SolverOptions, Tolerances};
use serde::Serialize;

use crate::error::CliError;

pub const ENV_PREFIX: &str = "NSAXI_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub rtol: f64,
    pub atol: f64,
    pub match_tol: f64,
    pub membership: f64,
    pub grid: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps; `0` lets the pool decide.
    pub jobs: usize,
    pub suite: String,
    pub sample_set: String,
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            rtol: o.rtol,
            atol: o.atol,
            match_tol: o.match_tol,
            membership: o.tolerances.membership,
            grid: 101,
            format: Format::Csv,
            out: None,
            jobs: 0,
            suite: "default".into(),
            sample_set: "default".into(),
            strict: false,
        }
    }
}

pub const KEYS: [&str; 11] = [
    "rtol",
    "atol",
    "match_tol",
    "membership",
    "grid",
    "format",
    "out",
    "jobs",
    "suite",
    "sample_set",
    "strict",
];

fn bad(key: &str, value: &str, why: &str) -> CliError {
    CliError::Config(format!("{key} = '{value}': {why}"))
}

fn tolerance(key: &str, value: &str) -> Result<f64, CliError> {
    let v: f64 = value.parse().map_err(|_| bad(key, value, "not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, value, "must be positive and finite"))
    }
}

fn count(key: &str, value: &str) -> Result<usize, CliError> {
    value
        .parse()
        .map_err(|_| bad(key, value, "not a non-negative integer"))
}

impl RunConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            "rtol" => self.rtol = tolerance(key, value)?,
            "atol" => self.atol = tolerance(key, value)?,
            "match_tol" => self.match_tol = tolerance(key, value)?,
            "membership" => self.membership = tolerance(key, value)?,
            "grid" => self.grid = count(key, value)?,
            "jobs" => self.jobs = count(key, value)?,
            "format" => {
                self.format = match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(bad(key, value, "expected csv or json")),
                }
            }
            "out" => {
                self.out = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            "suite" => self.suite = value.to_string(),
            "sample_set" => self.sample_set = value.to_string(),
            "strict" => {
                self.strict = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(bad(key, value, "expected true or false")),
                }
            }
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Apply a flat `key = value` text. `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{origin}:{}: expected 'key = value'", i + 1))
            })?;
            self.set(key.trim(), value)
                .map_err(|e| CliError::Config(format!("{origin}:{}: {}", i + 1, e.message())))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Apply every `NSAXI_<KEY>` variable; other variables are ignored.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut vars: Vec<(String, String)> = vars
            .into_iter()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX))
            .collect();
        // Fixed order so that error messages do not depend on the environment layout.
        vars.sort();
        for (k, v) in vars {
            let key = k[ENV_PREFIX.len()..].to_ascii_lowercase();
            self.set(&key, &v)
                .map_err(|e| CliError::Config(format!("{k}: {}", e.message())))?;
        }
        Ok(())
    }

    /// Check the cross-field invariants that single settings cannot.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid < 2 {
            return Err(CliError::Config(format!(
                "grid = {}: must be at least 2",
                self.grid
            )));
        }
        parse_suite(&self.suite).map_err(|e| CliError::Config(format!("suite: {e}")))?;
        SampleSet::named(&self.sample_set)
            .map_err(|e| CliError::Config(format!("sample_set: {e}")))?;
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            rtol: self.rtol,
            atol: self.atol,
            match_tol: self.match_tol,
            tolerances: Tolerances {
                membership: self.membership,
                ..d.tolerances
            },
            ..d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_exactly_the_settable_ones() {
        let mut c = RunConfig::default();
        let sample = |k: &str| match k {
            "format" => "json",
            "out" => "x.csv",
            "suite" => "landau",
            "sample_set" => "default",
            "strict" => "true",
            _ => "3",
        };
        for k in KEYS {
            c.set(k, sample(k)).unwrap();
        }
        assert!(matches!(c.set("tolerance", "1"), Err(CliError::Config(_))));
    }

    #[test]
    fn text_layers_and_comments() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\n\nrtol = 1e-9\ngrid=7\n format = json \n", "t")
            .unwrap();
        assert_eq!((c.rtol, c.grid, c.format), (1e-9, 7, Format::Json));
        assert!(c.apply_text("rtol 1e-9", "t").is_err());
        assert!(c.apply_text("bogus = 1", "t").is_err());
    }

    #[test]
    fn tolerances_must_be_positive() {
        let mut c = RunConfig::default();
        for v in ["0", "-1e-9", "nan", "inf", "abc"] {
            assert!(c.set("atol", v).is_err(), "{v}");
        }
    }

    #[test]
    fn env_overrides_and_rejects_unknown() {
        let mut c = RunConfig::default();
        c.apply_text("grid = 9", "t").unwrap();
        c.apply_env([
            ("NSAXI_GRID".into(), "11".into()),
            ("HOME".into(), "/".into()),
        ])
        .unwrap();
        assert_eq!(c.grid, 11);
        assert!(c.apply_env([("NSAXI_NOPE".into(), "1".into())]).is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        c.validate().unwrap();
        c.grid = 1;
        assert!(c.validate().is_err());
        c.grid = 2;
        c.suite = "foliation,bogus".into();
        assert!(c.validate().is_err());
        c.suite = "all".into();
        c.sample_set = "nope".into();
        assert!(c.validate().is_err());
    }
}
