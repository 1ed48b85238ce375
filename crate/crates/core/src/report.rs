//! Configuration and machine-readable reports of the verification suites.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lie::WeylWord;

/// Smallest accepted tolerance override.
pub const MIN_TOL: f64 = 1e-14;
/// Largest accepted tolerance override.
pub const MAX_TOL: f64 = 1e-2;
/// Largest accepted sample count.
pub const MAX_SAMPLES: usize = 1_000_000;

/// A named verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuiteName {
    /// Factorizations, torus square roots and the Jacobi identity of `π_st`.
    Kernel,
    /// The double symplectic groupoid `Γ`.
    Gamma,
    /// Bruhat cells, `J±` and `I_u`.
    Cells,
    /// Generalized double Bruhat cells `𝒢^{w̄,w̄}`.
    Gdbc,
    /// The twist construction and the concatenation map `κ`.
    Twist,
    /// The cotangent example `T*ℂ`.
    TstarC,
    /// Bivector assembly and Poisson residual machinery.
    Poisson,
}

impl SuiteName {
    /// Every suite, in report order.
    pub const ALL: [SuiteName; 7] =
        [SuiteName::Kernel, SuiteName::Gamma, SuiteName::Cells, SuiteName::Poisson, SuiteName::Gdbc, SuiteName::Twist, SuiteName::TstarC];

    /// Name used on the command line and in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Kernel => "kernel",
            SuiteName::Gamma => "gamma",
            SuiteName::Cells => "cells",
            SuiteName::Gdbc => "gdbc",
            SuiteName::Twist => "twist",
            SuiteName::TstarC => "tstar_c",
            SuiteName::Poisson => "poisson",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::ConfigError(format!("unknown suite '{s}' (expected one of kernel, gamma, cells, gdbc, twist, tstar_c, poisson)")))
    }
}

impl Serialize for SuiteName {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Configuration of a verification run.
///
/// Word-dependent suites run on `words` (all of rank `group_rank`) when the
/// list is non-empty, and on their default word sets otherwise. `samples`
/// and `tol`, when present, replace the per-check defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// `n` of `SL_n`.
    pub group_rank: usize,
    /// Weyl words for the word-dependent suites.
    pub words: Vec<WeylWord>,
    /// Samples per check (per-check defaults when `None`).
    pub samples: Option<usize>,
    /// Tolerance override for every check (pinned defaults when `None`).
    pub tol: Option<f64>,
    /// Seed of the per-sample random streams.
    pub seed: u64,
    /// Suites to run, in order.
    pub suites: Vec<SuiteName>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { group_rank: 3, words: Vec::new(), samples: None, tol: None, seed: 0, suites: SuiteName::ALL.to_vec() }
    }
}

impl SuiteConfig {
    /// Check the invariants of the configuration.
    pub fn validate(&self) -> Result<()> {
        if self.group_rank < 2 {
            return Err(Error::ConfigError(format!("rank must be at least 2, got {}", self.group_rank)));
        }
        if let Some(s) = self.samples {
            if s == 0 || s > MAX_SAMPLES {
                return Err(Error::ConfigError(format!("samples must be in 1..={MAX_SAMPLES}, got {s}")));
            }
        }
        if let Some(t) = self.tol {
            if !(MIN_TOL..=MAX_TOL).contains(&t) {
                return Err(Error::ConfigError(format!("tol must be in [{MIN_TOL:e}, {MAX_TOL:e}], got {t:e}")));
            }
        }
        if self.suites.is_empty() {
            return Err(Error::ConfigError("no suite selected".into()));
        }
        for w in &self.words {
            WeylWord::new(w.letters.clone(), self.group_rank)?;
        }
        Ok(())
    }
}

/// Parse a comma-separated list of simple reflection indices, e.g. `"1,2"`.
pub fn parse_word(s: &str, n: usize) -> Result<WeylWord> {
    let letters = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| Error::ConfigError(format!("invalid letter '{t}' in word '{s}'"))))
        .collect::<Result<Vec<_>>>()?;
    WeylWord::new(letters, n)
}

/// Residual serialized as a decimal string with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual(pub f64);

impl Serialize for Residual {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_residual(self.0))
    }
}

/// `x` with 17 significant digits in scientific notation; non-finite
/// values become `"inf"` or `"nan"`.
pub fn format_residual(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    /// Check identifier, e.g. `gdbc.coisotropy[SL3:1,2]`.
    pub id: String,
    /// Anchor of the verified statement.
    pub anchor: String,
    /// Number of samples evaluated.
    pub samples: usize,
    /// Largest residual over the samples.
    pub max_residual: Residual,
    /// Tolerance applied.
    pub tol: f64,
    /// Whether `max_residual ≤ tol`.
    pub pass: bool,
}

impl CheckRecord {
    /// Record with `pass` derived from the residual and tolerance.
    pub fn new(id: impl Into<String>, anchor: impl Into<String>, samples: usize, max_residual: f64, tol: f64) -> Self {
        Self { id: id.into(), anchor: anchor.into(), samples, max_residual: Residual(max_residual), tol, pass: max_residual <= tol }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    /// Suite name.
    pub suite: SuiteName,
    /// Check records in execution order.
    pub checks: Vec<CheckRecord>,
    /// Wall-clock time in milliseconds.
    pub wall_ms: u64,
}

impl SuiteReport {
    /// Whether every check passed.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Serialize reports as a pretty-printed JSON array.
pub fn report_json(reports: &[SuiteReport]) -> Result<String> {
    if reports.is_empty() {
        return Ok("[]".into());
    }
    serde_json::to_string_pretty(reports).map_err(|e| Error::IoError(e.to_string()))
}

/// Write the JSON report to `path`.
pub fn emit_report(reports: &[SuiteReport], path: &Path) -> Result<()> {
    std::fs::write(path, report_json(reports)?).map_err(|e| Error::IoError(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_empty_array() {
        assert_eq!(report_json(&[]).unwrap(), "[]");
    }

    #[test]
    fn residuals_have_seventeen_digits() {
        assert_eq!(format_residual(1.0), "1.0000000000000000e0");
        // 3.25e-13 is not a binary fraction; 17 digits expose the nearest double.
        assert_eq!(format_residual(3.25e-13), "3.2499999999999998e-13");
        assert_eq!(format_residual(3.25e-13).parse::<f64>().unwrap(), 3.25e-13);
        assert_eq!(format_residual(0.375), "3.7500000000000000e-1");
        assert_eq!(format_residual(f64::INFINITY), "inf");
    }

    #[test]
    fn record_fields_serialize_in_order() {
        let r = SuiteReport { suite: SuiteName::TstarC, checks: vec![CheckRecord::new("a", "Example", 3, 0.5, 1.0)], wall_ms: 7 };
        let s = serde_json::to_string(&[r]).unwrap();
        assert_eq!(
            s,
            r#"[{"suite":"tstar_c","checks":[{"id":"a","anchor":"Example","samples":3,"max_residual":"5.0000000000000000e-1","tol":1.0,"pass":true}],"wall_ms":7}]"#
        );
    }

    #[test]
    fn config_validation() {
        let ok = SuiteConfig::default();
        ok.validate().unwrap();
        let zero = SuiteConfig { samples: Some(0), ..SuiteConfig::default() };
        assert!(matches!(zero.validate(), Err(Error::ConfigError(_))));
        let loose = SuiteConfig { tol: Some(0.1), ..SuiteConfig::default() };
        assert!(matches!(loose.validate(), Err(Error::ConfigError(_))));
        let tight = SuiteConfig { tol: Some(1e-15), ..SuiteConfig::default() };
        assert!(matches!(tight.validate(), Err(Error::ConfigError(_))));
        let rank = SuiteConfig { group_rank: 1, ..SuiteConfig::default() };
        assert!(matches!(rank.validate(), Err(Error::ConfigError(_))));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in SuiteName::ALL {
            assert_eq!(s.as_str().parse::<SuiteName>().unwrap(), s);
        }
        assert!("nope".parse::<SuiteName>().is_err());
    }

    #[test]
    fn word_parsing() {
        assert_eq!(parse_word("1,2", 3).unwrap().letters, vec![1, 2]);
        assert!(parse_word("1,x", 3).is_err());
        assert!(parse_word("3", 3).is_err());
    }
}
