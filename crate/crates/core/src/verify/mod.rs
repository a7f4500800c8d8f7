//! Property suites run by `gmtjet verify`. Every check is deterministic given
//! the seed; results serialize to the same bytes on every run.

mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::verdict::Status;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Densities,
    Cones,
    Equivalence,
    Uniqueness,
    Shear,
    Pointwise,
    Sff,
    Touching,
    Transfer,
    Classify,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Densities,
        Suite::Cones,
        Suite::Equivalence,
        Suite::Uniqueness,
        Suite::Shear,
        Suite::Pointwise,
        Suite::Sff,
        Suite::Touching,
        Suite::Transfer,
        Suite::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Densities => "densities",
            Suite::Cones => "cones",
            Suite::Equivalence => "equivalence",
            Suite::Uniqueness => "uniqueness",
            Suite::Shear => "shear",
            Suite::Pointwise => "pointwise",
            Suite::Sff => "sff",
            Suite::Touching => "touching",
            Suite::Transfer => "transfer",
            Suite::Classify => "classify",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        s.split(',').map(|x| x.trim().parse()).collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite `{s}` (expected one of {}, all)", Suite::ALL.map(|x| x.name()).join(", "))))
    }
}

/// One pass/fail check with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<Status>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Check {
    pub fn flag(name: impl Into<String>, passed: bool) -> Check {
        Check { name: name.into(), passed, expected: None, observed: None, values: BTreeMap::new(), notes: Vec::new() }
    }

    /// Passes when the observed status equals the expected one.
    pub fn status(name: impl Into<String>, expected: Status, observed: Status) -> Check {
        let mut c = Check::flag(name, expected == observed);
        c.expected = Some(expected);
        c.observed = Some(observed);
        c
    }

    /// Passes when value <= limit.
    pub fn bound(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check::flag(name, value <= limit).with("value", value).with("limit", limit)
    }

    /// Records a value; non-finite values become a note so the output stays
    /// plain JSON.
    pub fn with(mut self, key: impl Into<String>, v: f64) -> Check {
        let key = key.into();
        if v.is_finite() {
            self.values.insert(key, v);
        } else {
            self.notes.push(format!("{key} = {v}"));
        }
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Check {
        self.notes.push(s.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteResult {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResults {
    pub version: String,
    pub seed: u64,
    pub passed: bool,
    pub total: usize,
    pub failed: usize,
    pub suites: Vec<SuiteResult>,
}

impl VerifyResults {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results serialize");
        s.push('\n');
        s
    }

    pub fn suite(&self, s: Suite) -> Option<&SuiteResult> {
        self.suites.iter().find(|r| r.suite == s)
    }
}

/// Runs one suite. A check that errors out is recorded as failed.
pub fn run_suite(suite: Suite, seed: u64, cfg: &Config) -> SuiteResult {
    let mut checks = Vec::new();
    let mut ctx = suites::Ctx::new(cfg, seed, &mut checks);
    match suite {
        Suite::Densities => suites::densities(&mut ctx),
        Suite::Cones => suites::cones(&mut ctx),
        Suite::Equivalence => suites::equivalence(&mut ctx),
        Suite::Uniqueness => suites::uniqueness(&mut ctx),
        Suite::Shear => suites::shear(&mut ctx),
        Suite::Pointwise => suites::pointwise(&mut ctx),
        Suite::Sff => suites::sff(&mut ctx),
        Suite::Touching => suites::touching(&mut ctx),
        Suite::Transfer => suites::transfer(&mut ctx),
        Suite::Classify => suites::classify(&mut ctx),
    }
    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    SuiteResult { suite, passed, checks }
}

pub fn run(suites: &[Suite], seed: u64, cfg: &Config) -> VerifyResults {
    let results: Vec<SuiteResult> = suites.iter().map(|&s| run_suite(s, seed, cfg)).collect();
    let total = results.iter().map(|r| r.checks.len()).sum();
    let failed = results.iter().map(|r| r.failures().count()).sum();
    VerifyResults { version: crate::report::REPORT_VERSION.to_string(), seed, passed: results.iter().all(|r| r.passed), total, failed, suites: results }
}

#[cfg(test)]
mod tests;
