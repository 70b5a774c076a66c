//! Machine-readable run reports and their exit-code semantics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// Exit codes shared by every verb.
pub mod exit {
    pub const OK: u8 = 0;
    pub const PROPERTY: u8 = 1;
    pub const ADMISSIBILITY: u8 = 2;
    pub const RECOVERY: u8 = 3;
    pub const CONFIG: u8 = 64;
}

/// How a metric is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// `metric ≤ tolerance`
    Le,
    /// `metric ≥ tolerance`
    Ge,
    /// `metric < tolerance`
    Lt,
    /// `metric > tolerance`
    Gt,
}

impl Bound {
    fn holds(self, metric: f64, tol: f64) -> bool {
        match self {
            Bound::Le => metric <= tol,
            Bound::Ge => metric >= tol,
            Bound::Lt => metric < tol,
            Bound::Gt => metric > tol,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Bound::Le => "<=",
            Bound::Ge => ">=",
            Bound::Lt => "<",
            Bound::Gt => ">",
        }
    }
}

/// Which exit code a failure of this check maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Property,
    Admissibility,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub metric: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub kind: Kind,
    /// The check is designed to fail (falsification case).
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub expected_fail: bool,
    /// The property being verified; on failure, what was violated.
    pub message: String,
}

impl Check {
    pub fn new(name: &str, metric: f64, bound: Bound, tolerance: f64, message: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: bound.holds(metric, tolerance),
            metric,
            tolerance,
            bound,
            kind: Kind::Property,
            expected_fail: false,
            message: message.into(),
        }
    }

    pub fn admissibility(mut self) -> Self {
        self.kind = Kind::Admissibility;
        self
    }

    pub fn expect_fail(mut self, yes: bool) -> Self {
        self.expected_fail = yes;
        self
    }

    /// Outcome matches expectation.
    pub fn ok(&self) -> bool {
        self.pass != self.expected_fail
    }

    pub fn status(&self) -> &'static str {
        match (self.pass, self.expected_fail) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "XFAIL",
            (true, true) => "XPASS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
    /// Scalar results worth reporting besides the checks (e.g. `rho_star`).
    pub values: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            seed,
            passed: true,
            checks: Vec::new(),
            artifacts: Vec::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.ok();
        self.checks.push(check);
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), v);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// 0 when every check meets its expectation; 2 if any unexpected failure
    /// is an admissibility failure; 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        let failed = || self.checks.iter().filter(|c| !c.ok());
        if failed().next().is_none() {
            exit::OK
        } else if failed().any(|c| c.kind == Kind::Admissibility) {
            exit::ADMISSIBILITY
        } else {
            exit::PROPERTY
        }
    }

    /// Serialize to `dir/report.json` and record it as an artifact.
    pub fn write(&mut self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join("report.json");
        self.artifacts.push(path.clone());
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} (seed {})", self.command, self.seed);
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let _ = writeln!(
                s,
                "  {:<5} {:<width$}  {:.3e} {} {:.3e}",
                c.status(),
                c.name,
                c.metric,
                c.bound.symbol(),
                c.tolerance
            );
            if !c.ok() {
                let _ = writeln!(s, "        {}", c.message);
            }
        }
        for (k, v) in &self.values {
            let _ = writeln!(s, "  {k} = {v}");
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "  wrote {}", a.display());
        }
        let _ = writeln!(s, "result: {} (exit {})", if self.passed { "PASS" } else { "FAIL" }, self.exit_code());
        s
    }
}
