//! Input files: EOS descriptions and scenario JSON.

use std::fmt;
use std::path::Path;

use logeuler_core::hydro::{Bc, Limiter, Riemann, RiemannProblem, SmoothWave};
use logeuler_core::{EosSpec, PowerSum, PressureLaw};
use serde::de::{DeserializeOwned, Deserializer};
use serde::Deserialize;

use crate::report::exit;

/// Unreadable or malformed input.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Map any error surfacing from a command to the exit-code contract.
pub fn exit_code_of(err: &anyhow::Error) -> u8 {
    use logeuler_core::Error as E;
    if err.downcast_ref::<ConfigError>().is_some() {
        return exit::CONFIG;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::AssumptionViolation(_)
            | E::SuperluminalState { .. }
            | E::InadmissibleTarget { .. }
            | E::NonpositiveDensity { .. }
            | E::NonpositiveSoundSpeed { .. }
            | E::OutOfRange { .. }
            | E::InvalidSymState(_),
        ) => exit::ADMISSIBILITY,
        Some(E::RecoveryFailure { .. }) => exit::RECOVERY,
        Some(E::InvalidParameter(_) | E::GridTooSmall { .. }) => exit::CONFIG,
        _ => exit::PROPERTY,
    }
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

/// A pressure law from a file: a family member, or `"family": "power_sum"`
/// with `"terms": [[coef, exp], ...]` for laws outside the family.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    Family(EosSpec),
    PowerSum(PowerSum),
}

impl<'de> Deserialize<'de> for Law {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut v = serde_json::Value::deserialize(d)?;
        let power_sum = v.get("family").and_then(|f| f.as_str()) == Some("power_sum");
        if power_sum {
            if let Some(obj) = v.as_object_mut() {
                obj.remove("family");
            }
            let ps: PowerSum = serde_json::from_value(v).map_err(D::Error::custom)?;
            PowerSum::new(ps.terms, ps.c).map(Law::PowerSum).map_err(D::Error::custom)
        } else {
            serde_json::from_value(v).map(Law::Family).map_err(D::Error::custom)
        }
    }
}

impl Law {
    /// Exponent `A` with `p' = K₁ρ^A`, if the law is a family member.
    pub fn family_exponent(&self) -> Option<f64> {
        match self {
            Law::Family(e) => Some(e.sound_speed_exponent()),
            Law::PowerSum(_) => None,
        }
    }

    pub fn as_law(&self) -> &dyn PressureLaw {
        match self {
            Law::Family(e) => e,
            Law::PowerSum(p) => p,
        }
    }
}

pub fn load_eos(path: &Path) -> Result<EosSpec, ConfigError> {
    load_json(path)
}

fn two() -> f64 {
    2.0
}

/// Matched-data run of the classical and symmetric systems on `[0, 2π)`
/// from `ρ = rho0 + perturbation·sin x`, `u = u_amp·cos x`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceScenario {
    pub eos: Law,
    /// Map exponent; defaults to the law's own exponent.
    #[serde(rename = "A", default)]
    pub a: Option<f64>,
    #[serde(rename = "B", default)]
    pub b: f64,
    /// Finest resolution; the study also runs `cells/4` and `cells/2`.
    pub cells: usize,
    pub t_end: f64,
    pub perturbation: f64,
    #[serde(default = "two")]
    pub rho0: f64,
    #[serde(default)]
    pub u_amp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Init {
    SmoothWave(SmoothWave),
    Riemann(RiemannProblem),
}

fn periodic() -> Bc {
    Bc::Periodic
}

fn default_cfl() -> f64 {
    0.45
}

fn yes() -> bool {
    true
}

fn reference_cells() -> usize {
    8192
}

/// Relativistic 1D run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunScenario {
    pub eos: EosSpec,
    pub cells: usize,
    #[serde(default = "periodic")]
    pub bc: Bc,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    pub init: Init,
    #[serde(default)]
    pub limiter: Limiter,
    #[serde(default)]
    pub riemann: Riemann,
    /// Snapshot times besides `t = 0` and `t_end`.
    #[serde(default)]
    pub outputs: Vec<f64>,
    /// Replace unrecoverable cells by the floor state (logged) instead of failing.
    #[serde(default)]
    pub clamp: bool,
    /// Run the refinement study: three levels `cells·{1,2,4}` for smooth data,
    /// four levels `cells·{1,2,4,8}` against `reference_cells` for Riemann data.
    #[serde(default = "yes")]
    pub convergence: bool,
    #[serde(default = "reference_cells")]
    pub reference_cells: usize,
}
