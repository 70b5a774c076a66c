//! Barotropic pressure laws closed under the symmetrizing change of variables.
//!
//! Every member solves `A·p'(ρ) = ρ·p''(ρ)`, i.e. `p'(ρ) = K₁ρ^A`:
//!
//! * power branch (`A ≠ −1`): `p = K₁/(A+1)·ρ^(A+1) + K`
//! * logarithmic branch (`A = −1`): `p = K₁ ln ρ + K`
//!
//! For the logarithmic law `K₁` is the pressure coefficient of `p = K₁ ln ρ`,
//! the subluminal condition `p' ≤ c²` forces `ρ ≥ ρ* = K₁/c²`, and the
//! enthalpy-like quantity `ρc² + p` stays positive above `ρ*` once
//! `K₁ > c²/e`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Which branch of the pressure family a parameter set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Family {
    /// `A > 0`: `p = ρ^γ/γ`-type laws with `γ = A + 1 > 1`.
    #[cfg_attr(feature = "serde", serde(alias = "polytropic"))]
    Polytropic,
    /// `−2 ≤ A < −1`: generalized Chaplygin gas, `p = −ρ^(−γ)/γ` with `γ = −A − 1`.
    #[cfg_attr(feature = "serde", serde(alias = "chaplygin"))]
    Chaplygin,
    /// `p = K₁ ln ρ + K`.
    #[cfg_attr(feature = "serde", serde(alias = "logarithmic"))]
    Logarithmic,
    /// Any other power exponent `A ∉ {0, −1}`.
    #[cfg_attr(feature = "serde", serde(alias = "general_power", alias = "generalpower"))]
    GeneralPower,
}

/// Exponent of `p' = K₁ρ^A` that actually generates the logarithmic law.
pub const LOG_BRANCH_EXPONENT: f64 = -1.0;

/// A member of the symmetrizable pressure family.
///
/// `a` is the ODE parameter. For [`Family::Logarithmic`] it is only a label
/// used by [`EosSpec::ode_residual`]: the pressure itself always uses the
/// `−1` exponent, and [`EosSpec::logarithmic`] sets the label to `−1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "wire::EosWire", into = "wire::EosWire"))]
pub struct EosSpec {
    pub family: Family,
    pub a: f64,
    pub k1: f64,
    pub k: f64,
    pub c: f64,
}

/// Density interval on which "for every admissible ρ" statements are sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleWindow {
    pub rho_star: f64,
    pub rho_max: f64,
    pub delta: f64,
}

impl AdmissibleWindow {
    pub const DEFAULT_SPAN: f64 = 1e3;
    pub const DEFAULT_MARGIN: f64 = 1e-6;

    /// Window `[ρ*, 10³ρ*]` with margin `δ = 10⁻⁶ρ*`.
    pub fn from_rho_star(rho_star: f64) -> Result<Self> {
        Self::new(rho_star, Self::DEFAULT_SPAN * rho_star, Self::DEFAULT_MARGIN * rho_star)
    }

    pub fn new(rho_star: f64, rho_max: f64, delta: f64) -> Result<Self> {
        if !(rho_star > 0.0 && rho_star.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho_star must be positive and finite, got {rho_star}")));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        if !(rho_max > rho_star + delta) {
            return Err(Error::InvalidParameter(format!(
                "rho_max = {rho_max} must exceed rho_star + delta = {}",
                rho_star + delta
            )));
        }
        Ok(Self { rho_star, rho_max, delta })
    }

    /// Lowest density accepted under the margin.
    pub fn rho_min(&self) -> f64 {
        self.rho_star + self.delta
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.rho_min() && rho <= self.rho_max
    }

    /// Log-uniform point in `[ρ*+δ, rho_max]` for `t ∈ [0, 1]`.
    pub fn log_lerp(&self, t: f64) -> f64 {
        let lo = self.rho_min().ln();
        let hi = self.rho_max.ln();
        (lo + t * (hi - lo)).exp().clamp(self.rho_min(), self.rho_max)
    }
}

/// A barotropic pressure law `p(ρ)` with light speed `c`.
pub trait PressureLaw {
    fn pressure(&self, rho: f64) -> Result<f64>;
    fn dp_drho(&self, rho: f64) -> Result<f64>;
    fn d2p_drho2(&self, rho: f64) -> Result<f64>;
    fn light_speed(&self) -> f64;

    /// Sound speed `√p'`; errors when `p' ≤ 0`.
    fn sound_speed(&self, rho: f64) -> Result<f64> {
        let dp = self.dp_drho(rho)?;
        if !(dp > 0.0) {
            return Err(Error::NonpositiveSoundSpeed { rho, dp });
        }
        Ok(dp.sqrt())
    }
}

fn check_density(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveDensity { rho })
    }
}

/// `a_eff·p'(ρ)/p''(ρ) − ρ` for an arbitrary law and ODE parameter.
pub fn ode_residual_with<L: PressureLaw + ?Sized>(law: &L, a_eff: f64, rho: f64) -> Result<f64> {
    let dp = law.dp_drho(rho)?;
    let d2p = law.d2p_drho2(rho)?;
    if d2p == 0.0 {
        return Err(Error::ZeroCurvature { rho });
    }
    Ok(a_eff * dp / d2p - rho)
}

impl EosSpec {
    pub fn logarithmic(k1: f64, c: f64) -> Result<Self> {
        Self { family: Family::Logarithmic, a: LOG_BRANCH_EXPONENT, k1, k: 0.0, c }.validated()
    }

    pub fn polytropic(a: f64, k1: f64, c: f64) -> Result<Self> {
        Self { family: Family::Polytropic, a, k1, k: 0.0, c }.validated()
    }

    pub fn chaplygin(a: f64, k1: f64, c: f64) -> Result<Self> {
        Self { family: Family::Chaplygin, a, k1, k: 0.0, c }.validated()
    }

    pub fn general_power(a: f64, k1: f64, c: f64) -> Result<Self> {
        Self { family: Family::GeneralPower, a, k1, k: 0.0, c }.validated()
    }

    /// Replace the additive pressure constant `K`.
    pub fn with_offset(mut self, k: f64) -> Result<Self> {
        self.k = k;
        self.validated()
    }

    /// Replace the ODE label `A` (only meaningful for the logarithmic branch,
    /// where it does not affect the pressure).
    pub fn with_ode_label(mut self, a: f64) -> Result<Self> {
        self.a = a;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { family, a, k1, k, c } = *self;
        if !(k1 > 0.0 && k1.is_finite()) {
            return Err(Error::InvalidParameter(format!("K1 must be positive, got {k1}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        if !k.is_finite() || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("A and K must be finite, got A = {a}, K = {k}")));
        }
        let ok = match family {
            Family::Polytropic => a > 0.0,
            Family::Chaplygin => (-2.0..-1.0).contains(&a),
            Family::GeneralPower => a != 0.0 && a != LOG_BRANCH_EXPONENT,
            Family::Logarithmic => a != 0.0,
        };
        if !ok {
            let want = match family {
                Family::Polytropic => "A > 0",
                Family::Chaplygin => "-2 <= A < -1",
                Family::GeneralPower => "A not in {0, -1}",
                Family::Logarithmic => "A != 0",
            };
            return Err(Error::InvalidParameter(format!("{family:?} family requires {want}, got A = {a}")));
        }
        Ok(())
    }

    /// Exponent of `p' = K₁ρ^e` actually used by the pressure.
    pub fn sound_speed_exponent(&self) -> f64 {
        match self.family {
            Family::Logarithmic => LOG_BRANCH_EXPONENT,
            _ => self.a,
        }
    }

    /// ODE parameter used by [`Self::ode_residual`]; the `A` field of the parameter set.
    pub fn ode_parameter(&self) -> f64 {
        self.a
    }

    pub fn ode_residual(&self, rho: f64) -> Result<f64> {
        ode_residual_with(self, self.a, rho)
    }

    /// `true` iff `0 < p'(ρ) ≤ c²`.
    pub fn subluminal(&self, rho: f64) -> Result<bool> {
        let dp = self.dp_drho(rho)?;
        Ok(dp > 0.0 && dp <= self.c * self.c)
    }

    /// Density where `p' = c²`: a lower bound for decreasing `p'`, an upper
    /// bound for increasing `p'`.
    pub fn subluminal_edge(&self) -> f64 {
        (self.c * self.c / self.k1).powf(1.0 / self.sound_speed_exponent())
    }

    /// Lower density bound of the logarithmic law, `ρ* = K₁/c²`.
    pub fn rho_star(&self) -> Result<f64> {
        match self.family {
            Family::Logarithmic => Ok(self.k1 / (self.c * self.c)),
            f => Err(Error::InvalidParameter(format!("rho_star is defined for the logarithmic law, not {f:?}"))),
        }
    }

    /// Lower density bound and positivity certificate for the logarithmic law.
    ///
    /// Requires `K₁ > c²/e`. The certificate evaluates `ρ*c² + p(ρ*)` which,
    /// since `ρc² + p` increases with ρ, bounds it from below on `ρ ≥ ρ*`.
    pub fn admissible_window(&self) -> Result<AdmissibleWindow> {
        let rho_star = self.rho_star()?;
        let c2 = self.c * self.c;
        let threshold = c2 / core::f64::consts::E;
        if !(self.k1 > threshold) {
            return Err(Error::AssumptionViolation(format!(
                "pressure coefficient A = {} must exceed c^2/e = {threshold:.6}",
                self.k1
            )));
        }
        let floor = rho_star * c2 + self.pressure(rho_star)?;
        if !(floor > 0.0) {
            return Err(Error::AssumptionViolation(format!(
                "rho*c^2 + p(rho*) = {floor} is not positive at rho* = {rho_star}"
            )));
        }
        AdmissibleWindow::from_rho_star(rho_star)
    }

    /// Sampling window of subluminal densities for any family.
    ///
    /// Decreasing `p'` (negative exponent): `[ρ_edge, 10³ρ_edge]`.
    /// Increasing `p'`: `[10⁻³ρ_edge, ρ_edge]`.
    pub fn density_window(&self) -> Result<AdmissibleWindow> {
        let edge = self.subluminal_edge();
        if self.sound_speed_exponent() < 0.0 {
            AdmissibleWindow::from_rho_star(edge)
        } else {
            let lo = edge / AdmissibleWindow::DEFAULT_SPAN;
            AdmissibleWindow::new(lo, edge, AdmissibleWindow::DEFAULT_MARGIN * lo)
        }
    }
}

impl PressureLaw for EosSpec {
    fn pressure(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(match self.family {
            Family::Logarithmic => self.k1 * rho.ln() + self.k,
            _ => {
                let g = self.a + 1.0;
                self.k1 / g * rho.powf(g) + self.k
            }
        })
    }

    fn dp_drho(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(match self.family {
            Family::Logarithmic => self.k1 / rho,
            _ => self.k1 * rho.powf(self.a),
        })
    }

    fn d2p_drho2(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(match self.family {
            Family::Logarithmic => -self.k1 / (rho * rho),
            _ => self.a * self.k1 * rho.powf(self.a - 1.0),
        })
    }

    fn light_speed(&self) -> f64 {
        self.c
    }
}

/// `p(ρ) = Σ coefᵢ·ρ^expᵢ`. Used for laws outside the symmetrizable family,
/// e.g. `p = ρ + ρ³`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerSum {
    pub terms: Vec<(f64, f64)>,
    #[cfg_attr(feature = "serde", serde(default = "wire::default_c"))]
    pub c: f64,
}

impl PowerSum {
    pub fn new(terms: Vec<(f64, f64)>, c: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("PowerSum needs at least one term".into()));
        }
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        Ok(Self { terms, c })
    }

    /// `p = ρ + ρ³`.
    pub fn linear_plus_cubic(c: f64) -> Self {
        Self { terms: alloc::vec![(1.0, 1.0), (1.0, 3.0)], c }
    }
}

impl PressureLaw for PowerSum {
    fn pressure(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.terms.iter().map(|&(a, n)| a * rho.powf(n)).sum())
    }

    fn dp_drho(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.terms.iter().map(|&(a, n)| a * n * rho.powf(n - 1.0)).sum())
    }

    fn d2p_drho2(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.terms.iter().map(|&(a, n)| a * n * (n - 1.0) * rho.powf(n - 2.0)).sum())
    }

    fn light_speed(&self) -> f64 {
        self.c
    }
}

#[cfg(feature = "serde")]
pub(crate) mod wire {
    use super::{EosSpec, Family, LOG_BRANCH_EXPONENT};

    pub fn default_c() -> f64 {
        1.0
    }

    /// JSON shape `{"family", "A", "K1", "K", "c"}`. `A` may be omitted for
    /// the logarithmic branch; `K` defaults to 0 and `c` to 1.
    #[derive(serde::Serialize, serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct EosWire {
        family: Family,
        #[serde(rename = "A", default)]
        a: Option<f64>,
        #[serde(rename = "K1")]
        k1: f64,
        #[serde(rename = "K", default)]
        k: f64,
        #[serde(default = "default_c")]
        c: f64,
    }

    impl TryFrom<EosWire> for EosSpec {
        type Error = crate::Error;

        fn try_from(w: EosWire) -> Result<Self, Self::Error> {
            let a = match (w.family, w.a) {
                (_, Some(a)) => a,
                (Family::Logarithmic, None) => LOG_BRANCH_EXPONENT,
                (f, None) => return Err(crate::Error::InvalidParameter(alloc::format!("{f:?} family requires field A"))),
            };
            EosSpec { family: w.family, a, k1: w.k1, k: w.k, c: w.c }.validated()
        }
    }

    impl From<EosSpec> for EosWire {
        fn from(e: EosSpec) -> Self {
            EosWire { family: e.family, a: Some(e.a), k1: e.k1, k: e.k, c: e.c }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn log1() -> EosSpec {
        EosSpec::logarithmic(1.0, 1.0).unwrap()
    }

    fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn families() -> [EosSpec; 5] {
        [
            log1(),
            EosSpec::logarithmic(2.5, 1.3).unwrap().with_offset(0.7).unwrap(),
            EosSpec::polytropic(2.0, 1.0, 1.0).unwrap(),
            EosSpec::chaplygin(-1.5, 0.8, 1.0).unwrap(),
            EosSpec::general_power(-3.0, 1.2, 2.0).unwrap(),
        ]
    }

    #[test]
    fn pressure_examples() {
        assert_eq!(log1().pressure(1.0).unwrap(), 0.0);
        let poly = EosSpec::polytropic(2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(poly.pressure(2.0).unwrap(), 8.0 / 3.0, max_relative = 1e-15);
        let chap = EosSpec::chaplygin(-2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(chap.pressure(2.0).unwrap(), -0.5, max_relative = 1e-15);
        assert!(matches!(log1().pressure(0.0), Err(Error::NonpositiveDensity { .. })));
        assert!(matches!(poly.pressure(-1.0), Err(Error::NonpositiveDensity { .. })));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(log1().dp_drho(4.0).unwrap(), 0.25);
        let poly = EosSpec::polytropic(2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(poly.dp_drho(3.0).unwrap(), 9.0, max_relative = 1e-15);
        assert_eq!(log1().d2p_drho2(2.0).unwrap(), -0.25);
        assert_relative_eq!(poly.d2p_drho2(2.0).unwrap(), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences_at_1_7() {
        for eos in families() {
            let fd = central_diff(|r| eos.pressure(r).unwrap(), 1.7, 1e-5);
            let an = eos.dp_drho(1.7).unwrap();
            assert!(((fd - an) / an).abs() <= 1e-8, "{eos:?}: {fd} vs {an}");
            let fd2 = central_diff(|r| eos.dp_drho(r).unwrap(), 1.7, 1e-5);
            let an2 = eos.d2p_drho2(1.7).unwrap();
            assert!(((fd2 - an2) / an2).abs() <= 1e-8, "{eos:?}: {fd2} vs {an2}");
        }
    }

    #[test]
    fn ode_residual_examples() {
        let poly = EosSpec::polytropic(2.0, 1.0, 1.0).unwrap();
        assert_eq!(poly.ode_residual(5.0).unwrap(), 0.0);
        assert_eq!(log1().ode_residual(3.0).unwrap(), 0.0);
        let printed_label = log1().with_ode_label(1.0).unwrap();
        assert_relative_eq!(printed_label.ode_residual(3.0).unwrap(), -6.0, max_relative = 1e-15);
        assert_relative_eq!(ode_residual_with(&log1(), 1.0, 3.0).unwrap(), -6.0, max_relative = 1e-15);
    }

    #[test]
    fn non_member_law_fails_ode() {
        let law = PowerSum::linear_plus_cubic(1.0);
        for a in [1.0, 2.0, 3.0, -1.0] {
            for rho in [0.5, 1.0, 2.0] {
                assert!(ode_residual_with(&law, a, rho).unwrap().abs() > 1e-3);
            }
        }
    }

    #[test]
    fn zero_curvature_is_reported() {
        let linear = PowerSum::new(alloc::vec![(2.0, 1.0)], 1.0).unwrap();
        assert!(matches!(ode_residual_with(&linear, 1.0, 2.0), Err(Error::ZeroCurvature { .. })));
    }

    #[test]
    fn subluminal_examples() {
        assert!(log1().subluminal(1.0).unwrap());
        assert!(!log1().subluminal(0.5).unwrap());
        assert!(log1().subluminal(10.0).unwrap());
        assert!(log1().subluminal(-1.0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let w = log1().admissible_window().unwrap();
        assert_eq!(w.rho_star, 1.0);
        assert_eq!(w.rho_max, 1e3);
        assert_eq!(w.delta, 1e-6);
        assert_eq!(1.0 * 1.0 + log1().pressure(1.0).unwrap(), 1.0);

        let e = EosSpec::logarithmic(1.0, 2.0).unwrap().admissible_window().unwrap_err();
        match e {
            Error::AssumptionViolation(msg) => assert!(msg.contains("1.471518"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        // offset can break positivity even when K1 > c²/e
        let shifted = log1().with_offset(-2.0).unwrap();
        assert!(matches!(shifted.admissible_window(), Err(Error::AssumptionViolation(_))));
        assert!(EosSpec::polytropic(2.0, 1.0, 1.0).unwrap().admissible_window().is_err());
    }

    #[test]
    fn validation() {
        assert!(EosSpec::polytropic(-1.0, 1.0, 1.0).is_err());
        assert!(EosSpec::chaplygin(-1.0, 1.0, 1.0).is_err());
        assert!(EosSpec::chaplygin(-2.5, 1.0, 1.0).is_err());
        assert!(EosSpec::chaplygin(-2.0, 1.0, 1.0).is_ok());
        assert!(EosSpec::general_power(-1.0, 1.0, 1.0).is_err());
        assert!(EosSpec::general_power(0.0, 1.0, 1.0).is_err());
        assert!(EosSpec::logarithmic(0.0, 1.0).is_err());
        assert!(EosSpec::logarithmic(1.0, 0.0).is_err());
        assert!(AdmissibleWindow::new(1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn sign_behaviour() {
        let log = log1();
        assert!(log.pressure(2.0).unwrap() > 0.0);
        assert!(log.pressure(0.5).unwrap() < 0.0);
        let poly = EosSpec::polytropic(1.0, 1.0, 1.0).unwrap();
        let chap = EosSpec::chaplygin(-1.5, 1.0, 1.0).unwrap();
        for rho in [1e-3, 0.5, 1.0, 7.0, 1e3] {
            assert!(poly.pressure(rho).unwrap() > 0.0);
            assert!(chap.pressure(rho).unwrap() < 0.0);
        }
    }

    #[test]
    fn density_windows_are_subluminal() {
        for eos in families() {
            let w = eos.density_window().unwrap();
            for i in 0..=50 {
                let rho = w.log_lerp(i as f64 / 50.0);
                assert!(eos.subluminal(rho).unwrap(), "{eos:?} at {rho}");
            }
        }
        assert_eq!(log1().density_window().unwrap().rho_star, 1.0);
    }

    #[cfg(feature = "serde")]
    #[test]
    fn json_shape() {
        let eos: EosSpec = serde_json::from_str(r#"{"family":"Logarithmic","K1":1.0,"c":1.0}"#).unwrap();
        assert_eq!(eos, log1());
        let eos: EosSpec = serde_json::from_str(r#"{"family":"Polytropic","A":2,"K1":1,"K":0,"c":1}"#).unwrap();
        assert_eq!(eos.a, 2.0);
        let back = serde_json::to_value(eos).unwrap();
        assert_eq!(back, serde_json::json!({"family":"Polytropic","A":2.0,"K1":1.0,"K":0.0,"c":1.0}));
        assert!(serde_json::from_str::<EosSpec>(r#"{"family":"Polytropic","K1":1}"#).is_err());
        assert!(serde_json::from_str::<EosSpec>(r#"{"family":"Chaplygin","A":0.5,"K1":1}"#).is_err());
    }
}
