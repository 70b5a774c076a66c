//! Scalar symmetrization of the classical isentropic Euler system.
//!
//! With `v(ρ) = (2/A)(√p'(ρ) − B)` the system
//!
//! ```text
//! ρ_t + (ρu)_x = 0,            ρ(u_t + u u_x) + p_x = 0
//! ```
//!
//! becomes
//!
//! ```text
//! v_t + B u_x = −u v_x − (A/2) v u_x,      u_t + B v_x = −u u_x − (A/2) v v_x
//! ```
//!
//! exactly when `A p'/p'' = ρ`. This module evaluates both systems on a 1D
//! periodic grid and integrates them side by side.

use alloc::vec::Vec;

use crate::eos::{EosSpec, PressureLaw};
use crate::error::{Error, Result};
use crate::numerics::stencil::periodic_d1;
#[allow(unused_imports)]
use num_traits::Float;

/// Smallest grid the fourth-order periodic stencil accepts.
pub const MIN_CELLS: usize = 8;

/// Coupling constants `(A, B)` of the symmetric system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryParams {
    pub a: f64,
    pub b: f64,
}

impl SymmetryParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("symmetry parameters need A != 0 and finite B, got A = {a}, B = {b}")));
        }
        Ok(Self { a, b })
    }

    /// `(A_eff, 0)` for a family member.
    pub fn for_eos(eos: &EosSpec) -> Self {
        Self { a: eos.sound_speed_exponent(), b: 0.0 }
    }
}

/// Density and velocity on a periodic grid `x_i = i·dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalField1D {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub dx: f64,
    pub t: f64,
}

/// The transformed unknowns `(v, u)` on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricField1D {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub dx: f64,
    pub t: f64,
}

fn check_grid(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(alloc::format!("field lengths differ: {} vs {}", a.len(), b.len())));
    }
    if a.len() < MIN_CELLS {
        return Err(Error::GridTooSmall { cells: a.len(), min: MIN_CELLS });
    }
    Ok(())
}

impl ClassicalField1D {
    pub fn new(rho: Vec<f64>, u: Vec<f64>, dx: f64) -> Result<Self> {
        let f = Self { rho, u, dx, t: 0.0 };
        f.validate()?;
        Ok(f)
    }

    /// `ρ = ρ₀ + ε sin x`, `u = u_amp·cos x` on `[0, 2π)` with `cells` points.
    pub fn sine_wave(cells: usize, rho0: f64, eps: f64, u_amp: f64) -> Result<Self> {
        let dx = 2.0 * core::f64::consts::PI / cells as f64;
        let xs = (0..cells).map(|i| i as f64 * dx);
        let rho = xs.clone().map(|x| rho0 + eps * x.sin()).collect();
        let u = xs.map(|x| u_amp * x.cos()).collect();
        Self::new(rho, u, dx)
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(&self.rho, &self.u)?;
        if !(self.dx > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("dx must be positive, got {}", self.dx)));
        }
        if let Some(&bad) = self.rho.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::NonpositiveDensity { rho: bad });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Map every density through `v(ρ)`.
    pub fn to_symmetric<L: PressureLaw + ?Sized>(&self, law: &L, params: SymmetryParams) -> Result<SymmetricField1D> {
        let v = self.rho.iter().map(|&r| v_of_rho(law, params, r)).collect::<Result<Vec<_>>>()?;
        Ok(SymmetricField1D { v, u: self.u.clone(), dx: self.dx, t: self.t })
    }
}

/// `v(ρ) = (2/A)(√p'(ρ) − B)`.
pub fn v_of_rho<L: PressureLaw + ?Sized>(law: &L, params: SymmetryParams, rho: f64) -> Result<f64> {
    let cs = law.sound_speed(rho)?;
    Ok(2.0 / params.a * (cs - params.b))
}

/// `dv/dρ = p''/(A√p')`.
pub fn dv_drho<L: PressureLaw + ?Sized>(law: &L, params: SymmetryParams, rho: f64) -> Result<f64> {
    let cs = law.sound_speed(rho)?;
    Ok(law.d2p_drho2(rho)? / (params.a * cs))
}

/// Closed-form inverse of [`v_of_rho`] using `p' = K₁ρ^e`.
pub fn rho_of_v(eos: &EosSpec, params: SymmetryParams, v: f64) -> Result<f64> {
    let cs = params.b + 0.5 * params.a * v;
    if !(cs > 0.0) {
        return Err(Error::OutOfRange { value: v, reason: "B + A v / 2 must be positive" });
    }
    Ok((cs * cs / eos.k1).powf(1.0 / eos.sound_speed_exponent()))
}

/// Pointwise residuals `(ρ_t + (ρu)_x, ρ(u_t + u u_x) + p_x)` with caller-supplied
/// time derivatives and fourth-order central space derivatives.
pub fn residual_classical<L: PressureLaw + ?Sized>(
    field: &ClassicalField1D,
    rho_t: &[f64],
    u_t: &[f64],
    law: &L,
) -> Result<(Vec<f64>, Vec<f64>)> {
    field.validate()?;
    check_grid(&field.rho, rho_t)?;
    check_grid(&field.u, u_t)?;
    let mass: Vec<f64> = field.rho.iter().zip(&field.u).map(|(r, u)| r * u).collect();
    let p = field.rho.iter().map(|&r| law.pressure(r)).collect::<Result<Vec<_>>>()?;
    let mass_x = periodic_d1(&mass, field.dx);
    let u_x = periodic_d1(&field.u, field.dx);
    let p_x = periodic_d1(&p, field.dx);
    let r1 = (0..field.len()).map(|i| rho_t[i] + mass_x[i]).collect();
    let r2 = (0..field.len())
        .map(|i| field.rho[i] * (u_t[i] + field.u[i] * u_x[i]) + p_x[i])
        .collect();
    Ok((r1, r2))
}

/// Pointwise residuals of the symmetric system.
pub fn residual_symmetric(
    field: &SymmetricField1D,
    v_t: &[f64],
    u_t: &[f64],
    params: SymmetryParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_grid(&field.v, &field.u)?;
    check_grid(&field.v, v_t)?;
    check_grid(&field.u, u_t)?;
    let (rhs_v, rhs_u) = symmetric_rhs(field, params);
    let r1 = v_t.iter().zip(&rhs_v).map(|(a, b)| a - b).collect();
    let r2 = u_t.iter().zip(&rhs_u).map(|(a, b)| a - b).collect();
    Ok((r1, r2))
}

/// Semi-discrete right-hand side `(ρ_t, u_t)` of the classical system.
pub fn classical_rhs<L: PressureLaw + ?Sized>(field: &ClassicalField1D, law: &L) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = field.len();
    let mass: Vec<f64> = field.rho.iter().zip(&field.u).map(|(r, u)| r * u).collect();
    let p = field.rho.iter().map(|&r| law.pressure(r)).collect::<Result<Vec<_>>>()?;
    let mass_x = periodic_d1(&mass, field.dx);
    let u_x = periodic_d1(&field.u, field.dx);
    let p_x = periodic_d1(&p, field.dx);
    let rho_t = mass_x.iter().map(|m| -m).collect();
    let u_t = (0..n).map(|i| -field.u[i] * u_x[i] - p_x[i] / field.rho[i]).collect();
    Ok((rho_t, u_t))
}

/// Semi-discrete right-hand side `(v_t, u_t)` of the symmetric system.
pub fn symmetric_rhs(field: &SymmetricField1D, params: SymmetryParams) -> (Vec<f64>, Vec<f64>) {
    let SymmetryParams { a, b } = params;
    let v_x = periodic_d1(&field.v, field.dx);
    let u_x = periodic_d1(&field.u, field.dx);
    let n = field.v.len();
    let v_t = (0..n)
        .map(|i| -b * u_x[i] - field.u[i] * v_x[i] - 0.5 * a * field.v[i] * u_x[i])
        .collect();
    let u_t = (0..n)
        .map(|i| -b * v_x[i] - field.u[i] * u_x[i] - 0.5 * a * field.v[i] * v_x[i])
        .collect();
    (v_t, u_t)
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Relative defect of the symmetric system on a classical solution.
///
/// Time derivatives come from the classical right-hand side (so the classical
/// residual vanishes), are pushed through `v_t = v'(ρ)ρ_t`, and the symmetric
/// residual is measured against the size of its terms. Family members give
/// truncation-level defects; other laws give `O(1)`.
pub fn symmetric_defect<L: PressureLaw + ?Sized>(field: &ClassicalField1D, law: &L, params: SymmetryParams) -> Result<f64> {
    field.validate()?;
    let (rho_t, u_t) = classical_rhs(field, law)?;
    let sym = field.to_symmetric(law, params)?;
    let v_t = field
        .rho
        .iter()
        .zip(&rho_t)
        .map(|(&r, rt)| Ok(dv_drho(law, params, r)? * rt))
        .collect::<Result<Vec<_>>>()?;
    let (r1, r2) = residual_symmetric(&sym, &v_t, &u_t, params)?;
    let scale1 = max_abs(&v_t).max(f64::MIN_POSITIVE);
    let scale2 = max_abs(&u_t).max(f64::MIN_POSITIVE);
    Ok((max_abs(&r1) / scale1).max(max_abs(&r2) / scale2))
}

/// Settings for [`evolve_pair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// `dt = cfl·dx / max(|u| + √p')` when no explicit step is given.
    pub cfl: f64,
    /// Largest Courant number accepted for an explicit step.
    pub max_cfl: f64,
    /// Blow-up when `max|u_x| > factor·max(initial max|u_x|, 1)`.
    pub blowup_factor: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { cfl: 0.2, max_cfl: 1.0, blowup_factor: 1e3 }
    }
}

/// Final states of the two independent integrations.
#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub classical: ClassicalField1D,
    pub symmetric: SymmetricField1D,
    /// `v(ρ)` of the final classical density.
    pub v_transformed: Vec<f64>,
    pub steps: usize,
    pub dt: f64,
}

impl PairOutcome {
    /// `max_i |v(ρ_A) − v_B|`.
    pub fn max_v_difference(&self) -> f64 {
        self.v_transformed
            .iter()
            .zip(&self.symmetric.v)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn max_u_difference(&self) -> f64 {
        self.classical.u.iter().zip(&self.symmetric.u).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn max_speed<L: PressureLaw + ?Sized>(field: &ClassicalField1D, law: &L) -> Result<f64> {
    let mut s = 0.0f64;
    for (&r, &u) in field.rho.iter().zip(&field.u) {
        s = s.max(u.abs() + law.sound_speed(r)?);
    }
    Ok(s)
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

fn rk4_combine(y: &[f64], dt: f64, k: [&[f64]; 4]) -> Vec<f64> {
    (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]))
        .collect()
}

fn rk4_classical<L: PressureLaw + ?Sized>(f: &ClassicalField1D, law: &L, dt: f64) -> Result<ClassicalField1D> {
    let stage = |rho: Vec<f64>, u: Vec<f64>| -> Result<(Vec<f64>, Vec<f64>)> {
        let s = ClassicalField1D { rho, u, dx: f.dx, t: f.t };
        if let Some(&bad) = s.rho.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::NonpositiveDensity { rho: bad });
        }
        classical_rhs(&s, law)
    };
    let k1 = classical_rhs(f, law)?;
    let k2 = stage(axpy(&f.rho, 0.5 * dt, &k1.0), axpy(&f.u, 0.5 * dt, &k1.1))?;
    let k3 = stage(axpy(&f.rho, 0.5 * dt, &k2.0), axpy(&f.u, 0.5 * dt, &k2.1))?;
    let k4 = stage(axpy(&f.rho, dt, &k3.0), axpy(&f.u, dt, &k3.1))?;
    Ok(ClassicalField1D {
        rho: rk4_combine(&f.rho, dt, [&k1.0, &k2.0, &k3.0, &k4.0]),
        u: rk4_combine(&f.u, dt, [&k1.1, &k2.1, &k3.1, &k4.1]),
        dx: f.dx,
        t: f.t + dt,
    })
}

fn rk4_symmetric(f: &SymmetricField1D, params: SymmetryParams, dt: f64) -> SymmetricField1D {
    let stage = |v: Vec<f64>, u: Vec<f64>| symmetric_rhs(&SymmetricField1D { v, u, dx: f.dx, t: f.t }, params);
    let k1 = symmetric_rhs(f, params);
    let k2 = stage(axpy(&f.v, 0.5 * dt, &k1.0), axpy(&f.u, 0.5 * dt, &k1.1));
    let k3 = stage(axpy(&f.v, 0.5 * dt, &k2.0), axpy(&f.u, 0.5 * dt, &k2.1));
    let k4 = stage(axpy(&f.v, dt, &k3.0), axpy(&f.u, dt, &k3.1));
    SymmetricField1D {
        v: rk4_combine(&f.v, dt, [&k1.0, &k2.0, &k3.0, &k4.0]),
        u: rk4_combine(&f.u, dt, [&k1.1, &k2.1, &k3.1, &k4.1]),
        dx: f.dx,
        t: f.t + dt,
    }
}

/// Integrate the classical and the symmetric system independently from
/// matched initial data (RK4 in time, fourth-order central in space).
///
/// The step is fixed for the whole run: `dt` if given, otherwise
/// `cfl·dx/max(|u| + √p')` evaluated on the initial data, shortened so that
/// an integer number of steps lands on `t_end`.
pub fn evolve_pair<L: PressureLaw + ?Sized>(
    init: &ClassicalField1D,
    law: &L,
    params: SymmetryParams,
    t_end: f64,
    dt: Option<f64>,
    opts: EvolveOptions,
) -> Result<PairOutcome> {
    init.validate()?;
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("t_end must be non-negative, got {t_end}")));
    }
    let dx = init.dx;
    let speed0 = max_speed(init, law)?;
    let dt_nominal = match dt {
        Some(dt) if dt > 0.0 => dt,
        Some(dt) => return Err(Error::InvalidParameter(alloc::format!("dt must be positive, got {dt}"))),
        None => opts.cfl * dx / speed0,
    };
    let steps = if t_end == 0.0 { 0 } else { (t_end / dt_nominal).ceil() as usize };
    let dt = if steps == 0 { 0.0 } else { t_end / steps as f64 };

    let grad0 = max_abs(&periodic_d1(&init.u, dx));
    let threshold = opts.blowup_factor * grad0.max(1.0);

    let mut classical = init.clone();
    let mut symmetric = init.to_symmetric(law, params)?;
    for _ in 0..steps {
        let limit = opts.max_cfl * dx / max_speed(&classical, law)?;
        if dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
        classical = rk4_classical(&classical, law, dt)?;
        symmetric = rk4_symmetric(&symmetric, params, dt);
        for u in [&classical.u, &symmetric.u] {
            let g = max_abs(&periodic_d1(u, dx));
            if !(g <= threshold) {
                return Err(Error::BlowupDetected { t: classical.t, max_grad: g, threshold });
            }
        }
    }
    symmetric.t = classical.t;
    let v_transformed = classical.rho.iter().map(|&r| v_of_rho(law, params, r)).collect::<Result<Vec<_>>>()?;
    Ok(PairOutcome { classical, symmetric, v_transformed, steps, dt })
}

/// One refinement level of an equivalence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceLevel {
    pub cells: usize,
    pub max_v_difference: f64,
    pub max_u_difference: f64,
}

/// Run [`evolve_pair`] from `ρ = ρ₀ + ε sin x`, `u = 0` at each resolution.
pub fn equivalence_study<L: PressureLaw + ?Sized>(
    law: &L,
    params: SymmetryParams,
    rho0: f64,
    eps: f64,
    t_end: f64,
    cells: &[usize],
) -> Result<Vec<EquivalenceLevel>> {
    cells
        .iter()
        .map(|&n| {
            let init = ClassicalField1D::sine_wave(n, rho0, eps, 0.0)?;
            let out = evolve_pair(&init, law, params, t_end, None, EvolveOptions::default())?;
            Ok(EquivalenceLevel { cells: n, max_v_difference: out.max_v_difference(), max_u_difference: out.max_u_difference() })
        })
        .collect()
}
