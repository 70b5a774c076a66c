//! Finite-volume solver for the planar relativistic Euler equations
//!
//! ```text
//! ∂_t D + ∂_x S = 0,           D = (ρc²+p)/(c²−v²) − p/c²
//! ∂_t S + ∂_x (Sv + p) = 0,    S = (ρc²+p)v/(c²−v²)
//! ```
//!
//! with the logarithmic pressure law. SSP-RK2 in time, optional minmod
//! reconstruction of `(ρ, v)`, HLL or Rusanov interface fluxes.

use alloc::vec;
use alloc::vec::Vec;

use crate::eos::{AdmissibleWindow, EosSpec, PressureLaw};
use crate::error::{Error, Result};
use crate::numerics::roots::{newton_bracketed, RootError, RootOptions};
#[allow(unused_imports)]
use num_traits::Float;

/// Ghost cells on each side of the grid.
pub const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConsState {
    pub d: f64,
    pub s: f64,
}

/// Primitive state `(ρ, v)` of the planar reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prim1 {
    pub rho: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum Bc {
    Periodic,
    Outflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum Limiter {
    /// Unlimited central slopes.
    #[default]
    None,
    Minmod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum Riemann {
    #[default]
    Hll,
    Rusanov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub eos: EosSpec,
    pub cfl: f64,
    pub t_end: f64,
    pub limiter: Limiter,
    pub riemann: Riemann,
    /// Replace unrecoverable cells by the density floor instead of failing.
    pub clamp: bool,
    /// Dimensionless margin on `|v| < c`.
    pub velocity_margin: f64,
}

impl SolverConfig {
    pub fn new(eos: EosSpec, t_end: f64) -> Self {
        Self {
            eos,
            cfl: 0.45,
            t_end,
            limiter: Limiter::None,
            riemann: Riemann::Hll,
            clamp: false,
            velocity_margin: AdmissibleWindow::DEFAULT_MARGIN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("t_end must be finite and non-negative, got {}", self.t_end)));
        }
        if !(self.velocity_margin > 0.0 && self.velocity_margin < 1.0) {
            return Err(Error::InvalidParameter("velocity margin must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// `(ρ, v) ↦ (D, S)`.
pub fn prim_to_cons(eos: &EosSpec, s: &Prim1) -> Result<ConsState> {
    let c2 = eos.c * eos.c;
    let v2 = s.v * s.v;
    if !(v2 < c2) {
        return Err(Error::SuperluminalState { v2, limit: c2 });
    }
    let p = eos.pressure(s.rho)?;
    let h = s.rho * c2 + p;
    let gap = c2 - v2;
    Ok(ConsState { d: h / gap - p / c2, s: h * s.v / gap })
}

/// `(D, S) ↦ (ρ, v)`.
///
/// With `E = D + p/c²`, `v = S/E` and `ρ` solves
/// `g(ρ) = c²(ρ − D) + S²/E = 0`. On `ρ ≥ ρ*`, `g' = c² − p'v²/c² > 0`, and any
/// admissible preimage has `ρ ≤ D`, so the root is bracketed by `[ρ*, D]`.
pub fn cons_to_prim(eos: &EosSpec, cs: &ConsState) -> Result<Prim1> {
    cons_to_prim_near(eos, cs, cs.d)
}

/// [`cons_to_prim`] with a starting guess for `ρ` (clamped into the bracket).
pub fn cons_to_prim_near(eos: &EosSpec, cs: &ConsState, guess: f64) -> Result<Prim1> {
    let c2 = eos.c * eos.c;
    let rho_star = eos.rho_star()?;
    let (d, s) = (cs.d, cs.s);
    let fail = |lo: f64, hi: f64| Error::RecoveryFailure { cell: None, d, s, lo, hi };
    if !(d.is_finite() && s.is_finite()) || !(d >= rho_star) {
        return Err(fail(rho_star, d));
    }
    if s == 0.0 {
        return Ok(Prim1 { rho: d, v: 0.0 });
    }
    let g = |rho: f64| -> (f64, f64) {
        let (p, dp) = match (eos.pressure(rho), eos.dp_drho(rho)) {
            (Ok(p), Ok(dp)) => (p, dp),
            _ => return (f64::NAN, f64::NAN),
        };
        let e = d + p / c2;
        (c2 * (rho - d) + s * s / e, c2 - s * s * dp / (c2 * e * e))
    };
    // warm-started Newton usually lands in a few steps; the bracketed
    // solver is the fallback whenever an iterate leaves [ρ*, D]
    let mut rho = f64::NAN;
    let mut x = guess.clamp(rho_star, d);
    for _ in 0..8 {
        let (gx, dg) = g(x);
        let next = x - gx / dg;
        if !(next >= rho_star && next <= d) {
            break;
        }
        if (next - x).abs() <= 1e-13 * x {
            rho = next;
            break;
        }
        x = next;
    }
    if rho.is_nan() {
        let opts = RootOptions { x_rel_tol: 4.0 * f64::EPSILON, f_abs_tol: 0.0, max_iter: 50 };
        rho = match newton_bracketed(g, rho_star, d, guess.clamp(rho_star, d), opts) {
            Ok(r) => r.x,
            Err(RootError::MaxIterations { lo, hi }) => bisect(|r| g(r).0, lo, hi).ok_or_else(|| fail(lo, hi))?,
            Err(RootError::NotBracketed { lo, hi, .. }) => return Err(fail(lo, hi)),
            Err(RootError::NotFinite { x }) => return Err(fail(rho_star.min(x), d)),
        };
    }
    let (res, _) = g(rho);
    if !(res.abs() <= 1e-11 * c2 * d) {
        return Err(fail(rho, rho));
    }
    let v = s / (d + eos.pressure(rho)? / c2);
    if !(rho >= rho_star) || !(v * v < c2) {
        return Err(Error::InadmissibleTarget { cell: None, rho, v });
    }
    Ok(Prim1 { rho, v })
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return None;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `(S, Sv + p)`.
pub fn flux(eos: &EosSpec, s: &Prim1) -> Result<(f64, f64)> {
    let c2 = eos.c * eos.c;
    let v2 = s.v * s.v;
    if !(v2 < c2) {
        return Err(Error::SuperluminalState { v2, limit: c2 });
    }
    let p = eos.pressure(s.rho)?;
    let mom = (s.rho * c2 + p) * s.v / (c2 - v2);
    Ok((mom, mom * s.v + p))
}

/// Characteristic speeds `λ± = (v ± c_s)/(1 ± v c_s/c²)` with `c_s = √p'`.
pub fn characteristic_speeds(eos: &EosSpec, s: &Prim1) -> Result<(f64, f64)> {
    let c2 = eos.c * eos.c;
    if !(s.v * s.v < c2) {
        return Err(Error::SuperluminalState { v2: s.v * s.v, limit: c2 });
    }
    let cs = eos.sound_speed(s.rho)?;
    Ok(((s.v - cs) / (1.0 - s.v * cs / c2), (s.v + cs) / (1.0 + s.v * cs / c2)))
}

/// HLL bounds over a pair of states.
pub fn wave_speeds(eos: &EosSpec, left: &Prim1, right: &Prim1) -> Result<(f64, f64)> {
    let (lm, lp) = characteristic_speeds(eos, left)?;
    let (rm, rp) = characteristic_speeds(eos, right)?;
    Ok((lm.min(rm), lp.max(rp)))
}

/// Conserved state, physical flux and characteristic speeds of one state,
/// sharing a single pressure evaluation.
struct WaveData {
    u: ConsState,
    f: (f64, f64),
    lambda: (f64, f64),
}

fn wave_data(eos: &EosSpec, s: &Prim1) -> Result<WaveData> {
    let c2 = eos.c * eos.c;
    let v2 = s.v * s.v;
    if !(v2 < c2) {
        return Err(Error::SuperluminalState { v2, limit: c2 });
    }
    let p = eos.pressure(s.rho)?;
    let h = s.rho * c2 + p;
    let gap = c2 - v2;
    let mom = h * s.v / gap;
    let cs = eos.sound_speed(s.rho)?;
    Ok(WaveData {
        u: ConsState { d: h / gap - p / c2, s: mom },
        f: (mom, mom * s.v + p),
        lambda: ((s.v - cs) / (1.0 - s.v * cs / c2), (s.v + cs) / (1.0 + s.v * cs / c2)),
    })
}

/// HLL or Rusanov flux between two states.
pub fn interface_flux(eos: &EosSpec, riemann: Riemann, l: &Prim1, r: &Prim1) -> Result<(f64, f64)> {
    let (wl, wr) = (wave_data(eos, l)?, wave_data(eos, r)?);
    let (fl, fr, ul, ur) = (wl.f, wr.f, wl.u, wr.u);
    let (smin, smax) = (wl.lambda.0.min(wr.lambda.0), wl.lambda.1.max(wr.lambda.1));
    Ok(match riemann {
        Riemann::Hll => {
            if smin >= 0.0 {
                fl
            } else if smax <= 0.0 {
                fr
            } else {
                let w = 1.0 / (smax - smin);
                (
                    w * (smax * fl.0 - smin * fr.0 + smin * smax * (ur.d - ul.d)),
                    w * (smax * fl.1 - smin * fr.1 + smin * smax * (ur.s - ul.s)),
                )
            }
        }
        Riemann::Rusanov => {
            let a = smin.abs().max(smax.abs());
            (0.5 * (fl.0 + fr.0 - a * (ur.d - ul.d)), 0.5 * (fl.1 + fr.1 - a * (ur.s - ul.s)))
        }
    })
}

/// Uniform grid on `[x0, x0 + cells·dx]` holding cell averages plus ghosts.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    /// `GHOSTS + n + GHOSTS` entries; the interior starts at index `GHOSTS`.
    pub cells: Vec<ConsState>,
    pub x0: f64,
    pub dx: f64,
    pub bc: Bc,
    pub t: f64,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 4;

    /// Grid from interior cell averages; ghosts are filled immediately.
    pub fn new(interior: Vec<ConsState>, x0: f64, dx: f64, bc: Bc) -> Result<Self> {
        if interior.len() < Self::MIN_CELLS {
            return Err(Error::GridTooSmall { cells: interior.len(), min: Self::MIN_CELLS });
        }
        if !(dx > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("dx must be positive, got {dx}")));
        }
        let mut cells = vec![interior[0]; GHOSTS];
        cells.extend(interior);
        cells.extend(core::iter::repeat_n(cells[cells.len() - 1], GHOSTS));
        let mut g = Self { cells, x0, dx, bc, t: 0.0 };
        g.sync();
        Ok(g)
    }

    /// Cell averages of a primitive profile by 3-point Gauss quadrature.
    pub fn from_profile(
        eos: &EosSpec,
        cells: usize,
        x0: f64,
        x1: f64,
        bc: Bc,
        profile: impl Fn(f64) -> Prim1,
    ) -> Result<Self> {
        let dx = (x1 - x0) / cells as f64;
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        let mut interior = Vec::with_capacity(cells);
        for i in 0..cells {
            let xc = x0 + (i as f64 + 0.5) * dx;
            let mut acc = ConsState { d: 0.0, s: 0.0 };
            for (xi, wi) in nodes.iter().zip(weights) {
                let u = prim_to_cons(eos, &profile(xc + 0.5 * dx * xi))?;
                acc.d += wi * u.d;
                acc.s += wi * u.s;
            }
            interior.push(acc);
        }
        Self::new(interior, x0, dx, bc)
    }

    pub fn len(&self) -> usize {
        self.cells.len() - 2 * GHOSTS
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interior(&self) -> &[ConsState] {
        &self.cells[GHOSTS..GHOSTS + self.len()]
    }

    pub fn interior_mut(&mut self) -> &mut [ConsState] {
        let n = self.len();
        &mut self.cells[GHOSTS..GHOSTS + n]
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    /// Refill the ghost layers from the interior.
    pub fn sync(&mut self) {
        let n = self.len();
        for g in 0..GHOSTS {
            let (left, right) = match self.bc {
                Bc::Periodic => (self.cells[n + g], self.cells[GHOSTS + g]),
                Bc::Outflow => (self.cells[GHOSTS], self.cells[GHOSTS + n - 1]),
            };
            self.cells[g] = left;
            self.cells[GHOSTS + n + g] = right;
        }
    }

    /// `(ΣD·dx, ΣS·dx)` over the interior.
    pub fn totals(&self) -> (f64, f64) {
        let (d, s) = self.interior().iter().fold((0.0, 0.0), |(d, s), c| (d + c.d, s + c.s));
        (d * self.dx, s * self.dx)
    }
}

/// Pad interior values with ghosts according to the boundary condition.
fn pad<T: Copy>(interior: &[T], bc: Bc) -> Vec<T> {
    let n = interior.len();
    let mut out = Vec::with_capacity(n + 2 * GHOSTS);
    for g in 0..GHOSTS {
        out.push(match bc {
            Bc::Periodic => interior[n - GHOSTS + g],
            Bc::Outflow => interior[0],
        });
    }
    out.extend_from_slice(interior);
    for g in 0..GHOSTS {
        out.push(match bc {
            Bc::Periodic => interior[g],
            Bc::Outflow => interior[n - 1],
        });
    }
    out
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Time derivative of the interior plus the net inflow through the two
/// boundary faces, `(F_left − F_right)`.
struct Rhs {
    du: Vec<ConsState>,
    inflow: (f64, f64),
}

/// Summary of [`Solver::run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub grid: Grid1D,
    pub steps: usize,
    /// Relative drift of `ΣD·dx` after accounting for boundary fluxes.
    pub mass_drift: f64,
    /// Drift of `ΣS·dx`, relative to `c·ΣD·dx`.
    pub momentum_drift: f64,
    /// `(t, primitives)` at each requested output time.
    pub snapshots: Vec<(f64, Vec<Prim1>)>,
    pub min_rho: f64,
    pub max_speed: f64,
    /// Cells replaced by the density floor (only with `clamp`).
    pub clamped: usize,
}

#[derive(Debug, Clone)]
pub struct Solver {
    cfg: SolverConfig,
    window: AdmissibleWindow,
}

impl Solver {
    /// Requires a logarithmic law with `K₁ > c²/e`.
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let window = cfg.eos.admissible_window()?;
        Ok(Self { cfg, window })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn window(&self) -> &AdmissibleWindow {
        &self.window
    }

    fn c2(&self) -> f64 {
        self.cfg.eos.c * self.cfg.eos.c
    }

    /// Reject initial data outside `ρ ≥ ρ*+δ`, `v² ≤ (1−δ)c²`.
    pub fn check_margins(&self, p: &Prim1) -> Result<()> {
        let floor = self.window.rho_min();
        if !(p.rho >= floor) {
            return Err(Error::AssumptionViolation(alloc::format!("initial density {} is below rho* + delta = {floor}", p.rho)));
        }
        let limit = (1.0 - self.cfg.velocity_margin) * self.c2();
        if !(p.v * p.v <= limit) {
            return Err(Error::AssumptionViolation(alloc::format!("initial v^2 = {} exceeds (1 - delta) c^2 = {limit}", p.v * p.v)));
        }
        Ok(())
    }

    /// Recover every interior cell; indices are attached to failures.
    pub fn primitives(&self, grid: &Grid1D) -> Result<Vec<Prim1>> {
        let mut grid = grid.clone();
        self.recover(&mut grid, None, &mut 0)
    }

    /// Recovery warm-started from `hint` (the previous stage's primitives);
    /// with `clamp` set, unrecoverable cells are reset to the density floor
    /// and counted.
    fn recover(&self, grid: &mut Grid1D, hint: Option<&[Prim1]>, clamped: &mut usize) -> Result<Vec<Prim1>> {
        let eos = self.cfg.eos;
        let vmax = (1.0 - self.cfg.velocity_margin).sqrt() * eos.c;
        let floor = self.window.rho_min();
        let mut out = Vec::with_capacity(grid.len());
        let mut touched = false;
        for (i, c) in grid.interior_mut().iter_mut().enumerate() {
            let guess = hint.map_or(c.d, |h| h[i].rho);
            match cons_to_prim_near(&eos, c, guess) {
                Ok(p) => out.push(p),
                Err(Error::RecoveryFailure { .. }) | Err(Error::InadmissibleTarget { .. }) if self.cfg.clamp => {
                    let e = c.d.max(floor) + eos.pressure(floor)? / (eos.c * eos.c);
                    let p = Prim1 { rho: floor, v: (c.s / e).clamp(-vmax, vmax) };
                    *c = prim_to_cons(&eos, &p)?;
                    *clamped += 1;
                    touched = true;
                    out.push(p);
                }
                Err(e) => return Err(e.in_cell(i)),
            }
        }
        if touched {
            grid.sync();
        }
        Ok(out)
    }

    /// Largest `|λ±|` over the given states.
    pub fn max_speed(&self, prims: &[Prim1]) -> Result<f64> {
        prims.iter().try_fold(0.0f64, |m, p| {
            let (a, b) = characteristic_speeds(&self.cfg.eos, p)?;
            Ok(m.max(a.abs()).max(b.abs()))
        })
    }

    /// `dt = cfl·dx/max|λ|`.
    pub fn stable_dt(&self, grid: &Grid1D, prims: &[Prim1]) -> Result<f64> {
        let a = self.max_speed(prims)?;
        Ok(if a > 0.0 { self.cfg.cfl * grid.dx / a } else { f64::INFINITY })
    }

    fn admissible_face(&self, p: &Prim1) -> bool {
        p.rho >= self.window.rho_min() && p.v * p.v < (1.0 - self.cfg.velocity_margin) * self.c2()
    }

    fn rhs(&self, grid: &Grid1D, prims: &[Prim1]) -> Result<Rhs> {
        let n = prims.len();
        let eos = &self.cfg.eos;
        let q = pad(prims, grid.bc);
        // face values (minus side, plus side) of padded cells 1..=n+2
        let mut faces = vec![(q[0], q[0]); n + 2 * GHOSTS];
        for j in 1..n + 2 * GHOSTS - 1 {
            let slope = |f: fn(&Prim1) -> f64| {
                let (a, b) = (f(&q[j]) - f(&q[j - 1]), f(&q[j + 1]) - f(&q[j]));
                match self.cfg.limiter {
                    Limiter::None => 0.5 * (a + b),
                    Limiter::Minmod => minmod(a, b),
                }
            };
            let (sr, sv) = (slope(|p| p.rho), slope(|p| p.v));
            let lo = Prim1 { rho: q[j].rho - 0.5 * sr, v: q[j].v - 0.5 * sv };
            let hi = Prim1 { rho: q[j].rho + 0.5 * sr, v: q[j].v + 0.5 * sv };
            faces[j] = if self.admissible_face(&lo) && self.admissible_face(&hi) { (lo, hi) } else { (q[j], q[j]) };
        }
        // face m separates padded cells m+1 and m+2
        let mut fl = Vec::with_capacity(n + 1);
        for m in 0..=n {
            fl.push(interface_flux(eos, self.cfg.riemann, &faces[m + 1].1, &faces[m + 2].0)?);
        }
        let du = (0..n)
            .map(|i| ConsState { d: (fl[i].0 - fl[i + 1].0) / grid.dx, s: (fl[i].1 - fl[i + 1].1) / grid.dx })
            .collect();
        Ok(Rhs { du, inflow: (fl[0].0 - fl[n].0, fl[0].1 - fl[n].1) })
    }

    /// One SSP-RK2 step of size `dt`; returns the boundary inflow of `(D, S)`.
    pub fn step(&self, grid: &mut Grid1D, dt: f64) -> Result<(f64, f64)> {
        let mut clamped = 0;
        let prims = self.recover(grid, None, &mut clamped)?;
        self.step_from(grid, &prims, dt, &mut clamped).map(|(inflow, _)| inflow)
    }

    /// SSP-RK2 step from already recovered `prims`; also returns the
    /// intermediate-stage primitives as a warm start for the next recovery.
    fn step_from(&self, grid: &mut Grid1D, prims: &[Prim1], dt: f64, clamped: &mut usize) -> Result<((f64, f64), Vec<Prim1>)> {
        let limit = grid.dx / self.max_speed(prims)?;
        if !(dt > 0.0 && dt <= limit) {
            return Err(Error::CflViolation { dt, limit });
        }
        let start: Vec<ConsState> = grid.interior().to_vec();
        let r1 = self.rhs(grid, prims)?;
        for (c, d) in grid.interior_mut().iter_mut().zip(&r1.du) {
            c.d += dt * d.d;
            c.s += dt * d.s;
        }
        grid.sync();
        let prims1 = self.recover(grid, Some(prims), clamped)?;
        let r2 = self.rhs(grid, &prims1)?;
        for ((c, u0), d) in grid.interior_mut().iter_mut().zip(&start).zip(&r2.du) {
            c.d = 0.5 * u0.d + 0.5 * (c.d + dt * d.d);
            c.s = 0.5 * u0.s + 0.5 * (c.s + dt * d.s);
        }
        grid.sync();
        grid.t += dt;
        Ok(((0.5 * dt * (r1.inflow.0 + r2.inflow.0), 0.5 * dt * (r1.inflow.1 + r2.inflow.1)), prims1))
    }

    /// Integrate to `t_end`, recording primitives at each `outputs` time
    /// (always including the final time).
    pub fn run(&self, mut grid: Grid1D, outputs: &[f64]) -> Result<RunOutcome> {
        self.run_limited(&mut grid, outputs, usize::MAX).map(|(o, _)| o)
    }

    /// As [`Self::run`], stopping early after `max_steps`.
    pub fn run_steps(&self, mut grid: Grid1D, max_steps: usize) -> Result<RunOutcome> {
        self.run_limited(&mut grid, &[], max_steps).map(|(o, _)| o)
    }

    fn run_limited(&self, grid: &mut Grid1D, outputs: &[f64], max_steps: usize) -> Result<(RunOutcome, bool)> {
        let init = self.primitives(grid)?;
        for p in &init {
            self.check_margins(p)?;
        }
        let (d0, s0) = grid.totals();
        let mut inflow = (0.0, 0.0);
        let mut clamped = 0;
        let mut steps = 0;
        let mut snapshots = Vec::new();
        let mut min_rho = f64::INFINITY;
        let mut max_speed = 0.0f64;
        let mut targets: Vec<f64> = outputs.iter().copied().filter(|t| *t < self.cfg.t_end).collect();
        targets.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        targets.push(self.cfg.t_end);
        let mut next = 0;
        let mut record = |t: f64, prims: &[Prim1], snaps: &mut Vec<(f64, Vec<Prim1>)>| -> Result<()> {
            for (i, p) in prims.iter().enumerate() {
                if !(p.rho >= self.window.rho_star) || !(p.v * p.v < self.c2()) {
                    return Err(Error::InadmissibleTarget { cell: Some(i), rho: p.rho, v: p.v });
                }
                min_rho = min_rho.min(p.rho);
                max_speed = max_speed.max(p.v.abs());
            }
            snaps.push((t, prims.to_vec()));
            Ok(())
        };
        while targets[next] <= grid.t {
            record(grid.t, &init, &mut snapshots)?;
            next += 1;
            if next == targets.len() {
                break;
            }
        }
        let mut finished = next == targets.len();
        let mut prims = init;
        while !finished && steps < max_steps {
            let mut dt = self.stable_dt(grid, &prims)?;
            let target = targets[next];
            if grid.t + dt >= target {
                dt = target - grid.t;
            }
            let ((fd, fs), hint) = self.step_from(grid, &prims, dt, &mut clamped)?;
            inflow.0 += fd;
            inflow.1 += fs;
            steps += 1;
            prims = self.recover(grid, Some(&hint), &mut clamped)?;
            if grid.t + 1e-14 * target.max(1.0) >= target {
                grid.t = target;
                record(target, &prims, &mut snapshots)?;
                next += 1;
                finished = next == targets.len();
            }
        }
        let (d1, s1) = grid.totals();
        let scale = d0.abs().max(f64::MIN_POSITIVE);
        let outcome = RunOutcome {
            grid: grid.clone(),
            steps,
            mass_drift: (d1 - d0 - inflow.0).abs() / scale,
            momentum_drift: (s1 - s0 - inflow.1).abs() / (self.cfg.eos.c * scale),
            snapshots,
            min_rho,
            max_speed,
            clamped,
        };
        Ok((outcome, finished))
    }
}

/// Periodic smooth wave on `[0, 1)`:
/// `ρ = ρ₀(1 + a sin 2πkx)`, `v = v₀ + b sin 2πkx`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct SmoothWave {
    pub rho0: f64,
    pub rho_amp: f64,
    pub v0: f64,
    pub v_amp: f64,
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub waves: f64,
}

#[cfg(feature = "serde")]
fn one() -> f64 {
    1.0
}

impl SmoothWave {
    pub fn at(&self, x: f64) -> Prim1 {
        let s = (2.0 * core::f64::consts::PI * self.waves * x).sin();
        Prim1 { rho: self.rho0 * (1.0 + self.rho_amp * s), v: self.v0 + self.v_amp * s }
    }

    pub fn grid(&self, eos: &EosSpec, cells: usize) -> Result<Grid1D> {
        Grid1D::from_profile(eos, cells, 0.0, 1.0, Bc::Periodic, |x| self.at(x))
    }
}

/// Two constant states on `[0, 1]` separated at `x_split`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct RiemannProblem {
    pub rho_l: f64,
    pub rho_r: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub v_l: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub v_r: f64,
    #[cfg_attr(feature = "serde", serde(default = "half"))]
    pub x_split: f64,
}

#[cfg(feature = "serde")]
fn half() -> f64 {
    0.5
}

impl RiemannProblem {
    /// `ρ_L = 5`, `ρ_R = 2`, at rest.
    pub fn standard() -> Self {
        Self { rho_l: 5.0, rho_r: 2.0, v_l: 0.0, v_r: 0.0, x_split: 0.5 }
    }

    /// Cell averages; the cell containing the split gets the exact mix.
    pub fn grid(&self, eos: &EosSpec, cells: usize, bc: Bc) -> Result<Grid1D> {
        let dx = 1.0 / cells as f64;
        let ul = prim_to_cons(eos, &Prim1 { rho: self.rho_l, v: self.v_l })?;
        let ur = prim_to_cons(eos, &Prim1 { rho: self.rho_r, v: self.v_r })?;
        let interior = (0..cells)
            .map(|i| {
                let a = i as f64 * dx;
                let wl = ((self.x_split - a) / dx).clamp(0.0, 1.0);
                ConsState { d: wl * ul.d + (1.0 - wl) * ur.d, s: wl * ul.s + (1.0 - wl) * ur.s }
            })
            .collect::<Vec<_>>();
        Grid1D::new(interior, 0.0, dx, bc)
    }
}

/// Average a fine interior down by an integer factor.
pub fn restrict(fine: &[f64], factor: usize) -> Vec<f64> {
    fine.chunks(factor).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
}

/// `Σ|a − b|·dx`.
pub fn l1_distance(a: &[f64], b: &[f64], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx
}

/// Errors and fitted order of a refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    /// `(cells, L1 error of D)` per level.
    pub errors: Vec<(usize, f64)>,
    pub order: f64,
}

fn interior_d(grid: &Grid1D) -> Vec<f64> {
    grid.interior().iter().map(|c| c.d).collect()
}

/// Three-level self-convergence of `D` on a periodic smooth wave: the error
/// at each of the two coarser levels is its L1 distance to the next finer
/// level averaged down. `cells` must double at each level.
pub fn smooth_self_convergence(cfg: SolverConfig, wave: &SmoothWave, cells: [usize; 3]) -> Result<ConvergenceStudy> {
    let solver = Solver::new(cfg)?;
    let mut runs = Vec::with_capacity(3);
    for &n in &cells {
        runs.push(interior_d(&solver.run(wave.grid(&cfg.eos, n)?, &[])?.grid));
    }
    let mut errors = Vec::with_capacity(2);
    for l in 0..2 {
        let factor = cells[l + 1] / cells[l];
        if factor * cells[l] != cells[l + 1] {
            return Err(Error::InvalidParameter("refinement levels must be integer multiples".into()));
        }
        errors.push((cells[l], l1_distance(&runs[l], &restrict(&runs[l + 1], factor), 1.0 / cells[l] as f64)));
    }
    let order = (errors[0].1 / errors[1].1).ln() / ((cells[1] as f64) / (cells[0] as f64)).ln();
    Ok(ConvergenceStudy { errors, order })
}

/// L1 error of `D` at each level against a high-resolution reference run,
/// with the least-squares order over all levels.
pub fn reference_convergence(
    cfg: SolverConfig,
    problem: &RiemannProblem,
    cells: &[usize],
    reference_cells: usize,
) -> Result<ConvergenceStudy> {
    let solver = Solver::new(cfg)?;
    let reference = interior_d(&solver.run(problem.grid(&cfg.eos, reference_cells, Bc::Outflow)?, &[])?.grid);
    let mut errors = Vec::with_capacity(cells.len());
    for &n in cells {
        if !reference_cells.is_multiple_of(n) {
            return Err(Error::InvalidParameter("reference resolution must be a multiple of every level".into()));
        }
        let run = interior_d(&solver.run(problem.grid(&cfg.eos, n, Bc::Outflow)?, &[])?.grid);
        errors.push((n, l1_distance(&run, &restrict(&reference, reference_cells / n), 1.0 / n as f64)));
    }
    let order = crate::numerics::convergence::fitted_order(&errors);
    Ok(ConvergenceStudy { errors, order })
}
