//! Safeguarded Newton iteration with bisection fallback.


#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootError {
    /// `f(lo)` and `f(hi)` have the same sign.
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// Iteration cap reached; carries the last bracket.
    MaxIterations { lo: f64, hi: f64 },
    NotFinite { x: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub x_rel_tol: f64,
    pub f_abs_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { x_rel_tol: 1e-15, f_abs_tol: 0.0, max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Find a root of `f` in `[lo, hi]`. `f` returns the value and derivative.
///
/// Newton steps that leave the current bracket, or fail to halve the
/// residual, are replaced by bisection, so the bracket shrinks every
/// iteration and convergence is guaranteed for continuous `f`.
pub fn newton_bracketed<F>(mut f: F, mut lo: f64, mut hi: f64, guess: f64, opts: RootOptions) -> Result<Root, RootError>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if !f_lo.is_finite() {
        return Err(RootError::NotFinite { x: lo });
    }
    if !f_hi.is_finite() {
        return Err(RootError::NotFinite { x: hi });
    }
    if f_lo == 0.0 {
        return Ok(Root { x: lo, iterations: 0, lo, hi: lo });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, iterations: 0, lo: hi, hi });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NotBracketed { lo, hi, f_lo, f_hi });
    }
    let rising = f_hi > 0.0;

    let mut x = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    let mut last_abs = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let (fx, dfx) = f(x);
        if !fx.is_finite() {
            return Err(RootError::NotFinite { x });
        }
        if fx == 0.0 || fx.abs() <= opts.f_abs_tol {
            return Ok(Root { x, iterations: it, lo, hi });
        }
        if (fx > 0.0) == rising {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / dfx;
        let use_newton = dfx != 0.0 && newton.is_finite() && newton > lo && newton < hi && fx.abs() < 0.5 * last_abs;
        let next = if use_newton { newton } else { 0.5 * (lo + hi) };
        last_abs = fx.abs();
        if (next - x).abs() <= opts.x_rel_tol * x.abs() || hi - lo <= opts.x_rel_tol * x.abs().max(lo.abs()) {
            return Ok(Root { x: next, iterations: it, lo, hi });
        }
        x = next;
    }
    Err(RootError::MaxIterations { lo, hi })
}
