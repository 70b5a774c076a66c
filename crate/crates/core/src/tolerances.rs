//! Default thresholds for every verification check, in one place.
//!
//! The CLI scales all of them uniformly with `--tol-scale`; the convergence
//! orders are not tolerances and are left unscaled.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Scaled ODE residual `|A·p'/p'' − ρ| / ρ` for family members.
    pub ode_residual: f64,
    /// Analytic `p'` against a central difference of `p`.
    pub dp_fd_rel: f64,
    /// Analytic `p''` against a central difference of `p'`.
    pub d2p_fd_rel: f64,
    /// `ρ(v(ρ))` round trip of the classical map.
    pub classical_round_trip_rel: f64,
    /// Numerical derivative of `v(ρ)` against the closed form.
    pub v_derivative_rel: f64,
    /// Classical time derivatives mapped through `v(ρ)` plugged into the
    /// symmetric system; fourth-order stencil error at ≥ 128 cells.
    pub symmetric_defect: f64,
    /// Closed-form eigenvalues against the numerical eigensolver.
    pub eigen_rel: f64,
    /// Analytic Jacobian of `w` against central differences (max entry).
    pub jacobian_fd_rel: f64,
    /// Closed-form determinant against the numeric one.
    pub det_rel: f64,
    /// `from_sym(to_sym(s))` round trip.
    pub sym_round_trip_rel: f64,
    /// Reconstructing `|v|²` and `Φ` from `w`.
    pub sym_identity: f64,
    /// Relative tolerance of the `φ` quadrature.
    pub phi_quadrature_rel: f64,
    /// Cached `φ` table against direct quadrature.
    pub phi_cache_abs: f64,
    /// `cons_to_prim(prim_to_cons(s))`.
    pub cons_round_trip_rel: f64,
    /// Relative drift of `ΣD·dx`, `ΣS·dx` over 10³ periodic steps.
    pub conservation_drift: f64,
    /// Flux-Jacobian eigenvalues against characteristic speeds.
    pub char_speed_abs: f64,
    /// Minimum observed order, smooth self-convergence.
    pub smooth_order: f64,
    /// Minimum observed order, discontinuous data against a reference.
    pub shock_order: f64,
    /// Relative residual below which an `Aᵏ` variant counts as annihilating.
    pub variant_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_residual: 1e-12,
            dp_fd_rel: 1e-7,
            d2p_fd_rel: 1e-6,
            classical_round_trip_rel: 1e-10,
            v_derivative_rel: 1e-7,
            symmetric_defect: 1e-6,
            eigen_rel: 1e-10,
            jacobian_fd_rel: 1e-6,
            det_rel: 1e-10,
            sym_round_trip_rel: 1e-9,
            sym_identity: 1e-12,
            phi_quadrature_rel: 1e-12,
            phi_cache_abs: 1e-9,
            cons_round_trip_rel: 1e-10,
            conservation_drift: 1e-12,
            char_speed_abs: 1e-5,
            smooth_order: 1.8,
            shock_order: 0.8,
            variant_residual: 1e-6,
        }
    }
}

impl Tolerances {
    /// Multiply every tolerance (not the convergence orders) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |x: f64| x * factor;
        Self {
            ode_residual: s(self.ode_residual),
            dp_fd_rel: s(self.dp_fd_rel),
            d2p_fd_rel: s(self.d2p_fd_rel),
            classical_round_trip_rel: s(self.classical_round_trip_rel),
            v_derivative_rel: s(self.v_derivative_rel),
            symmetric_defect: s(self.symmetric_defect),
            eigen_rel: s(self.eigen_rel),
            jacobian_fd_rel: s(self.jacobian_fd_rel),
            det_rel: s(self.det_rel),
            sym_round_trip_rel: s(self.sym_round_trip_rel),
            sym_identity: s(self.sym_identity),
            phi_quadrature_rel: s(self.phi_quadrature_rel),
            phi_cache_abs: s(self.phi_cache_abs),
            cons_round_trip_rel: s(self.cons_round_trip_rel),
            conservation_drift: s(self.conservation_drift),
            char_speed_abs: s(self.char_speed_abs),
            smooth_order: self.smooth_order,
            shock_order: self.shock_order,
            variant_residual: s(self.variant_residual),
        }
    }
}
