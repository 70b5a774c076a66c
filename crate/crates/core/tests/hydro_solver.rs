use logeuler_core::hydro::{
    characteristic_speeds, cons_to_prim, flux, prim_to_cons, reference_convergence, smooth_self_convergence, wave_speeds,
    Limiter, Prim1, RiemannProblem, SmoothWave, Solver, SolverConfig,
};
use logeuler_core::numerics::linalg::Matrix;
use logeuler_core::EosSpec;
use proptest::prelude::*;
use rand::rngs::SmallRng;
use rand::SeedableRng;

fn eos() -> EosSpec {
    EosSpec::logarithmic(1.0, 1.0).unwrap()
}

fn random_prim(rng: &mut SmallRng) -> Prim1 {
    let window = eos().admissible_window().unwrap();
    Prim1 {
        rho: logeuler_core::sampling::density(&window, rng),
        v: logeuler_core::sampling::velocity1(1.0, 1e-6, rng),
    }
}

fn smooth_wave() -> SmoothWave {
    SmoothWave { rho0: 2.0, rho_amp: 0.2, v0: 0.1, v_amp: 0.1, waves: 1.0 }
}

#[test]
fn recovery_round_trip_over_samples() {
    let e = eos();
    let mut rng = SmallRng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = random_prim(&mut rng);
        let back = cons_to_prim(&e, &prim_to_cons(&e, &p).unwrap()).unwrap();
        worst = worst.max((back.rho - p.rho).abs() / p.rho).max((back.v - p.v).abs());
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn flux_mass_component_is_momentum() {
    let e = eos();
    let mut rng = SmallRng::seed_from_u64(12);
    for _ in 0..100 {
        let p = random_prim(&mut rng);
        assert_eq!(flux(&e, &p).unwrap().0, prim_to_cons(&e, &p).unwrap().s);
    }
}

/// Numerical Jacobian of flux ∘ cons_to_prim at a state, by central differences.
fn flux_jacobian(e: &EosSpec, p: &Prim1) -> Matrix<2> {
    let u = prim_to_cons(e, p).unwrap();
    let f = |d: f64, s: f64| {
        let q = cons_to_prim(e, &logeuler_core::hydro::ConsState { d, s }).unwrap();
        let fl = flux(e, &q).unwrap();
        [fl.0, fl.1]
    };
    let (hd, hs) = (1e-6 * u.d, 1e-6 * u.d);
    let (dp, dm) = (f(u.d + hd, u.s), f(u.d - hd, u.s));
    let (sp, sm) = (f(u.d, u.s + hs), f(u.d, u.s - hs));
    Matrix([
        [(dp[0] - dm[0]) / (2.0 * hd), (sp[0] - sm[0]) / (2.0 * hs)],
        [(dp[1] - dm[1]) / (2.0 * hd), (sp[1] - sm[1]) / (2.0 * hs)],
    ])
}

fn eigenvalues2(m: &Matrix<2>) -> (f64, f64) {
    let tr = m.0[0][0] + m.0[1][1];
    let det = m.0[0][0] * m.0[1][1] - m.0[0][1] * m.0[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    (0.5 * tr - disc, 0.5 * tr + disc)
}

#[test]
fn flux_jacobian_eigenvalues_are_characteristic_speeds() {
    let e = eos();
    let mut rng = SmallRng::seed_from_u64(13);
    for _ in 0..200 {
        let mut p = random_prim(&mut rng);
        p.v *= 0.9;
        let (lo, hi) = eigenvalues2(&flux_jacobian(&e, &p));
        let (lm, lp) = characteristic_speeds(&e, &p).unwrap();
        assert!((lo - lm).abs() <= 1e-5 && (hi - lp).abs() <= 1e-5, "{p:?}: {lo} {hi} vs {lm} {lp}");
        let (smin, smax) = wave_speeds(&e, &p, &p).unwrap();
        assert!(smin <= lo + 1e-5 && hi - 1e-5 <= smax);
    }
}

#[test]
fn wave_speeds_are_subluminal() {
    let e = eos();
    let mut rng = SmallRng::seed_from_u64(14);
    for _ in 0..1000 {
        let (a, b) = (random_prim(&mut rng), random_prim(&mut rng));
        let (lo, hi) = wave_speeds(&e, &a, &b).unwrap();
        assert!(lo > -1.0 && hi < 1.0 && lo <= hi);
    }
}

#[test]
fn periodic_conservation_over_a_thousand_steps() {
    let e = eos();
    let mut cfg = SolverConfig::new(e, 100.0);
    cfg.limiter = Limiter::Minmod;
    let solver = Solver::new(cfg).unwrap();
    let out = solver.run_steps(smooth_wave().grid(&e, 128).unwrap(), 1000).unwrap();
    assert_eq!(out.steps, 1000);
    assert!(out.mass_drift <= 1e-12, "{}", out.mass_drift);
    assert!(out.momentum_drift <= 1e-12, "{}", out.momentum_drift);
}

#[test]
fn smooth_wave_converges_at_second_order() {
    let cfg = SolverConfig::new(eos(), 0.2);
    let study = smooth_self_convergence(cfg, &smooth_wave(), [128, 256, 512]).unwrap();
    assert!(study.order >= 1.8, "{study:?}");
}

#[test]
fn riemann_problem_converges_to_reference() {
    let mut cfg = SolverConfig::new(eos(), 0.3);
    cfg.limiter = Limiter::Minmod;
    let study = reference_convergence(cfg, &RiemannProblem::standard(), &[256, 512, 1024, 2048], 8192).unwrap();
    assert!(study.order >= 0.8, "{study:?}");
}

#[test]
fn rusanov_also_preserves_admissibility() {
    let e = eos();
    let mut cfg = SolverConfig::new(e, 0.25);
    cfg.limiter = Limiter::Minmod;
    cfg.riemann = logeuler_core::hydro::Riemann::Rusanov;
    let solver = Solver::new(cfg).unwrap();
    let out = solver.run(RiemannProblem::standard().grid(&e, 256, logeuler_core::hydro::Bc::Outflow).unwrap(), &[0.05, 0.1]).unwrap();
    assert_eq!(out.snapshots.len(), 3);
    assert!(out.min_rho >= 1.0 && out.max_speed < 1.0);
}

proptest! {
    #[test]
    fn recovery_inverts_conversion(rho in 1.0001f64..1000.0, v in -0.999f64..0.999) {
        let e = eos();
        let p = Prim1 { rho, v };
        let back = cons_to_prim(&e, &prim_to_cons(&e, &p).unwrap()).unwrap();
        prop_assert!((back.rho - rho).abs() <= 1e-10 * rho);
        prop_assert!((back.v - v).abs() <= 1e-10);
    }

    #[test]
    fn uniform_states_stay_put(rho in 1.01f64..50.0, v in -0.9f64..0.9) {
        let e = eos();
        let solver = Solver::new(SolverConfig::new(e, 1.0)).unwrap();
        let g = logeuler_core::hydro::Grid1D::from_profile(&e, 8, 0.0, 1.0, logeuler_core::hydro::Bc::Periodic, |_| Prim1 { rho, v }).unwrap();
        let before = g.interior().to_vec();
        let out = solver.run_steps(g, 3).unwrap();
        for (a, b) in before.iter().zip(out.grid.interior()) {
            prop_assert!((a.d - b.d).abs() <= 1e-13 * a.d);
            prop_assert!((a.s - b.s).abs() <= 1e-13 * a.d);
        }
    }
}

