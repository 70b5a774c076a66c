use logeuler_core::sampling;
use logeuler_core::symmetrizer::{conservation_jacobians, PrimState, RelSymmetrizer};
use logeuler_core::EosSpec;
use proptest::prelude::*;

fn symmetrizer(k1: f64, c: f64) -> RelSymmetrizer {
    RelSymmetrizer::new(EosSpec::logarithmic(k1, c).unwrap()).unwrap()
}

/// `(K₁, c)` pairs satisfying `K₁ > c²/e`, plus an admissible state.
fn case() -> impl Strategy<Value = (RelSymmetrizer, PrimState)> {
    (0.5f64..2.0, 0.4f64..1.0, 0.0f64..1.0, 0.0f64..0.999, 0.0f64..1.0, -1.0f64..1.0)
        .prop_map(|(c, kfac, t, speed, phi, cos_theta)| {
            let k1 = c * c * (0.38 + 4.0 * kfac);
            let sym = symmetrizer(k1, c);
            let rho = sym.window().log_lerp(t).max(sym.window().rho_min() * (1.0 + 1e-9));
            let sin_theta = (1.0 - cos_theta * cos_theta).sqrt();
            let ang = 2.0 * std::f64::consts::PI * phi;
            let dir = [sin_theta * ang.cos(), sin_theta * ang.sin(), cos_theta];
            let v = sampling::scale_to(dir, speed * c);
            (sym, PrimState::new(rho, v))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn a0_is_positive_definite((sym, s) in case()) {
        let r = sym.check_a0_spd(&s).unwrap();
        prop_assert!(r.spd && r.cholesky_ok);
        prop_assert!(r.eigen_rel_error <= 1e-10, "{r:?}");
    }

    #[test]
    fn matrices_are_symmetric((sym, s) in case()) {
        let m = sym.matrices(&s).unwrap();
        prop_assert!(m.a0.is_symmetric());
        for a in &m.a {
            prop_assert!(a.is_symmetric());
        }
    }

    #[test]
    fn jacobian_matches_differences_and_determinant((sym, s) in case()) {
        let an = sym.jacobian_w(&s).unwrap();
        let fd = sym.jacobian_fd(&s).unwrap();
        prop_assert!((an - fd).max_abs() <= 1e-6 * an.max_abs());
        let det = sym.jacobian_det(&s).unwrap();
        prop_assert!(det > 0.0);
        prop_assert!((an.determinant() - det).abs() <= 1e-10 * det);
    }

    #[test]
    fn inverse_map_recovers_state((sym, s) in case()) {
        let back = sym.from_sym(&sym.to_sym(&s).unwrap()).unwrap();
        prop_assert!((back.rho - s.rho).abs() <= 1e-9 * s.rho);
        for k in 0..3 {
            prop_assert!((back.v[k] - s.v[k]).abs() <= 1e-9 * sym.eos().c);
        }
    }

    #[test]
    fn coefficient_matrices_are_flux_jacobians((sym, s) in case()) {
        let (u_q, f_q) = conservation_jacobians(sym.eos(), &s).unwrap();
        let j_inv = sym.jacobian_w(&s).unwrap().inverse().unwrap();
        let m = sym.matrices(&s).unwrap();
        let a0 = u_q * j_inv;
        prop_assert!((a0 - m.a0).max_abs() <= 1e-9 * m.a0.max_abs());
        for (f, a) in f_q.iter().zip(&m.a) {
            prop_assert!((*f * j_inv - *a).max_abs() <= 1e-9 * m.a0.max_abs());
        }
    }

    #[test]
    fn big_phi_is_decreasing_and_bounded(k1 in 0.4f64..5.0, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let sym = symmetrizer(k1, 1.0);
        let (a, b) = (sym.window().log_lerp(t1.min(t2)), sym.window().log_lerp(t1.max(t2)));
        let (pa, pb) = (sym.big_phi(a).unwrap(), sym.big_phi(b).unwrap());
        prop_assert!(pb <= pa && pa <= 1.0 && pb > 0.0);
        prop_assert!(sym.big_phi_prime(b).unwrap() < 0.0);
    }
}

#[test]
fn boundary_velocity_keeps_lambda3_positive() {
    let sym = symmetrizer(1.0, 1.0);
    let delta = sym.velocity_margin();
    let edge = ((1.0 - delta) * 0.99).sqrt();
    let s = PrimState::new(1.0 + 2e-6, [edge, 0.0, 0.0]);
    let r = sym.check_a0_spd(&s).unwrap();
    assert!(r.spd && r.lambda3 > 0.0 && r.lambda3 < r.lambda1);
}
