use logeuler_core::eos::ode_residual_with;
use logeuler_core::{EosSpec, Error, PowerSum, PressureLaw};
use proptest::prelude::*;

fn family_member() -> impl Strategy<Value = EosSpec> {
    prop_oneof![
        (0.05f64..4.0, 0.1f64..5.0).prop_map(|(a, k1)| EosSpec::polytropic(a, k1, 1.0).unwrap()),
        (-2.0f64..-1.01, 0.1f64..5.0).prop_map(|(a, k1)| EosSpec::chaplygin(a, k1, 1.0).unwrap()),
        (0.5f64..5.0).prop_map(|k1| EosSpec::logarithmic(k1, 1.0).unwrap()),
    ]
}

/// Central difference with a step scaled to the argument.
fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5 * x;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

proptest! {
    #[test]
    fn family_members_solve_the_symmetrizing_ode(eos in family_member(), rho in 0.01f64..100.0) {
        let r = eos.ode_residual(rho).unwrap();
        prop_assert!(r.abs() <= 1e-12 * rho, "residual {r} at rho = {rho}");
    }

    #[test]
    fn derivatives_match_finite_differences(eos in family_member(), rho in 0.05f64..50.0) {
        let dp = eos.dp_drho(rho).unwrap();
        let d2p = eos.d2p_drho2(rho).unwrap();
        let fd1 = central(|r| eos.pressure(r).unwrap(), rho);
        let fd2 = central(|r| eos.dp_drho(r).unwrap(), rho);
        prop_assert!((fd1 - dp).abs() <= 1e-7 * dp.abs());
        prop_assert!((fd2 - d2p).abs() <= 1e-6 * d2p.abs());
    }

    #[test]
    fn sound_speed_squared_is_positive(eos in family_member(), rho in 0.01f64..100.0) {
        prop_assert!(eos.dp_drho(rho).unwrap() > 0.0);
    }

    #[test]
    fn logarithmic_floor_keeps_enthalpy_positive(k1 in 0.3679f64..10.0, c in 0.5f64..3.0, t in 0.0f64..1.0) {
        let eos = EosSpec::logarithmic(k1, c).unwrap();
        match eos.admissible_window() {
            Ok(w) => {
                prop_assert!(k1 > c * c / std::f64::consts::E);
                let rho = w.log_lerp(t);
                prop_assert!(rho * c * c + eos.pressure(rho).unwrap() > 0.0);
                prop_assert!(eos.dp_drho(rho).unwrap() <= c * c * (1.0 + 1e-15));
            }
            Err(e) => {
                prop_assert!(k1 <= c * c / std::f64::consts::E);
                prop_assert!(matches!(e, Error::AssumptionViolation(_)));
            }
        }
    }
}

#[test]
fn positive_log_label_fails_certification() {
    let eos = EosSpec::logarithmic(1.0, 1.0).unwrap().with_ode_label(1.0).unwrap();
    let worst = (0..1000)
        .map(|i| 1.0 + i as f64)
        .map(|rho| eos.ode_residual(rho).unwrap().abs() / rho)
        .fold(0.0, f64::max);
    assert!(worst > 1.0);
}

#[test]
fn non_member_has_no_valid_exponent() {
    // p = ρ + ρ³: A·p'/p'' − ρ cannot vanish identically for any A
    let law = PowerSum::linear_plus_cubic(1.0);
    for a in [-2.0, -1.0, 0.5, 1.0, 2.0, 3.0] {
        let r1 = ode_residual_with(&law, a, 0.5).unwrap();
        let r2 = ode_residual_with(&law, a, 2.0).unwrap();
        assert!(r1.abs() > 1e-3 || r2.abs() > 1e-3, "A = {a}");
    }
}

#[test]
fn rho_star_equals_k1_over_c_squared() {
    for (k1, c) in [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0), (10.0, 3.0)] {
        let eos = EosSpec::logarithmic(k1, c).unwrap();
        assert_eq!(eos.admissible_window().unwrap().rho_star, k1 / (c * c));
    }
}
