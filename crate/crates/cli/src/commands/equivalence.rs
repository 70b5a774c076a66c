use std::path::Path;

use logeuler_core::classical::{evolve_pair, symmetric_defect, ClassicalField1D, EvolveOptions, SymmetryParams};
use logeuler_core::eos::ode_residual_with;
use logeuler_core::numerics::convergence::{fitted_order, pairwise_orders};
use serde::Serialize;

use super::{write_csv, Context};
use crate::config::{load_json, ConfigError, EquivalenceScenario};
use crate::report::{Bound, Check, Report};

#[derive(Serialize)]
struct Row {
    cell_index: usize,
    x: f64,
    rho_classical: f64,
    v_transformed: f64,
    v_symmetric: f64,
    abs_diff: f64,
}

/// Largest scaled ODE residual `|A·p'/p'' − ρ|/ρ` over the data's density
/// range; decides whether the map is expected to symmetrize the law.
fn membership_defect(sc: &EquivalenceScenario, a: f64) -> anyhow::Result<f64> {
    let law = sc.eos.as_law();
    let (lo, hi) = (sc.rho0 - sc.perturbation.abs(), sc.rho0 + sc.perturbation.abs());
    let mut worst = 0.0f64;
    for i in 0..=16 {
        let rho = lo + (hi - lo) * i as f64 / 16.0;
        worst = worst.max(ode_residual_with(law, a, rho)?.abs() / rho);
    }
    Ok(worst)
}

/// Independent classical and symmetric integrations at `cells/4`, `cells/2`
/// and `cells`, compared through `v(ρ)`.
pub fn equivalence(ctx: &Context, scenario: &Path) -> anyhow::Result<Report> {
    let sc: EquivalenceScenario = load_json(scenario)?;
    let law = sc.eos.as_law();
    let a = match (sc.a, sc.eos.family_exponent()) {
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(ConfigError("field A is required for laws outside the family".into()).into()),
    };
    if !sc.cells.is_multiple_of(4) || sc.cells < 32 {
        return Err(ConfigError(format!("cells must be a multiple of 4 and at least 32, got {}", sc.cells)).into());
    }
    let params = SymmetryParams::new(a, sc.b)?;
    let tol = &ctx.tol;
    let mut report = Report::new("equivalence", ctx.seed);

    let defect = membership_defect(&sc, a)?;
    // non-members are falsification cases: their checks are meant to fail
    let member = defect <= tol.ode_residual;
    report.value("ode_defect", defect);
    report.value("A", a);

    let levels = [sc.cells / 4, sc.cells / 2, sc.cells];
    let mut errors = Vec::with_capacity(3);
    let mut finest = None;
    for &n in &levels {
        let init = ClassicalField1D::sine_wave(n, sc.rho0, sc.perturbation, sc.u_amp)?;
        let out = evolve_pair(&init, law, params, sc.t_end, None, EvolveOptions::default())?;
        errors.push((n, out.max_v_difference()));
        report.value(&format!("max_v_difference_{n}"), out.max_v_difference());
        finest = Some((init, out));
    }
    let (init, out) = finest.expect("three levels");

    if sc.perturbation == 0.0 && sc.u_amp == 0.0 {
        // constant data is a fixed point of both systems, member or not
        report.push(Check::new(
            "zero_perturbation",
            errors[2].1,
            Bound::Le,
            0.0,
            "constant data must evolve identically in both systems",
        ));
    } else {
        let order = fitted_order(&errors);
        for (i, o) in pairwise_orders(&errors).into_iter().enumerate() {
            report.value(&format!("order_{}_{}", levels[i], levels[i + 1]), o);
        }
        report.push(
            Check::new(
                "equivalence_order",
                order,
                Bound::Ge,
                tol.smooth_order,
                "the classical solution mapped through v(ρ) must converge to the symmetric solution",
            )
            .expect_fail(!member),
        );
        let defect = symmetric_defect(&init, law, params)?;
        report.push(
            Check::new(
                "symmetric_form_defect",
                defect,
                Bound::Le,
                tol.symmetric_defect,
                "classical time derivatives mapped through v(ρ) must satisfy the symmetric system",
            )
            .expect_fail(!member),
        );
    }

    let rows: Vec<Row> = (0..out.classical.len())
        .map(|i| Row {
            cell_index: i,
            x: out.classical.x(i),
            rho_classical: out.classical.rho[i],
            v_transformed: out.v_transformed[i],
            v_symmetric: out.symmetric.v[i],
            abs_diff: (out.v_transformed[i] - out.symmetric.v[i]).abs(),
        })
        .collect();
    std::fs::create_dir_all(&ctx.out)?;
    write_csv(ctx, &mut report, "equivalence.csv", &rows)?;
    Ok(report)
}
