use std::path::Path;

use logeuler_core::{sampling, EosSpec, Family, PressureLaw};
use serde::Serialize;

use super::{max_of, write_csv, Context};
use crate::config::load_eos;
use crate::report::{Bound, Check, Report};

#[derive(Serialize)]
struct Row {
    rho: f64,
    p: f64,
    dp: f64,
    d2p: f64,
    ode_residual_rel: f64,
    dp_fd_rel: f64,
    d2p_fd_rel: f64,
    subluminal: bool,
}

fn central(f: impl Fn(f64) -> logeuler_core::Result<f64>, x: f64) -> logeuler_core::Result<f64> {
    let h = 1e-5 * x;
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Derivative, ODE, lower-bound and subluminal suites for one EOS file.
pub fn check_eos(ctx: &Context, eos_path: &Path) -> anyhow::Result<Report> {
    let eos = load_eos(eos_path)?;
    let mut report = Report::new("check-eos", ctx.seed);
    let tol = &ctx.tol;
    let c2 = eos.c * eos.c;

    // the lower-bound suite samples [ρ*, 10³ρ*] even when the gate fails,
    // so the report shows where positivity breaks
    let gate = (eos.family == Family::Logarithmic).then(|| eos.admissible_window());
    let window = match (&gate, eos.family) {
        (Some(Ok(w)), _) => *w,
        (_, Family::Logarithmic) => logeuler_core::AdmissibleWindow::from_rho_star(eos.rho_star()?)?,
        _ => eos.density_window()?,
    };

    let mut rng = ctx.rng();
    let rows = (0..ctx.samples)
        .map(|_| row(&eos, sampling::density(&window, &mut rng)))
        .collect::<logeuler_core::Result<Vec<_>>>()?;

    report.push(Check::new(
        "ode_residual",
        max_of(rows.iter().map(|r| r.ode_residual_rel)),
        Bound::Le,
        tol.ode_residual,
        format!("A·p'(ρ) = ρ·p''(ρ) must hold with A = {} (|A·p'/p'' − ρ|/ρ)", eos.ode_parameter()),
    ));
    report.push(Check::new(
        "dp_finite_difference",
        max_of(rows.iter().map(|r| r.dp_fd_rel)),
        Bound::Le,
        tol.dp_fd_rel,
        "closed-form p' must match a central difference of p",
    ));
    report.push(Check::new(
        "d2p_finite_difference",
        max_of(rows.iter().map(|r| r.d2p_fd_rel)),
        Bound::Le,
        tol.d2p_fd_rel,
        "closed-form p'' must match a central difference of p'",
    ));
    // p'/c² must lie in (0, 1]
    let worst = max_of(rows.iter().map(|r| if r.dp > 0.0 { r.dp / c2 } else { f64::INFINITY }));
    report.push(Check::new(
        "subluminal",
        worst,
        Bound::Le,
        1.0 + 1e-15,
        "subluminal condition 0 < p'(ρ) ≤ c² violated on the sampled window",
    ));

    if let Some(gate) = gate {
        let threshold = c2 / std::f64::consts::E;
        let rho_star = eos.rho_star()?;
        report.value("rho_star", rho_star);
        report.value("c2_over_e", threshold);
        report.push(
            Check::new(
                "positivity_gate",
                eos.k1,
                Bound::Gt,
                threshold,
                match &gate {
                    Ok(_) => "pressure coefficient must exceed c²/e".to_string(),
                    Err(e) => format!("pressure coefficient must exceed c²/e: {e}"),
                },
            )
            .admissibility(),
        );
        let floor = rows.iter().map(|r| r.rho * c2 + r.p).fold(rho_star * c2 + eos.pressure(rho_star)?, f64::min);
        report.push(
            Check::new(
                "enthalpy_floor",
                floor,
                Bound::Gt,
                0.0,
                "ρc² + p(ρ) must stay positive for ρ ≥ ρ* = K₁/c²",
            )
            .admissibility(),
        );
    }

    std::fs::create_dir_all(&ctx.out)?;
    write_csv(ctx, &mut report, "check_eos.csv", &rows)?;
    Ok(report)
}

fn row(eos: &EosSpec, rho: f64) -> logeuler_core::Result<Row> {
    let dp = eos.dp_drho(rho)?;
    let d2p = eos.d2p_drho2(rho)?;
    Ok(Row {
        rho,
        p: eos.pressure(rho)?,
        dp,
        d2p,
        ode_residual_rel: eos.ode_residual(rho)?.abs() / rho,
        dp_fd_rel: rel(central(|r| eos.pressure(r), rho)?, dp),
        d2p_fd_rel: rel(central(|r| eos.dp_drho(r), rho)?, d2p),
        subluminal: eos.subluminal(rho)?,
    })
}
