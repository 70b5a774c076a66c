use std::path::Path;

use logeuler_core::hydro::{
    prim_to_cons, reference_convergence, smooth_self_convergence, Bc, Grid1D, Prim1, Solver, SolverConfig,
};
use logeuler_core::numerics::convergence::pairwise_orders;
use logeuler_core::PressureLaw;
use serde::Serialize;

use super::{write_csv, Context};
use crate::config::{load_json, ConfigError, Init, RunScenario};
use crate::report::{Bound, Check, Report};

#[derive(Serialize)]
struct Row {
    t: f64,
    x: f64,
    rho: f64,
    v: f64,
    p: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "S")]
    s: f64,
}

fn solver_config(sc: &RunScenario) -> SolverConfig {
    let mut cfg = SolverConfig::new(sc.eos, sc.t_end);
    cfg.cfl = sc.cfl;
    cfg.limiter = sc.limiter;
    cfg.riemann = sc.riemann;
    cfg.clamp = sc.clamp;
    cfg
}

/// Primitive initial states are checked against the margins before they
/// are averaged into cells, so bad data is reported as inadmissible rather
/// than as a recovery failure.
fn initial_grid(sc: &RunScenario, solver: &Solver) -> anyhow::Result<Grid1D> {
    match sc.init {
        Init::SmoothWave(w) => {
            let n = 4 * sc.cells;
            for i in 0..n {
                solver.check_margins(&w.at(i as f64 / n as f64))?;
            }
        }
        Init::Riemann(r) => {
            solver.check_margins(&Prim1 { rho: r.rho_l, v: r.v_l })?;
            solver.check_margins(&Prim1 { rho: r.rho_r, v: r.v_r })?;
        }
    }
    Ok(match sc.init {
        Init::SmoothWave(w) => {
            if sc.bc != Bc::Periodic {
                return Err(ConfigError("smooth_wave data needs periodic boundaries".into()).into());
            }
            w.grid(&sc.eos, sc.cells)?
        }
        Init::Riemann(r) => r.grid(&sc.eos, sc.cells, sc.bc)?,
    })
}

/// Integrate a scenario, write snapshots, and run its conservation,
/// admissibility and refinement checks.
pub fn run(ctx: &Context, scenario: &Path) -> anyhow::Result<Report> {
    let sc: RunScenario = load_json(scenario)?;
    let cfg = solver_config(&sc);
    let solver = Solver::new(cfg)?;
    let tol = &ctx.tol;
    let mut report = Report::new("run", ctx.seed);
    let window = *solver.window();
    report.value("rho_star", window.rho_star);

    let grid = initial_grid(&sc, &solver)?;
    let mut outputs = sc.outputs.clone();
    outputs.push(0.0);
    let out = solver.run(grid, &outputs)?;
    report.value("steps", out.steps as f64);
    report.value("min_rho", out.min_rho);
    report.value("max_speed", out.max_speed);
    if cfg.clamp {
        report.value("clamped_cells", out.clamped as f64);
        if out.clamped > 0 {
            eprintln!("warning: {} cell recoveries were clamped to the density floor", out.clamped);
        }
    }

    // the drift tolerance is quoted per 10³ steps
    let budget = tol.conservation_drift * (out.steps as f64 / 1e3).max(1.0);
    report.push(Check::new("mass_conservation", out.mass_drift, Bound::Le, budget, "ΣD·dx must change only by boundary fluxes"));
    report.push(Check::new(
        "momentum_conservation",
        out.momentum_drift,
        Bound::Le,
        budget,
        "ΣS·dx must change only by boundary fluxes",
    ));
    report.push(
        Check::new("density_floor", out.min_rho, Bound::Ge, window.rho_star, "every output must satisfy ρ ≥ ρ* = K₁/c²").admissibility(),
    );
    report.push(
        Check::new("subluminal_velocity", out.max_speed, Bound::Lt, sc.eos.c, "every output must satisfy |v| < c").admissibility(),
    );

    if sc.convergence {
        refinement_checks(&sc, cfg, &mut report, ctx)?;
    }

    let mut rows = Vec::new();
    for (t, prims) in &out.snapshots {
        for (i, p) in prims.iter().enumerate() {
            rows.push(row(&sc, &out.grid, *t, i, p)?);
        }
    }
    std::fs::create_dir_all(&ctx.out)?;
    write_csv(ctx, &mut report, "snapshots.csv", &rows)?;
    Ok(report)
}

fn row(sc: &RunScenario, grid: &Grid1D, t: f64, i: usize, p: &Prim1) -> logeuler_core::Result<Row> {
    let u = prim_to_cons(&sc.eos, p)?;
    Ok(Row { t, x: grid.x(i), rho: p.rho, v: p.v, p: sc.eos.pressure(p.rho)?, d: u.d, s: u.s })
}

fn refinement_checks(sc: &RunScenario, cfg: SolverConfig, report: &mut Report, ctx: &Context) -> anyhow::Result<()> {
    let n = sc.cells;
    match sc.init {
        Init::SmoothWave(w) => {
            let study = smooth_self_convergence(cfg, &w, [n, 2 * n, 4 * n])?;
            for (cells, e) in &study.errors {
                report.value(&format!("l1_error_{cells}"), *e);
            }
            report.push(Check::new(
                "smooth_self_convergence",
                study.order,
                Bound::Ge,
                ctx.tol.smooth_order,
                "smooth data must converge at second order under refinement",
            ));
        }
        Init::Riemann(r) => {
            if sc.bc != Bc::Outflow {
                return Ok(());
            }
            let levels = [n, 2 * n, 4 * n, 8 * n];
            if !sc.reference_cells.is_multiple_of(8 * n) {
                return Err(ConfigError(format!("reference_cells must be a multiple of {}", 8 * n)).into());
            }
            let study = reference_convergence(cfg, &r, &levels, sc.reference_cells)?;
            for (cells, e) in &study.errors {
                report.value(&format!("l1_error_{cells}"), *e);
            }
            for (i, o) in pairwise_orders(&study.errors).into_iter().enumerate() {
                report.value(&format!("order_{}_{}", levels[i], levels[i + 1]), o);
            }
            report.push(Check::new(
                "reference_convergence",
                study.order,
                Bound::Ge,
                ctx.tol.shock_order,
                "discontinuous data must approach the high-resolution reference",
            ));
        }
    }
    Ok(())
}
