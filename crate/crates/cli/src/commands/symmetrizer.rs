use std::path::Path;

use logeuler_core::symmetrizer::{select_ak_variant, AkVariant, PhiTable, PrimState, RelSymmetrizer};
use logeuler_core::sampling;
use serde::Serialize;

use super::{max_of, write_csv, Context};
use crate::config::load_eos;
use crate::report::{Bound, Check, Report};

/// Grids for the manufactured-solution variant selection.
pub const VARIANT_CELLS: [usize; 2] = [256, 512];

#[derive(Serialize)]
struct Row {
    state: String,
    rho: f64,
    v1: f64,
    v2: f64,
    v3: f64,
    lambda1: f64,
    lambda3: f64,
    det: f64,
    max_fd_error: f64,
    eigen_rel_error: f64,
    det_rel_error: f64,
    round_trip_error: f64,
    identity_error: f64,
    spd: bool,
}

/// Which aggregate checks a sample contributes to.
#[derive(Clone, Copy, PartialEq)]
enum Role {
    /// Every check.
    Interior,
    /// Positivity only: the light-cone margin itself, where λ₃ is of order
    /// δ² and the numeric comparisons are conditioning-limited.
    Edge,
}

fn evaluate(sym: &RelSymmetrizer, label: String, role: Role, s: PrimState) -> anyhow::Result<Row> {
    let schur = sym.check_a0_spd(&s)?;
    let an = sym.jacobian_w(&s)?;
    let fd = sym.jacobian_fd(&s)?;
    let det = sym.jacobian_det(&s)?;
    let w = sym.to_sym(&s)?;
    let back = sym.from_sym(&w)?;
    let c = sym.eos().c;
    let round_trip = (0..3)
        .map(|k| (back.v[k] - s.v[k]).abs() / c)
        .fold((back.rho - s.rho).abs() / s.rho, f64::max);
    let identity = ((sym.speed2_from_sym(&w) - s.speed2()).abs() / (c * c))
        .max((sym.big_phi_from_sym(&w)? - sym.big_phi(s.rho)?).abs());
    Ok(Row {
        state: label,
        rho: s.rho,
        v1: s.v[0],
        v2: s.v[1],
        v3: s.v[2],
        lambda1: schur.lambda1,
        lambda3: schur.lambda3,
        det,
        max_fd_error: (an - fd).max_abs() / an.max_abs(),
        eigen_rel_error: schur.eigen_rel_error,
        det_rel_error: (an.determinant() - det).abs() / det.abs(),
        round_trip_error: round_trip,
        identity_error: identity,
        // on the margin A⁰ is too ill-conditioned for an f64 Cholesky to
        // decide anything; the double-double Schur eigenvalues still do
        spd: schur.spd
            && match role {
                Role::Interior => schur.cholesky_ok,
                Role::Edge => schur.numeric.iter().all(|l| *l > 0.0),
            },
    })
}

/// SPD, Jacobian, bijection and `Aᵏ`-variant suites at seeded random states.
pub fn verify_symmetrizer(ctx: &Context, eos_path: &Path) -> anyhow::Result<Report> {
    let eos = load_eos(eos_path)?;
    let sym = RelSymmetrizer::new(eos)?;
    let tol = &ctx.tol;
    let mut report = Report::new("verify-symmetrizer", ctx.seed);
    let window = *sym.window();
    let delta = sym.velocity_margin();
    let c = eos.c;
    report.value("rho_star", sym.rho_star());
    report.value("velocity_margin", delta);

    let mut rng = ctx.rng();
    let mut samples: Vec<(String, Role, PrimState)> = (0..ctx.samples)
        .map(|i| {
            let rho = sampling::density(&window, &mut rng);
            (format!("sample-{i}"), Role::Interior, PrimState::new(rho, sampling::velocity3(c, delta, &mut rng)))
        })
        .collect();
    // forced states at the density floor: just inside the tested speed range
    // and on the light-cone margin itself
    let dir = sampling::direction(&mut rng);
    let inner = (0.99 * (1.0 - delta)).sqrt() * c;
    samples.push(("edge-0.99".into(), Role::Interior, PrimState::new(window.rho_min(), sampling::scale_to(dir, inner))));
    let outer = (1.0 - delta).sqrt() * c;
    samples.push(("edge".into(), Role::Edge, PrimState::new(window.rho_min(), sampling::scale_to(dir, outer))));

    // the margin sample may round a hair past (1−δ)c²
    let edge_sym = sym.clone().research_mode(true);
    let mut rows = Vec::with_capacity(samples.len());
    let mut roles = Vec::with_capacity(samples.len());
    for (label, role, s) in samples {
        let engine = if role == Role::Edge { &edge_sym } else { &sym };
        rows.push(evaluate(engine, label, role, s)?);
        roles.push(role);
    }
    let interior = || rows.iter().zip(&roles).filter(|(_, r)| **r == Role::Interior).map(|(row, _)| row);

    let not_spd = rows.iter().filter(|r| !r.spd).count() as f64;
    report.push(
        Check::new("a0_positive_definite", not_spd, Bound::Le, 0.0, "A⁰ must be symmetric positive definite (Cholesky and Schur complement)")
            .admissibility(),
    );
    report.push(Check::new(
        "schur_eigenvalues",
        max_of(interior().map(|r| r.eigen_rel_error)),
        Bound::Le,
        tol.eigen_rel,
        "closed-form Schur-complement eigenvalues B₄ (double) and λ₃ must match the numeric eigensolver",
    ));
    report.push(Check::new(
        "jacobian_finite_difference",
        max_of(interior().map(|r| r.max_fd_error)),
        Bound::Le,
        tol.jacobian_fd_rel,
        "analytic Jacobian ∂w/∂(ρ, v) must match central differences",
    ));
    report.push(Check::new(
        "jacobian_determinant",
        max_of(interior().map(|r| r.det_rel_error)),
        Bound::Le,
        tol.det_rel,
        "closed-form det ∂w/∂(ρ, v) = −c⁶Φ³Φ'/(c²−|v|²)² must match the numeric determinant",
    ));
    let min_det = rows.iter().map(|r| r.det).fold(f64::INFINITY, f64::min);
    report.push(Check::new("determinant_positive", min_det, Bound::Gt, 0.0, "the change of variables must be non-degenerate (det > 0)"));
    report.push(Check::new(
        "bijection_round_trip",
        max_of(interior().map(|r| r.round_trip_error)),
        Bound::Le,
        tol.sym_round_trip_rel,
        "recovering (ρ, v) from w must invert the forward map",
    ));
    report.push(Check::new(
        "sym_identities",
        max_of(interior().map(|r| r.identity_error)),
        Bound::Le,
        tol.sym_identity,
        "|v|² and Φ reconstructed from w must reproduce the forward values",
    ));
    let edge = rows.last().expect("forced edge sample");
    report.value("edge_lambda3", edge.lambda3);
    report.value("edge_lambda1", edge.lambda1);
    report.push(
        Check::new("edge_lambda3_positive", edge.lambda3, Bound::Gt, 0.0, "λ₃ must stay positive at |v|² = (1−δ)c²").admissibility(),
    );

    phi_checks(&sym, ctx, &mut report)?;

    let sel = select_ak_variant(&sym, VARIANT_CELLS, tol.variant_residual)?;
    let winners = sel.trials.iter().filter(|t| t.annihilates).count();
    for t in &sel.trials {
        let key = format!("variant_{:?}_{:?}", t.variant.entry00, t.variant.delta).to_lowercase();
        report.value(&format!("{key}_residual"), t.fine.1);
        report.value(&format!("{key}_order"), t.order);
    }
    let chosen = sel.selected.and_then(|v| sel.trials.iter().find(|t| t.variant == v));
    report.push(Check::new(
        "ak_variant_unique",
        winners as f64,
        Bound::Le,
        1.0,
        "exactly one Aᵏ variant may annihilate manufactured solutions",
    ));
    report.push(Check::new(
        "ak_variant_selected",
        chosen.map_or(f64::INFINITY, |t| t.fine.1),
        Bound::Le,
        tol.variant_residual,
        format!(
            "the shipped Aᵏ variant {:?} must annihilate manufactured solutions at truncation order",
            AkVariant::VALIDATED
        ),
    ));
    if sel.selected != Some(AkVariant::VALIDATED) {
        report.push(Check::new("ak_variant_matches_default", 1.0, Bound::Le, 0.0, "selected variant differs from the shipped default"));
    }

    std::fs::create_dir_all(&ctx.out)?;
    write_csv(ctx, &mut report, "symmetrizer.csv", &rows)?;
    Ok(report)
}

/// Monotone scan of Φ and validation of the interpolation cache.
fn phi_checks(sym: &RelSymmetrizer, ctx: &Context, report: &mut Report) -> anyhow::Result<()> {
    let w = sym.window();
    let n = 1000;
    let rhos: Vec<f64> = (0..n).map(|i| w.log_lerp(i as f64 / (n - 1) as f64)).collect();
    let phis = rhos.iter().map(|&r| sym.big_phi(r)).collect::<logeuler_core::Result<Vec<_>>>()?;
    let rise = phis.windows(2).map(|p| p[1] - p[0]).fold(f64::NEG_INFINITY, f64::max);
    let slope = rhos.iter().map(|&r| sym.big_phi_prime(r)).collect::<logeuler_core::Result<Vec<_>>>()?;
    let slope = slope.into_iter().fold(f64::NEG_INFINITY, f64::max);
    report.push(Check::new("phi_decreasing", rise.max(slope), Bound::Lt, 0.0, "Φ must be strictly decreasing on [ρ*, ρ_max]"));

    let cached = sym.clone().with_phi_cache(PhiTable::DEFAULT_NODES)?;
    let table = cached.phi_table().expect("cache was just built");
    let mut worst = 0.0f64;
    for &r in &rhos {
        let exact = sym.phi_quadrature(r)?;
        worst = worst.max(table.eval(r).map_or(f64::INFINITY, |t| (t - exact).abs()));
    }
    report.push(Check::new("phi_cache", worst, Bound::Le, ctx.tol.phi_cache_abs, "cached φ must match direct quadrature"));
    Ok(())
}
