//! The four study drivers.

use super::config::{Config, Driver};
use super::mms::{fit_order, mms_mesh, mms_solve, Fit, MmsParams, MmsRun, MmsSetup};
use super::problems::diffusion_limit;
use super::report::{Check, FitRow, LineoutRow, ReportRow, RunReport};
use crate::fespace::FiniteElementSpace;
use crate::mesh::Mesh;
use crate::smm::scalar::assemble_matrix;
use crate::smm::{CoupledSolution, FixedPointOperator, Method, SmmContext};
use crate::transport::{solve_sn_dsa, SnOptions, Sweeper, TransportProblem};
use crate::{Result, Vec2};
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

/// Number of lineout samples across the domain.
pub const LINEOUT_POINTS: usize = 64;

pub fn run(cfg: &Config) -> Result<RunReport> {
    cfg.validate()?;
    match cfg.driver {
        Driver::Mms => run_mms(cfg),
        Driver::DiffusionLimit => run_diffusion_limit(cfg),
        Driver::Multimaterial => run_multimaterial(cfg),
        Driver::SnConvergence => run_sn_convergence(cfg),
    }
}

fn levels_string(levels: &[usize]) -> String {
    levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

fn fit_row(cfg: &Config, method: Method, p: usize, quantity: &str, fit: Fit) -> FitRow {
    FitRow {
        driver: cfg.driver.name().into(),
        method: method.name().into(),
        p,
        quantity: quantity.into(),
        order: fit.order,
        constant: fit.constant,
        residual: fit.residual,
        levels: levels_string(cfg.refinements()),
    }
}

/// Manufactured-solution convergence of the isolated moment systems.
pub fn run_mms(cfg: &Config) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone());
    let quad = Arc::new(cfg.quadrature.build()?);
    let setup = MmsSetup {
        params: MmsParams {
            sigma_t: cfg.mms.sigma_t,
            sigma_s: cfg.mms.sigma_s,
            ..MmsParams::default()
        },
        moment: cfg.moment_options(),
        penalty_scale: cfg.penalty_scale,
    };
    for &p in &cfg.degrees {
        let mut runs: BTreeMap<Method, Vec<MmsRun>> = BTreeMap::new();
        for &n in cfg.refinements() {
            let mesh = Arc::new(mms_mesh(
                n,
                cfg.mesh_order(),
                cfg.mms.distortion,
                cfg.mms.t_final,
                cfg.mms.steps,
            )?);
            for &method in &cfg.methods {
                let run = mms_solve(&setup, method, p, mesh.clone(), quad.clone())?;
                let e = run.errors;
                let mut row = ReportRow {
                    driver: cfg.driver.name().into(),
                    method: method.name().into(),
                    p,
                    mesh: n,
                    h: e.h,
                    unknowns: run.unknowns,
                    err_phi: Some(e.phi),
                    err_phi_proj: Some(e.phi_projected),
                    err_j: e.current,
                    t_rhs: run.solution.rhs_time,
                    t_solve: run.solution.solve_time,
                    t_total: run.seconds,
                    ..ReportRow::default()
                };
                row.inner(&[e.iterations]);
                report.rows.push(row);
                runs.entry(method).or_default().push(run);
            }
        }
        if cfg.refinements().len() >= 3 {
            for (&method, rs) in &runs {
                let h: Vec<f64> = rs.iter().map(|r| r.errors.h).collect();
                let phi: Vec<f64> = rs.iter().map(|r| r.errors.phi).collect();
                let proj: Vec<f64> = rs.iter().map(|r| r.errors.phi_projected).collect();
                let f = fit_order(&h, &phi);
                report.fits.push(fit_row(cfg, method, p, "phi", f));
                report
                    .fits
                    .push(fit_row(cfg, method, p, "phi_projected", fit_order(&h, &proj)));
                if let Some(js) = rs.iter().map(|r| r.errors.current).collect::<Option<Vec<f64>>>() {
                    report.fits.push(fit_row(cfg, method, p, "current", fit_order(&h, &js)));
                }
                let target = (p + 1) as f64;
                report.checks.push(Check::new(
                    format!("mms order {} p={p}", method.name()),
                    (f.order - target).abs() <= 0.2,
                    format!("fitted {:.3}, expected {target} +- 0.2", f.order),
                ));
            }
        }
        if let (Some(rt), Some(hrt)) = (runs.get(&Method::Rt), runs.get(&Method::Hrt)) {
            let mut worst: f64 = 0.0;
            for (a, b) in rt.iter().zip(hrt) {
                let (dp, np) = b
                    .sspace
                    .l2_distance(&a.geo, &b.solution.varphi, &a.sspace, &a.solution.varphi);
                worst = worst.max(dp / np);
                if let (Some(va), Some(vb), Some(ja), Some(jb)) =
                    (&a.vspace, &b.vspace, &a.solution.current, &b.solution.current)
                {
                    let (dj, nj) = vb.l2_distance(&a.geo, jb, va, ja);
                    worst = worst.max(dj / nj);
                }
            }
            report.checks.push(Check::new(
                format!("rt and hrt agree p={p}"),
                worst < 1e-10,
                format!("largest relative L2 difference {worst:.3e}"),
            ));
        }
    }
    Ok(report)
}

/// Runs the coupled algorithm and fills a report row.
fn coupled_row(
    cfg: &Config,
    sweeper: Arc<Sweeper>,
    method: Method,
    fixup: bool,
) -> Result<(ReportRow, CoupledSolution, FixedPointOperator)> {
    let start = Instant::now();
    let mut opts = cfg.coupled_options(method);
    opts.fixup = fixup;
    let mut op = FixedPointOperator::new(sweeper.clone(), &opts)?;
    let sol = op.solve(&opts.fixed_point)?;
    let p = &sweeper.problem;
    let mut row = ReportRow {
        driver: cfg.driver.name().into(),
        method: method.name().into(),
        p: p.space.degree(),
        fixup,
        h: p.geo.mesh.h_max(),
        unknowns: op.num_unknowns(),
        outer_iterations: Some(sol.iterations),
        converged: Some(sol.converged),
        balance: Some(sol.balance.relative()),
        fixups: Some(sol.fixups),
        t_sweep: op.timings.sweep,
        t_closure: op.timings.closure,
        t_rhs: op.timings.rhs,
        t_solve: op.timings.solve,
        t_total: start.elapsed().as_secs_f64(),
        ..ReportRow::default()
    };
    row.inner(&op.inner_iterations);
    Ok((row, sol, op))
}

/// Scalar field value at a physical point.
pub fn sample(space: &FiniteElementSpace, data: &[f64], x: Vec2) -> Result<f64> {
    let (e, xi) = space.mesh().locate(x)?;
    Ok(space.value_at(data, e, xi))
}

/// Thick diffusion limit on uniform meshes of the unit square.
pub fn run_diffusion_limit(cfg: &Config) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone());
    let quad = Arc::new(cfg.quadrature.build()?);
    for &p in &cfg.degrees {
        for &eps in cfg.epsilon() {
            let mut sweepers = Vec::new();
            for &n in cfg.refinements() {
                let mesh = Arc::new(Mesh::unit_square(n, cfg.mesh_order())?);
                let problem = Arc::new(diffusion_limit(mesh, p, quad.clone(), eps)?);
                sweepers.push((n, Arc::new(Sweeper::new(problem)?)));
            }
            for &method in &cfg.methods {
                let mut lines: Vec<Vec<f64>> = Vec::new();
                for (n, sw) in &sweepers {
                    let (mut row, sol, op) = coupled_row(cfg, sw.clone(), method, cfg.fixup)?;
                    row.mesh = *n;
                    row.epsilon = Some(eps);
                    let space = op.system.scalar_space();
                    let mut line = Vec::with_capacity(LINEOUT_POINTS);
                    for i in 0..LINEOUT_POINTS {
                        let x = (i as f64 + 0.5) / LINEOUT_POINTS as f64;
                        let v = sample(space, &sol.solution.varphi, Vec2::new(x, 0.5))?;
                        report.lineout.push(LineoutRow {
                            method: method.name().into(),
                            p,
                            mesh: *n,
                            epsilon: eps,
                            x,
                            varphi: v,
                        });
                        line.push(v);
                    }
                    let tag = format!("{} p={p} eps={eps:e} n={n}", method.name());
                    report.checks.push(Check::new(
                        format!("converged {tag}"),
                        sol.converged,
                        format!("{} iterations", sol.iterations),
                    ));
                    let finite = line.iter().all(|v| v.is_finite());
                    let positive = line.iter().all(|&v| v > 0.0);
                    let max = line.iter().cloned().fold(f64::MIN, f64::max);
                    report.checks.push(Check::new(
                        format!("lineout {tag}"),
                        finite && positive && max > 0.1 && max < 10.0,
                        format!("finite {finite}, positive {positive}, max {max:.4}"),
                    ));
                    report.rows.push(row);
                    lines.push(line);
                }
                if lines.len() >= 2 {
                    let max = lines[1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    let diff = lines[0]
                        .iter()
                        .zip(&lines[1])
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                    report.checks.push(Check::new(
                        format!("lineout mesh convergence {} p={p} eps={eps:e}", method.name()),
                        diff / max < 0.05,
                        format!("relative change {:.3e}", diff / max),
                    ));
                }
            }
        }
    }
    Ok(report)
}

/// Z-channel problem with mocked time absorption, Anderson acceleration and
/// optionally paired fixup runs.
pub fn run_multimaterial(cfg: &Config) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone());
    let quad = Arc::new(cfg.quadrature.build()?);
    let z = cfg.channel.geometry();
    let fixups: Vec<bool> = if cfg.channel.paired_fixup {
        vec![cfg.fixup, !cfg.fixup]
    } else {
        vec![cfg.fixup]
    };
    // (method, p, fixup) -> outer iterations per level
    let mut its: BTreeMap<(Method, usize, bool), Vec<usize>> = BTreeMap::new();
    for &p in &cfg.degrees {
        for &cells in cfg.refinements() {
            let mesh = Arc::new(z.mesh(cells, cfg.mesh_order())?);
            let problem: Arc<TransportProblem> = Arc::new(z.problem(mesh, p, quad.clone())?);
            let sweeper = Arc::new(Sweeper::new(problem)?);
            for &method in &cfg.methods {
                for &fixup in &fixups {
                    let (mut row, sol, _) = coupled_row(cfg, sweeper.clone(), method, fixup)?;
                    row.mesh = cells;
                    report.checks.push(Check::new(
                        format!("converged {} p={p} cells={cells} fixup={fixup}", method.name()),
                        sol.converged && sol.iterations <= 25,
                        format!("{} iterations, at most 25 expected", sol.iterations),
                    ));
                    its.entry((method, p, fixup)).or_default().push(sol.iterations);
                    report.rows.push(row);
                }
            }
        }
    }
    for (&(method, p, fixup), v) in &its {
        if fixup == cfg.fixup && fixups.len() == 2 {
            let other = &its[&(method, p, !fixup)];
            let worst = v.iter().zip(other).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0);
            report.checks.push(Check::new(
                format!("fixup pairing {} p={p}", method.name()),
                worst <= 2,
                format!("largest difference {worst} iterations"),
            ));
        }
        let spread = v.iter().max().unwrap() - v.iter().min().unwrap();
        report.checks.push(Check::new(
            format!("refinement spread {} p={p} fixup={fixup}", method.name()),
            spread <= 5,
            format!("outer iterations {v:?}"),
        ));
    }
    Ok(report)
}

/// Coupled SMM scalar flux against a DSA-accelerated discrete ordinates
/// reference on Chebyshev meshes.
pub fn run_sn_convergence(cfg: &Config) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone());
    let quad = Arc::new(cfg.quadrature.build()?);
    for &p in &cfg.degrees {
        for &eps in cfg.epsilon() {
            let mut errs: BTreeMap<Method, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
            for &n in cfg.refinements() {
                let mesh = Arc::new(Mesh::chebyshev(n, cfg.mesh_order())?);
                let problem = Arc::new(diffusion_limit(mesh.clone(), p, quad.clone(), eps)?);
                let sweeper = Arc::new(Sweeper::new(problem.clone())?);
                let mut ctx = SmmContext::from_problem(&problem);
                ctx.penalty_scale = cfg.penalty_scale;
                let dsa = assemble_matrix(&ctx, &problem.space, true);
                let sn_opts = SnOptions {
                    tol: cfg.tol(),
                    max_iter: cfg.max_iter,
                    fixup: cfg.fixup,
                    inner: cfg.moment_options().krylov,
                };
                let t0 = Instant::now();
                let sn = solve_sn_dsa(&sweeper, Some(&dsa), &sn_opts)?;
                let t_ref = t0.elapsed().as_secs_f64();
                for &method in &cfg.methods {
                    let (mut row, sol, op) = coupled_row(cfg, sweeper.clone(), method, cfg.fixup)?;
                    let space = op.system.scalar_space();
                    let (d, _) = space.l2_distance(&problem.geo, &sol.solution.varphi, &problem.space, &sn.phi);
                    row.mesh = n;
                    row.epsilon = Some(eps);
                    row.err_phi = Some(d);
                    row.t_total += t_ref;
                    report.checks.push(Check::new(
                        format!("converged {} p={p} n={n}", method.name()),
                        sol.converged,
                        format!("{} iterations, reference {} iterations", sol.iterations, sn.iterations),
                    ));
                    report.rows.push(row);
                    let entry = errs.entry(method).or_default();
                    entry.0.push(mesh.h_max());
                    entry.1.push(d);
                }
            }
            if cfg.refinements().len() >= 3 {
                for (&method, (h, e)) in &errs {
                    let f = fit_order(h, e);
                    report.fits.push(fit_row(cfg, method, p, "phi_vs_sn", f));
                    let target = p as f64 + 0.5;
                    report.checks.push(Check::new(
                        format!("sn convergence order {} p={p} eps={eps:e}", method.name()),
                        f.order >= target,
                        format!("fitted {:.3}, at least {target} expected", f.order),
                    ));
                }
            }
        }
    }
    Ok(report)
}
