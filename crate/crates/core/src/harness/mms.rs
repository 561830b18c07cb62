//! Manufactured transport solution
//! `psi = (alpha + Omega . beta + Omega Omega : Theta) / (4 pi)` and the
//! convergence study built on it.

use super::config::Distortion;
use crate::closures::ClosureFields;
use crate::fespace::{FiniteElementSpace, Geometry};
use crate::mesh::Mesh;
use crate::smm::{Method, MomentSolution, MomentSolverOptions, MomentSystem, SmmContext};
use crate::transport::{AngularFlux, AngularQuadrature, InflowFn, SourceFn, TransportProblem};
use crate::{Mat2, Result, Vec2, Vec3};
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

/// Shift parameters of the manufactured solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsParams {
    pub delta: f64,
    pub zeta: f64,
    pub omega: f64,
    pub sigma_t: f64,
    pub sigma_s: f64,
}

impl Default for MmsParams {
    fn default() -> Self {
        MmsParams {
            delta: 1.25,
            zeta: 0.1,
            omega: 0.05,
            sigma_t: 1.0,
            sigma_s: 0.5,
        }
    }
}

/// `sin(k (x + s)) sin(k (y + s))` with `k = c pi / (1 + 2 s)`, and gradient.
fn shifted_sine(x: Vec2, c: f64, s: f64) -> (f64, Vec2) {
    let k = c * PI / (1.0 + 2.0 * s);
    let (sx, cx) = (k * (x.x + s)).sin_cos();
    let (sy, cy) = (k * (x.y + s)).sin_cos();
    (sx * sy, Vec2::new(k * cx * sy, k * sx * cy))
}

impl MmsParams {
    pub fn alpha(&self, x: Vec2) -> (f64, Vec2) {
        let (v, g) = shifted_sine(x, 1.0, 0.0);
        (v + self.delta, g)
    }

    /// Both components of `beta` are the same sine; returns value and
    /// gradient of that sine.
    fn beta_sine(&self, x: Vec2) -> (f64, Vec2) {
        shifted_sine(x, 2.0, self.omega)
    }

    fn theta_sine(&self, x: Vec2) -> (f64, Vec2) {
        shifted_sine(x, 3.0, self.zeta)
    }

    pub fn beta(&self, x: Vec2) -> Vec2 {
        let (b, _) = self.beta_sine(x);
        Vec2::new(b, b)
    }

    pub fn theta(&self, x: Vec2) -> Mat2 {
        let (t, _) = self.theta_sine(x);
        let (b, _) = self.beta_sine(x);
        Mat2::new(0.5 * t, b, b, 0.25 * t)
    }

    pub fn psi(&self, x: Vec2, o: Vec3) -> f64 {
        let om = Vec2::new(o.x, o.y);
        let th = self.theta(x);
        (self.alpha(x).0 + om.dot(&self.beta(x)) + om.dot(&(th * om))) / (4.0 * PI)
    }

    /// `Omega . grad psi`
    pub fn streaming(&self, x: Vec2, o: Vec3) -> f64 {
        let om = Vec2::new(o.x, o.y);
        let (_, ga) = self.alpha(x);
        let (_, gb) = self.beta_sine(x);
        let (_, gt) = self.theta_sine(x);
        let db = om.dot(&gb);
        let dt = om.dot(&gt);
        let beta_part = (om.x + om.y) * db;
        let theta_part = om.x * om.x * 0.5 * dt + om.y * om.y * 0.25 * dt;
        let cross = 2.0 * om.x * om.y * db;
        (om.dot(&ga) + beta_part + theta_part + cross) / (4.0 * PI)
    }

    pub fn phi(&self, x: Vec2) -> f64 {
        self.alpha(x).0 + self.theta(x).trace() / 3.0
    }

    pub fn current(&self, x: Vec2) -> Vec2 {
        self.beta(x) / 3.0
    }

    /// In-plane pressure `int Omega Omega psi`.
    pub fn pressure(&self, x: Vec2) -> Mat2 {
        let a = self.alpha(x).0;
        let t = self.theta(x);
        Mat2::new(
            a / 3.0 + (3.0 * t[(0, 0)] + t[(1, 1)]) / 15.0,
            (t[(0, 1)] + t[(1, 0)]) / 15.0,
            (t[(0, 1)] + t[(1, 0)]) / 15.0,
            a / 3.0 + (t[(0, 0)] + 3.0 * t[(1, 1)]) / 15.0,
        )
    }

    /// `q = Omega . grad psi + sigma_t psi - sigma_s phi / (4 pi)`
    pub fn source(&self, x: Vec2, o: Vec3) -> f64 {
        self.streaming(x, o) + self.sigma_t * self.psi(x, o) - self.sigma_s * self.phi(x) / (4.0 * PI)
    }

    pub fn source_fn(&self) -> SourceFn {
        let m = *self;
        Arc::new(move |_, x, o| m.source(x, o))
    }

    pub fn inflow_fn(&self) -> InflowFn {
        let m = *self;
        Arc::new(move |x, o| m.psi(x, o))
    }
}

/// Unit square mesh of `n x n` elements, distorted through the Taylor-Green
/// vortex.
pub fn mms_mesh(n: usize, order: usize, distortion: Distortion, t_final: f64, steps: usize) -> Result<Mesh> {
    let mut mesh = Mesh::unit_square(n, order)?;
    match distortion {
        Distortion::None => {}
        Distortion::Literal => mesh.distort_taylor_green(t_final, steps)?,
        Distortion::Cell => mesh.distort_taylor_green_cell(t_final, steps)?,
    }
    Ok(mesh)
}

/// Errors of one manufactured-solution solve.
#[derive(Debug, Clone, Copy)]
pub struct MmsErrors {
    pub h: f64,
    pub phi: f64,
    pub phi_projected: f64,
    pub current: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct MmsSetup {
    pub params: MmsParams,
    pub moment: MomentSolverOptions,
    pub penalty_scale: f64,
}

impl Default for MmsSetup {
    fn default() -> Self {
        MmsSetup {
            params: MmsParams::default(),
            moment: MomentSolverOptions::default(),
            penalty_scale: 1.0,
        }
    }
}

/// Result of one manufactured-solution solve.
pub struct MmsRun {
    pub errors: MmsErrors,
    pub geo: Arc<Geometry>,
    pub sspace: Arc<FiniteElementSpace>,
    pub vspace: Option<Arc<FiniteElementSpace>>,
    pub solution: MomentSolution,
    pub unknowns: usize,
    pub seconds: f64,
}

/// Transport problem for the manufactured solution on `mesh`.
pub fn mms_problem(
    params: &MmsParams,
    mesh: Arc<Mesh>,
    p: usize,
    quad: Arc<AngularQuadrature>,
) -> Result<TransportProblem> {
    let geo = Arc::new(Geometry::for_degree(mesh.clone(), p)?);
    let space = Arc::new(FiniteElementSpace::dg(mesh.clone(), p)?);
    let ne = mesh.num_elements();
    TransportProblem::new(
        geo,
        space,
        quad,
        vec![params.sigma_t; ne],
        vec![params.sigma_s; ne],
        params.source_fn(),
        params.inflow_fn(),
    )
}

/// Elementwise L2 projection of the exact angular flux for every direction.
pub fn project_psi(params: &MmsParams, problem: &TransportProblem) -> Result<AngularFlux> {
    let data = problem
        .quad
        .directions
        .iter()
        .map(|&o| problem.space.project_dg(&problem.geo, |x| params.psi(x, o)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AngularFlux { data })
}

/// Solves the moment system once with closures from the projected exact
/// angular flux and measures the errors. `h` is `1/sqrt(#elements)`.
pub fn mms_solve(
    setup: &MmsSetup,
    method: Method,
    p: usize,
    mesh: Arc<Mesh>,
    quad: Arc<AngularQuadrature>,
) -> Result<MmsRun> {
    let start = Instant::now();
    let params = setup.params;
    let problem = mms_problem(&params, mesh.clone(), p, quad.clone())?;
    let psi = project_psi(&params, &problem)?;
    let closures = ClosureFields::from_flux(&psi, &problem.space, &problem.geo, &quad, &problem.inflow);
    let mut ctx = SmmContext::from_problem(&problem);
    ctx.penalty_scale = setup.penalty_scale;
    let mut system = MomentSystem::new(method, Arc::new(ctx), setup.moment)?;
    let sol = system.solve(&closures, None)?;
    let sspace = system.scalar_space().clone();
    let geo = problem.geo.clone();
    let phi = sspace.l2_error(&geo, &sol.varphi, |x| params.phi(x));
    let proj = problem.space.project_dg(&geo, |x| params.phi(x))?;
    // distance to the projection in the dg space of equal degree
    let (phi_projected, _) = sspace.l2_distance(&geo, &sol.varphi, &problem.space, &proj);
    let vspace = match &system {
        MomentSystem::Rt(s) => Some(s.vspace.clone()),
        MomentSystem::Hrt(s) => Some(s.vspace.clone()),
        MomentSystem::Scalar(_) => None,
    };
    let current = match (&vspace, &sol.current) {
        (Some(vs), Some(j)) => Some(vs.l2_error_vector(&geo, j, |x| params.current(x))),
        _ => None,
    };
    let unknowns = system.num_unknowns();
    Ok(MmsRun {
        errors: MmsErrors {
            h: 1.0 / (mesh.num_elements() as f64).sqrt(),
            phi,
            phi_projected,
            current,
            iterations: sol.iterations,
        },
        geo,
        sspace,
        vspace,
        solution: sol,
        unknowns,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Least-squares fit `log e = log C + r log h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub order: f64,
    pub constant: f64,
    /// Root mean square of the residuals in `log e`.
    pub residual: f64,
}

pub fn fit_order(h: &[f64], e: &[f64]) -> Fit {
    let n = h.len() as f64;
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let order = sxy / sxx;
    let c = my - order * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - c - order * x).powi(2)).sum();
    Fit {
        order,
        constant: c.exp(),
        residual: (ss / n).sqrt(),
    }
}
