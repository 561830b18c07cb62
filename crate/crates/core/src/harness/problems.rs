//! Problem definitions for the coupled drivers.

use crate::fespace::{FiniteElementSpace, Geometry};
use crate::mesh::Mesh;
use crate::transport::{AngularQuadrature, TransportProblem};
use crate::{Result, Vec2};
use std::f64::consts::PI;
use std::sync::Arc;

/// Builds a transport problem with piecewise-constant data per element.
pub fn build_problem(
    mesh: Arc<Mesh>,
    p: usize,
    quad: Arc<AngularQuadrature>,
    sigma_t: Vec<f64>,
    sigma_s: Vec<f64>,
    source: Vec<f64>,
    inflow: crate::transport::InflowFn,
) -> Result<TransportProblem> {
    let geo = Arc::new(Geometry::for_degree(mesh.clone(), p)?);
    let space = Arc::new(FiniteElementSpace::dg(mesh, p)?);
    let src = Arc::new(source);
    TransportProblem::new(
        geo,
        space,
        quad,
        sigma_t,
        sigma_s,
        Arc::new(move |e, _, _| src[e]),
        inflow,
    )
}

/// Thick diffusion scaling `sigma_t = 1/eps`, `sigma_a = eps`, `q = eps` with
/// vacuum boundaries.
pub fn diffusion_limit(mesh: Arc<Mesh>, p: usize, quad: Arc<AngularQuadrature>, eps: f64) -> Result<TransportProblem> {
    let ne = mesh.num_elements();
    build_problem(
        mesh,
        p,
        quad,
        vec![1.0 / eps; ne],
        vec![1.0 / eps - eps; ne],
        vec![eps; ne],
        Arc::new(|_, _| 0.0),
    )
}

/// Z-shaped channel of thin material through a thick block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZChannel {
    pub width: f64,
    pub height: f64,
    pub half_width: f64,
    /// x position of the riser centre.
    pub riser: f64,
    pub sigma_thin: f64,
    pub sigma_thick: f64,
    /// Artificial absorption from the mocked time step.
    pub absorption: f64,
    pub source: f64,
    pub inflow: f64,
}

impl Default for ZChannel {
    fn default() -> Self {
        ZChannel {
            width: 7.0,
            height: 2.0,
            half_width: 0.25,
            riser: 3.5,
            sigma_thin: 0.2,
            sigma_thick: 200.0,
            absorption: 1e-3,
            source: 0.1,
            inflow: 1.0 / (2.0 * PI),
        }
    }
}

impl ZChannel {
    fn lower(&self) -> f64 {
        self.height / 4.0
    }

    fn upper(&self) -> f64 {
        3.0 * self.height / 4.0
    }

    /// Whether `x` lies in the channel.
    pub fn in_channel(&self, x: Vec2) -> bool {
        let w = self.half_width;
        let lower_leg = x.x <= self.riser + w && (x.y - self.lower()).abs() <= w;
        let riser = (x.x - self.riser).abs() <= w && x.y >= self.lower() - w && x.y <= self.upper() + w;
        let upper_leg = x.x >= self.riser - w && (x.y - self.upper()).abs() <= w;
        lower_leg || riser || upper_leg
    }

    /// Cartesian mesh whose lines align with the channel walls; `cells` is
    /// the number of cells per channel half-width.
    pub fn mesh(&self, cells: usize, order: usize) -> Result<Mesh> {
        let h = self.half_width / cells as f64;
        let nx = (self.width / h).round() as usize;
        let ny = (self.height / h).round() as usize;
        let mut mesh = Mesh::cartesian(nx, ny, [0.0, self.width], [0.0, self.height], order)?;
        mesh.set_attributes(|c| if self.in_channel(c) { 1 } else { 2 });
        Ok(mesh)
    }

    pub fn problem(&self, mesh: Arc<Mesh>, p: usize, quad: Arc<AngularQuadrature>) -> Result<TransportProblem> {
        let ne = mesh.num_elements();
        let mut st = Vec::with_capacity(ne);
        let mut ss = Vec::with_capacity(ne);
        for e in 0..ne {
            let s = if mesh.attribute(e) == 1 {
                self.sigma_thin
            } else {
                self.sigma_thick
            };
            st.push(s + self.absorption);
            ss.push(s);
        }
        let z = *self;
        let inflow = Arc::new(
            move |x: Vec2, _| {
                if x.x < 1e-12 && z.in_channel(x) {
                    z.inflow
                } else {
                    0.0
                }
            },
        );
        build_problem(mesh, p, quad, st, ss, vec![self.source; ne], inflow)
    }
}
