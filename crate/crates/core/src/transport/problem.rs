use super::quadrature::AngularQuadrature;
use crate::fespace::{FiniteElementSpace, Geometry, SpaceKind};
use crate::{Error, Mat2, Result, Vec2, Vec3};
use std::sync::Arc;

/// Angular source `q(element, x, Omega)`.
pub type SourceFn = Arc<dyn Fn(usize, Vec2, Vec3) -> f64 + Send + Sync>;
/// Incoming boundary flux `psi_bar(x, Omega)`.
pub type InflowFn = Arc<dyn Fn(Vec2, Vec3) -> f64 + Send + Sync>;

/// Steady one-group transport problem with elementwise constant cross
/// sections, discretized with upwind DG in `space`.
#[derive(Clone)]
pub struct TransportProblem {
    pub geo: Arc<Geometry>,
    pub space: Arc<FiniteElementSpace>,
    pub quad: Arc<AngularQuadrature>,
    pub sigma_t: Vec<f64>,
    pub sigma_s: Vec<f64>,
    pub source: SourceFn,
    pub inflow: InflowFn,
}

impl TransportProblem {
    pub fn new(
        geo: Arc<Geometry>,
        space: Arc<FiniteElementSpace>,
        quad: Arc<AngularQuadrature>,
        sigma_t: Vec<f64>,
        sigma_s: Vec<f64>,
        source: SourceFn,
        inflow: InflowFn,
    ) -> Result<Self> {
        let ne = geo.mesh.num_elements();
        if space.kind() != SpaceKind::Dg {
            return Err(Error::SpaceMismatch("transport needs a dg space".into()));
        }
        if sigma_t.len() != ne || sigma_s.len() != ne {
            return Err(Error::DimensionMismatch {
                expected: ne,
                found: sigma_t.len().min(sigma_s.len()),
            });
        }
        for e in 0..ne {
            if !(sigma_t[e] > 0.0) || sigma_s[e] < 0.0 || sigma_s[e] > sigma_t[e] {
                return Err(Error::Config(format!(
                    "element {e}: need sigma_t > 0 and 0 <= sigma_s <= sigma_t, got {} and {}",
                    sigma_t[e], sigma_s[e]
                )));
            }
        }
        Ok(TransportProblem {
            geo,
            space,
            quad,
            sigma_t,
            sigma_s,
            source,
            inflow,
        })
    }

    pub fn sigma_a(&self, e: usize) -> f64 {
        self.sigma_t[e] - self.sigma_s[e]
    }

    pub fn num_elements(&self) -> usize {
        self.sigma_t.len()
    }
}

/// Nodal DG coefficients of `psi` for every direction.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularFlux {
    pub data: Vec<Vec<f64>>,
}

impl AngularFlux {
    pub fn zeros(ndirs: usize, ndofs: usize) -> Self {
        AngularFlux {
            data: vec![vec![0.0; ndofs]; ndirs],
        }
    }

    pub fn ndofs(&self) -> usize {
        self.data.first().map_or(0, |d| d.len())
    }

    fn moment(&self, quad: &AngularQuadrature, f: impl Fn(Vec3) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.ndofs()];
        for ((psi, &o), &w) in self.data.iter().zip(&quad.directions).zip(&quad.weights) {
            let c = w * f(o);
            for (a, b) in out.iter_mut().zip(psi) {
                *a += c * b;
            }
        }
        out
    }

    /// `phi = sum_d w_d psi_d`
    pub fn scalar_flux(&self, quad: &AngularQuadrature) -> Vec<f64> {
        self.moment(quad, |_| 1.0)
    }

    /// `[J_x, J_y]`
    pub fn current(&self, quad: &AngularQuadrature) -> [Vec<f64>; 2] {
        [self.moment(quad, |o| o.x), self.moment(quad, |o| o.y)]
    }

    /// In-plane pressure `[P_xx, P_xy, P_yy]`.
    pub fn pressure(&self, quad: &AngularQuadrature) -> [Vec<f64>; 3] {
        [
            self.moment(quad, |o| o.x * o.x),
            self.moment(quad, |o| o.x * o.y),
            self.moment(quad, |o| o.y * o.y),
        ]
    }

    /// Pressure tensor at one node.
    pub fn pressure_at(p: &[Vec<f64>; 3], k: usize) -> Mat2 {
        Mat2::new(p[0][k], p[1][k], p[1][k], p[2][k])
    }
}
