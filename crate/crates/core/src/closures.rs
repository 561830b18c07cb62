//! SMM correction tensors.
//!
//! The volumetric closure is `T = P - phi / 3 I`, stored nodewise in the
//! transport space. The boundary closure
//! `beta = sum_d w |Omega . n| psi - E_b0 sum_d w psi` and the incoming
//! current `J_in = sum_{Omega . n < 0} w (Omega . n) psi_bar` are evaluated at
//! the boundary quadrature points of a [`Geometry`].

use crate::fespace::{FiniteElementSpace, Geometry};
use crate::transport::{AngularFlux, AngularQuadrature, InflowFn};
use crate::{Mat2, Vec2};

/// Nodal `[T_xx, T_xy, T_yy]` of the flux.
pub fn correction_tensor(psi: &AngularFlux, quad: &AngularQuadrature) -> [Vec<f64>; 3] {
    let phi = psi.scalar_flux(quad);
    let [pxx, pxy, pyy] = psi.pressure(quad);
    let txx = pxx.iter().zip(&phi).map(|(p, f)| p - f / 3.0).collect();
    let tyy = pyy.iter().zip(&phi).map(|(p, f)| p - f / 3.0).collect();
    [txx, pxy, tyy]
}

/// `beta` from pointwise angular flux values `psi_d(x)` on a face with unit
/// outward normal `n`.
pub fn boundary_beta(values: &[f64], n: Vec2, quad: &AngularQuadrature) -> f64 {
    let eb0 = quad.eb0(n);
    values
        .iter()
        .zip(&quad.directions)
        .zip(&quad.weights)
        .map(|((&v, o), &w)| w * v * ((o.x * n.x + o.y * n.y).abs() - eb0))
        .sum()
}

/// Incoming partial current, non-positive for non-negative `psi_bar`.
pub fn inflow_current(x: Vec2, n: Vec2, quad: &AngularQuadrature, inflow: &InflowFn) -> f64 {
    quad.incoming_current(n, |o| inflow(x, o))
}

/// Closures for one SMM solve.
#[derive(Debug, Clone)]
pub struct ClosureFields {
    /// Nodal `[T_xx, T_xy, T_yy]` in the transport space.
    pub t: [Vec<f64>; 3],
    /// `beta[f][q]` on boundary faces, empty for interior faces.
    pub beta: Vec<Vec<f64>>,
    /// `J_in[f][q]` on boundary faces, empty for interior faces.
    pub j_in: Vec<Vec<f64>>,
    /// `E_b0[f][q]` on boundary faces, empty for interior faces.
    pub eb0: Vec<Vec<f64>>,
}

impl ClosureFields {
    /// Closures of `psi`, whose coefficients live in the dg space `space`.
    pub fn from_flux(
        psi: &AngularFlux,
        space: &FiniteElementSpace,
        geo: &Geometry,
        quad: &AngularQuadrature,
        inflow: &InflowFn,
    ) -> Self {
        let t = correction_tensor(psi, quad);
        let mesh = &geo.mesh;
        let basis = space.scalar_basis();
        let mut beta = Vec::with_capacity(mesh.num_faces());
        let mut j_in = Vec::with_capacity(mesh.num_faces());
        let mut eb0 = Vec::with_capacity(mesh.num_faces());
        for (fid, face) in mesh.faces().iter().enumerate() {
            if !face.is_boundary() {
                beta.push(Vec::new());
                j_in.push(Vec::new());
                eb0.push(Vec::new());
                continue;
            }
            let e = face.first.0;
            let dofs = space.element_dofs(e);
            let (mut b, mut ji, mut eb) = (Vec::new(), Vec::new(), Vec::new());
            for fp in &geo.faces[fid].points {
                let v = basis.eval(fp.xi1).values;
                let vals: Vec<f64> = psi
                    .data
                    .iter()
                    .map(|pd| dofs.iter().zip(&v).map(|(&k, &s)| pd[k] * s).sum())
                    .collect();
                b.push(boundary_beta(&vals, fp.normal, quad));
                ji.push(inflow_current(fp.x, fp.normal, quad, inflow));
                eb.push(quad.eb0(fp.normal));
            }
            beta.push(b);
            j_in.push(ji);
            eb0.push(eb);
        }
        ClosureFields { t, beta, j_in, eb0 }
    }

    /// Vanishing closures with the given incoming boundary data, which makes
    /// every SMM discretization a diffusion discretization.
    pub fn diffusion(ndofs: usize, geo: &Geometry, quad: &AngularQuadrature, inflow: &InflowFn) -> Self {
        let mesh = &geo.mesh;
        let mut beta = Vec::new();
        let mut j_in = Vec::new();
        let mut eb0 = Vec::new();
        for (fid, face) in mesh.faces().iter().enumerate() {
            if !face.is_boundary() {
                beta.push(Vec::new());
                j_in.push(Vec::new());
                eb0.push(Vec::new());
                continue;
            }
            let pts = &geo.faces[fid].points;
            beta.push(vec![0.0; pts.len()]);
            j_in.push(
                pts.iter()
                    .map(|fp| inflow_current(fp.x, fp.normal, quad, inflow))
                    .collect(),
            );
            eb0.push(pts.iter().map(|fp| quad.eb0(fp.normal)).collect());
        }
        ClosureFields {
            t: [vec![0.0; ndofs], vec![0.0; ndofs], vec![0.0; ndofs]],
            beta,
            j_in,
            eb0,
        }
    }

    /// `T` and `div_h T` at a point of element `e`, from basis values `v` and
    /// physical gradients `g` of the transport space there.
    pub fn t_and_div(&self, dofs: &[usize], v: &[f64], g: &[Vec2]) -> (Mat2, Vec2) {
        let mut t = [0.0; 3];
        let mut gt = [Vec2::zeros(); 3];
        for (i, &k) in dofs.iter().enumerate() {
            for c in 0..3 {
                t[c] += self.t[c][k] * v[i];
                gt[c] += g[i] * self.t[c][k];
            }
        }
        let tm = Mat2::new(t[0], t[1], t[1], t[2]);
        let div = Vec2::new(gt[0].x + gt[1].y, gt[1].x + gt[2].y);
        (tm, div)
    }

    pub fn max_abs_t(&self) -> f64 {
        self.t.iter().flat_map(|c| c.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_beta(&self) -> f64 {
        self.beta.iter().flat_map(|c| c.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }
}
