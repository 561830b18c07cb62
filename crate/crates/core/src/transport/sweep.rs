//! Upwind DG transport sweeps.

use super::fixup::zero_and_scale;
use super::problem::{AngularFlux, TransportProblem};
use crate::fespace::basis::ScalarEval;
use crate::fespace::FiniteElementSpace;
use crate::mesh::Mesh;
use crate::{Result, Vec2, Vec3};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Element processing order for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOrder {
    pub order: Vec<usize>,
    /// Interior faces whose upwind data is taken from the previous iterate:
    /// faces with mixed inflow and outflow points, and faces cut to break
    /// dependency cycles.
    pub lagged: Vec<usize>,
}

fn flow_signs(mesh: &Mesh, normals: &[Vec<Vec2>], omega: Vec2) -> Vec<Option<f64>> {
    (0..mesh.num_faces())
        .map(|f| {
            let signs: Vec<f64> = normals[f].iter().map(|n| n.dot(&omega)).collect();
            if signs.iter().all(|&s| s > 0.0) {
                Some(1.0)
            } else if signs.iter().all(|&s| s < 0.0) {
                Some(-1.0)
            } else {
                None
            }
        })
        .collect()
}

/// Topological order of elements for direction `omega`, given the unit
/// normals at each face's quadrature points. Ready elements are taken lowest
/// index first; cycles are broken at the element with the fewest unresolved
/// upwind neighbours.
pub fn sweep_order(mesh: &Mesh, normals: &[Vec<Vec2>], omega: Vec2) -> SweepOrder {
    let ne = mesh.num_elements();
    let signs = flow_signs(mesh, normals, omega);
    let mut lagged = Vec::new();
    // upstream[e] = (element, face) pairs e depends on
    let mut upstream: Vec<Vec<(usize, usize)>> = vec![Vec::new(); ne];
    let mut downstream: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for (fid, face) in mesh.faces().iter().enumerate() {
        let Some((e2, _)) = face.second else { continue };
        let e1 = face.first.0;
        match signs[fid] {
            Some(s) if s > 0.0 => {
                upstream[e2].push((e1, fid));
                downstream[e1].push(e2);
            }
            Some(_) => {
                upstream[e1].push((e2, fid));
                downstream[e2].push(e1);
            }
            None => lagged.push(fid),
        }
    }
    let mut indeg: Vec<usize> = upstream.iter().map(|u| u.len()).collect();
    let mut done = vec![false; ne];
    let mut heap: BinaryHeap<Reverse<usize>> = (0..ne).filter(|&e| indeg[e] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(ne);
    while order.len() < ne {
        let e = match heap.pop() {
            Some(Reverse(e)) => e,
            None => {
                let e = (0..ne)
                    .filter(|&e| !done[e])
                    .min_by_key(|&e| (indeg[e], e))
                    .expect("unfinished element");
                for &(u, fid) in &upstream[e] {
                    if !done[u] {
                        lagged.push(fid);
                    }
                }
                indeg[e] = 0;
                e
            }
        };
        if done[e] {
            continue;
        }
        done[e] = true;
        order.push(e);
        for &d in &downstream[e] {
            if !done[d] && indeg[d] > 0 {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    heap.push(Reverse(d));
                }
            }
        }
    }
    lagged.sort_unstable();
    lagged.dedup();
    SweepOrder { order, lagged }
}

/// Precomputed sweep data: orders, inverted local matrices and fixed sources
/// for every direction.
pub struct Sweeper {
    pub problem: Arc<TransportProblem>,
    orders: Vec<SweepOrder>,
    inv: Vec<Vec<DMatrix<f64>>>,
    vol_tab: Vec<ScalarEval>,
    /// `face_tab[f][side][q]` basis values of the side's element.
    face_tab: Vec<[Vec<Vec<f64>>; 2]>,
    src_rhs: Vec<Vec<DVector<f64>>>,
    inflow: Vec<Vec<Vec<f64>>>,
    node_weights: Vec<Vec<f64>>,
}

/// Result of one sweep over all directions.
pub struct SweepOutput {
    pub psi: AngularFlux,
    /// Elements adjusted by the fixup, summed over directions.
    pub fixups: usize,
}

fn dir2(o: Vec3) -> Vec2 {
    Vec2::new(o.x, o.y)
}

impl Sweeper {
    pub fn new(problem: Arc<TransportProblem>) -> Result<Self> {
        let geo = &problem.geo;
        let mesh = &geo.mesh;
        let basis = problem.space.scalar_basis();
        let nl = basis.dim();
        let ne = mesh.num_elements();
        let vol_tab: Vec<ScalarEval> = geo.rule2d.points.iter().map(|&xi| basis.eval(xi)).collect();
        let face_tab: Vec<[Vec<Vec<f64>>; 2]> = geo
            .faces
            .iter()
            .map(|fg| {
                let s1 = fg.points.iter().map(|p| basis.eval(p.xi1).values).collect();
                let s2 = fg
                    .points
                    .iter()
                    .map(|p| p.xi2.map(|xi| basis.eval(xi).values).unwrap_or_default())
                    .collect();
                [s1, s2]
            })
            .collect();
        let normals: Vec<Vec<Vec2>> = geo
            .faces
            .iter()
            .map(|fg| fg.points.iter().map(|p| p.normal).collect())
            .collect();
        let node_weights: Vec<Vec<f64>> = (0..ne)
            .map(|e| {
                let mut m = vec![0.0; nl];
                for (k, qp) in geo.volume[e].iter().enumerate() {
                    for i in 0..nl {
                        m[i] += qp.w * vol_tab[k].values[i];
                    }
                }
                m
            })
            .collect();
        let quad = problem.quad.clone();
        let per_dir: Vec<_> = (0..quad.len())
            .into_par_iter()
            .map(|d| {
                let omega = quad.directions[d];
                let om = dir2(omega);
                let order = sweep_order(mesh, &normals, om);
                let mut inv = Vec::with_capacity(ne);
                let mut src = Vec::with_capacity(ne);
                for e in 0..ne {
                    let mut a = DMatrix::zeros(nl, nl);
                    let mut b = DVector::zeros(nl);
                    let st = problem.sigma_t[e];
                    for (k, qp) in geo.volume[e].iter().enumerate() {
                        let tab = &vol_tab[k];
                        let qv = (problem.source)(e, qp.x, omega);
                        for i in 0..nl {
                            let gi = (qp.inv_t * tab.grads[i]).dot(&om);
                            b[i] += qp.w * tab.values[i] * qv;
                            for j in 0..nl {
                                a[(i, j)] += qp.w * tab.values[j] * (st * tab.values[i] - gi);
                            }
                        }
                    }
                    for (lf, &fid) in mesh.element_faces(e).iter().enumerate() {
                        let face = mesh.face(fid);
                        let (side, sgn) = if face.first == (e, lf) { (0, 1.0) } else { (1, -1.0) };
                        for (q, fp) in geo.faces[fid].points.iter().enumerate() {
                            let on = sgn * fp.normal.dot(&om);
                            if on > 0.0 {
                                let v = &face_tab[fid][side][q];
                                for i in 0..nl {
                                    for j in 0..nl {
                                        a[(i, j)] += on * fp.w * v[i] * v[j];
                                    }
                                }
                            }
                        }
                    }
                    inv.push(a.try_inverse().expect("local transport matrix is invertible"));
                    src.push(b);
                }
                let inflow: Vec<Vec<f64>> = mesh
                    .faces()
                    .iter()
                    .enumerate()
                    .map(|(fid, face)| {
                        if face.is_boundary() {
                            geo.faces[fid]
                                .points
                                .iter()
                                .map(|fp| {
                                    if fp.normal.dot(&om) < 0.0 {
                                        (problem.inflow)(fp.x, omega)
                                    } else {
                                        0.0
                                    }
                                })
                                .collect()
                        } else {
                            Vec::new()
                        }
                    })
                    .collect();
                (order, inv, src, inflow)
            })
            .collect();
        let mut orders = Vec::new();
        let mut inv = Vec::new();
        let mut src_rhs = Vec::new();
        let mut inflow = Vec::new();
        for (o, i, s, f) in per_dir {
            orders.push(o);
            inv.push(i);
            src_rhs.push(s);
            inflow.push(f);
        }
        Ok(Sweeper {
            problem,
            orders,
            inv,
            vol_tab,
            face_tab,
            src_rhs,
            inflow,
            node_weights,
        })
    }

    pub fn order(&self, d: usize) -> &SweepOrder {
        &self.orders[d]
    }

    pub fn node_weights(&self) -> &[Vec<f64>] {
        &self.node_weights
    }

    /// Scattering load `int u sigma_s / (4 pi) varphi` per element, with
    /// `varphi` given in `space` (dg or cg).
    fn scattering_rhs(&self, varphi: &[f64], space: &FiniteElementSpace) -> Vec<DVector<f64>> {
        let p = &self.problem;
        let geo = &p.geo;
        let sb = space.scalar_basis();
        let stab: Vec<Vec<f64>> = geo.rule2d.points.iter().map(|&xi| sb.eval(xi).values).collect();
        let nl = self.problem.space.scalar_basis().dim();
        (0..geo.mesh.num_elements())
            .map(|e| {
                let dofs = space.element_dofs(e);
                let c = p.sigma_s[e] / (4.0 * PI);
                let mut b = DVector::zeros(nl);
                if c == 0.0 {
                    return b;
                }
                for (k, qp) in geo.volume[e].iter().enumerate() {
                    let v: f64 = dofs.iter().zip(&stab[k]).map(|(&d, &s)| varphi[d] * s).sum();
                    for i in 0..nl {
                        b[i] += qp.w * self.vol_tab[k].values[i] * c * v;
                    }
                }
                b
            })
            .collect()
    }

    /// One transport sweep for every direction with scattering source from
    /// `varphi` (coefficients in `space`). Upwind values across lagged faces
    /// come from `psi_prev`.
    pub fn sweep(
        &self,
        varphi: &[f64],
        space: &FiniteElementSpace,
        psi_prev: &AngularFlux,
        fixup: bool,
    ) -> SweepOutput {
        let scat = self.scattering_rhs(varphi, space);
        let results: Vec<(Vec<f64>, usize)> = (0..self.problem.quad.len())
            .into_par_iter()
            .map(|d| self.sweep_direction(d, &scat, &psi_prev.data[d], fixup))
            .collect();
        let mut fixups = 0;
        let mut data = Vec::with_capacity(results.len());
        for (v, n) in results {
            data.push(v);
            fixups += n;
        }
        SweepOutput {
            psi: AngularFlux { data },
            fixups,
        }
    }

    fn sweep_direction(&self, d: usize, scat: &[DVector<f64>], prev: &[f64], fixup: bool) -> (Vec<f64>, usize) {
        let p = &self.problem;
        let mesh = &p.geo.mesh;
        let space = &p.space;
        let nl = space.scalar_basis().dim();
        let om = dir2(p.quad.directions[d]);
        let mut psi = vec![0.0; space.ndofs()];
        let mut done = vec![false; mesh.num_elements()];
        let mut nfix = 0;
        for &e in &self.orders[d].order {
            let mut rhs = &self.src_rhs[d][e] + &scat[e];
            for (lf, &fid) in mesh.element_faces(e).iter().enumerate() {
                let face = mesh.face(fid);
                let (side, sgn) = if face.first == (e, lf) { (0, 1.0) } else { (1, -1.0) };
                let neighbor = if side == 0 { face.second } else { Some(face.first) };
                for (q, fp) in p.geo.faces[fid].points.iter().enumerate() {
                    let on = sgn * fp.normal.dot(&om);
                    if on >= 0.0 {
                        continue;
                    }
                    let up = match neighbor {
                        None => self.inflow[d][fid][q],
                        Some((nb, _)) => {
                            let src = if done[nb] { &psi } else { prev };
                            let tab = &self.face_tab[fid][1 - side][q];
                            space.element_dofs(nb).iter().zip(tab).map(|(&k, &v)| src[k] * v).sum()
                        }
                    };
                    let v = &self.face_tab[fid][side][q];
                    for i in 0..nl {
                        rhs[i] -= on * fp.w * v[i] * up;
                    }
                }
            }
            let mut c: Vec<f64> = (&self.inv[d][e] * rhs).iter().copied().collect();
            if fixup && zero_and_scale(&mut c, &self.node_weights[e]) {
                nfix += 1;
            }
            for (&k, &v) in space.element_dofs(e).iter().zip(&c) {
                psi[k] = v;
            }
            done[e] = true;
        }
        (psi, nfix)
    }

    /// Net outflow `sum_d w_d int_{boundary} (Omega . n) psi_upwind`.
    pub fn net_leakage(&self, psi: &AngularFlux) -> f64 {
        let p = &self.problem;
        let mesh = &p.geo.mesh;
        let mut total = 0.0;
        for d in 0..p.quad.len() {
            let om = dir2(p.quad.directions[d]);
            let w = p.quad.weights[d];
            for (fid, face) in mesh.faces().iter().enumerate() {
                if !face.is_boundary() {
                    continue;
                }
                let e = face.first.0;
                for (q, fp) in p.geo.faces[fid].points.iter().enumerate() {
                    let on = fp.normal.dot(&om);
                    let val = if on < 0.0 {
                        self.inflow[d][fid][q]
                    } else {
                        p.space
                            .element_dofs(e)
                            .iter()
                            .zip(&self.face_tab[fid][0][q])
                            .map(|(&k, &v)| psi.data[d][k] * v)
                            .sum()
                    };
                    total += w * on * fp.w * val;
                }
            }
        }
        total
    }

    /// `int sigma * f` for a dg field `f` and elementwise `sigma`.
    pub fn weighted_integral(&self, sigma: &[f64], f: &[f64]) -> f64 {
        let p = &self.problem;
        (0..p.num_elements())
            .map(|e| {
                let dofs = p.space.element_dofs(e);
                sigma[e]
                    * dofs
                        .iter()
                        .zip(&self.node_weights[e])
                        .map(|(&k, &m)| f[k] * m)
                        .sum::<f64>()
            })
            .sum()
    }

    /// `sum_d w_d int q(x, Omega_d)`
    pub fn total_source(&self) -> f64 {
        let p = &self.problem;
        (0..p.quad.len())
            .map(|d| p.quad.weights[d] * self.src_rhs[d].iter().map(|b| b.sum()).sum::<f64>())
            .sum()
    }
}
