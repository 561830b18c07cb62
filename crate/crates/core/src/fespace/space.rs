//! Finite element spaces and grid functions.
//!
//! - `Dg`: discontinuous `Y_p`, tensor Lagrange on Gauss-Legendre nodes
//! - `Cg`: continuous `V_p`, tensor Lagrange on Gauss-Lobatto nodes
//! - `Rt`: `H(div)`-conforming Raviart-Thomas `RT_p` with Piola mapping
//! - `BrokenRt`: elementwise `RT_p` without normal continuity
//! - `Trace`: degree `p` Gauss-Legendre nodal functions on interior faces

use super::basis::{Lagrange1d, RtBasis, RtEval, ScalarBasis, ScalarEval};
use super::geometry::Geometry;
use crate::mesh::{Frame, Mesh};
use crate::{Error, Mat2, Result, Vec2};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Dg,
    Cg,
    Rt,
    BrokenRt,
    Trace,
}

impl SpaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceKind::Dg => "dg",
            SpaceKind::Cg => "cg",
            SpaceKind::Rt => "rt",
            SpaceKind::BrokenRt => "broken-rt",
            SpaceKind::Trace => "trace",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiniteElementSpace {
    kind: SpaceKind,
    p: usize,
    mesh: Arc<Mesh>,
    scalar: Option<ScalarBasis>,
    rt: Option<RtBasis>,
    elem_dofs: Vec<Vec<usize>>,
    elem_signs: Vec<Vec<f64>>,
    face_dofs: Vec<Option<Vec<usize>>>,
    ndofs: usize,
}

/// Physical values of every local RT function at one point.
#[derive(Debug, Clone)]
pub struct PiolaEval {
    pub values: Vec<Vec2>,
    /// `grads[k][(a, b)] = d v_a / d x_b`.
    pub grads: Vec<Mat2>,
    pub divs: Vec<f64>,
}

/// Applies the contravariant Piola map to a reference RT evaluation.
///
/// `hess[l]` is the derivative of the Jacobian with respect to `xi_l`.
pub fn piola(ref_eval: &RtEval, fr: &Frame, hess: &[Mat2; 2]) -> PiolaEval {
    let f = fr.jac;
    let det = fr.det;
    let finv = fr.inv_t.transpose();
    let dadj = |h: &Mat2| Mat2::new(h[(1, 1)], -h[(0, 1)], -h[(1, 0)], h[(0, 0)]);
    let da = [dadj(&hess[0]), dadj(&hess[1])];
    let n = ref_eval.values.len();
    let mut values = Vec::with_capacity(n);
    let mut grads = Vec::with_capacity(n);
    let mut divs = Vec::with_capacity(n);
    for k in 0..n {
        let vh = ref_eval.values[k];
        let fv = f * vh;
        let mut bhat = Mat2::zeros();
        for l in 0..2 {
            let col = da[l] * fv / det;
            bhat[(0, l)] = col.x;
            bhat[(1, l)] = col.y;
        }
        values.push(fv / det);
        grads.push(f * (ref_eval.grads[k] - bhat) * finv / det);
        divs.push(ref_eval.divs[k] / det);
    }
    PiolaEval { values, grads, divs }
}

/// The `B` correction tensor of the Piola gradient for a reference field `vh`.
pub fn piola_bhat(fr: &Frame, hess: &[Mat2; 2], vh: Vec2) -> Mat2 {
    let dadj = |h: &Mat2| Mat2::new(h[(1, 1)], -h[(0, 1)], -h[(1, 0)], h[(0, 0)]);
    let fv = fr.jac * vh;
    let mut bhat = Mat2::zeros();
    for l in 0..2 {
        let col = dadj(&hess[l]) * fv / fr.det;
        bhat[(0, l)] = col.x;
        bhat[(1, l)] = col.y;
    }
    bhat
}

impl FiniteElementSpace {
    /// Discontinuous scalar space `Y_p`.
    pub fn dg(mesh: Arc<Mesh>, p: usize) -> Result<Self> {
        let basis = ScalarBasis::new(p, Lagrange1d::open(p + 1)?);
        let nl = basis.dim();
        let ne = mesh.num_elements();
        let elem_dofs = (0..ne).map(|e| (e * nl..(e + 1) * nl).collect()).collect();
        Ok(FiniteElementSpace {
            kind: SpaceKind::Dg,
            p,
            elem_signs: vec![vec![1.0; nl]; ne],
            mesh,
            scalar: Some(basis),
            rt: None,
            elem_dofs,
            face_dofs: Vec::new(),
            ndofs: ne * nl,
        })
    }

    /// Continuous scalar space `V_p`, `p >= 1`.
    pub fn cg(mesh: Arc<Mesh>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::UnsupportedDegree {
                what: "continuous space",
                degree: 0,
            });
        }
        let basis = ScalarBasis::new(p, Lagrange1d::closed(p + 1)?);
        let n = p + 1;
        let ne = mesh.num_elements();
        let mut vertex: HashMap<usize, usize> = HashMap::new();
        let mut next = 0usize;
        for e in 0..ne {
            for c in 0..4 {
                vertex.entry(mesh.corner(e, c)).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
            }
        }
        let edge_base = next;
        let per_edge = p - 1;
        let interior_base = edge_base + mesh.num_faces() * per_edge;
        let per_interior = per_edge * per_edge;
        let mut elem_dofs = Vec::with_capacity(ne);
        for e in 0..ne {
            let faces = mesh.element_faces(e);
            let mut dofs = vec![0; n * n];
            for j in 0..n {
                for i in 0..n {
                    let k = i + n * j;
                    let corner = match (i, j) {
                        (0, 0) => Some(0),
                        (a, 0) if a == p => Some(1),
                        (a, b) if a == p && b == p => Some(2),
                        (0, b) if b == p => Some(3),
                        _ => None,
                    };
                    dofs[k] = if let Some(c) = corner {
                        vertex[&mesh.corner(e, c)]
                    } else if j == 0 || i == p || j == p || i == 0 {
                        let (lf, s) = if j == 0 {
                            (0, i)
                        } else if i == p {
                            (1, j)
                        } else if j == p {
                            (2, i)
                        } else {
                            (3, j)
                        };
                        let fid = faces[lf];
                        let face = mesh.face(fid);
                        let s1 = if face.first == (e, lf) || !face.reversed {
                            s
                        } else {
                            p - s
                        };
                        edge_base + fid * per_edge + (s1 - 1)
                    } else {
                        interior_base + e * per_interior + (i - 1) + per_edge * (j - 1)
                    };
                }
            }
            elem_dofs.push(dofs);
        }
        Ok(FiniteElementSpace {
            kind: SpaceKind::Cg,
            p,
            elem_signs: vec![vec![1.0; n * n]; ne],
            mesh,
            scalar: Some(basis),
            rt: None,
            elem_dofs,
            face_dofs: Vec::new(),
            ndofs: interior_base + ne * per_interior,
        })
    }

    /// Raviart-Thomas space `RT_p` with one shared set of normal unknowns per
    /// face, signed by the first-to-second face normal.
    pub fn rt(mesh: Arc<Mesh>, p: usize) -> Result<Self> {
        let basis = RtBasis::new(p)?;
        let nf = p + 1;
        let ne = mesh.num_elements();
        let interior_base = mesh.num_faces() * nf;
        let interior_local: Vec<usize> = (0..basis.dim()).filter(|&k| basis.is_interior(k)).collect();
        let mut elem_dofs = Vec::with_capacity(ne);
        let mut elem_signs = Vec::with_capacity(ne);
        for e in 0..ne {
            let mut dofs = vec![usize::MAX; basis.dim()];
            let mut signs = vec![1.0; basis.dim()];
            for (lf, &fid) in mesh.element_faces(e).iter().enumerate() {
                let face = mesh.face(fid);
                let (ldofs, rho) = basis.face_dofs(lf);
                let first = face.first == (e, lf);
                for (k2, &ld) in ldofs.iter().enumerate() {
                    let k = if first || !face.reversed { k2 } else { p - k2 };
                    dofs[ld] = fid * nf + k;
                    signs[ld] = if first { rho } else { -rho };
                }
            }
            for (a, &ld) in interior_local.iter().enumerate() {
                dofs[ld] = interior_base + e * interior_local.len() + a;
            }
            elem_dofs.push(dofs);
            elem_signs.push(signs);
        }
        Ok(FiniteElementSpace {
            kind: SpaceKind::Rt,
            p,
            mesh,
            scalar: None,
            rt: Some(basis),
            elem_dofs,
            elem_signs,
            face_dofs: Vec::new(),
            ndofs: interior_base + ne * interior_local.len(),
        })
    }

    /// Elementwise RT space: every local function is its own unknown.
    pub fn broken_rt(mesh: Arc<Mesh>, p: usize) -> Result<Self> {
        let basis = RtBasis::new(p)?;
        let nl = basis.dim();
        let ne = mesh.num_elements();
        Ok(FiniteElementSpace {
            kind: SpaceKind::BrokenRt,
            p,
            elem_dofs: (0..ne).map(|e| (e * nl..(e + 1) * nl).collect()).collect(),
            elem_signs: vec![vec![1.0; nl]; ne],
            mesh,
            scalar: None,
            rt: Some(basis),
            face_dofs: Vec::new(),
            ndofs: ne * nl,
        })
    }

    /// Trace space on interior faces, nodal at Gauss-Legendre points in the
    /// first side's face parameter.
    pub fn trace(mesh: Arc<Mesh>, p: usize) -> Result<Self> {
        let mut face_dofs = Vec::with_capacity(mesh.num_faces());
        let mut next = 0;
        for f in mesh.faces() {
            if f.is_boundary() {
                face_dofs.push(None);
            } else {
                face_dofs.push(Some((next..next + p + 1).collect()));
                next += p + 1;
            }
        }
        Ok(FiniteElementSpace {
            kind: SpaceKind::Trace,
            p,
            scalar: Some(ScalarBasis::new(p, Lagrange1d::open(p + 1)?)),
            mesh,
            rt: None,
            elem_dofs: Vec::new(),
            elem_signs: Vec::new(),
            face_dofs,
            ndofs: next,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn scalar_basis(&self) -> &ScalarBasis {
        self.scalar.as_ref().expect("scalar space")
    }

    pub fn rt_basis(&self) -> &RtBasis {
        self.rt.as_ref().expect("vector space")
    }

    pub fn is_vector(&self) -> bool {
        self.rt.is_some()
    }

    pub fn local_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Rt | SpaceKind::BrokenRt => self.rt_basis().dim(),
            SpaceKind::Trace => self.p + 1,
            _ => self.scalar_basis().dim(),
        }
    }

    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.elem_dofs[e]
    }

    pub fn element_signs(&self, e: usize) -> &[f64] {
        &self.elem_signs[e]
    }

    pub fn face_dofs(&self, f: usize) -> Option<&[usize]> {
        self.face_dofs.get(f).and_then(|d| d.as_deref())
    }

    /// Scalar basis values and physical gradients at `xi` of element `e`.
    pub fn eval_scalar(&self, e: usize, xi: [f64; 2]) -> ScalarEval {
        let mut ev = self.scalar_basis().eval(xi);
        let fr = self.mesh.frame(e, xi);
        for g in &mut ev.grads {
            *g = fr.inv_t * *g;
        }
        ev
    }

    /// Physical RT basis at `xi` of element `e`, signs not applied.
    pub fn eval_rt(&self, e: usize, xi: [f64; 2]) -> PiolaEval {
        let fr = self.mesh.frame(e, xi);
        let hess = self.mesh.map_hessian(e, xi);
        piola(&self.rt_basis().eval(xi), &fr, &hess)
    }

    /// Local coefficients of `data` on element `e`, signs applied.
    pub fn gather(&self, e: usize, data: &[f64]) -> Vec<f64> {
        self.elem_dofs[e]
            .iter()
            .zip(&self.elem_signs[e])
            .map(|(&d, &s)| s * data[d])
            .collect()
    }

    /// Mass matrix of element `e` for a scalar space under `geo`'s rule.
    pub fn local_scalar_mass(&self, geo: &Geometry, e: usize) -> DMatrix<f64> {
        let b = self.scalar_basis();
        let n = b.dim();
        let mut m = DMatrix::zeros(n, n);
        for qp in &geo.volume[e] {
            let v = b.eval(qp.xi).values;
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += qp.w * v[i] * v[j];
                }
            }
        }
        m
    }

    /// L2 projection of `f` into a discontinuous scalar space.
    pub fn project_dg(&self, geo: &Geometry, f: impl Fn(Vec2) -> f64) -> Result<Vec<f64>> {
        if self.kind != SpaceKind::Dg {
            return Err(Error::SpaceMismatch(format!(
                "L2 projection needs a dg space, got {}",
                self.kind.name()
            )));
        }
        let b = self.scalar_basis();
        let n = b.dim();
        let mut out = vec![0.0; self.ndofs];
        for e in 0..self.mesh.num_elements() {
            let m = self.local_scalar_mass(geo, e);
            let mut rhs = DVector::zeros(n);
            for qp in &geo.volume[e] {
                let v = b.eval(qp.xi).values;
                let fx = f(qp.x);
                for i in 0..n {
                    rhs[i] += qp.w * v[i] * fx;
                }
            }
            let c = m
                .cholesky()
                .ok_or_else(|| Error::NonFinite("element mass matrix".into()))?
                .solve(&rhs);
            for (i, &d) in self.elem_dofs[e].iter().enumerate() {
                out[d] = c[i];
            }
        }
        Ok(out)
    }

    /// Nodal interpolation of `f` into a scalar space.
    pub fn interpolate(&self, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
        let b = self.scalar_basis();
        let mut out = vec![0.0; self.ndofs];
        for e in 0..self.mesh.num_elements() {
            for (k, &d) in self.elem_dofs[e].iter().enumerate() {
                out[d] = f(self.mesh.map_point(e, b.node(k)));
            }
        }
        out
    }

    /// Value of a scalar field at `xi` of element `e`.
    pub fn value_at(&self, data: &[f64], e: usize, xi: [f64; 2]) -> f64 {
        let v = self.scalar_basis().eval(xi).values;
        self.elem_dofs[e].iter().zip(&v).map(|(&d, &b)| data[d] * b).sum()
    }

    /// Value of an RT field at `xi` of element `e`.
    pub fn vector_at(&self, data: &[f64], e: usize, xi: [f64; 2]) -> Vec2 {
        let ev = self.eval_rt(e, xi);
        let c = self.gather(e, data);
        ev.values.iter().zip(&c).map(|(v, &a)| v * a).sum()
    }

    /// `||u_h - f||_{L2}` for a scalar field.
    pub fn l2_error(&self, geo: &Geometry, data: &[f64], f: impl Fn(Vec2) -> f64) -> f64 {
        let b = self.scalar_basis();
        let mut s = 0.0;
        for e in 0..self.mesh.num_elements() {
            let c: Vec<f64> = self.elem_dofs[e].iter().map(|&d| data[d]).collect();
            for qp in &geo.volume[e] {
                let v = b.eval(qp.xi).values;
                let uh: f64 = v.iter().zip(&c).map(|(a, b)| a * b).sum();
                s += qp.w * (uh - f(qp.x)).powi(2);
            }
        }
        s.sqrt()
    }

    /// `||v_h - f||_{L2}` for an RT field.
    pub fn l2_error_vector(&self, geo: &Geometry, data: &[f64], f: impl Fn(Vec2) -> Vec2) -> f64 {
        let b = self.rt_basis();
        let mut s = 0.0;
        for e in 0..self.mesh.num_elements() {
            let c = self.gather(e, data);
            for qp in &geo.volume[e] {
                let fr = Frame {
                    x: qp.x,
                    jac: qp.jac,
                    det: qp.det,
                    inv_t: qp.inv_t,
                };
                let rv = b.eval(qp.xi);
                let vh: Vec2 = rv.values.iter().zip(&c).map(|(v, &a)| fr.jac * v * a).sum::<Vec2>() / fr.det;
                s += qp.w * (vh - f(qp.x)).norm_squared();
            }
        }
        s.sqrt()
    }

    /// `(||a - b||, ||b||)` in L2 for fields of two spaces on the same mesh,
    /// both scalar or both vector.
    pub fn l2_distance(&self, geo: &Geometry, a: &[f64], other: &FiniteElementSpace, b: &[f64]) -> (f64, f64) {
        let (mut d, mut n) = (0.0, 0.0);
        for e in 0..self.mesh.num_elements() {
            for qp in &geo.volume[e] {
                if self.is_vector() {
                    let u = self.vector_at(a, e, qp.xi);
                    let v = other.vector_at(b, e, qp.xi);
                    d += qp.w * (u - v).norm_squared();
                    n += qp.w * v.norm_squared();
                } else {
                    let u = self.value_at(a, e, qp.xi);
                    let v = other.value_at(b, e, qp.xi);
                    d += qp.w * (u - v).powi(2);
                    n += qp.w * v * v;
                }
            }
        }
        (d.sqrt(), n.sqrt())
    }
}

/// Coefficient vector tied to a space.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub space: Arc<FiniteElementSpace>,
    pub data: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(space: Arc<FiniteElementSpace>) -> Self {
        let n = space.ndofs();
        GridFunction {
            space,
            data: vec![0.0; n],
        }
    }

    pub fn from_data(space: Arc<FiniteElementSpace>, data: Vec<f64>) -> Result<Self> {
        if data.len() != space.ndofs() {
            return Err(Error::DimensionMismatch {
                expected: space.ndofs(),
                found: data.len(),
            });
        }
        Ok(GridFunction { space, data })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "smm-gridfunction 1\nspace {} {}\nndofs {}",
            self.space.kind().name(),
            self.space.degree(),
            self.data.len()
        );
        for v in &self.data {
            let _ = writeln!(s, "{v:.17e}");
        }
        s
    }

    /// Reads values written by [`GridFunction::to_text`], checking that the
    /// header matches `space`.
    pub fn from_text(space: Arc<FiniteElementSpace>, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = || {
            lines.next().ok_or(Error::Parse {
                line: 0,
                message: "unexpected end of input".into(),
            })
        };
        let (ln, h) = next()?;
        if h != "smm-gridfunction 1" {
            return Err(Error::Parse {
                line: ln,
                message: format!("bad header '{h}'"),
            });
        }
        let (_, sp) = next()?;
        let expect = format!("space {} {}", space.kind().name(), space.degree());
        if sp != expect {
            return Err(Error::SpaceMismatch(format!("file has '{sp}', expected '{expect}'")));
        }
        let (ln, nd) = next()?;
        let n: usize = nd
            .strip_prefix("ndofs ")
            .and_then(|v| v.parse().ok())
            .ok_or(Error::Parse {
                line: ln,
                message: "bad ndofs line".into(),
            })?;
        if n != space.ndofs() {
            return Err(Error::DimensionMismatch {
                expected: space.ndofs(),
                found: n,
            });
        }
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, l) = next()?;
            data.push(l.parse::<f64>().map_err(|e| Error::Parse {
                line: ln,
                message: e.to_string(),
            })?);
        }
        Ok(GridFunction { space, data })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(space: Arc<FiniteElementSpace>, path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(space, &std::fs::read_to_string(path)?)
    }
}
