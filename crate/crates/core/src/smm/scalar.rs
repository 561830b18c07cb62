//! Interior penalty and continuous Galerkin SMM discretizations.
//!
//! Bilinear form (the penalty and jump terms are dropped for CG):
//!
//! ```text
//! int_{Gb} E_b0 u phi + int_{G0} kappa [u][phi] - int_{G0} [u]{D grad phi . n}
//!   - int_{G0} {D grad u . n}[phi] + int grad u . D grad phi + int sigma_a u phi
//! ```
//!
//! with `D = 1 / (3 sigma_t)` and `kappa = {(p + 1)^2 / (sigma_t h)}`. The
//! load collects the source moments and the closures `T`, `beta`, `J_in`.

use super::{Balance, Method, MomentSolution, MomentSolverOptions, SmmContext};
use crate::closures::ClosureFields;
use crate::fespace::basis::ScalarEval;
use crate::fespace::FiniteElementSpace;
use crate::linalg::{cg, CsrMatrix, SymGaussSeidel, TripletBuilder};
use crate::{Error, Result, Vec2};
use nalgebra::DMatrix;
use std::sync::Arc;
use std::time::Instant;

pub struct ScalarSystem {
    method: Method,
    pub ctx: Arc<SmmContext>,
    pub space: Arc<FiniteElementSpace>,
    pub matrix: CsrMatrix,
    pre: SymGaussSeidel,
    opts: MomentSolverOptions,
}

/// Basis values and physical gradients of a scalar space at a reference point
/// of element `e`.
fn eval_phys(space: &FiniteElementSpace, e: usize, xi: [f64; 2]) -> ScalarEval {
    space.eval_scalar(e, xi)
}

impl ScalarSystem {
    pub fn new(method: Method, ctx: Arc<SmmContext>, opts: MomentSolverOptions) -> Result<Self> {
        let mesh = ctx.geo.mesh.clone();
        let space = Arc::new(match method {
            Method::Ip => FiniteElementSpace::dg(mesh, ctx.p)?,
            Method::Cg => FiniteElementSpace::cg(mesh, ctx.p)?,
            _ => return Err(Error::Config("scalar system needs ip or cg".into())),
        });
        let matrix = assemble_matrix(&ctx, &space, method == Method::Ip);
        let pre = SymGaussSeidel::new(matrix.clone())?;
        Ok(ScalarSystem {
            method,
            ctx,
            space,
            matrix,
            pre,
            opts,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn rhs(&self, closures: &ClosureFields) -> Vec<f64> {
        assemble_rhs(&self.ctx, &self.space, closures, self.method == Method::Ip)
    }

    pub fn solve(&mut self, closures: &ClosureFields, guess: Option<&[f64]>) -> Result<MomentSolution> {
        let t0 = Instant::now();
        let b = self.rhs(closures);
        let rhs_time = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let mut x = match guess {
            Some(g) => g[..b.len()].to_vec(),
            None => vec![0.0; b.len()],
        };
        let stats = cg(&self.matrix, &b, &mut x, &self.pre, &self.opts.krylov)?;
        Ok(MomentSolution {
            varphi: x,
            current: None,
            trace: None,
            iterations: stats.iterations,
            relative_residual: stats.relative_residual,
            rhs_time,
            solve_time: t1.elapsed().as_secs_f64(),
        })
    }

    pub fn balance(&self, sol: &MomentSolution, closures: &ClosureFields) -> Balance {
        let ctx = &self.ctx;
        let geo = &ctx.geo;
        let mesh = &geo.mesh;
        let mut absorption = 0.0;
        let mut source = 0.0;
        for e in 0..mesh.num_elements() {
            let dofs = self.space.element_dofs(e);
            for qp in &geo.volume[e] {
                let v = self.space.scalar_basis().eval(qp.xi).values;
                let u: f64 = dofs.iter().zip(&v).map(|(&k, &b)| sol.varphi[k] * b).sum();
                absorption += qp.w * ctx.sigma_a[e] * u;
                source += qp.w * (ctx.sources)(e, qp.x).0;
            }
        }
        let mut leakage = 0.0;
        for (fid, face) in mesh.faces().iter().enumerate() {
            if !face.is_boundary() {
                continue;
            }
            let e = face.first.0;
            let dofs = self.space.element_dofs(e);
            for (q, fp) in geo.faces[fid].points.iter().enumerate() {
                let v = self.space.scalar_basis().eval(fp.xi1).values;
                let u: f64 = dofs.iter().zip(&v).map(|(&k, &b)| sol.varphi[k] * b).sum();
                leakage += fp.w * (closures.eb0[fid][q] * u + 2.0 * closures.j_in[fid][q] + closures.beta[fid][q]);
            }
        }
        Balance {
            leakage,
            absorption,
            source,
        }
    }
}

fn scatter(b: &mut TripletBuilder, rows: &[usize], cols: &[usize], m: &DMatrix<f64>) {
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            let v = m[(i, j)];
            if v != 0.0 {
                b.add(r, c, v);
            }
        }
    }
}

/// Stiffness matrix of the IP (`penalty = true`) or CG form.
pub fn assemble_matrix(ctx: &SmmContext, space: &FiniteElementSpace, penalty: bool) -> CsrMatrix {
    let geo = &ctx.geo;
    let mesh = &geo.mesh;
    let basis = space.scalar_basis();
    let nl = basis.dim();
    let n = space.ndofs();
    let mut tb = TripletBuilder::new(n, n);
    let tab: Vec<ScalarEval> = geo.rule2d.points.iter().map(|&xi| basis.eval(xi)).collect();
    for e in 0..mesh.num_elements() {
        let d = 1.0 / (3.0 * ctx.sigma_t[e]);
        let sa = ctx.sigma_a[e];
        let mut k = DMatrix::zeros(nl, nl);
        for (qi, qp) in geo.volume[e].iter().enumerate() {
            let v = &tab[qi].values;
            let g: Vec<Vec2> = tab[qi].grads.iter().map(|g| qp.inv_t * g).collect();
            for i in 0..nl {
                for j in 0..nl {
                    k[(i, j)] += qp.w * (d * g[i].dot(&g[j]) + sa * v[i] * v[j]);
                }
            }
        }
        let dofs = space.element_dofs(e);
        scatter(&mut tb, dofs, dofs, &k);
    }
    let pp = ((ctx.p + 1) * (ctx.p + 1)) as f64;
    for (fid, face) in mesh.faces().iter().enumerate() {
        let (e1, _) = face.first;
        let pts = &geo.faces[fid].points;
        match face.second {
            None => {
                let mut k = DMatrix::zeros(nl, nl);
                for fp in pts {
                    let v = basis.eval(fp.xi1).values;
                    let eb0 = ctx.quad.eb0(fp.normal);
                    for i in 0..nl {
                        for j in 0..nl {
                            k[(i, j)] += fp.w * eb0 * v[i] * v[j];
                        }
                    }
                }
                let dofs = space.element_dofs(e1);
                scatter(&mut tb, dofs, dofs, &k);
            }
            Some((e2, _)) if penalty => {
                let kappa = ctx.penalty_scale
                    * 0.5
                    * (pp / (ctx.sigma_t[e1] * mesh.h(e1)) + pp / (ctx.sigma_t[e2] * mesh.h(e2)));
                let (d1, d2) = (1.0 / (3.0 * ctx.sigma_t[e1]), 1.0 / (3.0 * ctx.sigma_t[e2]));
                let mut k = DMatrix::zeros(2 * nl, 2 * nl);
                for fp in pts {
                    let s1 = eval_phys(space, e1, fp.xi1);
                    let s2 = eval_phys(space, e2, fp.xi2.expect("interior face"));
                    let mut jump = vec![0.0; 2 * nl];
                    let mut flux = vec![0.0; 2 * nl];
                    for i in 0..nl {
                        jump[i] = s1.values[i];
                        jump[nl + i] = -s2.values[i];
                        flux[i] = 0.5 * d1 * s1.grads[i].dot(&fp.normal);
                        flux[nl + i] = 0.5 * d2 * s2.grads[i].dot(&fp.normal);
                    }
                    for a in 0..2 * nl {
                        for b in 0..2 * nl {
                            k[(a, b)] += fp.w * (kappa * jump[a] * jump[b] - jump[a] * flux[b] - flux[a] * jump[b]);
                        }
                    }
                }
                let mut dofs = space.element_dofs(e1).to_vec();
                dofs.extend_from_slice(space.element_dofs(e2));
                scatter(&mut tb, &dofs, &dofs, &k);
            }
            Some(_) => {}
        }
    }
    tb.build()
}

/// Load vector of the IP (`penalty = true`) or CG form.
pub fn assemble_rhs(ctx: &SmmContext, space: &FiniteElementSpace, closures: &ClosureFields, penalty: bool) -> Vec<f64> {
    let geo = &ctx.geo;
    let mesh = &geo.mesh;
    let basis = space.scalar_basis();
    let tbasis = ctx.tspace.scalar_basis();
    let nl = basis.dim();
    let mut rhs = vec![0.0; space.ndofs()];
    let tab: Vec<ScalarEval> = geo.rule2d.points.iter().map(|&xi| basis.eval(xi)).collect();
    let ttab: Vec<ScalarEval> = geo.rule2d.points.iter().map(|&xi| tbasis.eval(xi)).collect();
    for e in 0..mesh.num_elements() {
        let st = ctx.sigma_t[e];
        let dofs = space.element_dofs(e);
        let tdofs = ctx.tspace.element_dofs(e);
        for (qi, qp) in geo.volume[e].iter().enumerate() {
            let tg: Vec<Vec2> = ttab[qi].grads.iter().map(|g| qp.inv_t * g).collect();
            let (_, div_t) = closures.t_and_div(tdofs, &ttab[qi].values, &tg);
            let (q0, q1) = (ctx.sources)(e, qp.x);
            let vec_part = (q1 - div_t) / st;
            for i in 0..nl {
                let g = qp.inv_t * tab[qi].grads[i];
                rhs[dofs[i]] += qp.w * (tab[qi].values[i] * q0 + g.dot(&vec_part));
            }
        }
    }
    for (fid, face) in mesh.faces().iter().enumerate() {
        let (e1, _) = face.first;
        let pts = &geo.faces[fid].points;
        match face.second {
            None => {
                let dofs = space.element_dofs(e1);
                for (q, fp) in pts.iter().enumerate() {
                    let v = basis.eval(fp.xi1).values;
                    let g = 2.0 * closures.j_in[fid][q] + closures.beta[fid][q];
                    for i in 0..nl {
                        rhs[dofs[i]] -= fp.w * v[i] * g;
                    }
                }
            }
            Some((e2, _)) => {
                let xi2 = |fp: &crate::fespace::FacePoint| fp.xi2.expect("interior face");
                let (st1, st2) = (ctx.sigma_t[e1], ctx.sigma_t[e2]);
                let dofs1 = space.element_dofs(e1);
                let dofs2 = space.element_dofs(e2);
                for fp in pts {
                    let n = fp.normal;
                    let t1e = ctx.tspace.eval_scalar(e1, fp.xi1);
                    let t2e = ctx.tspace.eval_scalar(e2, xi2(fp));
                    let (t1, dt1) = closures.t_and_div(ctx.tspace.element_dofs(e1), &t1e.values, &t1e.grads);
                    let (t2, dt2) = closures.t_and_div(ctx.tspace.element_dofs(e2), &t2e.values, &t2e.grads);
                    let jump_tn = t1 * n - t2 * n;
                    let s1 = eval_phys(space, e1, fp.xi1);
                    let s2 = eval_phys(space, e2, xi2(fp));
                    for i in 0..nl {
                        rhs[dofs1[i]] += fp.w * 0.5 * s1.grads[i].dot(&jump_tn) / st1;
                        rhs[dofs2[i]] += fp.w * 0.5 * s2.grads[i].dot(&jump_tn) / st2;
                    }
                    if penalty {
                        let q1a = (ctx.sources)(e1, fp.x).1;
                        let q1b = (ctx.sources)(e2, fp.x).1;
                        let avg_q = 0.5 * (q1a.dot(&n) / st1 + q1b.dot(&n) / st2);
                        let avg_dt = 0.5 * (dt1.dot(&n) / st1 + dt2.dot(&n) / st2);
                        let c = avg_dt - avg_q;
                        for i in 0..nl {
                            rhs[dofs1[i]] += fp.w * s1.values[i] * c;
                            rhs[dofs2[i]] -= fp.w * s2.values[i] * c;
                        }
                    }
                }
            }
        }
    }
    rhs
}
