//! Mixed Raviart-Thomas SMM discretization.
//!
//! With `phi` in `Y_p` and `J` in `RT_p` the system is
//!
//! ```text
//! [ M_t  G  ] [J  ]   [g]
//! [ D    M_a] [phi] = [f]
//! ```
//!
//! where `M_t` carries the Marshak boundary term, `D` is the divergence
//! coupling and `G = -D^T / 3`. It is solved with MINRES on the symmetric
//! form obtained by scaling the first block row by `-3`, preconditioned by
//! `diag(3 M_t, S)` with `S = M_a + D (3 lump(M_t))^{-1} D^T`.

use super::{Balance, MomentSolution, MomentSolverOptions, SchurSolver, SmmContext};
use crate::closures::ClosureFields;
use crate::fespace::basis::ScalarEval;
use crate::fespace::space::piola;
use crate::fespace::{FiniteElementSpace, RtBasis};
use crate::linalg::{
    bicgstab, lump, minres, BlockDiagonal, BlockOperator, BlockTriangular, CsrMatrix, InnerCg, Jacobi, Preconditioner,
    SparseLdl, SymGaussSeidel, TripletBuilder,
};
use crate::mesh::Mesh;
use crate::{Error, Mat2, Result, Vec2};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtSolver {
    Minres,
    Bicgstab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtPreconditioner {
    BlockDiagonal,
    BlockTriangular,
}

/// Physical RT basis values (without global signs) at `xi` of element `e`.
pub fn rt_values(mesh: &Mesh, basis: &RtBasis, e: usize, xi: [f64; 2]) -> Vec<Vec2> {
    let fr = mesh.frame(e, xi);
    basis.eval(xi).values.iter().map(|v| fr.jac * v / fr.det).collect()
}

/// Elementwise blocks of the mixed system.
#[derive(Debug, Clone)]
pub struct RtLocal {
    pub mt: DMatrix<f64>,
    /// `d[(k, i)] = int u_k div v_i`
    pub d: DMatrix<f64>,
    pub ma: DMatrix<f64>,
}

pub fn local_matrices(ctx: &SmmContext, rb: &RtBasis, e: usize) -> RtLocal {
    let geo = &ctx.geo;
    let mesh = &geo.mesh;
    let sb = ctx.tspace.scalar_basis();
    let (nr, ns) = (rb.dim(), sb.dim());
    let mut mt = DMatrix::zeros(nr, nr);
    let mut d = DMatrix::zeros(ns, nr);
    let mut ma = DMatrix::zeros(ns, ns);
    let (st, sa) = (ctx.sigma_t[e], ctx.sigma_a[e]);
    for qp in &geo.volume[e] {
        let pe = piola(&rb.eval(qp.xi), &qp.frame(), &qp.hess);
        let u = sb.eval(qp.xi).values;
        for i in 0..nr {
            for j in 0..nr {
                mt[(i, j)] += qp.w * st * pe.values[i].dot(&pe.values[j]);
            }
        }
        for k in 0..ns {
            for i in 0..nr {
                d[(k, i)] += qp.w * u[k] * pe.divs[i];
            }
            for l in 0..ns {
                ma[(k, l)] += qp.w * sa * u[k] * u[l];
            }
        }
    }
    for (lf, &fid) in mesh.element_faces(e).iter().enumerate() {
        let face = mesh.face(fid);
        if !face.is_boundary() {
            continue;
        }
        debug_assert_eq!(face.first, (e, lf));
        for fp in &geo.faces[fid].points {
            let v = rt_values(mesh, rb, e, fp.xi1);
            let c = 1.0 / (3.0 * ctx.quad.eb0(fp.normal));
            let vn: Vec<f64> = v.iter().map(|a| a.dot(&fp.normal)).collect();
            for i in 0..nr {
                for j in 0..nr {
                    mt[(i, j)] += fp.w * c * vn[i] * vn[j];
                }
            }
        }
    }
    RtLocal { mt, d, ma }
}

/// Elementwise loads `(g, f)` of the first and zeroth moment equations.
pub fn local_rhs(ctx: &SmmContext, rb: &RtBasis, closures: &ClosureFields) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let geo = &ctx.geo;
    let mesh = &geo.mesh;
    let sb = ctx.tspace.scalar_basis();
    let (nr, ns) = (rb.dim(), sb.dim());
    let ne = mesh.num_elements();
    let mut g = vec![DVector::zeros(nr); ne];
    let mut f = vec![DVector::zeros(ns); ne];
    let ttab: Vec<ScalarEval> = geo.rule2d.points.iter().map(|&xi| sb.eval(xi)).collect();
    for e in 0..ne {
        let tdofs = ctx.tspace.element_dofs(e);
        for (qi, qp) in geo.volume[e].iter().enumerate() {
            let pe = piola(&rb.eval(qp.xi), &qp.frame(), &qp.hess);
            let (t, _) = closures.t_and_div(tdofs, &ttab[qi].values, &ttab[qi].grads);
            let (q0, q1) = (ctx.sources)(e, qp.x);
            for i in 0..nr {
                g[e][i] += qp.w * (pe.values[i].dot(&q1) + pe.grads[i].component_mul(&t).sum());
            }
            for k in 0..ns {
                f[e][k] += qp.w * ttab[qi].values[k] * q0;
            }
        }
    }
    let t_at = |e: usize, xi: [f64; 2]| -> Mat2 {
        let v = sb.eval(xi).values;
        let dofs = ctx.tspace.element_dofs(e);
        let mut t = [0.0; 3];
        for (i, &k) in dofs.iter().enumerate() {
            for c in 0..3 {
                t[c] += closures.t[c][k] * v[i];
            }
        }
        Mat2::new(t[0], t[1], t[1], t[2])
    };
    for (fid, face) in mesh.faces().iter().enumerate() {
        let (e1, _) = face.first;
        for (q, fp) in geo.faces[fid].points.iter().enumerate() {
            let n = fp.normal;
            match face.second {
                None => {
                    let v = rt_values(mesh, rb, e1, fp.xi1);
                    let tn = t_at(e1, fp.xi1) * n;
                    let c = (2.0 * closures.j_in[fid][q] + closures.beta[fid][q]) / (3.0 * closures.eb0[fid][q]);
                    for i in 0..nr {
                        g[e1][i] += fp.w * (-v[i].dot(&tn) + c * v[i].dot(&n));
                    }
                }
                Some((e2, _)) => {
                    let xi2 = fp.xi2.expect("interior face");
                    let avg_tn = 0.5 * (t_at(e1, fp.xi1) + t_at(e2, xi2)) * n;
                    let v1 = rt_values(mesh, rb, e1, fp.xi1);
                    let v2 = rt_values(mesh, rb, e2, xi2);
                    for i in 0..nr {
                        g[e1][i] -= fp.w * v1[i].dot(&avg_tn);
                        g[e2][i] += fp.w * v2[i].dot(&avg_tn);
                    }
                }
            }
        }
    }
    (g, f)
}

pub struct RtSystem {
    pub ctx: Arc<SmmContext>,
    pub sspace: Arc<FiniteElementSpace>,
    pub vspace: Arc<FiniteElementSpace>,
    pub mt: CsrMatrix,
    pub d: CsrMatrix,
    pub g: CsrMatrix,
    pub ma: CsrMatrix,
    /// `[[-3 M_t, D^T], [D, M_a]]`
    pub scaled: BlockOperator,
    /// `[[M_t, G], [D, M_a]]`
    pub unscaled: BlockOperator,
    pre: Box<dyn Preconditioner>,
    opts: MomentSolverOptions,
}

impl RtSystem {
    pub fn new(ctx: Arc<SmmContext>, opts: MomentSolverOptions) -> Result<Self> {
        if opts.rt_solver == RtSolver::Minres && opts.rt_preconditioner == RtPreconditioner::BlockTriangular {
            return Err(Error::Config(
                "the block triangular preconditioner is not symmetric and cannot be used with MINRES".into(),
            ));
        }
        let mesh = ctx.geo.mesh.clone();
        let sspace = ctx.tspace.clone();
        let vspace = Arc::new(FiniteElementSpace::rt(mesh.clone(), ctx.p)?);
        let rb = vspace.rt_basis().clone();
        let (nv, ns) = (vspace.ndofs(), sspace.ndofs());
        let mut tmt = TripletBuilder::new(nv, nv);
        let mut td = TripletBuilder::new(ns, nv);
        let mut tma = TripletBuilder::new(ns, ns);
        for e in 0..mesh.num_elements() {
            let loc = local_matrices(&ctx, &rb, e);
            let vd = vspace.element_dofs(e);
            let vs = vspace.element_signs(e);
            let sd = sspace.element_dofs(e);
            for i in 0..vd.len() {
                for j in 0..vd.len() {
                    let v = vs[i] * vs[j] * loc.mt[(i, j)];
                    if v != 0.0 {
                        tmt.add(vd[i], vd[j], v);
                    }
                }
            }
            for k in 0..sd.len() {
                for i in 0..vd.len() {
                    let v = vs[i] * loc.d[(k, i)];
                    if v != 0.0 {
                        td.add(sd[k], vd[i], v);
                    }
                }
                for l in 0..sd.len() {
                    let v = loc.ma[(k, l)];
                    if v != 0.0 {
                        tma.add(sd[k], sd[l], v);
                    }
                }
            }
        }
        let mt = tmt.build();
        let d = td.build();
        let ma = tma.build();
        let g = d.transpose().scale(-1.0 / 3.0);
        let scaled = BlockOperator {
            a: mt.scale(-3.0),
            b: d.transpose(),
            c: d.clone(),
            d: ma.clone(),
        };
        let unscaled = BlockOperator {
            a: mt.clone(),
            b: g.clone(),
            c: d.clone(),
            d: ma.clone(),
        };
        let mut sys = RtSystem {
            ctx,
            sspace,
            vspace,
            mt,
            d,
            g,
            ma,
            scaled,
            unscaled,
            pre: Box::new(crate::linalg::Identity),
            opts,
        };
        sys.pre = sys.build_preconditioner(opts.rt_preconditioner)?;
        Ok(sys)
    }

    /// Approximate Schur complement `M_a + D (3 lump(M_t))^{-1} D^T`, falling
    /// back to the diagonal of `M_t` where a row sum is not positive.
    pub fn approximate_schur(&self) -> CsrMatrix {
        let lumped = lump(&self.mt).unwrap_or_else(|_| {
            let diag = self.mt.diagonal();
            self.mt
                .row_sums()
                .iter()
                .zip(&diag)
                .map(|(&s, &d)| if s > 0.0 { s } else { d })
                .collect()
        });
        let inv: Vec<f64> = lumped.iter().map(|v| 1.0 / (3.0 * v)).collect();
        let dmd = self.d.scale_columns(&inv).matmul(&self.d.transpose());
        self.ma.add_scaled(1.0, &dmd)
    }

    fn build_preconditioner(&self, kind: RtPreconditioner) -> Result<Box<dyn Preconditioner>> {
        let n1 = self.vspace.ndofs();
        let schur = self.approximate_schur();
        let p2: Box<dyn Preconditioner> = match self.opts.schur_solver {
            SchurSolver::Direct => Box::new(SparseLdl::new(&schur)?),
            SchurSolver::Cg if self.sspace.ndofs() <= 4 => Box::new(Jacobi::new(&schur)?),
            SchurSolver::Cg => Box::new(InnerCg::new(schur, self.opts.schur_tol, 5000)?),
        };
        Ok(match kind {
            RtPreconditioner::BlockDiagonal => Box::new(BlockDiagonal {
                split: n1,
                p1: Box::new(SymGaussSeidel::new(self.mt.scale(3.0))?),
                p2,
            }),
            RtPreconditioner::BlockTriangular => Box::new(BlockTriangular {
                split: n1,
                p1: Box::new(SymGaussSeidel::new(self.mt.clone())?),
                c: self.d.clone(),
                p2,
            }),
        })
    }

    /// Global loads `(g, f)`.
    pub fn rhs(&self, closures: &ClosureFields) -> (Vec<f64>, Vec<f64>) {
        let (gl, fl) = local_rhs(&self.ctx, self.vspace.rt_basis(), closures);
        let mut g = vec![0.0; self.vspace.ndofs()];
        let mut f = vec![0.0; self.sspace.ndofs()];
        for e in 0..gl.len() {
            for ((&k, &s), v) in self
                .vspace
                .element_dofs(e)
                .iter()
                .zip(self.vspace.element_signs(e))
                .zip(gl[e].iter())
            {
                g[k] += s * v;
            }
            for (&k, v) in self.sspace.element_dofs(e).iter().zip(fl[e].iter()) {
                f[k] += v;
            }
        }
        (g, f)
    }

    pub fn solve(&mut self, closures: &ClosureFields, guess: Option<&[f64]>) -> Result<MomentSolution> {
        let t0 = Instant::now();
        let (g, f) = self.rhs(closures);
        let rhs_time = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let (nv, ns) = (self.vspace.ndofs(), self.sspace.ndofs());
        let mut x = vec![0.0; nv + ns];
        if let Some(gs) = guess {
            // packed guess is [varphi, J]
            x[..nv].copy_from_slice(&gs[ns..ns + nv]);
            x[nv..].copy_from_slice(&gs[..ns]);
        }
        let stats = match self.opts.rt_solver {
            RtSolver::Minres => {
                let mut b: Vec<f64> = g.iter().map(|v| -3.0 * v).collect();
                b.extend_from_slice(&f);
                minres(&self.scaled, &b, &mut x, self.pre.as_ref(), &self.opts.krylov)?
            }
            RtSolver::Bicgstab => {
                let mut b = g.clone();
                b.extend_from_slice(&f);
                bicgstab(&self.unscaled, &b, &mut x, self.pre.as_ref(), &self.opts.krylov)?
            }
        };
        Ok(MomentSolution {
            varphi: x[nv..].to_vec(),
            current: Some(x[..nv].to_vec()),
            trace: None,
            iterations: stats.iterations,
            relative_residual: stats.relative_residual,
            rhs_time,
            solve_time: t1.elapsed().as_secs_f64(),
        })
    }

    pub fn balance(&self, sol: &MomentSolution) -> Balance {
        balance_mixed(&self.ctx, &self.sspace, &self.vspace, sol)
    }
}

/// Balance terms of a mixed solution, with the leakage taken from the
/// normal trace of the current.
pub fn balance_mixed(
    ctx: &SmmContext,
    sspace: &FiniteElementSpace,
    vspace: &FiniteElementSpace,
    sol: &MomentSolution,
) -> Balance {
    let geo = &ctx.geo;
    let mesh = &geo.mesh;
    let j = sol.current.as_ref().expect("mixed solution carries a current");
    let rb = vspace.rt_basis();
    let mut absorption = 0.0;
    let mut source = 0.0;
    for e in 0..mesh.num_elements() {
        let dofs = sspace.element_dofs(e);
        for qp in &geo.volume[e] {
            let v = sspace.scalar_basis().eval(qp.xi).values;
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
        let c = vspace.gather(e, j);
        for fp in &geo.faces[fid].points {
            let v = rt_values(mesh, rb, e, fp.xi1);
            let jv: Vec2 = v.iter().zip(&c).map(|(a, &b)| a * b).sum();
            leakage += fp.w * jv.dot(&fp.normal);
        }
    }
    Balance {
        leakage,
        absorption,
        source,
    }
}
