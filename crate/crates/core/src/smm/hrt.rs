//! Hybridized Raviart-Thomas SMM discretization.
//!
//! The current lives in the broken RT space and normal continuity across
//! interior faces is imposed by the multiplier term
//! `int_{G0} [v . n] lambda`. Each element block
//! `[[-3 M_t, D^T], [D, M_a]]` is inverted locally and the multipliers solve
//! the condensed symmetric positive definite trace system. The recovered
//! solution coincides with the RT solution.

use super::rt::{balance_mixed, local_matrices, local_rhs, rt_values};
use super::{Balance, MomentSolution, MomentSolverOptions, SmmContext};
use crate::closures::ClosureFields;
use crate::fespace::{FiniteElementSpace, Lagrange1d};
use crate::linalg::{cg, CsrMatrix, SymGaussSeidel, TripletBuilder};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;
use std::time::Instant;

pub struct HrtSystem {
    pub ctx: Arc<SmmContext>,
    pub sspace: Arc<FiniteElementSpace>,
    /// Broken RT space.
    pub vspace: Arc<FiniteElementSpace>,
    pub trace: Arc<FiniteElementSpace>,
    /// Inverse of each element's symmetric block.
    inv: Vec<DMatrix<f64>>,
    /// `c[e]`: trace dofs and the `(ntrace x nrt)` coupling of element `e`.
    coupling: Vec<Vec<(Vec<usize>, DMatrix<f64>)>>,
    /// Condensed trace operator for `mu = -3 lambda`.
    pub reduced: CsrMatrix,
    pre: Option<SymGaussSeidel>,
    last_mu: Vec<f64>,
    opts: MomentSolverOptions,
}

impl HrtSystem {
    pub fn new(ctx: Arc<SmmContext>, opts: MomentSolverOptions) -> Result<Self> {
        let mesh = ctx.geo.mesh.clone();
        let p = ctx.p;
        let sspace = ctx.tspace.clone();
        let vspace = Arc::new(FiniteElementSpace::broken_rt(mesh.clone(), p)?);
        let trace = Arc::new(FiniteElementSpace::trace(mesh.clone(), p)?);
        let rb = vspace.rt_basis().clone();
        let line = Lagrange1d::open(p + 1)?;
        let (nr, ns) = (rb.dim(), sspace.scalar_basis().dim());
        let ne = mesh.num_elements();
        let mut inv = Vec::with_capacity(ne);
        for e in 0..ne {
            let loc = local_matrices(&ctx, &rb, e);
            let mut a = DMatrix::zeros(nr + ns, nr + ns);
            a.view_mut((0, 0), (nr, nr)).copy_from(&(loc.mt * -3.0));
            a.view_mut((0, nr), (nr, ns)).copy_from(&loc.d.transpose());
            a.view_mut((nr, 0), (ns, nr)).copy_from(&loc.d);
            a.view_mut((nr, nr), (ns, ns)).copy_from(&loc.ma);
            let ai = a
                .try_inverse()
                .ok_or_else(|| Error::NonFinite(format!("singular local block on element {e}")))?;
            inv.push(ai);
        }
        let mut coupling: Vec<Vec<(Vec<usize>, DMatrix<f64>)>> = vec![Vec::new(); ne];
        for (fid, face) in mesh.faces().iter().enumerate() {
            let Some(tdofs) = trace.face_dofs(fid) else { continue };
            let sides = [Some(face.first), face.second];
            for (side, s) in sides.iter().enumerate() {
                let (e, _) = s.expect("interior face");
                let mut c = DMatrix::zeros(p + 1, nr);
                let sgn = if side == 0 { 1.0 } else { -1.0 };
                for fp in &ctx.geo.faces[fid].points {
                    let xi = if side == 0 {
                        fp.xi1
                    } else {
                        fp.xi2.expect("interior face")
                    };
                    let v = rt_values(&mesh, &rb, e, xi);
                    let (mu, _) = line.eval(fp.s);
                    for m in 0..=p {
                        for i in 0..nr {
                            c[(m, i)] += fp.w * mu[m] * sgn * v[i].dot(&fp.normal);
                        }
                    }
                }
                coupling[e].push((tdofs.to_vec(), c));
            }
        }
        let nt = trace.ndofs();
        let mut tb = TripletBuilder::new(nt, nt);
        for e in 0..ne {
            let ajj = inv[e].view((0, 0), (nr, nr)).into_owned();
            for (d1, c1) in &coupling[e] {
                for (d2, c2) in &coupling[e] {
                    let blk = -(c1 * &ajj * c2.transpose());
                    for a in 0..d1.len() {
                        for b in 0..d2.len() {
                            tb.add(d1[a], d2[b], blk[(a, b)]);
                        }
                    }
                }
            }
        }
        let reduced = tb.build();
        let pre = if nt > 0 {
            Some(SymGaussSeidel::new(reduced.clone())?)
        } else {
            None
        };
        Ok(HrtSystem {
            ctx,
            sspace,
            vspace,
            trace,
            inv,
            coupling,
            reduced,
            pre,
            last_mu: vec![0.0; nt],
            opts,
        })
    }

    pub fn solve(&mut self, closures: &ClosureFields, _guess: Option<&[f64]>) -> Result<MomentSolution> {
        let rb = self.vspace.rt_basis();
        let (nr, ns) = (rb.dim(), self.sspace.scalar_basis().dim());
        let t0 = Instant::now();
        let (gl, fl) = local_rhs(&self.ctx, rb, closures);
        let rhs_time = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let ne = gl.len();
        let local_r: Vec<DVector<f64>> = (0..ne)
            .map(|e| {
                let mut r = DVector::zeros(nr + ns);
                r.rows_mut(0, nr).copy_from(&(&gl[e] * -3.0));
                r.rows_mut(nr, ns).copy_from(&fl[e]);
                r
            })
            .collect();
        let nt = self.trace.ndofs();
        let mut rhs = vec![0.0; nt];
        for e in 0..ne {
            let y = &self.inv[e] * &local_r[e];
            let yj = y.rows(0, nr);
            for (dofs, c) in &self.coupling[e] {
                let v = c * yj;
                for (a, &k) in dofs.iter().enumerate() {
                    rhs[k] -= v[a];
                }
            }
        }
        let mut mu = self.last_mu.clone();
        let mut iterations = 0;
        let mut relative_residual = 0.0;
        if let Some(pre) = &self.pre {
            let st = cg(&self.reduced, &rhs, &mut mu, pre, &self.opts.krylov)?;
            iterations = st.iterations;
            relative_residual = st.relative_residual;
        }
        let mut varphi = vec![0.0; self.sspace.ndofs()];
        let mut current = vec![0.0; self.vspace.ndofs()];
        for e in 0..ne {
            let mut r = local_r[e].clone();
            for (dofs, c) in &self.coupling[e] {
                let m = DVector::from_iterator(dofs.len(), dofs.iter().map(|&k| mu[k]));
                let ct = c.transpose() * m;
                for i in 0..nr {
                    r[i] -= ct[i];
                }
            }
            let x = &self.inv[e] * r;
            for (i, &k) in self.vspace.element_dofs(e).iter().enumerate() {
                current[k] = x[i];
            }
            for (i, &k) in self.sspace.element_dofs(e).iter().enumerate() {
                varphi[k] = x[nr + i];
            }
        }
        let lambda: Vec<f64> = mu.iter().map(|m| -m / 3.0).collect();
        self.last_mu = mu;
        Ok(MomentSolution {
            varphi,
            current: Some(current),
            trace: Some(lambda),
            iterations,
            relative_residual,
            rhs_time,
            solve_time: t1.elapsed().as_secs_f64(),
        })
    }

    pub fn balance(&self, sol: &MomentSolution) -> Balance {
        balance_mixed(&self.ctx, &self.sspace, &self.vspace, sol)
    }
}
