//! The SMM fixed-point map `G(X) = D^{-1} b(L^{-1}(sigma_s varphi / 4 pi + q))`.
//!
//! `X` packs the moment unknowns as `[varphi, J]`; `J` is absent for IP and
//! CG. One evaluation performs a full transport sweep, computes closures and
//! solves the moment system.

use super::{Balance, Method, MomentSolution, MomentSolverOptions, MomentSystem, SmmContext};
use crate::closures::ClosureFields;
use crate::linalg::{fixed_point, FixedPointOptions};
use crate::transport::{AngularFlux, Sweeper};
use crate::Result;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Copy)]
pub struct CoupledOptions {
    pub method: Method,
    pub fixed_point: FixedPointOptions,
    pub fixup: bool,
    pub moment: MomentSolverOptions,
    pub penalty_scale: f64,
}

impl Default for CoupledOptions {
    fn default() -> Self {
        CoupledOptions {
            method: Method::Ip,
            fixed_point: FixedPointOptions::default(),
            fixup: false,
            moment: MomentSolverOptions::default(),
            penalty_scale: 1.0,
        }
    }
}

pub struct FixedPointOperator {
    pub sweeper: Arc<Sweeper>,
    pub system: MomentSystem,
    psi_prev: AngularFlux,
    fixup: bool,
    /// Number of map evaluations so far.
    pub evaluations: usize,
    /// Elements adjusted by the fixup, summed over all sweeps.
    pub fixups: usize,
    pub last_closures: Option<ClosureFields>,
    pub last_solution: Option<MomentSolution>,
    /// Inner iterations of every moment solve.
    pub inner_iterations: Vec<usize>,
    pub timings: Timings,
}

/// Accumulated wall time per phase, seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub sweep: f64,
    pub closure: f64,
    pub rhs: f64,
    pub solve: f64,
}

#[derive(Debug, Clone)]
pub struct CoupledSolution {
    pub solution: MomentSolution,
    pub psi: AngularFlux,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub converged: bool,
    pub balance: Balance,
    pub fixups: usize,
}

impl FixedPointOperator {
    pub fn new(sweeper: Arc<Sweeper>, opts: &CoupledOptions) -> Result<Self> {
        let problem = sweeper.problem.clone();
        let mut ctx = SmmContext::from_problem(&problem);
        ctx.penalty_scale = opts.penalty_scale;
        let system = MomentSystem::new(opts.method, Arc::new(ctx), opts.moment)?;
        let psi_prev = AngularFlux::zeros(problem.quad.len(), problem.space.ndofs());
        Ok(FixedPointOperator {
            sweeper,
            system,
            psi_prev,
            fixup: opts.fixup,
            evaluations: 0,
            fixups: 0,
            last_closures: None,
            last_solution: None,
            inner_iterations: Vec::new(),
            timings: Timings::default(),
        })
    }

    pub fn num_unknowns(&self) -> usize {
        self.system.num_unknowns()
    }

    /// `G(X)`
    pub fn apply(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let ns = self.system.scalar_space().ndofs();
        let space = self.system.scalar_space().clone();
        let t0 = Instant::now();
        let out = self.sweeper.sweep(&x[..ns], &space, &self.psi_prev, self.fixup);
        self.timings.sweep += t0.elapsed().as_secs_f64();
        self.fixups += out.fixups;
        let p = &self.sweeper.problem;
        let t1 = Instant::now();
        let closures = ClosureFields::from_flux(&out.psi, &p.space, &p.geo, &p.quad, &p.inflow);
        self.timings.closure += t1.elapsed().as_secs_f64();
        let sol = self.system.solve(&closures, Some(x))?;
        self.timings.rhs += sol.rhs_time;
        self.timings.solve += sol.solve_time;
        self.inner_iterations.push(sol.iterations);
        self.psi_prev = out.psi;
        self.evaluations += 1;
        let packed = sol.pack();
        self.last_closures = Some(closures);
        self.last_solution = Some(sol);
        Ok(packed)
    }

    pub fn psi(&self) -> &AngularFlux {
        &self.psi_prev
    }

    /// Iterates to convergence from `X = 0`.
    pub fn solve(&mut self, opts: &FixedPointOptions) -> Result<CoupledSolution> {
        let x0 = vec![0.0; self.num_unknowns()];
        let res = fixed_point(|x| self.apply(x), x0, opts)?;
        let solution = self.last_solution.clone().expect("at least one evaluation");
        let closures = self.last_closures.as_ref().expect("at least one evaluation");
        let balance = self.system.balance(&solution, closures);
        // with Anderson mixing the returned iterate differs from the last
        // moment solve; report the mixed iterate
        let ns = self.system.scalar_space().ndofs();
        let mut solution = solution;
        solution.varphi = res.x[..ns].to_vec();
        if let Some(j) = solution.current.as_mut() {
            j.copy_from_slice(&res.x[ns..]);
        }
        Ok(CoupledSolution {
            solution,
            psi: self.psi_prev.clone(),
            iterations: res.iterations,
            history: res.history,
            converged: res.converged,
            balance,
            fixups: self.fixups,
        })
    }
}
