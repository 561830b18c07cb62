//! Second moment method discretizations.
//!
//! Four discretizations of the moment system share the closure data:
//! interior penalty DG ([`Method::Ip`]), continuous Galerkin ([`Method::Cg`]),
//! mixed Raviart-Thomas ([`Method::Rt`]) and its hybridization
//! ([`Method::Hrt`]). [`FixedPointOperator`] couples them to the transport
//! sweep.

pub mod fixed_point;
pub mod hrt;
pub mod rt;
pub mod scalar;

pub use fixed_point::{CoupledOptions, CoupledSolution, FixedPointOperator, Timings};
pub use hrt::HrtSystem;
pub use rt::{RtPreconditioner, RtSolver, RtSystem};
pub use scalar::ScalarSystem;

use crate::closures::ClosureFields;
use crate::fespace::{FiniteElementSpace, Geometry};
use crate::linalg::KrylovOptions;
use crate::transport::{AngularQuadrature, SourceFn, TransportProblem};
use crate::{Error, Result, Vec2};
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Ip,
    Cg,
    Rt,
    Hrt,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ip, Method::Cg, Method::Rt, Method::Hrt];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ip => "ip",
            Method::Cg => "cg",
            Method::Rt => "rt",
            Method::Hrt => "hrt",
        }
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self, Method::Rt | Method::Hrt)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ip" => Ok(Method::Ip),
            "cg" => Ok(Method::Cg),
            "rt" => Ok(Method::Rt),
            "hrt" => Ok(Method::Hrt),
            _ => Err(Error::Config(format!("unknown method '{s}'"))),
        }
    }
}

/// Source moments `(Q0, Q1)` at a point of an element.
pub type MomentSourceFn = Arc<dyn Fn(usize, Vec2) -> (f64, Vec2) + Send + Sync>;

/// Zeroth and first angular moments of `source` under `quad`.
pub fn moment_sources(source: SourceFn, quad: Arc<AngularQuadrature>) -> MomentSourceFn {
    Arc::new(move |e, x| {
        let mut q0 = 0.0;
        let mut q1 = Vec2::zeros();
        for (o, &w) in quad.directions.iter().zip(&quad.weights) {
            let q = source(e, x, *o);
            q0 += w * q;
            q1 += Vec2::new(o.x, o.y) * (w * q);
        }
        (q0, q1)
    })
}

/// Data shared by every moment discretization.
#[derive(Clone)]
pub struct SmmContext {
    pub geo: Arc<Geometry>,
    /// Transport space holding the closure tensor.
    pub tspace: Arc<FiniteElementSpace>,
    pub quad: Arc<AngularQuadrature>,
    pub sigma_t: Vec<f64>,
    pub sigma_a: Vec<f64>,
    pub sources: MomentSourceFn,
    /// Degree of the moment spaces.
    pub p: usize,
    /// Multiplier on the interior penalty `kappa`.
    pub penalty_scale: f64,
}

impl SmmContext {
    pub fn from_problem(problem: &TransportProblem) -> Self {
        SmmContext {
            geo: problem.geo.clone(),
            tspace: problem.space.clone(),
            quad: problem.quad.clone(),
            sigma_t: problem.sigma_t.clone(),
            sigma_a: (0..problem.num_elements()).map(|e| problem.sigma_a(e)).collect(),
            sources: moment_sources(problem.source.clone(), problem.quad.clone()),
            p: problem.space.degree(),
            penalty_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MomentSolverOptions {
    pub krylov: KrylovOptions,
    pub rt_solver: RtSolver,
    pub rt_preconditioner: RtPreconditioner,
    pub schur_solver: SchurSolver,
    /// Relative tolerance of the inner CG applying the approximate Schur
    /// complement inverse.
    pub schur_tol: f64,
}

/// How the RT preconditioner applies the approximate Schur complement inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurSolver {
    /// Sparse `LDL^T` factorization, computed once.
    Direct,
    /// Inner CG with symmetric Gauss-Seidel.
    Cg,
}

impl Default for MomentSolverOptions {
    fn default() -> Self {
        MomentSolverOptions {
            krylov: KrylovOptions {
                rel_tol: 1e-10,
                abs_tol: 0.0,
                max_iter: 20_000,
            },
            rt_solver: RtSolver::Minres,
            rt_preconditioner: RtPreconditioner::BlockDiagonal,
            schur_solver: SchurSolver::Direct,
            schur_tol: 1e-10,
        }
    }
}

/// Solution of one moment solve.
#[derive(Debug, Clone)]
pub struct MomentSolution {
    pub varphi: Vec<f64>,
    /// Current coefficients for the mixed methods (broken for HRT).
    pub current: Option<Vec<f64>>,
    /// Face multipliers for HRT.
    pub trace: Option<Vec<f64>>,
    pub iterations: usize,
    pub relative_residual: f64,
    /// Wall time of the right-hand side assembly, seconds.
    pub rhs_time: f64,
    /// Wall time of the linear solve, seconds.
    pub solve_time: f64,
}

impl MomentSolution {
    /// `[varphi, J]`
    pub fn pack(&self) -> Vec<f64> {
        let mut x = self.varphi.clone();
        if let Some(j) = &self.current {
            x.extend_from_slice(j);
        }
        x
    }
}

/// One of the four moment discretizations with its assembled operator.
pub enum MomentSystem {
    Scalar(ScalarSystem),
    Rt(RtSystem),
    Hrt(HrtSystem),
}

impl MomentSystem {
    pub fn new(method: Method, ctx: Arc<SmmContext>, opts: MomentSolverOptions) -> Result<Self> {
        Ok(match method {
            Method::Ip | Method::Cg => MomentSystem::Scalar(ScalarSystem::new(method, ctx, opts)?),
            Method::Rt => MomentSystem::Rt(RtSystem::new(ctx, opts)?),
            Method::Hrt => MomentSystem::Hrt(HrtSystem::new(ctx, opts)?),
        })
    }

    pub fn method(&self) -> Method {
        match self {
            MomentSystem::Scalar(s) => s.method(),
            MomentSystem::Rt(_) => Method::Rt,
            MomentSystem::Hrt(_) => Method::Hrt,
        }
    }

    pub fn scalar_space(&self) -> &Arc<FiniteElementSpace> {
        match self {
            MomentSystem::Scalar(s) => &s.space,
            MomentSystem::Rt(s) => &s.sspace,
            MomentSystem::Hrt(s) => &s.sspace,
        }
    }

    /// Length of the packed `[varphi, J]` vector.
    pub fn num_unknowns(&self) -> usize {
        match self {
            MomentSystem::Scalar(s) => s.space.ndofs(),
            MomentSystem::Rt(s) => s.sspace.ndofs() + s.vspace.ndofs(),
            MomentSystem::Hrt(s) => s.sspace.ndofs() + s.vspace.ndofs(),
        }
    }

    /// Solves with the given closures, warm-started from a packed guess.
    pub fn solve(&mut self, closures: &ClosureFields, guess: Option<&[f64]>) -> Result<MomentSolution> {
        match self {
            MomentSystem::Scalar(s) => s.solve(closures, guess),
            MomentSystem::Rt(s) => s.solve(closures, guess),
            MomentSystem::Hrt(s) => s.solve(closures, guess),
        }
    }

    /// `int_{boundary} J . n + int sigma_a varphi - int Q0`, the discrete
    /// global balance residual of a solution.
    pub fn balance(&self, sol: &MomentSolution, closures: &ClosureFields) -> Balance {
        match self {
            MomentSystem::Scalar(s) => s.balance(sol, closures),
            MomentSystem::Rt(s) => s.balance(sol),
            MomentSystem::Hrt(s) => s.balance(sol),
        }
    }
}

/// Terms of the global particle balance.
#[derive(Debug, Clone, Copy)]
pub struct Balance {
    pub leakage: f64,
    pub absorption: f64,
    pub source: f64,
}

impl Balance {
    pub fn residual(&self) -> f64 {
        self.leakage + self.absorption - self.source
    }

    pub fn relative(&self) -> f64 {
        self.residual().abs() / self.source.abs().max(f64::MIN_POSITIVE)
    }
}
