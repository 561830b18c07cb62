//! Source iteration with diffusion synthetic acceleration, used to obtain
//! converged discrete ordinates reference solutions.

use super::problem::AngularFlux;
use super::sweep::Sweeper;
use crate::linalg::{cg, norm_inf, CsrMatrix, KrylovOptions, SymGaussSeidel};
use crate::{Error, Result};
use nalgebra::DVector;

#[derive(Debug, Clone, Copy)]
pub struct SnOptions {
    /// Stop once `||phi_{l+1} - phi_l||_inf` is below this.
    pub tol: f64,
    pub max_iter: usize,
    pub fixup: bool,
    pub inner: KrylovOptions,
}

impl Default for SnOptions {
    fn default() -> Self {
        SnOptions {
            tol: 1e-10,
            max_iter: 500,
            fixup: false,
            inner: KrylovOptions {
                rel_tol: 1e-12,
                abs_tol: 0.0,
                max_iter: 20_000,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SnSolution {
    pub psi: AngularFlux,
    pub phi: Vec<f64>,
    pub iterations: usize,
    /// Scalar flux that fed the scattering source of the final sweep.
    pub phi_scattering: Vec<f64>,
}

/// Solves the transport problem held by `sweeper`. With `dsa` set, each
/// sweep is followed by the diffusion correction
/// `A delta = int u sigma_s (phi_half - phi_old)`, where `A` is a symmetric
/// positive definite diffusion matrix on the transport space.
pub fn solve_sn_dsa(sweeper: &Sweeper, dsa: Option<&CsrMatrix>, opts: &SnOptions) -> Result<SnSolution> {
    let p = &sweeper.problem;
    let space = &p.space;
    let n = space.ndofs();
    let mut phi = vec![0.0; n];
    let mut psi = AngularFlux::zeros(p.quad.len(), n);
    let pure_absorber = p.sigma_s.iter().all(|&s| s == 0.0);
    let masses: Vec<_> = (0..p.num_elements())
        .map(|e| space.local_scalar_mass(&p.geo, e) * p.sigma_s[e])
        .collect();
    let pre = match dsa {
        Some(a) => Some(SymGaussSeidel::new(a.clone())?),
        None => None,
    };
    for it in 1..=opts.max_iter {
        let out = sweeper.sweep(&phi, space, &psi, opts.fixup);
        psi = out.psi;
        let half = psi.scalar_flux(&p.quad);
        if pure_absorber {
            return Ok(SnSolution {
                psi,
                phi_scattering: phi,
                phi: half,
                iterations: it,
            });
        }
        let mut next = half.clone();
        if let (Some(a), Some(pre)) = (dsa, pre.as_ref()) {
            let mut rhs = vec![0.0; n];
            for (e, m) in masses.iter().enumerate() {
                let dofs = space.element_dofs(e);
                let diff = DVector::from_iterator(dofs.len(), dofs.iter().map(|&k| half[k] - phi[k]));
                let r = m * diff;
                for (&k, v) in dofs.iter().zip(r.iter()) {
                    rhs[k] += v;
                }
            }
            let mut delta = vec![0.0; n];
            cg(a, &rhs, &mut delta, pre, &opts.inner)?;
            for (x, d) in next.iter_mut().zip(&delta) {
                *x += d;
            }
        }
        let diff: Vec<f64> = next.iter().zip(&phi).map(|(a, b)| a - b).collect();
        let change = norm_inf(&diff);
        if !change.is_finite() {
            return Err(Error::NonFinite("source iteration".into()));
        }
        let scat = std::mem::replace(&mut phi, next);
        if change < opts.tol {
            return Ok(SnSolution {
                psi,
                phi,
                iterations: it,
                phi_scattering: scat,
            });
        }
    }
    Err(Error::NotConverged {
        method: "source iteration",
        iterations: opts.max_iter,
        residual: f64::NAN,
    })
}
