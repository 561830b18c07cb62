use super::precond::Preconditioner;
use super::sparse::LinearOperator;
use super::{axpy, dot, norm2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Stop when the residual norm falls below `rel_tol * ||b||`.
    pub rel_tol: f64,
    /// Or below this absolute value.
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final true residual norm relative to `||b||`.
    pub relative_residual: f64,
}

fn residual(a: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; b.len()];
    a.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

fn check_dims(a: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Result<()> {
    for n in [b.len(), x.len(), a.ncols()] {
        if n != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: n,
            });
        }
    }
    Ok(())
}

fn finish(a: &dyn LinearOperator, b: &[f64], x: &[f64], iterations: usize) -> SolveStats {
    let bn = norm2(b);
    let rn = norm2(&residual(a, b, x));
    SolveStats {
        iterations,
        relative_residual: if bn > 0.0 { rn / bn } else { rn },
    }
}

/// Preconditioned conjugate gradients for symmetric positive definite `a`,
/// starting from the contents of `x`.
pub fn cg(
    a: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    m: &dyn Preconditioner,
    opts: &KrylovOptions,
) -> Result<SolveStats> {
    check_dims(a, b, x)?;
    let bn = norm2(b);
    let target = (opts.rel_tol * bn).max(opts.abs_tol);
    let mut r = residual(a, b, x);
    if norm2(&r) <= target {
        return Ok(finish(a, b, x, 0));
    }
    let n = b.len();
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=opts.max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::Breakdown {
                method: "cg",
                iterations: it,
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        if norm2(&r) <= target {
            return Ok(finish(a, b, x, it));
        }
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::NotConverged {
        method: "cg",
        iterations: opts.max_iter,
        residual: norm2(&r) / bn.max(f64::MIN_POSITIVE),
    })
}

/// Preconditioned MINRES for symmetric (possibly indefinite) `a`. The
/// preconditioner must be symmetric positive definite. Convergence is judged
/// on the preconditioned residual norm.
pub fn minres(
    a: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    m: &dyn Preconditioner,
    opts: &KrylovOptions,
) -> Result<SolveStats> {
    check_dims(a, b, x)?;
    if !m.is_symmetric() {
        return Err(Error::Config(
            "MINRES requires a symmetric positive definite preconditioner".into(),
        ));
    }
    let n = b.len();
    let mut r1 = residual(a, b, x);
    let mut y = vec![0.0; n];
    m.apply(&r1, &mut y);
    let beta1_sq = dot(&r1, &y);
    if beta1_sq < 0.0 {
        return Err(Error::Breakdown {
            method: "minres",
            iterations: 0,
        });
    }
    let mut bz = vec![0.0; n];
    m.apply(b, &mut bz);
    let bnorm_m = dot(b, &bz).max(0.0).sqrt();
    let beta1 = beta1_sq.sqrt();
    let target = (opts.rel_tol * bnorm_m).max(opts.abs_tol);
    if beta1 <= target {
        return Ok(finish(a, b, x, 0));
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta, mut dbar, mut epsln, mut phibar) = (0.0, beta1, 0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    for it in 1..=opts.max_iter {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        a.apply(&v, &mut y);
        if it >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        m.apply(&r2, &mut y);
        oldb = beta;
        let bsq = dot(&r2, &y);
        if bsq < 0.0 || !bsq.is_finite() {
            return Err(Error::Breakdown {
                method: "minres",
                iterations: it,
            });
        }
        beta = bsq.sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        for i in 0..n {
            let w1 = w2[i];
            w2[i] = w[i];
            w[i] = (v[i] - oldeps * w1 - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }
        if phibar.abs() <= target || beta == 0.0 {
            return Ok(finish(a, b, x, it));
        }
    }
    Err(Error::NotConverged {
        method: "minres",
        iterations: opts.max_iter,
        residual: phibar.abs() / bnorm_m.max(f64::MIN_POSITIVE),
    })
}

/// Right-preconditioned BiCGStab for general `a`.
pub fn bicgstab(
    a: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    m: &dyn Preconditioner,
    opts: &KrylovOptions,
) -> Result<SolveStats> {
    check_dims(a, b, x)?;
    let n = b.len();
    let bn = norm2(b);
    let target = (opts.rel_tol * bn).max(opts.abs_tol);
    let mut r = residual(a, b, x);
    if norm2(&r) <= target {
        return Ok(finish(a, b, x, 0));
    }
    let rhat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ph = vec![0.0; n];
    let mut sh = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=opts.max_iter {
        let rho_new = dot(&rhat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return Err(Error::Breakdown {
                method: "bicgstab",
                iterations: it,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        m.apply(&p, &mut ph);
        a.apply(&ph, &mut v);
        alpha = rho / dot(&rhat, &v);
        axpy(alpha, &ph, x);
        axpy(-alpha, &v, &mut r);
        if norm2(&r) <= target {
            return Ok(finish(a, b, x, it));
        }
        m.apply(&r, &mut sh);
        a.apply(&sh, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::Breakdown {
                method: "bicgstab",
                iterations: it,
            });
        }
        omega = dot(&t, &r) / tt;
        axpy(omega, &sh, x);
        axpy(-omega, &t, &mut r);
        if norm2(&r) <= target {
            return Ok(finish(a, b, x, it));
        }
    }
    Err(Error::NotConverged {
        method: "bicgstab",
        iterations: opts.max_iter,
        residual: norm2(&r) / bn.max(f64::MIN_POSITIVE),
    })
}
