use super::krylov::{cg, KrylovOptions};
use super::sparse::CsrMatrix;
use crate::{Error, Result};

pub trait Preconditioner: Sync {
    /// `z = M^{-1} r`
    fn apply(&self, r: &[f64], z: &mut [f64]);
    /// Whether `M^{-1}` is symmetric positive definite, as MINRES requires.
    fn is_symmetric(&self) -> bool {
        true
    }
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Self::from_diagonal(&a.diagonal())
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        let inv_diag = d
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v == 0.0 {
                    Err(Error::ZeroPivot(i))
                } else {
                    Ok(1.0 / v)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Jacobi { inv_diag })
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * d;
        }
    }
}

/// Diagonal of row sums. Fails on a non-positive row sum.
pub fn lump(a: &CsrMatrix) -> Result<Vec<f64>> {
    let s = a.row_sums();
    if let Some(i) = s.iter().position(|&v| v <= 0.0) {
        return Err(Error::SingularLump(i));
    }
    Ok(s)
}

/// One forward Gauss-Seidel sweep from `x` for `A x = b`.
pub fn gauss_seidel_sweep(a: &CsrMatrix, b: &[f64], x: &mut [f64]) -> Result<()> {
    for i in 0..b.len() {
        let (c, v) = a.row(i);
        let mut s = b[i];
        let mut d = 0.0;
        for (&j, &aij) in c.iter().zip(v) {
            if j == i {
                d = aij;
            } else {
                s -= aij * x[j];
            }
        }
        if d == 0.0 {
            return Err(Error::ZeroPivot(i));
        }
        x[i] = s / d;
    }
    Ok(())
}

/// Symmetric Gauss-Seidel: one forward and one backward sweep from zero,
/// `M = (D + L) D^{-1} (D + U)`.
pub struct SymGaussSeidel {
    a: CsrMatrix,
    diag: Vec<f64>,
}

impl SymGaussSeidel {
    pub fn new(a: CsrMatrix) -> Result<Self> {
        let diag = a.diagonal();
        if let Some(i) = diag.iter().position(|&d| d == 0.0) {
            return Err(Error::ZeroPivot(i));
        }
        Ok(SymGaussSeidel { a, diag })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }
}

impl Preconditioner for SymGaussSeidel {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        for i in 0..n {
            let (c, v) = self.a.row(i);
            let mut s = r[i];
            for (&j, &aij) in c.iter().zip(v) {
                if j < i {
                    s -= aij * z[j];
                }
            }
            z[i] = s / self.diag[i];
        }
        for i in (0..n).rev() {
            let (c, v) = self.a.row(i);
            let mut s = 0.0;
            for (&j, &aij) in c.iter().zip(v) {
                if j > i {
                    s -= aij * z[j];
                }
            }
            z[i] += s / self.diag[i];
        }
    }
}

/// Approximate inverse by preconditioned CG to a fixed relative tolerance.
pub struct InnerCg {
    pre: SymGaussSeidel,
    opts: KrylovOptions,
}

impl InnerCg {
    pub fn new(a: CsrMatrix, rel_tol: f64, max_iter: usize) -> Result<Self> {
        Ok(InnerCg {
            pre: SymGaussSeidel::new(a)?,
            opts: KrylovOptions {
                rel_tol,
                abs_tol: 0.0,
                max_iter,
            },
        })
    }
}

impl Preconditioner for InnerCg {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.iter_mut().for_each(|v| *v = 0.0);
        // an unconverged inner solve still yields a usable approximation
        let _ = cg(self.pre.matrix(), r, z, &self.pre, &self.opts);
    }
}

/// `diag(P1, P2)^{-1}` for a 2x2 block system.
pub struct BlockDiagonal {
    pub split: usize,
    pub p1: Box<dyn Preconditioner>,
    pub p2: Box<dyn Preconditioner>,
}

impl Preconditioner for BlockDiagonal {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let (r1, r2) = r.split_at(self.split);
        let (z1, z2) = z.split_at_mut(self.split);
        self.p1.apply(r1, z1);
        self.p2.apply(r2, z2);
    }

    fn is_symmetric(&self) -> bool {
        self.p1.is_symmetric() && self.p2.is_symmetric()
    }
}

/// Block lower-triangular `[[P1, 0], [C, P2]]^{-1}`.
pub struct BlockTriangular {
    pub split: usize,
    pub p1: Box<dyn Preconditioner>,
    pub c: CsrMatrix,
    pub p2: Box<dyn Preconditioner>,
}

impl Preconditioner for BlockTriangular {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        use super::sparse::LinearOperator;
        let (r1, r2) = r.split_at(self.split);
        let (z1, z2) = z.split_at_mut(self.split);
        self.p1.apply(r1, z1);
        let mut t = vec![0.0; r2.len()];
        self.c.apply(z1, &mut t);
        for (ti, ri) in t.iter_mut().zip(r2) {
            *ti = ri - *ti;
        }
        self.p2.apply(&t, z2);
    }

    fn is_symmetric(&self) -> bool {
        false
    }
}
