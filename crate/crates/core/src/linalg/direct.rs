//! Sparse direct factorization of symmetric matrices.

use super::precond::Preconditioner;
use super::sparse::{CsrMatrix, LinearOperator};
use crate::{Error, Result};
use sprs::{CsMat, FillInReduction, SymmetryCheck};
use sprs_ldl::{Ldl, LdlNumeric};

/// `LDL^T` factorization with reverse Cuthill-McKee ordering.
pub struct SparseLdl {
    n: usize,
    factor: LdlNumeric<f64, usize>,
}

impl SparseLdl {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(a.nnz());
        let mut data = Vec::with_capacity(a.nnz());
        indptr.push(0);
        for i in 0..n {
            let (cols, vals) = a.row(i);
            indices.extend_from_slice(cols);
            data.extend_from_slice(vals);
            indptr.push(indices.len());
        }
        // symmetric, so the csr arrays read as csc
        let m = CsMat::new_csc((n, n), indptr, indices, data);
        let factor = Ldl::new()
            .check_symmetry(SymmetryCheck::DontCheckSymmetry)
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .numeric(m.view())
            .map_err(|e| Error::NonFinite(format!("ldl factorization failed: {e}")))?;
        if factor.d().iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::NonFinite("singular ldl factor".into()));
        }
        Ok(SparseLdl { n, factor })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        self.factor.solve(b.to_vec())
    }

    /// Nonzeros of the factor `L`.
    pub fn nnz(&self) -> usize {
        self.factor.nnz()
    }
}

impl Preconditioner for SparseLdl {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(&self.solve(r));
    }
}
