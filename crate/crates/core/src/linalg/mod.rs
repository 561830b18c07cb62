//! Sparse matrices, Krylov solvers, preconditioners and fixed-point
//! acceleration.

pub mod anderson;
pub mod direct;
pub mod krylov;
pub mod precond;
pub mod sparse;

pub use anderson::{fixed_point, FixedPointOptions, FixedPointResult};
pub use direct::SparseLdl;
pub use krylov::{bicgstab, cg, minres, KrylovOptions, SolveStats};
pub use precond::{lump, BlockDiagonal, BlockTriangular, Identity, InnerCg, Jacobi, Preconditioner, SymGaussSeidel};
pub use sparse::{BlockOperator, CsrMatrix, LinearOperator, TripletBuilder};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
