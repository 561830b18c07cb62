//! Second moment method (SMM) solvers for steady, one-group discrete ordinates
//! radiative transfer on high-order curved quadrilateral meshes.
//!
//! The crate is organised bottom-up:
//! - [`mesh`]: curved quadrilateral meshes, element frames and generators
//! - [`fespace`]: quadrature, nodal bases and the DG, CG, RT and trace spaces
//! - [`linalg`]: CSR matrices, Krylov methods, preconditioners, Anderson mixing
//! - [`transport`]: angular quadrature and the upwind DG sweep
//! - [`closures`]: SMM correction tensors computed from the angular flux
//! - [`smm`]: the four moment discretizations and the outer fixed-point map
//! - [`harness`]: configuration, drivers and reports

pub mod closures;
pub mod error;
pub mod fespace;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod smm;
pub mod transport;

pub use error::{Error, Result};

/// Physical point or vector in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;
/// 2x2 matrix, used for Jacobians and rank-2 tensors.
pub type Mat2 = nalgebra::Matrix2<f64>;
/// Direction of travel on the unit sphere.
pub type Vec3 = nalgebra::Vector3<f64>;
