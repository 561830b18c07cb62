//! Quadrature, nodal bases and finite element spaces on curved quadrilaterals.

pub mod basis;
pub mod geometry;
pub mod quadrature;
pub mod space;

pub use basis::{Lagrange1d, RtBasis, ScalarBasis};
pub use geometry::{FaceGeometry, FacePoint, Geometry, VolumePoint};
pub use quadrature::{gauss_legendre, gauss_lobatto, Rule1d, Rule2d};
pub use space::{FiniteElementSpace, GridFunction, SpaceKind};
