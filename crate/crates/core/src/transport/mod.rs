//! Discrete ordinates transport: angular quadrature, the upwind DG sweep and a
//! diffusion-accelerated source iteration used as a reference solver.

pub mod dsa;
pub mod fixup;
pub mod problem;
pub mod quadrature;
pub mod sweep;

pub use dsa::{solve_sn_dsa, SnOptions, SnSolution};
pub use fixup::zero_and_scale;
pub use problem::{AngularFlux, InflowFn, SourceFn, TransportProblem};
pub use quadrature::AngularQuadrature;
pub use sweep::{sweep_order, SweepOrder, Sweeper};
