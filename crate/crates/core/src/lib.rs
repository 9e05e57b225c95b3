//! Discontinuous Galerkin solver for 2D hyperbolic conservation laws on
//! unstructured triangular meshes, with an exact reformulation of each cell
//! update as a finite-volume scheme on a subcell grid and an a posteriori
//! correction that replaces reconstructed subcell fluxes where the high-order
//! update violates physical or numerical admissibility.

pub mod basis;
pub mod config;
pub mod connectivity;
pub mod correction;
pub mod stepper;
pub mod driver;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod meshio;
pub mod operators;
pub mod output;
pub mod physics;
pub mod presets;
pub mod quadrature;
pub mod residual;
pub mod riemann;
pub mod subdivision;
pub mod subres1d;
pub mod tables;

pub use error::{Error, Result, RunError};
pub use geometry::{Mat2, Vec2};
pub use mesh::{BoundaryCondition, Face, FaceRight, LoadReport, Mesh};
