//! High-order isoparametric unfitted finite elements for two-dimensional
//! elliptic interface problems.
//!
//! A level-set function is interpolated on a simplicial background mesh. Its
//! piecewise linear interpolant defines a planar reference interface that is
//! cheap to integrate on. A mesh deformation `Theta_h` maps this reference
//! interface onto a high-order approximation of the true interface, and an
//! unfitted Nitsche discretization is assembled on the deformed cut mesh.

pub mod deform;
pub mod error;
pub mod experiment;
pub mod fe_space;
pub mod levelset;
pub mod mesh;
pub mod metrics;
pub mod nitsche;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use levelset::Side;
