//! Lagrange finite element spaces.

mod lagrange;
mod reference;
mod unfitted;

pub use lagrange::LagrangeSpace;
pub(crate) use reference::lagrange_1d;
pub use reference::{NodeKind, ReferenceElement};
pub use unfitted::{build_unfitted_space, evaluate_isoparametric, UnfittedSpace};
