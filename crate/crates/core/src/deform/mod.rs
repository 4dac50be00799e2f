//! Construction of the isoparametric mesh deformation `Theta_h`.

mod deformation;
mod direction;
mod extension;
mod step_length;

pub use deformation::{
    build_theta, build_theta_gamma, deformation_gradient, Deformation, DeformationGradient, PointEvaluation,
};
pub use direction::{project_nodal, search_direction, SearchDirection, SearchVariant};
pub use extension::lenoir_extend_edge;
pub use step_length::{solve_dh, StepOptions};
