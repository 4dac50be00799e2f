use thiserror::Error;

/// Errors produced while building meshes, deformations and discrete systems.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh request: {0}")]
    InvalidMesh(String),

    #[error("element index {index} out of range (mesh has {count} elements)")]
    ElementOutOfRange { index: usize, count: usize },

    #[error("vertex {vertex} is not a node of any element in the patch restriction")]
    EmptyPatch { vertex: usize },

    #[error("level set is not finite at node {node} ({x}, {y})")]
    NonFiniteLevelSet { node: usize, x: f64, y: f64 },

    #[error("degenerate level set: all vertex values of element {element} are below the snapping threshold")]
    DegenerateLevelSet { element: usize },

    #[error("no root for the step length on element {element} at reference point ({xi}, {eta})")]
    NoRoot { element: usize, xi: f64, eta: f64 },

    #[error("unresolved interface: nodal displacement {displacement:e} exceeds {limit:e} at node {node}")]
    Resolution { node: usize, displacement: f64, limit: f64 },

    #[error("edge trace does not vanish at the edge vertices (max |w| = {0:e})")]
    NonZeroVertexTrace(f64),

    #[error("singular deformation gradient on element {element}: det F = {det:e}")]
    SingularJacobian { element: usize, det: f64 },

    #[error("element {element} carries no degrees of freedom on side {side:?}")]
    InactiveSide { element: usize, side: crate::Side },

    #[error("quadrature of exactness degree {0} is not supported")]
    UnsupportedQuadrature(usize),

    #[error("interface deformation reaches the Dirichlet boundary at node {node}")]
    BoundaryConflict { node: usize },

    #[error("factorization failed: pivot {pivot:e} at row {row}")]
    Factorization { row: usize, pivot: f64 },

    #[error("iterative refinement stalled at relative residual {residual:e}")]
    Residual { residual: f64 },

    #[error("invalid error values for order estimation: {0}")]
    InvalidErrors(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
