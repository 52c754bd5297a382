use thiserror::Error;

/// Errors produced by geometry construction, discretization and solves.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("parameter {value} outside [0,1]")]
    ParamOutOfRange { value: f64 },

    #[error("knot insertion would raise multiplicity above the degree at u = {0}")]
    MultiplicityViolation(f64),

    #[error("invalid patch: {0}")]
    InvalidPatch(String),

    #[error("degenerate Jacobian in patch {patch} at reference point {xi:?}")]
    DegenerateJacobian { patch: usize, xi: [f64; 3] },

    #[error("invalid geometry parameters: {0}")]
    InvalidGeometry(String),

    #[error("interface is not a closed surface: {0}")]
    InterfaceNotClosed(String),

    #[error("point inversion did not converge in patch {patch}")]
    LocateDiverged { patch: usize },

    #[error("coil curve is not closed (gap {gap:e} relative to length)")]
    CoilNotClosed { gap: f64 },

    #[error("equidistant node solve failed at node {node}")]
    ArcLengthSolveFailed { node: usize },

    #[error("evaluation point too close to the coil (distance {dist:e})")]
    PointOnCoil { dist: f64 },

    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),

    #[error("space construction failed: {0}")]
    InvalidSpace(String),

    #[error("inconsistent interface orientation for dof {dof}")]
    OrientationConflict { dof: usize },

    #[error("no trace space of degree {degree} exists")]
    InvalidTraceDegree { degree: isize },

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("residual {residual:e} above tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
