//! Isogeometric solver for magnetoquasistatic eddy-current problems with
//! coil sources handled through a reduced magnetic vector potential split.
//!
//! The field is decomposed into a Biot-Savart source field radiated by a
//! closed spline coil curve, an image field that cancels its tangential
//! trace on a closed interface enclosing the conducting parts, and a
//! reaction field driven by the resulting surface current density on that
//! interface. Kernel evaluations are needed only on the interface (plus any
//! exterior output points), not at every volume quadrature point.
//!
//! Module map:
//! - [`spline`]: B-spline/NURBS bases, patches, knot refinement
//! - [`domain`]: multipatch computational domains and geometry builders
//! - [`source`]: coil curves, Biot-Savart kernels, quadrature rules
//! - [`spaces`]: curl-conforming spline spaces, traces, tree-cotree gauge
//! - [`solver`]: assembly, image/reaction solves, field superposition
//! - [`analysis`]: error norms, convergence orders, energy, kernel counts

pub mod analysis;
pub mod domain;
pub mod error;
pub mod math;
pub mod solver;
pub mod source;
pub mod spaces;
pub mod spline;

pub use error::Error;
pub use spline::{BasisEval, KnotVector, NurbsPatch};

/// Complex scalar used throughout the solver layer.
pub type C64 = num_complex::Complex<f64>;

/// Vacuum permeability (H/m).
pub const MU_0: f64 = 1.256_637_061_435_917_3e-6;
