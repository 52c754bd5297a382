//! Coil paths as closed spline curves, equidistant-arc-length quadrature
//! nodes, Biot-Savart evaluation of the source fields, and the analytical
//! circular-loop reference.

mod analytic;
mod coil;
mod helix;
mod kernel;
mod study;

pub use analytic::{analytical_loop_a, CircularLoop};
pub use coil::{CoilSource, KernelNode, KernelRule};
pub use helix::build_helicoidal_coil;
pub use kernel::{CountedSource, SourceField};
pub use study::{quadrature_study, QuadStudyRow};
