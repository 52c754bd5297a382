//! Discrete curl-conforming spline spaces, trace machinery and tree-cotree
//! gauging.

mod curl_space;
mod gauge;
mod trace;
mod univariate;

pub use curl_space::{physical_from_reference, CurlSpace, ScalarSpace};
pub use gauge::{build_gauge, Gauge};
pub use trace::{
    cnorm, cross_cn, dirichlet_trace, neumann_trace, GammaSide, SurfPoint, SurfaceQuadrature,
    TraceSide, TraceSpace,
};
pub use univariate::{DirBasis, DirTable};
