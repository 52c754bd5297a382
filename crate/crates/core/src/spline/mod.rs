//! Univariate and tensor-product B-spline/NURBS machinery: bases,
//! derivatives, patch maps, Jacobians, knot refinement.

mod knots;
mod patch;

pub use knots::{BasisEval, KnotInsertion, KnotVector};
pub use patch::{NurbsPatch, PatchEval};
