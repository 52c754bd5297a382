//! Small numerical utilities shared across the crate.

pub mod elliptic;
pub mod gauss;

pub use elliptic::{ellipe, ellipk};
pub use gauss::GaussRule;
