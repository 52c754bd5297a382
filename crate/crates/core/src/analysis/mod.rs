//! Error measures, empirical convergence orders, field sampling, magnetic
//! energy and kernel-evaluation accounting.

mod eoc;
mod kernel_count;

pub use eoc::{eoc_orders, EocSummary};
pub use kernel_count::{KeContext, KeReport, KernelCounter};

/// Error measure attached to a convergence table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    HcurlSeminorm,
    HcurlNorm,
    L2,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::HcurlSeminorm => "hcurl-seminorm",
            ErrorKind::HcurlNorm => "hcurl-norm",
            ErrorKind::L2 => "l2",
        }
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    /// Maximum element diameter in the measurement region (m).
    pub h: f64,
    pub dofs: usize,
    pub error: f64,
    pub kind: ErrorKind,
}

impl ConvergenceRow {
    pub fn dofs_cbrt(&self) -> f64 {
        (self.dofs as f64).cbrt()
    }
}
