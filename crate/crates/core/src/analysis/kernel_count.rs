//! Counting Biot-Savart point evaluations by context.
//!
//! One kernel evaluation is the evaluation of the line-integral kernel at
//! one field point; fetching both the vector potential and the flux
//! density at the same point shares the distance computations and counts
//! once.

use std::sync::atomic::{AtomicU64, Ordering};

/// Where a kernel evaluation happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeContext {
    /// On the separating interface (boundary data and surface current).
    Interface,
    /// At volume quadrature points (only the non-reduced formulation).
    Volume,
    /// At output points requested after the solve.
    Postprocessing,
}

/// Monotone counters, safe for concurrent increments.
#[derive(Debug, Default)]
pub struct KernelCounter {
    interface: AtomicU64,
    volume: AtomicU64,
    postprocessing: AtomicU64,
}

impl KernelCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, context: KeContext, count: u64) {
        self.cell(context).fetch_add(count, Ordering::Relaxed);
    }

    pub fn count(&self, context: KeContext) -> u64 {
        self.cell(context).load(Ordering::Relaxed)
    }

    pub fn total(&self) -> u64 {
        self.count(KeContext::Interface)
            + self.count(KeContext::Volume)
            + self.count(KeContext::Postprocessing)
    }

    fn cell(&self, context: KeContext) -> &AtomicU64 {
        match context {
            KeContext::Interface => &self.interface,
            KeContext::Volume => &self.volume,
            KeContext::Postprocessing => &self.postprocessing,
        }
    }
}

/// Comparison of recorded interface-formulation kernel work against the
/// hypothetical cost of evaluating the kernel at every volume quadrature
/// point, as the non-reduced formulation must.
#[derive(Debug, Clone)]
pub struct KeReport {
    /// Actual evaluations on the interface.
    pub interface_count: u64,
    /// Actual evaluations at exterior output points.
    pub postprocessing_count: u64,
    /// Hypothetical count: volume quadrature points over the whole mesh.
    pub volume_hypothetical: u64,
    pub dofs: usize,
}

impl KeReport {
    /// Interface-formulation evaluations as a fraction of the hypothetical
    /// volume count.
    pub fn ratio(&self) -> f64 {
        (self.interface_count + self.postprocessing_count) as f64
            / self.volume_hypothetical.max(1) as f64
    }

    /// Reduction percentage (positive is better).
    pub fn reduction_percent(&self) -> f64 {
        100.0 * (1.0 - self.ratio())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_equal_sum_of_contexts() {
        let c = KernelCounter::new();
        c.add(KeContext::Interface, 10);
        c.add(KeContext::Volume, 5);
        c.add(KeContext::Postprocessing, 2);
        c.add(KeContext::Interface, 3);
        assert_eq!(c.count(KeContext::Interface), 13);
        assert_eq!(c.total(), 20);
    }

    #[test]
    fn concurrent_increments() {
        use std::sync::Arc;
        let c = Arc::new(KernelCounter::new());
        let mut handles = Vec::new();
        for _ in 0..8 {
            let c = Arc::clone(&c);
            handles.push(std::thread::spawn(move || {
                for _ in 0..1000 {
                    c.add(KeContext::Interface, 1);
                }
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(c.count(KeContext::Interface), 8000);
    }

    #[test]
    fn report_ratio() {
        let r = KeReport {
            interface_count: 9792,
            postprocessing_count: 0,
            volume_hypothetical: 65088,
            dofs: 18000,
        };
        assert!(r.ratio() < 0.16);
        assert!(r.reduction_percent() > 84.0);
    }
}
