//! Biot-Savart evaluation of the coil vector potential and flux density.

use nalgebra::Vector3;

use crate::analysis::{KeContext, KernelCounter};
use crate::error::{Error, Result};
use crate::source::coil::{CoilSource, KernelNode, KernelRule};
use crate::MU_0;

/// Snapshot of a coil plus one quadrature rule, ready for repeated field
/// evaluations. Pure and safe to share across threads.
#[derive(Debug, Clone)]
pub struct SourceField {
    nodes: Vec<KernelNode>,
    /// mu0 N I / (4 pi)  (T m^2)
    amplitude: f64,
    /// Minimum admissible distance to the curve (m).
    guard: f64,
}

impl SourceField {
    pub fn new(coil: &CoilSource, rule: &KernelRule) -> Result<Self> {
        let nodes = coil.kernel_nodes(rule)?;
        let amplitude =
            MU_0 * coil.turns as f64 * coil.current / (4.0 * std::f64::consts::PI);
        Ok(SourceField { nodes, amplitude, guard: 1e-9 * coil.length() })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Vector potential of the coil at a field point (T m).
    ///
    /// A(r) = mu0 N I / (4 pi) * sum_k tau_k / |r - r_k|
    pub fn a_at(&self, r: Vector3<f64>) -> Result<Vector3<f64>> {
        Ok(self.ab_at(r)?.0)
    }

    /// Flux density of the coil at a field point (T).
    ///
    /// B(r) = mu0 N I / (4 pi) * sum_k tau_k x (r - r_k) / |r - r_k|^3,
    /// the standard Biot-Savart law.
    pub fn b_at(&self, r: Vector3<f64>) -> Result<Vector3<f64>> {
        Ok(self.ab_at(r)?.1)
    }

    /// Fused evaluation of (A, B); shares the distance computations.
    pub fn ab_at(&self, r: Vector3<f64>) -> Result<(Vector3<f64>, Vector3<f64>)> {
        let mut a = Vector3::zeros();
        let mut b = Vector3::zeros();
        let mut min_d = f64::INFINITY;
        for node in &self.nodes {
            let d = r - node.point;
            let dist = d.norm();
            min_d = min_d.min(dist);
            let inv = 1.0 / dist;
            a += node.tau * inv;
            b += node.tau.cross(&d) * (inv * inv * inv);
        }
        if min_d <= self.guard {
            return Err(Error::PointOnCoil { dist: min_d });
        }
        Ok((a * self.amplitude, b * self.amplitude))
    }

    /// View that records every field-point evaluation in a counter.
    pub fn counted<'a>(
        &'a self,
        counter: &'a KernelCounter,
        context: KeContext,
    ) -> CountedSource<'a> {
        CountedSource { field: self, counter, context }
    }
}

/// Counting wrapper: one increment per field point, fused or not.
#[derive(Clone, Copy)]
pub struct CountedSource<'a> {
    pub field: &'a SourceField,
    pub counter: &'a KernelCounter,
    pub context: KeContext,
}

impl CountedSource<'_> {
    pub fn a_at(&self, r: Vector3<f64>) -> Result<Vector3<f64>> {
        self.counter.add(self.context, 1);
        self.field.a_at(r)
    }

    pub fn b_at(&self, r: Vector3<f64>) -> Result<Vector3<f64>> {
        self.counter.add(self.context, 1);
        self.field.b_at(r)
    }

    pub fn ab_at(&self, r: Vector3<f64>) -> Result<(Vector3<f64>, Vector3<f64>)> {
        self.counter.add(self.context, 1);
        self.field.ab_at(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn loop_field(a: f64, ni: f64, n_quad: usize) -> SourceField {
        let coil = CoilSource::circle(a, 0.0, ni, 1).unwrap();
        SourceField::new(&coil, &KernelRule::Trapezoidal { n_quad }).unwrap()
    }

    #[test]
    fn on_axis_vector_potential_vanishes() {
        let f = loop_field(0.025, 320.0, 64);
        let a = f.a_at(Vector3::new(0.0, 0.0, 0.01)).unwrap();
        assert!(a.norm() < 1e-18, "axis symmetry should cancel A, got {a:?}");
    }

    #[test]
    fn on_axis_flux_density_matches_closed_form() {
        // B_z(z) = mu0 N I a^2 / (2 (a^2+z^2)^{3/2}) on the loop axis.
        let a = 0.025;
        let ni = 320.0;
        let f = loop_field(a, ni, 256);
        for &z in &[0.0, 0.004, 0.02, -0.05] {
            let b = f.b_at(Vector3::new(0.0, 0.0, z)).unwrap();
            let expect = MU_0 * ni * a * a / (2.0 * (a * a + z * z).powf(1.5));
            assert_relative_eq!(b.z, expect, max_relative = 1e-10);
            assert!(b.x.abs() < 1e-16 && b.y.abs() < 1e-16);
        }
    }

    #[test]
    fn center_field_value() {
        // |B|(0) = mu0 NI / (2a) = 8.04e-3 T for NI = 320 A, a = 25 mm.
        let f = loop_field(0.025, 320.0, 256);
        let b = f.b_at(Vector3::zeros()).unwrap();
        assert_relative_eq!(b.norm(), MU_0 * 320.0 / (2.0 * 0.025), max_relative = 1e-10);
        assert_relative_eq!(b.norm(), 8.04e-3, max_relative = 1e-3);
    }

    #[test]
    fn linearity_in_ampere_turns() {
        let f1 = loop_field(0.025, 320.0, 32);
        let coil2 = CoilSource::circle(0.025, 0.0, 320.0, 2).unwrap();
        let f2 = SourceField::new(&coil2, &KernelRule::Trapezoidal { n_quad: 32 }).unwrap();
        let r = Vector3::new(0.01, -0.004, 0.013);
        let (a1, b1) = f1.ab_at(r).unwrap();
        let (a2, b2) = f2.ab_at(r).unwrap();
        assert_relative_eq!((a2 - a1 * 2.0).norm(), 0.0, epsilon = 1e-22);
        assert_relative_eq!((b2 - b1 * 2.0).norm(), 0.0, epsilon = 1e-18);
    }

    #[test]
    fn b_is_curl_of_a() {
        // Central finite differences of A reproduce B away from the coil.
        let f = loop_field(0.025, 320.0, 128);
        let r = Vector3::new(0.06, 0.03, 0.05);
        let h = 1e-6;
        let mut curl = Vector3::zeros();
        let unit = [Vector3::x(), Vector3::y(), Vector3::z()];
        let mut grad = [Vector3::zeros(); 3];
        for d in 0..3 {
            let ap = f.a_at(r + unit[d] * h).unwrap();
            let am = f.a_at(r - unit[d] * h).unwrap();
            grad[d] = (ap - am) / (2.0 * h);
        }
        curl.x = grad[1].z - grad[2].y;
        curl.y = grad[2].x - grad[0].z;
        curl.z = grad[0].y - grad[1].x;
        let b = f.b_at(r).unwrap();
        assert_relative_eq!((curl - b).norm() / b.norm(), 0.0, epsilon = 1e-5);
    }

    #[test]
    fn point_on_coil_rejected() {
        let f = loop_field(0.025, 320.0, 64);
        let err = f.a_at(Vector3::new(0.025, 0.0, 0.0));
        assert!(matches!(err, Err(Error::PointOnCoil { .. })));
    }

    #[test]
    fn counter_increments_once_per_point() {
        let f = loop_field(0.025, 320.0, 16);
        let counter = KernelCounter::new();
        let c = f.counted(&counter, KeContext::Interface);
        let r = Vector3::new(0.0, 0.0, 0.01);
        c.ab_at(r).unwrap();
        c.a_at(r).unwrap();
        assert_eq!(counter.count(KeContext::Interface), 2);
        assert_eq!(counter.count(KeContext::Volume), 0);
    }
}
