//! Closed spline coil curves with cached arc-length tables and quadrature
//! node generation.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::math::GaussRule;
use crate::spline::{KnotVector, NurbsPatch};

/// Quadrature rule for the Biot-Savart line integral.
///
/// The trapezoidal rule uses nodes equally spaced in physical arc length,
/// which makes the periodic integrand smooth in the quadrature variable
/// and the rule spectrally accurate on closed curves. Gauss quadrature is
/// applied per knot span in parameter space for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRule {
    Trapezoidal { n_quad: usize },
    Gauss { n_quad: usize },
}

impl KernelRule {
    pub fn n_quad(&self) -> usize {
        match self {
            KernelRule::Trapezoidal { n_quad } | KernelRule::Gauss { n_quad } => *n_quad,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelRule::Trapezoidal { .. } => "trapezoidal",
            KernelRule::Gauss { .. } => "gauss",
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_quad() < 2 {
            return Err(Error::InvalidRule("need at least 2 quadrature nodes".into()));
        }
        Ok(())
    }
}

/// One line-quadrature node: position and tangent times arc weight.
#[derive(Debug, Clone, Copy)]
pub struct KernelNode {
    pub point: Vector3<f64>,
    /// Tangent direction scaled by the quadrature weight (m).
    pub tau: Vector3<f64>,
}

/// Closed one-dimensional spline curve carrying a sinusoidal current.
#[derive(Debug, Clone)]
pub struct CoilSource {
    curve: NurbsPatch,
    /// Current amplitude (A).
    pub current: f64,
    /// Number of turns carried by the line model.
    pub turns: usize,
    length: f64,
    /// Parameter intervals of the nonempty spans.
    span_intervals: Vec<(f64, f64)>,
    /// Cumulative arc length at span boundaries; last entry is the length.
    cum_length: Vec<f64>,
}

const ARC_GAUSS: usize = 16;

impl CoilSource {
    pub fn new(curve: NurbsPatch, current: f64, turns: usize) -> Result<Self> {
        if curve.dim() != 1 {
            return Err(Error::InvalidInput("coil curve must be one-dimensional".into()));
        }
        let kv = curve.kv(0);
        let span_intervals: Vec<(f64, f64)> = kv
            .element_spans()
            .iter()
            .map(|&s| (kv.knots()[s], kv.knots()[s + 1]))
            .collect();

        let rule = GaussRule::legendre(ARC_GAUSS);
        let mut cum_length = Vec::with_capacity(span_intervals.len() + 1);
        cum_length.push(0.0);
        for &(a, b) in &span_intervals {
            let mut len = 0.0;
            for (u, w) in rule.mapped(a, b) {
                len += curve.eval(&[u])?.jac.column(0).norm() * w;
            }
            cum_length.push(cum_length.last().unwrap() + len);
        }
        let length = *cum_length.last().unwrap();

        let gap = (curve.point(&[0.0])? - curve.point(&[1.0])?).norm();
        if gap > 1e-12 * length {
            return Err(Error::CoilNotClosed { gap: gap / length });
        }

        Ok(CoilSource { curve, current, turns, length, span_intervals, cum_length })
    }

    /// Circular loop of radius `a` in the plane z = `z_plane`, centered on
    /// the z axis: four exact rational quarter arcs.
    pub fn circle(a: f64, z_plane: f64, current: f64, turns: usize) -> Result<Self> {
        let knots = vec![0.0, 0.0, 0.0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.0, 1.0, 1.0];
        let kv = KnotVector::new(2, knots)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pts = [
            (a, 0.0, 1.0),
            (a, a, s),
            (0.0, a, 1.0),
            (-a, a, s),
            (-a, 0.0, 1.0),
            (-a, -a, s),
            (0.0, -a, 1.0),
            (a, -a, s),
            (a, 0.0, 1.0),
        ];
        let cps: Vec<Vector3<f64>> = pts.iter().map(|&(x, y, _)| Vector3::new(x, y, z_plane)).collect();
        let wts: Vec<f64> = pts.iter().map(|&(_, _, w)| w).collect();
        let curve = NurbsPatch::new(vec![kv], cps, wts)?;
        CoilSource::new(curve, current, turns)
    }

    pub fn curve(&self) -> &NurbsPatch {
        &self.curve
    }

    /// Total arc length (m).
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Arc length from the curve start to parameter `u`.
    pub fn arc_length(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::ParamOutOfRange { value: u });
        }
        let idx = match self
            .span_intervals
            .binary_search_by(|&(a, _)| a.partial_cmp(&u).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let (a, _) = self.span_intervals[idx];
        let rule = GaussRule::legendre(ARC_GAUSS);
        let mut len = self.cum_length[idx];
        for (t, w) in rule.mapped(a, u) {
            len += self.curve.eval(&[t])?.jac.column(0).norm() * w;
        }
        Ok(len)
    }

    fn speed(&self, u: f64) -> Result<f64> {
        Ok(self.curve.eval(&[u])?.jac.column(0).norm())
    }

    /// Parameters of `n` points equally spaced in arc length, starting at
    /// the curve origin. Solved by bracketed Newton with bisection
    /// fallback.
    pub fn equidistant_params(&self, n: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::InvalidRule("need at least 2 nodes".into()));
        }
        let l = self.length;
        let tol = 1e-13 * l;
        let mut params = Vec::with_capacity(n);
        params.push(0.0);
        for k in 1..n {
            let target = k as f64 * l / n as f64;
            // Bracketing span from the cumulative table.
            let idx = match self
                .cum_length
                .binary_search_by(|c| c.partial_cmp(&target).unwrap())
            {
                Ok(i) => i.min(self.span_intervals.len() - 1),
                Err(i) => (i - 1).min(self.span_intervals.len() - 1),
            };
            let (mut lo, mut hi) = self.span_intervals[idx];
            let (slo, shi) = (self.cum_length[idx], self.cum_length[idx + 1]);
            // Initial guess by linear interpolation inside the span.
            let mut u = lo + (hi - lo) * ((target - slo) / (shi - slo)).clamp(0.0, 1.0);
            let mut converged = false;
            for _ in 0..40 {
                let g = self.arc_length(u)? - target;
                if g.abs() <= tol {
                    converged = true;
                    break;
                }
                if g > 0.0 {
                    hi = u;
                } else {
                    lo = u;
                }
                let du = -g / self.speed(u)?.max(1e-300);
                let next = u + du;
                u = if next <= lo || next >= hi {
                    0.5 * (lo + hi)
                } else {
                    next
                };
            }
            if !converged {
                // Pure bisection as a last resort.
                let (mut lo, mut hi) = self.span_intervals[idx];
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let g = self.arc_length(mid)? - target;
                    if g.abs() <= tol {
                        u = mid;
                        converged = true;
                        break;
                    }
                    if g > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            if !converged {
                return Err(Error::ArcLengthSolveFailed { node: k });
            }
            params.push(u);
        }
        Ok(params)
    }

    /// Quadrature nodes and tangent weights for a kernel rule.
    pub fn kernel_nodes(&self, rule: &KernelRule) -> Result<Vec<KernelNode>> {
        rule.validate()?;
        match *rule {
            KernelRule::Trapezoidal { n_quad } => {
                let params = self.equidistant_params(n_quad)?;
                let w = self.length / n_quad as f64;
                params
                    .iter()
                    .map(|&u| {
                        let ev = self.curve.eval(&[u])?;
                        let t = ev.jac.column(0);
                        Ok(KernelNode {
                            point: ev.point,
                            tau: t / t.norm() * w,
                        })
                    })
                    .collect()
            }
            KernelRule::Gauss { n_quad } => {
                let n_spans = self.span_intervals.len();
                let per_span = n_quad.div_ceil(n_spans).max(1);
                let gauss = GaussRule::legendre(per_span);
                let mut nodes = Vec::with_capacity(per_span * n_spans);
                for &(a, b) in &self.span_intervals {
                    for (u, w) in gauss.mapped(a, b) {
                        let ev = self.curve.eval(&[u])?;
                        // Parametric weight: tangent carries the speed.
                        nodes.push(KernelNode { point: ev.point, tau: ev.jac.column(0) * w });
                    }
                }
                Ok(nodes)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn circle_length_and_closure() {
        let coil = CoilSource::circle(0.025, 0.0, 320.0, 1).unwrap();
        assert_relative_eq!(coil.length(), 2.0 * std::f64::consts::PI * 0.025, max_relative = 1e-12);
    }

    #[test]
    fn circle_nodes_at_uniform_angles() {
        let a = 0.025;
        let coil = CoilSource::circle(a, 0.0, 1.0, 1).unwrap();
        let n = 16;
        let nodes = coil.kernel_nodes(&KernelRule::Trapezoidal { n_quad: n }).unwrap();
        for (k, node) in nodes.iter().enumerate() {
            let expect = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let angle = node.point.y.atan2(node.point.x).rem_euclid(2.0 * std::f64::consts::PI);
            assert_relative_eq!(angle, expect, epsilon = 1e-9);
            assert_relative_eq!(node.point.xy().norm(), a, max_relative = 1e-12);
            // trapezoidal weight L/n times unit tangent
            assert_relative_eq!(node.tau.norm(), coil.length() / n as f64, max_relative = 1e-10);
        }
    }

    #[test]
    fn two_nodes_are_antipodal() {
        let coil = CoilSource::circle(1.0, 0.0, 1.0, 1).unwrap();
        let nodes = coil.kernel_nodes(&KernelRule::Trapezoidal { n_quad: 2 }).unwrap();
        assert_relative_eq!((nodes[0].point + nodes[1].point).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn equidistant_chords_on_nonuniform_curve() {
        // The rational circle parameterization is not arc-uniform, so this
        // exercises the nonlinear solve: consecutive chords must agree.
        let coil = CoilSource::circle(0.01, 0.0, 1.0, 1).unwrap();
        let nodes = coil.kernel_nodes(&KernelRule::Trapezoidal { n_quad: 64 }).unwrap();
        let mut chords = Vec::new();
        for i in 0..nodes.len() {
            let j = (i + 1) % nodes.len();
            chords.push((nodes[j].point - nodes[i].point).norm());
        }
        let mean: f64 = chords.iter().sum::<f64>() / chords.len() as f64;
        for c in chords {
            assert!((c - mean).abs() / mean < 0.01);
        }
    }

    #[test]
    fn cumulative_arc_matches_targets() {
        let coil = CoilSource::circle(0.025, 0.01, 2.0, 3).unwrap();
        let n = 37;
        let params = coil.equidistant_params(n).unwrap();
        let l = coil.length();
        for (k, &u) in params.iter().enumerate() {
            let s = coil.arc_length(u).unwrap();
            assert!((s - k as f64 * l / n as f64).abs() <= 1e-10 * l);
        }
    }

    #[test]
    fn open_curve_rejected() {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let seg = NurbsPatch::new(
            vec![kv],
            vec![Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0)],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            CoilSource::new(seg, 1.0, 1),
            Err(Error::CoilNotClosed { .. })
        ));
    }
}
