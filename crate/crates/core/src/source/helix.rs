//! Helicoidal coil paths: cubic spline fit of the helix, closed by an
//! axial return wire when the end points do not already coincide.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::source::coil::CoilSource;
use crate::spline::{KnotVector, NurbsPatch};

/// Spline segments used per helix turn; enough for a fit within 1e-6 of
/// the radius with cubic interpolation.
const SEGMENTS_PER_TURN: usize = 64;

/// Helicoidal coil of `turns` turns wound around the z axis, centered at
/// the origin, closed by a straight axial return segment.
///
/// The helix occupies z in [-turns*pitch/2, +turns*pitch/2]. For zero
/// pitch the path closes onto itself and no return segment is added.
pub fn build_helicoidal_coil(
    radius: f64,
    pitch: f64,
    turns: usize,
    current: f64,
) -> Result<CoilSource> {
    if turns < 1 {
        return Err(Error::InvalidInput("helix needs at least one turn".into()));
    }
    if radius <= 0.0 || pitch < 0.0 {
        return Err(Error::InvalidInput("need radius > 0 and pitch >= 0".into()));
    }

    let m = SEGMENTS_PER_TURN * turns;
    let t_total = 2.0 * std::f64::consts::PI * turns as f64;
    let z0 = -(turns as f64) * pitch / 2.0;
    let dz_dt = pitch / (2.0 * std::f64::consts::PI);
    let point = |t: f64| Vector3::new(radius * t.cos(), radius * t.sin(), z0 + dz_dt * t);
    let tangent = |t: f64| Vector3::new(-radius * t.sin(), radius * t.cos(), dz_dt);

    // Interpolation data at uniform parameters; the helix has constant
    // speed so uniform parameters are uniform in arc length.
    let samples: Vec<Vector3<f64>> = (0..=m).map(|i| point(t_total * i as f64 / m as f64)).collect();

    let gap = (samples[m] - samples[0]).norm();
    let closed = gap < 1e-12 * radius;

    // Parameter split between helix and return segment, proportional to
    // their lengths.
    let helix_len = turns as f64 * ((2.0 * std::f64::consts::PI * radius).powi(2) + pitch * pitch).sqrt();
    let return_len = gap;
    let u_join = if closed { 1.0 } else { helix_len / (helix_len + return_len) };

    // Cubic interpolation on the unit parameter with clamped end tangents;
    // rescaling the knots to [0, u_join] afterwards leaves the curve
    // unchanged.
    let dt_du = t_total / u_join;
    let d_start = tangent(0.0) * dt_du * u_join;
    let d_end = tangent(t_total) * dt_du * u_join;
    let cps_helix = interpolate_clamped_cubic(&samples, d_start, d_end)?;
    let p = 3usize;

    let (kv, cps) = if closed {
        let mut knots = vec![0.0; p + 1];
        for i in 1..m {
            knots.push(i as f64 / m as f64);
        }
        knots.extend(std::iter::repeat(1.0).take(p + 1));
        (KnotVector::new(p, knots)?, cps_helix)
    } else {
        // Helix on [0, u_join] joined C0 (knot multiplicity p) to a straight
        // cubic segment back to the start point.
        let mut knots = vec![0.0; p + 1];
        for i in 1..m {
            knots.push(u_join * i as f64 / m as f64);
        }
        knots.extend(std::iter::repeat(u_join).take(p));
        knots.extend(std::iter::repeat(1.0).take(p + 1));
        let mut cps = cps_helix;
        let end = *cps.last().unwrap();
        let delta = samples[0] - end;
        cps.push(end + delta / 3.0);
        cps.push(end + delta * (2.0 / 3.0));
        cps.push(samples[0]);
        (KnotVector::new(p, knots)?, cps)
    };

    let n = cps.len();
    let curve = NurbsPatch::new(vec![kv], cps, vec![1.0; n])?;
    let coil = CoilSource::new(curve, current, 1)?;

    // Fit accuracy check against the exact helix.
    let mut worst = 0.0f64;
    for i in 0..=(4 * SEGMENTS_PER_TURN.min(512)) {
        let t = t_total * i as f64 / (4 * SEGMENTS_PER_TURN.min(512)) as f64;
        let u = u_join * t / t_total;
        let p = coil.curve().point(&[u])?;
        worst = worst.max((p - point(t)).norm());
    }
    if worst > 1e-6 * radius {
        return Err(Error::InvalidInput(format!(
            "helix fit deviation {worst:e} exceeds 1e-6 of the radius"
        )));
    }
    Ok(coil)
}

/// Clamped cubic B-spline interpolation of `samples` at uniform unit
/// parameters i/m, with prescribed end derivatives (unit-parameter scale).
/// Returns the m+3 control points.
fn interpolate_clamped_cubic(
    samples: &[Vector3<f64>],
    d_start: Vector3<f64>,
    d_end: Vector3<f64>,
) -> Result<Vec<Vector3<f64>>> {
    let m = samples.len() - 1;
    let p = 3usize;
    let mut solve_knots = vec![0.0; p + 1];
    for i in 1..m {
        solve_knots.push(i as f64 / m as f64);
    }
    solve_knots.extend(std::iter::repeat(1.0).take(p + 1));
    let kv_unit = KnotVector::new(p, solve_knots)?;
    let n = kv_unit.num_basis(); // m + 3

    // Band matrix rows: value at 0, derivative at 0, values at interior
    // parameters, derivative at 1, value at 1.
    let bw = 4;
    let mut band = BandMatrix::new(n, bw);
    let mut rhs = vec![Vector3::zeros(); n];

    band.set(0, 0, 1.0);
    rhs[0] = samples[0];
    {
        let b = kv_unit.eval_basis(0.0, 1).unwrap();
        // Only the first two basis functions have nonzero slope at 0.
        band.set(1, 0, b.derivs[0][0]);
        band.set(1, 1, b.derivs[0][1]);
        rhs[1] = d_start;
    }
    for i in 1..m {
        let u = i as f64 / m as f64;
        let b = kv_unit.eval_basis(u, 0).unwrap();
        let first = b.span - p;
        for (j, &v) in b.values.iter().enumerate() {
            if v != 0.0 {
                band.set(i + 1, first + j, v);
            }
        }
        rhs[i + 1] = samples[i];
    }
    {
        let b = kv_unit.eval_basis(1.0, 1).unwrap();
        band.set(m + 1, n - 2, b.derivs[0][p - 1]);
        band.set(m + 1, n - 1, b.derivs[0][p]);
        rhs[m + 1] = d_end;
    }
    band.set(m + 2, n - 1, 1.0);
    rhs[m + 2] = samples[m];

    band.solve(rhs)
}

/// Minimal banded LU solve without pivoting; spline collocation matrices
/// are well conditioned for uniform parameters.
struct BandMatrix {
    n: usize,
    bw: usize,
    /// data[i][j] stores entry (i, i - bw + j), j in 0..2*bw+1
    data: Vec<f64>,
}

impl BandMatrix {
    fn new(n: usize, bw: usize) -> Self {
        BandMatrix { n, bw, data: vec![0.0; n * (2 * bw + 1)] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.bw as isize;
        if off < 0 || off > 2 * self.bw as isize {
            return None;
        }
        Some(i * (2 * self.bw + 1) + off as usize)
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.idx(i, j).expect("entry outside band");
        self.data[idx] = v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    fn solve(mut self, mut rhs: Vec<Vector3<f64>>) -> Result<Vec<Vector3<f64>>> {
        let n = self.n;
        let bw = self.bw;
        for k in 0..n {
            let piv = self.get(k, k);
            if piv.abs() < 1e-300 {
                return Err(Error::SolveFailed("banded interpolation pivot is zero".into()));
            }
            for i in k + 1..(k + bw + 1).min(n) {
                let factor = self.get(i, k) / piv;
                if factor == 0.0 {
                    continue;
                }
                for j in k..(k + bw + 1).min(n) {
                    let v = self.get(i, j) - factor * self.get(k, j);
                    if let Some(idx) = self.idx(i, j) {
                        self.data[idx] = v;
                    }
                }
                let delta = rhs[k] * factor;
                rhs[i] -= delta;
            }
        }
        for k in (0..n).rev() {
            let mut x = rhs[k];
            for j in k + 1..(k + bw + 1).min(n) {
                x -= rhs[j] * self.get(k, j);
            }
            rhs[k] = x / self.get(k, k);
        }
        Ok(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_pitch_single_turn_is_a_circle() {
        let coil = build_helicoidal_coil(0.02, 0.0, 1, 1.0).unwrap();
        assert_relative_eq!(
            coil.length(),
            2.0 * std::f64::consts::PI * 0.02,
            max_relative = 1e-6
        );
    }

    #[test]
    fn helix_arc_length() {
        let (r, pitch, turns) = (0.02, 0.3e-3, 12);
        let coil = build_helicoidal_coil(r, pitch, turns, 1.0).unwrap();
        let helix = turns as f64 * ((2.0 * std::f64::consts::PI * r).powi(2) + pitch * pitch).sqrt();
        let closure = turns as f64 * pitch;
        assert_relative_eq!(coil.length(), helix + closure, max_relative = 1e-3);
    }

    #[test]
    fn closure_is_exact() {
        let coil = build_helicoidal_coil(0.02, 0.5e-3, 7, 1.0).unwrap();
        let gap = (coil.curve().point(&[0.0]).unwrap() - coil.curve().point(&[1.0]).unwrap()).norm();
        assert!(gap < 1e-12 * coil.length());
    }

    #[test]
    fn fit_tracks_helix_points() {
        let (r, pitch, turns) = (0.02, 0.4e-3, 5);
        let coil = build_helicoidal_coil(r, pitch, turns, 1.0).unwrap();
        // Radial deviation along the wound part stays within the fit bound.
        let u_join = 0.999; // helix occupies almost all of the parameter
        for i in 0..200 {
            let u = u_join * i as f64 / 200.0;
            let p = coil.curve().point(&[u]).unwrap();
            assert!((p.xy().norm() - r).abs() < 2e-6 * r);
        }
    }
}
