//! Rational tensor-product spline patches mapping the reference cube,
//! square or interval into physical 3-space.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::spline::knots::KnotVector;

/// NURBS patch of parametric dimension 1, 2 or 3 embedded in 3-space.
///
/// Control points are physical coordinates in meters; weights are strictly
/// positive. Storage is row-major with the last parametric index fastest.
#[derive(Debug, Clone)]
pub struct NurbsPatch {
    dim: usize,
    kvs: Vec<KnotVector>,
    dims: [usize; 3],
    cps: Vec<Vector3<f64>>,
    weights: Vec<f64>,
}

/// Point and Jacobian of a patch map. Unused columns stay zero.
#[derive(Debug, Clone, Copy)]
pub struct PatchEval {
    pub point: Vector3<f64>,
    pub jac: Matrix3<f64>,
}

impl NurbsPatch {
    pub fn new(kvs: Vec<KnotVector>, cps: Vec<Vector3<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = kvs.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidPatch(format!("parametric dimension {dim} not in 1..=3")));
        }
        let mut dims = [1usize; 3];
        for (d, kv) in kvs.iter().enumerate() {
            dims[d] = kv.num_basis();
        }
        let n = dims.iter().product::<usize>();
        if cps.len() != n || weights.len() != n {
            return Err(Error::InvalidPatch(format!(
                "control net size {} does not match basis counts {:?}",
                cps.len(),
                &dims[..dim]
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidPatch("weights must be positive".into()));
        }
        let patch = NurbsPatch { dim, kvs, dims, cps, weights };
        patch.check_regularity()?;
        Ok(patch)
    }

    /// Jacobian sanity at a coarse sample grid: constant determinant sign
    /// for volumes, full-rank tangents for curves and surfaces.
    fn check_regularity(&self) -> Result<()> {
        let samples = [0.123, 0.5, 0.871];
        let mut xi = [0.0; 3];
        let mut sign = 0.0f64;
        let scale = self.bbox_diameter().max(f64::MIN_POSITIVE);
        let visit = |patch: &Self, xi: &[f64; 3], sign: &mut f64| -> Result<()> {
            let ev = patch.eval(&xi[..patch.dim])?;
            match patch.dim {
                3 => {
                    let det = ev.jac.determinant();
                    if det.abs() < 1e-12 * scale.powi(3) {
                        return Err(Error::InvalidPatch(format!("degenerate Jacobian at {xi:?}")));
                    }
                    if *sign == 0.0 {
                        *sign = det.signum();
                    } else if det.signum() != *sign {
                        return Err(Error::InvalidPatch("Jacobian determinant changes sign".into()));
                    }
                }
                2 => {
                    let n = ev.jac.column(0).cross(&ev.jac.column(1));
                    if n.norm() < 1e-12 * scale * scale {
                        return Err(Error::InvalidPatch(format!("degenerate surface at {xi:?}")));
                    }
                }
                _ => {
                    if ev.jac.column(0).norm() < 1e-12 * scale {
                        return Err(Error::InvalidPatch(format!("degenerate tangent at {xi:?}")));
                    }
                }
            }
            Ok(())
        };
        match self.dim {
            1 => {
                for &u in &samples {
                    xi[0] = u;
                    visit(self, &xi, &mut sign)?;
                }
            }
            2 => {
                for &u in &samples {
                    for &v in &samples {
                        xi = [u, v, 0.0];
                        visit(self, &xi, &mut sign)?;
                    }
                }
            }
            _ => {
                for &u in &samples {
                    for &v in &samples {
                        for &w in &samples {
                            xi = [u, v, w];
                            visit(self, &xi, &mut sign)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kv(&self, dir: usize) -> &KnotVector {
        &self.kvs[dir]
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn control_point(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        self.cps[self.index(i, j, k)]
    }

    pub fn weight(&self, i: usize, j: usize, k: usize) -> f64 {
        self.weights[self.index(i, j, k)]
    }

    /// Axis-aligned bounding box of the control net; contains the patch by
    /// the convex hull property.
    pub fn bbox(&self) -> (Vector3<f64>, Vector3<f64>) {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for p in &self.cps {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    pub fn bbox_diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    /// Physical point and Jacobian at a reference point.
    pub fn eval(&self, xi: &[f64]) -> Result<PatchEval> {
        if xi.len() != self.dim {
            return Err(Error::InvalidPatch(format!(
                "reference point dimension {} does not match patch dimension {}",
                xi.len(),
                self.dim
            )));
        }
        let mut spans = [0usize; 3];
        let mut vals: [Vec<f64>; 3] = [vec![1.0], vec![1.0], vec![1.0]];
        let mut ders: [Vec<f64>; 3] = [vec![0.0], vec![0.0], vec![0.0]];
        for d in 0..self.dim {
            let kv = &self.kvs[d];
            let b = kv.eval_basis(xi[d], 1)?;
            spans[d] = b.span;
            ders[d] = b.derivs.into_iter().next().unwrap();
            vals[d] = b.values;
        }
        Ok(self.eval_with_tables(&spans, &vals, &ders))
    }

    /// Tensor contraction given per-direction basis tables. Used by both
    /// pointwise evaluation and quadrature loops.
    pub fn eval_with_tables(
        &self,
        spans: &[usize; 3],
        vals: &[Vec<f64>; 3],
        ders: &[Vec<f64>; 3],
    ) -> PatchEval {
        let mut h = Vector3::zeros();
        let mut w = 0.0f64;
        let mut dh = [Vector3::zeros(), Vector3::zeros(), Vector3::zeros()];
        let mut dw = [0.0f64; 3];

        let offs = |d: usize, spans: &[usize; 3]| -> usize {
            if d < self.dim {
                spans[d] - self.kvs[d].degree()
            } else {
                0
            }
        };
        let (o0, o1, o2) = (offs(0, spans), offs(1, spans), offs(2, spans));

        for (a, &b0) in vals[0].iter().enumerate() {
            let d0 = ders[0][a];
            for (b, &b1) in vals[1].iter().enumerate() {
                let d1 = ders[1][b];
                for (c, &b2) in vals[2].iter().enumerate() {
                    let d2 = ders[2][c];
                    let idx = self.index(o0 + a, o1 + b, o2 + c);
                    let wgt = self.weights[idx];
                    let hp = self.cps[idx] * wgt;
                    let t = b0 * b1 * b2;
                    h += hp * t;
                    w += wgt * t;
                    let g = [d0 * b1 * b2, b0 * d1 * b2, b0 * b1 * d2];
                    for d in 0..self.dim {
                        dh[d] += hp * g[d];
                        dw[d] += wgt * g[d];
                    }
                }
            }
        }

        let point = h / w;
        let mut jac = Matrix3::zeros();
        for d in 0..self.dim {
            jac.set_column(d, &((dh[d] * w - h * dw[d]) / (w * w)));
        }
        PatchEval { point, jac }
    }

    /// Physical point only.
    pub fn point(&self, xi: &[f64]) -> Result<Vector3<f64>> {
        Ok(self.eval(xi)?.point)
    }

    /// Patch with knots inserted in one direction; the evaluated map is
    /// unchanged.
    pub fn insert_knots(&self, dir: usize, new_knots: &[f64]) -> Result<NurbsPatch> {
        if dir >= self.dim {
            return Err(Error::InvalidPatch(format!("direction {dir} out of range")));
        }
        let mut patch = self.clone();
        for &u in new_knots {
            patch = patch.insert_one(dir, u)?;
        }
        Ok(patch)
    }

    fn insert_one(&self, dir: usize, u: f64) -> Result<NurbsPatch> {
        let ins = self.kvs[dir].insert(u)?;
        let p = self.kvs[dir].degree();
        let span = ins.span;

        let mut dims = self.dims;
        dims[dir] += 1;
        let n = dims.iter().product::<usize>();
        let mut cps = vec![Vector3::zeros(); n];
        let mut weights = vec![0.0; n];

        let new_index = |i: usize, j: usize, k: usize| (i * dims[1] + j) * dims[2] + k;
        // Homogeneous blend along `dir` for every transverse line.
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let line = [i, j, k][dir];
                    let mut src = [i, j, k];
                    let (hp, w) = if line <= span.saturating_sub(p) {
                        let idx = self.index(src[0], src[1], src[2]);
                        (self.cps[idx] * self.weights[idx], self.weights[idx])
                    } else if line > span {
                        src[dir] = line - 1;
                        let idx = self.index(src[0], src[1], src[2]);
                        (self.cps[idx] * self.weights[idx], self.weights[idx])
                    } else {
                        let alpha = ins.alphas[line - (span + 1 - p)];
                        let mut hi = src;
                        hi[dir] = line;
                        let mut lo = src;
                        lo[dir] = line - 1;
                        let ih = self.index(hi[0], hi[1], hi[2]);
                        let il = self.index(lo[0], lo[1], lo[2]);
                        let hp = self.cps[ih] * self.weights[ih] * alpha
                            + self.cps[il] * self.weights[il] * (1.0 - alpha);
                        let w = self.weights[ih] * alpha + self.weights[il] * (1.0 - alpha);
                        (hp, w)
                    };
                    let idx = new_index(i, j, k);
                    cps[idx] = hp / w;
                    weights[idx] = w;
                }
            }
        }

        let mut kvs = self.kvs.clone();
        kvs[dir] = ins.kv;
        NurbsPatch::new(kvs, cps, weights)
    }

    /// Quarter-circle arc of radius r in the xy-plane, from (r,0,0) to
    /// (0,r,0): the standard 3-point rational quadratic.
    pub fn quarter_arc(r: f64) -> NurbsPatch {
        let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        NurbsPatch::new(
            vec![kv],
            vec![
                Vector3::new(r, 0.0, 0.0),
                Vector3::new(r, r, 0.0),
                Vector3::new(0.0, r, 0.0),
            ],
            vec![1.0, s, 1.0],
        )
        .unwrap()
    }

    /// Trilinear unit cube with identity map.
    pub fn unit_cube() -> NurbsPatch {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let mut cps = Vec::with_capacity(8);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    cps.push(Vector3::new(i as f64, j as f64, k as f64));
                }
            }
        }
        NurbsPatch::new(vec![kv.clone(), kv.clone(), kv], cps, vec![1.0; 8]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quarter_arc_stays_on_circle() {
        let r = 0.025;
        let arc = NurbsPatch::quarter_arc(r);
        for i in 0..=20 {
            let u = i as f64 / 20.0;
            let p = arc.point(&[u]).unwrap();
            assert_relative_eq!(p.norm(), r, max_relative = 1e-14);
        }
    }

    #[test]
    fn identity_cube() {
        let cube = NurbsPatch::unit_cube();
        let ev = cube.eval(&[0.3, 0.7, 0.2]).unwrap();
        assert_relative_eq!(ev.point.x, 0.3, epsilon = 1e-15);
        assert_relative_eq!(ev.point.y, 0.7, epsilon = 1e-15);
        assert_relative_eq!(ev.point.z, 0.2, epsilon = 1e-15);
        assert_relative_eq!((ev.jac - Matrix3::identity()).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        // Curved patch: quarter arc extruded radially and in z.
        let arc = NurbsPatch::quarter_arc(1.0);
        let kv1 = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let mut cps = Vec::new();
        let mut wts = Vec::new();
        for i in 0..2 {
            let scale = 1.0 + i as f64;
            for j in 0..3 {
                let q = arc.control_point(j, 0, 0) * scale;
                for k in 0..2 {
                    cps.push(Vector3::new(q.x, q.y, k as f64 * 0.5));
                    wts.push(arc.weight(j, 0, 0));
                }
            }
        }
        let patch = NurbsPatch::new(vec![kv1.clone(), arc.kv(0).clone(), kv1], cps, wts).unwrap();

        let xi = [0.5, 0.5, 0.5];
        let ev = patch.eval(&xi).unwrap();
        let h = 1e-6;
        for d in 0..3 {
            let mut xp = xi;
            xp[d] += h;
            let mut xm = xi;
            xm[d] -= h;
            let fd = (patch.point(&xp).unwrap() - patch.point(&xm).unwrap()) / (2.0 * h);
            assert_relative_eq!((ev.jac.column(d) - fd).norm(), 0.0, epsilon = 1e-6);
        }
        // determinant against finite differences
        let mut jfd = Matrix3::zeros();
        for d in 0..3 {
            let mut xp = xi;
            xp[d] += h;
            let mut xm = xi;
            xm[d] -= h;
            jfd.set_column(d, &((patch.point(&xp).unwrap() - patch.point(&xm).unwrap()) / (2.0 * h)));
        }
        assert_relative_eq!(ev.jac.determinant(), jfd.determinant(), max_relative = 1e-6);
    }

    #[test]
    fn insertion_preserves_geometry() {
        let arc = NurbsPatch::quarter_arc(0.025);
        let refined = arc.insert_knots(0, &[0.25, 0.75]).unwrap();
        assert_eq!(refined.dims()[0], arc.dims()[0] + 2);
        for i in 0..=16 {
            let u = i as f64 / 16.0;
            let p = refined.point(&[u]).unwrap();
            assert_relative_eq!(p.norm(), 0.025, max_relative = 1e-13);
            let q = arc.point(&[u]).unwrap();
            assert_relative_eq!((p - q).norm(), 0.0, epsilon = 1e-16);
        }
    }

    #[test]
    fn linear_insertion_gains_midpoint() {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let seg = NurbsPatch::new(
            vec![kv],
            vec![Vector3::new(0.0, 0.0, 0.0), Vector3::new(2.0, 0.0, 0.0)],
            vec![1.0, 1.0],
        )
        .unwrap();
        let refined = seg.insert_one(0, 0.5).unwrap();
        assert_eq!(refined.dims()[0], 3);
        assert_relative_eq!(refined.control_point(1, 0, 0).x, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn insertion_grows_dof_count_per_direction() {
        let cube = NurbsPatch::unit_cube();
        let refined = cube.insert_knots(1, &[0.2, 0.4, 0.6]).unwrap();
        assert_eq!(refined.dims(), [2, 5, 2]);
    }
}
