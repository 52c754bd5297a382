//! Multipatch computational domains: materials, conforming patch
//! interfaces, the separating surface between inner and outer regions, and
//! canonical geometry builders.

mod builders;
mod locate;

pub use builders::{build_cylinder_domain, GeometryParams, InterfaceShape, MeshPolicy};
pub use locate::LocateResult;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::math::GaussRule;
use crate::spline::{KnotVector, NurbsPatch};

/// Linear material data for one patch.
#[derive(Debug, Clone, Copy)]
pub struct Material {
    /// Permeability (H/m).
    pub mu: f64,
    /// Conductivity (S/m).
    pub sigma: f64,
}

/// Region classification of a patch. The inner region is everything
/// enclosed by the separating interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    Conductor,
    InteriorAir,
    ExteriorAir,
}

impl RegionLabel {
    pub fn is_interior(self) -> bool {
        matches!(self, RegionLabel::Conductor | RegionLabel::InteriorAir)
    }
}

/// One of the six faces of a 3D patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

impl Face {
    pub fn all() -> [Face; 6] {
        let mut out = [Face { axis: 0, upper: false }; 6];
        for a in 0..3 {
            out[2 * a] = Face { axis: a, upper: false };
            out[2 * a + 1] = Face { axis: a, upper: true };
        }
        out
    }

    /// The two tangential parametric axes, in increasing order.
    pub fn tangent_axes(&self) -> [usize; 2] {
        match self.axis {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    /// Sign of the permutation (t1, t2, axis) relative to (0, 1, 2).
    pub fn axis_parity(&self) -> f64 {
        if self.axis == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// Pinned index along `axis` for a grid with `n` entries.
    pub fn pinned(&self, n: usize) -> usize {
        if self.upper {
            n - 1
        } else {
            0
        }
    }
}

/// Index transformation identifying the grids of two matched faces.
///
/// An A-face grid index (i1, i2) maps to the B-face index obtained by an
/// optional axis swap followed by per-axis flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceTransform {
    pub swap: bool,
    pub flip: [bool; 2],
}

impl FaceTransform {
    pub fn all() -> [FaceTransform; 8] {
        let mut out = [FaceTransform { swap: false, flip: [false, false] }; 8];
        let mut i = 0;
        for swap in [false, true] {
            for f0 in [false, true] {
                for f1 in [false, true] {
                    out[i] = FaceTransform { swap, flip: [f0, f1] };
                    i += 1;
                }
            }
        }
        out
    }

    /// Map an A-side face grid index to the B side for B grid dims `nb`.
    #[inline]
    pub fn map(&self, i: [usize; 2], nb: [usize; 2]) -> [usize; 2] {
        let (a, b) = if self.swap { (i[1], i[0]) } else { (i[0], i[1]) };
        [
            if self.flip[0] { nb[0] - 1 - a } else { a },
            if self.flip[1] { nb[1] - 1 - b } else { b },
        ]
    }

    /// Map continuous A-side face coordinates to the B side.
    #[inline]
    pub fn map_coords(&self, c: [f64; 2]) -> [f64; 2] {
        let (a, b) = if self.swap { (c[1], c[0]) } else { (c[0], c[1]) };
        [
            if self.flip[0] { 1.0 - a } else { a },
            if self.flip[1] { 1.0 - b } else { b },
        ]
    }

    /// Inverse transform: with T = flip . swap, the inverse is swap . flip.
    pub fn inverse(&self) -> FaceTransform {
        if self.swap {
            FaceTransform { swap: true, flip: [self.flip[1], self.flip[0]] }
        } else {
            *self
        }
    }
}

/// A conforming shared face between two patches.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceFace {
    pub patch_a: usize,
    pub face_a: Face,
    pub patch_b: usize,
    pub face_b: Face,
    pub transform: FaceTransform,
}

/// One face of the separating interface, seen from the inner side.
#[derive(Debug, Clone, Copy)]
pub struct GammaFace {
    pub int_patch: usize,
    pub int_face: Face,
    pub ext_patch: usize,
    pub ext_face: Face,
    pub transform: FaceTransform,
}

/// Builder metadata attached to each patch.
#[derive(Debug, Clone, Copy)]
pub struct PatchTag {
    pub layer: usize,
    pub zone: usize,
    pub quadrant: usize,
}

/// Angular frequency and the sign convention in front of j*omega.
#[derive(Debug, Clone, Copy)]
pub struct FrequencySettings {
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Either +1 or -1; multiplies j*omega in the reaction problem.
    pub time_sign: f64,
}

impl FrequencySettings {
    pub fn new(frequency_hz: f64, time_sign: f64) -> Result<Self> {
        if frequency_hz < 0.0 {
            return Err(Error::InvalidInput("frequency must be nonnegative".into()));
        }
        if time_sign != 1.0 && time_sign != -1.0 {
            return Err(Error::InvalidInput("time-convention sign must be +1 or -1".into()));
        }
        Ok(FrequencySettings { omega: 2.0 * std::f64::consts::PI * frequency_hz, time_sign })
    }
}

/// Conforming multipatch domain with a closed interior/exterior interface.
#[derive(Debug)]
pub struct MultipatchDomain {
    pub patches: Vec<NurbsPatch>,
    pub materials: Vec<Material>,
    pub labels: Vec<RegionLabel>,
    pub tags: Vec<PatchTag>,
    pub interfaces: Vec<InterfaceFace>,
    pub gamma_faces: Vec<GammaFace>,
    pub boundary_faces: Vec<(usize, Face)>,
    n_layers: usize,
    n_zones: usize,
}

impl MultipatchDomain {
    /// Glue a list of patches into a domain: discover conforming shared
    /// faces, classify the interface, and verify that it is closed.
    pub fn from_patches(
        patches: Vec<NurbsPatch>,
        materials: Vec<Material>,
        labels: Vec<RegionLabel>,
        tags: Vec<PatchTag>,
    ) -> Result<Self> {
        let n = patches.len();
        if materials.len() != n || labels.len() != n || tags.len() != n {
            return Err(Error::InvalidGeometry("per-patch data length mismatch".into()));
        }
        let interfaces = discover_interfaces(&patches)?;

        let mut matched = vec![false; 6 * n];
        let fidx = |p: usize, f: Face| 6 * p + 2 * f.axis + f.upper as usize;
        for itf in &interfaces {
            for (p, f) in [(itf.patch_a, itf.face_a), (itf.patch_b, itf.face_b)] {
                if matched[fidx(p, f)] {
                    return Err(Error::InvalidGeometry(format!(
                        "face {f:?} of patch {p} matched more than once"
                    )));
                }
                matched[fidx(p, f)] = true;
            }
        }
        let mut boundary_faces = Vec::new();
        for p in 0..n {
            for f in Face::all() {
                if !matched[fidx(p, f)] {
                    boundary_faces.push((p, f));
                }
            }
        }

        let mut gamma_faces = Vec::new();
        for itf in &interfaces {
            let ia = labels[itf.patch_a].is_interior();
            let ib = labels[itf.patch_b].is_interior();
            if ia != ib {
                // Transform always maps interior-side face coords to the
                // exterior side.
                let (int_patch, int_face, ext_patch, ext_face, transform) = if ia {
                    (itf.patch_a, itf.face_a, itf.patch_b, itf.face_b, itf.transform)
                } else {
                    (itf.patch_b, itf.face_b, itf.patch_a, itf.face_a, itf.transform.inverse())
                };
                gamma_faces.push(GammaFace { int_patch, int_face, ext_patch, ext_face, transform });
            }
        }
        gamma_faces.sort_by_key(|g| (g.int_patch, g.int_face.axis, g.int_face.upper));

        let n_layers = tags.iter().map(|t| t.layer).max().unwrap_or(0) + 1;
        let n_zones = tags.iter().map(|t| t.zone).max().unwrap_or(0) + 1;
        let domain = MultipatchDomain {
            patches,
            materials,
            labels,
            tags,
            interfaces,
            gamma_faces,
            boundary_faces,
            n_layers,
            n_zones,
        };
        domain.check_gamma_closed()?;
        Ok(domain)
    }

    pub fn n_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_zones(&self) -> usize {
        self.n_zones
    }

    /// Ordered interface faces with outward (inner-to-outer) orientation.
    pub fn interface_faces(&self) -> &[GammaFace] {
        &self.gamma_faces
    }

    pub fn interior_patches(&self) -> Vec<usize> {
        (0..self.n_patches()).filter(|&p| self.labels[p].is_interior()).collect()
    }

    pub fn exterior_patches(&self) -> Vec<usize> {
        (0..self.n_patches()).filter(|&p| !self.labels[p].is_interior()).collect()
    }

    pub fn conductor_patches(&self) -> Vec<usize> {
        (0..self.n_patches())
            .filter(|&p| self.labels[p] == RegionLabel::Conductor)
            .collect()
    }

    /// Unnormalized outward-of-patch normal (direction times surface
    /// Jacobian) at a reference point of a face.
    pub fn face_normal_scaled(&self, patch: usize, face: Face, xi: &[f64; 3]) -> Result<Vector3<f64>> {
        let ev = self.patches[patch].eval(xi)?;
        let [t1, t2] = face.tangent_axes();
        let raw = ev.jac.column(t1).cross(&ev.jac.column(t2));
        let side = if face.upper { 1.0 } else { -1.0 };
        let det_sign = ev.jac.determinant().signum();
        Ok(raw * (side * face.axis_parity() * det_sign))
    }

    /// Closed-surface test: the integral of the outward normal over the
    /// interface must vanish.
    fn check_gamma_closed(&self) -> Result<()> {
        if self.gamma_faces.is_empty() {
            return Ok(());
        }
        let (integral, area) = self.gamma_normal_integral(6)?;
        let tol = 1e-8 * area;
        if integral.norm() > tol {
            return Err(Error::InterfaceNotClosed(format!(
                "normal integral {:?} exceeds {:.3e} for area {:.3e}",
                integral, tol, area
            )));
        }
        Ok(())
    }

    /// Integral of the outward normal over the interface plus total area.
    pub fn gamma_normal_integral(&self, q: usize) -> Result<(Vector3<f64>, f64)> {
        let rule = GaussRule::legendre(q);
        let mut total = Vector3::zeros();
        let mut area = 0.0;
        for gf in &self.gamma_faces {
            let face = gf.int_face;
            let [t1, t2] = face.tangent_axes();
            let pinned = if face.upper { 1.0 } else { 0.0 };
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                for (v, wv) in rule.nodes.iter().zip(&rule.weights) {
                    let mut xi = [pinned; 3];
                    xi[t1] = *u;
                    xi[t2] = *v;
                    let n = self.face_normal_scaled(gf.int_patch, face, &xi)?;
                    total += n * (wu * wv);
                    area += n.norm() * wu * wv;
                }
            }
        }
        Ok((total, area))
    }

    /// Volume of a set of patches by Gauss quadrature of |det J|.
    pub fn volume(&self, patch_ids: &[usize], q: usize) -> Result<f64> {
        let rule = GaussRule::legendre(q);
        let mut vol = 0.0;
        for &p in patch_ids {
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                for (v, wv) in rule.nodes.iter().zip(&rule.weights) {
                    for (w, ww) in rule.nodes.iter().zip(&rule.weights) {
                        let ev = self.patches[p].eval(&[*u, *v, *w])?;
                        vol += ev.jac.determinant().abs() * wu * wv * ww;
                    }
                }
            }
        }
        Ok(vol)
    }

    /// Geometry-only volume quadrature points over the given patches,
    /// subdividing each patch into `n_sub`^3 cells with a `q`-point rule.
    pub fn quadrature_points(
        &self,
        patch_ids: &[usize],
        n_sub: usize,
        q: usize,
    ) -> Result<Vec<(Vector3<f64>, f64)>> {
        let rule = GaussRule::legendre(q);
        let h = 1.0 / n_sub as f64;
        let mut out = Vec::new();
        for &p in patch_ids {
            for cu in 0..n_sub {
                for cv in 0..n_sub {
                    for cw in 0..n_sub {
                        let cells = [cu, cv, cw];
                        let mapped: Vec<Vec<(f64, f64)>> = (0..3)
                            .map(|d| {
                                rule.mapped(cells[d] as f64 * h, (cells[d] + 1) as f64 * h)
                                    .collect()
                            })
                            .collect();
                        for &(u, wu) in &mapped[0] {
                            for &(v, wv) in &mapped[1] {
                                for &(w, ww) in &mapped[2] {
                                    let ev = self.patches[p].eval(&[u, v, w])?;
                                    let wgt = ev.jac.determinant().abs() * wu * wv * ww;
                                    out.push((ev.point, wgt));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Grid of control points and weights on one face.
fn face_grid(patch: &NurbsPatch, face: Face) -> ([usize; 2], Vec<(Vector3<f64>, f64)>) {
    let dims = patch.dims();
    let [t1, t2] = face.tangent_axes();
    let pin = face.pinned(dims[face.axis]);
    let n = [dims[t1], dims[t2]];
    let mut grid = Vec::with_capacity(n[0] * n[1]);
    for i in 0..n[0] {
        for j in 0..n[1] {
            let mut idx = [0usize; 3];
            idx[t1] = i;
            idx[t2] = j;
            idx[face.axis] = pin;
            grid.push((
                patch.control_point(idx[0], idx[1], idx[2]),
                patch.weight(idx[0], idx[1], idx[2]),
            ));
        }
    }
    (n, grid)
}

/// Knot vector reversal u -> 1 - u.
fn reversed_kv(kv: &KnotVector) -> KnotVector {
    let knots: Vec<f64> = kv.knots().iter().rev().map(|&k| 1.0 - k).collect();
    KnotVector::new(kv.degree(), knots).expect("reversal preserves validity")
}

fn kvs_equal(a: &KnotVector, b: &KnotVector, tol: f64) -> bool {
    a.degree() == b.degree()
        && a.knots().len() == b.knots().len()
        && a.knots().iter().zip(b.knots()).all(|(x, y)| (x - y).abs() <= tol)
}

/// Try to match two faces under one of the eight grid transformations.
/// Returns the transform mapping A-side indices to B-side indices.
fn try_match_faces(
    pa: &NurbsPatch,
    fa: Face,
    pb: &NurbsPatch,
    fb: Face,
    tol: f64,
) -> Option<FaceTransform> {
    let (na, grid_a) = face_grid(pa, fa);
    let (nb, grid_b) = face_grid(pb, fb);
    let ta = fa.tangent_axes();
    let tb = fb.tangent_axes();

    'outer: for tr in FaceTransform::all() {
        let expect = if tr.swap { [na[1], na[0]] } else { na };
        if expect != nb {
            continue;
        }
        // Knot vectors must agree (reversed under a flip).
        for s in 0..2 {
            let sa = if tr.swap { 1 - s } else { s };
            let kva = pa.kv(ta[sa]);
            let kvb = pb.kv(tb[s]);
            let ok = if tr.flip[s] {
                kvs_equal(&reversed_kv(kva), kvb, 1e-14)
            } else {
                kvs_equal(kva, kvb, 1e-14)
            };
            if !ok {
                continue 'outer;
            }
        }
        // Full control grid match.
        for i in 0..na[0] {
            for j in 0..na[1] {
                let [bi, bj] = tr.map([i, j], nb);
                let (cp_a, w_a) = grid_a[i * na[1] + j];
                let (cp_b, w_b) = grid_b[bi * nb[1] + bj];
                if (cp_a - cp_b).norm() > tol || (w_a - w_b).abs() > 1e-12 {
                    continue 'outer;
                }
            }
        }
        return Some(tr);
    }
    None
}

/// Discover all conforming shared faces between distinct patches.
fn discover_interfaces(patches: &[NurbsPatch]) -> Result<Vec<InterfaceFace>> {
    let n = patches.len();
    let scale = patches
        .iter()
        .map(|p| p.bbox_diameter())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;

    // Cheap prefilter: face centroid of control points.
    let mut centroids: Vec<(usize, Face, Vector3<f64>)> = Vec::with_capacity(6 * n);
    for (p, patch) in patches.iter().enumerate() {
        for f in Face::all() {
            let (_, grid) = face_grid(patch, f);
            let c = grid.iter().map(|(cp, _)| cp).sum::<Vector3<f64>>() / grid.len() as f64;
            centroids.push((p, f, c));
        }
    }

    let mut out = Vec::new();
    for i in 0..centroids.len() {
        for j in i + 1..centroids.len() {
            let (pa, fa, ca) = centroids[i];
            let (pb, fb, cb) = centroids[j];
            if pa == pb || (ca - cb).norm() > tol {
                continue;
            }
            if let Some(tr) = try_match_faces(&patches[pa], fa, &patches[pb], fb, tol) {
                out.push(InterfaceFace {
                    patch_a: pa,
                    face_a: fa,
                    patch_b: pb,
                    face_b: fb,
                    transform: tr,
                });
            }
        }
    }
    Ok(out)
}
