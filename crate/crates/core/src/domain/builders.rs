//! Canonical verification geometry: a conducting cylinder centered at the
//! origin, a closed interface shell around it, and an outer truncation
//! boundary, all assembled from conforming NURBS patches.
//!
//! Every cross-section is split into a rational-quadratic center square
//! plus quadrant rings, so all circular boundaries are exact and all
//! shared faces carry identical parameterizations.

use nalgebra::{Vector2, Vector3};

use crate::domain::{Material, MultipatchDomain, PatchTag, RegionLabel};
use crate::error::{Error, Result};
use crate::spline::{KnotVector, NurbsPatch};
use crate::MU_0;

/// Shape of the separating interface and of the outer truncation boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceShape {
    /// Circular cross-section: interface and outer boundary are cylinders.
    Cylinder,
    /// Square cross-section: interface and outer boundary are boxes.
    Box,
}

/// Parameters of the cylinder-in-shell verification domain. All lengths in
/// meters.
#[derive(Debug, Clone, Copy)]
pub struct GeometryParams {
    pub r_conductor: f64,
    pub h_conductor: f64,
    /// Radius (or half-width for a box) of the separating interface.
    pub r_interface: f64,
    /// Half-height of the separating interface shell.
    pub z_interface: f64,
    /// Radius (or half-width) of the outer truncation boundary.
    pub r_outer: f64,
    /// Half-height of the outer boundary.
    pub z_outer: f64,
    /// Half-width of the central square patch of each cross-section.
    pub square_half_width: f64,
    pub shape: InterfaceShape,
    /// Split the conductor into two axial layers.
    pub split_conductor_z: bool,
    /// Split the air gap between conductor and interface into two rings.
    pub split_inner_ring: bool,
    /// Conductor conductivity (S/m).
    pub sigma: f64,
    /// Relative permeability of the conductor.
    pub mu_r_conductor: f64,
}

impl GeometryParams {
    /// Conducting cylinder test setup; interface and truncation sizes scale
    /// with the conductor radius.
    pub fn verification(r_conductor: f64, h_conductor: f64, sigma: f64) -> Self {
        GeometryParams {
            r_conductor,
            h_conductor,
            r_interface: 1.5 * r_conductor,
            z_interface: h_conductor / 2.0 + 5.0 * r_conductor / 6.0,
            r_outer: 35.0 * r_conductor / 6.0,
            z_outer: 35.0 * r_conductor / 6.0,
            square_half_width: r_conductor / 2.0,
            shape: InterfaceShape::Cylinder,
            split_conductor_z: false,
            split_inner_ring: false,
            sigma,
            mu_r_conductor: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ordered = 0.0 < self.square_half_width
            && self.square_half_width < 0.75 * self.r_conductor
            && self.r_conductor < self.r_interface
            && self.r_interface < self.r_outer;
        let z_ordered = 0.0 < self.h_conductor
            && self.h_conductor / 2.0 < self.z_interface
            && self.z_interface < self.z_outer;
        if !ordered || !z_ordered {
            return Err(Error::InvalidGeometry(format!(
                "dimension ordering violated: need square < r_cond < r_int < r_out \
                 and h/2 < z_int < z_out, got {self:?}"
            )));
        }
        if self.sigma < 0.0 || self.mu_r_conductor <= 0.0 {
            return Err(Error::InvalidGeometry("need sigma >= 0 and mu_r > 0".into()));
        }
        Ok(())
    }
}

/// Cross-section boundary of one ring zone.
#[derive(Debug, Clone, Copy)]
enum SectionBoundary {
    Circle(f64),
    Square(f64),
}

const SQRT1_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn rot90(v: Vector2<f64>, times: usize) -> Vector2<f64> {
    let mut out = v;
    for _ in 0..times % 4 {
        out = Vector2::new(-out.y, out.x);
    }
    out
}

/// Control points and weights of a quadrant of a section boundary: a
/// rational quadratic running counterclockwise through the quadrant
/// centered on +x (east), +y (north), -x, -y.
fn quadrant_curve(b: SectionBoundary, quadrant: usize) -> ([Vector2<f64>; 3], [f64; 3]) {
    let (p0, p1, p2) = match b {
        SectionBoundary::Circle(r) => (
            Vector2::new(r * SQRT1_2, -r * SQRT1_2),
            Vector2::new(r * std::f64::consts::SQRT_2, 0.0),
            Vector2::new(r * SQRT1_2, r * SQRT1_2),
        ),
        SectionBoundary::Square(b) => (
            Vector2::new(b, -b),
            Vector2::new(b, 0.0),
            Vector2::new(b, b),
        ),
    };
    (
        [rot90(p0, quadrant), rot90(p1, quadrant), rot90(p2, quadrant)],
        [1.0, SQRT1_2, 1.0],
    )
}

fn kv_deg1() -> KnotVector {
    KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap()
}

fn kv_deg2() -> KnotVector {
    KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap()
}

/// Ring patch between two quadrant curves, extruded over [z0, z1].
/// Directions: u radial (inner to outer), v angular, w axial.
fn ring_patch(
    inner: SectionBoundary,
    outer: SectionBoundary,
    quadrant: usize,
    z0: f64,
    z1: f64,
) -> Result<NurbsPatch> {
    let (pi, wi) = quadrant_curve(inner, quadrant);
    let (po, _) = quadrant_curve(outer, quadrant);
    let mut cps = Vec::with_capacity(12);
    let mut wts = Vec::with_capacity(12);
    for iu in 0..2 {
        let ring = if iu == 0 { &pi } else { &po };
        for jv in 0..3 {
            for kw in 0..2 {
                let z = if kw == 0 { z0 } else { z1 };
                cps.push(Vector3::new(ring[jv].x, ring[jv].y, z));
                wts.push(wi[jv]);
            }
        }
    }
    NurbsPatch::new(vec![kv_deg1(), kv_deg2(), kv_deg1()], cps, wts)
}

/// Center square patch with the separable rational parameterization whose
/// edges coincide with the quadrant curves of `Square(c)`.
fn square_patch(c: f64, z0: f64, z1: f64) -> Result<NurbsPatch> {
    let coords = [-c, 0.0, c];
    let w1 = [1.0, SQRT1_2, 1.0];
    let mut cps = Vec::with_capacity(18);
    let mut wts = Vec::with_capacity(18);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..2 {
                let z = if k == 0 { z0 } else { z1 };
                cps.push(Vector3::new(coords[i], coords[j], z));
                wts.push(w1[i] * w1[j]);
            }
        }
    }
    NurbsPatch::new(vec![kv_deg2(), kv_deg2(), kv_deg1()], cps, wts)
}

/// Build the verification domain: conductor cylinder, air gap, separating
/// interface shell, and truncated exterior.
pub fn build_cylinder_domain(geo: &GeometryParams) -> Result<MultipatchDomain> {
    geo.validate()?;

    // Radial zone boundaries, inner to outer. The center square block has
    // the conceptual boundary index 0.
    let mut boundaries: Vec<SectionBoundary> = vec![
        SectionBoundary::Square(geo.square_half_width),
        SectionBoundary::Circle(geo.r_conductor),
    ];
    if geo.split_inner_ring {
        boundaries.push(SectionBoundary::Circle(0.5 * (geo.r_conductor + geo.r_interface)));
    }
    let gamma_boundary = match geo.shape {
        InterfaceShape::Cylinder => SectionBoundary::Circle(geo.r_interface),
        InterfaceShape::Box => SectionBoundary::Square(geo.r_interface),
    };
    boundaries.push(gamma_boundary);
    let gamma_zone = boundaries.len() - 1;
    boundaries.push(match geo.shape {
        InterfaceShape::Cylinder => SectionBoundary::Circle(geo.r_outer),
        InterfaceShape::Box => SectionBoundary::Square(geo.r_outer),
    });
    let n_zones = boundaries.len(); // zone 0 = square, zone j = ring j

    // Axial layer breaks.
    let hc = geo.h_conductor / 2.0;
    let mut z_breaks = vec![-geo.z_outer, -geo.z_interface, -hc];
    if geo.split_conductor_z {
        z_breaks.push(0.0);
    }
    z_breaks.extend([hc, geo.z_interface, geo.z_outer]);

    let conductor_mat = Material { mu: MU_0 * geo.mu_r_conductor, sigma: geo.sigma };
    let air = Material { mu: MU_0, sigma: 0.0 };

    let mut patches = Vec::new();
    let mut materials = Vec::new();
    let mut labels = Vec::new();
    let mut tags = Vec::new();

    for layer in 0..z_breaks.len() - 1 {
        let (z0, z1) = (z_breaks[layer], z_breaks[layer + 1]);
        let in_conductor_span = z0 >= -hc - 1e-15 && z1 <= hc + 1e-15;
        let in_gamma_span = z0 >= -geo.z_interface - 1e-15 && z1 <= geo.z_interface + 1e-15;
        for zone in 0..n_zones {
            let quadrants: usize = if zone == 0 { 1 } else { 4 };
            for quadrant in 0..quadrants {
                let patch = if zone == 0 {
                    square_patch(geo.square_half_width, z0, z1)?
                } else {
                    ring_patch(boundaries[zone - 1], boundaries[zone], quadrant, z0, z1)?
                };
                let conductor = zone <= 1 && in_conductor_span;
                let interior = zone <= gamma_zone && in_gamma_span;
                patches.push(patch);
                materials.push(if conductor { conductor_mat } else { air });
                labels.push(if conductor {
                    RegionLabel::Conductor
                } else if interior {
                    RegionLabel::InteriorAir
                } else {
                    RegionLabel::ExteriorAir
                });
                tags.push(PatchTag { layer, zone, quadrant });
            }
        }
    }

    MultipatchDomain::from_patches(patches, materials, labels, tags)
}

/// Per-patch, per-direction element breakpoints for a field discretization.
///
/// The interior region refines uniformly with `n` elements per direction.
/// Optionally the outermost ring uses geometrically graded radial elements
/// and the outermost axial layers use about half the axial resolution, so
/// exterior cost grows slower than interior cost without breaking
/// conformity of shared faces.
#[derive(Debug, Clone, Copy)]
pub struct MeshPolicy {
    pub n: usize,
    pub grade_outer: bool,
    /// Geometric growth factor of graded radial elements.
    pub grading_ratio: f64,
}

impl MeshPolicy {
    pub fn uniform(n: usize) -> Self {
        MeshPolicy { n, grade_outer: false, grading_ratio: 1.8 }
    }

    pub fn graded(n: usize) -> Self {
        MeshPolicy { n, grade_outer: true, grading_ratio: 1.8 }
    }
}

fn uniform_breaks(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

fn graded_breaks(n: usize, ratio: f64) -> Vec<f64> {
    if n == 1 || (ratio - 1.0).abs() < 1e-12 {
        return uniform_breaks(n);
    }
    let total = (ratio.powi(n as i32) - 1.0) / (ratio - 1.0);
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..n {
        acc += ratio.powi(i as i32) / total;
        out.push(acc.min(1.0));
    }
    *out.last_mut().unwrap() = 1.0;
    out
}

impl MultipatchDomain {
    /// Element breakpoints for each patch and direction under `policy`.
    pub fn field_breakpoints(&self, policy: &MeshPolicy) -> Vec<[Vec<f64>; 3]> {
        let n = policy.n.max(1);
        let outer_zone = self.n_zones() - 1;
        let last_layer = self.n_layers() - 1;
        self.tags
            .iter()
            .map(|tag| {
                let radial = if policy.grade_outer && tag.zone == outer_zone {
                    graded_breaks(n, policy.grading_ratio)
                } else {
                    uniform_breaks(n)
                };
                let axial = if policy.grade_outer && (tag.layer == 0 || tag.layer == last_layer) {
                    uniform_breaks(n.div_ceil(2))
                } else {
                    uniform_breaks(n)
                };
                [radial, uniform_breaks(n), axial]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_geo() -> GeometryParams {
        GeometryParams {
            r_conductor: 12e-3,
            h_conductor: 60e-3,
            r_interface: 18e-3,
            z_interface: 40e-3,
            r_outer: 70e-3,
            z_outer: 70e-3,
            square_half_width: 6e-3,
            shape: InterfaceShape::Cylinder,
            split_conductor_z: false,
            split_inner_ring: false,
            sigma: 35e6,
            mu_r_conductor: 1.0,
        }
    }

    #[test]
    fn verification_domain_builds() {
        let dom = build_cylinder_domain(&small_geo()).unwrap();
        // 5 axial layers x (1 square + 3 rings x 4 quadrants)
        assert_eq!(dom.n_patches(), 5 * 13);
        assert_eq!(dom.interior_patches().len(), 3 * 9);
        assert_eq!(dom.conductor_patches().len(), 5);
        // Interface: 4 quadrants x 3 layers on the side, 9 faces per cap.
        assert_eq!(dom.interface_faces().len(), 12 + 18);
    }

    #[test]
    fn split_domain_builds() {
        let mut geo = small_geo();
        geo.split_conductor_z = true;
        geo.split_inner_ring = true;
        let dom = build_cylinder_domain(&geo).unwrap();
        assert_eq!(dom.n_patches(), 6 * 17);
        assert_eq!(dom.interior_patches().len(), 4 * 13);
        assert_eq!(dom.conductor_patches().len(), 10);
    }

    #[test]
    fn box_domain_builds() {
        let mut geo = small_geo();
        geo.shape = InterfaceShape::Box;
        let dom = build_cylinder_domain(&geo).unwrap();
        assert_eq!(dom.n_patches(), 5 * 13);
        assert!(!dom.interface_faces().is_empty());
    }

    #[test]
    fn degenerate_interface_rejected() {
        let mut geo = small_geo();
        geo.r_interface = geo.r_conductor;
        assert!(build_cylinder_domain(&geo).is_err());
    }

    #[test]
    fn conductor_volume_matches_cylinder() {
        let geo = small_geo();
        let dom = build_cylinder_domain(&geo).unwrap();
        let vol = dom.volume(&dom.conductor_patches(), 12).unwrap();
        let exact = std::f64::consts::PI * geo.r_conductor.powi(2) * geo.h_conductor;
        assert_relative_eq!(vol, exact, max_relative = 1e-10);
    }

    #[test]
    fn gamma_is_closed_with_exact_area() {
        let geo = small_geo();
        let dom = build_cylinder_domain(&geo).unwrap();
        let (integral, area) = dom.gamma_normal_integral(10).unwrap();
        assert!(integral.norm() < 1e-12 * area);
        let exact = 2.0 * std::f64::consts::PI * geo.r_interface * (2.0 * geo.z_interface)
            + 2.0 * std::f64::consts::PI * geo.r_interface.powi(2);
        assert_relative_eq!(area, exact, max_relative = 1e-9);
    }

    #[test]
    fn interfaces_conform_pointwise() {
        // Trace evaluations of both patch maps agree at random face points.
        let dom = build_cylinder_domain(&small_geo()).unwrap();
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for itf in &dom.interfaces {
            let ta = itf.face_a.tangent_axes();
            let tb = itf.face_b.tangent_axes();
            for _ in 0..4 {
                let s = [next(), next()];
                let mut xa = [0.0; 3];
                xa[itf.face_a.axis] = if itf.face_a.upper { 1.0 } else { 0.0 };
                xa[ta[0]] = s[0];
                xa[ta[1]] = s[1];
                // Map the continuous face coordinates through the transform.
                let (mut c1, mut c2) = if itf.transform.swap { (s[1], s[0]) } else { (s[0], s[1]) };
                if itf.transform.flip[0] {
                    c1 = 1.0 - c1;
                }
                if itf.transform.flip[1] {
                    c2 = 1.0 - c2;
                }
                let mut xb = [0.0; 3];
                xb[itf.face_b.axis] = if itf.face_b.upper { 1.0 } else { 0.0 };
                xb[tb[0]] = c1;
                xb[tb[1]] = c2;
                let pa = dom.patches[itf.patch_a].point(&xa).unwrap();
                let pb = dom.patches[itf.patch_b].point(&xb).unwrap();
                assert!(
                    (pa - pb).norm() < 1e-12 * dom.patches[itf.patch_a].bbox_diameter(),
                    "interface mismatch {:?}: {pa:?} vs {pb:?}",
                    itf
                );
            }
        }
    }

    #[test]
    fn graded_breakpoints_conform() {
        let mut geo = small_geo();
        geo.split_inner_ring = true;
        let dom = build_cylinder_domain(&geo).unwrap();
        let breaks = dom.field_breakpoints(&MeshPolicy::graded(4));
        // Same radial breakpoints across all outer-ring patches.
        let outer = dom.n_zones() - 1;
        let mut reference: Option<&Vec<f64>> = None;
        for (p, tag) in dom.tags.iter().enumerate() {
            if tag.zone == outer {
                match reference {
                    None => reference = Some(&breaks[p][0]),
                    Some(r) => assert_eq!(r, &breaks[p][0]),
                }
            }
        }
        // Graded radial spacing increases outward.
        let r = reference.unwrap();
        for w in r.windows(3) {
            assert!(w[2] - w[1] > w[1] - w[0]);
        }
    }
}
