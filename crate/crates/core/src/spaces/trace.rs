//! Surface quadrature on the separating interface and tangential trace
//! evaluation of discrete fields.

use nalgebra::{Matrix3, Vector3};

use crate::domain::{GammaFace, MultipatchDomain};
use crate::error::{Error, Result};
use crate::math::GaussRule;
use crate::spaces::CurlSpace;
use crate::C64;

/// Side of the interface a quadrature rule is parameterized on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaSide {
    Interior,
    Exterior,
}

/// One surface quadrature point on the interface.
#[derive(Debug, Clone, Copy)]
pub struct SurfPoint {
    /// Local patch (in the owning space) the point is parameterized on.
    pub local_patch: usize,
    pub xi: [f64; 3],
    /// Domain patch id on the other side of the interface.
    pub other_patch: usize,
    pub xi_other: [f64; 3],
    pub x: Vector3<f64>,
    /// Unit normal pointing from the interior into the exterior region.
    pub n: Vector3<f64>,
    /// Quadrature weight times surface Jacobian (m^2).
    pub ds: f64,
    /// Geometry Jacobian at the point, on the parameterizing side.
    pub jac: Matrix3<f64>,
}

/// Tensor-Gauss quadrature over all interface faces, with elements taken
/// from a curl space so the rule is exact per field element.
#[derive(Debug, Clone)]
pub struct SurfaceQuadrature {
    pub side: GammaSide,
    pub points: Vec<SurfPoint>,
    /// Per interface face: range of this face's points in `points`.
    pub per_face: Vec<std::ops::Range<usize>>,
}

impl SurfaceQuadrature {
    pub fn on_gamma(
        space: &CurlSpace,
        gamma: &[GammaFace],
        side: GammaSide,
        q: usize,
    ) -> Result<Self> {
        let domain = space.domain();
        let rule = GaussRule::legendre(q);
        let mut points = Vec::new();
        let mut per_face = Vec::with_capacity(gamma.len());
        for gf in gamma {
            let face_start = points.len();
            let (pid, face, other_pid) = match side {
                GammaSide::Interior => (gf.int_patch, gf.int_face, gf.ext_patch),
                GammaSide::Exterior => (gf.ext_patch, gf.ext_face, gf.int_patch),
            };
            let Some(local) = space.local_patch(pid) else {
                return Err(Error::InvalidSpace(format!(
                    "interface patch {pid} is not part of the space"
                )));
            };
            let other_face = match side {
                GammaSide::Interior => gf.ext_face,
                GammaSide::Exterior => gf.int_face,
            };
            let [t1, t2] = face.tangent_axes();
            let [o1, o2] = other_face.tangent_axes();
            let pin = if face.upper { 1.0 } else { 0.0 };
            let pin_other = if other_face.upper { 1.0 } else { 0.0 };
            let dirs = space.dir_basis(local);
            let b1 = dirs[t1].scalar.breakpoints();
            let b2 = dirs[t2].scalar.breakpoints();
            for e1 in b1.windows(2) {
                for e2 in b2.windows(2) {
                    for (u, wu) in rule.mapped(e1[0], e1[1]) {
                        for (v, wv) in rule.mapped(e2[0], e2[1]) {
                            let mut xi = [pin; 3];
                            xi[t1] = u;
                            xi[t2] = v;
                            let scaled = domain.face_normal_scaled(pid, face, &xi)?;
                            let sign = match side {
                                GammaSide::Interior => 1.0,
                                GammaSide::Exterior => -1.0,
                            };
                            let ds = scaled.norm() * wu * wv;
                            let n = scaled.normalize() * sign;
                            let ev = domain.patches[pid].eval(&xi)?;
                            // Face coordinates on the other side.
                            let c = match side {
                                GammaSide::Interior => gf.transform.map_coords([u, v]),
                                GammaSide::Exterior => gf.transform.inverse().map_coords([u, v]),
                            };
                            let mut xi_other = [pin_other; 3];
                            xi_other[o1] = c[0];
                            xi_other[o2] = c[1];
                            points.push(SurfPoint {
                                local_patch: local,
                                xi,
                                other_patch: other_pid,
                                xi_other,
                                x: ev.point,
                                n,
                                ds,
                                jac: ev.jac,
                            });
                        }
                    }
                }
            }
            per_face.push(face_start..points.len());
        }
        Ok(SurfaceQuadrature { side, points, per_face })
    }

    /// Total interface area covered by the rule (diagnostic).
    pub fn area(&self) -> f64 {
        self.points.iter().map(|p| p.ds).sum()
    }
}

/// Trace-space view of a volume space on the interface: the set of volume
/// dofs with nonzero tangential trace plus a surface quadrature resolving
/// them. The restriction map is the identity on `active_dofs`.
#[derive(Debug)]
pub struct TraceSpace {
    pub quad: SurfaceQuadrature,
    /// Volume dofs with nonzero tangential trace on the interface.
    pub active_dofs: Vec<u32>,
}

impl TraceSpace {
    pub fn new(
        space: &CurlSpace,
        gamma: &[GammaFace],
        side: GammaSide,
        q: usize,
    ) -> Result<Self> {
        let quad = SurfaceQuadrature::on_gamma(space, gamma, side, q)?;
        let mut active = Vec::new();
        for gf in gamma {
            let (pid, face) = match side {
                GammaSide::Interior => (gf.int_patch, gf.int_face),
                GammaSide::Exterior => (gf.ext_patch, gf.ext_face),
            };
            let local = space
                .local_patch(pid)
                .ok_or_else(|| Error::InvalidSpace("interface patch not in space".into()))?;
            active.extend(space.face_tangential_dofs(local, face));
        }
        active.sort_unstable();
        active.dedup();
        Ok(TraceSpace { quad, active_dofs: active })
    }
}

/// Whether traces evaluate on the parameterizing side or across the
/// interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    Same,
    Other,
}

/// Tangential Dirichlet trace u x n of a discrete field at a surface point.
pub fn dirichlet_trace(
    space: &CurlSpace,
    coeffs: &[C64],
    pt: &SurfPoint,
    side: TraceSide,
) -> Result<Vector3<C64>> {
    let (u, _) = eval_on_side(space, coeffs, pt, side)?;
    Ok(cross_cn(&u, &pt.n))
}

/// Neumann trace (curl u / mu) x n of a discrete field at a surface point.
pub fn neumann_trace(
    space: &CurlSpace,
    coeffs: &[C64],
    inv_mu: f64,
    pt: &SurfPoint,
    side: TraceSide,
) -> Result<Vector3<C64>> {
    let (_, curl) = eval_on_side(space, coeffs, pt, side)?;
    Ok(cross_cn(&(curl * C64::new(inv_mu, 0.0)), &pt.n))
}

fn eval_on_side(
    space: &CurlSpace,
    coeffs: &[C64],
    pt: &SurfPoint,
    side: TraceSide,
) -> Result<(Vector3<C64>, Vector3<C64>)> {
    match side {
        TraceSide::Same => Ok(space.eval_field(pt.local_patch, &pt.xi, coeffs)),
        TraceSide::Other => {
            let Some(local) = space.local_patch(pt.other_patch) else {
                return Err(Error::InvalidSpace(format!(
                    "other-side patch {} not in space",
                    pt.other_patch
                )));
            };
            Ok(space.eval_field(local, &pt.xi_other, coeffs))
        }
    }
}

/// Cross product of a complex vector with a real vector.
pub fn cross_cn(a: &Vector3<C64>, n: &Vector3<f64>) -> Vector3<C64> {
    Vector3::new(
        a.y * n.z - a.z * n.y,
        a.z * n.x - a.x * n.z,
        a.x * n.y - a.y * n.x,
    )
}

/// Norm of a complex 3-vector.
pub fn cnorm(a: &Vector3<C64>) -> f64 {
    (a.x.norm_sqr() + a.y.norm_sqr() + a.z.norm_sqr()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_cylinder_domain, GeometryParams};
    use crate::domain::MeshPolicy;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn setup(n: usize, p: usize) -> (Arc<MultipatchDomain>, CurlSpace) {
        let geo = GeometryParams::verification(12e-3, 60e-3, 35e6);
        let dom = Arc::new(build_cylinder_domain(&geo).unwrap());
        let breaks = dom.field_breakpoints(&MeshPolicy::uniform(n));
        let all: Vec<usize> = (0..dom.n_patches()).collect();
        let space = CurlSpace::build(&dom, &all, p, &breaks).unwrap();
        (dom, space)
    }

    #[test]
    fn quadrature_recovers_interface_area() {
        let (dom, space) = setup(2, 1);
        let squad =
            SurfaceQuadrature::on_gamma(&space, dom.interface_faces(), GammaSide::Interior, 3)
                .unwrap();
        let geo = GeometryParams::verification(12e-3, 60e-3, 35e6);
        let exact = 2.0 * std::f64::consts::PI * geo.r_interface * (2.0 * geo.z_interface)
            + 2.0 * std::f64::consts::PI * geo.r_interface.powi(2);
        assert_relative_eq!(squad.area(), exact, max_relative = 1e-6);
    }

    #[test]
    fn both_sides_see_the_same_points() {
        let (dom, space) = setup(1, 1);
        let qi = SurfaceQuadrature::on_gamma(&space, dom.interface_faces(), GammaSide::Interior, 2)
            .unwrap();
        for pt in &qi.points {
            // Physical point reproduced from the other side's coordinates.
            let other = dom.patches[pt.other_patch].point(&pt.xi_other).unwrap();
            assert!((pt.x - other).norm() < 1e-11);
        }
    }

    #[test]
    fn normals_point_outward_and_match_across_sides() {
        let (dom, space) = setup(1, 1);
        let qi = SurfaceQuadrature::on_gamma(&space, dom.interface_faces(), GammaSide::Interior, 2)
            .unwrap();
        let qe = SurfaceQuadrature::on_gamma(&space, dom.interface_faces(), GammaSide::Exterior, 2)
            .unwrap();
        // Side faces: outward normal has positive radial component; caps:
        // positive z-component above the midplane.
        for pt in &qi.points {
            let radial = Vector3::new(pt.x.x, pt.x.y, 0.0);
            if radial.norm() > 17.9e-3 {
                assert!(pt.n.dot(&radial) > 0.0);
            } else if pt.x.z > 0.0 {
                assert!(pt.n.z > 0.9);
            } else {
                assert!(pt.n.z < -0.9);
            }
        }
        assert_relative_eq!(qi.area(), qe.area(), max_relative = 1e-12);
    }

    #[test]
    fn dirichlet_trace_of_matching_tangential_field() {
        // A globally tangentially-continuous random field has the same
        // Dirichlet trace from both sides of the interface.
        let (dom, space) = setup(1, 2);
        let coeffs: Vec<C64> = (0..space.n_dofs)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let squad = SurfaceQuadrature::on_gamma(&space, dom.interface_faces(), GammaSide::Interior, 2)
            .unwrap();
        for pt in squad.points.iter().step_by(7) {
            let t_int = dirichlet_trace(&space, &coeffs, pt, TraceSide::Same).unwrap();
            let t_ext = dirichlet_trace(&space, &coeffs, pt, TraceSide::Other).unwrap();
            let diff = cnorm(&(t_int - t_ext));
            assert!(diff < 1e-10 * cnorm(&t_int).max(1e-12), "trace jump {diff:e}");
        }
    }
}
