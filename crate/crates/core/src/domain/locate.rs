//! Inverse patch maps: find the patch and reference coordinates of a
//! physical point by damped Newton iteration.

use nalgebra::Vector3;

use crate::domain::MultipatchDomain;
use crate::error::Result;

/// Outcome of locating a physical point in the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocateResult {
    Inside { patch: usize, xi: [f64; 3] },
    Outside,
}

impl MultipatchDomain {
    /// Locate a physical point. Points on shared faces resolve to the
    /// lowest patch id because patches are scanned in ascending order.
    pub fn locate(&self, point: Vector3<f64>) -> Result<LocateResult> {
        for (pid, patch) in self.patches.iter().enumerate() {
            let (lo, hi) = patch.bbox();
            let pad = 1e-9 * patch.bbox_diameter();
            if point.x < lo.x - pad
                || point.y < lo.y - pad
                || point.z < lo.z - pad
                || point.x > hi.x + pad
                || point.y > hi.y + pad
                || point.z > hi.z + pad
            {
                continue;
            }
            if let Some(xi) = invert_patch(patch, point)? {
                return Ok(LocateResult::Inside { patch: pid, xi });
            }
        }
        Ok(LocateResult::Outside)
    }
}

/// Damped, clamped Newton on F(xi) = x. Multi-start from the cell centers
/// of a coarse grid; returns None when the point is not in this patch.
fn invert_patch(patch: &crate::spline::NurbsPatch, x: Vector3<f64>) -> Result<Option<[f64; 3]>> {
    let diam = patch.bbox_diameter();
    let tol = 1e-10 * diam;
    let starts = [0.5, 0.25, 0.75];
    for &su in &starts {
        for &sv in &starts {
            for &sw in &starts {
                if let Some(xi) = newton_from(patch, x, [su, sv, sw], tol)? {
                    return Ok(Some(xi));
                }
            }
        }
    }
    Ok(None)
}

fn newton_from(
    patch: &crate::spline::NurbsPatch,
    x: Vector3<f64>,
    start: [f64; 3],
    tol: f64,
) -> Result<Option<[f64; 3]>> {
    let mut xi = start;
    for _ in 0..60 {
        let ev = patch.eval(&xi)?;
        let r = x - ev.point;
        if r.norm() <= tol {
            return Ok(Some(xi));
        }
        let Some(inv) = ev.jac.try_inverse() else {
            return Ok(None);
        };
        let step = inv * r;
        // Damp long steps; keep the iterate inside the reference cube where
        // the map is defined. Boundary solutions are reached by sliding.
        let scale = (1.0f64).min(0.5 / step.amax().max(1e-30));
        for d in 0..3 {
            xi[d] = (xi[d] + scale * step[d]).clamp(0.0, 1.0);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::builders::{build_cylinder_domain, GeometryParams};

    fn domain() -> MultipatchDomain {
        build_cylinder_domain(&GeometryParams::verification(12e-3, 60e-3, 35e6)).unwrap()
    }

    #[test]
    fn round_trip() {
        let dom = domain();
        for pid in [0usize, 3, 20, 40, 60] {
            let xi = [0.3, 0.7, 0.2];
            let x = dom.patches[pid].point(&xi).unwrap();
            match dom.locate(x).unwrap() {
                LocateResult::Inside { patch, xi: found } => {
                    // The found patch must reproduce the physical point even if
                    // the point lies on a face shared with a lower patch id.
                    let y = dom.patches[patch].point(&found).unwrap();
                    assert!((x - y).norm() <= 1e-9 * dom.patches[patch].bbox_diameter());
                    if patch == pid {
                        for d in 0..3 {
                            assert!((found[d] - xi[d]).abs() < 1e-8);
                        }
                    }
                }
                LocateResult::Outside => panic!("point should be inside"),
            }
        }
    }

    #[test]
    fn outside_point() {
        let dom = domain();
        let res = dom.locate(Vector3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(res, LocateResult::Outside);
    }

    #[test]
    fn shared_face_prefers_lowest_patch_id() {
        let dom = domain();
        // A point on the conductor surface (radial interface of zones 1|2)
        // in the mid-height layer, east quadrant.
        let x = Vector3::new(12e-3, 0.0, 1e-3);
        match dom.locate(x).unwrap() {
            LocateResult::Inside { patch, .. } => {
                // Both the zone-1 and zone-2 east patches contain the point;
                // the deterministic answer is the lower id.
                let candidates: Vec<usize> = (0..dom.n_patches())
                    .filter(|&p| {
                        let (lo, hi) = dom.patches[p].bbox();
                        x.x >= lo.x - 1e-12
                            && x.x <= hi.x + 1e-12
                            && x.y >= lo.y - 1e-12
                            && x.y <= hi.y + 1e-12
                            && x.z >= lo.z - 1e-12
                            && x.z <= hi.z + 1e-12
                    })
                    .collect();
                assert_eq!(patch, *candidates.first().unwrap());
            }
            LocateResult::Outside => panic!("point should be inside"),
        }
    }
}
