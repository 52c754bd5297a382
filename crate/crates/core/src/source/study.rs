//! Quadrature accuracy study: L2 error of the quadrature-evaluated source
//! potential against the closed-form loop solution, over the inner region.

use rayon::prelude::*;

use nalgebra::Vector3;

use crate::error::Result;
use crate::source::{CircularLoop, CoilSource, KernelRule, SourceField};

/// One row of the quadrature study table.
#[derive(Debug, Clone)]
pub struct QuadStudyRow {
    pub rule: &'static str,
    pub n_quad: usize,
    /// Relative L2 error over the sampled region.
    pub l2_error: f64,
}

/// Relative L2(region) error of the quadrature source potential against
/// the analytic loop for every rule in `rules`.
///
/// `points` are physical quadrature points with weights (from
/// [`crate::domain::MultipatchDomain::quadrature_points`]); the coil must
/// be the circular loop described by `loop_spec`.
pub fn quadrature_study(
    coil: &CoilSource,
    loop_spec: &CircularLoop,
    points: &[(Vector3<f64>, f64)],
    rules: &[KernelRule],
) -> Result<Vec<QuadStudyRow>> {
    let reference: Vec<Vector3<f64>> = points.iter().map(|&(p, _)| loop_spec.a_at(p)).collect();
    let ref_norm_sq: f64 = points
        .iter()
        .zip(&reference)
        .map(|(&(_, w), a)| w * a.norm_squared())
        .sum();

    let mut rows = Vec::with_capacity(rules.len());
    for rule in rules {
        let field = SourceField::new(coil, rule)?;
        let err_sq: f64 = points
            .par_iter()
            .zip(reference.par_iter())
            .map(|(&(p, w), a_ref)| {
                let a = field.a_at(p).expect("study points lie off the coil");
                w * (a - a_ref).norm_squared()
            })
            .sum();
        rows.push(QuadStudyRow {
            rule: rule.name(),
            n_quad: rule.n_quad(),
            l2_error: (err_sq / ref_norm_sq).sqrt(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_cylinder_domain, GeometryParams};

    #[test]
    fn trapezoidal_decays_geometrically() {
        let geo = GeometryParams::verification(12e-3, 60e-3, 35e6);
        let dom = build_cylinder_domain(&geo).unwrap();
        let pts = dom.quadrature_points(&dom.interior_patches(), 1, 4).unwrap();
        let coil = CoilSource::circle(25e-3, 0.0, 320.0, 1).unwrap();
        let spec = CircularLoop { radius: 25e-3, z_plane: 0.0, ampere_turns: 320.0 };
        let rules: Vec<KernelRule> = [2usize, 4, 8, 16, 32]
            .iter()
            .map(|&n| KernelRule::Trapezoidal { n_quad: n })
            .collect();
        let rows = quadrature_study(&coil, &spec, &pts, &rules).unwrap();
        for w in rows.windows(2) {
            assert!(
                w[1].l2_error < w[0].l2_error,
                "error must decay monotonically: {:?}",
                rows
            );
        }
        // Geometric decay: each doubling gains at least a factor 4.
        for w in rows.windows(2) {
            assert!(w[0].l2_error / w[1].l2_error > 4.0);
        }
    }
}
