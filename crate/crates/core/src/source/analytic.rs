//! Closed-form vector potential of a circular current loop, used as the
//! quadrature reference.

use nalgebra::Vector3;

use crate::math::{ellipe, ellipk};
use crate::MU_0;

/// Circular loop of radius `radius` centered on the z axis in the plane
/// z = `z_plane`, carrying `ampere_turns` amperes.
#[derive(Debug, Clone, Copy)]
pub struct CircularLoop {
    pub radius: f64,
    pub z_plane: f64,
    pub ampere_turns: f64,
}

impl CircularLoop {
    /// Azimuthal vector potential in Cartesian components (T m).
    pub fn a_at(&self, r: Vector3<f64>) -> Vector3<f64> {
        analytical_loop_a(self.radius, self.ampere_turns, r - Vector3::new(0.0, 0.0, self.z_plane))
    }
}

/// Vector potential of a circular loop of radius `a` in the plane z = 0,
/// centered on the z axis, carrying `ni` ampere-turns.
///
/// A_phi = (mu0 NI / 4 pi) (4 a / sqrt((a+rho)^2 + z^2))
///         ((2 - k^2) K(k^2) - 2 E(k^2)) / k^2,
/// k^2 = 4 a rho / ((a+rho)^2 + z^2), with the complete elliptic integrals
/// in the m = k^2 convention. On the axis the limit is the zero vector.
pub fn analytical_loop_a(a: f64, ni: f64, r: Vector3<f64>) -> Vector3<f64> {
    let rho = r.xy().norm();
    if rho < 1e-14 * a {
        return Vector3::zeros();
    }
    let z = r.z;
    let denom_sq = (a + rho) * (a + rho) + z * z;
    let denom = denom_sq.sqrt();
    let m = 4.0 * a * rho / denom_sq;
    let a_phi = MU_0 * ni / (4.0 * std::f64::consts::PI) * (4.0 * a / denom)
        * (((2.0 - m) * ellipk(m) - 2.0 * ellipe(m)) / m);
    let phi_hat = Vector3::new(-r.y / rho, r.x / rho, 0.0);
    phi_hat * a_phi
}
