//! Complete elliptic integrals K(m) and E(m) via the arithmetic-geometric
//! mean, with the parameter convention m = k^2.

use std::f64::consts::PI;

const MAX_ITER: usize = 40;
const EPS: f64 = 1e-15;

/// Complete elliptic integral of the first kind, K(m) with m = k^2.
///
/// K(m) = pi / (2 AGM(1, sqrt(1-m))). Valid for m in [0, 1).
pub fn ellipk(m: f64) -> f64 {
    if !(0.0..1.0).contains(&m) {
        if m == 1.0 {
            return f64::INFINITY;
        }
        return f64::NAN;
    }
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..MAX_ITER {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (a - b).abs() < EPS * an {
            return PI / (2.0 * an);
        }
        a = an;
        b = bn;
    }
    PI / (a + b)
}

/// Complete elliptic integral of the second kind, E(m) with m = k^2.
///
/// Uses the AGM sum E(m) = K(m) (1 - sum_i 2^{i-1} c_i^2). Valid for m in [0, 1].
pub fn ellipe(m: f64) -> f64 {
    if !(0.0..=1.0).contains(&m) {
        return f64::NAN;
    }
    if m == 1.0 {
        return 1.0;
    }
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    // sum_{n>=0} 2^{n-1} c_n^2 with c_0^2 = m
    let mut sum = 0.5 * m;
    let mut pow2 = 0.5;
    for _ in 0..MAX_ITER {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        pow2 *= 2.0;
        sum += pow2 * c * c;
        a = an;
        b = bn;
        if c.abs() < EPS * an {
            break;
        }
    }
    PI / (2.0 * a) * (1.0 - sum)
}
