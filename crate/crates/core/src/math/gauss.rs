//! Gauss-Legendre quadrature rules.

/// Gauss-Legendre rule mapped to the reference interval [0,1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    /// Nodes in (0,1).
    pub nodes: Vec<f64>,
    /// Weights summing to 1.
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Rule with `n` points, exact for polynomials of degree 2n-1.
    ///
    /// Nodes are found by Newton iteration on the Legendre polynomial with
    /// the Chebyshev-based initial guess; accuracy is close to machine
    /// precision for any practical `n`.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1, "need at least one quadrature point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Initial guess on [-1,1].
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_pd(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map x in [-1,1] to [0,1]; rule is symmetric.
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to the interval [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (a + h * x, h * w))
    }
}

/// Legendre polynomial P_n and derivative P_n' at x, by recurrence.
fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        // n-point rule integrates x^k for k <= 2n-1 over [0,1].
        for n in 1..=12 {
            let rule = GaussRule::legendre(n);
            for k in 0..=(2 * n - 1) {
                let val: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| w * x.powi(k as i32))
                    .sum();
                assert_relative_eq!(val, 1.0 / (k as f64 + 1.0), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 5, 16, 33, 64] {
            let rule = GaussRule::legendre(n);
            let s: f64 = rule.weights.iter().sum();
            assert_relative_eq!(s, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn mapped_interval() {
        let rule = GaussRule::legendre(6);
        let val: f64 = rule.mapped(-1.0, 3.0).map(|(x, w)| w * x * x).sum();
        // int_{-1}^{3} x^2 dx = (27 + 1)/3
        assert_relative_eq!(val, 28.0 / 3.0, max_relative = 1e-13);
    }
}
