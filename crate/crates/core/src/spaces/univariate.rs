//! Per-direction basis data of a curl-conforming patch space: the scalar
//! degree-p space and its degree-(p-1) derivative space with
//! Curry-Schoenberg scaling.

use crate::math::GaussRule;
use crate::spline::KnotVector;

/// Scalar and derivative univariate spaces along one parametric direction.
#[derive(Debug, Clone)]
pub struct DirBasis {
    pub scalar: KnotVector,
    pub deriv: KnotVector,
    /// Scale factors making differentiation a signed incidence map.
    pub dscale: Vec<f64>,
}

impl DirBasis {
    pub fn new(scalar: KnotVector) -> Self {
        let (deriv, dscale) = scalar.derivative_space();
        DirBasis { scalar, deriv, dscale }
    }

    pub fn degree(&self) -> usize {
        self.scalar.degree()
    }

    pub fn n_scalar(&self) -> usize {
        self.scalar.num_basis()
    }

    pub fn n_deriv(&self) -> usize {
        self.deriv.num_basis()
    }

    pub fn n_elements(&self) -> usize {
        self.scalar.num_elements()
    }

    /// Evaluate the scalar basis: (first active index, values, first derivs).
    pub fn eval_scalar(&self, u: f64) -> (usize, Vec<f64>, Vec<f64>) {
        let b = self.scalar.eval_basis(u, 1).expect("parameter in range");
        let first = b.span - self.scalar.degree();
        let d = b.derivs.into_iter().next().unwrap();
        (first, b.values, d)
    }

    /// Evaluate the scaled derivative basis: (first active index, values,
    /// first derivs), both scaled by the Curry-Schoenberg factors.
    pub fn eval_deriv(&self, u: f64) -> (usize, Vec<f64>, Vec<f64>) {
        let b = self.deriv.eval_basis(u, 1).expect("parameter in range");
        let p1 = self.deriv.degree();
        let first = b.span - p1;
        let mut values = b.values;
        let mut ders = b.derivs.into_iter().next().unwrap();
        for (j, (v, d)) in values.iter_mut().zip(ders.iter_mut()).enumerate() {
            let s = self.dscale[first + j];
            *v *= s;
            *d *= s;
        }
        (first, values, ders)
    }

    /// Tabulate scalar and derivative bases at a Gauss rule per element.
    pub fn tabulate(&self, rule: &GaussRule) -> DirTable {
        let p = self.degree();
        let q = rule.len();
        let spans = self.scalar.element_spans();
        let dspans = self.deriv.element_spans();
        debug_assert_eq!(spans.len(), dspans.len());
        let n_el = spans.len();
        let knots = self.scalar.knots();

        let mut table = DirTable {
            q,
            n_el,
            degree: p,
            s_first: Vec::with_capacity(n_el),
            d_first: Vec::with_capacity(n_el),
            points: Vec::with_capacity(n_el * q),
            weights: Vec::with_capacity(n_el * q),
            s_val: Vec::with_capacity(n_el * q * (p + 1)),
            s_der: Vec::with_capacity(n_el * q * (p + 1)),
            d_val: Vec::with_capacity(n_el * q * p.max(1)),
            d_der: Vec::with_capacity(n_el * q * p.max(1)),
        };

        for (el, (&s, &ds)) in spans.iter().zip(&dspans).enumerate() {
            let (a, b) = (knots[s], knots[s + 1]);
            table.s_first.push(s - p);
            table.d_first.push(ds - (p - 1));
            let _ = el;
            for (u, w) in rule.mapped(a, b) {
                table.points.push(u);
                table.weights.push(w);
                let sb = self.scalar.eval_basis_at_span(s, u, 1);
                table.s_val.extend_from_slice(&sb.values);
                table.s_der.extend_from_slice(&sb.derivs[0]);
                let db = self.deriv.eval_basis_at_span(ds, u, 1);
                for (j, (&v, &d)) in sb_zip(&db.values, &db.derivs[0]).enumerate() {
                    let sc = self.dscale[ds - (p - 1) + j];
                    table.d_val.push(v * sc);
                    table.d_der.push(d * sc);
                }
            }
        }
        table
    }
}

fn sb_zip<'a>(a: &'a [f64], b: &'a [f64]) -> impl Iterator<Item = (&'a f64, &'a f64)> {
    a.iter().zip(b.iter())
}

/// Tabulated univariate bases at per-element Gauss points.
#[derive(Debug, Clone)]
pub struct DirTable {
    pub q: usize,
    pub n_el: usize,
    pub degree: usize,
    /// First active scalar function per element.
    pub s_first: Vec<usize>,
    /// First active derivative function per element.
    pub d_first: Vec<usize>,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    s_val: Vec<f64>,
    s_der: Vec<f64>,
    d_val: Vec<f64>,
    d_der: Vec<f64>,
}

impl DirTable {
    #[inline]
    pub fn scalar_values(&self, el: usize, g: usize) -> &[f64] {
        let n = self.degree + 1;
        let o = (el * self.q + g) * n;
        &self.s_val[o..o + n]
    }

    #[inline]
    pub fn scalar_derivs(&self, el: usize, g: usize) -> &[f64] {
        let n = self.degree + 1;
        let o = (el * self.q + g) * n;
        &self.s_der[o..o + n]
    }

    #[inline]
    pub fn deriv_values(&self, el: usize, g: usize) -> &[f64] {
        let n = self.degree.max(1);
        let o = (el * self.q + g) * n;
        &self.d_val[o..o + n]
    }

    #[inline]
    pub fn deriv_derivs(&self, el: usize, g: usize) -> &[f64] {
        let n = self.degree.max(1);
        let o = (el * self.q + g) * n;
        &self.d_der[o..o + n]
    }

    #[inline]
    pub fn point(&self, el: usize, g: usize) -> f64 {
        self.points[el * self.q + g]
    }

    #[inline]
    pub fn weight(&self, el: usize, g: usize) -> f64 {
        self.weights[el * self.q + g]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tabulation_matches_pointwise() {
        let kv = KnotVector::open_uniform(2, 3);
        let dir = DirBasis::new(kv);
        let rule = GaussRule::legendre(3);
        let table = dir.tabulate(&rule);
        assert_eq!(table.n_el, 3);
        for el in 0..3 {
            for g in 0..3 {
                let u = table.point(el, g);
                let (sf, sv, sd) = dir.eval_scalar(u);
                assert_eq!(sf, table.s_first[el]);
                for j in 0..3 {
                    assert_relative_eq!(sv[j], table.scalar_values(el, g)[j], epsilon = 1e-14);
                    assert_relative_eq!(sd[j], table.scalar_derivs(el, g)[j], epsilon = 1e-12);
                }
                let (df, dv, dd) = dir.eval_deriv(u);
                assert_eq!(df, table.d_first[el]);
                for j in 0..2 {
                    assert_relative_eq!(dv[j], table.deriv_values(el, g)[j], epsilon = 1e-14);
                    assert_relative_eq!(dd[j], table.deriv_derivs(el, g)[j], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn derivative_space_counts() {
        let dir = DirBasis::new(KnotVector::open_uniform(3, 5));
        assert_eq!(dir.n_scalar(), 8);
        assert_eq!(dir.n_deriv(), 7);
        assert_eq!(dir.n_elements(), 5);
    }
}
