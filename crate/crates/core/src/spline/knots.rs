//! Open (clamped) knot vectors and univariate B-spline basis evaluation
//! via the Cox-de-Boor recursion, including derivatives of arbitrary order.

use crate::error::{Error, Result};

/// Open knot vector on the unit interval.
///
/// The first and last knots have multiplicity `degree + 1`; interior
/// multiplicities stay at or below the degree so every basis function is
/// at least continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

/// Values (and optionally derivatives) of the `p+1` basis functions that are
/// nonzero on one knot span.
///
/// `derivs[k-1][j]` is the k-th derivative of basis function `span - p + j`.
#[derive(Debug, Clone)]
pub struct BasisEval {
    pub span: usize,
    pub values: Vec<f64>,
    pub derivs: Vec<Vec<f64>>,
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::InvalidKnots(format!(
                "need at least {} knots for degree {}, got {}",
                2 * (degree + 1),
                degree,
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be nondecreasing".into()));
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
            return Err(Error::InvalidKnots("knots must span [0,1]".into()));
        }
        if knots[degree] != knots[0] || knots[knots.len() - 1 - degree] != knots[knots.len() - 1] {
            return Err(Error::InvalidKnots(format!(
                "end knots must have multiplicity {}",
                degree + 1
            )));
        }
        // Interior multiplicity <= degree keeps basis functions continuous.
        let interior = &knots[degree + 1..knots.len() - degree - 1];
        let mut run = 1;
        for w in interior.windows(2) {
            run = if w[1] == w[0] { run + 1 } else { 1 };
            if run > degree.max(1) {
                return Err(Error::InvalidKnots(format!(
                    "interior knot {} has multiplicity above the degree",
                    w[0]
                )));
            }
        }
        Ok(KnotVector { knots, degree })
    }

    /// Uniform open knot vector with `n_elements` equal spans.
    pub fn open_uniform(degree: usize, n_elements: usize) -> Self {
        assert!(n_elements >= 1);
        let breaks: Vec<f64> = (0..=n_elements)
            .map(|i| i as f64 / n_elements as f64)
            .collect();
        Self::from_breakpoints(degree, &breaks).expect("uniform breakpoints are valid")
    }

    /// Maximally smooth knot vector over the given strictly increasing
    /// breakpoints (first must be 0, last must be 1).
    pub fn from_breakpoints(degree: usize, breaks: &[f64]) -> Result<Self> {
        if breaks.len() < 2 || breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::InvalidKnots("breakpoints must run from 0 to 1".into()));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidKnots("breakpoints must be strictly increasing".into()));
        }
        let mut knots = vec![0.0; degree + 1];
        knots.extend_from_slice(&breaks[1..breaks.len() - 1]);
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Number of nonempty knot spans (elements).
    pub fn num_elements(&self) -> usize {
        self.element_spans().len()
    }

    /// Knot-array indices of the nonempty spans, in increasing order.
    pub fn element_spans(&self) -> Vec<usize> {
        (self.degree..self.num_basis())
            .filter(|&i| self.knots[i + 1] > self.knots[i])
            .collect()
    }

    /// Breakpoints (distinct knot values).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![self.knots[0]];
        for &k in &self.knots {
            if k > *out.last().unwrap() {
                out.push(k);
            }
        }
        out
    }

    /// Multiplicity of a knot value.
    pub fn multiplicity(&self, u: f64) -> usize {
        self.knots.iter().filter(|&&k| k == u).count()
    }

    /// Greville abscissae (knot averages), one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree.max(1);
        (0..self.num_basis())
            .map(|i| self.knots[i + 1..i + 1 + self.degree.max(1)].iter().sum::<f64>() / p as f64)
            .collect()
    }

    /// Index i with knots[i] <= u < knots[i+1]; u = 1 falls in the last
    /// nonempty span.
    pub fn find_span(&self, u: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::ParamOutOfRange { value: u });
        }
        Ok(self.find_span_unchecked(u))
    }

    pub(crate) fn find_span_unchecked(&self, u: f64) -> usize {
        let n = self.num_basis();
        if u >= self.knots[n] {
            let mut i = n - 1;
            while self.knots[i + 1] <= self.knots[i] {
                i -= 1;
            }
            return i;
        }
        let mut lo = self.degree;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Nonzero basis values and derivatives up to `order` at `u`.
    ///
    /// Derivative rows beyond the degree are zero.
    pub fn eval_basis(&self, u: f64, order: usize) -> Result<BasisEval> {
        let span = self.find_span(u)?;
        Ok(self.eval_basis_at_span(span, u, order))
    }

    /// Same as [`eval_basis`](Self::eval_basis) with a known span.
    pub fn eval_basis_at_span(&self, span: usize, u: f64, order: usize) -> BasisEval {
        let p = self.degree;
        let mut values = vec![0.0; p + 1];
        let mut derivs = vec![vec![0.0; p + 1]; order];
        self.eval_into(span, u, &mut values, &mut derivs);
        BasisEval { span, values, derivs }
    }

    /// Core Cox-de-Boor evaluation writing into caller-provided storage.
    pub(crate) fn eval_into(&self, span: usize, u: f64, values: &mut [f64], derivs: &mut [Vec<f64>]) {
        let p = self.degree;
        let knots = &self.knots;
        debug_assert!(values.len() == p + 1);

        // Triangle of basis values and knot differences.
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = u - knots[span + 1 - j];
            right[j] = knots[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        for j in 0..=p {
            values[j] = ndu[j][p];
        }

        let order = derivs.len();
        if order == 0 {
            return;
        }
        for row in derivs.iter_mut() {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        let n_ders = order.min(p);
        let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
        for r in 0..=p {
            let mut s1 = 0;
            let mut s2 = 1;
            a[0].iter_mut().for_each(|v| *v = 0.0);
            a[1].iter_mut().for_each(|v| *v = 0.0);
            a[0][0] = 1.0;
            for k in 1..=n_ders {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    let v = a[s1][0] / ndu[pk + 1][rk as usize];
                    a[s2][0] = v;
                    d = v * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let v = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][(rk + j as isize) as usize];
                    a[s2][j] = v;
                    d += v * ndu[(rk + j as isize) as usize][pk];
                }
                if r <= pk {
                    let v = -a[s1][k - 1] / ndu[pk + 1][r];
                    a[s2][k] = v;
                    d += v * ndu[r][pk];
                }
                derivs[k - 1][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        // Multiply through by p!/(p-k)!.
        let mut factor = p as f64;
        for k in 1..=n_ders {
            for r in 0..=p {
                derivs[k - 1][r] *= factor;
            }
            factor *= (p - k) as f64;
        }
    }

    /// Derivative space: the degree-(p-1) knot vector spanned by first
    /// derivatives, plus the Curry-Schoenberg scale factors that make the
    /// differentiation matrix a plain signed incidence matrix.
    ///
    /// With scaled basis D_j = p/(k_{j+p+1} - k_{j+1}) B_j^{p-1}, the
    /// derivative of sum c_i B_i^p has coefficients c_{j+1} - c_j.
    pub fn derivative_space(&self) -> (KnotVector, Vec<f64>) {
        let p = self.degree;
        assert!(p >= 1, "degree-0 space has no derivative space");
        let trimmed = self.knots[1..self.knots.len() - 1].to_vec();
        let kv = KnotVector::new(p - 1, trimmed).expect("trimmed open vector is valid");
        let scale: Vec<f64> = (0..kv.num_basis())
            .map(|j| p as f64 / (self.knots[j + 1 + p] - self.knots[j + 1]))
            .collect();
        (kv, scale)
    }

    /// Knot vector with `u` inserted, plus the Boehm blending coefficients.
    ///
    /// Control nets are updated by the caller: new point i is
    /// alpha_i * P_i + (1 - alpha_i) * P_{i-1} over the affected window.
    pub fn insert(&self, u: f64) -> Result<KnotInsertion> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidKnots(format!(
                "inserted knot {u} must lie strictly inside (0,1)"
            )));
        }
        if self.multiplicity(u) >= self.degree.max(1) {
            return Err(Error::MultiplicityViolation(u));
        }
        let p = self.degree;
        let span = self.find_span_unchecked(u);
        let mut knots = self.knots.clone();
        knots.insert(span + 1, u);
        let kv = KnotVector::new(p, knots)?;
        // alphas for indices span-p+1 ..= span
        let alphas: Vec<f64> = (span.saturating_sub(p) + 1..=span)
            .map(|i| (u - self.knots[i]) / (self.knots[i + p] - self.knots[i]))
            .collect();
        Ok(KnotInsertion { kv, span, alphas })
    }
}

/// Result of a single univariate knot insertion.
pub struct KnotInsertion {
    pub kv: KnotVector,
    pub span: usize,
    pub alphas: Vec<f64>,
}
