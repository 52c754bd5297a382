//! Sparse direct solves with residual verification.
//!
//! Factorization is delegated to faer's sparse LU; every solve is checked
//! against the relative-residual contract and refined once if needed.

use faer::prelude::*;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};

use crate::error::{Error, Result};
use crate::solver::csr::{Csr, Scalar};
use crate::C64;

/// Relative residual every solve must meet.
pub const SOLVE_TOL: f64 = 1e-10;

/// Sparse LU of a structurally and numerically symmetric CSR matrix.
/// Symmetry lets the row-compressed data feed the column-compressed
/// factorization directly.
pub enum Factorization {
    Real(faer::sparse::solvers::Lu<usize, f64>),
    Complex(faer::sparse::solvers::Lu<usize, c64>),
}

fn to_faer<T: Scalar + faer::traits::ComplexField>(a: &Csr<T>) -> Result<SparseColMat<usize, T>> {
    let col_ptr: Vec<usize> = a.row_ptr.clone();
    let row_idx: Vec<usize> = a.cols.iter().map(|&c| c as usize).collect();
    let symbolic = SymbolicSparseColMat::new_checked(a.n, a.n, col_ptr, None, row_idx);
    Ok(SparseColMat::new(symbolic, a.vals.to_vec()))
}

impl Factorization {
    pub fn real(a: &Csr<f64>) -> Result<Self> {
        debug_assert!(a.max_asymmetry() <= 1e-10 * max_abs(a), "matrix must be symmetric");
        let mat = to_faer(a)?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::SolveFailed(format!("sparse LU failed: {e:?}")))?;
        Ok(Factorization::Real(lu))
    }

    pub fn complex(a: &Csr<C64>) -> Result<Self> {
        debug_assert!(a.max_asymmetry() <= 1e-10 * max_abs(a), "matrix must be symmetric");
        let mat = to_faer(a)?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::SolveFailed(format!("sparse LU failed: {e:?}")))?;
        Ok(Factorization::Complex(lu))
    }

    fn solve_raw_real(&self, b: &[f64]) -> Vec<f64> {
        let Factorization::Real(lu) = self else {
            panic!("real rhs on complex factorization")
        };
        let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        let x = lu.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    fn solve_raw_complex(&self, b: &[C64]) -> Vec<C64> {
        let Factorization::Complex(lu) = self else {
            panic!("complex rhs on real factorization")
        };
        let rhs = Mat::<c64>::from_fn(b.len(), 1, |i, _| b[i]);
        let x = lu.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }
}

fn max_abs<T: Scalar>(a: &Csr<T>) -> f64 {
    a.vals.iter().map(|v| v.abs2().sqrt()).fold(0.0, f64::max)
}

fn norm2<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
}

fn residual_norm<T: Scalar>(a: &Csr<T>, x: &[T], b: &[T]) -> f64 {
    let mut ax = vec![T::ZERO; b.len()];
    a.matvec(x, &mut ax);
    let mut acc = 0.0;
    for i in 0..b.len() {
        acc += (ax[i] - b[i]).abs2();
    }
    acc.sqrt()
}

macro_rules! checked_solve {
    ($name:ident, $t:ty, $raw:ident) => {
        /// Solve with residual check ||Ax-b||/||b|| <= SOLVE_TOL, applying
        /// one step of iterative refinement when needed.
        pub fn $name(fact: &Factorization, a: &Csr<$t>, b: &[$t]) -> Result<Vec<$t>> {
            let bnorm = norm2(b);
            if bnorm == 0.0 {
                return Ok(vec![<$t as Scalar>::ZERO; b.len()]);
            }
            let mut x = fact.$raw(b);
            let mut res = residual_norm(a, &x, b);
            if res / bnorm > SOLVE_TOL {
                // One refinement pass.
                let mut ax = vec![<$t as Scalar>::ZERO; b.len()];
                a.matvec(&x, &mut ax);
                let r: Vec<$t> = b.iter().zip(&ax).map(|(&bi, &axi)| bi - axi).collect();
                let dx = fact.$raw(&r);
                for i in 0..x.len() {
                    x[i] = x[i] + dx[i];
                }
                res = residual_norm(a, &x, b);
            }
            if res / bnorm > SOLVE_TOL {
                return Err(Error::ResidualTooLarge { residual: res / bnorm, tol: SOLVE_TOL });
            }
            Ok(x)
        }
    };
}

checked_solve!(solve_checked_real, f64, solve_raw_real);
checked_solve!(solve_checked_complex, C64, solve_raw_complex);

/// One-shot convenience: factor + checked solve.
pub fn linear_solve_real(a: &Csr<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let f = Factorization::real(a)?;
    solve_checked_real(&f, a, b)
}

pub fn linear_solve_complex(a: &Csr<C64>, b: &[C64]) -> Result<Vec<C64>> {
    let f = Factorization::complex(a)?;
    solve_checked_complex(&f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_csr(m: &[Vec<f64>]) -> Csr<f64> {
        let n = m.len();
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (r, row) in m.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    cols.push(c as u32);
                    vals.push(v);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        Csr { n, row_ptr, cols, vals }
    }

    /// Brute-force Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, piv);
            b.swap(k, piv);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..n {
                s -= a[k][j] * x[j];
            }
            x[k] = s / a[k][k];
        }
        x
    }

    #[test]
    fn identity_returns_rhs() {
        let a = dense_to_csr(&(0..5).map(|i| {
            let mut row = vec![0.0; 5];
            row[i] = 1.0;
            row
        }).collect::<Vec<_>>());
        let b = vec![3.0, -1.0, 0.5, 2.0, 9.0];
        let x = linear_solve_real(&a, &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = dense_to_csr(&vec![vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = linear_solve_real(&a, &[0.0, 0.0]).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn random_spd_against_dense_oracle() {
        // 50x50 SPD built as B^T B + n I, solved both ways.
        let n = 50;
        let mut seed = 0x1234_5678_9abc_def0u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let b_mat: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += b_mat[k][i] * b_mat[k][j];
                }
                a[i][j] = s + if i == j { n as f64 } else { 0.0 };
            }
        }
        let rhs: Vec<f64> = (0..n).map(|_| next()).collect();
        let x_sparse = linear_solve_real(&dense_to_csr(&a), &rhs).unwrap();
        let x_dense = dense_solve(a.clone(), rhs.clone());
        let diff: f64 = x_sparse
            .iter()
            .zip(&x_dense)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale: f64 = x_dense.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff / scale < 1e-10, "sparse vs dense oracle: {diff:e} / {scale:e}");
    }

    #[test]
    fn complex_symmetric_solve() {
        // [[2, -j], [-j, 2]] x = b, complex symmetric (not Hermitian).
        let elements = vec![vec![0u32, 1]];
        let mut k = Csr::<f64>::symbolic_from_elements(2, &elements);
        let mut m = Csr::<f64>::symbolic_from_elements(2, &elements);
        k.add(0, 0, 2.0);
        k.add(1, 1, 2.0);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        let a = Csr::combine_complex(&k, C64::new(1.0, 0.0), &m, C64::new(0.0, -1.0));
        let b = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)];
        let x = linear_solve_complex(&a, &b).unwrap();
        let mut ax = vec![C64::new(0.0, 0.0); 2];
        a.matvec(&x, &mut ax);
        for i in 0..2 {
            assert!((ax[i] - b[i]).norm() < 1e-12);
        }
    }
}
