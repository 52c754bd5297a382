//! Compressed sparse row matrices over real or complex scalars, with
//! symbolic patterns built from element connectivity.

use crate::C64;

/// Scalar admitted in system matrices.
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Send
    + Sync
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
    const ZERO: Self;
    fn abs2(self) -> f64;
}

impl Scalar for f64 {
    const ZERO: f64 = 0.0;
    fn abs2(self) -> f64 {
        self * self
    }
}

impl Scalar for C64 {
    const ZERO: C64 = C64::new(0.0, 0.0);
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
}

/// Square CSR matrix with sorted column indices per row.
#[derive(Debug, Clone)]
pub struct Csr<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    /// Pattern from element dof lists: dofs sharing an element couple.
    pub fn symbolic_from_elements(n: usize, element_dofs: &[Vec<u32>]) -> Csr<T> {
        // dof -> elements adjacency
        let mut counts = vec![0usize; n];
        for dofs in element_dofs {
            for &d in dofs {
                counts[d as usize] += 1;
            }
        }
        let mut adj_ptr = vec![0usize; n + 1];
        for i in 0..n {
            adj_ptr[i + 1] = adj_ptr[i] + counts[i];
        }
        let mut adj = vec![0u32; adj_ptr[n]];
        let mut fill = adj_ptr.clone();
        for (e, dofs) in element_dofs.iter().enumerate() {
            for &d in dofs {
                adj[fill[d as usize]] = e as u32;
                fill[d as usize] += 1;
            }
        }

        // Per-row column sets.
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols_per_row: Vec<Vec<u32>> = Vec::with_capacity(n);
        for r in 0..n {
            let mut cols: Vec<u32> = Vec::new();
            for &e in &adj[adj_ptr[r]..adj_ptr[r + 1]] {
                cols.extend_from_slice(&element_dofs[e as usize]);
            }
            cols.sort_unstable();
            cols.dedup();
            row_ptr[r + 1] = row_ptr[r] + cols.len();
            cols_per_row.push(cols);
        }
        let mut cols = Vec::with_capacity(row_ptr[n]);
        for c in cols_per_row {
            cols.extend(c);
        }
        let nnz = cols.len();
        Csr { n, row_ptr, cols, vals: vec![T::ZERO; nnz] }
    }

    /// Add `v` to entry (r, c); the entry must exist in the pattern.
    #[inline]
    pub fn add(&mut self, r: u32, c: u32, v: T) {
        let lo = self.row_ptr[r as usize];
        let hi = self.row_ptr[r as usize + 1];
        let pos = self.cols[lo..hi].binary_search(&c).expect("entry in pattern");
        let val = &mut self.vals[lo + pos];
        *val = *val + v;
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn matvec(&self, x: &[T], out: &mut [T]) {
        for r in 0..self.n {
            let mut acc = T::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc = acc + self.vals[k] * x[self.cols[k] as usize];
            }
            out[r] = acc;
        }
    }

    /// Maximum absolute asymmetry |K - K^T| over matched entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                if c < r {
                    continue;
                }
                let lo = self.row_ptr[c];
                let hi = self.row_ptr[c + 1];
                if let Ok(pos) = self.cols[lo..hi].binary_search(&(r as u32)) {
                    let d = self.vals[k] - self.vals[lo + pos];
                    worst = worst.max(d.abs2().sqrt());
                }
            }
        }
        worst
    }

    /// Extract the reduced system over free dofs. Returns the reduced
    /// matrix and, per free row, the coupling into constrained columns as
    /// a right-hand-side correction: rhs_red[i] = rhs[free[i]] - sum_c
    /// A[free[i], c] x_c.
    pub fn reduce(&self, free: &[u32], reduced_of: &[i64], constrained_values: &[T]) -> (Csr<T>, Vec<T>) {
        let nf = free.len();
        let mut row_ptr = vec![0usize; nf + 1];
        for (i, &f) in free.iter().enumerate() {
            let mut cnt = 0;
            for k in self.row_ptr[f as usize]..self.row_ptr[f as usize + 1] {
                if reduced_of[self.cols[k] as usize] >= 0 {
                    cnt += 1;
                }
            }
            row_ptr[i + 1] = row_ptr[i] + cnt;
        }
        let mut cols = Vec::with_capacity(row_ptr[nf]);
        let mut vals = Vec::with_capacity(row_ptr[nf]);
        let mut correction = vec![T::ZERO; nf];
        for (i, &f) in free.iter().enumerate() {
            for k in self.row_ptr[f as usize]..self.row_ptr[f as usize + 1] {
                let c = self.cols[k] as usize;
                if reduced_of[c] >= 0 {
                    cols.push(reduced_of[c] as u32);
                    vals.push(self.vals[k]);
                } else {
                    correction[i] = correction[i] - self.vals[k] * constrained_values[c];
                }
            }
        }
        (Csr { n: nf, row_ptr, cols, vals }, correction)
    }
}

impl Csr<f64> {
    /// Complex combination a*K + b*M over the union pattern.
    pub fn combine_complex(k: &Csr<f64>, a: C64, m: &Csr<f64>, b: C64) -> Csr<C64> {
        assert_eq!(k.n, m.n);
        let n = k.n;
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols: Vec<u32> = Vec::new();
        let mut vals: Vec<C64> = Vec::new();
        for r in 0..n {
            let (mut i, hi_k) = (k.row_ptr[r], k.row_ptr[r + 1]);
            let (mut j, hi_m) = (m.row_ptr[r], m.row_ptr[r + 1]);
            while i < hi_k || j < hi_m {
                let ck = if i < hi_k { k.cols[i] } else { u32::MAX };
                let cm = if j < hi_m { m.cols[j] } else { u32::MAX };
                if ck < cm {
                    cols.push(ck);
                    vals.push(a * k.vals[i]);
                    i += 1;
                } else if cm < ck {
                    cols.push(cm);
                    vals.push(b * m.vals[j]);
                    j += 1;
                } else {
                    cols.push(ck);
                    vals.push(a * k.vals[i] + b * m.vals[j]);
                    i += 1;
                    j += 1;
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn to_complex(&self) -> Csr<C64> {
        Csr {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }
}
