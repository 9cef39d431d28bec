//! Symmetric sparse matrices in CSR layout and a skyline (envelope)
//! Cholesky factorization.

use crate::error::{Error, Result};

/// Symmetric matrix with both triangles stored in CSR form. Column indices in
/// each row are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Sums duplicate `(row, col, value)` entries. Only the lower triangle
    /// (`col <= row`) is read; it is mirrored to the upper one.
    pub fn from_lower_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        let mut full = Vec::with_capacity(2 * triplets.len());
        for (r, c, v) in triplets.drain(..) {
            debug_assert!(c <= r && r < dim);
            full.push((r, c, v));
            if r != c {
                full.push((c, r, v));
            }
        }
        full.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in full {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, row_ptr, cols, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `xᵀ A y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.dim).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    pub fn sum_entries(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }

    /// `A + s B` for matrices of the same dimension.
    pub fn add_scaled(&self, s: f64, other: &SparseSymMatrix) -> SparseSymMatrix {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for (m, f) in [(self, 1.0), (other, s)] {
            for i in 0..m.dim {
                triplets.extend(m.row(i).filter(|(j, _)| *j <= i).map(|(j, v)| (i, j, f * v)));
            }
        }
        SparseSymMatrix::from_lower_triplets(self.dim, triplets)
    }

    /// Principal submatrix on `keep` (indices in increasing order).
    pub fn restrict(&self, keep: &[usize]) -> SparseSymMatrix {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (old_j, v) in self.row(old_i) {
                let new_j = map[old_j];
                if new_j != usize::MAX && new_j <= new_i {
                    triplets.push((new_i, new_j, v));
                }
            }
        }
        SparseSymMatrix::from_lower_triplets(keep.len(), triplets)
    }
}

/// `A = L Lᵀ` with `L` stored row by row over each row's envelope
/// `first[i] ..= i`.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &SparseSymMatrix) -> Result<Self> {
        let n = a.dim();
        let first: Vec<usize> = (0..n).map(|i| a.row(i).map(|(j, _)| j).next().unwrap_or(i).min(i)).collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(i).filter(|(j, _)| *j <= i) {
                data[start[i] + j - first[i]] = v;
            }
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let (ri, rj) = (start[i] - fi, start[j] - fj);
                let mut s = data[ri + j];
                for k in lo..j {
                    s -= data[ri + k] * data[rj + k];
                }
                if j < i {
                    data[ri + j] = s / data[rj + j];
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::Factorization { pivot: i, value: s });
                    }
                    data[ri + i] = s.sqrt();
                }
            }
        }
        Ok(Self { first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.start[i] + j - self.first[i]]
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        // L y = b
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let mut s = b[i];
            for (k, l) in (fi..i).zip(row) {
                s -= l * b[k];
            }
            b[i] = s / row[i - fi];
        }
        // Lᵀ x = y, column-oriented over the rows of L
        for i in (0..n).rev() {
            b[i] /= self.at(i, i);
            let xi = b[i];
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            for (k, l) in (fi..i).zip(row) {
                b[k] -= l * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseSymMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
        }
        SparseSymMatrix::from_lower_triplets(n, t)
    }

    #[test]
    fn triplets_sum_and_mirror() {
        let m = SparseSymMatrix::from_lower_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (1, 0, 0.5), (1, 1, 3.0)]);
        assert_eq!(m.get(0, 1), 2.5);
        assert_eq!(m.get(1, 0), 2.5);
        assert_eq!(m.nnz(), 4);
        assert!(m.is_symmetric(0.0));
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![3.5, 5.5]);
    }

    #[test]
    fn cholesky_solves() {
        let n = 50;
        let a = laplacian_1d(n);
        let f = SkylineCholesky::factor(&a).unwrap();
        assert_eq!(f.envelope_size(), 2 * n - 1);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x_true);
        let x = f.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn cholesky_variable_envelope() {
        // arrow matrix: last row couples to everything
        let n = 6;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 10.0));
            if i + 1 < n {
                t.push((n - 1, i, 1.0));
            }
        }
        let a = SparseSymMatrix::from_lower_triplets(n, t);
        let f = SkylineCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let x = f.solve(&b);
        let r = a.matvec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_fails() {
        let a = SparseSymMatrix::from_lower_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(SkylineCholesky::factor(&a), Err(Error::Factorization { pivot: 1, .. })));
    }

    #[test]
    fn restrict_and_shift() {
        let a = laplacian_1d(4);
        let r = a.restrict(&[1, 2]);
        assert_eq!(r.get(0, 0), 2.0);
        assert_eq!(r.get(1, 0), -1.0);
        let s = a.add_scaled(0.5, &a);
        assert_eq!(s.get(2, 1), -1.5);
    }
}
