use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use super::scalar::Scalar;

/// Compressed-row sparsity structure with sorted column indices and every
/// diagonal entry present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
}

impl Pattern {
    /// Vertex-adjacency pattern of a triangulation.
    pub fn from_triangles(n: usize, triangles: &[[usize; 3]]) -> Self {
        let mut adjacency: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for t in triangles {
            for &a in t {
                for &b in t {
                    adjacency[a].push(b);
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for mut row in adjacency {
            row.sort_unstable();
            row.dedup();
            cols.extend(row);
            row_ptr.push(cols.len());
        }
        Pattern { row_ptr, cols }
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Storage position of `(i, j)`.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.row(i).binary_search(&j).ok().map(|k| start + k)
    }
}

/// Square sparse matrix over a shared [`Pattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T = f64> {
    pattern: Arc<Pattern>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn zeros(pattern: Arc<Pattern>) -> Self {
        let values = vec![T::zero(); pattern.nnz()];
        CsrMatrix { pattern, values }
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    /// Adds `v` at `(i, j)`; panics if the entry is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self
            .pattern
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) is outside the sparsity pattern"));
        self.values[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.pattern.position(i, j).map_or(T::zero(), |k| self.values[k])
    }

    pub fn matvec<V: Scalar + From<T>>(&self, x: &[V]) -> Vec<V>
    where
        V: std::ops::Mul<V, Output = V>,
    {
        (0..self.n())
            .map(|i| {
                let mut acc = V::zero();
                for k in self.pattern.row_range(i) {
                    acc += V::from(self.values[k]) * x[self.pattern.cols[k]];
                }
                acc
            })
            .collect()
    }

    /// `Σ_ij conj(x_i) A_ij x_j`.
    pub fn quadratic_form(&self, x: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.n() {
            let mut row = Complex64::new(0.0, 0.0);
            for k in self.pattern.row_range(i) {
                row += self.values[k].to_complex() * x[self.pattern.cols[k]];
            }
            acc += x[i].conj() * row;
        }
        acc
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for k in self.pattern.row_range(i) {
                let j = self.pattern.cols[k];
                worst = worst.max((self.values[k] - self.get(j, i)).modulus());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    /// `self + alpha * other` on the same pattern.
    pub fn axpy(&mut self, alpha: T, other: &CsrMatrix<T>) {
        assert!(Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern);
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    /// Coordinate text: one `row col value` line per stored nonzero.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n() {
            for k in self.pattern.row_range(i) {
                let v = self.values[k];
                if v != T::zero() {
                    let c = v.to_complex();
                    if c.im == 0.0 {
                        let _ = writeln!(s, "{} {} {}", i, self.pattern.cols[k], c.re);
                    } else {
                        let _ = writeln!(s, "{} {} {} {}", i, self.pattern.cols[k], c.re, c.im);
                    }
                }
            }
        }
        s
    }
}

impl CsrMatrix<f64> {
    /// Combination `Σ w_k A_k` of real matrices with complex weights.
    pub fn complex_combination(terms: &[(Complex64, &CsrMatrix<f64>)]) -> CsrMatrix<Complex64> {
        let pattern = terms[0].1.pattern.clone();
        let mut values = vec![Complex64::new(0.0, 0.0); pattern.nnz()];
        for (w, m) in terms {
            assert!(m.pattern.nnz() == pattern.nnz());
            for (v, &a) in values.iter_mut().zip(&m.values) {
                *v += *w * a;
            }
        }
        CsrMatrix { pattern, values }
    }

    pub fn real_combination(terms: &[(f64, &CsrMatrix<f64>)]) -> CsrMatrix<f64> {
        let pattern = terms[0].1.pattern.clone();
        let mut out = CsrMatrix::zeros(pattern);
        for (w, m) in terms {
            out.axpy(*w, m);
        }
        out
    }

    /// `xᵀ A x` for real `x`.
    pub fn real_quadratic_form(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        ax.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_of_two_triangles() {
        let p = Pattern::from_triangles(4, &[[0, 1, 2], [0, 2, 3]]);
        assert_eq!(p.row(0), &[0, 1, 2, 3]);
        assert_eq!(p.row(1), &[0, 1, 2]);
        assert_eq!(p.row(3), &[0, 2, 3]);
        assert_eq!(p.position(1, 3), None);
    }

    #[test]
    fn coordinate_text_lists_nonzeros() {
        let p = Arc::new(Pattern::from_triangles(3, &[[0, 1, 2]]));
        let mut m = CsrMatrix::zeros(p);
        m.add(0, 0, 2.0);
        m.add(1, 2, -0.5);
        assert_eq!(m.to_coordinate_text(), "0 0 2\n1 2 -0.5\n");
    }
}
