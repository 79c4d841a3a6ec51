use super::ordering::Ordering;
use super::scalar::Scalar;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Skyline `L D Lᵀ` factorization of a symmetric (or complex-symmetric,
/// unconjugated) sparse matrix without pivoting.
///
/// Pivoting is unnecessary for the matrices assembled here: they are either
/// real SPD or complex-symmetric with `Re(e^{-iθ} T)` SPD for some θ, and
/// every Schur complement inherits that property.
#[derive(Debug, Clone)]
pub struct LdltFactor<T> {
    ordering: Ordering,
    first: Vec<usize>,
    offsets: Vec<usize>,
    lower: Vec<T>,
    diag: Vec<T>,
}

impl<T: Scalar> LdltFactor<T> {
    pub fn factorize(matrix: &CsrMatrix<T>, ordering: &Ordering) -> Result<Self> {
        let n = matrix.n();
        let pattern = matrix.pattern();
        let mut first = vec![0; n];
        for new in 0..n {
            let old = ordering.perm[new];
            first[new] = pattern.row(old).iter().map(|&j| ordering.inverse[j]).min().unwrap().min(new);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i]));
        }
        let mut lower = vec![T::zero(); offsets[n]];
        let mut diag = vec![T::zero(); n];
        for new in 0..n {
            let old = ordering.perm[new];
            for (k, &col) in pattern.row_range(old).zip(pattern.row(old)) {
                let j = ordering.inverse[col];
                let v = matrix.values()[k];
                if j < new {
                    lower[offsets[new] + (j - first[new])] = v;
                } else if j == new {
                    diag[new] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = lower.split_at_mut(offsets[i]);
            let row_i = &mut rest[..i - fi];
            // row_i holds w_ij = l_ij d_j once processed.
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                if lo < j {
                    let row_j = &done[offsets[j]..offsets[j] + (j - fj)];
                    let mut acc = T::zero();
                    for k in lo..j {
                        acc += row_i[k - fi] * row_j[k - fj];
                    }
                    row_i[j - fi] -= acc;
                }
            }
            let mut d = diag[i];
            for j in fi..i {
                let w = row_i[j - fi];
                let l = w / diag[j];
                d -= w * l;
                row_i[j - fi] = l;
            }
            let scale = diag[i].modulus();
            if !d.is_finite() || d.modulus() <= 1e-14 * scale || d.modulus() == 0.0 {
                return Err(Error::SolverBreakdown { pivot: i, magnitude: d.modulus() });
            }
            diag[i] = d;
        }
        Ok(LdltFactor { ordering: ordering.clone(), first, offsets, lower, diag })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.n();
        assert_eq!(rhs.len(), n);
        let mut x: Vec<T> = self.ordering.perm.iter().map(|&old| rhs[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.offsets[i]..self.offsets[i + 1]];
            let mut acc = T::zero();
            for (k, &l) in row.iter().enumerate() {
                acc += l * x[fi + k];
            }
            x[i] -= acc;
        }
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.offsets[i]..self.offsets[i + 1]];
            for (k, &l) in row.iter().enumerate() {
                x[fi + k] -= l * xi;
            }
        }
        let mut out = vec![T::zero(); n];
        for (new, &old) in self.ordering.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }

    pub fn pivots(&self) -> &[T] {
        &self.diag
    }
}
