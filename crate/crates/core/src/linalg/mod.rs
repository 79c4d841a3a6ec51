//! Sparse matrices and the direct solver used for every linear system.

mod ldlt;
mod ordering;
mod scalar;
mod sparse;

pub use ldlt::LdltFactor;
pub use ordering::Ordering;
pub use scalar::{norm2, Scalar};
pub use sparse::{CsrMatrix, Pattern};

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn grid_pattern(nx: usize, ny: usize) -> (Arc<Pattern>, Vec<[usize; 3]>) {
        let id = |i: usize, j: usize| j * nx + i;
        let mut tris = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        (Arc::new(Pattern::from_triangles(nx * ny, &tris)), tris)
    }

    /// Graph Laplacian plus `shift` times identity, with a complex weight on
    /// the identity part.
    fn shifted_laplacian(pattern: &Arc<Pattern>, shift: Complex64) -> CsrMatrix<Complex64> {
        let mut m = CsrMatrix::zeros(pattern.clone());
        for i in 0..pattern.n() {
            for &j in pattern.row(i) {
                if i != j {
                    m.add(i, j, Complex64::new(-1.0, 0.0));
                    m.add(i, i, Complex64::new(1.0, 0.0));
                }
            }
            m.add(i, i, shift);
        }
        m
    }

    #[test]
    fn rcm_reduces_profile_of_shuffled_grid() {
        let (pattern, _) = grid_pattern(30, 6);
        let identity = Ordering::identity(pattern.n());
        let rcm = Ordering::reverse_cuthill_mckee(&pattern);
        assert!(rcm.profile(&pattern) <= identity.profile(&pattern));
        let mut seen = vec![false; pattern.n()];
        for &p in &rcm.perm {
            assert!(!seen[p]);
            seen[p] = true;
        }
    }

    #[test]
    fn complex_symmetric_solve_has_small_residual() {
        let (pattern, _) = grid_pattern(17, 11);
        let m = shifted_laplacian(&pattern, Complex64::from_polar(0.3, 1.2));
        let ordering = Ordering::reverse_cuthill_mckee(&pattern);
        let f = LdltFactor::factorize(&m, &ordering).unwrap();
        let b: Vec<Complex64> =
            (0..pattern.n()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let x = f.solve(&b);
        let r: Vec<Complex64> = m.matvec(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) < 1e-12 * norm2(&b));
    }

    #[test]
    fn singular_matrix_reports_breakdown() {
        let (pattern, _) = grid_pattern(4, 4);
        let mut m: CsrMatrix<f64> = CsrMatrix::zeros(pattern.clone());
        for i in 0..pattern.n() {
            for &j in pattern.row(i) {
                if i != j {
                    m.add(i, j, -1.0);
                    m.add(i, i, 1.0);
                }
            }
        }
        let err = LdltFactor::factorize(&m, &Ordering::identity(pattern.n())).unwrap_err();
        assert!(matches!(err, crate::Error::SolverBreakdown { .. }));
    }

    proptest! {
        #[test]
        fn real_spd_solve_matches_matvec(shift in 0.01f64..10.0, seed in 0u64..1000) {
            let (pattern, _) = grid_pattern(9, 7);
            let mut m: CsrMatrix<f64> = CsrMatrix::zeros(pattern.clone());
            for i in 0..pattern.n() {
                for &j in pattern.row(i) {
                    if i != j {
                        m.add(i, j, -1.0);
                        m.add(i, i, 1.0);
                    }
                }
                m.add(i, i, shift);
            }
            let x: Vec<f64> = (0..pattern.n()).map(|i| ((i as u64 * 31 + seed) % 17) as f64 - 8.0).collect();
            let b = m.matvec(&x);
            let ordering = Ordering::reverse_cuthill_mckee(&pattern);
            let y = LdltFactor::factorize(&m, &ordering).unwrap().solve(&b);
            let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-8 * (1.0 + 1.0 / shift));
        }
    }
}
