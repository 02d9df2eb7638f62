//! Singular values and right singular vectors via one-sided Jacobi
//! rotations, plus the null-space and condition-number helpers built on top.

use alloc::vec::Vec;

use super::{C64, Matrix, MatrixError, NULLSPACE_REL_TOL};
use crate::fp;

/// Singular values (descending) and the matching right singular vectors.
/// Left vectors are never needed by the link model and are not computed.
#[derive(Debug, Clone)]
pub struct Svd {
    pub values: Vec<f64>,
    pub right: Matrix,
}

const JACOBI_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 60;

impl Matrix {
    /// One-sided Jacobi SVD. The rotations are applied in a fixed cyclic
    /// order, so the factorization is deterministic; ties in the singular
    /// values keep their pre-sort column order.
    pub fn svd(&self) -> Svd {
        let m = self.rows();
        let n = self.cols();
        let mut b: Vec<C64> = self.data().to_vec();
        let mut v = Matrix::identity(n);

        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n.saturating_sub(1) {
                for q in p + 1..n {
                    let mut app = 0.0;
                    let mut aqq = 0.0;
                    let mut apq = C64::new(0.0, 0.0);
                    for r in 0..m {
                        let bp = b[r * n + p];
                        let bq = b[r * n + q];
                        app += bp.norm_sqr();
                        aqq += bq.norm_sqr();
                        apq += bp.conj() * bq;
                    }
                    // A column that is negligible next to its partner is
                    // already as orthogonal as it will get; rotating further
                    // only churns denormals.
                    if app.min(aqq) <= app.max(aqq) * 1e-28 {
                        continue;
                    }
                    let mag = apq.norm();
                    if mag <= JACOBI_TOL * fp::sqrt(app * aqq) || mag == 0.0 {
                        continue;
                    }
                    rotated = true;
                    // Absorb the phase so the 2x2 Gram block becomes real,
                    // then apply the classical symmetric Jacobi rotation.
                    let phase_conj = apq.conj() / mag;
                    let tau = (aqq - app) / (2.0 * mag);
                    let t = if tau == 0.0 {
                        1.0
                    } else {
                        let sign = if tau > 0.0 { 1.0 } else { -1.0 };
                        sign / (fp::fabs(tau) + fp::sqrt(1.0 + tau * tau))
                    };
                    let c = 1.0 / fp::sqrt(1.0 + t * t);
                    let s = c * t;
                    for r in 0..m {
                        let bp = b[r * n + p];
                        let bq = b[r * n + q] * phase_conj;
                        b[r * n + p] = bp * c - bq * s;
                        b[r * n + q] = bp * s + bq * c;
                    }
                    for r in 0..n {
                        let vp = v[(r, p)];
                        let vq = v[(r, q)] * phase_conj;
                        v[(r, p)] = vp * c - vq * s;
                        v[(r, q)] = vp * s + vq * c;
                    }
                }
            }
            if !rotated {
                break;
            }
        }

        let mut values: Vec<f64> = (0..n)
            .map(|j| {
                let mut acc = 0.0;
                for r in 0..m {
                    acc += b[r * n + j].norm_sqr();
                }
                fp::sqrt(acc)
            })
            .collect();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &bidx| values[bidx].total_cmp(&values[a]));
        let right = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
        values.sort_by(|a, b| b.total_cmp(a));
        Svd { values, right }
    }

    /// Ratio of the largest to smallest singular value; +inf for an exactly
    /// singular (or zero) matrix.
    pub fn cond_estimate(&self) -> f64 {
        assert!(self.is_square(), "cond_estimate: matrix must be square");
        let sv = self.svd().values;
        let largest = sv[0];
        let smallest = sv[sv.len() - 1];
        if smallest == 0.0 {
            return f64::INFINITY;
        }
        largest / smallest
    }

    /// First right singular vector, i.e. the unit direction maximizing
    /// ‖A·x‖.
    pub fn dominant_right_singular_vector(&self) -> Matrix {
        self.svd().right.col(0)
    }

    /// Orthonormal basis of {x : A·x = 0}, with singular values below
    /// [`NULLSPACE_REL_TOL`]·sigma_max treated as zero. Errors when the
    /// matrix has full column rank.
    pub fn nullspace(&self) -> Result<Matrix, MatrixError> {
        let svd = self.svd();
        let n = self.cols();
        let sigma_max = svd.values[0];
        let keep: Vec<usize> = (0..n)
            .filter(|&j| svd.values[j] <= NULLSPACE_REL_TOL * sigma_max)
            .collect();
        if keep.is_empty() {
            return Err(MatrixError::EmptyNullSpace);
        }
        Ok(Matrix::from_fn(n, keep.len(), |r, c| svd.right[(r, keep[c])]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn random_matrix(stream: &mut Stream, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| stream.complex_gaussian(1.0))
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn svd_right_vectors_are_unitary_and_diagonalize_gram() {
        let mut stream = Stream::from_words(&[201]);
        for _ in 0..100 {
            let a = random_matrix(&mut stream, 3, 3);
            let svd = a.svd();
            let vtv = svd.right.adjoint().mul(&svd.right);
            let ortho = vtv.sub(&Matrix::identity(3)).fro_norm();
            assert!(ortho <= 1e-13, "orthonormality {ortho}");
            // A V should have orthogonal columns with norms = singular values.
            let av = a.mul(&svd.right);
            for j in 0..3 {
                let col = av.col(j);
                assert!((col.fro_norm() - svd.values[j]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        // Independent route: eigenvalues of the 2x2 Hermitian Gram matrix
        // AᴴA in closed form.
        let mut stream = Stream::from_words(&[202]);
        for _ in 0..200 {
            let m = random_matrix(&mut stream, 2, 2);
            let g = m.adjoint().mul(&m);
            let a = g[(0, 0)].re;
            let b = g[(1, 1)].re;
            let off = g[(0, 1)].norm_sqr();
            let mid = 0.5 * (a + b);
            let rad = fp::sqrt(0.25 * (a - b) * (a - b) + off);
            let expected_hi = fp::sqrt((mid + rad).max(0.0));
            let expected_lo = fp::sqrt((mid - rad).max(0.0));
            let sv = m.svd().values;
            assert!((sv[0] - expected_hi).abs() <= 1e-9 * expected_hi.max(1.0));
            assert!((sv[1] - expected_lo).abs() <= 1e-9 * expected_hi.max(1.0));
        }
    }

    #[test]
    fn cond_of_identity_is_one() {
        assert!((Matrix::identity(2).cond_estimate() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cond_of_skewed_diagonal() {
        let a = Matrix::new(
            2,
            2,
            alloc::vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1e-12, 0.0)],
        );
        let cond = a.cond_estimate();
        assert!((cond / 1e12 - 1.0).abs() < 1e-6, "cond {cond}");
    }

    #[test]
    fn cond_of_exactly_singular_is_infinite() {
        let a = Matrix::new(
            2,
            2,
            alloc::vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)],
        );
        assert!(a.cond_estimate().is_infinite());
    }

    #[test]
    fn cond_matches_svd_ratio_oracle() {
        let mut stream = Stream::from_words(&[203]);
        for _ in 0..100 {
            let m = random_matrix(&mut stream, 2, 2);
            let sv = m.svd().values;
            let oracle = sv[0] / sv[1];
            let est = m.cond_estimate();
            assert!(est <= 10.0 * oracle && oracle <= 10.0 * est);
        }
    }

    #[test]
    fn nullspace_of_unit_row() {
        // [1, 0] -> span{[0, 1]}
        let a = Matrix::new(1, 2, alloc::vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let n = a.nullspace().unwrap();
        assert_eq!(n.cols(), 1);
        assert!(n[(0, 0)].norm() <= 1e-14);
        assert!((n[(1, 0)].norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn nullspace_of_zero_matrix_is_full_space() {
        let a = Matrix::zeros(1, 2);
        let n = a.nullspace().unwrap();
        assert_eq!(n.cols(), 2);
        let ortho = n.adjoint().mul(&n).sub(&Matrix::identity(2)).fro_norm();
        assert!(ortho <= 1e-13);
    }

    #[test]
    fn nullspace_of_random_row() {
        let mut stream = Stream::from_words(&[204]);
        for _ in 0..500 {
            let r = random_matrix(&mut stream, 1, 2);
            let n = r.nullspace().unwrap();
            assert_eq!(n.cols(), 1);
            assert!(r.mul(&n).fro_norm() <= 1e-12, "residual too large");
            assert!((n.fro_norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn nullspace_full_rank_errors() {
        let a = Matrix::identity(2);
        assert_eq!(a.nullspace(), Err(MatrixError::EmptyNullSpace));
    }

    #[test]
    fn dominant_right_singular_vector_of_identity_is_e1() {
        let v = Matrix::identity(2).dominant_right_singular_vector();
        assert!((v[(0, 0)] - c(1.0, 0.0)).norm() <= 1e-15);
        assert!(v[(1, 0)].norm() <= 1e-15);
    }

    #[test]
    fn dominant_direction_maximizes_gain() {
        let mut stream = Stream::from_words(&[205]);
        for _ in 0..100 {
            let a = random_matrix(&mut stream, 2, 2);
            let v = a.dominant_right_singular_vector();
            let gain = a.mul(&v).fro_norm();
            // Compare against a handful of random unit directions.
            for _ in 0..10 {
                let w = random_matrix(&mut stream, 2, 1).normalized();
                assert!(a.mul(&w).fro_norm() <= gain + 1e-9);
            }
        }
    }
}
