//! Dense complex matrices and the small linear-algebra kernel used by the
//! beamforming construction: multiply, Hermitian transpose, inverse, general
//! eigendecomposition, one-sided Jacobi SVD, orthonormal null spaces and a
//! condition estimate.
//!
//! Everything here targets the small matrices of the link model (a few
//! antennas per node); there is no blocking and nothing is tuned for large
//! sizes.

mod eig;
mod svd;

pub use eig::Eig;
pub use svd::Svd;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use crate::fp;

pub type C64 = num_complex::Complex<f64>;

/// Condition estimates above this are treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e8;

/// Singular values below `NULLSPACE_REL_TOL * sigma_max` count as zero when
/// extracting a null-space basis.
pub const NULLSPACE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixError {
    /// Condition estimate exceeded [`SINGULARITY_THRESHOLD`].
    Singular { cond: f64 },
    /// An iterative routine failed to converge.
    NonConvergence,
    /// The matrix has full column rank, so there is no null space to return.
    EmptyNullSpace,
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::Singular { cond } => {
                write!(f, "matrix is numerically singular (cond estimate {cond:e})")
            }
            MatrixError::NonConvergence => write!(f, "iteration failed to converge"),
            MatrixError::EmptyNullSpace => write!(f, "matrix has full column rank"),
        }
    }
}

impl core::error::Error for MatrixError {}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    /// Build a matrix from row-major data.
    ///
    /// Panics if the shape is empty, the data length does not match, or any
    /// entry is non-finite.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix shape must be at least 1x1");
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        assert!(
            data.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "matrix entries must be finite"
        );
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        Matrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Standard matrix product. Panics if the inner dimensions disagree.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: inner dimensions must agree ({}x{} * {}x{})",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs.data[k * rhs.cols + c];
                }
            }
        }
        out
    }

    /// Hermitian (conjugate) transpose.
    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] + rhs[(r, c)])
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - rhs[(r, c)])
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * s)
    }

    pub fn scale_re(&self, s: f64) -> Matrix {
        self.scale(C64::new(s, 0.0))
    }

    /// Frobenius norm, which for a column vector is the Euclidean norm.
    pub fn fro_norm(&self) -> f64 {
        fp::sqrt(self.fro_norm_sqr())
    }

    pub fn fro_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Rescale so that trace(M Mᴴ) = ‖M‖²_F = 1.
    pub fn normalized(&self) -> Matrix {
        let n = self.fro_norm();
        assert!(n > 0.0, "cannot normalize a zero matrix");
        self.scale_re(1.0 / n)
    }

    pub fn col(&self, j: usize) -> Matrix {
        assert!(j < self.cols);
        Matrix::from_fn(self.rows, 1, |r, _| self[(r, j)])
    }

    /// Horizontal concatenation.
    pub fn hcat(parts: &[&Matrix]) -> Matrix {
        assert!(!parts.is_empty());
        let rows = parts[0].rows;
        assert!(parts.iter().all(|m| m.rows == rows));
        let cols: usize = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut offset = 0;
        for m in parts {
            for r in 0..rows {
                for c in 0..m.cols {
                    out[(r, offset + c)] = m[(r, c)];
                }
            }
            offset += m.cols;
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting, guarded by
    /// the condition estimate.
    ///
    /// Panics if the matrix is not square; returns `Singular` when the
    /// condition estimate exceeds [`SINGULARITY_THRESHOLD`].
    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        assert!(self.is_square(), "inverse: matrix must be square");
        let cond = self.cond_estimate();
        if cond.is_nan() || cond > SINGULARITY_THRESHOLD {
            return Err(MatrixError::Singular { cond });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = Matrix::identity(n).data;
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[col * n + col].norm_sqr();
            for r in col + 1..n {
                let m = a[r * n + col].norm_sqr();
                if m > best {
                    best = m;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return Err(MatrixError::Singular { cond: f64::INFINITY });
            }
            if pivot != col {
                for c in 0..n {
                    a.swap(pivot * n + c, col * n + c);
                    inv.swap(pivot * n + c, col * n + c);
                }
            }
            let p = a[col * n + col];
            let pinv = C64::new(1.0, 0.0) / p;
            for c in 0..n {
                a[col * n + c] *= pinv;
                inv[col * n + c] *= pinv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col];
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for c in 0..n {
                    let ac = a[col * n + c];
                    let ic = inv[col * n + c];
                    a[r * n + c] -= factor * ac;
                    inv[r * n + c] -= factor * ic;
                }
            }
        }
        Ok(Matrix {
            rows: n,
            cols: n,
            data: inv,
        })
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
