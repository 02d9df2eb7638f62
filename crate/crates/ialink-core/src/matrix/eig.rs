//! General complex eigendecomposition.
//!
//! 2x2 inputs use the closed-form characteristic roots; larger matrices go
//! through Hessenberg reduction and a shifted QR iteration to Schur form,
//! with eigenvectors recovered by back-substitution. Returned pairs are
//! sorted by descending |lambda| (ties broken by descending real part, then
//! imaginary part) and each eigenvector is unit-norm with its largest
//! component rotated to the positive real axis, so runs are reproducible.

use alloc::vec;
use alloc::vec::Vec;

use super::{C64, Matrix, MatrixError};
use crate::fp;

#[derive(Debug, Clone)]
pub struct Eig {
    pub values: Vec<C64>,
    pub vectors: Matrix,
}

const MAX_ITERS_PER_EIGENVALUE: usize = 80;

impl Matrix {
    /// Eigenvalues and unit-norm eigenvectors (as matrix columns).
    ///
    /// Panics on non-square input. For a defective matrix the trailing
    /// vectors of a repeated eigenvalue are not meaningful; the link model
    /// only ever decomposes random (almost surely diagonalizable) products.
    pub fn eig(&self) -> Result<Eig, MatrixError> {
        assert!(self.is_square(), "eig: matrix must be square");
        let n = self.rows();
        let mut pairs = match n {
            1 => vec![(self[(0, 0)], Matrix::identity(1))],
            2 => eig2(self),
            _ => eig_qr(self)?,
        };

        pairs.sort_by(|a, b| {
            b.0.norm_sqr()
                .total_cmp(&a.0.norm_sqr())
                .then(b.0.re.total_cmp(&a.0.re))
                .then(b.0.im.total_cmp(&a.0.im))
        });

        let values = pairs.iter().map(|p| p.0).collect();
        let cols: Vec<Matrix> = pairs.iter().map(|p| canonical_unit(&p.1)).collect();
        let refs: Vec<&Matrix> = cols.iter().collect();
        Ok(Eig {
            values,
            vectors: Matrix::hcat(&refs),
        })
    }
}

/// Unit norm with the largest-magnitude component made real positive.
fn canonical_unit(v: &Matrix) -> Matrix {
    let norm = v.fro_norm();
    if norm == 0.0 {
        return v.clone();
    }
    let mut k = 0;
    let mut best = 0.0;
    for r in 0..v.rows() {
        let m = v[(r, 0)].norm_sqr();
        if m > best {
            best = m;
            k = r;
        }
    }
    let pivot = v[(k, 0)];
    let phase_conj = pivot.conj() / fp::sqrt(pivot.norm_sqr());
    v.scale(phase_conj / norm)
}

fn eig2(a: &Matrix) -> Vec<(C64, Matrix)> {
    let (a11, a12) = (a[(0, 0)], a[(0, 1)]);
    let (a21, a22) = (a[(1, 0)], a[(1, 1)]);
    let zero = C64::new(0.0, 0.0);

    if a12 == zero && a21 == zero {
        return vec![
            (a11, Matrix::identity(2).col(0)),
            (a22, Matrix::identity(2).col(1)),
        ];
    }

    let tr = a11 + a22;
    let det = a11 * a22 - a12 * a21;
    let disc = tr * tr - det.scale(4.0);
    let s = disc.sqrt();
    // Pick the root with the larger magnitude first to avoid cancellation,
    // then recover the other from the product of roots.
    let big = if (tr + s).norm_sqr() >= (tr - s).norm_sqr() {
        (tr + s).unscale(2.0)
    } else {
        (tr - s).unscale(2.0)
    };
    let small = if big == zero { zero } else { det / big };

    [big, small]
        .iter()
        .map(|&lambda| (lambda, eig2_vector(a11, a12, a21, a22, lambda)))
        .collect()
}

/// Eigenvector of a 2x2 matrix for a known eigenvalue: both rows of
/// (A - lambda I) are parallel, so either [a12, lambda - a11] or
/// [lambda - a22, a21] spans the kernel; take the better-conditioned one.
fn eig2_vector(a11: C64, a12: C64, a21: C64, a22: C64, lambda: C64) -> Matrix {
    let cand1 = [a12, lambda - a11];
    let cand2 = [lambda - a22, a21];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let chosen = if n1 >= n2 { cand1 } else { cand2 };
    if n1 == 0.0 && n2 == 0.0 {
        // (A - lambda I) vanished entirely; any direction works.
        return Matrix::identity(2).col(0);
    }
    Matrix::new(2, 1, vec![chosen[0], chosen[1]])
}

fn eig_qr(a: &Matrix) -> Result<Vec<(C64, Matrix)>, MatrixError> {
    let n = a.rows();
    let mut t = a.clone();
    let mut q = Matrix::identity(n);
    hessenberg(&mut t, &mut q);
    schur(&mut t, &mut q)?;

    let norm_t = t.fro_norm();
    let mut pairs = Vec::with_capacity(n);
    for idx in 0..n {
        let lambda = t[(idx, idx)];
        let mut y = vec![C64::new(0.0, 0.0); n];
        y[idx] = C64::new(1.0, 0.0);
        for k in (0..idx).rev() {
            let mut sum = C64::new(0.0, 0.0);
            for m in k + 1..=idx {
                sum += t[(k, m)] * y[m];
            }
            let mut dk = t[(k, k)] - lambda;
            let floor = f64::EPSILON * norm_t.max(f64::MIN_POSITIVE);
            if fp::sqrt(dk.norm_sqr()) < floor {
                dk = C64::new(floor, 0.0);
            }
            y[k] = -sum / dk;
        }
        let yv = Matrix::new(n, 1, y);
        pairs.push((lambda, q.mul(&yv)));
    }
    Ok(pairs)
}

/// Reduce to upper Hessenberg form by Householder reflections, accumulating
/// the unitary similarity in `q` (A = Q H Qᴴ).
fn hessenberg(h: &mut Matrix, q: &mut Matrix) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v = vec![C64::new(0.0, 0.0); len];
        let mut norm_x_sqr = 0.0;
        for (i, item) in v.iter_mut().enumerate() {
            *item = h[(k + 1 + i, k)];
            norm_x_sqr += item.norm_sqr();
        }
        if norm_x_sqr <= f64::MIN_POSITIVE {
            continue;
        }
        let norm_x = fp::sqrt(norm_x_sqr);
        let x0 = v[0];
        let alpha = if x0 == C64::new(0.0, 0.0) {
            C64::new(-norm_x, 0.0)
        } else {
            -(x0 / fp::sqrt(x0.norm_sqr())) * norm_x
        };
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vtv <= f64::MIN_POSITIVE {
            continue;
        }
        let beta = 2.0 / vtv;

        // Rows k+1.. of columns k..: H <- P H
        for col in k..n {
            let mut w = C64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                w += vi.conj() * h[(k + 1 + i, col)];
            }
            w *= beta;
            for (i, vi) in v.iter().enumerate() {
                let update = *vi * w;
                h[(k + 1 + i, col)] -= update;
            }
        }
        // Columns k+1.. of all rows: H <- H P
        for row in 0..n {
            let mut w = C64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                w += h[(row, k + 1 + i)] * *vi;
            }
            w *= beta;
            for (i, vi) in v.iter().enumerate() {
                let update = w * vi.conj();
                h[(row, k + 1 + i)] -= update;
            }
        }
        // Q <- Q P
        for row in 0..n {
            let mut w = C64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                w += q[(row, k + 1 + i)] * *vi;
            }
            w *= beta;
            for (i, vi) in v.iter().enumerate() {
                let update = w * vi.conj();
                q[(row, k + 1 + i)] -= update;
            }
        }
        for r in k + 2..n {
            h[(r, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Single-shift QR iteration with Givens rotations, driving the Hessenberg
/// matrix to upper triangular (Schur) form. `q` accumulates the rotations.
fn schur(t: &mut Matrix, q: &mut Matrix) -> Result<(), MatrixError> {
    let n = t.rows();
    let mut hi = n - 1;
    let mut iters = 0usize;
    while hi > 0 {
        // Deflate negligible subdiagonals.
        let mut lo = hi;
        while lo > 0 {
            let scale =
                fp::sqrt(t[(lo - 1, lo - 1)].norm_sqr()) + fp::sqrt(t[(lo, lo)].norm_sqr());
            let scale = if scale == 0.0 { t.fro_norm() } else { scale };
            if fp::sqrt(t[(lo, lo - 1)].norm_sqr()) <= f64::EPSILON * scale {
                t[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iters = 0;
            continue;
        }

        iters += 1;
        if iters > MAX_ITERS_PER_EIGENVALUE {
            return Err(MatrixError::NonConvergence);
        }

        let shift = if iters.is_multiple_of(16) {
            // Exceptional shift to break rare cycles.
            let off = fp::sqrt(t[(hi, hi - 1)].norm_sqr());
            t[(hi, hi)] + C64::new(off, 0.0)
        } else {
            wilkinson_shift(t, hi)
        };

        for i in lo..=hi {
            let d = t[(i, i)] - shift;
            t[(i, i)] = d;
        }

        // QR factorization of the active block by Givens rotations.
        let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let f = t[(k, k)];
            let g = t[(k + 1, k)];
            let (c, s) = givens(f, g);
            for col in k..n {
                let a = t[(k, col)];
                let b = t[(k + 1, col)];
                t[(k, col)] = a * c + b * s;
                t[(k + 1, col)] = -(a * s.conj()) + b * c;
            }
            t[(k + 1, k)] = C64::new(0.0, 0.0);
            rots.push((c, s));
        }
        // Multiply the rotations back on the right: T <- R Q_rot, Q <- Q Q_rot.
        for (k, (c, s)) in rots.iter().enumerate().map(|(i, r)| (lo + i, r)) {
            for row in 0..=(k + 1).min(hi) {
                let a = t[(row, k)];
                let b = t[(row, k + 1)];
                t[(row, k)] = a * *c + b * s.conj();
                t[(row, k + 1)] = -(a * *s) + b * *c;
            }
            for row in 0..n {
                let a = q[(row, k)];
                let b = q[(row, k + 1)];
                q[(row, k)] = a * *c + b * s.conj();
                q[(row, k + 1)] = -(a * *s) + b * *c;
            }
        }

        for i in lo..=hi {
            let d = t[(i, i)] + shift;
            t[(i, i)] = d;
        }
    }
    Ok(())
}

/// Rotation [[c, s], [-s̄, c]] (c real) mapping (f, g) to (r, 0).
fn givens(f: C64, g: C64) -> (f64, C64) {
    let fn2 = f.norm_sqr();
    let gn2 = g.norm_sqr();
    if gn2 == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if fn2 == 0.0 {
        return (0.0, g.conj() / fp::sqrt(gn2));
    }
    let d = fp::sqrt(fn2 + gn2);
    let c = fp::sqrt(fn2) / d;
    let s = (f / fp::sqrt(fn2)) * (g.conj() / d);
    (c, s)
}

/// Eigenvalue of the trailing 2x2 block closest to the corner entry.
fn wilkinson_shift(t: &Matrix, hi: usize) -> C64 {
    let a = t[(hi - 1, hi - 1)];
    let b = t[(hi - 1, hi)];
    let c = t[(hi, hi - 1)];
    let d = t[(hi, hi)];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det.scale(4.0)).sqrt();
    let l1 = (tr + disc).unscale(2.0);
    let l2 = (tr - disc).unscale(2.0);
    if (l1 - d).norm_sqr() <= (l2 - d).norm_sqr() {
        l1
    } else {
        l2
    }
}
