//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::scalar::{lit, Scalar};

/// Returns `(m + mᵀ) / 2`, which is exactly symmetric in floating point.
pub fn symmetrize<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = lit::<T>(0.5);
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            m[(i, i)]
        } else {
            (m[(i, j)] + m[(j, i)]) * half
        }
    })
}

/// Largest absolute entry.
pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// `max|m - mᵀ|`.
pub fn asymmetry<T: Scalar>(m: &DMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Cholesky factorisation of the symmetric part; `None` when not positive definite.
pub fn cholesky<T: Scalar>(m: &DMatrix<T>) -> Option<Cholesky<T, Dyn>> {
    if m.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Cholesky::new(symmetrize(m))
}

/// Ratio of the smallest to the largest singular value (0 for the zero matrix).
pub fn singular_ratio<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.iter().any(|x| !x.is_finite()) {
        return T::zero();
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    let min = sv.iter().fold(T::max_value().unwrap(), |a, &b| a.min(b));
    if max <= T::zero() {
        T::zero()
    } else {
        min / max
    }
}

/// Exponential of a symmetric matrix through its eigendecomposition.
///
/// The input is symmetrised first; relative error is a few ulps of the
/// largest eigenvalue's exponential.
pub fn sym_expm<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    sym_fn(m, |x| x.exp())
}

/// Eigenvalues and orthonormal eigenvectors (as columns) of the symmetric part of `m`.
///
/// Cyclic Jacobi rotations with a relative off-diagonal threshold. Slower than QR-based
/// solvers but accurate to working precision even for clustered eigenvalues.
pub fn sym_eigen<T: Scalar>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let n = m.nrows();
    let mut a = symmetrize(m);
    let mut v = DMatrix::<T>::identity(n, n);
    let eps = T::default_epsilon();
    let two: T = lit(2.0);
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                if apq.abs() <= eps * (a[(p, p)] * a[(q, q)]).abs().sqrt() {
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(T::one()));
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / t.hypot(T::one());
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (a.diagonal(), v)
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// Applies a scalar function to the spectrum of a symmetric matrix.
pub fn sym_fn<T: Scalar>(m: &DMatrix<T>, f: impl Fn(T) -> T) -> DMatrix<T> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let (values, q) = sym_eigen(m);
    let mut scaled = q.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let fl = f(lambda);
        scaled.column_mut(j).scale_mut(fl);
    }
    symmetrize(&(scaled * q.transpose()))
}

/// Symmetric positive-definite square root.
pub fn sym_sqrt<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    sym_fn(m, |x| x.max(T::zero()).sqrt())
}
