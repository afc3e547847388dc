//! Small dense LU factorizations (real and complex), crate-internal.
//!
//! Everything the solvers factor densely is small: correction-weight power
//! systems (`m <= 6`), per-step implicit matrices and spectral blocks of the
//! block-circulant solver (`d x d` with `d` the problem dimension). Plain
//! row-major partial-pivot LU is entirely adequate; no external linear
//! algebra dependency is warranted.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fft::Complex64;
use crate::math;

/// In-place LU factorization with partial pivoting of a row-major `n x n`
/// matrix. Returns the pivot row chosen at each elimination step.
pub(crate) fn lu_factor(a: &mut [f64], n: usize, what: &str) -> Result<Vec<usize>> {
    debug_assert_eq!(a.len(), n * n);
    let mut piv = vec![0usize; n];
    for col in 0..n {
        // Pivot search.
        let mut best = col;
        let mut best_mag = math::abs(a[col * n + col]);
        for row in col + 1..n {
            let mag = math::abs(a[row * n + col]);
            if mag > best_mag {
                best = row;
                best_mag = mag;
            }
        }
        if best_mag == 0.0 {
            return Err(Error::Singular {
                what: format!("{what} ({n}x{n})"),
            });
        }
        piv[col] = best;
        if best != col {
            for k in 0..n {
                a.swap(col * n + k, best * n + k);
            }
        }
        let inv_pivot = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv_pivot;
            a[row * n + col] = factor;
            for k in col + 1..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
        }
    }
    Ok(piv)
}

/// Solves `A x = b` in place given the factorization from [`lu_factor`].
pub(crate) fn lu_solve(lu: &[f64], n: usize, piv: &[usize], b: &mut [f64]) {
    debug_assert_eq!(b.len(), n);
    // All interchanges must be applied before elimination starts: the stored
    // multipliers are indexed by *final* row positions, so interleaving the
    // swaps with the updates would mix orderings.
    for col in 0..n {
        b.swap(col, piv[col]);
    }
    for col in 0..n {
        for row in col + 1..n {
            let f = lu[row * n + col];
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        b[col] /= lu[col * n + col];
        for row in 0..col {
            b[row] -= lu[row * n + col] * b[col];
        }
    }
}

/// Exact infinity-norm condition number via the explicit inverse; meant for
/// *small* systems where `n` extra solves are negligible.
pub(crate) fn cond_inf(lu: &[f64], n: usize, piv: &[usize], a_inf_norm: f64) -> f64 {
    let mut inv_row_sums = vec![0.0f64; n];
    let mut col = vec![0.0f64; n];
    for j in 0..n {
        col.iter_mut().for_each(|v| *v = 0.0);
        col[j] = 1.0;
        lu_solve(lu, n, piv, &mut col);
        for (sum, v) in inv_row_sums.iter_mut().zip(&col) {
            *sum += math::abs(*v);
        }
    }
    let inv_norm = inv_row_sums.iter().fold(0.0f64, |m, &v| m.max(v));
    a_inf_norm * inv_norm
}

/// Row-sum (infinity) norm of a row-major `n x n` matrix.
pub(crate) fn inf_norm(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|r| a[r * n..(r + 1) * n].iter().map(|v| math::abs(*v)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Complex LU factorization with partial pivoting (magnitude = |re| + |im|,
/// which avoids square roots and is within √2 of the modulus).
pub(crate) fn lu_factor_c(a: &mut [Complex64], n: usize, what: &str) -> Result<Vec<usize>> {
    debug_assert_eq!(a.len(), n * n);
    let mag = |z: Complex64| math::abs(z.re) + math::abs(z.im);
    let mut piv = vec![0usize; n];
    for col in 0..n {
        let mut best = col;
        let mut best_mag = mag(a[col * n + col]);
        for row in col + 1..n {
            let m = mag(a[row * n + col]);
            if m > best_mag {
                best = row;
                best_mag = m;
            }
        }
        if best_mag == 0.0 {
            return Err(Error::Singular {
                what: format!("{what} ({n}x{n} complex)"),
            });
        }
        piv[col] = best;
        if best != col {
            for k in 0..n {
                a.swap(col * n + k, best * n + k);
            }
        }
        let pivot = a[col * n + col];
        let inv_pivot = pivot.conj() / pivot.norm_sqr();
        for row in col + 1..n {
            let factor = a[row * n + col] * inv_pivot;
            a[row * n + col] = factor;
            for k in col + 1..n {
                let sub = factor * a[col * n + k];
                a[row * n + k] -= sub;
            }
        }
    }
    Ok(piv)
}

/// Solves the complex system in place given [`lu_factor_c`] output.
pub(crate) fn lu_solve_c(lu: &[Complex64], n: usize, piv: &[usize], b: &mut [Complex64]) {
    debug_assert_eq!(b.len(), n);
    // Swaps first, eliminations second — see `lu_solve`.
    for col in 0..n {
        b.swap(col, piv[col]);
    }
    for col in 0..n {
        for row in col + 1..n {
            let f = lu[row * n + col];
            let sub = f * b[col];
            b[row] -= sub;
        }
    }
    for col in (0..n).rev() {
        let pivot = lu[col * n + col];
        b[col] = b[col] * pivot.conj() / pivot.norm_sqr();
        for row in 0..col {
            let sub = lu[row * n + col] * b[col];
            b[row] -= sub;
        }
    }
}

/// Solves the *transposed* system `A^T y = b` in place given the
/// factorization of `A` from [`lu_factor_c`].
///
/// With `P A = L U` the transpose is `A^T = U^T L^T P`, so the sweeps run
/// in the opposite order — `U^T` (lower) forward with division, `L^T`
/// (unit upper) backward — and the interchanges are undone last, reversed.
pub(crate) fn lu_solve_c_transpose(
    lu: &[Complex64],
    n: usize,
    piv: &[usize],
    b: &mut [Complex64],
) {
    debug_assert_eq!(b.len(), n);
    for i in 0..n {
        for j in 0..i {
            let sub = lu[j * n + i] * b[j];
            b[i] -= sub;
        }
        let pivot = lu[i * n + i];
        b[i] = b[i] * pivot.conj() / pivot.norm_sqr();
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let sub = lu[j * n + i] * b[j];
            b[i] -= sub;
        }
    }
    for col in (0..n).rev() {
        b.swap(col, piv[col]);
    }
}
