//! Small dense linear-algebra helpers.
//!
//! The problem sizes in this crate stay in the low hundreds, so plain
//! `O(n^3)` factorizations without pivot-heavy machinery are adequate.

use ndarray::{Array1, Array2};

use crate::num::Scalar;

/// Cholesky factorization of a symmetric positive-definite matrix.
/// Returns the lower-triangular factor, or `None` if a pivot is not
/// sufficiently positive.
pub fn cholesky<F: Scalar>(a: &Array2<F>) -> Option<Array2<F>> {
    let n = a.nrows();
    if a.ncols() != n {
        return None;
    }
    let mut l = Array2::<F>::zeros((n, n));
    // Relative pivot floor keeps near-singular Grams from producing garbage.
    let mut max_diag = F::zero();
    for i in 0..n {
        max_diag = max_diag.max(a[[i, i]].abs());
    }
    let floor = F::epsilon() * F::cast(64.0) * max_diag.max(F::cast(1e-300));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d = d - l[[j, k]] * l[[j, k]];
        }
        if d <= floor {
            return None;
        }
        let dj = d.sqrt();
        l[[j, j]] = dj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s = s - l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / dj;
        }
    }
    Some(l)
}

/// Solve `L L^T x = b` given the lower Cholesky factor.
pub fn cholesky_solve<F: Scalar>(l: &Array2<F>, b: &Array1<F>) -> Array1<F> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s = s - l[[i, k]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s = s - l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solve a symmetric positive-definite system; `None` if not SPD.
pub fn solve_spd<F: Scalar>(a: &Array2<F>, b: &Array1<F>) -> Option<Array1<F>> {
    cholesky(a).map(|l| cholesky_solve(&l, b))
}

/// Solve a general square system by LU with partial pivoting; `None` if
/// (numerically) singular.
pub fn solve_lu<F: Scalar>(a: &Array2<F>, b: &Array1<F>) -> Option<Array1<F>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return None;
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut max = lu[[k, k]].abs();
        for i in (k + 1)..n {
            if lu[[i, k]].abs() > max {
                max = lu[[i, k]].abs();
                p = i;
            }
        }
        if !(max > F::zero()) || !max.is_finite() {
            return None;
        }
        if p != k {
            piv.swap(p, k);
            for j in 0..n {
                let tmp = lu[[k, j]];
                lu[[k, j]] = lu[[p, j]];
                lu[[p, j]] = tmp;
            }
            let tmp = x[k];
            x[k] = x[p];
            x[p] = tmp;
        }
        let pivot = lu[[k, k]];
        for i in (k + 1)..n {
            let m = lu[[i, k]] / pivot;
            lu[[i, k]] = m;
            for j in (k + 1)..n {
                let delta = m * lu[[k, j]];
                lu[[i, j]] = lu[[i, j]] - delta;
            }
            x[i] = x[i] - m * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s = s - lu[[i, j]] * x[j];
        }
        x[i] = s / lu[[i, i]];
    }
    Some(x)
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
pub fn spectral_norm_psd<F: Scalar>(a: &Array2<F>, iters: usize) -> F {
    let n = a.nrows();
    if n == 0 {
        return F::zero();
    }
    let mut v = Array1::<F>::from_elem(n, F::one() / F::cast(n as f64).sqrt());
    let mut lambda = F::zero();
    for _ in 0..iters {
        let w = a.dot(&v);
        let norm = w.iter().map(|&x| x * x).sum::<F>().sqrt();
        if norm <= F::epsilon() {
            return F::zero();
        }
        lambda = norm;
        v = w / norm;
    }
    lambda
}
