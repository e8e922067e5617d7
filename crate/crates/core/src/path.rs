//! Exact-zero lasso solution paths via the least-angle homotopy with
//! variable drops, plus interpolation queries and KKT verification.
//!
//! The path solves `min 1/2 ||y - X b||^2 + lambda1 ||b||_1` for every
//! `lambda1` at once: between breakpoints the solution is linear in
//! `lambda1`, so any point of the path is recovered by interpolation.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::num::Scalar;

/// One breakpoint of the homotopy. `active` is the equicorrelation set of
/// the segment that starts here; `beta` is the exact solution at `lambda1`.
#[derive(Debug, Clone)]
pub struct PathPoint<F> {
    pub lambda1: F,
    pub t1_fraction: F,
    pub active: Vec<usize>,
    pub beta: Array1<F>,
}

/// Piecewise-linear lasso path, `lambda1` strictly decreasing.
#[derive(Debug, Clone)]
pub struct LassoPath<F> {
    points: Vec<PathPoint<F>>,
    rows: usize,
    cols: usize,
}

impl<F: Scalar> LassoPath<F> {
    pub fn points(&self) -> &[PathPoint<F>] {
        &self.points
    }

    pub fn design_dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn terminus(&self) -> &PathPoint<F> {
        self.points.last().expect("path has at least one point")
    }

    /// l1 norm at the path terminus.
    pub fn l1_end(&self) -> F {
        l1_norm(&self.terminus().beta)
    }

    /// Solution with `||b||_1 = t1 * l1_end`, by interpolation between
    /// breakpoints. `t1` must lie in `[0, 1]`.
    pub fn solve_at(&self, t1: F) -> Result<Array1<F>> {
        if !(t1 >= F::zero() && t1 <= F::one()) {
            return Err(Error::InvalidArgument(format!(
                "t1 fraction {t1} outside [0, 1]"
            )));
        }
        let end = self.l1_end();
        if end <= F::zero() {
            return Ok(Array1::zeros(self.cols));
        }
        let target = t1 * end;
        let mut prev = &self.points[0];
        let mut prev_l1 = l1_norm(&prev.beta);
        if target <= prev_l1 {
            return Ok(prev.beta.clone());
        }
        for point in &self.points[1..] {
            let l1 = l1_norm(&point.beta);
            if target <= l1 {
                let span = l1 - prev_l1;
                if span <= F::zero() {
                    return Ok(point.beta.clone());
                }
                let theta = (target - prev_l1) / span;
                return Ok(&prev.beta + &((&point.beta - &prev.beta) * theta));
            }
            prev = point;
            prev_l1 = l1;
        }
        Ok(self.terminus().beta.clone())
    }

    /// Solution at an arbitrary penalty level, by interpolation; levels
    /// above the start give the zero vector, levels below the terminus are
    /// clamped to the terminus.
    pub fn solve_at_lambda(&self, lambda1: F) -> Array1<F> {
        let first = &self.points[0];
        if lambda1 >= first.lambda1 {
            return first.beta.clone();
        }
        let mut prev = first;
        for point in &self.points[1..] {
            if lambda1 >= point.lambda1 {
                let span = prev.lambda1 - point.lambda1;
                if span <= F::zero() {
                    return point.beta.clone();
                }
                let theta = (prev.lambda1 - lambda1) / span;
                return &prev.beta + &((&point.beta - &prev.beta) * theta);
            }
            prev = point;
        }
        self.terminus().beta.clone()
    }

    /// Penalty level whose solution has `||b||_1 = t1 * l1_end` (inverse of
    /// `solve_at` on the lambda axis).
    pub fn lambda_at(&self, t1: F) -> Result<F> {
        if !(t1 >= F::zero() && t1 <= F::one()) {
            return Err(Error::InvalidArgument(format!(
                "t1 fraction {t1} outside [0, 1]"
            )));
        }
        let end = self.l1_end();
        if end <= F::zero() {
            return Ok(self.points[0].lambda1);
        }
        let target = t1 * end;
        let mut prev = &self.points[0];
        let mut prev_l1 = l1_norm(&prev.beta);
        for point in &self.points[1..] {
            let l1 = l1_norm(&point.beta);
            if target <= l1 {
                let span = l1 - prev_l1;
                if span <= F::zero() {
                    return Ok(point.lambda1);
                }
                let theta = (target - prev_l1) / span;
                return Ok(prev.lambda1 + (point.lambda1 - prev.lambda1) * theta);
            }
            prev = point;
            prev_l1 = l1;
        }
        Ok(self.terminus().lambda1)
    }
}

fn l1_norm<F: Scalar>(beta: &Array1<F>) -> F {
    beta.iter().map(|b| b.abs()).sum()
}

/// Max violation of the lasso optimality conditions at (`beta`, `lambda1`):
/// `|X_j^T (y - X beta) - lambda1 sign(beta_j)|` for nonzero coordinates,
/// `max(0, |X_j^T (y - X beta)| - lambda1)` for zero ones.
pub fn kkt_residual<F: Scalar>(x: &Array2<F>, y: &Array1<F>, beta: &Array1<F>, lambda1: F) -> F {
    let r = y - &x.dot(beta);
    let c = x.t().dot(&r);
    let mut worst = F::zero();
    for j in 0..beta.len() {
        let v = if beta[j] != F::zero() {
            (c[j] - lambda1 * beta[j].signum()).abs()
        } else {
            (c[j].abs() - lambda1).max(F::zero())
        };
        worst = worst.max(v);
    }
    worst
}

/// Incrementally maintained Gram matrix of the active columns.
struct ActiveGram<F> {
    entries: Vec<F>, // row-major k x k
    size: usize,
}

impl<F: Scalar> ActiveGram<F> {
    fn new() -> Self {
        Self {
            entries: Vec::new(),
            size: 0,
        }
    }

    fn push(&mut self, cross: &[F], diag: F) {
        let k = self.size;
        let mut next = Vec::with_capacity((k + 1) * (k + 1));
        for i in 0..k {
            next.extend_from_slice(&self.entries[i * k..i * k + k]);
            next.push(cross[i]);
        }
        next.extend_from_slice(cross);
        next.push(diag);
        self.entries = next;
        self.size = k + 1;
    }

    fn remove(&mut self, idx: usize) {
        let k = self.size;
        let mut next = Vec::with_capacity((k - 1) * (k - 1));
        for i in 0..k {
            if i == idx {
                continue;
            }
            for j in 0..k {
                if j == idx {
                    continue;
                }
                next.push(self.entries[i * k + j]);
            }
        }
        self.entries = next;
        self.size = k - 1;
    }

    fn as_array(&self) -> Array2<F> {
        Array2::from_shape_vec((self.size, self.size), self.entries.clone())
            .expect("entries match dimensions")
    }
}

enum Event<F> {
    Join(usize, F), // column, sign of correlation at entry
    Leave(usize),   // position within the active set
    RunOut,         // no event before lambda reaches zero
}

/// Full lasso path of `1/2 ||y - X b||^2 + lambda1 ||b||_1` from
/// `lambda1 = ||X^T y||_inf` down to the least-squares end, or until the
/// active set holds `min(rows, cols)` variables, or `lambda1 <= 1e-12`.
/// Columns with zero norm never activate. Correlation ties break toward the
/// lowest column index.
pub fn lasso_path<F: Scalar>(x: &Array2<F>, y: &Array1<F>) -> Result<LassoPath<F>> {
    let rows = x.nrows();
    let cols = x.ncols();
    if cols == 0 {
        return Err(Error::InvalidArgument("design has no columns".into()));
    }
    if y.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "{} rows vs {} responses",
            rows,
            y.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix);
    }

    let mut col_norm2 = Array1::<F>::zeros(cols);
    for j in 0..cols {
        col_norm2[j] = x.column(j).iter().map(|&v| v * v).sum();
    }
    let max_norm2 = col_norm2.iter().cloned().fold(F::zero(), F::max);
    let usable: Vec<bool> = (0..cols)
        .map(|j| col_norm2[j] > F::epsilon() * max_norm2)
        .collect();

    let cap = cols.min(rows.max(1));
    let lambda_stop = F::cast(1e-12);

    let mut beta = Array1::<F>::zeros(cols);
    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<F> = Vec::new();
    let mut gram = ActiveGram::new();
    let mut is_active = vec![false; cols];

    let mut corr = x.t().dot(y);
    let mut lambda = F::zero();
    let mut first = None;
    for j in 0..cols {
        if usable[j] && corr[j].abs() > lambda {
            lambda = corr[j].abs();
            first = Some(j);
        }
    }

    let mut points = vec![PathPoint {
        lambda1: lambda,
        t1_fraction: F::zero(),
        active: first.map(|j| vec![j]).unwrap_or_default(),
        beta: beta.clone(),
    }];

    if let (Some(j), true) = (first, lambda > lambda_stop) {
        activate(x, j, &mut active, &mut signs, &mut gram, &mut is_active, corr[j].signum());
        // Each step adds or drops one variable; the generous bound below
        // only guards against numerical cycling.
        let max_steps = 8 * (rows + cols) + 64;
        for _ in 0..max_steps {
            let sign_vec = Array1::from(signs.clone());
            let chol = match crate::linalg::cholesky(&gram.as_array()) {
                Some(c) => c,
                None => break, // collinear active set: end the path here
            };
            let dir = crate::linalg::cholesky_solve(&chol, &sign_vec);

            // u = X_A d_A, a = X^T u
            let mut u = Array1::<F>::zeros(rows);
            for (pos, &j) in active.iter().enumerate() {
                let d = dir[pos];
                if d != F::zero() {
                    u.scaled_add(d, &x.column(j));
                }
            }
            let a = x.t().dot(&u);

            let tiny = lambda * F::cast(1e-13);
            let mut best_t = lambda; // default: run out to lambda = 0
            let mut event = Event::RunOut;

            for j in 0..cols {
                if !usable[j] || is_active[j] {
                    continue;
                }
                let plus_den = F::one() - a[j];
                if plus_den > F::zero() {
                    let t = (lambda - corr[j]) / plus_den;
                    if t > tiny && t < best_t - tiny {
                        best_t = t;
                        event = Event::Join(j, F::one());
                    }
                }
                let minus_den = F::one() + a[j];
                if minus_den > F::zero() {
                    let t = (lambda + corr[j]) / minus_den;
                    if t > tiny && t < best_t - tiny {
                        best_t = t;
                        event = Event::Join(j, -F::one());
                    }
                }
            }
            for (pos, &j) in active.iter().enumerate() {
                if dir[pos] != F::zero() {
                    let t = -beta[j] / dir[pos];
                    // drops take priority at (near-)ties
                    if t > tiny && t <= best_t + tiny && t < lambda - tiny {
                        best_t = t.min(best_t);
                        event = Event::Leave(pos);
                    }
                }
            }

            // advance to the event
            for (pos, &j) in active.iter().enumerate() {
                beta[j] = beta[j] + best_t * dir[pos];
            }
            lambda = lambda - best_t;

            let mut done = false;
            match event {
                Event::Leave(pos) => {
                    let j = active[pos];
                    beta[j] = F::zero();
                    active.remove(pos);
                    signs.remove(pos);
                    gram.remove(pos);
                    is_active[j] = false;
                }
                Event::Join(j, sign) if active.len() < cap => {
                    activate(x, j, &mut active, &mut signs, &mut gram, &mut is_active, sign);
                }
                Event::Join(..) => {
                    // the next variable may not activate: the path is only
                    // valid down to this penalty level
                    done = true;
                }
                Event::RunOut => {
                    lambda = F::zero();
                    done = true;
                }
            }

            // refresh correlations from scratch to avoid drift
            let residual = y - &x.dot(&beta);
            corr = x.t().dot(&residual);

            points.push(PathPoint {
                lambda1: lambda,
                t1_fraction: F::zero(),
                active: active.clone(),
                beta: beta.clone(),
            });

            if done || lambda <= lambda_stop {
                break;
            }
            if active.is_empty() {
                // re-pick the most correlated column (rare: a drop emptied the set)
                let mut next = None;
                let mut best = lambda_stop;
                for j in 0..cols {
                    if usable[j] && corr[j].abs() > best {
                        best = corr[j].abs();
                        next = Some(j);
                    }
                }
                match next {
                    Some(j) => {
                        lambda = best;
                        activate(x, j, &mut active, &mut signs, &mut gram, &mut is_active, corr[j].signum());
                    }
                    None => break,
                }
            }
        }
    }

    let mut path = LassoPath { points, rows, cols };
    let end = path.l1_end();
    if end > F::zero() {
        for point in &mut path.points {
            point.t1_fraction = l1_norm(&point.beta) / end;
        }
    }
    Ok(path)
}

fn activate<F: Scalar>(
    x: &Array2<F>,
    j: usize,
    active: &mut Vec<usize>,
    signs: &mut Vec<F>,
    gram: &mut ActiveGram<F>,
    is_active: &mut [bool],
    sign: F,
) {
    let col = x.column(j);
    let cross: Vec<F> = active
        .iter()
        .map(|&i| x.column(i).iter().zip(col.iter()).map(|(&a, &b)| a * b).sum())
        .collect();
    let diag = col.iter().map(|&v| v * v).sum();
    gram.push(&cross, diag);
    active.push(j);
    signs.push(sign);
    is_active[j] = true;
}
