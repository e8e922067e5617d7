//! Censoring-constrained quadratic programs for the AEnetCC and WEnetCC
//! estimators, and the operator-splitting solver they share.
//!
//! Both estimators split the coefficients into nonnegative parts
//! `b = b+ - b-` so the weighted l1 budget becomes one linear row, and
//! carry one slack `xi_k >= 0` per censored observation for the rows
//! `Y_cens <= X_cens b + xi`. The decision vector is `z = (b+, b-, xi)`.

use ndarray::{Array1, Array2};

use crate::enet::{AdaptiveWeights, FitResult, Method};
use crate::error::{Error, Result};
use crate::linalg;
use crate::num::Scalar;
use crate::survival::{recover_intercept, StandardizedData};

/// Quadratic program `min 1/2 z^T Q z + q^T z` subject to `A z <= b` and
/// `z >= lower_bounds` (entries may be `-inf` to disable a bound).
#[derive(Debug, Clone)]
pub struct QpProblem<F> {
    pub q_matrix: Array2<F>,
    pub linear_term: Array1<F>,
    pub ineq_matrix: Array2<F>,
    pub ineq_rhs: Array1<F>,
    pub lower_bounds: Array1<F>,
}

impl<F: Scalar> QpProblem<F> {
    pub fn dim(&self) -> usize {
        self.linear_term.len()
    }

    pub fn n_ineq(&self) -> usize {
        self.ineq_rhs.len()
    }

    pub fn objective(&self, z: &Array1<F>) -> F {
        F::cast(0.5) * z.dot(&self.q_matrix.dot(z)) + self.linear_term.dot(z)
    }

    /// Max constraint violation (inequality rows and lower bounds).
    pub fn primal_violation(&self, z: &Array1<F>) -> F {
        let mut worst = F::zero();
        if self.n_ineq() > 0 {
            let az = self.ineq_matrix.dot(z);
            for i in 0..self.n_ineq() {
                worst = worst.max(az[i] - self.ineq_rhs[i]);
            }
        }
        for j in 0..self.dim() {
            if self.lower_bounds[j].is_finite() {
                worst = worst.max(self.lower_bounds[j] - z[j]);
            }
        }
        worst.max(F::zero())
    }
}

/// Solution returned by [`solve_qp`].
#[derive(Debug, Clone)]
pub struct QpSolution<F> {
    pub z: Array1<F>,
    pub objective: F,
    pub kkt_residual: F,
    pub iterations: usize,
    pub polished: bool,
}

const MAX_ADMM_ITER: usize = 200_000;

/// Censoring-constrained adaptive elastic net QP in original coordinates:
///
/// ```text
/// min 1/2 ||Y_u - X_u (b+ - b-)||^2 + lambda2 (||b+||^2 + ||b-||^2)
///     + lambda0 xi^T xi
/// s.t. sum_j w_j (b+_j + b-_j) <= t1,  Y_cens <= X_cens (b+ - b-) + xi,
///      b+, b-, xi >= 0
/// ```
pub fn build_aenetcc_qp<F: Scalar>(
    std: &StandardizedData<F>,
    w_hat: &AdaptiveWeights<F>,
    t1: F,
    lambda2: F,
    lambda0: F,
) -> Result<QpProblem<F>> {
    check_cc_args(std, w_hat.values().len(), t1, lambda2, lambda0)?;
    let p = std.p();
    let n_c = std.n_censored();
    let dim = 2 * p + n_c;
    let x_u = std.x_uncensored();
    let y_u = std.y_uncensored();
    let gram = x_u.t().dot(&x_u);
    let xty = x_u.t().dot(&y_u);

    let mut q = Array2::<F>::zeros((dim, dim));
    let two_l2 = F::cast(2.0) * lambda2;
    for i in 0..p {
        for j in 0..p {
            q[[i, j]] = gram[[i, j]];
            q[[i, p + j]] = -gram[[i, j]];
            q[[p + i, j]] = -gram[[i, j]];
            q[[p + i, p + j]] = gram[[i, j]];
        }
        q[[i, i]] += two_l2;
        q[[p + i, p + i]] += two_l2;
    }
    let two_l0 = F::cast(2.0) * lambda0;
    for k in 0..n_c {
        q[[2 * p + k, 2 * p + k]] = two_l0;
    }

    let mut lin = Array1::<F>::zeros(dim);
    for j in 0..p {
        lin[j] = -xty[j];
        lin[p + j] = xty[j];
    }

    let (a, b) = cc_constraints(p, n_c, w_hat.values(), &std.x_censored, &std.y_censored, None, t1);
    Ok(QpProblem {
        q_matrix: q,
        linear_term: lin,
        ineq_matrix: a,
        ineq_rhs: b,
        lower_bounds: Array1::zeros(dim),
    })
}

/// Censoring-constrained weighted elastic net QP in the scaled coordinates
/// `u = w * sqrt(1+lambda2) * b`:
///
/// ```text
/// min ||Y* - X** (u+ - u-)||^2 + lambda0 xi^T xi
/// s.t. sum_j (u+_j + u-_j) <= t1,
///      Y_cens <= X_cens_scaled (u+ - u-) + xi,  u+, u-, xi >= 0
/// ```
///
/// with `X** = (1+lambda2)^{-1/2} [X_u W^{-1}; sqrt(lambda2) I]`,
/// `Y* = [Y_u; 0]`, and the censored rows rescaled consistently so the
/// slack stays on the response scale.
pub fn build_wenetcc_qp<F: Scalar>(
    std: &StandardizedData<F>,
    w: &AdaptiveWeights<F>,
    t1: F,
    lambda2: F,
    lambda0: F,
) -> Result<QpProblem<F>> {
    check_cc_args(std, w.values().len(), t1, lambda2, lambda0)?;
    let p = std.p();
    let n_c = std.n_censored();
    let dim = 2 * p + n_c;
    let wv = w.values();
    let shrink = (F::one() + lambda2).sqrt().recip();

    // X** top block and its Gram; the ridge block contributes
    // lambda2/(1+lambda2) / w_j^2 ... no: columns are already divided by w.
    let mut x_top = std.x_uncensored();
    for j in 0..p {
        let s = shrink / wv[j];
        x_top.column_mut(j).mapv_inplace(|v| v * s);
    }
    let y_u = std.y_uncensored();
    let mut gram = x_top.t().dot(&x_top);
    let ridge_entry = lambda2 * shrink * shrink; // from the sqrt(lambda2) I block
    for j in 0..p {
        gram[[j, j]] += ridge_entry;
    }
    let xty = x_top.t().dot(&y_u); // the stacked zeros add nothing

    let mut q = Array2::<F>::zeros((dim, dim));
    let two = F::cast(2.0);
    for i in 0..p {
        for j in 0..p {
            q[[i, j]] = two * gram[[i, j]];
            q[[i, p + j]] = -two * gram[[i, j]];
            q[[p + i, j]] = -two * gram[[i, j]];
            q[[p + i, p + j]] = two * gram[[i, j]];
        }
    }
    let two_l0 = two * lambda0;
    for k in 0..n_c {
        q[[2 * p + k, 2 * p + k]] = two_l0;
    }

    let mut lin = Array1::<F>::zeros(dim);
    for j in 0..p {
        lin[j] = -two * xty[j];
        lin[p + j] = two * xty[j];
    }

    // censored rows mapped to u coordinates: X_c beta = (X_c / (w sqrt(1+l2))) u
    let col_scale: Array1<F> = wv.mapv(|wj| (wj / shrink).recip());
    let ones = AdaptiveWeights::ones(p);
    let (a, b) = cc_constraints(
        p,
        n_c,
        ones.values(),
        &std.x_censored,
        &std.y_censored,
        Some(&col_scale),
        t1,
    );
    Ok(QpProblem {
        q_matrix: q,
        linear_term: lin,
        ineq_matrix: a,
        ineq_rhs: b,
        lower_bounds: Array1::zeros(dim),
    })
}

fn check_cc_args<F: Scalar>(
    std: &StandardizedData<F>,
    w_len: usize,
    t1: F,
    lambda2: F,
    lambda0: F,
) -> Result<()> {
    if w_len != std.p() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} covariates",
            w_len,
            std.p()
        )));
    }
    if t1 < F::zero() || !t1.is_finite() {
        return Err(Error::InvalidArgument(format!("t1 must be >= 0, got {t1}")));
    }
    if lambda2 < F::zero() || lambda0 < F::zero() {
        return Err(Error::InvalidArgument(
            "lambda2 and lambda0 must be nonnegative".into(),
        ));
    }
    Ok(())
}

fn cc_constraints<F: Scalar>(
    p: usize,
    n_c: usize,
    budget_weights: &Array1<F>,
    x_censored: &Array2<F>,
    y_censored: &Array1<F>,
    col_scale: Option<&Array1<F>>,
    t1: F,
) -> (Array2<F>, Array1<F>) {
    let dim = 2 * p + n_c;
    let mut a = Array2::<F>::zeros((1 + n_c, dim));
    let mut b = Array1::<F>::zeros(1 + n_c);
    for j in 0..p {
        a[[0, j]] = budget_weights[j];
        a[[0, p + j]] = budget_weights[j];
    }
    b[0] = t1;
    for k in 0..n_c {
        for j in 0..p {
            let v = match col_scale {
                Some(s) => x_censored[[k, j]] * s[j],
                None => x_censored[[k, j]],
            };
            a[[1 + k, j]] = -v;
            a[[1 + k, p + j]] = v;
        }
        a[[1 + k, 2 * p + k]] = -F::one();
        b[1 + k] = -y_censored[k];
    }
    (a, b)
}

/// Operator-splitting (ADMM) solve with diagonal preconditioning, followed
/// by an active-set polish; deterministic for fixed inputs.
pub fn solve_qp<F: Scalar>(problem: &QpProblem<F>, tol: F) -> Result<QpSolution<F>> {
    if tol <= F::zero() {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let nz = problem.dim();
    let m = problem.n_ineq();
    if problem.q_matrix.nrows() != nz
        || problem.q_matrix.ncols() != nz
        || (m > 0 && problem.ineq_matrix.ncols() != nz)
        || problem.lower_bounds.len() != nz
    {
        return Err(Error::DimensionMismatch("QP blocks disagree".into()));
    }
    let rows = m + nz;

    // stacked constraint matrix [A; I] with box l <= M z <= u
    let mut mat = Array2::<F>::zeros((rows, nz));
    for i in 0..m {
        for j in 0..nz {
            mat[[i, j]] = problem.ineq_matrix[[i, j]];
        }
    }
    for j in 0..nz {
        mat[[m + j, j]] = F::one();
    }
    let mut lower = Array1::<F>::from_elem(rows, F::neg_infinity());
    let mut upper = Array1::<F>::from_elem(rows, F::infinity());
    for i in 0..m {
        upper[i] = problem.ineq_rhs[i];
    }
    for j in 0..nz {
        lower[m + j] = problem.lower_bounds[j];
    }

    // Ruiz-style diagonal equilibration of [Q; M]
    let mut d = Array1::<F>::from_elem(nz, F::one());
    let mut e = Array1::<F>::from_elem(rows, F::one());
    let mut q_s = problem.q_matrix.clone();
    let mut m_s = mat.clone();
    for _ in 0..3 {
        for j in 0..nz {
            let mut norm = F::zero();
            for i in 0..nz {
                norm = norm.max(q_s[[i, j]].abs());
            }
            for i in 0..rows {
                norm = norm.max(m_s[[i, j]].abs());
            }
            let s = if norm > F::zero() {
                norm.sqrt().recip()
            } else {
                F::one()
            };
            d[j] = d[j] * s;
            for i in 0..nz {
                q_s[[i, j]] = q_s[[i, j]] * s;
                q_s[[j, i]] = q_s[[j, i]] * s;
            }
            for i in 0..rows {
                m_s[[i, j]] = m_s[[i, j]] * s;
            }
        }
        for i in 0..rows {
            let mut norm = F::zero();
            for j in 0..nz {
                norm = norm.max(m_s[[i, j]].abs());
            }
            let s = if norm > F::zero() {
                norm.sqrt().recip()
            } else {
                F::one()
            };
            e[i] = e[i] * s;
            for j in 0..nz {
                m_s[[i, j]] = m_s[[i, j]] * s;
            }
        }
    }
    let q_lin_s = &problem.linear_term * &d;
    let lower_s = &lower * &e;
    let upper_s = &upper * &e;

    let sigma = F::cast(1e-6);
    let alpha = F::cast(1.6);
    let mut rho = F::cast(0.1);

    let factorize = |rho: F| -> Option<Array2<F>> {
        let mut h = q_s.clone();
        let mtm = m_s.t().dot(&m_s);
        for i in 0..nz {
            for j in 0..nz {
                h[[i, j]] = h[[i, j]] + rho * mtm[[i, j]];
            }
            h[[i, i]] += sigma;
        }
        linalg::cholesky(&h)
    };
    let mut chol = factorize(rho).ok_or_else(|| Error::InvalidArgument(
        "QP matrix is not positive semidefinite".into(),
    ))?;

    let mut x = Array1::<F>::zeros(nz);
    let mut zc = Array1::<F>::zeros(rows);
    for i in 0..rows {
        zc[i] = F::zero().max(lower_s[i]).min(upper_s[i]);
    }
    let mut y = Array1::<F>::zeros(rows);

    let mut best: Option<(F, Array1<F>)> = None;
    let mut iterations = 0;
    while iterations < MAX_ADMM_ITER {
        iterations += 1;
        let rhs = {
            let mut v = &zc * rho - &y;
            v = m_s.t().dot(&v);
            for j in 0..nz {
                v[j] = v[j] + sigma * x[j] - q_lin_s[j];
            }
            v
        };
        x = linalg::cholesky_solve(&chol, &rhs);
        let mx = m_s.dot(&x);
        let zt = &mx * alpha + &zc * (F::one() - alpha);
        let mut z_new = Array1::<F>::zeros(rows);
        for i in 0..rows {
            z_new[i] = (zt[i] + y[i] / rho).max(lower_s[i]).min(upper_s[i]);
        }
        for i in 0..rows {
            y[i] = y[i] + rho * (zt[i] - z_new[i]);
        }
        zc = z_new;

        if iterations % 25 == 0 || iterations == MAX_ADMM_ITER {
            // physical-space iterate and residuals
            let z_phys = &x * &d;
            let y_phys = &y * &e;
            let (r_prim, r_dual, comp) = residuals(problem, &mat, &lower, &z_phys, &y_phys);
            let r_all = r_prim.max(r_dual).max(comp);
            if best.as_ref().map_or(true, |(b, _)| r_all < *b) {
                best = Some((r_all, z_phys.clone()));
            }
            // try to finish exactly once the iterate is roughly converged
            if r_all <= F::cast(1e-5).max(tol * F::cast(100.0)) || iterations % 500 == 0 {
                if let Some(sol) = polish(problem, &mat, &lower, &z_phys, &y_phys, tol) {
                    return Ok(QpSolution {
                        iterations,
                        ..sol
                    });
                }
            }
            if r_all <= tol {
                let (kkt, obj) = (r_all, problem.objective(&z_phys));
                return Ok(QpSolution {
                    z: z_phys,
                    objective: obj,
                    kkt_residual: kkt,
                    iterations,
                    polished: false,
                });
            }
            // rho adaptation
            if iterations % 100 == 0 {
                let scale_p = inf_norm(&mat.dot(&z_phys)).max(F::one());
                let qz = problem.q_matrix.dot(&z_phys);
                let scale_d = inf_norm(&qz)
                    .max(inf_norm(&problem.linear_term))
                    .max(F::one());
                let ratio = ((r_prim / scale_p) / (r_dual / scale_d).max(F::cast(1e-30))).sqrt();
                let new_rho = (rho * ratio).max(F::cast(1e-6)).min(F::cast(1e6));
                if new_rho > rho * F::cast(5.0) || new_rho < rho / F::cast(5.0) {
                    rho = new_rho;
                    chol = factorize(rho).ok_or_else(|| Error::InvalidArgument(
                        "QP matrix is not positive semidefinite".into(),
                    ))?;
                }
            }
        }
    }

    let (residual, z_best) = best.expect("at least one residual check ran");
    if residual <= tol {
        let obj = problem.objective(&z_best);
        return Ok(QpSolution {
            z: z_best,
            objective: obj,
            kkt_residual: residual,
            iterations,
            polished: false,
        });
    }
    Err(Error::NoConvergence {
        iterations,
        residual: residual.to_f64_lossy(),
        best: z_best.iter().map(|v| v.to_f64_lossy()).collect(),
    })
}

fn inf_norm<F: Scalar>(v: &Array1<F>) -> F {
    v.iter().fold(F::zero(), |m, x| m.max(x.abs()))
}

/// Primal, dual and complementarity residuals in physical space.
/// `y` lives on the stacked rows `[A; I]`.
fn residuals<F: Scalar>(
    problem: &QpProblem<F>,
    mat: &Array2<F>,
    lower: &Array1<F>,
    z: &Array1<F>,
    y: &Array1<F>,
) -> (F, F, F) {
    let m = problem.n_ineq();
    let r_prim = problem.primal_violation(z);
    let stat = {
        let mut v = problem.q_matrix.dot(z) + &problem.linear_term;
        v = v + &mat.t().dot(y);
        inf_norm(&v)
    };
    let mut comp = F::zero();
    let mz = mat.dot(z);
    for i in 0..mat.nrows() {
        if i < m {
            comp = comp.max((y[i] * (problem.ineq_rhs[i] - mz[i])).abs());
            comp = comp.max((-y[i]).max(F::zero())); // inequality duals must be >= 0
        } else if lower[i].is_finite() {
            comp = comp.max((y[i] * (mz[i] - lower[i])).abs());
            comp = comp.max(y[i].max(F::zero())); // lower-bound duals must be <= 0
        }
    }
    (r_prim, stat, comp)
}

/// Active-set polish: guess the active rows/bounds from the ADMM iterate,
/// solve the equality-constrained KKT system exactly and keep the result
/// only if it verifies.
fn polish<F: Scalar>(
    problem: &QpProblem<F>,
    mat: &Array2<F>,
    lower: &Array1<F>,
    z: &Array1<F>,
    y: &Array1<F>,
    tol: F,
) -> Option<QpSolution<F>> {
    let nz = problem.dim();
    let m = problem.n_ineq();
    let scale = inf_norm(z).max(F::one());
    let slack_tol = F::cast(1e-6) * scale;
    let dual_tol = F::cast(1e-9) * inf_norm(y).max(F::one());

    let az = if m > 0 {
        problem.ineq_matrix.dot(z)
    } else {
        Array1::zeros(0)
    };
    let active_rows: Vec<usize> = (0..m)
        .filter(|&i| problem.ineq_rhs[i] - az[i] <= slack_tol || y[i] > dual_tol)
        .collect();
    let fixed: Vec<usize> = (0..nz)
        .filter(|&j| {
            lower[m + j].is_finite()
                && (z[j] - problem.lower_bounds[j] <= slack_tol || y[m + j] < -dual_tol)
        })
        .collect();
    let free: Vec<usize> = (0..nz).filter(|j| !fixed.contains(j)).collect();
    let nf = free.len();
    let na = active_rows.len();
    if na > nf {
        return None;
    }

    // KKT system over (z_free, nu)
    let dim = nf + na;
    let mut kkt = Array2::<F>::zeros((dim, dim));
    let mut rhs = Array1::<F>::zeros(dim);
    for (a, &ja) in free.iter().enumerate() {
        for (b, &jb) in free.iter().enumerate() {
            kkt[[a, b]] = problem.q_matrix[[ja, jb]];
        }
        let mut r = -problem.linear_term[ja];
        for &jx in &fixed {
            r = r - problem.q_matrix[[ja, jx]] * problem.lower_bounds[jx];
        }
        rhs[a] = r;
    }
    for (r, &row) in active_rows.iter().enumerate() {
        for (a, &ja) in free.iter().enumerate() {
            kkt[[a, nf + r]] = problem.ineq_matrix[[row, ja]];
            kkt[[nf + r, a]] = problem.ineq_matrix[[row, ja]];
        }
        let mut b = problem.ineq_rhs[row];
        for &jx in &fixed {
            b = b - problem.ineq_matrix[[row, jx]] * problem.lower_bounds[jx];
        }
        rhs[nf + r] = b;
    }
    let sol = linalg::solve_lu(&kkt, &rhs)?;

    let mut z_pol = Array1::<F>::zeros(nz);
    for &jx in &fixed {
        z_pol[jx] = problem.lower_bounds[jx];
    }
    for (a, &ja) in free.iter().enumerate() {
        z_pol[ja] = sol[a];
    }
    let mut y_pol = Array1::<F>::zeros(mat.nrows());
    for (r, &row) in active_rows.iter().enumerate() {
        y_pol[row] = sol[nf + r];
    }
    // bound duals from stationarity
    let grad = problem.q_matrix.dot(&z_pol) + &problem.linear_term + &if m > 0 {
        problem.ineq_matrix.t().dot(&y_pol.slice(ndarray::s![..m]).to_owned())
    } else {
        Array1::zeros(nz)
    };
    for &jx in &fixed {
        y_pol[m + jx] = grad[jx]; // lower-bound dual is <= 0 in this convention
    }

    // verify signs and feasibility before accepting
    let check_tol = tol.max(F::cast(1e-10)) * scale.max(F::one());
    for (r, &row) in active_rows.iter().enumerate() {
        let _ = row;
        if sol[nf + r] < -check_tol {
            return None;
        }
    }
    for &jx in &fixed {
        if grad[jx] < -check_tol {
            return None;
        }
    }
    let (r_prim, r_dual, comp) = {
        let mut y_conv = y_pol.clone();
        // convert bound duals to the stacked +M^T y convention: lower-bound
        // dual lambda >= 0 enters stationarity as -lambda, i.e. y = -lambda
        for &jx in &fixed {
            y_conv[m + jx] = -grad[jx];
        }
        residuals(problem, mat, lower, &z_pol, &y_conv)
    };
    let kkt_res = r_prim.max(r_dual).max(comp);
    if kkt_res <= tol {
        Some(QpSolution {
            objective: problem.objective(&z_pol),
            z: z_pol,
            kkt_residual: kkt_res,
            iterations: 0,
            polished: true,
        })
    } else {
        None
    }
}

/// Default threshold on `|beta_j|` defining the selected predictor set of
/// constrained fits.
pub const DEFAULT_VARSIGMA: f64 = 1e-5;

fn cc_fit_common<F: Scalar>(
    method: Method,
    std: &StandardizedData<F>,
    problem: &QpProblem<F>,
    naive_scale: &Array1<F>,
    final_factor: F,
    lambda1_meta: F,
    lambda2: F,
    lambda0: F,
    varsigma: F,
) -> Result<FitResult<F>> {
    let p = std.p();
    let n_c = std.n_censored();
    let tol = F::cast(1e-8);
    let sol = solve_qp(problem, tol)?;
    let mut u = Array1::<F>::zeros(p);
    for j in 0..p {
        u[j] = sol.z[j] - sol.z[p + j];
    }
    let t1_abs = (0..p).map(|j| sol.z[j] + sol.z[p + j]).sum::<F>();
    let xi = Array1::from_iter((0..n_c).map(|k| sol.z[2 * p + k]));
    let beta_naive = &u * naive_scale;
    let beta = beta_naive.mapv(|b| b * final_factor);
    let beta_starred = match method {
        Method::WEnetCC => Some(beta_naive.mapv(|b| b * (F::one() + lambda2).sqrt())),
        _ => None,
    };
    let intercept = recover_intercept(&beta, std)?;
    let selected = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| b.abs() > varsigma)
        .map(|(j, _)| j)
        .collect();
    Ok(FitResult {
        method,
        beta,
        beta_naive,
        beta_starred,
        intercept,
        lambda1: lambda1_meta,
        t1_fraction: F::one(),
        t1_abs,
        lambda2,
        lambda0: Some(lambda0),
        selected,
        xi: Some(xi),
        rescale_factor: final_factor,
    })
}

/// Adaptive elastic net with censoring constraints at a fixed budget.
pub fn aenetcc_fit<F: Scalar>(
    std: &StandardizedData<F>,
    w_hat: &AdaptiveWeights<F>,
    t1: F,
    lambda2: F,
    lambda0: F,
    varsigma: F,
) -> Result<FitResult<F>> {
    let problem = build_aenetcc_qp(std, w_hat, t1, lambda2, lambda0)?;
    let naive_scale = Array1::from_elem(std.p(), F::one());
    cc_fit_common(
        Method::AEnetCC,
        std,
        &problem,
        &naive_scale,
        F::one() + lambda2,
        F::zero(),
        lambda2,
        lambda0,
        varsigma,
    )
}

/// Weighted elastic net with censoring constraints at a fixed budget
/// (budget and solve in the scaled coordinates).
pub fn wenetcc_fit<F: Scalar>(
    std: &StandardizedData<F>,
    w: &AdaptiveWeights<F>,
    t1: F,
    lambda2: F,
    lambda0: F,
    varsigma: F,
) -> Result<FitResult<F>> {
    let problem = build_wenetcc_qp(std, w, t1, lambda2, lambda0)?;
    let one_plus = F::one() + lambda2;
    let naive_scale = w.values().mapv(|wj| (wj * one_plus.sqrt()).recip());
    cc_fit_common(
        Method::WEnetCC,
        std,
        &problem,
        &naive_scale,
        one_plus,
        F::zero(),
        lambda2,
        lambda0,
        varsigma,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::{prepare, SurvivalDataset};
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_prepared(n: usize, p: usize, censor_every: usize, seed: u64) -> crate::survival::Prepared<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ndarray::Array2::from_shape_fn((n, p), |_| rng.random::<f64>());
        let times = Array1::from_shape_fn(n, |i| {
            1.0 + 2.0 * x[[i, 0]] - x[[i, 1]] + 0.3 * (rng.random::<f64>() - 0.5)
        });
        let status: Vec<u8> = (0..n)
            .map(|i| if censor_every > 0 && i % censor_every == 0 { 0 } else { 1 })
            .collect();
        let data = SurvivalDataset::new(times, status, x).unwrap();
        prepare(&data).unwrap()
    }

    #[test]
    fn dimensions_and_rows() {
        // p = 3 with two censored rows: 8 decision variables, 3 inequality rows
        let x = ndarray::Array2::from_shape_fn((5, 3), |(i, j)| ((i + 1) * (j + 2)) as f64 * 0.1);
        let data = SurvivalDataset::new(
            array![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![1, 0, 1, 0, 1],
            x,
        )
        .unwrap();
        let prep = prepare(&data).unwrap();
        assert_eq!(prep.std.n_censored(), 2);
        let w = AdaptiveWeights::ones(3);
        let qp = build_aenetcc_qp(&prep.std, &w, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(qp.dim(), 8);
        assert_eq!(qp.n_ineq(), 3);
        for i in 0..qp.dim() {
            for j in 0..qp.dim() {
                assert!((qp.q_matrix[[i, j]] - qp.q_matrix[[j, i]]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unconstrained_matches_linear_solve() {
        // strictly convex quadratic, bounds disabled, no inequality rows
        let q = array![[4.0, 1.0, 0.0], [1.0, 3.0, 0.2], [0.0, 0.2, 2.0]];
        let lin = array![-1.0, 2.0, -0.3];
        let problem = QpProblem {
            q_matrix: q.clone(),
            linear_term: lin.clone(),
            ineq_matrix: Array2::zeros((0, 3)),
            ineq_rhs: Array1::zeros(0),
            lower_bounds: Array1::from_elem(3, f64::NEG_INFINITY),
        };
        let sol = solve_qp(&problem, 1e-8).unwrap();
        let direct = crate::linalg::solve_spd(&q, &lin.mapv(|v| -v)).unwrap();
        for j in 0..3 {
            assert!((sol.z[j] - direct[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_budget_closes_coefficients_and_slack_takes_over() {
        let prep = toy_prepared(15, 3, 3, 5);
        let w = AdaptiveWeights::ones(3);
        let fit = aenetcc_fit(&prep.std, &w, 0.0, 0.6, 1.3, 1e-5).unwrap();
        for j in 0..3 {
            assert!(fit.beta[j].abs() < 1e-7, "beta {}", fit.beta[j]);
        }
        // with beta = 0 the slack closed form is max(0, y_censored)
        let xi = fit.xi.as_ref().unwrap();
        for (k, &yc) in prep.std.y_censored.iter().enumerate() {
            assert!((xi[k] - yc.max(0.0)).abs() < 1e-6, "xi {} vs {}", xi[k], yc);
        }
        assert!(fit.selected.is_empty());
    }

    #[test]
    fn censoring_rows_feasible_and_split_complementary() {
        let prep = toy_prepared(20, 4, 4, 9);
        let w = AdaptiveWeights::ones(4);
        let fit = aenetcc_fit(&prep.std, &w, 1.5, 1.1, 2.0, 1e-5).unwrap();
        let xi = fit.xi.as_ref().unwrap();
        for (k, &yc) in prep.std.y_censored.iter().enumerate() {
            let pred: f64 = (0..4).map(|j| prep.std.x_censored[[k, j]] * fit.beta_naive[j]).sum();
            assert!(yc <= pred + xi[k] + 1e-8);
        }
    }

    #[test]
    fn budget_tight_when_unconstrained_violates() {
        let prep = toy_prepared(25, 3, 0, 3);
        let w = AdaptiveWeights::ones(3);
        // tiny budget forces the constraint active
        let t1 = 0.05;
        let fit = aenetcc_fit(&prep.std, &w, t1, 0.6, 1.0, 1e-5).unwrap();
        let spent: f64 = fit.beta_naive.iter().map(|b| b.abs()).sum();
        assert!((spent - t1).abs() < 1e-6, "budget used {spent}");
    }
}
