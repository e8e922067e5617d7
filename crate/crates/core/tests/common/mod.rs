//! Shared test oracles, kept independent of the solver implementations
//! they check.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use survenet::survival::SurvivalDataset;

/// Cyclic coordinate descent for `1/2 ||y - X b||^2 + lambda ||b||_1`,
/// run until the duality gap drops below `gap_tol` (absolute).
pub fn cd_lasso(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    gap_tol: f64,
) -> Array1<f64> {
    let (n, p) = (x.nrows(), x.ncols());
    let col_sq: Vec<f64> = (0..p)
        .map(|j| x.column(j).iter().map(|v| v * v).sum())
        .collect();
    let mut beta = Array1::<f64>::zeros(p);
    let mut r = y.clone();
    for cycle in 0..200_000 {
        for j in 0..p {
            if col_sq[j] <= 0.0 {
                continue;
            }
            let old = beta[j];
            let rho = x.column(j).dot(&r) + col_sq[j] * old;
            let new = soft_threshold(rho, lambda) / col_sq[j];
            if new != old {
                let delta = new - old;
                for i in 0..n {
                    r[i] -= delta * x[[i, j]];
                }
                beta[j] = new;
            }
        }
        if cycle % 5 == 4 {
            if duality_gap(x, y, &beta, &r, lambda) <= gap_tol {
                break;
            }
        }
    }
    beta
}

pub fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

pub fn lasso_objective(x: &Array2<f64>, y: &Array1<f64>, beta: &Array1<f64>, lambda: f64) -> f64 {
    let r = y - &x.dot(beta);
    0.5 * r.iter().map(|v| v * v).sum::<f64>() + lambda * beta.iter().map(|v| v.abs()).sum::<f64>()
}

fn duality_gap(
    x: &Array2<f64>,
    y: &Array1<f64>,
    beta: &Array1<f64>,
    r: &Array1<f64>,
    lambda: f64,
) -> f64 {
    let primal =
        0.5 * r.iter().map(|v| v * v).sum::<f64>() + lambda * beta.iter().map(|v| v.abs()).sum::<f64>();
    let xtr = x.t().dot(r);
    let linf = xtr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if linf > lambda && linf > 0.0 {
        lambda / linf
    } else {
        1.0
    };
    let dual = {
        let y2: f64 = y.iter().map(|v| v * v).sum();
        let diff: f64 = y
            .iter()
            .zip(r.iter())
            .map(|(&yi, &ri)| (yi - scale * ri) * (yi - scale * ri))
            .sum();
        0.5 * y2 - 0.5 * diff
    };
    primal - dual
}

/// Projection onto `{z >= lb} ∩ {a_i^T z <= b_i for all i}` by Dykstra's
/// alternating projections.
pub fn dykstra_project(
    z0: &Array1<f64>,
    a: &Array2<f64>,
    b: &Array1<f64>,
    lb: &Array1<f64>,
    sweeps: usize,
) -> Array1<f64> {
    let m = b.len();
    let nz = z0.len();
    let row_sq: Vec<f64> = (0..m)
        .map(|i| a.row(i).iter().map(|v| v * v).sum())
        .collect();
    let mut z = z0.clone();
    let mut corrections = vec![Array1::<f64>::zeros(nz); m + 1];
    for _ in 0..sweeps {
        let mut moved = 0.0f64;
        // box set first
        let w = &z + &corrections[0];
        let mut z_new = w.clone();
        for j in 0..nz {
            if lb[j].is_finite() && z_new[j] < lb[j] {
                z_new[j] = lb[j];
            }
        }
        corrections[0] = &w - &z_new;
        moved = moved.max((&z_new - &z).iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
        z = z_new;
        for i in 0..m {
            let w = &z + &corrections[i + 1];
            let viol = a.row(i).dot(&w) - b[i];
            let z_new = if viol > 0.0 && row_sq[i] > 0.0 {
                let scale = viol / row_sq[i];
                let mut out = w.clone();
                for j in 0..nz {
                    out[j] -= scale * a[[i, j]];
                }
                out
            } else {
                w.clone()
            };
            corrections[i + 1] = &w - &z_new;
            moved = moved.max((&z_new - &z).iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
            z = z_new;
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Brute-force projected gradient descent for
/// `min 1/2 z^T Q z + q^T z  s.t.  A z <= b, z >= lb`, capped at
/// `max_iter` iterations (early exit when the iterate stops moving).
pub fn projected_gradient_qp(
    q: &Array2<f64>,
    lin: &Array1<f64>,
    a: &Array2<f64>,
    b: &Array1<f64>,
    lb: &Array1<f64>,
    max_iter: usize,
) -> Array1<f64> {
    let nz = lin.len();
    // Lipschitz constant by power iteration
    let mut v = Array1::<f64>::from_elem(nz, 1.0 / (nz as f64).sqrt());
    let mut lip = 1.0f64;
    for _ in 0..200 {
        let w = q.dot(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            break;
        }
        lip = norm;
        v = w / norm;
    }
    let step = 1.0 / (lip * 1.05 + 1e-12);

    let mut z = dykstra_project(&Array1::zeros(nz), a, b, lb, 400);
    let mut stall = 0;
    for _ in 0..max_iter {
        let grad = q.dot(&z) + lin;
        let trial = &z - &(grad * step);
        let z_new = dykstra_project(&trial, a, b, lb, 200);
        let moved = (&z_new - &z)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        z = z_new;
        if moved < 1e-14 * (1.0 + z.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            stall += 1;
            if stall >= 25 {
                break;
            }
        } else {
            stall = 0;
        }
    }
    z
}

/// Random dense regression instance with entries in [-1, 1].
pub fn random_instance(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> (Array2<f64>, Array1<f64>) {
    let x = Array2::from_shape_fn((rows, cols), |_| rng.random::<f64>() * 2.0 - 1.0);
    let y = Array1::from_shape_fn(rows, |_| rng.random::<f64>() * 4.0 - 2.0);
    (x, y)
}

/// Random censored survival dataset with a linear signal on the first two
/// covariates.
pub fn random_survival(
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
    censor_fraction: f64,
    noise: f64,
) -> SurvivalDataset<f64> {
    let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>());
    let times = Array1::from_shape_fn(n, |i| {
        let mut t = 1.0 + 1.8 * x[[i, 0]];
        if p > 1 {
            t -= 1.2 * x[[i, 1]];
        }
        t + noise * (rng.random::<f64>() - 0.5)
    });
    let status: Vec<u8> = (0..n)
        .map(|_| u8::from(rng.random::<f64>() >= censor_fraction))
        .collect();
    // keep at least two events
    let mut status = status;
    status[0] = 1;
    if n > 1 {
        status[1] = 1;
    }
    SurvivalDataset::new(times, status, x).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs()))
}
