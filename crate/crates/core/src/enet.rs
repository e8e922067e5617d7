//! Elastic-net family estimators on the weighted data: the plain elastic
//! net, the adaptive elastic net (AEnet) and the weighted elastic net
//! (WEnet), all reduced to lasso problems in an augmented space.
//!
//! Conventions. With `X_u`, `Y_u` the weighted-standardized uncensored
//! rows, the naive elastic net minimizes the augmented-space objective
//!
//! ```text
//! 1/2 ||Y* - X* b||^2 + lambda1 ||b||_1,
//! X* = [X_u; sqrt(lambda2) I],  Y* = [Y_u; 0]
//! ```
//!
//! which expands to `1/2 ||Y_u - X_u b||^2 + (lambda2/2) ||b||^2 +
//! lambda1 ||b||_1`; the reported estimator is `(1 + lambda2)` times the
//! naive minimizer. AEnet scales column `j` of `X*` by `1/w_hat_j` before
//! the lasso and unscales afterwards. WEnet uses the doubly weighted form
//!
//! ```text
//! ||Y_u - X_u b||^2 + lambda1 sum_j w_j |b_j| + lambda2 sum_j (w_j b_j)^2
//! ```
//!
//! solved through `X* = (1+lambda2)^{-1/2} [X_u; sqrt(lambda2) W]` with
//! scaled coefficients `b* = sqrt(1+lambda2) b`; the output multiplies the
//! starred solution by `sqrt(1+lambda2)`. Both intermediate vectors are
//! kept on the fit result.

use ndarray::{concatenate, Array1, Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gehan;
use crate::num::Scalar;
use crate::path::{lasso_path, LassoPath};
use crate::select::{tune_path_method, PathMethod, TuningGrid};
use crate::survival::{prepare, Prepared, StandardizedData};

/// Cap used in place of infinity when an initial coefficient is zero.
pub const ZERO_COEF_WEIGHT_CAP: f64 = 1e6;
/// Floor applied to bootstrap standard errors used as penalty weights.
pub const SE_WEIGHT_FLOOR: f64 = 1e-6;

/// Estimator family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Enet,
    AEnet,
    AEnetCC,
    WEnet,
    WEnetCC,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Enet => "enet",
            Method::AEnet => "aenet",
            Method::AEnetCC => "aenetcc",
            Method::WEnet => "wenet",
            Method::WEnetCC => "wenetcc",
        }
    }

    pub fn is_constrained(&self) -> bool {
        matches!(self, Method::AEnetCC | Method::WEnetCC)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "enet" => Ok(Method::Enet),
            "aenet" => Ok(Method::AEnet),
            "aenetcc" => Ok(Method::AEnetCC),
            "wenet" => Ok(Method::WEnet),
            "wenetcc" => Ok(Method::WEnetCC),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// Where a set of penalty weights came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    InverseInitialCoefficient,
    BootstrapSe,
    GehanSe,
}

/// Per-coefficient penalty weights, all finite and strictly positive.
#[derive(Debug, Clone)]
pub struct AdaptiveWeights<F> {
    w_hat: Array1<F>,
    pub source: WeightSource,
    pub gamma: F,
}

impl<F: Scalar> AdaptiveWeights<F> {
    pub fn new(w_hat: Array1<F>, source: WeightSource, gamma: F) -> Result<Self> {
        if w_hat.iter().any(|w| !w.is_finite() || *w <= F::zero()) {
            return Err(Error::InvalidArgument(
                "penalty weights must be finite and positive".into(),
            ));
        }
        Ok(Self {
            w_hat,
            source,
            gamma,
        })
    }

    /// Unit weights (reduces AEnet to the plain elastic net).
    pub fn ones(p: usize) -> Self {
        Self {
            w_hat: Array1::from_elem(p, F::one()),
            source: WeightSource::InverseInitialCoefficient,
            gamma: F::zero(),
        }
    }

    pub fn values(&self) -> &Array1<F> {
        &self.w_hat
    }
}

/// `w_j = 1/|b0_j|^gamma`, capped at [`ZERO_COEF_WEIGHT_CAP`]. A zero
/// exponent yields unit weights; an all-zero initial estimate is rejected.
pub fn adaptive_weights_from_initial<F: Scalar>(
    beta0: &Array1<F>,
    gamma: F,
) -> Result<AdaptiveWeights<F>> {
    if gamma < F::zero() {
        return Err(Error::InvalidArgument("gamma must be nonnegative".into()));
    }
    if gamma == F::zero() {
        let mut w = AdaptiveWeights::ones(beta0.len());
        w.gamma = gamma;
        return Ok(w);
    }
    if beta0.iter().all(|b| *b == F::zero()) {
        return Err(Error::UninformativeInitial);
    }
    let cap = F::cast(ZERO_COEF_WEIGHT_CAP);
    let w_hat = beta0.mapv(|b| {
        if b == F::zero() {
            cap
        } else {
            b.abs().powf(-gamma).min(cap)
        }
    });
    AdaptiveWeights::new(w_hat, WeightSource::InverseInitialCoefficient, gamma)
}

/// CV-tuned elastic net as initial estimator, inverted into adaptive
/// weights.
pub fn adaptive_weights_from_enet<F: Scalar>(
    prep: &Prepared<F>,
    gamma: F,
    grid: &TuningGrid<F>,
) -> Result<AdaptiveWeights<F>> {
    let tuned = tune_path_method(prep, PathMethod::Enet, grid)?;
    adaptive_weights_from_initial(&tuned.fit.beta, gamma)
}

/// A lasso problem in augmented coordinates together with the maps back to
/// the original coefficient scale.
#[derive(Debug, Clone)]
pub struct PathProblem<F> {
    pub method: Method,
    pub x: Array2<F>,
    pub y: Array1<F>,
    /// `naive_j = u_j * naive_scale_j` for a path solution `u`.
    pub naive_scale: Array1<F>,
    /// Reported estimator is `final_factor * naive`.
    pub final_factor: F,
    /// Path-space penalty is `lambda1 * lambda_to_path`.
    pub lambda_to_path: F,
    pub lambda2: F,
}

fn augmented_parts<F: Scalar>(std: &StandardizedData<F>, lambda2: F) -> (Array2<F>, Array1<F>) {
    let x_u = std.x_uncensored();
    let y_u = std.y_uncensored();
    let p = std.p();
    if lambda2 == F::zero() {
        return (x_u, y_u);
    }
    let ridge = Array2::from_diag(&Array1::from_elem(p, lambda2.sqrt()));
    let x = concatenate(Axis(0), &[x_u.view(), ridge.view()]).expect("column counts match");
    let y = concatenate(Axis(0), &[y_u.view(), Array1::zeros(p).view()])
        .expect("concatenating vectors");
    (x, y)
}

/// Plain elastic net: lasso on `[X_u; sqrt(lambda2) I]`.
pub fn enet_problem<F: Scalar>(std: &StandardizedData<F>, lambda2: F) -> Result<PathProblem<F>> {
    check_lambda2(lambda2)?;
    let (x, y) = augmented_parts(std, lambda2);
    Ok(PathProblem {
        method: Method::Enet,
        x,
        y,
        naive_scale: Array1::from_elem(std.p(), F::one()),
        final_factor: F::one() + lambda2,
        lambda_to_path: F::one(),
        lambda2,
    })
}

/// Adaptive elastic net: columns of the augmented design divided by the
/// adaptive weights. Columns whose weight reached the zero-coefficient cap
/// are excluded outright (zeroed), which is the cap's purpose.
pub fn aenet_problem<F: Scalar>(
    std: &StandardizedData<F>,
    lambda2: F,
    weights: &AdaptiveWeights<F>,
) -> Result<PathProblem<F>> {
    check_lambda2(lambda2)?;
    check_weight_len(std, weights)?;
    let (mut x, y) = augmented_parts(std, lambda2);
    let w = weights.values();
    let scales = column_scales(w);
    for j in 0..std.p() {
        let scale = scales[j];
        x.column_mut(j).mapv_inplace(|v| v * scale);
    }
    Ok(PathProblem {
        method: Method::AEnet,
        x,
        y,
        naive_scale: scales,
        final_factor: F::one() + lambda2,
        lambda_to_path: F::one(),
        lambda2,
    })
}

/// `1/w_j`, with capped weights mapped to an exact zero so the column can
/// never activate.
fn column_scales<F: Scalar>(w: &Array1<F>) -> Array1<F> {
    let cap = F::cast(ZERO_COEF_WEIGHT_CAP);
    w.mapv(|wj| if wj >= cap { F::zero() } else { F::one() / wj })
}

/// Weighted elastic net: `(1+lambda2)^{-1/2} [X_u W^{-1}; sqrt(lambda2) I]`
/// with the doubly weighted objective folded into the penalty map.
pub fn wenet_problem<F: Scalar>(
    std: &StandardizedData<F>,
    lambda2: F,
    weights: &AdaptiveWeights<F>,
) -> Result<PathProblem<F>> {
    check_lambda2(lambda2)?;
    check_weight_len(std, weights)?;
    let p = std.p();
    let w = weights.values();
    let scales = column_scales(w);
    let shrink = (F::one() + lambda2).sqrt().recip();
    let x_u = std.x_uncensored();
    let y_u = std.y_uncensored();
    let mut top = x_u;
    for j in 0..p {
        let scale = shrink * scales[j];
        top.column_mut(j).mapv_inplace(|v| v * scale);
    }
    let x = if lambda2 == F::zero() {
        top
    } else {
        // the ridge block is sqrt(lambda2) W scaled by the same column
        // factors, i.e. the identity except for excluded columns
        let ridge_diag = scales.mapv(|s| {
            if s == F::zero() {
                F::zero()
            } else {
                lambda2.sqrt() * shrink
            }
        });
        let ridge = Array2::from_diag(&ridge_diag);
        concatenate(Axis(0), &[top.view(), ridge.view()]).expect("column counts match")
    };
    let y = if lambda2 == F::zero() {
        y_u
    } else {
        concatenate(Axis(0), &[y_u.view(), Array1::zeros(p).view()])
            .expect("concatenating vectors")
    };
    let one_plus = F::one() + lambda2;
    Ok(PathProblem {
        method: Method::WEnet,
        x,
        y,
        naive_scale: scales.mapv(|s| s / one_plus.sqrt()),
        // the printed objective carries no 1/2 on the quadratic and divides
        // the l1 level by sqrt(1+lambda2)
        lambda_to_path: (F::cast(2.0) * one_plus.sqrt()).recip(),
        final_factor: one_plus,
        lambda2,
    })
}

fn check_lambda2<F: Scalar>(lambda2: F) -> Result<()> {
    if lambda2 < F::zero() || !lambda2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda2 must be finite and nonnegative, got {lambda2}"
        )));
    }
    Ok(())
}

fn check_weight_len<F: Scalar>(
    std: &StandardizedData<F>,
    weights: &AdaptiveWeights<F>,
) -> Result<()> {
    if weights.values().len() != std.p() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} covariates",
            weights.values().len(),
            std.p()
        )));
    }
    Ok(())
}

/// Where along the path to extract a fit.
#[derive(Debug, Clone, Copy)]
pub enum FitAt<F> {
    /// Fraction of the terminus l1 norm, in [0, 1].
    T1(F),
    /// Penalty level on the method's own lambda1 scale.
    Lambda1(F),
}

/// A fitted model with its tuning metadata, coefficients on the original
/// covariate scale.
#[derive(Debug, Clone)]
pub struct FitResult<F> {
    pub method: Method,
    /// Final estimator (rescaled), original covariate scale.
    pub beta: Array1<F>,
    /// Minimizer of the method's penalized objective before rescaling.
    pub beta_naive: Array1<F>,
    /// Scaled-coordinate solution for the WEnet family, when applicable.
    pub beta_starred: Option<Array1<F>>,
    pub intercept: F,
    /// Penalty level on the method's lambda1 scale.
    pub lambda1: F,
    /// Fraction of the path-terminus l1 norm.
    pub t1_fraction: F,
    /// l1 norm of the solution in path coordinates (the budget the
    /// censoring-constrained variants inherit).
    pub t1_abs: F,
    pub lambda2: F,
    /// Constraint-violation penalty; present only for constrained fits.
    pub lambda0: Option<F>,
    /// Selected variables: exact nonzeros for path fits, `|beta_j| >
    /// varsigma` for constrained fits.
    pub selected: Vec<usize>,
    /// Censoring slack values; present only for constrained fits.
    pub xi: Option<Array1<F>>,
    /// final / naive rescale, recorded for transparency.
    pub rescale_factor: F,
}

impl<F: Scalar> FitResult<F> {
    /// Predicted log time for a raw covariate row.
    pub fn predict_row(&self, row: &[F]) -> F {
        let mut acc = self.intercept;
        for (j, &v) in row.iter().enumerate() {
            acc = acc + self.beta[j] * v;
        }
        acc
    }
}

/// Extract a fit from a solved path at a given t1 fraction or penalty
/// level.
pub fn fit_from_path<F: Scalar>(
    problem: &PathProblem<F>,
    path: &LassoPath<F>,
    at: FitAt<F>,
    std: &StandardizedData<F>,
) -> Result<FitResult<F>> {
    let (u, t1_fraction, lambda_path) = match at {
        FitAt::T1(t1) => {
            let u = path.solve_at(t1)?;
            let lambda_path = path.lambda_at(t1)?;
            (u, t1, lambda_path)
        }
        FitAt::Lambda1(l1) => {
            let lambda_path = l1 * problem.lambda_to_path;
            let u = path.solve_at_lambda(lambda_path);
            let end = path.l1_end();
            let frac = if end > F::zero() {
                u.iter().map(|v| v.abs()).sum::<F>() / end
            } else {
                F::zero()
            };
            (u, frac, lambda_path)
        }
    };
    let t1_abs = u.iter().map(|v| v.abs()).sum::<F>();
    let beta_naive = &u * &problem.naive_scale;
    let beta = beta_naive.mapv(|b| b * problem.final_factor);
    let beta_starred = match problem.method {
        Method::WEnet | Method::WEnetCC => {
            Some(beta_naive.mapv(|b| b * (F::one() + problem.lambda2).sqrt()))
        }
        _ => None,
    };
    let intercept = crate::survival::recover_intercept(&beta, std)?;
    let selected = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != F::zero())
        .map(|(j, _)| j)
        .collect();
    Ok(FitResult {
        method: problem.method,
        beta,
        beta_naive,
        beta_starred,
        intercept,
        lambda1: lambda_path / problem.lambda_to_path,
        t1_fraction,
        t1_abs,
        lambda2: problem.lambda2,
        lambda0: None,
        selected,
        xi: None,
        rescale_factor: problem.final_factor,
    })
}

fn solve_problem<F: Scalar>(
    problem: &PathProblem<F>,
    at: FitAt<F>,
    std: &StandardizedData<F>,
) -> Result<FitResult<F>> {
    let path = lasso_path(&problem.x, &problem.y)?;
    fit_from_path(problem, &path, at, std)
}

/// Naive elastic net, rescaled by `(1 + lambda2)`.
pub fn enet_fit<F: Scalar>(
    std: &StandardizedData<F>,
    lambda1: F,
    lambda2: F,
) -> Result<FitResult<F>> {
    let problem = enet_problem(std, lambda2)?;
    solve_problem(&problem, FitAt::Lambda1(lambda1), std)
}

/// Adaptive elastic net at fixed penalty weights.
pub fn aenet_fit<F: Scalar>(
    std: &StandardizedData<F>,
    lambda1: F,
    lambda2: F,
    weights: &AdaptiveWeights<F>,
) -> Result<FitResult<F>> {
    let problem = aenet_problem(std, lambda2, weights)?;
    solve_problem(&problem, FitAt::Lambda1(lambda1), std)
}

/// Weighted elastic net at fixed penalty weights.
pub fn wenet_fit<F: Scalar>(
    std: &StandardizedData<F>,
    lambda1: F,
    lambda2: F,
    weights: &AdaptiveWeights<F>,
) -> Result<FitResult<F>> {
    let problem = wenet_problem(std, lambda2, weights)?;
    solve_problem(&problem, FitAt::Lambda1(lambda1), std)
}

/// Value of the AEnet penalized objective at a naive coefficient vector:
/// `1/2 ||Y_u - X_u b||^2 + lambda1 sum w_j |b_j| + (lambda2/2) ||b||^2`.
pub fn aenet_objective<F: Scalar>(
    std: &StandardizedData<F>,
    beta_naive: &Array1<F>,
    lambda1: F,
    lambda2: F,
    weights: &AdaptiveWeights<F>,
) -> F {
    let x_u = std.x_uncensored();
    let y_u = std.y_uncensored();
    let r = &y_u - &x_u.dot(beta_naive);
    let half = F::cast(0.5);
    let ls = half * r.iter().map(|&v| v * v).sum::<F>();
    let l1 = weights
        .values()
        .iter()
        .zip(beta_naive.iter())
        .map(|(&w, &b)| w * b.abs())
        .sum::<F>();
    let ridge = half * lambda2 * beta_naive.iter().map(|&b| b * b).sum::<F>();
    ls + lambda1 * l1 + ridge
}

/// Value of the WEnet penalized objective at a naive coefficient vector:
/// `||Y_u - X_u b||^2 + lambda1 sum w_j |b_j| + lambda2 sum (w_j b_j)^2`.
pub fn wenet_objective<F: Scalar>(
    std: &StandardizedData<F>,
    beta_naive: &Array1<F>,
    lambda1: F,
    lambda2: F,
    weights: &AdaptiveWeights<F>,
) -> F {
    let x_u = std.x_uncensored();
    let y_u = std.y_uncensored();
    let r = &y_u - &x_u.dot(beta_naive);
    let ls = r.iter().map(|&v| v * v).sum::<F>();
    let l1 = weights
        .values()
        .iter()
        .zip(beta_naive.iter())
        .map(|(&w, &b)| w * b.abs())
        .sum::<F>();
    let ridge = weights
        .values()
        .iter()
        .zip(beta_naive.iter())
        .map(|(&w, &b)| (w * b) * (w * b))
        .sum::<F>();
    ls + lambda1 * l1 + lambda2 * ridge
}

/// Standard-error-based penalty weights for WEnet.
///
/// `BootstrapSe` resamples the observations with replacement, reruns the
/// whole weighting/standardization/elastic-net pipeline at the CV-tuned
/// `(t1, lambda2)` and takes coordinatewise standard deviations across
/// replicates. `GehanSe` bootstraps the Gehan rank estimator instead and
/// requires more uncensored rows than covariates. Standard errors are
/// floored at [`SE_WEIGHT_FLOOR`].
pub fn wenet_weights<F: Scalar>(
    prep: &Prepared<F>,
    source: WeightSource,
    grid: &TuningGrid<F>,
) -> Result<AdaptiveWeights<F>> {
    let b = grid.bootstrap_b;
    if b < 2 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap replicate count must be at least 2, got {b}"
        )));
    }
    let n = prep.data.n();
    let p = prep.data.p();
    let replicates: Vec<Array1<F>> = match source {
        WeightSource::InverseInitialCoefficient => {
            return Err(Error::InvalidArgument(
                "WEnet weights come from standard errors; use adaptive_weights_from_enet for \
                 inverse-coefficient weights"
                    .into(),
            ))
        }
        WeightSource::BootstrapSe => {
            let tuned = tune_path_method(prep, PathMethod::Enet, grid)?;
            let t1 = tuned.t1;
            let lambda2 = tuned.lambda2;
            (0..b)
                .into_par_iter()
                .map(|r| {
                    bootstrap_replicate(prep, grid.seed, r as u64, |sub| {
                        let problem = enet_problem(&sub.std, lambda2)?;
                        let fit = solve_problem(&problem, FitAt::T1(t1), &sub.std)?;
                        Ok(fit.beta)
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        WeightSource::GehanSe => {
            if prep.data.n_uncensored() <= p {
                return Err(Error::InvalidArgument(format!(
                    "Gehan initial estimator needs more uncensored rows than covariates \
                     ({} uncensored, {p} covariates)",
                    prep.data.n_uncensored()
                )));
            }
            let full = gehan::gehan_fit(&prep.data)?;
            (0..b)
                .into_par_iter()
                .map(|r| {
                    gehan_replicate(prep, grid.seed, r as u64, p, &full)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    let bf = F::cast(b as f64);
    let mut mean = Array1::<F>::zeros(p);
    for rep in &replicates {
        mean = mean + rep;
    }
    mean.mapv_inplace(|v| v / bf);
    let mut var = Array1::<F>::zeros(p);
    for rep in &replicates {
        let d = rep - &mean;
        var = var + &d.mapv(|v| v * v);
    }
    var.mapv_inplace(|v| v / (bf - F::one()));
    let floor = F::cast(SE_WEIGHT_FLOOR);
    let se = var.mapv(|v| v.sqrt().max(floor));
    let _ = n;
    AdaptiveWeights::new(se, source, F::one())
}

/// Pick the WEnet weight source the way the estimator is described:
/// Gehan-based standard errors when the uncensored rows outnumber the
/// covariates, elastic-net bootstrap otherwise.
pub fn default_wenet_source<F: Scalar>(prep: &Prepared<F>) -> WeightSource {
    if prep.data.n_uncensored() > prep.data.p() {
        WeightSource::GehanSe
    } else {
        WeightSource::BootstrapSe
    }
}

const BOOTSTRAP_RETRIES: u64 = 10;

fn replicate_rng(seed: u64, replicate: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // counter-based stream split: replicate and retry never collide
    rng.set_stream(1 + replicate * (BOOTSTRAP_RETRIES + 1) + attempt);
    rng
}

fn bootstrap_replicate<F: Scalar>(
    prep: &Prepared<F>,
    seed: u64,
    replicate: u64,
    fit: impl Fn(&Prepared<F>) -> Result<Array1<F>>,
) -> Result<Array1<F>> {
    let n = prep.data.n();
    let mut last_err = None;
    for attempt in 0..=BOOTSTRAP_RETRIES {
        let mut rng = replicate_rng(seed, replicate, attempt);
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let sub = match prep.data.subset_rows(&rows).and_then(|d| prepare(&d)) {
            Ok(sub) => sub,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        match fit(&sub) {
            Ok(beta) => return Ok(beta),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::DegenerateWeights))
}

fn gehan_replicate<F: Scalar>(
    prep: &Prepared<F>,
    seed: u64,
    replicate: u64,
    p: usize,
    warm: &Array1<F>,
) -> Result<Array1<F>> {
    let n = prep.data.n();
    let mut last_err = None;
    for attempt in 0..=BOOTSTRAP_RETRIES {
        let mut rng = replicate_rng(seed, replicate, attempt);
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let sub = match prep.data.subset_rows(&rows) {
            Ok(s) => s,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        if sub.n_uncensored() <= p {
            last_err = Some(Error::DegenerateWeights);
            continue;
        }
        match gehan::gehan_fit_warm(&sub, Some(warm)) {
            Ok(beta) => return Ok(beta),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::DegenerateWeights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_spd;
    use crate::survival::SurvivalDataset;
    use ndarray::array;
    use rand::Rng;

    fn toy_prepared(n: usize, p: usize, censor_every: usize, seed: u64) -> Prepared<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 2.0 - 1.0);
        let beta: Vec<f64> = (0..p).map(|j| if j < 2 { 1.5 } else { 0.0 }).collect();
        let times = Array1::from_shape_fn(n, |i| {
            let xb: f64 = (0..p).map(|j| x[[i, j]] * beta[j]).sum();
            1.0 + xb + 0.3 * (rng.random::<f64>() - 0.5)
        });
        let status: Vec<u8> = (0..n)
            .map(|i| if censor_every > 0 && i % censor_every == 0 { 0 } else { 1 })
            .collect();
        let data = SurvivalDataset::new(times, status, x).unwrap();
        prepare(&data).unwrap()
    }

    #[test]
    fn adaptive_weights_reciprocal() {
        let w = adaptive_weights_from_initial(&array![2.0, 1.0, 0.5], 1.0).unwrap();
        assert_eq!(w.values().as_slice().unwrap(), &[0.5, 1.0, 2.0]);
    }

    #[test]
    fn adaptive_weights_zero_coefficient_capped() {
        let w = adaptive_weights_from_initial(&array![2.0, 0.0], 1.0).unwrap();
        assert_eq!(w.values()[1], 1e6);
    }

    #[test]
    fn adaptive_weights_gamma_zero_is_unit() {
        let w = adaptive_weights_from_initial(&array![2.0, 0.0, -0.3], 0.0).unwrap();
        assert!(w.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn adaptive_weights_all_zero_rejected() {
        let r = adaptive_weights_from_initial(&array![0.0, 0.0], 1.0);
        assert!(matches!(r, Err(Error::UninformativeInitial)));
    }

    #[test]
    fn aenet_with_unit_weights_is_enet() {
        let prep = toy_prepared(25, 6, 5, 7);
        let ones = AdaptiveWeights::ones(6);
        for (l1, l2) in [(0.05, 0.0), (0.1, 1.1), (0.3, 2.8)] {
            let a = aenet_fit(&prep.std, l1, l2, &ones).unwrap();
            let e = enet_fit(&prep.std, l1, l2).unwrap();
            for j in 0..6 {
                assert!((a.beta[j] - e.beta[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn enet_lambda2_zero_is_plain_lasso() {
        let prep = toy_prepared(30, 5, 6, 11);
        let x_u = prep.std.x_uncensored();
        let y_u = prep.std.y_uncensored();
        let path = lasso_path(&x_u, &y_u).unwrap();
        for l1 in [0.02, 0.08, 0.2] {
            let fit = enet_fit(&prep.std, l1, 0.0).unwrap();
            let direct = path.solve_at_lambda(l1);
            for j in 0..5 {
                assert!((fit.beta[j] - direct[j]).abs() < 1e-10);
                assert!((fit.beta_naive[j] - direct[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn enet_ridge_closed_form_at_zero_l1() {
        let prep = toy_prepared(40, 4, 0, 3);
        let lambda2 = 1.7;
        let fit = enet_fit(&prep.std, 0.0, lambda2).unwrap();
        let x_u = prep.std.x_uncensored();
        let y_u = prep.std.y_uncensored();
        let mut gram = x_u.t().dot(&x_u);
        for j in 0..4 {
            gram[[j, j]] += lambda2;
        }
        let ridge = solve_spd(&gram, &x_u.t().dot(&y_u)).unwrap();
        for j in 0..4 {
            assert!(((1.0 + lambda2) * ridge[j] - fit.beta[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn wenet_with_unit_weights_matches_rescaled_enet() {
        let prep = toy_prepared(25, 6, 5, 13);
        let ones = AdaptiveWeights::ones(6);
        let (l1, l2) = (0.2, 1.1);
        let w = wenet_fit(&prep.std, l1, l2, &ones).unwrap();
        let e = enet_fit(&prep.std, l1 / 2.0, l2).unwrap();
        for j in 0..6 {
            assert!((w.beta_naive[j] - e.beta_naive[j]).abs() < 1e-8);
            assert!((w.beta[j] - e.beta[j]).abs() < 1e-8);
        }
        // starred metadata: sqrt(1+lambda2) times naive
        let starred = w.beta_starred.as_ref().unwrap();
        for j in 0..6 {
            assert!((starred[j] - w.beta_naive[j] * (1.0 + l2).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn augmentation_identity_on_random_vectors() {
        let prep = toy_prepared(20, 4, 4, 19);
        let lambda2 = 2.2;
        let problem = enet_problem(&prep.std, lambda2).unwrap();
        let x_u = prep.std.x_uncensored();
        let y_u = prep.std.y_uncensored();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let beta = Array1::from_shape_fn(4, |_| rng.random::<f64>() * 4.0 - 2.0);
            let r_aug = &problem.y - &problem.x.dot(&beta);
            let lhs: f64 = 0.5 * r_aug.iter().map(|v| v * v).sum::<f64>();
            let r_u = &y_u - &x_u.dot(&beta);
            let rhs: f64 = 0.5 * r_u.iter().map(|v| v * v).sum::<f64>()
                + 0.5 * lambda2 * beta.iter().map(|v| v * v).sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn huge_adaptive_weight_excludes_variable() {
        let prep = toy_prepared(30, 5, 6, 23);
        let mut w = vec![1.0; 5];
        w[3] = 1e6;
        let weights =
            AdaptiveWeights::new(Array1::from(w), WeightSource::InverseInitialCoefficient, 1.0)
                .unwrap();
        for l1 in [0.01, 0.1, 0.5] {
            let fit = aenet_fit(&prep.std, l1, 0.6, &weights).unwrap();
            assert_eq!(fit.beta[3], 0.0);
        }
    }
}
