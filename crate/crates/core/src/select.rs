//! Tuning-parameter grids, stratified k-fold cross-validation on weighted
//! data, the AICc model score and the variable-selection loop for the
//! censoring-constrained estimators.

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::enet::{
    adaptive_weights_from_enet, aenet_problem, default_wenet_source, enet_problem, fit_from_path,
    wenet_problem, wenet_weights, AdaptiveWeights, FitAt, FitResult, Method, PathProblem,
};
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::path::lasso_path;
use crate::qp::{aenetcc_fit, wenetcc_fit};
use crate::survival::{prepare, KMWeightVector, Prepared, StandardizedData, SurvivalDataset};

/// Tuning configuration. The JSON form accepts exactly the keys named
/// here; unspecified keys fall back to the defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningGrid<F> {
    pub lambda2_grid: Vec<F>,
    pub lambda0_grid: Vec<F>,
    pub t1_grid: Vec<F>,
    pub folds: usize,
    pub gamma: F,
    pub varsigma: F,
    pub seed: u64,
    pub bootstrap_b: usize,
    pub cv_refit_weights: bool,
}

impl<F: Scalar> Default for TuningGrid<F> {
    fn default() -> Self {
        Self {
            lambda2_grid: [0.0, 0.6, 1.1, 1.7, 2.2, 2.8, 3.3, 3.9, 4.4, 5.0]
                .iter()
                .map(|&v| F::cast(v))
                .collect(),
            // lambda0 = 0 would void the censoring constraints, so the
            // default grid starts above it
            lambda0_grid: [1.0, 1.4, 1.8, 2.2, 2.6, 3.0]
                .iter()
                .map(|&v| F::cast(v))
                .collect(),
            t1_grid: (0..=50).map(|i| F::cast(i as f64 / 50.0)).collect(),
            folds: 5,
            gamma: F::one(),
            varsigma: F::cast(crate::qp::DEFAULT_VARSIGMA),
            seed: 0,
            bootstrap_b: 500,
            cv_refit_weights: false,
        }
    }
}

impl<F: Scalar> TuningGrid<F> {
    pub fn validate(&self, n_u: usize) -> Result<()> {
        if self.lambda2_grid.is_empty() || self.t1_grid.is_empty() {
            return Err(Error::Config("tuning grids must be nonempty".into()));
        }
        if self.lambda2_grid.iter().any(|v| *v < F::zero()) {
            return Err(Error::Config("lambda2 grid must be nonnegative".into()));
        }
        if self.lambda0_grid.iter().any(|v| *v < F::zero()) {
            return Err(Error::Config("lambda0 grid must be nonnegative".into()));
        }
        if self
            .t1_grid
            .iter()
            .any(|v| *v < F::zero() || *v > F::one())
        {
            return Err(Error::Config("t1 grid must lie in [0, 1]".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("cross-validation needs at least 2 folds".into()));
        }
        if self.folds > n_u {
            return Err(Error::Config(format!(
                "{} folds exceed the {} uncensored observations",
                self.folds, n_u
            )));
        }
        if self.gamma < F::zero() {
            return Err(Error::Config("gamma must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self>
    where
        F: serde::de::DeserializeOwned,
    {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("grid JSON: {e}")))
    }
}

/// Stratified fold assignment over the standardized (sorted) rows: within
/// each censoring stratum rows are shuffled deterministically and dealt
/// round-robin, so fold sizes differ by at most one per stratum and every
/// fold holds at least one uncensored observation when `k <= n_u`.
pub fn kfold_split<F: Scalar>(
    std: &StandardizedData<F>,
    k: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let n_u = std.n_uncensored();
    if k < 2 {
        return Err(Error::InvalidArgument(
            "cross-validation needs at least 2 folds".into(),
        ));
    }
    if k > n_u {
        return Err(Error::InvalidArgument(format!(
            "cannot stratify {n_u} uncensored observations into {k} folds"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; std.n()];
    for stratum in [&std.uncensored_index, &std.censored_index] {
        let mut rows = stratum.clone();
        rows.shuffle(&mut rng);
        for (pos, &row) in rows.iter().enumerate() {
            assignment[row] = pos % k;
        }
    }
    Ok(assignment)
}

/// One fold's fitted model and the rows it held out.
#[derive(Debug, Clone)]
pub struct FoldFit<F> {
    pub held_out: Vec<usize>,
    pub beta: Array1<F>,
    pub intercept: F,
}

/// Weighted holdout error of one fitted model over a set of rows:
/// Kaplan–Meier-weighted squared residuals of the uncensored rows.
fn weighted_holdout_ssr<F: Scalar>(
    data: &SurvivalDataset<F>,
    weights: &KMWeightVector<F>,
    rows: &[usize],
    beta: &Array1<F>,
    intercept: F,
) -> F {
    let mut acc = F::zero();
    for &i in rows {
        if data.is_event(i) {
            let mut pred = intercept;
            for j in 0..data.p() {
                pred = pred + data.covariates()[[i, j]] * beta[j];
            }
            let r = data.times()[i] - pred;
            acc = acc + weights.weights()[i] * r * r;
        }
    }
    acc
}

/// Cross-validation score: Kaplan–Meier-weighted squared residuals of the
/// held-out uncensored observations, accumulated across folds. The folds
/// must partition the rows and each must hold at least one uncensored
/// observation.
pub fn cv_score<F: Scalar>(
    data: &SurvivalDataset<F>,
    weights: &KMWeightVector<F>,
    folds: &[FoldFit<F>],
) -> Result<F> {
    if folds.len() < 2 {
        return Err(Error::InvalidArgument(
            "cross-validation needs at least 2 folds".into(),
        ));
    }
    let mut seen = vec![false; data.n()];
    for fold in folds {
        if !fold.held_out.iter().any(|&i| data.is_event(i)) {
            return Err(Error::DegenerateFold);
        }
        for &i in &fold.held_out {
            if seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "row {i} held out by more than one fold"
                )));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::InvalidArgument(
            "folds do not cover every observation".into(),
        ));
    }
    let mut total = F::zero();
    for fold in folds {
        total = total
            + weighted_holdout_ssr(data, weights, &fold.held_out, &fold.beta, fold.intercept);
    }
    Ok(total)
}

/// AICc-type score `n_u ln(CV-S) + 2 k n_u / (n_u - k - 1)` with `k` the
/// number of selected predictors.
pub fn aicc_score<F: Scalar>(cv_s: F, n_u: usize, k_params: usize) -> Result<F> {
    if k_params + 1 >= n_u {
        return Err(Error::ScoreUndefined(format!(
            "needs n_u - k - 1 > 0 (n_u = {n_u}, k = {k_params})"
        )));
    }
    if !(cv_s > F::zero()) {
        return Err(Error::ScoreUndefined(format!(
            "CV-S must be positive, got {cv_s}"
        )));
    }
    let nf = F::cast(n_u as f64);
    let kf = F::cast(k_params as f64);
    Ok(nf * cv_s.ln() + F::cast(2.0) * kf * nf / (nf - kf - F::one()))
}

/// Path-based estimator to tune.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMethod {
    Enet,
    AEnet,
    WEnet,
}

impl PathMethod {
    pub fn method(&self) -> Method {
        match self {
            PathMethod::Enet => Method::Enet,
            PathMethod::AEnet => Method::AEnet,
            PathMethod::WEnet => Method::WEnet,
        }
    }
}

/// One grid point of the cross-validation surface.
#[derive(Debug, Clone, Serialize)]
pub struct CvPoint<F> {
    pub lambda2: F,
    pub t1: F,
    pub cv_s: F,
}

/// Outcome of tuning a path method: the full-data refit at the selected
/// `(t1, lambda2)` pair plus the explored surface.
#[derive(Debug, Clone)]
pub struct TunedFit<F> {
    pub fit: FitResult<F>,
    pub t1: F,
    pub lambda2: F,
    pub cv_s: F,
    pub weights_used: Option<AdaptiveWeights<F>>,
    pub surface: Vec<CvPoint<F>>,
}

fn build_problem<F: Scalar>(
    method: PathMethod,
    std: &StandardizedData<F>,
    lambda2: F,
    weights: Option<&AdaptiveWeights<F>>,
) -> Result<PathProblem<F>> {
    match method {
        PathMethod::Enet => enet_problem(std, lambda2),
        PathMethod::AEnet => aenet_problem(
            std,
            lambda2,
            weights.expect("AEnet tuning always carries weights"),
        ),
        PathMethod::WEnet => wenet_problem(
            std,
            lambda2,
            weights.expect("WEnet tuning always carries weights"),
        ),
    }
}

fn method_weights<F: Scalar>(
    prep: &Prepared<F>,
    method: PathMethod,
    grid: &TuningGrid<F>,
) -> Result<Option<AdaptiveWeights<F>>> {
    Ok(match method {
        PathMethod::Enet => None,
        PathMethod::AEnet => Some(adaptive_weights_from_enet(prep, grid.gamma, grid)?),
        PathMethod::WEnet => Some(wenet_weights(prep, default_wenet_source(prep), grid)?),
    })
}

fn splitmix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Cross-validate `(t1, lambda2)` for a path method and refit on the full
/// data at the optimum. Penalty weights (adaptive or SE-based) are
/// estimated once on the full data unless `cv_refit_weights` asks for
/// per-fold re-estimation. Ties break toward smaller `t1`, then smaller
/// `lambda2`.
pub fn tune_path_method<F: Scalar>(
    prep: &Prepared<F>,
    method: PathMethod,
    grid: &TuningGrid<F>,
) -> Result<TunedFit<F>> {
    grid.validate(prep.std.n_uncensored())?;
    let weights = method_weights(prep, method, grid)?;
    tune_with_weights(prep, method, grid, weights)
}

/// Tuning loop at fixed full-data penalty weights.
pub fn tune_with_weights<F: Scalar>(
    prep: &Prepared<F>,
    method: PathMethod,
    grid: &TuningGrid<F>,
    weights: Option<AdaptiveWeights<F>>,
) -> Result<TunedFit<F>> {
    let k = grid.folds;
    let assignment = kfold_split(&prep.std, k, grid.seed)?;
    let n = prep.data.n();
    let n_l2 = grid.lambda2_grid.len();
    let n_t1 = grid.t1_grid.len();
    let mut scores = vec![F::zero(); n_l2 * n_t1];

    for fold in 0..k {
        let held: Vec<usize> = (0..n).filter(|&i| assignment[i] == fold).collect();
        let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();
        if !held.iter().any(|&i| prep.data.is_event(i)) {
            return Err(Error::DegenerateFold);
        }
        let train_prep = prepare(&prep.data.subset_rows(&train)?)?;
        let fold_weights = if grid.cv_refit_weights {
            let mut inner = grid.clone();
            inner.seed = splitmix(grid.seed, fold as u64 + 1);
            method_weights(&train_prep, method, &inner)?
        } else {
            weights.clone()
        };
        for (i2, &lambda2) in grid.lambda2_grid.iter().enumerate() {
            let problem = build_problem(method, &train_prep.std, lambda2, fold_weights.as_ref())?;
            let path = lasso_path(&problem.x, &problem.y)?;
            for (i1, &t1) in grid.t1_grid.iter().enumerate() {
                let fit = fit_from_path(&problem, &path, FitAt::T1(t1), &train_prep.std)?;
                scores[i2 * n_t1 + i1] = scores[i2 * n_t1 + i1]
                    + weighted_holdout_ssr(
                        &prep.data,
                        &prep.weights,
                        &held,
                        &fit.beta,
                        fit.intercept,
                    );
            }
        }
    }

    let mut surface = Vec::with_capacity(n_l2 * n_t1);
    let mut best: Option<(F, F, F)> = None; // (cv_s, t1, lambda2)
    for (i2, &lambda2) in grid.lambda2_grid.iter().enumerate() {
        for (i1, &t1) in grid.t1_grid.iter().enumerate() {
            let cv_s = scores[i2 * n_t1 + i1];
            surface.push(CvPoint { lambda2, t1, cv_s });
            let better = match &best {
                None => true,
                Some((b_cv, b_t1, b_l2)) => {
                    cv_s < *b_cv
                        || (cv_s == *b_cv && (t1 < *b_t1 || (t1 == *b_t1 && lambda2 < *b_l2)))
                }
            };
            if better {
                best = Some((cv_s, t1, lambda2));
            }
        }
    }
    let (cv_s, t1, lambda2) = best.expect("grids are nonempty");

    let problem = build_problem(method, &prep.std, lambda2, weights.as_ref())?;
    let path = lasso_path(&problem.x, &problem.y)?;
    let fit = fit_from_path(&problem, &path, FitAt::T1(t1), &prep.std)?;
    Ok(TunedFit {
        fit,
        t1,
        lambda2,
        cv_s,
        weights_used: weights,
        surface,
    })
}

/// Censoring-constrained estimator to select.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcMethod {
    AEnetCC,
    WEnetCC,
}

impl CcMethod {
    pub fn method(&self) -> Method {
        match self {
            CcMethod::AEnetCC => Method::AEnetCC,
            CcMethod::WEnetCC => Method::WEnetCC,
        }
    }

    /// The path method whose tuned parameters and weights this variant
    /// inherits.
    pub fn parent(&self) -> PathMethod {
        match self {
            CcMethod::AEnetCC => PathMethod::AEnet,
            CcMethod::WEnetCC => PathMethod::WEnet,
        }
    }
}

/// One scored constraint-penalty candidate.
#[derive(Debug, Clone, Serialize)]
pub struct CcCandidate<F> {
    pub lambda0: F,
    pub n_selected: usize,
    pub cv_s: F,
    /// Absent when the score is undefined for this candidate.
    pub aicc: Option<F>,
}

/// Outcome of the constrained-model selection.
#[derive(Debug, Clone)]
pub struct CcSelection<F> {
    /// Averaged-coefficient model at the winning `lambda0`.
    pub fit: FitResult<F>,
    /// Unaveraged full-data fit at the winning `lambda0` (carries the
    /// slack vector).
    pub full_fit: FitResult<F>,
    pub lambda0: F,
    pub cv_s: F,
    pub aicc: F,
    pub candidates: Vec<CcCandidate<F>>,
}

fn cc_fit<F: Scalar>(
    method: CcMethod,
    std: &StandardizedData<F>,
    weights: &AdaptiveWeights<F>,
    t1_abs: F,
    lambda2: F,
    lambda0: F,
    varsigma: F,
) -> Result<FitResult<F>> {
    match method {
        CcMethod::AEnetCC => aenetcc_fit(std, weights, t1_abs, lambda2, lambda0, varsigma),
        CcMethod::WEnetCC => wenetcc_fit(std, weights, t1_abs, lambda2, lambda0, varsigma),
    }
}

/// For each constraint penalty: fit on the full data, threshold to the
/// predictor set, refit per fold restricted to that set, average the fold
/// coefficients, score with CV-S and AICc. Returns the lowest-scoring
/// penalty (ties toward the smaller one) with its averaged model.
pub fn select_cc_model<F: Scalar>(
    prep: &Prepared<F>,
    method: CcMethod,
    tuned: &TunedFit<F>,
    grid: &TuningGrid<F>,
) -> Result<CcSelection<F>> {
    grid.validate(prep.std.n_uncensored())?;
    if grid.lambda0_grid.is_empty() {
        return Err(Error::Config("lambda0 grid must be nonempty".into()));
    }
    let weights = tuned.weights_used.as_ref().ok_or_else(|| {
        Error::InvalidArgument(
            "constrained selection needs the penalty weights of the tuned path method".into(),
        )
    })?;
    let t1_abs = tuned.fit.t1_abs;
    let lambda2 = tuned.lambda2;
    let varsigma = grid.varsigma;
    let n = prep.data.n();
    let n_u = prep.std.n_uncensored();
    let p = prep.std.p();
    let assignment = kfold_split(&prep.std, grid.folds, grid.seed)?;

    let mut lambda0s = grid.lambda0_grid.clone();
    lambda0s.sort_by(|a, b| a.partial_cmp(b).expect("finite lambda0"));

    let mut candidates = Vec::with_capacity(lambda0s.len());
    let mut best: Option<(F, F, FitResult<F>, FitResult<F>, F)> = None;
    for &lambda0 in &lambda0s {
        let full = cc_fit(method, &prep.std, weights, t1_abs, lambda2, lambda0, varsigma)?;
        let ps = full.selected.clone();
        let (avg_beta, intercept, cv_s) = if ps.is_empty() {
            // null model: intercept only
            let alpha = prep.std.weighted_mean_y;
            let beta = Array1::<F>::zeros(p);
            let all: Vec<usize> = (0..n).collect();
            let cv_s = weighted_holdout_ssr(&prep.data, &prep.weights, &all, &beta, alpha);
            (beta, alpha, cv_s)
        } else {
            let sub_weights = AdaptiveWeights::new(
                Array1::from_iter(ps.iter().map(|&j| weights.values()[j])),
                weights.source,
                weights.gamma,
            )?;
            let mut sum = Array1::<F>::zeros(p);
            for fold in 0..grid.folds {
                let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();
                let train_prep = prepare(&prep.data.subset_rows(&train)?.select_columns(&ps))?;
                let fold_fit = cc_fit(
                    method,
                    &train_prep.std,
                    &sub_weights,
                    t1_abs,
                    lambda2,
                    lambda0,
                    varsigma,
                )?;
                for (pos, &j) in ps.iter().enumerate() {
                    sum[j] = sum[j] + fold_fit.beta[pos];
                }
            }
            let avg = sum.mapv(|v| v / F::cast(grid.folds as f64));
            let intercept = crate::survival::recover_intercept(&avg, &prep.std)?;
            let all: Vec<usize> = (0..n).collect();
            let cv_s = weighted_holdout_ssr(&prep.data, &prep.weights, &all, &avg, intercept);
            (avg, intercept, cv_s)
        };
        let aicc = aicc_score(cv_s, n_u, ps.len()).ok();
        candidates.push(CcCandidate {
            lambda0,
            n_selected: ps.len(),
            cv_s,
            aicc,
        });
        if let Some(score) = aicc {
            let is_better = best.as_ref().map_or(true, |(b, ..)| score < *b);
            if is_better {
                let selected: Vec<usize> = avg_beta
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| b.abs() > varsigma)
                    .map(|(j, _)| j)
                    .collect();
                let one_plus = F::one() + lambda2;
                let avg_fit = FitResult {
                    method: method.method(),
                    beta_naive: avg_beta.mapv(|b| b / one_plus),
                    beta_starred: match method {
                        CcMethod::WEnetCC => {
                            Some(avg_beta.mapv(|b| b / one_plus.sqrt()))
                        }
                        CcMethod::AEnetCC => None,
                    },
                    beta: avg_beta,
                    intercept,
                    lambda1: tuned.fit.lambda1,
                    t1_fraction: tuned.t1,
                    t1_abs,
                    lambda2,
                    lambda0: Some(lambda0),
                    selected,
                    xi: full.xi.clone(),
                    rescale_factor: one_plus,
                };
                best = Some((score, lambda0, avg_fit, full, cv_s));
            }
        }
    }

    let (aicc, lambda0, fit, full_fit, cv_s) = best.ok_or_else(|| {
        Error::ScoreUndefined("no constraint penalty produced a valid AICc score".into())
    })?;
    Ok(CcSelection {
        fit,
        full_fit,
        lambda0,
        cv_s,
        aicc,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    fn toy_prepared(n: usize, p: usize, censor_every: usize, seed: u64) -> Prepared<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>());
        let times = Array1::from_shape_fn(n, |i| {
            1.0 + 2.5 * x[[i, 0]] + 0.4 * (rng.random::<f64>() - 0.5)
        });
        let status: Vec<u8> = (0..n)
            .map(|i| if censor_every > 0 && i % censor_every == 0 { 0 } else { 1 })
            .collect();
        let data = SurvivalDataset::new(times, status, x).unwrap();
        prepare(&data).unwrap()
    }

    #[test]
    fn grid_defaults_match_documented_values() {
        let g: TuningGrid<f64> = TuningGrid::default();
        assert_eq!(g.lambda2_grid[1], 0.6);
        assert_eq!(g.lambda2_grid.len(), 10);
        assert_eq!(g.lambda0_grid, vec![1.0, 1.4, 1.8, 2.2, 2.6, 3.0]);
        assert_eq!(g.folds, 5);
        assert_eq!(g.gamma, 1.0);
        assert_eq!(g.varsigma, 1e-5);
        assert_eq!(g.bootstrap_b, 500);
        assert!(!g.cv_refit_weights);
    }

    #[test]
    fn grid_json_roundtrip_rejects_unknown_keys() {
        let g = TuningGrid::<f64>::from_json_str(r#"{"folds": 3, "seed": 9}"#).unwrap();
        assert_eq!(g.folds, 3);
        assert_eq!(g.seed, 9);
        assert!(TuningGrid::<f64>::from_json_str(r#"{"fold_count": 3}"#).is_err());
    }

    #[test]
    fn kfold_is_stratified_deterministic_and_balanced() {
        let prep = toy_prepared(23, 2, 4, 7);
        let a1 = kfold_split(&prep.std, 5, 42).unwrap();
        let a2 = kfold_split(&prep.std, 5, 42).unwrap();
        assert_eq!(a1, a2);
        let a3 = kfold_split(&prep.std, 5, 43).unwrap();
        assert_ne!(a1, a3);
        // each fold holds at least one uncensored row; sizes within strata
        // differ by at most one
        for fold in 0..5 {
            assert!(prep
                .std
                .uncensored_index
                .iter()
                .any(|&i| a1[i] == fold));
        }
        let mut sizes = [0usize; 5];
        for &i in &prep.std.uncensored_index {
            sizes[a1[i]] += 1;
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn kfold_leave_one_out_when_k_equals_n_u() {
        let prep = toy_prepared(8, 2, 0, 3);
        let a = kfold_split(&prep.std, 8, 1).unwrap();
        let mut seen = vec![0usize; 8];
        for &f in &a {
            seen[f] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert!(kfold_split(&prep.std, 9, 1).is_err());
        assert!(kfold_split(&prep.std, 1, 1).is_err());
    }

    #[test]
    fn cv_score_hand_computed() {
        // n = 6, K = 2: accumulate w_i (y_i - a - x b)^2 over held-out
        // uncensored rows by hand
        let x = Array2::from_shape_vec((6, 1), vec![0.0f64, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let times = Array1::from(vec![1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let data = SurvivalDataset::new(times, vec![1, 1, 0, 1, 1, 1], x).unwrap();
        let prep = prepare(&data).unwrap();
        // weights: d = (1,1,0,1,1,1): w1 = 1/6, w2 = 1/5*(5/6) = 1/6,
        // w3 = 0, w4 = (1/3)(5/6)(4/5) = 2/9, w5 = 2/9, w6 = 2/9
        let w = prep.weights.weights();
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-12);
        assert!((w[3] - 2.0 / 9.0).abs() < 1e-12);
        let folds = vec![
            FoldFit {
                held_out: vec![0, 2, 4],
                beta: Array1::from(vec![1.0]),
                intercept: 0.5,
            },
            FoldFit {
                held_out: vec![1, 3, 5],
                beta: Array1::from(vec![0.8]),
                intercept: 1.0,
            },
        ];
        // fold 1 uncensored held-out: rows 0 (y=1, x=0) and 4 (y=5, x=4)
        // fold 2 held-out: rows 1 (y=2, x=1), 3 (y=4, x=3), 5 (y=6, x=5);
        // row 2 is censored and contributes nothing
        let sq = |r: f64| r * r;
        let expected = (1.0 / 6.0) * sq(1.0 - 0.5)
            + (2.0 / 9.0) * sq(5.0 - (0.5 + 4.0))
            + (1.0 / 6.0) * sq(2.0 - (1.0 + 0.8))
            + (2.0 / 9.0) * sq(4.0 - (1.0 + 0.8 * 3.0))
            + (2.0 / 9.0) * sq(6.0 - (1.0 + 0.8 * 5.0));
        let got = cv_score(&prep.data, &prep.weights, &folds).unwrap();
        assert!((got - expected).abs() < 1e-12, "got {got} expected {expected}");
    }

    #[test]
    fn cv_score_rejects_single_fold_and_uncovered_rows() {
        let prep = toy_prepared(6, 1, 0, 2);
        let whole = vec![FoldFit {
            held_out: (0..6).collect(),
            beta: Array1::zeros(1),
            intercept: 0.0,
        }];
        assert!(cv_score(&prep.data, &prep.weights, &whole).is_err());
        let partial = vec![
            FoldFit {
                held_out: vec![0, 1],
                beta: Array1::zeros(1),
                intercept: 0.0,
            },
            FoldFit {
                held_out: vec![2, 3],
                beta: Array1::zeros(1),
                intercept: 0.0,
            },
        ];
        assert!(cv_score(&prep.data, &prep.weights, &partial).is_err());
    }

    #[test]
    fn aicc_direct_formula_and_monotonicity() {
        let s = aicc_score(2.0f64, 50, 5).unwrap();
        assert!((s - 46.02099539163363).abs() < 1e-9);
        // monotone in k at fixed CV-S
        let mut prev = aicc_score(2.0f64, 50, 0).unwrap();
        for k in 1..10 {
            let cur = aicc_score(2.0f64, 50, k).unwrap();
            assert!(cur > prev);
            prev = cur;
        }
        // log term vanishes at CV-S = 1
        let s1 = aicc_score(1.0f64, 50, 4).unwrap();
        assert!((s1 - 2.0 * 4.0 * 50.0 / 45.0).abs() < 1e-12);
        assert!(aicc_score(2.0f64, 6, 5).is_err());
        assert!(aicc_score(0.0f64, 50, 5).is_err());
    }

    #[test]
    fn tuning_ties_break_toward_smaller_t1_then_lambda2() {
        // constant response: every (t1, lambda2) gives the same null-ish fit
        let x = Array2::from_shape_fn((10, 2), |(i, j)| ((i + j) % 3) as f64);
        let times = Array1::from_elem(10, 2.0f64);
        let data = SurvivalDataset::new(times, vec![1; 10], x).unwrap();
        let prep = prepare(&data).unwrap();
        let mut grid = TuningGrid::<f64>::default();
        grid.folds = 2;
        grid.t1_grid = vec![0.0, 0.5, 1.0];
        grid.lambda2_grid = vec![0.0, 1.0];
        let tuned = tune_with_weights(&prep, PathMethod::Enet, &grid, None).unwrap();
        assert_eq!(tuned.t1, 0.0);
        assert_eq!(tuned.lambda2, 0.0);
    }
}
