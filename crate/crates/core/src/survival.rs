//! Censored-data representation, Kaplan–Meier weighting, Efron tail
//! correction and the weighted standardization that removes the intercept
//! from the Stute weighted least-squares objective.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Right-censored survival data on the log-time scale.
///
/// `times` holds the log survival/censoring times, `status` the censoring
/// indicators (`true` = event observed) and `covariates` the n-by-p design.
#[derive(Debug, Clone)]
pub struct SurvivalDataset<F> {
    times: Array1<F>,
    status: Vec<bool>,
    covariates: Array2<F>,
}

impl<F: Scalar> SurvivalDataset<F> {
    /// Build a dataset from raw parts. `status` entries must be exactly 0
    /// or 1; times must be finite; all parts must agree on the number of
    /// rows, which must be at least one.
    pub fn new(times: Array1<F>, status: Vec<u8>, covariates: Array2<F>) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if status.len() != n || covariates.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "times has {} rows, status {}, covariates {}",
                n,
                status.len(),
                covariates.nrows()
            )));
        }
        let mut events = Vec::with_capacity(n);
        for (i, &s) in status.iter().enumerate() {
            match s {
                0 => events.push(false),
                1 => events.push(true),
                other => {
                    return Err(Error::InvalidStatus {
                        row: i,
                        value: other.to_string(),
                    })
                }
            }
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidMatrix);
        }
        Ok(Self {
            times,
            status: events,
            covariates,
        })
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn p(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn times(&self) -> &Array1<F> {
        &self.times
    }

    /// Censoring indicators; `true` means the event was observed.
    pub fn events(&self) -> &[bool] {
        &self.status
    }

    pub fn is_event(&self, i: usize) -> bool {
        self.status[i]
    }

    pub fn covariates(&self) -> &Array2<F> {
        &self.covariates
    }

    pub fn n_uncensored(&self) -> usize {
        self.status.iter().filter(|&&e| e).count()
    }

    /// Permutation that sorts rows by time, events before censored at tied
    /// times, original index as the final tie-break.
    pub fn sort_permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.n()).collect();
        perm.sort_by(|&a, &b| {
            self.times[a]
                .partial_cmp(&self.times[b])
                .expect("times are finite")
                // events (true) sort before censored (false)
                .then(self.status[b].cmp(&self.status[a]))
                .then(a.cmp(&b))
        });
        perm
    }

    /// Whether rows already follow the canonical sort order.
    pub fn is_sorted(&self) -> bool {
        self.sort_permutation().windows(2).all(|w| w[0] < w[1])
    }

    /// Copy with rows rearranged by `perm`.
    pub fn reorder(&self, perm: &[usize]) -> Self {
        let times = Array1::from_iter(perm.iter().map(|&i| self.times[i]));
        let status = perm.iter().map(|&i| self.status[i]).collect();
        let covariates = self.covariates.select(Axis(0), perm);
        Self {
            times,
            status,
            covariates,
        }
    }

    /// Time-sorted copy plus the permutation used.
    pub fn sorted(&self) -> (Self, Vec<usize>) {
        let perm = self.sort_permutation();
        (self.reorder(&perm), perm)
    }

    /// Copy keeping only the given rows (in the given order).
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(self.reorder(rows))
    }

    /// Copy keeping only the given covariate columns.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self {
            times: self.times.clone(),
            status: self.status.clone(),
            covariates: self.covariates.select(Axis(1), cols),
        }
    }
}

/// Kaplan–Meier weights aligned to the time-sorted order.
#[derive(Debug, Clone)]
pub struct KMWeightVector<F> {
    weights: Array1<F>,
}

impl<F: Scalar> KMWeightVector<F> {
    pub fn weights(&self) -> &Array1<F> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> F {
        self.weights.iter().copied().sum()
    }
}

/// Kaplan–Meier weights of the sorted dataset:
/// `w_1 = d_1/n`, `w_i = d_i/(n-i+1) * prod_{j<i} ((n-j)/(n-j+1))^{d_j}`.
///
/// Input that is not already in canonical order is sorted internally; the
/// returned vector is always aligned to the sorted order.
pub fn compute_km_weights<F: Scalar>(data: &SurvivalDataset<F>) -> Result<KMWeightVector<F>> {
    let sorted_holder;
    let data = if data.is_sorted() {
        data
    } else {
        sorted_holder = data.sorted().0;
        &sorted_holder
    };
    let n = data.n();
    let nf = F::cast(n as f64);
    let mut weights = Array1::<F>::zeros(n);
    // Running product of ((n-j)/(n-j+1))^{d_j} over rows seen so far.
    let mut survival_carry = F::one();
    for i in 0..n {
        let remaining = nf - F::cast(i as f64); // n - i + 1 with 1-based i
        if data.is_event(i) {
            weights[i] = survival_carry / remaining;
            survival_carry = survival_carry * (remaining - F::one()) / remaining;
        }
        // censored rows leave the carry unchanged (exponent is zero)
    }
    Ok(KMWeightVector { weights })
}

/// Efron's tail correction: if the largest observation (under the canonical
/// tie-break) is censored, reclassify it as an event. Everything else is
/// left untouched.
pub fn efron_tail_correction<F: Scalar>(data: &SurvivalDataset<F>) -> SurvivalDataset<F> {
    let mut out = data.clone();
    let last = *data
        .sort_permutation()
        .last()
        .expect("dataset is never empty");
    out.status[last] = true;
    out
}

/// Weighted-centered data with the intercept removed.
///
/// Rows of `x_std`/`y_std` are `sqrt(w_i) * (value - weighted mean)`; rows
/// with zero weight are therefore identically zero. Censored rows are kept
/// separately in centered-but-unweighted form for use as constraint rows.
#[derive(Debug, Clone)]
pub struct StandardizedData<F> {
    pub x_std: Array2<F>,
    pub y_std: Array1<F>,
    pub weighted_means_x: Array1<F>,
    pub weighted_mean_y: F,
    pub uncensored_index: Vec<usize>,
    pub censored_index: Vec<usize>,
    /// Censored covariate rows, centered by the weighted means.
    pub x_censored: Array2<F>,
    /// Censored responses, centered by the weighted mean.
    pub y_censored: Array1<F>,
}

impl<F: Scalar> StandardizedData<F> {
    pub fn n(&self) -> usize {
        self.y_std.len()
    }

    pub fn p(&self) -> usize {
        self.x_std.ncols()
    }

    pub fn n_uncensored(&self) -> usize {
        self.uncensored_index.len()
    }

    pub fn n_censored(&self) -> usize {
        self.censored_index.len()
    }

    /// Weighted uncensored design rows (the rows entering the least-squares
    /// term).
    pub fn x_uncensored(&self) -> Array2<F> {
        self.x_std.select(Axis(0), &self.uncensored_index)
    }

    pub fn y_uncensored(&self) -> Array1<F> {
        Array1::from_iter(self.uncensored_index.iter().map(|&i| self.y_std[i]))
    }
}

/// Weighted standardization: center by the weighted means, scale rows by
/// `sqrt(w_i)`. The dataset must be in the order the weights were computed
/// for.
pub fn weighted_standardize<F: Scalar>(
    data: &SurvivalDataset<F>,
    weights: &KMWeightVector<F>,
) -> Result<StandardizedData<F>> {
    let n = data.n();
    let p = data.p();
    if weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} rows",
            weights.len(),
            n
        )));
    }
    let w = weights.weights();
    let total = weights.sum();
    if !(total > F::zero()) {
        return Err(Error::DegenerateWeights);
    }

    let mut means_x = Array1::<F>::zeros(p);
    let mut mean_y = F::zero();
    for i in 0..n {
        if w[i] > F::zero() {
            mean_y = mean_y + w[i] * data.times()[i];
            for j in 0..p {
                means_x[j] = means_x[j] + w[i] * data.covariates()[[i, j]];
            }
        }
    }
    means_x.mapv_inplace(|v| v / total);
    mean_y = mean_y / total;

    let mut x_std = Array2::<F>::zeros((n, p));
    let mut y_std = Array1::<F>::zeros(n);
    let mut uncensored = Vec::new();
    let mut censored = Vec::new();
    for i in 0..n {
        let root = w[i].sqrt();
        if root > F::zero() {
            y_std[i] = root * (data.times()[i] - mean_y);
            for j in 0..p {
                x_std[[i, j]] = root * (data.covariates()[[i, j]] - means_x[j]);
            }
        }
        if data.is_event(i) {
            uncensored.push(i);
        } else {
            censored.push(i);
        }
    }

    let n_c = censored.len();
    let mut x_censored = Array2::<F>::zeros((n_c, p));
    let mut y_censored = Array1::<F>::zeros(n_c);
    for (row, &i) in censored.iter().enumerate() {
        y_censored[row] = data.times()[i] - mean_y;
        for j in 0..p {
            x_censored[[row, j]] = data.covariates()[[i, j]] - means_x[j];
        }
    }

    Ok(StandardizedData {
        x_std,
        y_std,
        weighted_means_x: means_x,
        weighted_mean_y: mean_y,
        uncensored_index: uncensored,
        censored_index: censored,
        x_censored,
        y_censored,
    })
}

/// Intercept implied by a coefficient vector on the original covariate
/// scale: `alpha = mean_y_w - means_x_w . beta`.
pub fn recover_intercept<F: Scalar>(beta: &Array1<F>, std: &StandardizedData<F>) -> Result<F> {
    if beta.len() != std.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries for {} covariates",
            beta.len(),
            std.p()
        )));
    }
    Ok(std.weighted_mean_y - std.weighted_means_x.dot(beta))
}

/// Sorted, tail-corrected dataset with its weights and standardization —
/// the common starting point of every fitting pipeline.
#[derive(Debug, Clone)]
pub struct Prepared<F> {
    pub data: SurvivalDataset<F>,
    pub weights: KMWeightVector<F>,
    pub std: StandardizedData<F>,
    /// Permutation from the input row order to the sorted order.
    pub perm: Vec<usize>,
}

/// Sort, apply Efron's tail correction, compute Kaplan–Meier weights and
/// standardize.
pub fn prepare<F: Scalar>(data: &SurvivalDataset<F>) -> Result<Prepared<F>> {
    let (sorted, perm) = data.sorted();
    let corrected = efron_tail_correction(&sorted);
    let weights = compute_km_weights(&corrected)?;
    let std = weighted_standardize(&corrected, &weights)?;
    Ok(Prepared {
        data: corrected,
        weights,
        std,
        perm,
    })
}
