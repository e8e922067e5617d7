//! Fit and prediction metrics, 0.632 bootstrap variance, risk-group
//! splitting and the two-sample log-rank test.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::special::chi_square_sf;
use crate::survival::{prepare, Prepared, SurvivalDataset};

/// Training mean squared error over the uncensored observations:
/// `(1/n_u) sum d_i (yhat_i - y_i)^2` on the log-time scale.
pub fn mse_train<F: Scalar>(
    data: &SurvivalDataset<F>,
    beta: &Array1<F>,
    intercept: F,
) -> Result<F> {
    if beta.len() != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries for {} covariates",
            beta.len(),
            data.p()
        )));
    }
    let n_u = data.n_uncensored();
    if n_u == 0 {
        return Err(Error::DegenerateWeights);
    }
    let mut acc = F::zero();
    for i in 0..data.n() {
        if data.is_event(i) {
            let pred = intercept + data.covariates().row(i).dot(beta);
            let r = pred - data.times()[i];
            acc = acc + r * r;
        }
    }
    Ok(acc / F::cast(n_u as f64))
}

/// Test mean squared error over all rows (complete responses assumed, as
/// in simulation): `(1/n) sum (yhat_i - y_i)^2`.
pub fn mse_test<F: Scalar>(
    test: &SurvivalDataset<F>,
    beta: &Array1<F>,
    intercept: F,
) -> Result<F> {
    if beta.len() != test.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries for {} covariates",
            beta.len(),
            test.p()
        )));
    }
    let mut acc = F::zero();
    for i in 0..test.n() {
        let pred = intercept + test.covariates().row(i).dot(beta);
        let r = pred - test.times()[i];
        acc = acc + r * r;
    }
    Ok(acc / F::cast(test.n() as f64))
}

/// Coordinatewise variance of a fit across 0.632 bootstrap replicates.
#[derive(Debug, Clone)]
pub struct BootstrapSummary<F> {
    pub b: usize,
    pub beta_replicates: Array2<F>,
    pub variance: Array1<F>,
    pub seed: u64,
    /// Total resampling retries caused by degenerate (all-censored) draws.
    pub retries: usize,
}

const BOOTSTRAP_RETRIES: u64 = 10;

/// Nonparametric 0.632 bootstrap: each replicate draws `round(0.632 n)`
/// observations *without* replacement, reruns the whole
/// weighting/standardization/fit pipeline and records the coefficients;
/// the summary holds their coordinatewise sample variance.
pub fn bootstrap_632_variance<F, Fit>(
    data: &SurvivalDataset<F>,
    fitter: Fit,
    b: usize,
    seed: u64,
) -> Result<BootstrapSummary<F>>
where
    F: Scalar,
    Fit: Fn(&Prepared<F>) -> Result<Array1<F>> + Sync,
{
    if b < 2 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least 2 replicates, got {b}"
        )));
    }
    let n = data.n();
    let n_tilde = ((0.632 * n as f64).round() as usize).clamp(1, n);
    let p = data.p();

    let results: Vec<(Array1<F>, usize)> = (0..b)
        .into_par_iter()
        .map(|r| -> Result<(Array1<F>, usize)> {
            let mut last_err = None;
            for attempt in 0..=BOOTSTRAP_RETRIES {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1 + (r as u64) * (BOOTSTRAP_RETRIES + 1) + attempt);
                let mut rows = rand::seq::index::sample(&mut rng, n, n_tilde).into_vec();
                rows.sort_unstable();
                let sub = match data.subset_rows(&rows).and_then(|d| prepare(&d)) {
                    Ok(sub) => sub,
                    Err(e) => {
                        last_err = Some(e);
                        continue;
                    }
                };
                match fitter(&sub) {
                    Ok(beta) => return Ok((beta, attempt as usize)),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(last_err.unwrap_or(Error::DegenerateWeights))
        })
        .collect::<Result<Vec<_>>>()?;

    let bf = F::cast(b as f64);
    let mut mean = Array1::<F>::zeros(p);
    let mut replicates = Array2::<F>::zeros((b, p));
    let mut retries = 0usize;
    for (r, (beta, attempts)) in results.iter().enumerate() {
        retries += attempts;
        for j in 0..p {
            replicates[[r, j]] = beta[j];
            mean[j] = mean[j] + beta[j];
        }
    }
    mean.mapv_inplace(|v| v / bf);
    let mut variance = Array1::<F>::zeros(p);
    for r in 0..b {
        for j in 0..p {
            let d = replicates[[r, j]] - mean[j];
            variance[j] = variance[j] + d * d;
        }
    }
    variance.mapv_inplace(|v| v / (bf - F::one()));
    Ok(BootstrapSummary {
        b,
        beta_replicates: replicates,
        variance,
        seed,
        retries,
    })
}

/// Risk-group assignment of test subjects.
#[derive(Debug, Clone)]
pub struct RiskSplit<F> {
    /// `true` marks the high-risk group (predicted log time at or below
    /// the threshold).
    pub high_risk: Vec<bool>,
    pub threshold: F,
    /// Set when every score coincides and the split collapses to a single
    /// group.
    pub degenerate: bool,
}

fn median<F: Scalar>(values: &mut Vec<F>) -> F {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) * F::cast(0.5)
    }
}

/// Split test subjects into high/low risk: predicted log time
/// `alpha + x^T beta` compared against the median observed log time of the
/// training data. Shorter predicted survival means high risk.
pub fn risk_split<F: Scalar>(
    train: &SurvivalDataset<F>,
    test: &SurvivalDataset<F>,
    beta: &Array1<F>,
    intercept: F,
) -> Result<RiskSplit<F>> {
    if beta.len() != test.p() || train.p() != test.p() {
        return Err(Error::DimensionMismatch(
            "train/test/beta widths disagree".into(),
        ));
    }
    let mut train_times: Vec<F> = train.times().iter().copied().collect();
    let threshold = median(&mut train_times);
    let scores: Vec<F> = (0..test.n())
        .map(|i| intercept + test.covariates().row(i).dot(beta))
        .collect();
    let degenerate = scores.windows(2).all(|w| w[0] == w[1]);
    let high_risk = scores.iter().map(|&s| s <= threshold).collect();
    Ok(RiskSplit {
        high_risk,
        threshold,
        degenerate,
    })
}

/// Two-sample log-rank test. Returns the chi-square statistic (1 df) and
/// its p-value. `groups[i] = true` places subject `i` in the second group.
pub fn logrank_test<F: Scalar>(
    times: &[F],
    events: &[bool],
    groups: &[bool],
) -> Result<(F, F)> {
    let n = times.len();
    if events.len() != n || groups.len() != n {
        return Err(Error::DimensionMismatch(
            "times/status/groups lengths disagree".into(),
        ));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if groups.iter().all(|&g| g) || groups.iter().all(|&g| !g) {
        return Err(Error::InvalidArgument(
            "log-rank comparison needs both groups nonempty".into(),
        ));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).expect("finite times"));

    let mut at_risk_1 = groups.iter().filter(|&&g| !g).count();
    let mut at_risk_2 = n - at_risk_1;
    let mut observed_minus_expected = F::zero();
    let mut variance = F::zero();

    let mut idx = 0;
    while idx < n {
        let t = times[order[idx]];
        // gather everyone tied at this time
        let mut d1 = 0usize;
        let mut d2 = 0usize;
        let mut c1 = 0usize;
        let mut c2 = 0usize;
        let mut k = idx;
        while k < n && times[order[k]] == t {
            let i = order[k];
            match (groups[i], events[i]) {
                (false, true) => d1 += 1,
                (false, false) => c1 += 1,
                (true, true) => d2 += 1,
                (true, false) => c2 += 1,
            }
            k += 1;
        }
        let d = d1 + d2;
        let r1 = F::cast(at_risk_1 as f64);
        let r2 = F::cast(at_risk_2 as f64);
        let r = r1 + r2;
        if d > 0 && r > F::one() {
            let df = F::cast(d as f64);
            let expected_1 = df * r1 / r;
            observed_minus_expected =
                observed_minus_expected + F::cast(d1 as f64) - expected_1;
            variance = variance + df * (r1 / r) * (r2 / r) * (r - df) / (r - F::one());
        }
        at_risk_1 -= d1 + c1;
        at_risk_2 -= d2 + c2;
        idx = k;
    }

    if variance <= F::zero() {
        return Ok((F::zero(), F::one()));
    }
    let statistic = observed_minus_expected * observed_minus_expected / variance;
    let p = chi_square_sf(statistic, F::one());
    Ok((statistic, p))
}

/// Kaplan–Meier survival curve coordinates: `(time, survival)` pairs
/// starting at `(min time, 1)` and stepping at each event time.
pub fn km_curve<F: Scalar>(times: &[F], events: &[bool]) -> Vec<(F, F)> {
    let n = times.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).expect("finite times"));
    let mut curve = Vec::new();
    let mut survival = F::one();
    let mut at_risk = n;
    let mut idx = 0;
    while idx < n {
        let t = times[order[idx]];
        let mut d = 0usize;
        let mut removed = 0usize;
        let mut k = idx;
        while k < n && times[order[k]] == t {
            if events[order[k]] {
                d += 1;
            }
            removed += 1;
            k += 1;
        }
        if d > 0 {
            survival =
                survival * (F::one() - F::cast(d as f64) / F::cast(at_risk as f64));
            curve.push((t, survival));
        }
        at_risk -= removed;
        idx = k;
    }
    curve
}

/// Kaplan–Meier curves of a dataset split into high/low risk groups, on
/// the raw time scale (times are exponentiated back from the log scale).
pub fn km_curves_by_group<F: Scalar>(
    data: &SurvivalDataset<F>,
    high_risk: &[bool],
) -> Vec<(String, Vec<(F, F)>)> {
    let mut out = Vec::new();
    for (label, flag) in [("high", true), ("low", false)] {
        let times: Vec<F> = (0..data.n())
            .filter(|&i| high_risk[i] == flag)
            .map(|i| data.times()[i].exp())
            .collect();
        let events: Vec<bool> = (0..data.n())
            .filter(|&i| high_risk[i] == flag)
            .map(|i| data.is_event(i))
            .collect();
        if !times.is_empty() {
            out.push((label.to_string(), km_curve(&times, &events)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn simple_data(times: &[f64], status: &[u8], p: usize) -> SurvivalDataset<f64> {
        let n = times.len();
        let x = Array2::from_shape_fn((n, p), |(i, j)| ((i + 1) * (j + 1)) as f64 * 0.1);
        SurvivalDataset::new(Array1::from(times.to_vec()), status.to_vec(), x).unwrap()
    }

    #[test]
    fn mse_train_ignores_censored_rows() {
        let d = simple_data(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1, 0, 1, 0, 1], 1);
        let beta = array![0.0];
        // intercept 3 -> uncensored residuals (1-3), (3-3), (5-3)
        let m = mse_train(&d, &beta, 3.0).unwrap();
        assert!((m - (4.0 + 0.0 + 4.0) / 3.0).abs() < 1e-13);
        // flipping a censored response leaves the value unchanged
        let mut times2 = d.times().to_vec();
        times2[1] = 99.0;
        let d2 = SurvivalDataset::new(
            Array1::from(times2),
            vec![1, 0, 1, 0, 1],
            d.covariates().clone(),
        )
        .unwrap();
        assert_eq!(m, mse_train(&d2, &beta, 3.0).unwrap());
    }

    #[test]
    fn mse_test_uses_all_rows() {
        let d = simple_data(&[1.0, 2.0], &[1, 0], 1);
        let m = mse_test(&d, &array![0.0], 1.5).unwrap();
        assert!((m - (0.25 + 0.25) / 2.0).abs() < 1e-14);
        // perfect predictor
        let d3 = simple_data(&[0.1, 0.2], &[1, 1], 1);
        let perfect = mse_test(&d3, &array![1.0], 0.0).unwrap();
        assert!(perfect < 1e-28);
    }

    #[test]
    fn bootstrap_constant_fitter_zero_variance_and_determinism() {
        let d = simple_data(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], &[1; 8], 2);
        let fitter = |_p: &Prepared<f64>| Ok(array![1.25, -0.5]);
        let s1 = bootstrap_632_variance(&d, fitter, 16, 7).unwrap();
        assert!(s1.variance.iter().all(|&v| v == 0.0));
        let s2 = bootstrap_632_variance(&d, fitter, 16, 7).unwrap();
        assert_eq!(s1.beta_replicates, s2.beta_replicates);
        assert!(bootstrap_632_variance(&d, fitter, 1, 7).is_err());
    }

    #[test]
    fn risk_split_directions_and_degenerate_flag() {
        let train = simple_data(&[1.0, 2.0, 3.0, 4.0], &[1; 4], 1);
        let test = simple_data(&[1.0, 2.0, 3.0, 4.0], &[1; 4], 1);
        // beta = 0: all scores equal the intercept -> degenerate
        let flat = risk_split(&train, &test, &array![0.0], 1.0).unwrap();
        assert!(flat.degenerate);
        // monotone single covariate: threshold at the median training time
        let split = risk_split(&train, &test, &array![10.0], 0.0).unwrap();
        assert!((split.threshold - 2.5).abs() < 1e-14);
        assert!(!split.degenerate);
        // x = .1,.2,.3,.4 -> scores 1,2,3,4: first two high risk
        assert_eq!(split.high_risk, vec![true, true, false, false]);
    }

    #[test]
    fn logrank_identical_groups_is_zero() {
        // duplicated data in two groups
        let times = [1.0f64, 2.0, 3.0, 1.0, 2.0, 3.0];
        let events = [true, false, true, true, false, true];
        let groups = [false, false, false, true, true, true];
        let (stat, p) = logrank_test(&times, &events, &groups).unwrap();
        assert!(stat.abs() < 1e-12);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logrank_hand_computed_example() {
        // alternating events, no censoring: statistic = 529/1091 exactly
        let times = [1.0f64, 3.0, 5.0, 2.0, 4.0, 6.0];
        let events = [true; 6];
        let groups = [false, false, false, true, true, true];
        let (stat, p) = logrank_test(&times, &events, &groups).unwrap();
        assert!((stat - 529.0 / 1091.0).abs() < 1e-10, "stat {stat}");
        assert!(p > 0.0 && p < 1.0);
        // label swap leaves the statistic unchanged
        let swapped: Vec<bool> = groups.iter().map(|g| !g).collect();
        let (stat2, _) = logrank_test(&times, &events, &swapped).unwrap();
        assert!((stat - stat2).abs() < 1e-12);
    }

    #[test]
    fn logrank_group_without_events_is_defined() {
        let times = [1.0f64, 2.0, 3.0, 4.0];
        let events = [true, true, false, false];
        let groups = [false, false, true, true];
        let (stat, p) = logrank_test(&times, &events, &groups).unwrap();
        assert!(stat >= 0.0);
        assert!(p <= 1.0);
        assert!(logrank_test(&times, &events, &[true; 4]).is_err());
    }

    #[test]
    fn km_curve_textbook_values() {
        let times = [1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0];
        let events = [true, false, true, false, true, false];
        let curve = km_curve(&times, &events);
        assert_eq!(curve.len(), 3);
        assert!((curve[0].1 - 5.0 / 6.0).abs() < 1e-12);
        assert!((curve[1].1 - 5.0 / 8.0).abs() < 1e-12);
        assert!((curve[2].1 - 5.0 / 16.0).abs() < 1e-12);
    }
}
