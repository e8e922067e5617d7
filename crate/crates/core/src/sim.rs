//! AFT simulation designs: covariate generation (independent or
//! copula-correlated uniforms), standardized log-Weibull errors, censoring
//! calibrated to a target rate, selection-frequency studies and sure
//! independence screening.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enet::Method;
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::select::{select_cc_model, tune_path_method, CcMethod, PathMethod, TuningGrid};
use crate::special::normal_cdf;
use crate::survival::{efron_tail_correction, prepare, Prepared, SurvivalDataset};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Error law of the AFT noise term.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub enum ErrorLaw {
    /// Standard normal errors (log-normal survival times).
    StdNormal,
    /// `(log W - E log W) / sd(log W)` for `W ~ Weibull(shape, scale)`.
    StdLogWeibull { shape: f64, scale: f64 },
}

impl Default for ErrorLaw {
    fn default() -> Self {
        ErrorLaw::StdNormal
    }
}

impl ErrorLaw {
    pub fn std_log_weibull() -> Self {
        ErrorLaw::StdLogWeibull {
            shape: 5.0,
            scale: 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorLaw::StdNormal => "lognormal",
            ErrorLaw::StdLogWeibull { .. } => "weibull",
        }
    }
}

/// A complete simulation design for `Y = alpha + X beta + sigma eps`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimDesign<F> {
    pub n: usize,
    pub p: usize,
    pub beta_true: Vec<F>,
    pub alpha: F,
    pub error_law: ErrorLaw,
    pub sigma: F,
    /// Target pairwise correlation of the uniform covariates, in `[0, 1)`.
    pub correlation: F,
    /// Target censoring percentage, in `(0, 100)`.
    pub target_censoring: F,
    pub seed: u64,
}

impl<F: Scalar> SimDesign<F> {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::EmptyInput);
        }
        if self.beta_true.len() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "beta_true has {} entries for p = {}",
                self.beta_true.len(),
                self.p
            )));
        }
        if self.correlation < F::zero() || self.correlation >= F::one() {
            return Err(Error::InvalidArgument(format!(
                "unsupported correlation {} (need 0 <= rho < 1)",
                self.correlation
            )));
        }
        if self.target_censoring <= F::zero() || self.target_censoring >= F::cast(100.0) {
            return Err(Error::InvalidArgument(
                "target censoring percentage must lie in (0, 100)".into(),
            ));
        }
        Ok(())
    }

    /// First benchmark design: n = 100, p = 40, coefficient blocks
    /// (5 fives, 5 twos, 30 zeros), no intercept.
    pub fn benchmark_one(error_law: ErrorLaw, correlation: F, target_censoring: F, seed: u64) -> Self {
        let mut beta = vec![F::zero(); 40];
        for j in 0..5 {
            beta[j] = F::cast(5.0);
        }
        for j in 5..10 {
            beta[j] = F::cast(2.0);
        }
        Self {
            n: 100,
            p: 40,
            beta_true: beta,
            alpha: F::zero(),
            error_law,
            sigma: F::one(),
            correlation,
            target_censoring,
            seed,
        }
    }

    /// Second benchmark design: n = 100, p = 120, first 20 coefficients 4,
    /// intercept 1.
    pub fn benchmark_two(error_law: ErrorLaw, correlation: F, target_censoring: F, seed: u64) -> Self {
        let mut beta = vec![F::zero(); 120];
        for j in 0..20 {
            beta[j] = F::cast(4.0);
        }
        Self {
            n: 100,
            p: 120,
            beta_true: beta,
            alpha: F::one(),
            error_law,
            sigma: F::one(),
            correlation,
            target_censoring,
            seed,
        }
    }

    fn with_seed(&self, seed: u64) -> Self {
        let mut d = self.clone();
        d.seed = seed;
        d
    }
}

pub(crate) fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn splitmix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn gen_covariates_rng<F: Scalar>(
    n: usize,
    p: usize,
    rho: F,
    rng: &mut ChaCha8Rng,
) -> Result<Array2<F>> {
    if rho < F::zero() || rho >= F::one() {
        return Err(Error::InvalidArgument(format!(
            "unsupported correlation {rho} (need 0 <= rho < 1)"
        )));
    }
    if rho == F::zero() {
        return Ok(Array2::from_shape_fn((n, p), |_| {
            F::cast(rng.random::<f64>())
        }));
    }
    // Gaussian copula with the latent equicorrelation that makes the
    // uniform marginals hit the requested correlation:
    // corr(Phi(Z_i), Phi(Z_j)) = (6/pi) asin(rho_z / 2)  =>
    // rho_z = 2 sin(pi rho / 6)
    let rho_f64 = rho.to_f64_lossy();
    let rho_z = 2.0 * (std::f64::consts::PI * rho_f64 / 6.0).sin();
    let shared = rho_z.sqrt();
    let indiv = (1.0 - rho_z).sqrt();
    let mut x = Array2::<F>::zeros((n, p));
    for i in 0..n {
        let g: f64 = rng.sample(StandardNormal);
        for j in 0..p {
            let e: f64 = rng.sample(StandardNormal);
            let z = shared * g + indiv * e;
            x[[i, j]] = normal_cdf(F::cast(z));
        }
    }
    Ok(x)
}

/// Covariate matrix with Uniform(0,1) marginals and pairwise correlation
/// `rho` (via a Gaussian copula when `rho > 0`).
pub fn gen_covariates<F: Scalar>(n: usize, p: usize, rho: F, seed: u64) -> Result<Array2<F>> {
    let mut rng = rng_stream(seed, 0);
    gen_covariates_rng(n, p, rho, &mut rng)
}

fn log_weibull_moments(shape: f64, scale: f64) -> (f64, f64) {
    let mean = scale.ln() - EULER_GAMMA / shape;
    let sd = std::f64::consts::PI / (shape * 6.0f64.sqrt());
    (mean, sd)
}

fn std_log_weibull_rng<F: Scalar>(
    m: usize,
    shape: f64,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Array1<F> {
    let (mean, sd) = log_weibull_moments(shape, scale);
    Array1::from_shape_fn(m, |_| {
        let u: f64 = rng.random();
        // inverse CDF; 1 - u keeps the argument strictly positive
        let w = scale * (-(1.0 - u).ln()).powf(1.0 / shape);
        F::cast((w.ln() - mean) / sd)
    })
}

/// Standardized log-Weibull(5, 1) errors: mean 0, standard deviation 1,
/// using the analytic moments `E log W = -gamma/5`,
/// `sd log W = pi / (5 sqrt 6)`.
pub fn std_log_weibull_error<F: Scalar>(m: usize, seed: u64) -> Array1<F> {
    let mut rng = rng_stream(seed, 0);
    std_log_weibull_rng(m, 5.0, 1.0, &mut rng)
}

fn draw_errors<F: Scalar>(law: ErrorLaw, m: usize, rng: &mut ChaCha8Rng) -> Array1<F> {
    match law {
        ErrorLaw::StdNormal => Array1::from_shape_fn(m, |_| {
            let z: f64 = rng.sample(StandardNormal);
            F::cast(z)
        }),
        ErrorLaw::StdLogWeibull { shape, scale } => std_log_weibull_rng(m, shape, scale, rng),
    }
}

/// Complete (uncensored) AFT sample: `Y = alpha + X beta + sigma eps` with
/// every status set to event.
pub fn gen_aft<F: Scalar>(design: &SimDesign<F>) -> Result<SurvivalDataset<F>> {
    design.validate()?;
    let mut x_rng = rng_stream(design.seed, 0);
    let mut e_rng = rng_stream(design.seed, 1);
    let x = gen_covariates_rng(design.n, design.p, design.correlation, &mut x_rng)?;
    let eps = draw_errors::<F>(design.error_law, design.n, &mut e_rng);
    let beta = Array1::from(design.beta_true.clone());
    let xb = x.dot(&beta);
    let times =
        Array1::from_shape_fn(design.n, |i| design.alpha + xb[i] + design.sigma * eps[i]);
    SurvivalDataset::new(times, vec![1; design.n], x)
}

const CALIBRATION_SEED: u64 = 0xCA11_B7A7;
const CALIBRATION_DRAWS: usize = 200_000;

/// Calibrate the censoring location `c0` so that censoring times
/// `log C ~ N(c0 sqrt(1 + sigma), 1 + sigma^2)` censor the target
/// percentage of observations. Monte Carlo root-finding on a fixed
/// internal sample; the censoring rate is monotone decreasing in `c0`.
pub fn calibrate_c0<F: Scalar>(design: &SimDesign<F>, target_pct: F) -> Result<F> {
    design.validate()?;
    if target_pct <= F::zero() || target_pct >= F::cast(100.0) {
        return Err(Error::InvalidArgument(
            "target censoring percentage must lie in (0, 100)".into(),
        ));
    }
    let target = target_pct.to_f64_lossy() / 100.0;

    // fixed draws of (T, Z): reused for every c0 so p_hat is monotone
    let mut x_rng = rng_stream(CALIBRATION_SEED, 0);
    let mut e_rng = rng_stream(CALIBRATION_SEED, 1);
    let mut z_rng = rng_stream(CALIBRATION_SEED, 2);
    let beta: Vec<f64> = design.beta_true.iter().map(|b| b.to_f64_lossy()).collect();
    let alpha = design.alpha.to_f64_lossy();
    let sigma = design.sigma.to_f64_lossy();
    let rho = design.correlation;
    let m = CALIBRATION_DRAWS;
    let mut t = vec![0.0f64; m];
    let chunk = 4096;
    let mut filled = 0;
    while filled < m {
        let take = chunk.min(m - filled);
        let x = gen_covariates_rng::<F>(take, design.p, rho, &mut x_rng)?;
        let eps = draw_errors::<F>(design.error_law, take, &mut e_rng);
        for i in 0..take {
            let xb: f64 = (0..design.p)
                .map(|j| x[[i, j]].to_f64_lossy() * beta[j])
                .sum();
            t[filled + i] = alpha + xb + sigma * eps[i].to_f64_lossy();
        }
        filled += take;
    }
    let z: Vec<f64> = (0..m).map(|_| z_rng.sample(StandardNormal)).collect();

    let mean_scale = (1.0 + sigma).sqrt();
    let sd = (1.0 + sigma * sigma).sqrt();
    let p_hat = |c0: f64| -> f64 {
        let mut censored = 0usize;
        for i in 0..m {
            if c0 * mean_scale + sd * z[i] < t[i] {
                censored += 1;
            }
        }
        censored as f64 / m as f64
    };

    // bracket: censoring -> 1 as c0 -> -inf, -> 0 as c0 -> +inf
    let mut lo = -1.0f64;
    let mut hi = 1.0f64;
    let mut guard = 0;
    while p_hat(lo) < target {
        lo = lo * 2.0 - 1.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::BracketFailure("censoring lower bracket".into()));
        }
    }
    guard = 0;
    while p_hat(hi) > target {
        hi = hi * 2.0 + 1.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::BracketFailure("censoring upper bracket".into()));
        }
    }
    let tol = 0.005;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = p_hat(mid);
        if (p - target).abs() <= tol {
            return Ok(F::cast(mid));
        }
        if p > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    if (p_hat(mid) - target).abs() <= tol {
        Ok(F::cast(mid))
    } else {
        Err(Error::BracketFailure(
            "bisection exhausted without reaching the target rate".into(),
        ))
    }
}

/// A censored sample plus the censoring fraction before the tail
/// correction.
#[derive(Debug, Clone)]
pub struct CensoredSample<F> {
    pub data: SurvivalDataset<F>,
    pub raw_censored_fraction: F,
}

/// Censor a complete sample with `log C ~ N(c0 sqrt(1+sigma), 1+sigma^2)`
/// and apply Efron's tail correction.
pub fn apply_censoring<F: Scalar>(
    complete: &SurvivalDataset<F>,
    c0: F,
    design: &SimDesign<F>,
) -> Result<CensoredSample<F>> {
    let n = complete.n();
    let mut rng = rng_stream(design.seed, 2);
    let sigma = design.sigma.to_f64_lossy();
    let mean = c0.to_f64_lossy() * (1.0 + sigma).sqrt();
    let sd = (1.0 + sigma * sigma).sqrt();
    let mut times = Array1::<F>::zeros(n);
    let mut status = vec![0u8; n];
    let mut censored = 0usize;
    for i in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        let log_c = F::cast(mean + sd * z);
        let y = complete.times()[i];
        if y <= log_c {
            times[i] = y;
            status[i] = 1;
        } else {
            times[i] = log_c;
            status[i] = 0;
            censored += 1;
        }
    }
    let observed = SurvivalDataset::new(times, status, complete.covariates().clone())?;
    Ok(CensoredSample {
        data: efron_tail_correction(&observed),
        raw_censored_fraction: F::cast(censored as f64 / n as f64),
    })
}

/// Anything that can pick a variable subset from prepared data.
pub trait Selector<F: Scalar>: Sync {
    fn name(&self) -> String;
    fn select(&self, prep: &Prepared<F>, grid: &TuningGrid<F>) -> Result<Vec<usize>>;
}

/// Full tuning pipeline of one of the five estimators, reporting its
/// selected variables.
#[derive(Debug, Clone, Copy)]
pub struct MethodSelector(pub Method);

impl<F: Scalar> Selector<F> for MethodSelector {
    fn name(&self) -> String {
        self.0.as_str().to_string()
    }

    fn select(&self, prep: &Prepared<F>, grid: &TuningGrid<F>) -> Result<Vec<usize>> {
        match self.0 {
            Method::Enet => Ok(tune_path_method(prep, PathMethod::Enet, grid)?.fit.selected),
            Method::AEnet => Ok(tune_path_method(prep, PathMethod::AEnet, grid)?.fit.selected),
            Method::WEnet => Ok(tune_path_method(prep, PathMethod::WEnet, grid)?.fit.selected),
            Method::AEnetCC => {
                let tuned = tune_path_method(prep, PathMethod::AEnet, grid)?;
                Ok(select_cc_model(prep, CcMethod::AEnetCC, &tuned, grid)?.fit.selected)
            }
            Method::WEnetCC => {
                let tuned = tune_path_method(prep, PathMethod::WEnet, grid)?;
                Ok(select_cc_model(prep, CcMethod::WEnetCC, &tuned, grid)?.fit.selected)
            }
        }
    }
}

/// Per-block selection-frequency summary row.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRow<F> {
    pub block: String,
    pub method: String,
    pub censoring: F,
    pub rho: F,
    pub model: String,
    pub min: F,
    pub mean: F,
    pub max: F,
}

/// Full study outcome: summary rows plus raw per-variable counts.
#[derive(Debug, Clone)]
pub struct StudyResult<F> {
    pub rows: Vec<StudyRow<F>>,
    /// `counts[s][j]`: how many successful replicates selector `s` selected
    /// variable `j` in.
    pub counts: Vec<Vec<usize>>,
    /// Successful replicates per selector.
    pub successes: Vec<usize>,
    pub failures: Vec<StudyFailure>,
    pub replicates: usize,
}

#[derive(Debug, Clone)]
pub struct StudyFailure {
    pub replicate: usize,
    pub method: String,
    pub message: String,
}

/// Variable blocks of a design: indices grouped by their true coefficient
/// value, in order of first appearance.
pub fn coefficient_blocks<F: Scalar>(beta_true: &[F]) -> Vec<(F, Vec<usize>)> {
    let mut blocks: Vec<(F, Vec<usize>)> = Vec::new();
    for (j, &b) in beta_true.iter().enumerate() {
        match blocks.iter_mut().find(|(v, _)| *v == b) {
            Some((_, idx)) => idx.push(j),
            None => blocks.push((b, vec![j])),
        }
    }
    blocks
}

/// Generate `replicates` datasets from the design (with counter-derived
/// seeds), run every selector with full tuning on each, and summarize
/// selection frequencies per coefficient block. Failed fits are recorded
/// and excluded from the denominators.
pub fn selection_frequency_study<F: Scalar>(
    design: &SimDesign<F>,
    selectors: &[&dyn Selector<F>],
    replicates: usize,
    seed: u64,
    grid: &TuningGrid<F>,
) -> Result<StudyResult<F>> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    design.validate()?;
    let c0 = calibrate_c0(design, design.target_censoring)?;

    let per_replicate: Vec<Vec<std::result::Result<Vec<usize>, String>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let rep_design = design.with_seed(splitmix(seed, 2 * r as u64));
            let mut rep_grid = grid.clone();
            rep_grid.seed = splitmix(seed, 2 * r as u64 + 1);
            let run = || -> Result<Prepared<F>> {
                let complete = gen_aft(&rep_design)?;
                let censored = apply_censoring(&complete, c0, &rep_design)?;
                prepare(&censored.data)
            };
            match run() {
                Ok(prep) => selectors
                    .iter()
                    .map(|s| s.select(&prep, &rep_grid).map_err(|e| e.to_string()))
                    .collect(),
                Err(e) => selectors.iter().map(|_| Err(e.to_string())).collect(),
            }
        })
        .collect();

    let p = design.p;
    let mut counts = vec![vec![0usize; p]; selectors.len()];
    let mut successes = vec![0usize; selectors.len()];
    let mut failures = Vec::new();
    for (r, results) in per_replicate.iter().enumerate() {
        for (s, outcome) in results.iter().enumerate() {
            match outcome {
                Ok(selected) => {
                    successes[s] += 1;
                    for &j in selected {
                        counts[s][j] += 1;
                    }
                }
                Err(msg) => failures.push(StudyFailure {
                    replicate: r,
                    method: selectors[s].name(),
                    message: msg.clone(),
                }),
            }
        }
    }

    let blocks = coefficient_blocks(&design.beta_true);
    let mut rows = Vec::new();
    for (s, selector) in selectors.iter().enumerate() {
        let denom = successes[s];
        for (b, (_, members)) in blocks.iter().enumerate() {
            let freqs: Vec<F> = members
                .iter()
                .map(|&j| {
                    if denom == 0 {
                        F::zero()
                    } else {
                        F::cast(100.0 * counts[s][j] as f64 / denom as f64)
                    }
                })
                .collect();
            let min = freqs.iter().copied().fold(F::infinity(), F::min);
            let max = freqs.iter().copied().fold(F::neg_infinity(), F::max);
            let mean = freqs.iter().copied().sum::<F>() / F::cast(freqs.len() as f64);
            rows.push(StudyRow {
                block: format!("block{}", b + 1),
                method: selector.name(),
                censoring: design.target_censoring,
                rho: design.correlation,
                model: design.error_law.name().to_string(),
                min,
                mean,
                max,
            });
        }
    }
    Ok(StudyResult {
        rows,
        counts,
        successes,
        failures,
        replicates,
    })
}

/// Default screening size `floor(3 n^{2/3})`.
pub fn sis_default_dn(n: usize) -> usize {
    (3.0 * (n as f64).powf(2.0 / 3.0)).floor() as usize
}

/// Sure independence screening: rank covariates by absolute marginal
/// correlation between the weighted-standardized column and response over
/// the uncensored rows; returns the top `d_n` column indices in rank
/// order.
pub fn sis_screen<F: Scalar>(prep: &Prepared<F>, d_n: usize) -> Result<Vec<usize>> {
    let p = prep.std.p();
    if d_n == 0 {
        return Err(Error::InvalidArgument("screening size must be positive".into()));
    }
    if d_n > p {
        return Err(Error::InvalidArgument(format!(
            "screening size {d_n} exceeds {p} covariates"
        )));
    }
    let x_u = prep.std.x_uncensored();
    let y_u = prep.std.y_uncensored();
    let y_norm = y_u.iter().map(|&v| v * v).sum::<F>().sqrt();
    let mut scored: Vec<(usize, F)> = (0..p)
        .map(|j| {
            let col = x_u.column(j);
            let x_norm = col.iter().map(|&v| v * v).sum::<F>().sqrt();
            let corr = if x_norm > F::zero() && y_norm > F::zero() {
                (col.dot(&y_u) / (x_norm * y_norm)).abs()
            } else {
                F::zero()
            };
            (j, corr)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite correlations")
            .then(a.0.cmp(&b.0))
    });
    Ok(scored.into_iter().take(d_n).map(|(j, _)| j).collect())
}
