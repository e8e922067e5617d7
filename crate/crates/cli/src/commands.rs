//! Subcommand implementations.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use ndarray::Array1;

use survenet::enet::{AdaptiveWeights, Method};
use survenet::eval::{
    bootstrap_632_variance, km_curves_by_group, logrank_test, mse_test, mse_train, risk_split,
};
use survenet::io::{read_dataset_csv, write_dataset_csv, write_km_csv, write_study_csv, NamedDataset};
use survenet::select::{
    aicc_score, select_cc_model, tune_path_method, CcCandidate, CcMethod, CvPoint, PathMethod,
    TunedFit,
};
use survenet::sim::{
    apply_censoring, calibrate_c0, gen_aft, selection_frequency_study, sis_default_dn, sis_screen,
    ErrorLaw, MethodSelector, Selector, SimDesign,
};
use survenet::survival::prepare;
use survenet::{Error, Fit, Grid, Prepared, Result};

use crate::config::GridArgs;
use crate::output::{
    emit, BootstrapReport, ConfigEcho, EvaluateReport, FitReport, LogrankReport, NamedValue,
    RiskReport, ScreenEcho, ScreenEntry, ScreenReport, SimulateReport, Tuning,
};

#[derive(Args)]
pub struct FitArgs {
    /// Input dataset CSV (columns: time, status, covariates).
    #[arg(long)]
    pub input: PathBuf,

    /// Estimator: enet, aenet, aenetcc, wenet or wenetcc.
    #[arg(long)]
    pub method: String,

    /// Output JSON path (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Screen down to this many covariates first (0 disables; when the
    /// flag is absent no screening happens).
    #[arg(long = "sis-dn")]
    pub sis_dn: Option<usize>,

    /// Include wall-clock timing in the report (off by default so outputs
    /// stay byte-identical across runs).
    #[arg(long)]
    pub timing: bool,

    #[command(flatten)]
    pub grid: GridArgs,
}

/// A fully tuned model plus everything needed to refit it at fixed tuning
/// parameters on resampled data.
pub struct Fitted {
    pub tuning: Tuning,
    pub fit: Fit,
    pub candidates: Option<Vec<CcCandidate<f64>>>,
    pub surface: Vec<CvPoint<f64>>,
    refit: RefitSpec,
}

enum RefitSpec {
    Path {
        method: PathMethod,
        t1: f64,
        lambda2: f64,
        weights: Option<AdaptiveWeights<f64>>,
    },
    Cc {
        method: CcMethod,
        t1_abs: f64,
        lambda2: f64,
        lambda0: f64,
        varsigma: f64,
        weights: AdaptiveWeights<f64>,
    },
}

fn path_tuning(tuned: &TunedFit<f64>, n_u: usize) -> Tuning {
    Tuning {
        t1: tuned.t1,
        lambda2: tuned.lambda2,
        lambda1: tuned.fit.lambda1,
        lambda0: None,
        cv_s: tuned.cv_s,
        aicc: aicc_score(tuned.cv_s, n_u, tuned.fit.selected.len()).ok(),
    }
}

/// Tune and fit one estimator on prepared data.
pub fn full_fit(method: Method, prep: &Prepared, grid: &Grid) -> Result<Fitted> {
    let n_u = prep.std.n_uncensored();
    match method {
        Method::Enet | Method::AEnet | Method::WEnet => {
            let path_method = match method {
                Method::Enet => PathMethod::Enet,
                Method::AEnet => PathMethod::AEnet,
                _ => PathMethod::WEnet,
            };
            let tuned = tune_path_method(prep, path_method, grid)?;
            Ok(Fitted {
                tuning: path_tuning(&tuned, n_u),
                refit: RefitSpec::Path {
                    method: path_method,
                    t1: tuned.t1,
                    lambda2: tuned.lambda2,
                    weights: tuned.weights_used.clone(),
                },
                surface: tuned.surface.clone(),
                candidates: None,
                fit: tuned.fit,
            })
        }
        Method::AEnetCC | Method::WEnetCC => {
            let cc = if method == Method::AEnetCC {
                CcMethod::AEnetCC
            } else {
                CcMethod::WEnetCC
            };
            let tuned = tune_path_method(prep, cc.parent(), grid)?;
            let sel = select_cc_model(prep, cc, &tuned, grid)?;
            let weights = tuned
                .weights_used
                .clone()
                .expect("constrained parents always carry weights");
            Ok(Fitted {
                tuning: Tuning {
                    t1: tuned.t1,
                    lambda2: tuned.lambda2,
                    lambda1: tuned.fit.lambda1,
                    lambda0: Some(sel.lambda0),
                    cv_s: sel.cv_s,
                    aicc: Some(sel.aicc),
                },
                refit: RefitSpec::Cc {
                    method: cc,
                    t1_abs: tuned.fit.t1_abs,
                    lambda2: tuned.lambda2,
                    lambda0: sel.lambda0,
                    varsigma: grid.varsigma,
                    weights,
                },
                surface: tuned.surface,
                candidates: Some(sel.candidates),
                fit: sel.fit,
            })
        }
    }
}

impl Fitted {
    /// Refit at the selected tuning parameters on new (resampled) data.
    pub fn refit(&self, prep: &Prepared) -> Result<Fit> {
        match &self.refit {
            RefitSpec::Path {
                method,
                t1,
                lambda2,
                weights,
            } => {
                use survenet::enet::{
                    aenet_problem, enet_problem, fit_from_path, wenet_problem, FitAt,
                };
                let problem = match method {
                    PathMethod::Enet => enet_problem(&prep.std, *lambda2)?,
                    PathMethod::AEnet => aenet_problem(
                        &prep.std,
                        *lambda2,
                        weights.as_ref().expect("tuned AEnet carries weights"),
                    )?,
                    PathMethod::WEnet => wenet_problem(
                        &prep.std,
                        *lambda2,
                        weights.as_ref().expect("tuned WEnet carries weights"),
                    )?,
                };
                let path = survenet::path::lasso_path(&problem.x, &problem.y)?;
                fit_from_path(&problem, &path, FitAt::T1(*t1), &prep.std)
            }
            RefitSpec::Cc {
                method,
                t1_abs,
                lambda2,
                lambda0,
                varsigma,
                weights,
            } => match method {
                CcMethod::AEnetCC => survenet::qp::aenetcc_fit(
                    &prep.std, weights, *t1_abs, *lambda2, *lambda0, *varsigma,
                ),
                CcMethod::WEnetCC => survenet::qp::wenetcc_fit(
                    &prep.std, weights, *t1_abs, *lambda2, *lambda0, *varsigma,
                ),
            },
        }
    }
}

struct LoadedInput {
    named: NamedDataset<f64>,
    prep: Prepared,
    /// Columns kept after screening (identity when screening is off).
    kept: Vec<usize>,
    screen: Option<ScreenEcho>,
}

fn load_input(input: &PathBuf, sis_dn: Option<usize>) -> Result<LoadedInput> {
    let named = read_dataset_csv::<f64>(input)?;
    let prep = prepare(&named.data)?;
    let p = named.data.p();
    match sis_dn {
        None | Some(0) => Ok(LoadedInput {
            kept: (0..p).collect(),
            screen: None,
            named,
            prep,
        }),
        Some(requested) => {
            let dn = requested.min(p);
            let mut kept = sis_screen(&prep, dn)?;
            kept.sort_unstable();
            let screened = named.data.select_columns(&kept);
            let screened_prep = prepare(&screened)?;
            let echo = ScreenEcho {
                dn,
                kept: kept
                    .iter()
                    .map(|&j| named.covariate_names[j].clone())
                    .collect(),
            };
            Ok(LoadedInput {
                named,
                prep: screened_prep,
                kept,
                screen: Some(echo),
            })
        }
    }
}

fn embed_coefficients(
    names: &[String],
    kept: &[usize],
    fit: &Fit,
) -> (Vec<NamedValue>, Vec<String>) {
    let mut full = vec![0.0; names.len()];
    for (pos, &j) in kept.iter().enumerate() {
        full[j] = fit.beta[pos];
    }
    let coefficients = names
        .iter()
        .zip(full.iter())
        .map(|(name, &value)| NamedValue {
            name: name.clone(),
            value,
        })
        .collect();
    let selected = fit
        .selected
        .iter()
        .map(|&pos| names[kept[pos]].clone())
        .collect();
    (coefficients, selected)
}

fn parse_method(s: &str) -> Result<Method> {
    s.parse::<Method>()
}

pub fn run_fit(args: FitArgs, include_surface: bool) -> Result<()> {
    let start = Instant::now();
    let method = parse_method(&args.method)?;
    let grid = args.grid.build()?;
    let loaded = load_input(&args.input, args.sis_dn)?;
    let fitted = full_fit(method, &loaded.prep, &grid)?;
    let (coefficients, selected) =
        embed_coefficients(&loaded.named.covariate_names, &loaded.kept, &fitted.fit);
    let elapsed = start.elapsed().as_millis();
    if args.timing {
        eprintln!("survenet: fit completed in {elapsed} ms");
    }
    let report = FitReport {
        command: if include_surface { "cv" } else { "fit" }.to_string(),
        method: method.as_str().to_string(),
        input: args.input.display().to_string(),
        config: ConfigEcho::from(&grid),
        screen: loaded.screen,
        tuning: fitted.tuning,
        intercept: fitted.fit.intercept,
        coefficients,
        selected,
        xi: fitted.fit.xi.as_ref().map(|x| x.to_vec()),
        lambda0_candidates: fitted.candidates,
        cv_surface: include_surface.then_some(fitted.surface),
        timing_ms: args.timing.then_some(elapsed),
    };
    emit(&report, args.output.as_deref())
}

#[derive(Args)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Estimator: enet, aenet, aenetcc, wenet or wenetcc.
    #[arg(long)]
    pub method: String,

    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Re-tune inside every replicate instead of reusing the full-data
    /// tuning parameters.
    #[arg(long)]
    pub retune: bool,

    #[arg(long)]
    pub timing: bool,

    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn run_bootstrap(args: BootstrapArgs) -> Result<()> {
    let start = Instant::now();
    let method = parse_method(&args.method)?;
    let grid = args.grid.build()?;
    let loaded = load_input(&args.input, None)?;
    let fitted = full_fit(method, &loaded.prep, &grid)?;

    let summary = if args.retune {
        bootstrap_632_variance(
            &loaded.prep.data,
            |prep: &Prepared| Ok(full_fit(method, prep, &grid)?.fit.beta),
            grid.bootstrap_b,
            grid.seed,
        )?
    } else {
        bootstrap_632_variance(
            &loaded.prep.data,
            |prep: &Prepared| Ok(fitted.refit(prep)?.beta),
            grid.bootstrap_b,
            grid.seed,
        )?
    };

    let variance = loaded
        .named
        .covariate_names
        .iter()
        .zip(summary.variance.iter())
        .map(|(name, &value)| NamedValue {
            name: name.clone(),
            value,
        })
        .collect();
    let elapsed = start.elapsed().as_millis();
    let report = BootstrapReport {
        command: "bootstrap".to_string(),
        method: method.as_str().to_string(),
        input: args.input.display().to_string(),
        config: ConfigEcho::from(&grid),
        b: summary.b,
        retune_replicates: args.retune,
        tuning: fitted.tuning,
        variance,
        retries: summary.retries,
        timing_ms: args.timing.then_some(elapsed),
    };
    emit(&report, args.output.as_deref())
}

#[derive(Args)]
pub struct ScreenArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Screening size (defaults to floor(3 n^(2/3)), clamped to p).
    #[arg(long = "sis-dn")]
    pub sis_dn: Option<usize>,

    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run_screen(args: ScreenArgs) -> Result<()> {
    let named = read_dataset_csv::<f64>(&args.input)?;
    let prep = prepare(&named.data)?;
    let dn = match args.sis_dn {
        Some(d) => d,
        None => sis_default_dn(named.data.n()).min(named.data.p()),
    };
    let ranked = sis_screen(&prep, dn)?;
    let report = ScreenReport {
        command: "screen".to_string(),
        input: args.input.display().to_string(),
        dn,
        ranked: ranked
            .iter()
            .enumerate()
            .map(|(rank, &index)| ScreenEntry {
                rank: rank + 1,
                index,
                name: named.covariate_names[index].clone(),
            })
            .collect(),
    };
    emit(&report, args.output.as_deref())
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Training dataset CSV.
    #[arg(long)]
    pub input: PathBuf,

    /// Test dataset CSV (same covariate layout; complete responses).
    #[arg(long)]
    pub test: PathBuf,

    /// Estimator: enet, aenet, aenetcc, wenet or wenetcc.
    #[arg(long)]
    pub method: String,

    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Write Kaplan-Meier curve coordinates per risk group to this CSV.
    #[arg(long = "km-out")]
    pub km_out: Option<PathBuf>,

    #[arg(long = "sis-dn")]
    pub sis_dn: Option<usize>,

    #[arg(long)]
    pub timing: bool,

    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let start = Instant::now();
    let method = parse_method(&args.method)?;
    let grid = args.grid.build()?;
    let loaded = load_input(&args.input, args.sis_dn)?;
    let test_named = read_dataset_csv::<f64>(&args.test)?;
    if test_named.data.p() != loaded.named.data.p() {
        return Err(Error::DimensionMismatch(format!(
            "training data has {} covariates, test data {}",
            loaded.named.data.p(),
            test_named.data.p()
        )));
    }
    let fitted = full_fit(method, &loaded.prep, &grid)?;
    let (coefficients, selected) =
        embed_coefficients(&loaded.named.covariate_names, &loaded.kept, &fitted.fit);
    // embed back to full width for evaluation on the unscreened test data
    let beta_full = Array1::from_iter(coefficients.iter().map(|c| c.value));

    let mse_tr = mse_train(&loaded.prep.data, &beta_full, fitted.fit.intercept)?;
    let mse_te = mse_test(&test_named.data, &beta_full, fitted.fit.intercept)?;
    let split = risk_split(
        &loaded.prep.data,
        &test_named.data,
        &beta_full,
        fitted.fit.intercept,
    )?;
    let logrank = if split.degenerate {
        None
    } else {
        let times: Vec<f64> = test_named.data.times().to_vec();
        let events: Vec<bool> = test_named.data.events().to_vec();
        logrank_test(&times, &events, &split.high_risk)
            .ok()
            .map(|(statistic, p_value)| LogrankReport { statistic, p_value })
    };
    if let Some(km_path) = &args.km_out {
        let curves = km_curves_by_group(&test_named.data, &split.high_risk);
        write_km_csv(km_path, &curves)?;
    }
    let elapsed = start.elapsed().as_millis();
    let report = EvaluateReport {
        command: "evaluate".to_string(),
        method: method.as_str().to_string(),
        input: args.input.display().to_string(),
        test: args.test.display().to_string(),
        config: ConfigEcho::from(&grid),
        tuning: fitted.tuning,
        intercept: fitted.fit.intercept,
        coefficients,
        selected,
        mse_train: mse_tr,
        mse_test: mse_te,
        risk: RiskReport {
            threshold: split.threshold,
            n_high: split.high_risk.iter().filter(|&&h| h).count(),
            n_low: split.high_risk.iter().filter(|&&h| !h).count(),
            degenerate: split.degenerate,
        },
        logrank,
        timing_ms: args.timing.then_some(elapsed),
    };
    emit(&report, args.output.as_deref())
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Benchmark design: 1 (n=100, p=40, blocks 5/2/0) or 2 (n=100,
    /// p=120, first 20 coefficients 4).
    #[arg(long, default_value_t = 1)]
    pub sim: u8,

    /// Override the sample size of the chosen design.
    #[arg(long)]
    pub n: Option<usize>,

    /// Target censoring percentage.
    #[arg(long, default_value_t = 30.0)]
    pub censoring: f64,

    /// Pairwise covariate correlation in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,

    /// Error law: lognormal or weibull.
    #[arg(long, default_value = "lognormal")]
    pub model: String,

    /// Output path: dataset CSV, or the study table CSV when
    /// --replicates is set.
    #[arg(long)]
    pub output: PathBuf,

    /// Write the design as JSON next to the data.
    #[arg(long = "design-out")]
    pub design_out: Option<PathBuf>,

    /// Run a selection-frequency study with this many replicates
    /// (0 = generate a single dataset instead).
    #[arg(long, default_value_t = 0)]
    pub replicates: usize,

    /// Methods for the study (comma separated; default: all five).
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,

    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn run_simulate(args: SimulateArgs) -> Result<()> {
    let law = match args.model.as_str() {
        "lognormal" => ErrorLaw::StdNormal,
        "weibull" => ErrorLaw::std_log_weibull(),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown model `{other}` (expected lognormal or weibull)"
            )))
        }
    };
    let grid = args.grid.build()?;
    let mut design = match args.sim {
        1 => SimDesign::<f64>::benchmark_one(law, args.rho, args.censoring, grid.seed),
        2 => SimDesign::<f64>::benchmark_two(law, args.rho, args.censoring, grid.seed),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown benchmark design {other} (expected 1 or 2)"
            )))
        }
    };
    if let Some(n) = args.n {
        design.n = n;
    }
    design.validate()?;
    if let Some(design_path) = &args.design_out {
        let text = serde_json::to_string_pretty(&design)
            .map_err(|e| Error::Config(format!("serializing design: {e}")))?;
        survenet::io::write_text(design_path, &(text + "\n"))?;
    }

    if args.replicates == 0 {
        let c0 = calibrate_c0(&design, design.target_censoring)?;
        let complete = gen_aft(&design)?;
        let censored = apply_censoring(&complete, c0, &design)?;
        let names: Vec<String> = (1..=design.p).map(|j| format!("x{j}")).collect();
        write_dataset_csv(&args.output, &censored.data, &names)?;
        let report = SimulateReport {
            command: "simulate".to_string(),
            design,
            c0,
            raw_censored_fraction: censored.raw_censored_fraction,
            output: args.output.display().to_string(),
        };
        emit(&report, None)
    } else {
        let method_names = args.methods.clone().unwrap_or_else(|| {
            vec!["enet", "aenet", "aenetcc", "wenet", "wenetcc"]
                .into_iter()
                .map(String::from)
                .collect()
        });
        let mut selectors: Vec<MethodSelector> = Vec::new();
        for name in &method_names {
            selectors.push(MethodSelector(parse_method(name)?));
        }
        let refs: Vec<&dyn Selector<f64>> =
            selectors.iter().map(|s| s as &dyn Selector<f64>).collect();
        let result =
            selection_frequency_study(&design, &refs, args.replicates, grid.seed, &grid)?;
        write_study_csv(&args.output, &result.rows)?;
        for failure in &result.failures {
            eprintln!(
                "survenet: replicate {} {} failed: {}",
                failure.replicate, failure.method, failure.message
            );
        }
        println!(
            "{{\"command\":\"simulate\",\"replicates\":{},\"methods\":{},\"failures\":{},\"output\":{:?}}}",
            args.replicates,
            method_names.len(),
            result.failures.len(),
            args.output.display().to_string()
        );
        Ok(())
    }
}
