//! Accelerated failure time (AFT) modelling of right-censored data by
//! regularized Stute weighted least squares.
//!
//! The crate fits AFT models `Y = alpha + X beta + sigma eps` (with `Y` the
//! log survival time) by weighted least squares with Kaplan–Meier weights,
//! and performs variable selection with four elastic-net-family estimators:
//!
//! - [`enet::aenet_fit`] — adaptive elastic net (AEnet),
//! - [`qp::aenetcc_fit`] — AEnet with censoring constraints (AEnetCC),
//! - [`enet::wenet_fit`] — weighted elastic net (WEnet),
//! - [`qp::wenetcc_fit`] — WEnet with censoring constraints (WEnetCC),
//!
//! plus the plain elastic net on weighted data as baseline and initial
//! estimator. Tuning (cross-validation, AICc model scoring), evaluation
//! (training/test MSE, 0.632 bootstrap variance, risk grouping, log-rank
//! test), simulation designs with calibrated censoring, and sure
//! independence screening round out the toolkit.
//!
//! All numerical routines are generic over the scalar type through
//! [`num::Scalar`]; the command-line front end instantiates everything at
//! [`Real`] (`f64`).

pub mod enet;
pub mod error;
pub mod eval;
pub mod gehan;
pub mod io;
pub mod linalg;
pub mod num;
pub mod path;
pub mod qp;
pub mod select;
pub mod sim;
pub mod special;
pub mod survival;

pub use error::{Error, Result};
pub use num::Scalar;

/// Scalar type used by the command-line tools and the concrete aliases below.
pub type Real = f64;

/// Convenience aliases at the default precision.
pub type Dataset = survival::SurvivalDataset<Real>;
pub type Prepared = survival::Prepared<Real>;
pub type Fit = enet::FitResult<Real>;
pub type Grid = select::TuningGrid<Real>;
