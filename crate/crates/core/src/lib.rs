//! Nonparametric additive hazards regression for right-censored data.
//!
//! The hazard of a subject with covariates `x` in `[0, 1]^p` is modelled as
//! `h(t | x) = beta_0(t) + beta_1(t) x_1 + ... + beta_p(t) x_p`. Two estimators
//! of the cumulative regression functions `B(t)` are provided:
//!
//! - [`ols::fit_ols`], Aalen's per-event-time least squares increments;
//! - [`mle::fit_mle`], the maximum likelihood step function under the
//!   constraint that the hazard is nonnegative on the whole covariate cube,
//!   solved in closed form at each event time.
//!
//! [`cone`] generalises the likelihood fit to an arbitrary polyhedral cone of
//! admissible jumps, [`predict`] evaluates fitted curves and [`sim`] generates
//! the Weibull-type replications used to compare the estimators.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, parallel
//! drivers and the command-line front end live in the `addhaz` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cone;
pub mod data;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod mle;
pub mod ols;
pub mod predict;
pub mod sim;

pub use cone::{ConeMethod, ConstraintCone, Ray};
pub use data::{Dataset, EventTable, ScaleInfo, SubjectRecord, TiePolicy};
pub use error::{Error, Result};
pub use fit::{FitResult, Method, StepCoefficients, TimeDiagnostic};
pub use mle::JumpSolution;
pub use sim::{SimConfig, SimSummary};
