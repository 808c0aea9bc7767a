//! Fitted step-function estimates and their per-time diagnostics.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::data::{Dataset, ScaleInfo};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    #[cfg_attr(feature = "serde", serde(rename = "OLS"))]
    Ols,
    #[cfg_attr(feature = "serde", serde(rename = "MLE"))]
    Mle,
    #[cfg_attr(feature = "serde", serde(rename = "MLE-cone"))]
    MleCone,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Ols => "OLS",
            Method::Mle => "MLE",
            Method::MleCone => "MLE-cone",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "OLS" | "ols" => Ok(Method::Ols),
            "MLE" | "mle" => Ok(Method::Mle),
            "MLE-cone" | "mle-cone" => Ok(Method::MleCone),
            other => Err(Error::Config(alloc::format!("unknown method `{other}`"))),
        }
    }
}

/// Estimate of `B(t)` as a right-continuous step function: jump `jumps[k]`
/// (intercept first) at `event_times[k]`, zero before the first event.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCoefficients {
    pub event_times: Vec<f64>,
    pub jumps: Vec<Vec<f64>>,
    pub method: Method,
}

impl StepCoefficients {
    /// Number of event times `<= t`.
    pub fn steps_at(&self, t: f64) -> usize {
        self.event_times.partition_point(|&e| e <= t)
    }

    /// Prefix sums of the jumps, one row per event time.
    pub fn cumulative(&self) -> Vec<Vec<f64>> {
        let width = self.jumps.first().map_or(0, Vec::len);
        let mut acc = alloc::vec![0.0; width];
        self.jumps
            .iter()
            .map(|j| {
                for (a, v) in acc.iter_mut().zip(j) {
                    *a += v;
                }
                acc.clone()
            })
            .collect()
    }

    /// `B(t)`, accumulated jump by jump.
    pub fn cumulative_at(&self, t: f64, width: usize) -> Vec<f64> {
        let mut acc = alloc::vec![0.0; width];
        for j in &self.jumps[..self.steps_at(t)] {
            for (a, v) in acc.iter_mut().zip(j) {
                *a += v;
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeDiagnostic {
    /// Least squares design was singular; the jump was set to zero.
    pub rank_deficient: bool,
    /// Number of tied optimal directions averaged into the jump.
    pub multiplicity: usize,
    /// The ascending cone search stalled and the naive search was used.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: StepCoefficients,
    /// Sum of the per-time maximised log-likelihood terms; `None` for OLS.
    pub total_loglik: Option<f64>,
    pub per_time_loglik: Option<Vec<f64>>,
    pub diagnostics: Vec<TimeDiagnostic>,
    pub names: Vec<String>,
    pub scale_info: Option<Vec<ScaleInfo>>,
}

impl FitResult {
    pub(crate) fn assemble(
        d: &Dataset,
        method: Method,
        event_times: Vec<f64>,
        jumps: Vec<Vec<f64>>,
        per_time_loglik: Option<Vec<f64>>,
        diagnostics: Vec<TimeDiagnostic>,
    ) -> Self {
        let total_loglik = per_time_loglik.as_ref().map(|l| l.iter().sum());
        FitResult {
            coefficients: StepCoefficients { event_times, jumps, method },
            total_loglik,
            per_time_loglik,
            diagnostics,
            names: d.names.clone(),
            scale_info: d.scale_info.clone(),
        }
    }

    pub fn method(&self) -> Method {
        self.coefficients.method
    }

    /// Covariate count `p` (jump vectors have length `p + 1`).
    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn event_times(&self) -> &[f64] {
        &self.coefficients.event_times
    }

    pub fn jumps(&self) -> &[Vec<f64>] {
        &self.coefficients.jumps
    }

    pub fn rank_deficient_times(&self) -> Vec<f64> {
        self.diagnostics
            .iter()
            .zip(self.event_times())
            .filter(|(d, _)| d.rank_deficient)
            .map(|(_, &t)| t)
            .collect()
    }
}
