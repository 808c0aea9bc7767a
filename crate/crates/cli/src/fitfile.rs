//! Self-describing JSON document for fitted step functions.

use std::fs;
use std::path::Path;

use addhaz_core::{FitResult, Method, ScaleInfo, StepCoefficients, TimeDiagnostic};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA: &str = "addhaz-fit/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFile {
    pub schema: String,
    pub method: Method,
    pub names: Vec<String>,
    pub scale_info: Option<Vec<ScaleInfo>>,
    pub event_times: Vec<f64>,
    pub jumps: Vec<Vec<f64>>,
    /// Prefix sums of `jumps`, written for external readers; ignored on load.
    pub cumulative: Vec<Vec<f64>>,
    pub diagnostics: Vec<TimeDiagnostic>,
    pub total_loglik: Option<f64>,
    pub per_time_loglik: Option<Vec<f64>>,
    /// How survival is derived from the cumulative hazard.
    pub survival: String,
}

impl FitFile {
    pub fn from_fit(f: &FitResult) -> Self {
        FitFile {
            schema: SCHEMA.into(),
            method: f.method(),
            names: f.names.clone(),
            scale_info: f.scale_info.clone(),
            event_times: f.event_times().to_vec(),
            jumps: f.jumps().to_vec(),
            cumulative: f.coefficients.cumulative(),
            diagnostics: f.diagnostics.clone(),
            total_loglik: f.total_loglik,
            per_time_loglik: f.per_time_loglik.clone(),
            survival: "exp(-H)".into(),
        }
    }

    pub fn into_fit(self) -> std::result::Result<FitResult, String> {
        if self.schema != SCHEMA {
            return Err(format!("unsupported schema `{}` (expected `{SCHEMA}`)", self.schema));
        }
        let k = self.event_times.len();
        let width = self.names.len() + 1;
        if self.jumps.len() != k || self.diagnostics.len() != k {
            return Err(format!("{k} event times but {} jumps and {} diagnostics", self.jumps.len(), self.diagnostics.len()));
        }
        if let Some(j) = self.jumps.iter().find(|j| j.len() != width) {
            return Err(format!("jump of length {} for {} covariates", j.len(), width - 1));
        }
        if self.per_time_loglik.as_ref().is_some_and(|l| l.len() != k) {
            return Err("per-time log-likelihood length differs from the event count".into());
        }
        if self.scale_info.as_ref().is_some_and(|s| s.len() != width - 1) {
            return Err("scale_info length differs from the covariate count".into());
        }
        Ok(FitResult {
            coefficients: StepCoefficients { event_times: self.event_times, jumps: self.jumps, method: self.method },
            total_loglik: self.total_loglik,
            per_time_loglik: self.per_time_loglik,
            diagnostics: self.diagnostics,
            names: self.names,
            scale_info: self.scale_info,
        })
    }
}

pub fn fit_to_string(f: &FitResult) -> String {
    let mut s = serde_json::to_string_pretty(&FitFile::from_fit(f)).expect("fit file is serializable");
    s.push('\n');
    s
}

pub fn fit_from_str(text: &str, origin: &Path) -> Result<FitResult> {
    let file: FitFile = serde_json::from_str(text).map_err(|e| CliError::parse(origin, e))?;
    file.into_fit().map_err(|m| CliError::parse(origin, m))
}

pub fn save_fit(f: &FitResult, path: &Path) -> Result<()> {
    fs::write(path, fit_to_string(f)).map_err(|e| CliError::io(path, e))
}

pub fn load_fit(path: &Path) -> Result<FitResult> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    fit_from_str(&text, path)
}
