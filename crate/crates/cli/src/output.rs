//! CSV and text renderings of curves, comparisons and study summaries.
//!
//! Every writer renders to a `String` first; numbers use the shortest
//! round-trip representation so reruns are byte-identical.

use std::fs;
use std::path::Path;

use addhaz_core::predict::cumulative_hazard_curve;
use addhaz_core::{FitResult, SimSummary};

use crate::error::{CliError, Result};

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output")
}

/// `time,cumulative_hazard,survival` for covariates `x` in rescaled
/// coordinates.
pub fn curve_csv(f: &FitResult, x: &[f64], grid: &[f64]) -> Result<String> {
    let h = cumulative_hazard_curve(f, x, grid)?;
    let mut w = csv_writer();
    w.write_record(["time", "cumulative_hazard", "survival"]).expect("in-memory write");
    for (t, h) in grid.iter().zip(h) {
        w.write_record([t.to_string(), h.to_string(), (-h).exp().to_string()]).expect("in-memory write");
    }
    Ok(finish(w))
}

/// Label of coefficient `j` (0 is the intercept).
pub fn coefficient_name(f: &FitResult, j: usize) -> &str {
    if j == 0 {
        "intercept"
    } else {
        &f.names[j - 1]
    }
}

/// Long-format cumulative coefficients `time,covariate,method,cumulative`:
/// one row per fit, coefficient and event time.
pub fn compare_csv(fits: &[&FitResult]) -> String {
    let mut w = csv_writer();
    w.write_record(["time", "covariate", "method", "cumulative"]).expect("in-memory write");
    for f in fits {
        let cumulative = f.coefficients.cumulative();
        for j in 0..=f.p() {
            for (t, b) in f.event_times().iter().zip(&cumulative) {
                w.write_record([t.to_string(), coefficient_name(f, j).to_string(), f.method().to_string(), b[j].to_string()])
                    .expect("in-memory write");
            }
        }
    }
    finish(w)
}

/// Survival curves `time,S_OLS,S_MLE[,S_true]` at covariates `x`.
pub fn curves_csv(ols: &FitResult, mle: &FitResult, x: &[f64], grid: &[f64], truth: Option<&dyn Fn(f64) -> f64>) -> Result<String> {
    let h_ols = cumulative_hazard_curve(ols, x, grid)?;
    let h_mle = cumulative_hazard_curve(mle, x, grid)?;
    let mut w = csv_writer();
    let mut header = vec!["time", "S_OLS", "S_MLE"];
    if truth.is_some() {
        header.push("S_true");
    }
    w.write_record(&header).expect("in-memory write");
    for (i, &t) in grid.iter().enumerate() {
        let mut row = vec![t.to_string(), (-h_ols[i]).exp().to_string(), (-h_mle[i]).exp().to_string()];
        if let Some(h) = truth {
            row.push((-h(t)).exp().to_string());
        }
        w.write_record(&row).expect("in-memory write");
    }
    Ok(finish(w))
}

pub fn export_curves(
    ols: &FitResult,
    mle: &FitResult,
    x: &[f64],
    grid: &[f64],
    truth: Option<&dyn Fn(f64) -> f64>,
    path: &Path,
) -> Result<()> {
    write_text(path, &curves_csv(ols, mle, x, grid, truth)?)
}

pub fn summary_csv(s: &SimSummary) -> String {
    let mut w = csv_writer();
    w.write_record(["method", "time", "truth", "mean", "bias", "ese", "rmse"]).expect("in-memory write");
    for r in &s.rows {
        w.write_record([
            r.method.to_string(),
            r.checkpoint.to_string(),
            r.truth.to_string(),
            r.mean.to_string(),
            r.bias.to_string(),
            r.ese.to_string(),
            r.rmse.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// Aligned table with one line per method and checkpoint, followed by the
/// run totals.
pub fn summary_table(s: &SimSummary) -> String {
    let mut out = format!(
        "{:<6} {:>6} {:>8} {:>8} {:>9} {:>8} {:>8}\n",
        "method", "time", "truth", "mean", "bias", "ese", "rmse"
    );
    for r in &s.rows {
        out.push_str(&format!(
            "{:<6} {:>6.2} {:>8.4} {:>8.4} {:>9.4} {:>8.4} {:>8.4}\n",
            r.method.label(),
            r.checkpoint,
            r.truth,
            r.mean,
            r.bias,
            r.ese,
            r.rmse
        ));
    }
    out.push_str(&format!(
        "replications: {} requested, {} used, {} failed\n",
        s.reps_requested, s.reps_used, s.failures
    ));
    out.push_str(&format!("subjects: {}, censoring rate: {:.4}\n", s.subjects, s.censoring_rate));
    out.push_str(&format!("vertex feasibility violations: {}\n", s.feasibility_violations));
    for (rep, msg) in &s.failure_messages {
        out.push_str(&format!("failed replication {rep}: {msg}\n"));
    }
    out
}
