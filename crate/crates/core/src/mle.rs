//! Closed-form maximum likelihood jumps under the full vertex constraint
//! `h(t | x) >= 0` for every `x` in `{0, 1}^p`.
//!
//! At one event time the contribution `log(x'b) - s'b` is maximised on one
//! of `2p` cone edges: `e_j` (covariate `j` up) with value ratio `x_j / s_j`,
//! or `f_j` (intercept up, covariate `j` down) with ratio
//! `(1 - x_j) / (s_0 - s_j)`. The edge maximum sits at `1 / (s'v)` along the
//! edge and is worth `log(ratio) - 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{build_event_table, Dataset};
use crate::error::{Error, Result};
use crate::fit::{FitResult, Method, TimeDiagnostic};
use crate::linalg::dot;

/// Relative tolerance for treating two ratios as tied maxima.
pub const TIE_TOLERANCE: f64 = 1e-9;
/// Numerators and denominators below this (relative to `s_0` for
/// denominators) count as zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// One of the `2p` edge ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Value(f64),
    /// `0 / 0`: the edge gives the failing subject zero hazard.
    Excluded,
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            Ratio::Excluded => None,
        }
    }
}

/// Optimal jump(s) at one event time.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSolution {
    /// Every optimal edge point found; the maximum may be attained on
    /// several edges.
    pub candidates: Vec<Vec<f64>>,
    /// Uniform average of the candidates, itself optimal by concavity.
    pub averaged: Vec<f64>,
    pub max_ratio: f64,
    /// `log(max_ratio) - 1`.
    pub per_time_loglik: f64,
    /// Ratios visited by the iterative cone searches, in order.
    pub path: Vec<f64>,
    /// Set when the ascending search handed over to the naive search.
    pub fallback: bool,
}

impl JumpSolution {
    pub(crate) fn from_candidates(candidates: Vec<Vec<f64>>, max_ratio: f64) -> Self {
        let width = candidates[0].len();
        let mut averaged = vec![0.0; width];
        for c in &candidates {
            for (a, v) in averaged.iter_mut().zip(c) {
                *a += v;
            }
        }
        let m = candidates.len() as f64;
        for a in &mut averaged {
            *a /= m;
        }
        JumpSolution {
            candidates,
            averaged,
            max_ratio,
            per_time_loglik: libm::log(max_ratio) - 1.0,
            path: Vec::new(),
            fallback: false,
        }
    }
}

/// `log(x'b) - s'b`, or `-inf` when the failing subject's hazard `x'b` is
/// not positive.
pub fn jump_loglik(x: &[f64], s: &[f64], beta: &[f64]) -> f64 {
    let h = dot(x, beta);
    if h > 0.0 {
        libm::log(h) - dot(s, beta)
    } else {
        f64::NEG_INFINITY
    }
}

/// The `2p` edge ratios for failing covariates `x` (with `x[0] = 1`) and
/// risk sums `s`: entries `0..p` belong to `e_1..e_p`, entries `p..2p` to
/// `f_1..f_p`.
///
/// A zero denominator with a positive numerator means the likelihood grows
/// without bound along that edge and is reported as
/// [`Error::DegenerateRiskSet`].
pub fn admissible_ratios(x: &[f64], s: &[f64]) -> Result<Vec<Ratio>> {
    let p = x.len() - 1;
    let s0 = s[0];
    if !(s0 > 0.0) {
        return Err(Error::Domain(alloc::format!("risk count {s0} is not positive")));
    }
    let den_tol = ZERO_TOLERANCE * s0;
    let ratio = |num: f64, den: f64| -> Result<Ratio> {
        if den < -den_tol || num < -ZERO_TOLERANCE {
            return Err(Error::Domain(alloc::format!("inconsistent ratio {num}/{den}")));
        }
        let num_zero = num <= ZERO_TOLERANCE;
        if den <= den_tol {
            return if num_zero { Ok(Ratio::Excluded) } else { Err(Error::DegenerateRiskSet { time: None }) };
        }
        Ok(Ratio::Value(if num_zero { 0.0 } else { num / den }))
    };
    let mut out = Vec::with_capacity(2 * p);
    for j in 1..=p {
        out.push(ratio(x[j], s[j])?);
    }
    for j in 1..=p {
        out.push(ratio(x[0] - x[j], s0 - s[j])?);
    }
    Ok(out)
}

/// Analytic maximiser of `log(x'b) - s'b` over the full vertex cone.
pub fn mle_jump_full(x: &[f64], s: &[f64]) -> Result<JumpSolution> {
    let p = x.len() - 1;
    if p == 0 {
        if !(s[0] > 0.0) {
            return Err(Error::Domain(alloc::format!("risk count {} is not positive", s[0])));
        }
        return Ok(JumpSolution::from_candidates(vec![vec![1.0 / s[0]]], x[0] / s[0]));
    }
    let ratios = admissible_ratios(x, s)?;
    let best = ratios
        .iter()
        .filter_map(|r| r.value())
        .fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return Err(Error::NoPositiveRatio { time: None });
    }
    let cutoff = best * (1.0 - TIE_TOLERANCE);
    let candidates: Vec<Vec<f64>> = ratios
        .iter()
        .enumerate()
        .filter(|(_, r)| r.value().is_some_and(|v| v >= cutoff))
        .map(|(m, _)| {
            let mut beta = vec![0.0; p + 1];
            if m < p {
                beta[m + 1] = 1.0 / s[m + 1];
            } else {
                let j = m - p + 1;
                let step = 1.0 / (s[0] - s[j]);
                beta[0] = step;
                beta[j] = -step;
            }
            beta
        })
        .collect();
    Ok(JumpSolution::from_candidates(candidates, best))
}

fn check_mle_inputs(d: &Dataset) -> Result<()> {
    if !d.in_unit_cube() {
        return Err(Error::Domain(alloc::string::String::from(
            "maximum likelihood fitting needs covariates in [0, 1]; rescale first",
        )));
    }
    if let Some(j) = d.constant_column() {
        return Err(Error::DegenerateColumn { name: d.names[j].clone() });
    }
    Ok(())
}

/// Maximum likelihood step function under the full vertex constraint,
/// using the averaged solution at every event time.
pub fn fit_mle(d: &Dataset) -> Result<FitResult> {
    let table = build_event_table(d)?;
    check_mle_inputs(d)?;
    let mut jumps = Vec::with_capacity(table.len());
    let mut logliks = Vec::with_capacity(table.len());
    let mut diagnostics = Vec::with_capacity(table.len());
    for k in 0..table.len() {
        let sol = mle_jump_full(&table.failing_covariates[k], &table.risk_sums[k])
            .map_err(|e| e.at_time(table.event_times[k]))?;
        diagnostics.push(TimeDiagnostic { rank_deficient: false, multiplicity: sol.candidates.len(), fallback: false });
        logliks.push(sol.per_time_loglik);
        jumps.push(sol.averaged);
    }
    Ok(FitResult::assemble(d, Method::Mle, table.event_times, jumps, Some(logliks), diagnostics))
}
