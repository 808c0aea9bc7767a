//! Monte-Carlo comparison of the least squares and maximum likelihood
//! estimators on data with hazard `h(t | x) = (b_0 + b_1 x_1 + ...) t`.
//!
//! That hazard is Weibull with shape 2 and rate `a(x) = (b'(1, x)) / 2` in
//! the parametrisation `h(t; a, b) = a b t^(b - 1)`, so `H(t | x) = a t^2`
//! and event times are drawn by inversion, `T = sqrt(E / a)` with `E`
//! standard exponential. Censoring is uniform on `(censor_low, censor_high)`.
//!
//! Replication `r` draws from the ChaCha8 stream `r` of `master_seed`, so
//! replications can be generated in any order or in parallel.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::data::{Dataset, SubjectRecord};
use crate::error::{Error, Result};
use crate::fit::{FitResult, Method};
use crate::linalg::dot;
use crate::mle::fit_mle;
use crate::ols::fit_ols;
use crate::predict::cumulative_hazard;

/// Uniform draw on `[0, 1)` with 53 random bits.
pub fn unit_interval(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub reps: usize,
    /// Hazard slopes in `t`, intercept first.
    pub beta_slopes: Vec<f64>,
    pub censor_low: f64,
    pub censor_high: f64,
    pub target_x: Vec<f64>,
    pub checkpoints: Vec<f64>,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 500,
            reps: 1000,
            beta_slopes: vec![0.05, 0.02, 0.04, 0.06, 0.08],
            censor_low: 2.5,
            censor_high: 7.5,
            target_x: vec![0.4, 0.6, 0.4, 0.6],
            checkpoints: vec![1.93, 3.00, 4.24],
            master_seed: 20_200_501,
        }
    }
}

impl SimConfig {
    pub fn p(&self) -> usize {
        self.beta_slopes.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        let fail = |m: String| Err(Error::Config(m));
        if self.beta_slopes.is_empty() {
            return fail("beta_slopes is empty".into());
        }
        if self.n < p + 2 {
            return fail(alloc::format!("n = {} must be at least p + 2 = {}", self.n, p + 2));
        }
        if self.reps == 0 {
            return fail("reps must be at least 1".into());
        }
        if !(self.censor_low >= 0.0 && self.censor_low < self.censor_high) {
            return fail(alloc::format!(
                "censoring interval ({}, {}) is empty or negative",
                self.censor_low, self.censor_high
            ));
        }
        if self.target_x.len() != p || self.target_x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return fail(alloc::format!("target_x must be {p} values in [0, 1]"));
        }
        let worst = self.beta_slopes[0] + self.beta_slopes[1..].iter().map(|b| b.min(0.0)).sum::<f64>();
        if !(worst > 0.0) {
            return fail("beta_slopes give a nonpositive hazard somewhere on the unit cube".into());
        }
        if self.checkpoints.iter().any(|t| !(*t >= 0.0)) {
            return fail("checkpoints must be nonnegative".into());
        }
        Ok(())
    }

    /// True `H(t | x) = b'(1, x) t^2 / 2`.
    pub fn true_cumulative_hazard(&self, x: &[f64], t: f64) -> f64 {
        let mut xe = vec![1.0];
        xe.extend_from_slice(x);
        dot(&self.beta_slopes, &xe) * t * t / 2.0
    }
}

/// Data for replication `rep_index`; bit-identical for a given
/// `(master_seed, rep_index)`.
pub fn gen_replication(cfg: &SimConfig, rep_index: u64) -> Dataset {
    let p = cfg.p();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    rng.set_stream(rep_index);
    let mut records = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let x: Vec<f64> = (0..p).map(|_| unit_interval(&mut rng)).collect();
        let mut xe = vec![1.0];
        xe.extend_from_slice(&x);
        let rate = dot(&cfg.beta_slopes, &xe) / 2.0;
        let e = -libm::log(1.0 - unit_interval(&mut rng));
        let event_time = libm::sqrt(e / rate);
        let censor = cfg.censor_low + (cfg.censor_high - cfg.censor_low) * unit_interval(&mut rng);
        let (time, event) = if event_time <= censor { (event_time, true) } else { (censor, false) };
        records.push(SubjectRecord::new(time, event, x));
    }
    let names = (1..=p).map(|j| alloc::format!("x{j}")).collect();
    Dataset::new(records, names).expect("generated records are valid")
}

/// Smallest hazard jump `(1, m)' b_k` over all event times and vertices
/// `m` of the unit cube.
pub fn min_vertex_jump(f: &FitResult) -> f64 {
    let p = f.p();
    let mut worst = f64::INFINITY;
    for jump in f.jumps() {
        for mask in 0..(1usize << p) {
            let mut h = jump[0];
            for j in 0..p {
                if mask >> j & 1 == 1 {
                    h += jump[j + 1];
                }
            }
            worst = worst.min(h);
        }
    }
    worst
}

/// Per-replication estimates at the target covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct RepOutcome {
    pub rep_index: u64,
    pub subjects: usize,
    pub censored: usize,
    /// `(ols, mle)` cumulative hazards at each checkpoint; `Err` holds the
    /// failure message when either fit failed.
    pub estimates: core::result::Result<(Vec<f64>, Vec<f64>), String>,
    /// `min_vertex_jump` of the likelihood fit.
    pub mle_min_vertex_jump: Option<f64>,
}

pub fn run_replication(cfg: &SimConfig, rep_index: u64) -> RepOutcome {
    let d = gen_replication(cfg, rep_index);
    let censored = d.records.iter().filter(|r| !r.event).count();
    let eval = |f: &FitResult| -> Result<Vec<f64>> {
        cfg.checkpoints.iter().map(|&t| cumulative_hazard(f, &cfg.target_x, t)).collect()
    };
    let mut min_jump = None;
    let estimates = (|| -> Result<(Vec<f64>, Vec<f64>)> {
        let ols = fit_ols(&d)?;
        let mle = fit_mle(&d)?;
        min_jump = Some(min_vertex_jump(&mle));
        Ok((eval(&ols)?, eval(&mle)?))
    })()
    .map_err(|e| alloc::format!("{e}"));
    RepOutcome { rep_index, subjects: d.len(), censored, estimates, mle_min_vertex_jump: min_jump }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub checkpoint: f64,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    /// Standard deviation about the mean (denominator `reps - 1`).
    pub ese: f64,
    /// Root mean squared deviation from the truth.
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    /// OLS and MLE rows for each checkpoint, checkpoint-major.
    pub rows: Vec<SummaryRow>,
    pub reps_requested: usize,
    pub reps_used: usize,
    /// Replications excluded from both methods because a fit failed.
    pub failures: usize,
    pub failure_messages: Vec<(u64, String)>,
    pub censoring_rate: f64,
    pub subjects: usize,
    /// Replications whose likelihood fit had a vertex hazard jump below
    /// `-1e-12`.
    pub feasibility_violations: usize,
}

impl SimSummary {
    pub fn row(&self, method: Method, checkpoint_index: usize) -> &SummaryRow {
        let offset = if method == Method::Ols { 0 } else { 1 };
        &self.rows[2 * checkpoint_index + offset]
    }
}

fn moments(values: &[f64], truth: f64) -> (f64, f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let ese = if values.len() > 1 {
        libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0))
    } else {
        0.0
    };
    let rmse = libm::sqrt(values.iter().map(|v| (v - truth) * (v - truth)).sum::<f64>() / m);
    (mean, ese, rmse)
}

/// Deterministic reduction over outcomes in `rep_index` order.
pub fn summarize(cfg: &SimConfig, outcomes: &[RepOutcome]) -> SimSummary {
    let mut ordered: Vec<&RepOutcome> = outcomes.iter().collect();
    ordered.sort_by_key(|o| o.rep_index);
    let ok: Vec<&(Vec<f64>, Vec<f64>)> = ordered.iter().filter_map(|o| o.estimates.as_ref().ok()).collect();
    let failure_messages: Vec<(u64, String)> = ordered
        .iter()
        .filter_map(|o| o.estimates.as_ref().err().map(|e| (o.rep_index, e.clone())))
        .collect();
    let subjects: usize = ordered.iter().map(|o| o.subjects).sum();
    let censored: usize = ordered.iter().map(|o| o.censored).sum();
    let mut rows = Vec::with_capacity(2 * cfg.checkpoints.len());
    if !ok.is_empty() {
        for (c, &t) in cfg.checkpoints.iter().enumerate() {
            let truth = cfg.true_cumulative_hazard(&cfg.target_x, t);
            for method in [Method::Ols, Method::Mle] {
                let values: Vec<f64> = ok
                    .iter()
                    .map(|(o, m)| if method == Method::Ols { o[c] } else { m[c] })
                    .collect();
                let (mean, ese, rmse) = moments(&values, truth);
                rows.push(SummaryRow { method, checkpoint: t, truth, mean, bias: mean - truth, ese, rmse });
            }
        }
    }
    SimSummary {
        rows,
        reps_requested: cfg.reps,
        reps_used: ok.len(),
        failures: failure_messages.len(),
        failure_messages,
        censoring_rate: if subjects == 0 { 0.0 } else { censored as f64 / subjects as f64 },
        subjects,
        feasibility_violations: ordered
            .iter()
            .filter(|o| o.mle_min_vertex_jump.is_some_and(|m| m < -1e-12))
            .count(),
    }
}

/// Sequential study over replications `0..reps`.
pub fn run_study(cfg: &SimConfig) -> Result<SimSummary> {
    cfg.validate()?;
    let outcomes: Vec<RepOutcome> = (0..cfg.reps as u64).map(|r| run_replication(cfg, r)).collect();
    Ok(summarize(cfg, &outcomes))
}
