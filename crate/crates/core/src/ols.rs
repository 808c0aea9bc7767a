//! Aalen's least squares estimator: at each event time the jump is
//! `(X'X)^{-1} X' dN` over the risk set, or zero when `X'X` is singular.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{sweep_risk_sets, Dataset, Sweep};
use crate::error::{Error, Result};
use crate::fit::{FitResult, Method, TimeDiagnostic};
use crate::linalg;

/// `X'X` is treated as singular when its smallest eigenvalue is below this
/// fraction of the largest.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsJump {
    pub jump: Vec<f64>,
    pub rank_deficient: bool,
}

/// Least squares jump from the cross-product matrix `xtx` (row-major,
/// `(p+1) x (p+1)`) and the failing subject's extended covariates.
pub fn ols_jump_from_gram(xtx: &[f64], failing: &[f64]) -> OlsJump {
    let n = failing.len();
    let ev = linalg::symmetric_eigenvalues(xtx, n);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let singular = !(hi > 0.0) || lo < RANK_TOLERANCE * hi;
    let solved = if singular { None } else { linalg::cholesky_solve(xtx, n, failing) };
    match solved {
        Some(jump) => OlsJump { jump, rank_deficient: false },
        None => OlsJump { jump: vec![0.0; n], rank_deficient: true },
    }
}

/// Jump for one event time given the extended covariate rows of the risk
/// set and the position of the failing subject among them.
pub fn ols_jump(at_risk: &[Vec<f64>], failing_index: usize) -> OlsJump {
    assert!(!at_risk.is_empty(), "risk set must be nonempty");
    let n = at_risk[0].len();
    let mut xtx = vec![0.0; n * n];
    for row in at_risk {
        accumulate_outer(&mut xtx, row);
    }
    ols_jump_from_gram(&xtx, &at_risk[failing_index])
}

fn accumulate_outer(xtx: &mut [f64], row: &[f64]) {
    let n = row.len();
    for i in 0..n {
        for j in 0..n {
            xtx[i * n + j] += row[i] * row[j];
        }
    }
}

pub fn fit_ols(d: &Dataset) -> Result<FitResult> {
    if d.event_count() == 0 {
        return Err(Error::NoEvents);
    }
    let tied = d.tied_event_times();
    if !tied.is_empty() {
        return Err(Error::Ties { times: tied });
    }
    let n = d.p + 1;
    let mut xtx = vec![0.0; n * n];
    let mut row = vec![1.0; n];
    let mut out: Vec<(f64, OlsJump)> = Vec::with_capacity(d.event_count());
    sweep_risk_sets(&d.records, |step| match step {
        Sweep::Enter(r) => {
            row[1..].copy_from_slice(&r.covariates);
            accumulate_outer(&mut xtx, &row);
        }
        Sweep::Event(i, _) => {
            let rec = &d.records[i];
            out.push((rec.time, ols_jump_from_gram(&xtx, &rec.extended())));
        }
    });
    out.reverse();
    let diagnostics = out
        .iter()
        .map(|(_, j)| TimeDiagnostic { rank_deficient: j.rank_deficient, multiplicity: 1, fallback: false })
        .collect();
    let (times, jumps) = out.into_iter().map(|(t, j)| (t, j.jump)).unzip();
    Ok(FitResult::assemble(d, Method::Ols, times, jumps, None, diagnostics))
}
