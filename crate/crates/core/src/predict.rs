//! Cumulative hazard, survival and log-likelihood evaluation for fitted
//! step functions.

use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::linalg::dot;

fn extended(x: &[f64]) -> Vec<f64> {
    let mut e = Vec::with_capacity(x.len() + 1);
    e.push(1.0);
    e.extend_from_slice(x);
    e
}

fn check_point(f: &FitResult, x: &[f64], t: f64) -> Result<()> {
    if x.len() != f.p() {
        return Err(Error::Config(alloc::format!("expected {} covariates, got {}", f.p(), x.len())));
    }
    if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(alloc::format!("covariate {v} outside [0, 1]")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(alloc::format!("time {t} is negative")));
    }
    Ok(())
}

/// `H(t | x) = (1, x)' B(t)` with `B` right-continuous; `x` in rescaled
/// coordinates.
pub fn cumulative_hazard(f: &FitResult, x: &[f64], t: f64) -> Result<f64> {
    check_point(f, x, t)?;
    let b = f.coefficients.cumulative_at(t, f.p() + 1);
    Ok(dot(&extended(x), &b))
}

/// `(t, exp(-H(t | x)))` over `grid`. Not necessarily monotone for least
/// squares fits.
pub fn survival_curve(f: &FitResult, x: &[f64], grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&t| cumulative_hazard(f, x, t).map(|h| (t, libm::exp(-h))))
        .collect()
}

/// Cumulative hazard over a sorted grid using the prefix-summed
/// coefficients; identical to calling [`cumulative_hazard`] per point.
pub fn cumulative_hazard_curve(f: &FitResult, x: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let width = f.p() + 1;
    let cumulative = f.coefficients.cumulative();
    let xe = extended(x);
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        check_point(f, x, t)?;
        let k = f.coefficients.steps_at(t);
        out.push(if k == 0 { dot(&xe, &alloc::vec![0.0; width]) } else { dot(&xe, &cumulative[k - 1]) });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    /// `-inf` when some event has a nonpositive fitted hazard.
    pub value: f64,
    pub nonpositive_hazard: bool,
}

/// `sum_i [ d_i log((1, x_i)' b_{k(i)}) - (1, x_i)' B(t_i) ]` recomputed from
/// the data the fit was produced on.
pub fn total_loglik(f: &FitResult, d: &Dataset) -> Result<LogLikelihood> {
    if d.p != f.p() {
        return Err(Error::Config(alloc::format!("fit has {} covariates, data {}", f.p(), d.p)));
    }
    let width = f.p() + 1;
    let cumulative = f.coefficients.cumulative();
    let times = f.event_times();
    let mut value = 0.0;
    let mut nonpositive = false;
    for r in &d.records {
        let xe = r.extended();
        let k = f.coefficients.steps_at(r.time);
        if k > 0 {
            value -= dot(&xe, &cumulative[k - 1]);
        }
        if r.event {
            if k == 0 || times[k - 1] != r.time {
                return Err(Error::Config(alloc::format!("event at {} is not an event time of the fit", r.time)));
            }
            let h = dot(&xe, &f.jumps()[k - 1][..width]);
            if h > 0.0 {
                value += libm::log(h);
            } else {
                nonpositive = true;
            }
        }
    }
    Ok(LogLikelihood { value: if nonpositive { f64::NEG_INFINITY } else { value }, nonpositive_hazard: nonpositive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SubjectRecord;
    use crate::fit::{Method, StepCoefficients, TimeDiagnostic};
    use alloc::vec;

    fn single_time_fit() -> FitResult {
        FitResult {
            coefficients: StepCoefficients {
                event_times: vec![2.0],
                jumps: vec![vec![1.0 / 3.0, -1.0 / 3.0, 0.0]],
                method: Method::Mle,
            },
            total_loglik: Some(libm::log(1.0 / 3.0) - 1.0),
            per_time_loglik: Some(vec![libm::log(1.0 / 3.0) - 1.0]),
            diagnostics: vec![TimeDiagnostic::default()],
            names: vec!["a".into(), "b".into()],
            scale_info: None,
        }
    }

    #[test]
    fn hazard_before_and_after_event() {
        let f = single_time_fit();
        assert_eq!(cumulative_hazard(&f, &[0.0, 1.0], 1.0).unwrap(), 0.0);
        assert!((cumulative_hazard(&f, &[0.0, 1.0], 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(cumulative_hazard(&f, &[1.5, 0.0], 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn survival_of_known_hazard() {
        let f = single_time_fit();
        let curve = survival_curve(&f, &[0.0, 1.0], &[0.0, 5.0]).unwrap();
        assert_eq!(curve[0], (0.0, 1.0));
        assert!((curve[1].1 - libm::exp(-1.0 / 3.0)).abs() < 1e-15);
        assert!((libm::exp(-0.693) - 0.5).abs() < 1e-3);
    }

    #[test]
    fn loglik_of_single_time_fixture() {
        // failing subject x = (0, 1); risk sums (8, 5, 6) from 8 subjects
        let mut recs = vec![SubjectRecord::new(2.0, true, vec![0.0, 1.0])];
        let others = [[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        for x in others {
            recs.push(SubjectRecord::new(3.0, false, x.to_vec()));
        }
        let d = Dataset::new(recs, vec!["a".into(), "b".into()]).unwrap();
        let table = crate::data::build_event_table(&d).unwrap();
        assert_eq!(table.risk_sums[0], [8.0, 5.0, 6.0]);
        let ll = total_loglik(&single_time_fit(), &d).unwrap();
        assert!((ll.value - (libm::log(1.0 / 3.0) - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn curve_paths_agree_exactly() {
        let f = FitResult {
            coefficients: StepCoefficients {
                event_times: vec![1.0, 2.0, 3.0],
                jumps: vec![vec![0.1, 0.2], vec![0.3, -0.1], vec![0.7, 0.05]],
                method: Method::Ols,
            },
            total_loglik: None,
            per_time_loglik: None,
            diagnostics: vec![TimeDiagnostic::default(); 3],
            names: vec!["a".into()],
            scale_info: None,
        };
        let grid = [0.0, 1.0, 1.5, 2.0, 3.0, 4.0];
        let fast = cumulative_hazard_curve(&f, &[0.3], &grid).unwrap();
        for (t, h) in grid.iter().zip(fast) {
            assert_eq!(cumulative_hazard(&f, &[0.3], *t).unwrap().to_bits(), h.to_bits());
        }
    }
}
