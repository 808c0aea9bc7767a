//! Subject records, covariate rescaling, tie handling and the per-event-time
//! summaries consumed by every estimator.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::sim::unit_interval;

/// One observation: follow-up time, event indicator and the covariates
/// without the implicit leading intercept.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubjectRecord {
    pub time: f64,
    pub event: bool,
    pub covariates: Vec<f64>,
}

impl SubjectRecord {
    pub fn new(time: f64, event: bool, covariates: Vec<f64>) -> Self {
        SubjectRecord { time, event, covariates }
    }

    /// Covariates with the intercept `1` prepended.
    pub fn extended(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.covariates.len() + 1);
        x.push(1.0);
        x.extend_from_slice(&self.covariates);
        x
    }
}

/// Affine map `(x - min) / (max - min)` applied to one covariate column.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleInfo {
    pub min: f64,
    pub max: f64,
}

impl ScaleInfo {
    pub fn to_unit(&self, raw: f64) -> f64 {
        (raw - self.min) / (self.max - self.min)
    }

    pub fn to_raw(&self, unit: f64) -> f64 {
        self.min + unit * (self.max - self.min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    Reject,
    Jitter { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<SubjectRecord>,
    pub p: usize,
    /// Present once the covariates have been mapped onto `[0, 1]`.
    pub scale_info: Option<Vec<ScaleInfo>>,
    pub names: Vec<String>,
}

impl Dataset {
    /// Validates record shapes and times. Covariate names default to
    /// `x1..xp` when `names` is empty.
    pub fn new(records: Vec<SubjectRecord>, names: Vec<String>) -> Result<Self> {
        let p = if names.is_empty() {
            records.first().map_or(0, |r| r.covariates.len())
        } else {
            names.len()
        };
        for (i, r) in records.iter().enumerate() {
            if r.covariates.len() != p {
                return Err(Error::Config(alloc::format!(
                    "record {i} has {} covariates, expected {p}",
                    r.covariates.len()
                )));
            }
            if !(r.time >= 0.0) || !r.time.is_finite() {
                return Err(Error::Domain(alloc::format!("record {i} has time {}", r.time)));
            }
            if let Some(v) = r.covariates.iter().find(|v| !v.is_finite()) {
                return Err(Error::Domain(alloc::format!("record {i} has covariate {v}")));
            }
        }
        let names = if names.is_empty() {
            (1..=p).map(|j| alloc::format!("x{j}")).collect()
        } else {
            names
        };
        Ok(Dataset { records, p, scale_info: None, names })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.records.iter().filter(|r| r.event).count()
    }

    /// True when every covariate lies in `[0, 1]`.
    pub fn in_unit_cube(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.covariates.iter().all(|&v| (0.0..=1.0).contains(&v)))
    }

    /// Index of the first covariate column taking a single value, if any.
    pub fn constant_column(&self) -> Option<usize> {
        if self.records.is_empty() {
            return None;
        }
        (0..self.p).find(|&j| {
            let first = self.records[0].covariates[j];
            self.records.iter().all(|r| r.covariates[j] == first)
        })
    }

    /// Maps every covariate column onto `[0, 1]` by `(x - a) / (b - a)` with
    /// `a`, `b` the observed column extremes.
    pub fn rescale_covariates(mut self) -> Result<Self> {
        if self.records.is_empty() {
            return Ok(self);
        }
        let mut fresh = Vec::with_capacity(self.p);
        for j in 0..self.p {
            let (lo, hi) = self
                .records
                .iter()
                .map(|r| r.covariates[j])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if !(lo < hi) {
                return Err(Error::DegenerateColumn { name: self.names[j].clone() });
            }
            fresh.push(ScaleInfo { min: lo, max: hi });
        }
        for r in &mut self.records {
            for (v, s) in r.covariates.iter_mut().zip(&fresh) {
                *v = s.to_unit(*v);
            }
        }
        let composed = match self.scale_info.take() {
            None => fresh,
            Some(old) => old
                .iter()
                .zip(&fresh)
                .map(|(o, f)| ScaleInfo { min: o.to_raw(f.min), max: o.to_raw(f.max) })
                .collect(),
        };
        self.scale_info = Some(composed);
        Ok(self)
    }

    /// Distinct times shared by two or more event records, ascending.
    pub fn tied_event_times(&self) -> Vec<f64> {
        let mut times: Vec<f64> = self.records.iter().filter(|r| r.event).map(|r| r.time).collect();
        times.sort_by(f64::total_cmp);
        let mut tied: Vec<f64> = Vec::new();
        for w in times.windows(2) {
            if w[0] == w[1] && tied.last() != Some(&w[0]) {
                tied.push(w[0]);
            }
        }
        tied
    }

    /// Enforces the no-ties assumption, either by rejecting the data or by
    /// separating tied event times with small seeded offsets.
    ///
    /// Jittered events move to distinct times inside `(t - g/2, t)`, where
    /// `g` is the smallest positive gap between distinct observed times, so
    /// censored subjects at `t` stay in each jittered event's risk set and
    /// the order against every other observed time is unchanged. Events tied
    /// at time zero move upward instead.
    pub fn check_ties(mut self, policy: TiePolicy) -> Result<Self> {
        let tied = self.tied_event_times();
        if tied.is_empty() {
            return Ok(self);
        }
        let seed = match policy {
            TiePolicy::Reject => return Err(Error::Ties { times: tied }),
            TiePolicy::Jitter { seed } => seed,
        };
        let mut distinct: Vec<f64> = self.records.iter().map(|r| r.time).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let gap = distinct
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let half_gap = if gap.is_finite() { gap / 2.0 } else { distinct[0].max(1.0) / 2.0 };

        let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            if r.event && tied.contains(&r.time) {
                groups.entry(r.time.to_bits()).or_default().push(i);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (bits, members) in groups {
            let t = f64::from_bits(bits);
            let (width, sign) = if t > 0.0 { (half_gap.min(t), -1.0) } else { (half_gap, 1.0) };
            loop {
                let mut moved: Vec<f64> = members
                    .iter()
                    .map(|_| {
                        // u in (0, 1)
                        let u = loop {
                            let u = unit_interval(&mut rng);
                            if u > 0.0 {
                                break u;
                            }
                        };
                        t + sign * u * width
                    })
                    .collect();
                let mut sorted = moved.clone();
                sorted.sort_by(f64::total_cmp);
                let distinct_ok = sorted.windows(2).all(|w| w[0] < w[1]);
                let inside = moved.iter().all(|&m| m != t && m >= 0.0);
                if distinct_ok && inside {
                    for (&i, m) in members.iter().zip(moved.drain(..)) {
                        self.records[i].time = m;
                    }
                    break;
                }
            }
        }
        Ok(self)
    }
}

/// Ordering used by every risk-set sweep: ascending time, then covariates,
/// then censored before events. Makes the sweeps independent of input order.
pub(crate) fn canonical_order(records: &[SubjectRecord]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ra, rb) = (&records[a], &records[b]);
        ra.time
            .total_cmp(&rb.time)
            .then_with(|| {
                ra.covariates
                    .iter()
                    .zip(&rb.covariates)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| ra.event.cmp(&rb.event))
    });
    idx
}

pub(crate) enum Sweep<'a> {
    /// Record joins the risk set.
    Enter(&'a SubjectRecord),
    /// Event record index and the current risk-set size; every record with
    /// time >= the event time has entered.
    Event(usize, usize),
}

/// Walks the records in descending time order, reporting risk-set entries
/// and events. Events are reported in descending time order.
pub(crate) fn sweep_risk_sets<'a>(records: &'a [SubjectRecord], mut step: impl FnMut(Sweep<'a>)) {
    let order = canonical_order(records);
    let mut pos = order.len();
    let mut at_risk = 0usize;
    while pos > 0 {
        let t = records[order[pos - 1]].time;
        let mut start = pos;
        while start > 0 && records[order[start - 1]].time == t {
            start -= 1;
        }
        for &i in &order[start..pos] {
            step(Sweep::Enter(&records[i]));
            at_risk += 1;
        }
        for &i in &order[start..pos] {
            if records[i].event {
                step(Sweep::Event(i, at_risk));
            }
        }
        pos = start;
    }
}

/// Per-event-time summaries: the failing subject's extended covariates and
/// the risk-set sums `s_kj = sum_{l : t_l >= t_k} x_lj`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTable {
    pub event_times: Vec<f64>,
    pub failing_covariates: Vec<Vec<f64>>,
    pub risk_sums: Vec<Vec<f64>>,
    pub risk_counts: Vec<usize>,
    /// Record index of the subject failing at each event time.
    pub failing_subject: Vec<usize>,
}

impl EventTable {
    pub fn len(&self) -> usize {
        self.event_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.event_times.is_empty()
    }
}

pub fn build_event_table(d: &Dataset) -> Result<EventTable> {
    if d.event_count() == 0 {
        return Err(Error::NoEvents);
    }
    let tied = d.tied_event_times();
    if !tied.is_empty() {
        return Err(Error::Ties { times: tied });
    }
    let p = d.p;
    let mut sums = vec![0.0; p + 1];
    let mut rows: Vec<(usize, Vec<f64>, usize)> = Vec::with_capacity(d.event_count());
    sweep_risk_sets(&d.records, |step| match step {
        Sweep::Enter(r) => {
            sums[0] += 1.0;
            for (acc, v) in sums[1..].iter_mut().zip(&r.covariates) {
                *acc += v;
            }
        }
        Sweep::Event(i, at_risk) => rows.push((i, sums.clone(), at_risk)),
    });
    rows.reverse();
    let mut table = EventTable {
        event_times: Vec::with_capacity(rows.len()),
        failing_covariates: Vec::with_capacity(rows.len()),
        risk_sums: Vec::with_capacity(rows.len()),
        risk_counts: Vec::with_capacity(rows.len()),
        failing_subject: Vec::with_capacity(rows.len()),
    };
    for (i, s, at_risk) in rows {
        let r = &d.records[i];
        table.event_times.push(r.time);
        table.failing_covariates.push(r.extended());
        table.risk_sums.push(s);
        table.risk_counts.push(at_risk);
        table.failing_subject.push(i);
    }
    Ok(table)
}

impl core::fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TiePolicy::Reject => f.write_str("reject"),
            TiePolicy::Jitter { seed } => write!(f, "jitter({seed})"),
        }
    }
}
