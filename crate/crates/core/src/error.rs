use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("value outside its domain: {0}")]
    Domain(String),
    #[error("covariate column `{name}` is constant")]
    DegenerateColumn { name: String },
    #[error("tied event times: {times:?}")]
    Ties { times: Vec<f64> },
    #[error("dataset contains no events")]
    NoEvents,
    #[error("likelihood is unbounded at {}", fmt_time(.time))]
    DegenerateRiskSet { time: Option<f64> },
    #[error("no direction gives the failing subject a positive hazard at {}", fmt_time(.time))]
    NoPositiveRatio { time: Option<f64> },
    #[error("problem too large: {0}")]
    Size(String),
    #[error("constraint matrix has rank {rank}, need {needed}")]
    Rank { rank: usize, needed: usize },
    #[error("no feasible starting edge in the constraint cone")]
    StartNotFeasible,
}

impl Error {
    /// Attaches an event time to per-time errors raised without one.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            Error::DegenerateRiskSet { time: None } => Error::DegenerateRiskSet { time: Some(t) },
            Error::NoPositiveRatio { time: None } => Error::NoPositiveRatio { time: Some(t) },
            other => other,
        }
    }
}

fn fmt_time(t: &Option<f64>) -> String {
    match t {
        Some(t) => alloc::format!("event time {t}"),
        None => String::from("this event time"),
    }
}
