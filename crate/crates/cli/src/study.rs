use addhaz_core::sim::{run_replication, summarize, RepOutcome};
use addhaz_core::{SimConfig, SimSummary};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Runs the replications on a pool of `threads` workers (`None` uses the
/// current pool). Each replication owns its random stream and the
/// reduction runs in replication order, so the summary does not depend on
/// the thread count.
pub fn run_study_parallel(cfg: &SimConfig, threads: Option<usize>) -> Result<SimSummary> {
    cfg.validate()?;
    let work = || -> Vec<RepOutcome> { (0..cfg.reps as u64).into_par_iter().map(|r| run_replication(cfg, r)).collect() };
    let outcomes = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(summarize(cfg, &outcomes))
}
