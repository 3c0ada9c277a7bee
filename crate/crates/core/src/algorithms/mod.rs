//! Iterative solvers: the accelerated dual method, dual gradient descent,
//! DIGing, and a centralized X-space reference run.

mod diging;
mod dual;
pub mod network;
mod trace;
mod xspace;

pub use diging::{default_diging_stepsize, run_diging, DIVERGENCE_LIMIT};
pub use dual::{
    momentum_coefficient, run_distributed_nesterov, run_dual_gradient, schedule_constants,
    KAPPA_DEGENERACY,
};
pub use network::{MessageLog, Round, Violation};
pub use trace::{Algorithm, RunFlags, RunTrace, TraceRecord};
pub use xspace::{
    dual_optimum, min_norm_dual_solution, run_xspace_reference, XMethod, XSpaceParams, XSpaceRecord,
    XSpaceTrace, COMMON_MINIMIZER_TOLERANCE, ORACLE_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::graphs::GraphSchedule;
use crate::objectives::AggregateObjective;

#[derive(Clone, Debug, PartialEq)]
pub struct RunParams {
    pub max_iter: usize,
    /// Keep every `record_every`-th iterate; the last one is always kept.
    pub record_every: usize,
    /// Keep the per-iteration list of messages.
    pub log_messages: bool,
}

impl RunParams {
    pub fn new(max_iter: usize) -> Self {
        RunParams {
            max_iter,
            record_every: 1,
            log_messages: true,
        }
    }
}

fn validate(agg: &AggregateObjective, schedule: &GraphSchedule, params: &RunParams) -> Result<()> {
    if params.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if params.record_every == 0 {
        return Err(Error::InvalidArgument("record_every must be at least 1".into()));
    }
    if agg.n() != schedule.n() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} agents (schedule)", schedule.n()),
            found: format!("{} local objectives", agg.n()),
        });
    }
    Ok(())
}
