use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::network::MessageLog;
use crate::error::Error;
use crate::linalg::AgentMatrix;
use crate::objectives::DualConstants;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Nesterov,
    DualGd,
    Diging,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Nesterov, Algorithm::DualGd, Algorithm::Diging];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nesterov => "nesterov",
            Algorithm::DualGd => "dual_gd",
            Algorithm::Diging => "diging",
        }
    }

    /// Whether the method iterates on dual variables.
    pub fn is_dual(self) -> bool {
        !matches!(self, Algorithm::Diging)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown algorithm {s:?}; valid names are {}",
                    names.join(", ")
                ))
            })
    }
}

/// Snapshot after `iter` iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Epoch of the graph in force at `iter`.
    pub epoch: usize,
    /// Dual methods: the gradient-step iterate `Z̃`. Absent for DIGing.
    pub dual: Option<AgentMatrix>,
    /// Dual methods: the extrapolated iterate `Z` fed to the next step.
    pub momentum: Option<AgentMatrix>,
    /// Primal candidates: `Ỹ(Z̃)` for dual methods, the local copies for DIGing.
    pub primal: AgentMatrix,
    /// DIGing gradient trackers.
    pub tracker: Option<AgentMatrix>,
    /// Messages sent so far.
    pub message_count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunFlags {
    /// `κ` was too close to 1 for momentum; plain gradient steps were used.
    pub momentum_disabled: bool,
    /// Iteration at which the divergence guard stopped the run.
    pub aborted_at: Option<usize>,
    /// Largest `‖Σ_i z_i‖` seen at any iteration (dual methods).
    pub max_kernel_drift: f64,
    /// Largest `‖mean(u) − mean(∇φ_i(x_i))‖` seen at any iteration (DIGing).
    pub max_tracker_gap: f64,
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    /// Dual constants used for the step and momentum (dual methods).
    pub constants: Option<DualConstants>,
    pub step_size: f64,
    pub momentum: f64,
    pub records: Vec<TraceRecord>,
    pub messages: Option<MessageLog>,
    pub flags: RunFlags,
}

impl RunTrace {
    /// The last recorded state; runs always record their final iteration.
    pub fn final_record(&self) -> &TraceRecord {
        self.records.last().expect("runs record at least the initial state")
    }
}
