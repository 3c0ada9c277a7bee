//! Decentralized convex optimization over time-varying graphs.
//!
//! The crate solves `min Σ_i φ_i(y)` across `n` agents that only talk to
//! their neighbors. The consensus constraint is dualized through the graph
//! Laplacian, and the dual is minimized with an accelerated gradient method
//! whose iterates live on the agents. Plain dual gradient descent and the
//! gradient-tracking DIGing method serve as baselines, and [`theory`] and
//! [`metrics`] evaluate closed-form rates and compare them to measured runs.
//!
//! ```
//! use tvdual::graphs::{GraphSchedule, Topology, TopologyKind};
//! use tvdual::objectives::{AggregateObjective, LocalObjective};
//! use tvdual::algorithms::{run_distributed_nesterov, RunParams};
//!
//! let agg = AggregateObjective::new(vec![
//!     LocalObjective::isotropic(&[-1.0]).unwrap(),
//!     LocalObjective::isotropic(&[1.0]).unwrap(),
//! ])
//! .unwrap();
//! let path = Topology::generate(&TopologyKind::Path, 2, 0).unwrap();
//! let schedule = GraphSchedule::fixed(path, 5).unwrap();
//! let trace = run_distributed_nesterov(&agg, &schedule, &RunParams::new(5)).unwrap();
//! assert!(trace.final_record().primal.max_abs() < 1e-12);
//! ```

// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod error;
pub mod graphs;
pub mod linalg;
pub mod metrics;
pub mod objectives;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
