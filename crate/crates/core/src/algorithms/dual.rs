use super::network::Network;
use super::trace::{Algorithm, RunFlags, RunTrace, TraceRecord};
use super::{validate, RunParams};
use crate::error::Result;
use crate::graphs::{theta_bounds, GraphSchedule};
use crate::linalg::{norm2, AgentMatrix};
use crate::objectives::{dual_constants, AggregateObjective, DualConstants};

/// Momentum is dropped when `κ` is within this distance of 1.
pub const KAPPA_DEGENERACY: f64 = 1e-12;

/// Momentum coefficient `(√κ − 1)/(√κ + 1)`, or `None` when `κ ≈ 1`.
pub fn momentum_coefficient(kappa: f64) -> Option<f64> {
    if kappa < 1.0 + KAPPA_DEGENERACY {
        return None;
    }
    let s = kappa.sqrt();
    Some((s - 1.0) / (s + 1.0))
}

/// Accelerated dual method run by the agents.
///
/// Each iteration agent `i` computes `ỹ_i = argmax ⟨z_i, y⟩ − φ_i(y)`,
/// exchanges it with its current neighbors, and updates
/// `z̃_i ← z_i − (1/L_f) Σ_j [W_k]_ij ỹ_j`, `z_i ← (1+β) z̃_i − β z̃_i^prev`.
/// Step and momentum use the dual constants of the whole schedule.
pub fn run_distributed_nesterov(
    agg: &AggregateObjective,
    schedule: &GraphSchedule,
    params: &RunParams,
) -> Result<RunTrace> {
    run(agg, schedule, params, Algorithm::Nesterov)
}

/// Same iteration with `β = 0`.
pub fn run_dual_gradient(
    agg: &AggregateObjective,
    schedule: &GraphSchedule,
    params: &RunParams,
) -> Result<RunTrace> {
    run(agg, schedule, params, Algorithm::DualGd)
}

/// Dual constants over a whole schedule.
pub fn schedule_constants(agg: &AggregateObjective, schedule: &GraphSchedule) -> Result<DualConstants> {
    dual_constants(agg, theta_bounds(schedule))
}

fn run(
    agg: &AggregateObjective,
    schedule: &GraphSchedule,
    params: &RunParams,
    algorithm: Algorithm,
) -> Result<RunTrace> {
    validate(agg, schedule, params)?;
    let constants = schedule_constants(agg, schedule)?;
    let mut flags = RunFlags::default();
    let beta = match algorithm {
        Algorithm::Nesterov => momentum_coefficient(constants.kappa).unwrap_or_else(|| {
            flags.momentum_disabled = true;
            0.0
        }),
        _ => 0.0,
    };
    let step = 1.0 / constants.l_f;
    let (d, n) = (agg.dim(), agg.n());
    let mut net = Network::new(schedule, params.log_messages);
    let mut z = AgentMatrix::zeros(d, n);
    let mut z_tilde = AgentMatrix::zeros(d, n);

    let snapshot = |iter: usize, z_tilde: &AgentMatrix, z: &AgentMatrix, sent: u64| -> Result<TraceRecord> {
        Ok(TraceRecord {
            iter,
            epoch: schedule.epoch_index(iter),
            dual: Some(z_tilde.clone()),
            momentum: Some(z.clone()),
            primal: agg.conj_argmax(z_tilde)?,
            tracker: None,
            message_count: sent,
        })
    };
    let mut records = vec![snapshot(0, &z_tilde, &z, 0)?];

    for k in 0..params.max_iter {
        let y = agg.conj_argmax(&z)?;
        let wy = net.laplacian_apply(k, &y);
        let next_tilde = z.lin_comb(1.0, &wy, -step);
        z = if beta == 0.0 {
            next_tilde.clone()
        } else {
            next_tilde.lin_comb(1.0 + beta, &z_tilde, -beta)
        };
        z_tilde = next_tilde;
        let drift = norm2(&z.row_sums()).max(norm2(&z_tilde.row_sums()));
        flags.max_kernel_drift = flags.max_kernel_drift.max(drift);
        let iter = k + 1;
        if !z.is_finite() {
            flags.aborted_at = Some(iter);
            break;
        }
        if iter % params.record_every == 0 || iter == params.max_iter {
            records.push(snapshot(iter, &z_tilde, &z, net.sent())?);
        }
    }

    Ok(RunTrace {
        algorithm,
        constants: Some(constants),
        step_size: step,
        momentum: beta,
        records,
        messages: net.into_log(),
        flags,
    })
}
