use super::network::Network;
use super::trace::{Algorithm, RunFlags, RunTrace, TraceRecord};
use super::{validate, RunParams};
use crate::error::{Error, Result};
use crate::graphs::GraphSchedule;
use crate::linalg::{norm2, AgentMatrix};
use crate::objectives::AggregateObjective;
use crate::theory::diging_j;

/// The run stops once `‖X‖_F` exceeds this.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// `1.5 / (μ̄ (J + 1))` with `J = 3√κ̄ (1 + 4√n √κ̄)` and a window of one.
pub fn default_diging_stepsize(agg: &AggregateObjective) -> f64 {
    let j = diging_j(agg.kappa_bar(), agg.n(), 1);
    1.5 / (agg.mu_bar() * (j + 1.0))
}

/// Gradient tracking with mixing `V_k = I − W_k / n`:
/// `x ← x V_k − α u`, `u ← u V_k + ∇Φ(x_new) − ∇Φ(x_old)`, from `x⁰ = 0`,
/// `u⁰ = ∇Φ(x⁰)`.
pub fn run_diging(
    agg: &AggregateObjective,
    schedule: &GraphSchedule,
    params: &RunParams,
    stepsize: Option<f64>,
) -> Result<RunTrace> {
    validate(agg, schedule, params)?;
    let alpha = stepsize.unwrap_or_else(|| default_diging_stepsize(agg));
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange {
            name: "stepsize",
            value: alpha,
            range: "(0, inf)".into(),
        });
    }
    let (d, n) = (agg.dim(), agg.n());
    let mut net = Network::new(schedule, params.log_messages);
    let mut x = AgentMatrix::zeros(d, n);
    let mut g = agg.gradients(&x)?;
    let mut u = g.clone();
    let mut flags = RunFlags::default();

    let record = |iter: usize, x: &AgentMatrix, u: &AgentMatrix, sent: u64| TraceRecord {
        iter,
        epoch: schedule.epoch_index(iter),
        dual: None,
        momentum: None,
        primal: x.clone(),
        tracker: Some(u.clone()),
        message_count: sent,
    };
    let mut records = vec![record(0, &x, &u, 0)];

    for k in 0..params.max_iter {
        let mixed = net.mix(k, &[&x, &u]);
        let next_x = mixed[0].lin_comb(1.0, &u, -alpha);
        let next_g = agg.gradients(&next_x)?;
        u = mixed[1].add(&next_g).sub(&g);
        x = next_x;
        g = next_g;
        let gap: Vec<f64> = u
            .column_mean()
            .iter()
            .zip(g.column_mean())
            .map(|(a, b)| a - b)
            .collect();
        flags.max_tracker_gap = flags.max_tracker_gap.max(norm2(&gap));
        let iter = k + 1;
        let blown = !(x.frobenius_norm() <= DIVERGENCE_LIMIT);
        if blown || iter % params.record_every == 0 || iter == params.max_iter {
            records.push(record(iter, &x, &u, net.sent()));
        }
        if blown {
            flags.aborted_at = Some(iter);
            break;
        }
    }

    Ok(RunTrace {
        algorithm: Algorithm::Diging,
        constants: None,
        step_size: alpha,
        momentum: 0.0,
        records,
        messages: net.into_log(),
        flags,
    })
}
