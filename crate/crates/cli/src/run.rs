use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tvdual::algorithms::{
    dual_optimum, min_norm_dual_solution, run_distributed_nesterov, run_diging, run_dual_gradient,
    run_xspace_reference, schedule_constants, Algorithm, RunFlags, RunParams, RunTrace, XMethod,
    XSpaceParams,
};
use tvdual::graphs::{change_stats, theta_bounds, GraphSchedule};
use tvdual::linalg::AgentMatrix;
use tvdual::metrics::{self, bound_check, bound_check_values, BoundCheck, Format, MetricRow};
use tvdual::objectives::{AggregateObjective, DualConstants};
use tvdual::theory;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// Residuals this close to zero, relative to `1 + |f*|`, are rounding noise
/// and never count as bound violations.
pub const RESIDUAL_FLOOR: f64 = 1e-14;

/// Centralized optimum shared by every algorithm of a run.
#[derive(Clone, Debug)]
pub struct Oracle {
    pub z_star: AgentMatrix,
    pub y_star: Vec<f64>,
    pub f_star: f64,
}

impl Oracle {
    pub fn solve(agg: &AggregateObjective) -> CliResult<Self> {
        let (z_star, y_star, f_star) = dual_optimum(agg).map_err(runtime)?;
        Ok(Oracle { z_star, y_star, f_star })
    }

    /// `max_k ‖X*_k‖_F` over the epochs of `schedule`.
    pub fn max_solution_norm(&self, schedule: &GraphSchedule) -> CliResult<f64> {
        let mut r: f64 = 0.0;
        for e in schedule.epochs() {
            let x = min_norm_dual_solution(&self.z_star, &e.laplacian).map_err(runtime)?;
            r = r.max(x.frobenius_norm());
        }
        Ok(r)
    }
}

fn runtime(e: tvdual::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedCheck {
    pub name: String,
    #[serde(flatten)]
    pub check: BoundCheck,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpochSummary {
    pub start: usize,
    pub edges: usize,
    pub lambda_max: f64,
    pub lambda_min_pos: f64,
    pub chi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleSummary {
    pub n: usize,
    pub horizon: usize,
    pub epochs: Vec<EpochSummary>,
    pub theta_max: f64,
    pub theta_min: f64,
    /// Graph changes after iteration 0.
    pub m: usize,
    /// `m / horizon`.
    pub alpha: f64,
}

impl ScheduleSummary {
    pub fn of(s: &GraphSchedule) -> Self {
        let (theta_max, theta_min) = theta_bounds(s);
        let (m, alpha) = change_stats(s);
        ScheduleSummary {
            n: s.n(),
            horizon: s.horizon(),
            epochs: s
                .epochs()
                .iter()
                .map(|e| EpochSummary {
                    start: e.start,
                    edges: e.topology.edge_count(),
                    lambda_max: e.spectral.lambda_max,
                    lambda_min_pos: e.spectral.lambda_min_pos,
                    chi: e.spectral.chi,
                })
                .collect(),
            theta_max,
            theta_min,
            m,
            alpha,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ObjectiveSummary {
    pub kind: String,
    pub n: usize,
    pub dim: usize,
    pub mu_phi: f64,
    pub l_phi: f64,
    pub kappa_bar: f64,
    pub f_star: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgorithmSummary {
    pub name: String,
    pub file: String,
    pub step_size: f64,
    pub momentum: f64,
    pub flags: RunFlags,
    pub final_row: MetricRow,
    pub messages_sent: u64,
    pub message_violations: usize,
    pub bound_checks: Vec<NamedCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub run_id: String,
    pub seed: u64,
    pub max_iter: usize,
    pub objective: ObjectiveSummary,
    pub dual_constants: DualConstants,
    pub schedule: ScheduleSummary,
    /// `1/(√κ ln κ)`; absent when `κ = 1`.
    pub alpha_ceiling: Option<f64>,
    pub alpha_feasible: bool,
    /// `max_k ‖X*_k‖_F`, the `R` of the accelerated bound (`X_0 = 0`).
    pub r: f64,
    pub warnings: Vec<String>,
    pub algorithms: Vec<AlgorithmSummary>,
}

/// One algorithm run and its evaluated rows.
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub trace: RunTrace,
    pub rows: Vec<MetricRow>,
}

/// Runs one algorithm and evaluates it against `oracle`.
pub fn run_algorithm(
    algorithm: Algorithm,
    agg: &AggregateObjective,
    schedule: &GraphSchedule,
    params: &RunParams,
    diging_stepsize: Option<f64>,
    oracle: &Oracle,
) -> CliResult<AlgorithmRun> {
    let trace = match algorithm {
        Algorithm::Nesterov => run_distributed_nesterov(agg, schedule, params),
        Algorithm::DualGd => run_dual_gradient(agg, schedule, params),
        Algorithm::Diging => run_diging(agg, schedule, params, diging_stepsize),
    }
    .map_err(runtime)?;
    let rows = metrics::compute_metrics(&trace, agg, &oracle.y_star, -oracle.f_star).map_err(runtime)?;
    Ok(AlgorithmRun { algorithm, trace, rows })
}

/// Number of graph changes at iterations in `(0, n]`.
pub fn changes_up_to(schedule: &GraphSchedule, n: usize) -> u64 {
    schedule.epochs().iter().filter(|e| e.start > 0 && e.start <= n).count() as u64
}

/// Residual check against `(L+μ)/2 · R² · κ^m(N) · (1 − 1/√κ)^N`.
pub fn accelerated_bound_check(
    rows: &[MetricRow],
    schedule: &GraphSchedule,
    c: &DualConstants,
    r: f64,
    floor: f64,
) -> CliResult<BoundCheck> {
    // Validate once so the closure below cannot fail.
    theory::nesterov_tv_bound(c.l_f, c.mu_f, r, 0, 0)?;
    Ok(bound_check(
        rows,
        |n| {
            theory::nesterov_tv_bound(c.l_f, c.mu_f, r, changes_up_to(schedule, n), n as u64)
                .unwrap_or(f64::INFINITY)
        },
        floor,
    ))
}

/// X-space gradient-descent distances `‖x_k − x*‖` against `q^k R` for the
/// given contraction factor `q`. `None` when the epochs have no common
/// minimizer.
pub fn gd_contraction_checks(
    agg: &AggregateObjective,
    schedule: &GraphSchedule,
    max_iter: usize,
) -> CliResult<Option<Vec<NamedCheck>>> {
    let x = run_xspace_reference(agg, schedule, &XSpaceParams::new(max_iter, XMethod::Gradient))
        .map_err(runtime)?;
    if !x.common_minimizer {
        return Ok(None);
    }
    let (l, mu, r) = (x.constants.l_f, x.constants.mu_f, x.r());
    let dist: Vec<(usize, f64)> = x.records.iter().map(|rec| (rec.iter, rec.ex.frobenius_norm())).collect();
    let mut checks = Vec::new();
    for (name, q) in [
        ("gd-rate", theory::gd_rate(l, mu)?),
        ("gd-rate-step-inv-l", theory::gd_rate_step_inv_l(l, mu)?),
    ] {
        let check = bound_check_values(dist.iter().copied(), |k| q.powi(k as i32) * r + 1e-10, 0.0);
        checks.push(NamedCheck {
            name: name.to_string(),
            check,
        });
    }
    Ok(Some(checks))
}

/// Output of [`execute`].
pub struct Execution {
    pub summary: Summary,
    pub summary_path: PathBuf,
    pub trace_paths: Vec<PathBuf>,
}

/// Runs every configured algorithm, writes one CSV trace per algorithm and
/// `<run_id>_summary.json` to the output directory.
pub fn execute(config: &ExperimentConfig, base: &Path) -> CliResult<Execution> {
    config.validate(base)?;
    let algorithms = config.parsed_algorithms()?;
    let agg = config.objective.build(config.seed, base)?;
    let schedule = config.schedule.build(config.seed, config.max_iter, base)?;
    if agg.n() != schedule.n() {
        return Err(CliError::Validation(format!(
            "objective has {} agents but the schedule has {}",
            agg.n(),
            schedule.n()
        )));
    }
    let constants = schedule_constants(&agg, &schedule)?;
    let oracle = Oracle::solve(&agg)?;
    let r = oracle.max_solution_norm(&schedule)?;
    let sched = ScheduleSummary::of(&schedule);
    let alpha_ceiling = theory::alpha_ceiling(constants.kappa);
    let alpha_feasible = alpha_ceiling.is_none_or(|c| sched.alpha < c);

    let mut warnings = Vec::new();
    if !alpha_feasible {
        warnings.push(format!(
            "change fraction alpha = {} is at or above the ceiling {}; the accelerated rate guarantee does not apply",
            sched.alpha,
            alpha_ceiling.unwrap_or(f64::NAN)
        ));
    }

    let out_dir = base.join(&config.output_dir);
    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", out_dir.display())))?;

    let params = RunParams {
        max_iter: config.max_iter,
        record_every: config.record_every,
        log_messages: true,
    };
    let floor = RESIDUAL_FLOOR * (1.0 + oracle.f_star.abs());
    let mut summaries = Vec::new();
    let mut trace_paths = Vec::new();
    for alg in algorithms {
        let run = run_algorithm(alg, &agg, &schedule, &params, config.overrides.diging_stepsize, &oracle)?;
        let file = metrics::trace_file_name(&config.run_id, alg.name());
        let path = out_dir.join(&file);
        metrics::emit(&run.rows, Format::Csv, &path).map_err(runtime)?;
        trace_paths.push(path);

        let mut checks = Vec::new();
        match alg {
            Algorithm::Nesterov => checks.push(NamedCheck {
                name: "nesterov-tv".into(),
                check: accelerated_bound_check(&run.rows, &schedule, &constants, r, floor)?,
            }),
            Algorithm::DualGd => match gd_contraction_checks(&agg, &schedule, config.max_iter)? {
                Some(c) => checks.extend(c),
                None => warnings.push(
                    "dual_gd: epochs do not share a dual minimizer; contraction checks skipped".into(),
                ),
            },
            Algorithm::Diging => {}
        }
        for c in &checks {
            if !c.check.is_clean() {
                warnings.push(format!(
                    "{}: bound {} violated at {} of {} recorded iterations (first at {})",
                    alg,
                    c.name,
                    c.check.violations,
                    c.check.checked,
                    c.check.first_violation.unwrap_or(0)
                ));
            }
        }
        if run.trace.flags.momentum_disabled {
            warnings.push(format!("{alg}: kappa is 1, momentum disabled"));
        }
        if let Some(k) = run.trace.flags.aborted_at {
            warnings.push(format!("{alg}: diverged, stopped at iteration {k}"));
        }
        let violations = run.trace.messages.as_ref().map_or(0, |m| m.violations(&schedule).len());
        let final_row = run.rows.last().cloned().expect("runs record their final iterate");
        summaries.push(AlgorithmSummary {
            name: alg.name().to_string(),
            file,
            step_size: run.trace.step_size,
            momentum: run.trace.momentum,
            flags: run.trace.flags.clone(),
            messages_sent: final_row.message_count,
            final_row,
            message_violations: violations,
            bound_checks: checks,
        });
    }

    let summary = Summary {
        run_id: config.run_id.clone(),
        seed: config.seed,
        max_iter: config.max_iter,
        objective: ObjectiveSummary {
            kind: config.objective.kind().to_string(),
            n: agg.n(),
            dim: agg.dim(),
            mu_phi: agg.mu_phi(),
            l_phi: agg.l_phi(),
            kappa_bar: agg.kappa_bar(),
            f_star: oracle.f_star,
        },
        dual_constants: constants,
        schedule: sched,
        alpha_ceiling,
        alpha_feasible,
        r,
        warnings,
        algorithms: summaries,
    };
    let summary_path = out_dir.join(format!("{}_summary.json", config.run_id));
    write_json(&summary_path, &summary)?;
    Ok(Execution {
        summary,
        summary_path,
        trace_paths,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}
