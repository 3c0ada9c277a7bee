//! Residuals, consensus distances, potential diagnostics and trace output.
//!
//! Gaps are evaluated as sums of Bregman divergences instead of differences
//! of function values, so they stay accurate long after `φ(ȳ) − φ*` would
//! drown in the rounding error of `φ*`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algorithms::{momentum_coefficient, RunTrace, XMethod, XSpaceTrace};
use crate::error::{Error, Result};
use crate::linalg::{dot, AgentMatrix};
use crate::objectives::AggregateObjective;

/// Column order of emitted traces.
pub const CSV_HEADER: &str = "iter,epoch,dual_value,dual_residual,consensus_dist,primal_gap,message_count";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub iter: usize,
    pub epoch: usize,
    /// `Φ*(Z̃) = Σ_i ⟨z̃_i, ỹ_i⟩ − φ_i(ỹ_i)`; NaN for primal methods.
    pub dual_value: f64,
    /// `Φ*(Z̃) − f*`; NaN for primal methods.
    pub dual_residual: f64,
    /// `‖Y − ȳ1ᵀ‖_F`.
    pub consensus_dist: f64,
    /// `φ(ȳ) − φ*` at the agent average.
    pub primal_gap: f64,
    pub message_count: u64,
    /// `Σ_i φ_i(y_i) − φ*` at the agents' own points; may be negative.
    #[serde(skip)]
    pub agent_primal_gap: f64,
}

/// Evaluates every recorded iterate against the centralized optimum
/// `(y*, φ*)`.
pub fn compute_metrics(
    trace: &RunTrace,
    agg: &AggregateObjective,
    y_star: &[f64],
    phi_star: f64,
) -> Result<Vec<MetricRow>> {
    if y_star.len() != agg.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("optimum of length {}", agg.dim()),
            found: format!("length {}", y_star.len()),
        });
    }
    let phi_at = agg.value_at(y_star);
    if !((phi_at - phi_star).abs() <= 1e-8 * (1.0 + phi_star.abs())) {
        return Err(Error::InvalidArgument(format!(
            "optimum value {phi_star} does not match φ(y*) = {phi_at}"
        )));
    }
    let z_star: Vec<Vec<f64>> = agg.locals().iter().map(|phi| phi.gradient(y_star)).collect();
    trace
        .records
        .iter()
        .map(|r| {
            let y = &r.primal;
            let (dual_value, dual_residual) = match &r.dual {
                Some(z) => dual_terms(agg, z, y, y_star),
                None => (f64::NAN, f64::NAN),
            };
            let mean = y.column_mean();
            let consensus_dist = y.sub(&AgentMatrix::broadcast(&mean, y.agents())).frobenius_norm();
            let mut primal_gap = 0.0;
            let mut agent_primal_gap = 0.0;
            for (i, phi) in agg.locals().iter().enumerate() {
                primal_gap += phi.bregman(&mean, y_star) + dot(&z_star[i], &diff(&mean, y_star));
                agent_primal_gap += phi.bregman(y.col(i), y_star) + dot(&z_star[i], &diff(y.col(i), y_star));
            }
            Ok(MetricRow {
                iter: r.iter,
                epoch: r.epoch,
                dual_value,
                dual_residual,
                consensus_dist,
                primal_gap,
                message_count: r.message_count,
                agent_primal_gap,
            })
        })
        .collect()
}

/// `(Φ*(Z), Φ*(Z) − f*)` with `f* = −φ*`. The residual is
/// `Σ_i D_φi(y*, ỹ_i) + ⟨y*, Σ_i z_i⟩`, using `∇φ_i(ỹ_i) = z_i`.
fn dual_terms(agg: &AggregateObjective, z: &AgentMatrix, y: &AgentMatrix, y_star: &[f64]) -> (f64, f64) {
    let mut value = 0.0;
    let mut residual = dot(y_star, &z.row_sums());
    for (i, phi) in agg.locals().iter().enumerate() {
        value += dot(z.col(i), y.col(i)) - phi.value(y.col(i));
        residual += phi.bregman(y_star, y.col(i));
    }
    (value, residual)
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialRow {
    pub iter: usize,
    /// `Ψ_k = (1+γ)^k (f_k(y_k) − f* + (μ/2)‖z_k − x*‖²)`.
    pub psi: f64,
    /// `Ψ_k / (1+γ)^k`.
    pub energy: f64,
    /// `Ψ_{k+1} − Ψ_k`; `None` on the last row.
    pub delta_psi: Option<f64>,
    /// The graph changes between `k` and `k+1`.
    pub at_change: bool,
    /// At a change, `(1+γ)^{k+1} ((L−μ)/μ) (f_k(y_{k+1}) − f*)`.
    pub change_allowance: Option<f64>,
}

/// Potential of the accelerated X-space run, which must use a schedule whose
/// duals share a minimizer.
pub fn potential_trace(trace: &XSpaceTrace) -> Result<Vec<PotentialRow>> {
    let c = trace.constants;
    if momentum_coefficient(c.kappa).is_none() {
        return Err(Error::PotentialUndefined { kappa: c.kappa });
    }
    if trace.method != XMethod::Nesterov {
        return Err(Error::InvalidArgument("the potential applies to the accelerated run only".into()));
    }
    if !trace.common_minimizer {
        return Err(Error::NoCommonMinimizer);
    }
    let (l, mu) = (c.l_f, c.mu_f);
    let growth = 1.0 + 1.0 / (c.kappa.sqrt() - 1.0);
    let energies: Vec<f64> = trace
        .records
        .iter()
        .map(|r| r.residual + 0.5 * mu * r.ez.frobenius_norm().powi(2))
        .collect();
    let recs = &trace.records;
    Ok(recs
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let scale = growth.powf(r.iter as f64);
            let next = recs.get(k + 1);
            let at_change = next.is_some_and(|n| n.epoch != r.epoch);
            let delta_psi = next.map(|_| scale * (growth * energies[k + 1] - energies[k]));
            let change_allowance = next.filter(|_| at_change).map(|n| {
                scale * growth * (l - mu) / mu * n.cross_residual.unwrap_or(f64::NAN)
            });
            PotentialRow {
                iter: r.iter,
                psi: scale * energies[k],
                energy: energies[k],
                delta_psi,
                at_change,
                change_allowance,
            }
        })
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BoundCheck {
    /// Largest `measured − bound` among violations, 0 when clean.
    pub max_violation: f64,
    pub first_violation: Option<usize>,
    pub violations: usize,
    pub checked: usize,
}

impl BoundCheck {
    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }
}

/// Compares `dual_residual` with `bound(iter)` on every row. Rows whose
/// residual is at most `floor` are not counted as violations.
pub fn bound_check<F: Fn(usize) -> f64>(rows: &[MetricRow], bound: F, floor: f64) -> BoundCheck {
    bound_check_values(rows.iter().map(|r| (r.iter, r.dual_residual)), bound, floor)
}

/// [`bound_check`] over arbitrary `(iter, measured)` pairs.
pub fn bound_check_values<I, F>(values: I, bound: F, floor: f64) -> BoundCheck
where
    I: IntoIterator<Item = (usize, f64)>,
    F: Fn(usize) -> f64,
{
    let mut report = BoundCheck::default();
    for (iter, measured) in values {
        report.checked += 1;
        let b = bound(iter);
        let excess = measured - b;
        if excess > 0.0 && measured > floor || measured.is_nan() {
            report.violations += 1;
            report.first_violation.get_or_insert(iter);
            if excess > report.max_violation || excess.is_nan() {
                report.max_violation = excess;
            }
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?}; use csv or json"))),
        }
    }
}

/// `<run_id>_<algorithm>.csv`
pub fn trace_file_name(run_id: &str, algorithm: &str) -> String {
    format!("{run_id}_{algorithm}.csv")
}

/// Shortest decimal that parses back to the same double; `0` for zero.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        if v.is_sign_negative() { "-0" } else { "0" }.into()
    } else if !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn to_csv(rows: &[MetricRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            r.epoch,
            format_float(r.dual_value),
            format_float(r.dual_residual),
            format_float(r.consensus_dist),
            format_float(r.primal_gap),
            r.message_count
        );
    }
    out
}

pub fn to_json(rows: &[MetricRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

/// Parses output of [`to_csv`]. `agent_primal_gap` is not stored and reads back as NaN.
pub fn parse_csv(text: &str) -> Result<Vec<MetricRow>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: "<csv>".into(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(parse_err(1, "missing or unexpected header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(parse_err(i + 1, format!("expected 7 fields, found {}", fields.len())));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|e| parse_err(i + 1, format!("{s:?}: {e}")));
        let float = |s: &str| s.parse::<f64>().map_err(|e| parse_err(i + 1, format!("{s:?}: {e}")));
        rows.push(MetricRow {
            iter: int(fields[0])? as usize,
            epoch: int(fields[1])? as usize,
            dual_value: float(fields[2])?,
            dual_residual: float(fields[3])?,
            consensus_dist: float(fields[4])?,
            primal_gap: float(fields[5])?,
            message_count: int(fields[6])?,
            agent_primal_gap: f64::NAN,
        });
    }
    Ok(rows)
}

pub fn emit(rows: &[MetricRow], format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows)?,
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
