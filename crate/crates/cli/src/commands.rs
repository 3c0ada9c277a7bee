use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use tvdual::algorithms::RunParams;
use tvdual::graphs::ScheduleSpec;
use tvdual::theory::{self, BoundReport};

use crate::config::{ExperimentConfig, ScheduleSource};
use crate::error::{CliError, CliResult};
use crate::run::{run_algorithm, write_json, Oracle, ScheduleSummary};

/// Parses `key=value` pairs, mapping symbol spellings to canonical names.
pub fn parse_constants(pairs: &[String]) -> CliResult<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("expected key=value, got {pair:?}")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{k}: {v:?} is not a number")))?;
        out.insert(theory::canonical_constant(k.trim()).to_string(), value);
    }
    Ok(out)
}

pub fn bounds_command(name: &str, pairs: &[String]) -> CliResult<(BoundReport, String)> {
    let constants = parse_constants(pairs)?;
    let report = theory::evaluate(name, &constants)?;
    Ok((report.clone(), render_bound(&report)))
}

pub fn render_bound(r: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "bound {}", r.name);
    for (k, v) in &r.inputs {
        let _ = writeln!(s, "  {k} = {v}");
    }
    let _ = writeln!(s, "value = {}", r.value);
    for (k, v) in &r.outputs {
        let _ = writeln!(s, "  {k} = {v}");
    }
    if r.degenerate {
        let _ = writeln!(s, "degenerate: yes");
    }
    if let Some(w) = &r.warning {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub fn graph_info(path: &Path) -> CliResult<(ScheduleSummary, String)> {
    let spec = ScheduleSpec::load(path)?;
    let schedule = spec.build()?;
    let info = ScheduleSummary::of(&schedule);
    let mut s = String::new();
    let _ = writeln!(s, "n = {}, horizon = {}", info.n, info.horizon);
    for (k, e) in info.epochs.iter().enumerate() {
        let _ = writeln!(
            s,
            "epoch {k} start {}: edges {} lambda_max {} lambda_min_pos {} chi {}",
            e.start, e.edges, e.lambda_max, e.lambda_min_pos, e.chi
        );
    }
    let _ = writeln!(s, "theta_max = {}", info.theta_max);
    let _ = writeln!(s, "theta_min = {}", info.theta_min);
    let _ = writeln!(s, "m = {}", info.m);
    let _ = writeln!(s, "alpha = {}", info.alpha);
    Ok((info, s))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub seed: u64,
    pub period: usize,
    pub algorithm: String,
    /// Dual residual at the starting point `Z = 0`.
    pub initial_dual_residual: f64,
    pub dual_residual: f64,
    pub primal_gap: f64,
    pub consensus_dist: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepMedian {
    pub period: usize,
    pub algorithm: String,
    pub runs: usize,
    pub dual_residual: f64,
    pub primal_gap: f64,
    pub consensus_dist: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub run_id: String,
    pub max_iter: usize,
    pub seeds: Vec<u64>,
    pub periods: Vec<usize>,
    pub cells: Vec<SweepCell>,
    pub medians: Vec<SweepMedian>,
}

/// Median of the non-NaN values; NaN when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    }
}

fn run_cell(config: &ExperimentConfig, base: &Path, seed: u64, period: usize) -> CliResult<Vec<SweepCell>> {
    let ScheduleSource::Alternating(alt) = &config.schedule else {
        unreachable!("checked by sweep");
    };
    let mut alt = alt.clone();
    alt.period = period;
    let schedule = ScheduleSource::Alternating(alt).build(seed, config.max_iter, base)?;
    let agg = config.objective.build(seed, base)?;
    if agg.n() != schedule.n() {
        return Err(CliError::Validation(format!(
            "objective has {} agents but the schedule has {}",
            agg.n(),
            schedule.n()
        )));
    }
    let oracle = Oracle::solve(&agg)?;
    let params = RunParams {
        max_iter: config.max_iter,
        record_every: config.max_iter,
        log_messages: false,
    };
    let mut cells = Vec::new();
    for alg in config.parsed_algorithms()? {
        let run = run_algorithm(alg, &agg, &schedule, &params, config.overrides.diging_stepsize, &oracle)?;
        let last = run.rows.last().expect("runs record their final iterate");
        cells.push(SweepCell {
            seed,
            period,
            algorithm: alg.name().to_string(),
            initial_dual_residual: run.rows[0].dual_residual,
            dual_residual: last.dual_residual,
            primal_gap: last.primal_gap,
            consensus_dist: last.consensus_dist,
        });
    }
    Ok(cells)
}

/// Runs every `(seed, period)` cell of an alternating-schedule config in
/// parallel and writes `<run_id>_sweep.json`.
pub fn sweep(
    config: &ExperimentConfig,
    base: &Path,
    seeds: &[u64],
    periods: &[usize],
) -> CliResult<(SweepSummary, PathBuf)> {
    if seeds.is_empty() {
        return Err(CliError::Validation("--seeds needs at least one value".into()));
    }
    if periods.is_empty() {
        return Err(CliError::Validation("--periods needs at least one value".into()));
    }
    if periods.contains(&0) {
        return Err(CliError::Validation("switching periods must be at least 1".into()));
    }
    if !matches!(config.schedule, ScheduleSource::Alternating(_)) {
        return Err(CliError::Validation("sweep needs an alternating schedule in the config".into()));
    }
    config.validate(base)?;

    let grid: Vec<(u64, usize)> = periods.iter().flat_map(|&p| seeds.iter().map(move |&s| (s, p))).collect();
    let results: Vec<CliResult<Vec<SweepCell>>> =
        grid.par_iter().map(|&(s, p)| run_cell(config, base, s, p)).collect();
    let mut cells = Vec::new();
    for r in results {
        cells.extend(r?);
    }

    let mut medians = Vec::new();
    for &period in periods {
        for alg in config.parsed_algorithms()? {
            let of: Vec<&SweepCell> =
                cells.iter().filter(|c| c.period == period && c.algorithm == alg.name()).collect();
            let col = |f: fn(&SweepCell) -> f64| median(&of.iter().map(|c| f(c)).collect::<Vec<_>>());
            medians.push(SweepMedian {
                period,
                algorithm: alg.name().to_string(),
                runs: of.len(),
                dual_residual: col(|c| c.dual_residual),
                primal_gap: col(|c| c.primal_gap),
                consensus_dist: col(|c| c.consensus_dist),
            });
        }
    }
    let summary = SweepSummary {
        run_id: config.run_id.clone(),
        max_iter: config.max_iter,
        seeds: seeds.to_vec(),
        periods: periods.to_vec(),
        cells,
        medians,
    };
    let out_dir = base.join(&config.output_dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", out_dir.display())))?;
    let path = out_dir.join(format!("{}_sweep.json", config.run_id));
    write_json(&path, &summary)?;
    Ok((summary, path))
}

pub fn render_sweep(s: &SweepSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed period algorithm dual_residual primal_gap consensus_dist");
    for c in &s.cells {
        let _ = writeln!(
            out,
            "{} {} {} {:e} {:e} {:e}",
            c.seed, c.period, c.algorithm, c.dual_residual, c.primal_gap, c.consensus_dist
        );
    }
    let _ = writeln!(out, "medians:");
    for m in &s.medians {
        let _ = writeln!(
            out,
            "period {} {} ({} runs): dual_residual {:e} primal_gap {:e} consensus_dist {:e}",
            m.period, m.algorithm, m.runs, m.dual_residual, m.primal_gap, m.consensus_dist
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_accept_symbols() {
        let c = parse_constants(&["κ=4".into(), "n=9".into(), "eps = 0.5".into()]).unwrap();
        assert_eq!(c["kappa"], 4.0);
        assert_eq!(c["n"], 9.0);
        assert_eq!(c["eps"], 0.5);
        assert!(parse_constants(&["kappa".into()]).is_err());
        assert!(parse_constants(&["kappa=x".into()]).is_err());
    }

    #[test]
    fn median_handles_even_odd_and_nan() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[f64::NAN, 1.0]), 1.0);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn diging_bound_renders_inputs_and_value() {
        let (r, text) = bounds_command("diging", &["κ̄=4".into(), "n=9".into()]).unwrap();
        assert!((r.value - (1.0 - 1.0 / 288.0)).abs() < 1e-12);
        assert!(text.contains("kappa_bar = 4"), "{text}");
        assert!(text.contains("n = 9"), "{text}");
    }
}
