use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tvdual::algorithms::Algorithm;
use tvdual::graphs::{EpochSpec, GraphSchedule, ScheduleSpec, TopologyParams};
use tvdual::objectives::{
    gen_logistic_instance, gen_ridge_instance, load_sparse_labeled, AggregateObjective, LocalObjective,
    LogisticParams, RidgeParams,
};

use crate::error::{CliError, CliResult};

/// One experiment, read from a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_run_id")]
    pub run_id: String,
    pub objective: ObjectiveSpec,
    pub schedule: ScheduleSource,
    pub algorithms: Vec<String>,
    pub max_iter: usize,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub overrides: Overrides,
}

fn default_run_id() -> String {
    "run".into()
}

fn default_record_every() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diging_stepsize: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// Synthetic ridge regression, `l` samples of dimension `dim` per agent.
    Ridge {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_l")]
        l: usize,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_noise")]
        noise: f64,
    },
    /// Synthetic two-class logistic regression.
    Logistic {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_l")]
        l: usize,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_separation")]
        separation: f64,
    },
    /// Logistic regression on a `label idx:value ...` file.
    Dataset {
        path: PathBuf,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_c")]
        c: f64,
    },
    /// `φ_i(y) = ½‖y − a_i‖²`, one center per agent.
    Isotropic { centers: Vec<Vec<f64>> },
}

fn default_n() -> usize {
    20
}
fn default_l() -> usize {
    20
}
fn default_dim() -> usize {
    10
}
fn default_c() -> f64 {
    0.1
}
fn default_noise() -> f64 {
    0.1
}
fn default_separation() -> f64 {
    2.0
}

impl ObjectiveSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ObjectiveSpec::Ridge { .. } => "ridge",
            ObjectiveSpec::Logistic { .. } => "logistic",
            ObjectiveSpec::Dataset { .. } => "dataset",
            ObjectiveSpec::Isotropic { .. } => "isotropic",
        }
    }

    pub fn build(&self, seed: u64, base: &Path) -> CliResult<AggregateObjective> {
        let agg = match self {
            &ObjectiveSpec::Ridge { n, l, dim, c, noise } => {
                let mut p = RidgeParams::new(n, l, dim, seed);
                p.c = c;
                p.noise = noise;
                gen_ridge_instance(&p)?.aggregate
            }
            &ObjectiveSpec::Logistic { n, l, dim, c, separation } => {
                let mut p = LogisticParams::new(n, l, dim, seed);
                p.c = c;
                p.separation = separation;
                gen_logistic_instance(&p)?
            }
            ObjectiveSpec::Dataset { path, n, c } => {
                let data = load_sparse_labeled(&base.join(path)).map_err(CliError::validation)?;
                data.to_logistic(*n, *c, seed)?
            }
            ObjectiveSpec::Isotropic { centers } => AggregateObjective::new(
                centers
                    .iter()
                    .map(|a| LocalObjective::isotropic(a))
                    .collect::<tvdual::Result<Vec<_>>>()?,
            )?,
        };
        Ok(agg)
    }
}

/// Where the graph sequence comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSource {
    Inline(ScheduleSpec),
    File(PathBuf),
    Alternating(Box<AlternatingSpec>),
}

/// Two graphs taking turns every `period` iterations, `a` first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternatingSpec {
    pub n: usize,
    pub a: TopologySpec,
    pub b: TopologySpec,
    pub period: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub kind: String,
    #[serde(default)]
    pub params: TopologyParams,
    /// Generation seed for random kinds; the experiment seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TopologySpec {
    fn epoch(&self, n: usize, root_seed: u64, salt: u64) -> EpochSpec {
        EpochSpec {
            start: 0,
            kind: self.kind.clone(),
            n,
            params: self.params.clone(),
            seed: self.seed.unwrap_or(root_seed.wrapping_add(salt)),
        }
    }
}

impl ScheduleSource {
    /// Builds the schedule over `horizon` iterations. Inline and file
    /// schedules are cut or extended to that horizon.
    pub fn build(&self, seed: u64, horizon: usize, base: &Path) -> CliResult<GraphSchedule> {
        let schedule = match self {
            ScheduleSource::Inline(spec) => spec.build().map_err(CliError::validation)?,
            ScheduleSource::File(path) => ScheduleSpec::load(&base.join(path))
                .and_then(|s| s.build())
                .map_err(CliError::validation)?,
            ScheduleSource::Alternating(alt) => {
                let a = alt.a.epoch(alt.n, seed, 0).build().map_err(CliError::validation)?;
                let b = alt.b.epoch(alt.n, seed, 1).build().map_err(CliError::validation)?;
                return GraphSchedule::alternating(&a, &b, alt.period, horizon).map_err(CliError::validation);
            }
        };
        schedule.with_horizon(horizon).map_err(CliError::validation)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> CliResult<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let config = Self::from_json(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.validate(&base)?;
        Ok((config, base))
    }

    pub fn validate(&self, base: &Path) -> CliResult<()> {
        if self.max_iter == 0 {
            return Err(CliError::Validation("max_iter must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(CliError::Validation("record_every must be at least 1".into()));
        }
        if self.run_id.is_empty() || self.run_id.contains(['/', '\\']) {
            return Err(CliError::Validation(format!("run_id {:?} is not a plain file stem", self.run_id)));
        }
        self.parsed_algorithms()?;
        let missing = |p: &Path| {
            let full = base.join(p);
            (!full.is_file()).then(|| CliError::Validation(format!("{} does not exist", full.display())))
        };
        if let ObjectiveSpec::Dataset { path, .. } = &self.objective {
            if let Some(e) = missing(path) {
                return Err(e);
            }
        }
        if let ScheduleSource::File(path) = &self.schedule {
            if let Some(e) = missing(path) {
                return Err(e);
            }
        }
        if let Some(a) = self.overrides.diging_stepsize {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::Validation(format!("diging_stepsize must be positive, got {a}")));
            }
        }
        Ok(())
    }

    pub fn parsed_algorithms(&self) -> CliResult<Vec<Algorithm>> {
        if self.algorithms.is_empty() {
            return Err(CliError::Validation("at least one algorithm is required".into()));
        }
        let mut out = Vec::new();
        for name in &self.algorithms {
            let a: Algorithm = name.parse().map_err(CliError::validation)?;
            if !out.contains(&a) {
                out.push(a);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "seed": 1,
        "objective": {"kind": "isotropic", "centers": [[-1.0], [1.0]]},
        "schedule": {"inline": {"horizon": 10, "epochs": [{"start": 0, "kind": "path", "n": 2}]}},
        "algorithms": ["nesterov"],
        "max_iter": 10,
        "output_dir": "out"
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.run_id, "run");
        assert_eq!(c.record_every, 1);
        c.validate(Path::new(".")).unwrap();
        let s = c.schedule.build(c.seed, c.max_iter, Path::new(".")).unwrap();
        assert_eq!(s.n(), 2);
    }

    #[test]
    fn unknown_algorithm_lists_valid_names() {
        let text = MINIMAL.replace(r#"["nesterov"]"#, r#"["panda"]"#);
        let c = ExperimentConfig::from_json(&text).unwrap();
        let err = c.validate(Path::new(".")).unwrap_err().to_string();
        assert!(err.contains("nesterov") && err.contains("diging"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace(r#""seed": 1,"#, r#""seed": 1, "sede": 2,"#);
        assert!(ExperimentConfig::from_json(&text).is_err());
        let text = MINIMAL.replace(r#""kind": "isotropic","#, r#""kind": "isotropic", "n": 3,"#);
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn missing_files_fail_validation() {
        let text = MINIMAL.replace(
            r#"{"inline": {"horizon": 10, "epochs": [{"start": 0, "kind": "path", "n": 2}]}}"#,
            r#"{"file": "nowhere.json"}"#,
        );
        let c = ExperimentConfig::from_json(&text).unwrap();
        assert!(c.validate(Path::new(".")).is_err());
    }

    #[test]
    fn alternating_schedule_switches_every_period() {
        let alt = ScheduleSource::Alternating(Box::new(AlternatingSpec {
            n: 5,
            a: TopologySpec {
                kind: "star".into(),
                params: TopologyParams::default(),
                seed: None,
            },
            b: TopologySpec {
                kind: "cycle".into(),
                params: TopologyParams::default(),
                seed: None,
            },
            period: 3,
        }));
        let s = alt.build(0, 10, Path::new(".")).unwrap();
        let starts: Vec<usize> = s.epochs().iter().map(|e| e.start).collect();
        assert_eq!(starts, vec![0, 3, 6, 9]);
    }
}
