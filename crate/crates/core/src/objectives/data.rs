use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{AggregateObjective, LocalObjective, Logistic};
use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, DenseMatrix};
use crate::rng;

/// Distributed ridge regression instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeParams {
    pub n: usize,
    /// Samples per agent.
    pub l: usize,
    /// Feature dimension.
    pub m: usize,
    #[serde(default = "default_ridge")]
    pub c: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    /// Ground-truth weights; drawn from N(0, 1) when absent.
    #[serde(default)]
    pub truth: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
}

fn default_ridge() -> f64 {
    0.1
}

fn default_noise() -> f64 {
    0.1
}

impl RidgeParams {
    pub fn new(n: usize, l: usize, m: usize, seed: u64) -> Self {
        RidgeParams {
            n,
            l,
            m,
            c: default_ridge(),
            noise: default_noise(),
            truth: None,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RidgeInstance {
    pub aggregate: AggregateObjective,
    /// Per-agent design matrices, `l x m`.
    pub h: Vec<DenseMatrix>,
    /// Per-agent responses.
    pub b: Vec<Vec<f64>>,
    pub truth: Vec<f64>,
}

/// `φ_i(x) = ‖b_i − H_i x‖² / (2nl) + c ‖x‖² / (2n)` with Gaussian design
/// and `b = H x_true + noise`.
pub fn gen_ridge_instance(params: &RidgeParams) -> Result<RidgeInstance> {
    let RidgeParams { n, l, m, c, noise, .. } = *params;
    if n == 0 || l == 0 || m == 0 {
        return Err(Error::InvalidArgument("ridge instance counts must be at least 1".into()));
    }
    if !(c > 0.0) || !(noise >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ridge coefficient must be positive and noise nonnegative (got c={c}, noise={noise})"
        )));
    }
    let mut rng = rng::derive(params.seed, rng::stream::DATA);
    let truth = match &params.truth {
        Some(t) if t.len() != m => {
            return Err(Error::ShapeMismatch {
                expected: format!("truth of length {m}"),
                found: format!("length {}", t.len()),
            })
        }
        Some(t) => t.clone(),
        None => (0..m).map(|_| rng.sample(StandardNormal)).collect(),
    };
    let eps = Normal::new(0.0, noise).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let scale = (n * l) as f64;
    let mut hs = Vec::with_capacity(n);
    let mut bs = Vec::with_capacity(n);
    let mut locals = Vec::with_capacity(n);
    for _ in 0..n {
        let h = DenseMatrix::from_fn(l, m, |_, _| rng.sample(StandardNormal));
        let b: Vec<f64> = h
            .mul_vec(&truth)
            .into_iter()
            .map(|v| v + eps.sample(&mut rng))
            .collect();
        let p = h.gram().scale(1.0 / scale).shift_diagonal(c / n as f64);
        let q: Vec<f64> = h.transpose().mul_vec(&b).into_iter().map(|v| v / scale).collect();
        let center = Cholesky::factor(&p)?.solve(&q);
        let resid: Vec<f64> = h.mul_vec(&center).iter().zip(&b).map(|(u, v)| v - u).collect();
        let min_value = dot(&resid, &resid) / (2.0 * scale) + c / (2.0 * n as f64) * dot(&center, &center);
        locals.push(LocalObjective::quadratic(p, center, min_value)?);
        hs.push(h);
        bs.push(b);
    }
    Ok(RidgeInstance {
        aggregate: AggregateObjective::new(locals)?,
        h: hs,
        b: bs,
        truth,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    #[serde(default = "default_ridge")]
    pub c: f64,
    /// Distance of each class mean from the origin.
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_separation() -> f64 {
    2.0
}

impl LogisticParams {
    pub fn new(n: usize, l: usize, m: usize, seed: u64) -> Self {
        LogisticParams {
            n,
            l,
            m,
            c: default_ridge(),
            separation: default_separation(),
            seed,
        }
    }
}

/// `φ_i(x) = (1/(2nl)) Σ_j log(1 + exp(−b_j a_jᵀx)) + c ‖x‖² / (2n)` on a
/// two-Gaussian mixture with class means `±separation · 1/√m`.
pub fn gen_logistic_instance(params: &LogisticParams) -> Result<AggregateObjective> {
    let LogisticParams { n, l, m, c, separation, .. } = *params;
    if n == 0 || l == 0 || m == 0 {
        return Err(Error::InvalidArgument("logistic instance counts must be at least 1".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("ridge coefficient must be positive, got {c}")));
    }
    let mut rng = rng::derive(params.seed, rng::stream::DATA);
    let shift = separation / (m as f64).sqrt();
    let scale = 2.0 * (n * l) as f64;
    let mut locals = Vec::with_capacity(n);
    for _ in 0..n {
        let labels: Vec<f64> = (0..l)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let mut rows = Vec::with_capacity(l);
        for &y in &labels {
            let noise: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            rows.push(noise.into_iter().map(|v: f64| v + y * shift).collect());
        }
        let a = DenseMatrix::from_rows(&rows)?;
        locals.push(LocalObjective::Logistic(Logistic::new(a, labels, scale, c / n as f64)?));
    }
    AggregateObjective::new(locals)
}

/// Labeled sparse samples. Feature indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Vec<(usize, f64)>>,
    pub labels: Vec<f64>,
    pub dimension: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Dense copy of sample `j`.
    pub fn dense_row(&self, j: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.dimension];
        for &(k, v) in &self.samples[j] {
            row[k - 1] = v;
        }
        row
    }

    /// Shuffles the samples and deals `⌊len/n⌋` to each of `n` agents, then
    /// builds the logistic objective with scale `2nl` and ridge `c/n`.
    pub fn to_logistic(&self, n: usize, c: f64, seed: u64) -> Result<AggregateObjective> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one agent".into()));
        }
        let l = self.len() / n;
        if l == 0 {
            return Err(Error::InvalidArgument(format!(
                "{} samples cannot be split across {n} agents",
                self.len()
            )));
        }
        if self.dimension == 0 {
            return Err(Error::InvalidArgument("dataset has no features".into()));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut rng::derive(seed, rng::stream::SAMPLE));
        let scale = 2.0 * (n * l) as f64;
        let locals = order
            .chunks(l)
            .take(n)
            .map(|idx| {
                let rows: Vec<Vec<f64>> = idx.iter().map(|&j| self.dense_row(j)).collect();
                let labels = idx.iter().map(|&j| self.labels[j]).collect();
                let a = DenseMatrix::from_rows(&rows)?;
                Ok(LocalObjective::Logistic(Logistic::new(a, labels, scale, c / n as f64)?))
            })
            .collect::<Result<Vec<_>>>()?;
        AggregateObjective::new(locals)
    }
}

/// Reads a `label idx:value idx:value ...` file.
pub fn load_sparse_labeled(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sparse_labeled(&text, path)
}

/// Parses sparse labeled text; `path` only labels error messages.
pub fn parse_sparse_labeled(text: &str, path: &Path) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut dimension = 0;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let mut tokens = raw.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        let label = match label.parse::<f64>() {
            Ok(1.0) => 1.0,
            Ok(-1.0) | Ok(0.0) => -1.0,
            _ => return Err(err(line_no, format!("label {label:?} is not one of -1, 0, +1"))),
        };
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for pair in tokens {
            let (idx, val) = pair
                .split_once(':')
                .ok_or_else(|| err(line_no, format!("malformed pair {pair:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(line_no, format!("index {idx:?} is not a positive integer")))?;
            if idx == 0 {
                return Err(err(line_no, "feature indices start at 1".into()));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| err(line_no, format!("value {val:?} is not a number")))?;
            if !val.is_finite() {
                return Err(err(line_no, format!("value {val:?} is not finite")));
            }
            if let Some(&(prev, _)) = entries.last() {
                if idx <= prev {
                    return Err(err(line_no, format!("index {idx} follows {prev}; indices must ascend")));
                }
            }
            dimension = dimension.max(idx);
            entries.push((idx, val));
        }
        samples.push(entries);
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(err(0, "file contains no samples".into()));
    }
    Ok(Dataset {
        samples,
        labels,
        dimension,
    })
}

/// Independent dense solve of the pooled ridge normal equations, used as a
/// cross-check against per-agent assembly.
#[cfg(test)]
pub(crate) fn pooled_ridge_solution(inst: &RidgeInstance, c: f64) -> Vec<f64> {
    let n = inst.h.len();
    let l = inst.h[0].rows();
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for (h, bi) in inst.h.iter().zip(&inst.b) {
        for r in 0..l {
            rows.push(h.row(r).to_vec());
        }
        b.extend_from_slice(bi);
    }
    let h = DenseMatrix::from_rows(&rows).unwrap();
    let scale = (n * l) as f64;
    let p: crate::linalg::SymMatrix = h.gram().scale(1.0 / scale).shift_diagonal(c);
    let q: Vec<f64> = h.transpose().mul_vec(&b).into_iter().map(|v| v / scale).collect();
    Cholesky::factor(&p).unwrap().solve(&q)
}
