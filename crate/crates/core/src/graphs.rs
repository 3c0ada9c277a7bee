//! Communication graphs: topologies, Laplacians, spectra and schedules.
//!
//! Nodes are 0-based in the API. The schedule file format and anything shown
//! to a user count nodes from 1.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, DenseMatrix, SymMatrix};
use crate::rng;

/// Attempts allowed for random generators before giving up on connectivity.
pub const MAX_GENERATION_ATTEMPTS: usize = 100;

/// Eigenvalues below this fraction of `λ_max` count as zero.
pub const ZERO_EIGENVALUE_THRESHOLD: f64 = 1e-9;

const RADIUS_GROWTH: f64 = 1.1;

#[derive(Clone, Debug, PartialEq)]
pub enum TopologyKind {
    Path,
    Cycle,
    /// Node 0 is the hub.
    Star,
    Complete,
    /// Edge probability; `None` picks `2 ln(n) / n`.
    ErdosRenyi { p: Option<f64> },
    /// Points uniform in the unit square. With `None` the radius starts at
    /// `√(2 ln(n) / (π n))` and grows by 10% until the graph is connected.
    RandomGeometric { radius: Option<f64> },
}

impl TopologyKind {
    pub fn name(&self) -> &'static str {
        match self {
            TopologyKind::Path => "path",
            TopologyKind::Cycle => "cycle",
            TopologyKind::Star => "star",
            TopologyKind::Complete => "complete",
            TopologyKind::ErdosRenyi { .. } => "erdos_renyi",
            TopologyKind::RandomGeometric { .. } => "random_geometric",
        }
    }
}

/// Undirected weighted graph without self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    n: usize,
    edges: BTreeMap<(usize, usize), f64>,
}

impl Topology {
    /// Builds from 0-based unit-weight edges. Duplicates collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let weighted: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Self::from_weighted_edges(n, &weighted)
    }

    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTopology("graph needs at least one node".into()));
        }
        let mut map = BTreeMap::new();
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidTopology(format!(
                    "edge ({}, {}) references a node outside 1..={n}",
                    i + 1,
                    j + 1
                )));
            }
            if i == j {
                return Err(Error::InvalidTopology(format!("self-loop at node {}", i + 1)));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidTopology(format!(
                    "edge ({}, {}) has non-positive weight {w}",
                    i + 1,
                    j + 1
                )));
            }
            map.insert((i.min(j), i.max(j)), w);
        }
        Ok(Topology { n, edges: map })
    }

    /// Generates a connected topology. Random kinds are deterministic in `seed`.
    pub fn generate(kind: &TopologyKind, n: usize, seed: u64) -> Result<Self> {
        gen_topology(kind, n, seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// 0-based `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&(i.min(j), i.max(j)))
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    /// Sorted neighbor lists with edge weights.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j, w) in self.edges() {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        adj
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Connected components by breadth-first search.
    pub fn component_count(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }
}

pub fn gen_topology(kind: &TopologyKind, n: usize, seed: u64) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidTopology(format!("need at least 2 nodes, got {n}")));
    }
    match kind {
        TopologyKind::Path => Topology::from_edges(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()),
        TopologyKind::Cycle => {
            let mut e: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            e.push((n - 1, 0));
            Topology::from_edges(n, &e)
        }
        TopologyKind::Star => Topology::from_edges(n, &(1..n).map(|i| (0, i)).collect::<Vec<_>>()),
        TopologyKind::Complete => {
            let mut e = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in (i + 1)..n {
                    e.push((i, j));
                }
            }
            Topology::from_edges(n, &e)
        }
        TopologyKind::ErdosRenyi { p } => {
            let p = p.unwrap_or_else(|| (2.0 * (n as f64).ln() / n as f64).min(1.0));
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::OutOfRange {
                    name: "p",
                    value: p,
                    range: "(0, 1]".into(),
                });
            }
            let mut rng = rng::derive(seed, rng::stream::GRAPH);
            for _ in 0..MAX_GENERATION_ATTEMPTS {
                let mut e = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        if rng.random::<f64>() < p {
                            e.push((i, j));
                        }
                    }
                }
                let t = Topology::from_edges(n, &e)?;
                if t.is_connected() {
                    return Ok(t);
                }
            }
            Err(generation_failed(kind, n))
        }
        TopologyKind::RandomGeometric { radius } => {
            if let Some(r) = radius {
                if !(*r > 0.0 && r.is_finite()) {
                    return Err(Error::OutOfRange {
                        name: "radius",
                        value: *r,
                        range: "(0, inf)".into(),
                    });
                }
            }
            let mut rng = rng::derive(seed, rng::stream::GRAPH);
            let sample = |rng: &mut rng::Rng| -> Vec<(f64, f64)> {
                (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect()
            };
            let mut points = sample(&mut rng);
            let mut r = radius.unwrap_or_else(|| {
                (2.0 * (n as f64).ln() / (std::f64::consts::PI * n as f64)).sqrt()
            });
            for _ in 0..MAX_GENERATION_ATTEMPTS {
                let t = geometric(&points, r)?;
                if t.is_connected() {
                    return Ok(t);
                }
                if radius.is_some() {
                    points = sample(&mut rng);
                } else {
                    r *= RADIUS_GROWTH;
                }
            }
            Err(generation_failed(kind, n))
        }
    }
}

fn geometric(points: &[(f64, f64)], r: f64) -> Result<Topology> {
    let mut e = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
            if (dx * dx + dy * dy).sqrt() <= r {
                e.push((i, j));
            }
        }
    }
    Topology::from_edges(points.len(), &e)
}

fn generation_failed(kind: &TopologyKind, n: usize) -> Error {
    Error::GenerationFailed {
        kind: kind.name().into(),
        n,
        attempts: MAX_GENERATION_ATTEMPTS,
    }
}

/// Weighted Laplacian `D − A`. Row sums are exactly zero for unit weights.
pub fn laplacian(t: &Topology) -> SymMatrix {
    let n = t.n;
    let mut w = SymMatrix::zeros(n);
    let mut degree = vec![0.0; n];
    for (i, j, wt) in t.edges() {
        w.set_sym(i, j, -wt);
        degree[i] += wt;
        degree[j] += wt;
    }
    for (i, d) in degree.into_iter().enumerate() {
        w.set_sym(i, i, d);
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralInfo {
    pub lambda_max: f64,
    pub lambda_min_pos: f64,
    pub chi: f64,
    pub sigma_max: f64,
    pub sigma_min_pos: f64,
}

/// Extreme nonzero Laplacian eigenvalues of a connected graph.
pub fn spectral_info(t: &Topology) -> Result<SpectralInfo> {
    spectral_info_of(&laplacian(t))
}

pub fn spectral_info_of(w: &SymMatrix) -> Result<SpectralInfo> {
    let spectrum = eig_sym(w)?;
    let lambda_max = spectrum.max();
    let zeros = count_zero_eigenvalues(&spectrum.values, lambda_max);
    if zeros != 1 || w.dim() < 2 {
        return Err(Error::Disconnected {
            zero_eigenvalues: zeros,
        });
    }
    let lambda_min_pos = spectrum.values[1];
    Ok(SpectralInfo {
        lambda_max,
        lambda_min_pos,
        chi: lambda_max / lambda_min_pos,
        sigma_max: lambda_max * lambda_max,
        sigma_min_pos: lambda_min_pos * lambda_min_pos,
    })
}

fn count_zero_eigenvalues(values: &[f64], lambda_max: f64) -> usize {
    let threshold = ZERO_EIGENVALUE_THRESHOLD * lambda_max.abs();
    values.iter().filter(|v| v.abs() <= threshold).count()
}

/// Dimension of the Laplacian kernel, counted spectrally.
pub fn kernel_dimension(t: &Topology) -> Result<usize> {
    let spectrum = eig_sym(&laplacian(t))?;
    Ok(count_zero_eigenvalues(&spectrum.values, spectrum.max()))
}

/// Averaging matrix `I − W/n`.
pub fn mixing_matrix(t: &Topology) -> SymMatrix {
    let n = t.n as f64;
    let w = laplacian(t);
    SymMatrix::from_upper(t.n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - w.get(i, j) / n
    })
}

/// A graph in force from `start` until the next epoch begins.
#[derive(Clone, Debug)]
pub struct Epoch {
    pub start: usize,
    pub topology: Topology,
    pub laplacian: SymMatrix,
    pub spectral: SpectralInfo,
}

/// Piecewise-constant sequence of connected graphs over `horizon` iterations.
#[derive(Clone, Debug)]
pub struct GraphSchedule {
    horizon: usize,
    epochs: Vec<Epoch>,
}

impl GraphSchedule {
    pub fn new(horizon: usize, epochs: Vec<(usize, Topology)>) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidSchedule("horizon must be at least 1".into()));
        }
        let Some(first) = epochs.first() else {
            return Err(Error::InvalidSchedule("schedule has no epochs".into()));
        };
        if first.0 != 0 {
            return Err(Error::InvalidSchedule(format!(
                "first epoch must start at 0, not {}",
                first.0
            )));
        }
        let n = first.1.n;
        let mut built = Vec::with_capacity(epochs.len());
        for (idx, (start, topology)) in epochs.into_iter().enumerate() {
            if let Some(prev) = built.last().map(|e: &Epoch| e.start) {
                if start <= prev {
                    return Err(Error::InvalidSchedule(format!(
                        "epoch starts must strictly increase ({prev} then {start})"
                    )));
                }
            }
            if start >= horizon {
                return Err(Error::InvalidSchedule(format!(
                    "epoch {idx} starts at {start}, beyond the horizon {horizon}"
                )));
            }
            if topology.n != n {
                return Err(Error::InvalidSchedule(format!(
                    "epoch {idx} has {} nodes, expected {n}",
                    topology.n
                )));
            }
            let lap = laplacian(&topology);
            let spectral = spectral_info_of(&lap)
                .map_err(|_| Error::DisconnectedEpoch { epoch: idx, start })?;
            built.push(Epoch {
                start,
                topology,
                laplacian: lap,
                spectral,
            });
        }
        Ok(GraphSchedule {
            horizon,
            epochs: built,
        })
    }

    /// One graph for the whole horizon.
    pub fn fixed(t: Topology, horizon: usize) -> Result<Self> {
        Self::new(horizon, vec![(0, t)])
    }

    /// Switches between `a` and `b` every `period` iterations, starting with `a`.
    pub fn alternating(a: &Topology, b: &Topology, period: usize, horizon: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidSchedule("switching period must be at least 1".into()));
        }
        let epochs = (0..horizon)
            .step_by(period)
            .enumerate()
            .map(|(i, start)| (start, if i % 2 == 0 { a.clone() } else { b.clone() }))
            .collect();
        Self::new(horizon, epochs)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.epochs[0].topology.n
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    /// Index of the epoch in force at iteration `k`. Past the horizon the
    /// last graph stays in force.
    pub fn epoch_index(&self, k: usize) -> usize {
        self.epochs.partition_point(|e| e.start <= k) - 1
    }

    pub fn epoch_at(&self, k: usize) -> &Epoch {
        &self.epochs[self.epoch_index(k)]
    }

    /// Copy of this schedule with a different horizon. Epochs starting at or
    /// after the new horizon are dropped.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        let epochs = self
            .epochs
            .iter()
            .filter(|e| e.start < horizon)
            .map(|e| (e.start, e.topology.clone()))
            .collect();
        Self::new(horizon, epochs)
    }
}

/// `(θ_max, θ_min)`: the largest `λ_max²` and smallest `λ_min_pos²` over epochs.
pub fn theta_bounds(s: &GraphSchedule) -> (f64, f64) {
    let max = s.epochs.iter().map(|e| e.spectral.sigma_max).fold(f64::MIN, f64::max);
    let min = s
        .epochs
        .iter()
        .map(|e| e.spectral.sigma_min_pos)
        .fold(f64::MAX, f64::min);
    (max, min)
}

/// `(m, m / horizon)` where `m` counts graph changes after iteration 0.
pub fn change_stats(s: &GraphSchedule) -> (usize, f64) {
    let m = s.epochs.len() - 1;
    (m, m as f64 / s.horizon as f64)
}

/// Worst distance from exact averaging of the `window`-step mixing products:
/// `sup_k σ_max(V(k) ⋯ V(k−B+1) − 11ᵀ/n)` over `k` in `[B−1, horizon)`.
pub fn mixing_delta(s: &GraphSchedule, window: usize) -> Result<f64> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    if s.horizon < window {
        return Err(Error::InvalidArgument(format!(
            "window {window} exceeds the horizon {}",
            s.horizon
        )));
    }
    let n = s.n();
    let mixers: Vec<DenseMatrix> = s
        .epochs
        .iter()
        .map(|e| mixing_matrix(&e.topology).to_dense())
        .collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut delta: f64 = 0.0;
    for k in (window - 1)..s.horizon {
        let seq: Vec<usize> = (0..window).map(|b| s.epoch_index(k - b)).collect();
        if !seen.insert(seq.clone()) {
            continue;
        }
        let mut product = DenseMatrix::identity(n);
        for &e in &seq {
            product = product.matmul(&mixers[e])?;
        }
        let centered = DenseMatrix::from_fn(n, n, |i, j| product.get(i, j) - 1.0 / n as f64);
        delta = delta.max(centered.spectral_norm()?);
    }
    Ok(delta)
}

/// Schedule file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub horizon: usize,
    pub epochs: Vec<EpochSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochSpec {
    pub start: usize,
    pub kind: String,
    pub n: usize,
    #[serde(default)]
    pub params: TopologyParams,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// 1-based node pairs, for `custom` graphs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    /// One positive weight per entry of `edges`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

pub const TOPOLOGY_KINDS: &[&str] = &[
    "path",
    "cycle",
    "star",
    "complete",
    "erdos_renyi",
    "random_geometric",
    "custom",
];

impl EpochSpec {
    pub fn build(&self) -> Result<Topology> {
        let kind = match self.kind.as_str() {
            "path" => TopologyKind::Path,
            "cycle" => TopologyKind::Cycle,
            "star" => TopologyKind::Star,
            "complete" => TopologyKind::Complete,
            "erdos_renyi" => TopologyKind::ErdosRenyi { p: self.params.p },
            "random_geometric" => TopologyKind::RandomGeometric {
                radius: self.params.radius,
            },
            "custom" => return self.build_custom(),
            other => {
                return Err(Error::InvalidTopology(format!(
                    "unknown kind {other:?}; expected one of {}",
                    TOPOLOGY_KINDS.join(", ")
                )))
            }
        };
        gen_topology(&kind, self.n, self.seed)
    }

    fn build_custom(&self) -> Result<Topology> {
        let edges = self
            .params
            .edges
            .as_ref()
            .ok_or_else(|| Error::InvalidTopology("custom graph needs params.edges".into()))?;
        let weights = match &self.params.weights {
            Some(w) if w.len() != edges.len() => {
                return Err(Error::InvalidTopology(format!(
                    "{} weights for {} edges",
                    w.len(),
                    edges.len()
                )))
            }
            Some(w) => w.clone(),
            None => vec![1.0; edges.len()],
        };
        let mut list = Vec::with_capacity(edges.len());
        for (&(i, j), w) in edges.iter().zip(weights) {
            if i == 0 || j == 0 {
                return Err(Error::InvalidTopology("custom edge nodes are numbered from 1".into()));
            }
            list.push((i - 1, j - 1, w));
        }
        let t = Topology::from_weighted_edges(self.n, &list)?;
        Ok(t)
    }
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<GraphSchedule> {
        let epochs = self
            .epochs
            .iter()
            .map(|e| Ok((e.start, e.build()?)))
            .collect::<Result<Vec<_>>>()?;
        GraphSchedule::new(self.horizon, epochs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// 1-based edge pairs for display.
pub fn edge_pairs_one_based(t: &Topology) -> BTreeSet<(usize, usize)> {
    t.edges().map(|(i, j, _)| (i + 1, j + 1)).collect()
}
