//! Neighbor-only communication.
//!
//! Every quantity an agent uses from another agent passes through
//! [`Network::laplacian_apply`] or [`Network::mix`], which only read values
//! received over edges of the current graph and optionally log each
//! directed message.

use serde::{Deserialize, Serialize};

use crate::graphs::GraphSchedule;
use crate::linalg::AgentMatrix;

/// Directed `(sender, receiver)` pairs sent during one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub iter: usize,
    pub epoch: usize,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MessageLog {
    pub rounds: Vec<Round>,
}

/// A message that travelled over a non-edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub iter: usize,
    pub sender: usize,
    pub receiver: usize,
}

impl MessageLog {
    pub fn total(&self) -> usize {
        self.rounds.iter().map(|r| r.pairs.len()).sum()
    }

    /// Every logged pair must be an edge of the graph in force at its
    /// iteration. Returns all offending messages.
    pub fn violations(&self, schedule: &GraphSchedule) -> Vec<Violation> {
        let mut bad = Vec::new();
        for round in &self.rounds {
            let epoch = schedule.epoch_index(round.iter);
            let topology = &schedule.epochs()[epoch].topology;
            for &(s, r) in &round.pairs {
                if round.epoch != epoch || s == r || !topology.has_edge(s, r) {
                    bad.push(Violation {
                        iter: round.iter,
                        sender: s,
                        receiver: r,
                    });
                }
            }
        }
        bad
    }
}

pub(crate) struct Network<'a> {
    schedule: &'a GraphSchedule,
    adjacency: Vec<Vec<Vec<(usize, f64)>>>,
    log: Option<MessageLog>,
    sent: u64,
}

impl<'a> Network<'a> {
    pub fn new(schedule: &'a GraphSchedule, log_messages: bool) -> Self {
        Network {
            schedule,
            adjacency: schedule.epochs().iter().map(|e| e.topology.adjacency()).collect(),
            log: log_messages.then(MessageLog::default),
            sent: 0,
        }
    }

    /// Each agent sends its column to every neighbor; returns the inboxes.
    fn broadcast(&mut self, iter: usize) -> (usize, &[Vec<(usize, f64)>]) {
        let epoch = self.schedule.epoch_index(iter);
        let adj = &self.adjacency[epoch];
        let count: usize = adj.iter().map(Vec::len).sum();
        self.sent += count as u64;
        if let Some(log) = &mut self.log {
            let mut pairs = Vec::with_capacity(count);
            for (s, nbrs) in adj.iter().enumerate() {
                for &(r, _) in nbrs {
                    pairs.push((s, r));
                }
            }
            log.rounds.push(Round { iter, epoch, pairs });
        }
        (epoch, adj)
    }

    /// `(X W_k)_i = Σ_j w_ij (x_i − x_j)` from neighbor messages.
    pub fn laplacian_apply(&mut self, iter: usize, x: &AgentMatrix) -> AgentMatrix {
        let (_, adj) = self.broadcast(iter);
        let d = x.dim();
        let mut out = AgentMatrix::zeros(d, x.agents());
        for (i, inbox) in adj.iter().enumerate() {
            let own = x.col(i);
            let acc = out.col_mut(i);
            for &(j, w) in inbox {
                let other = x.col(j);
                for r in 0..d {
                    acc[r] += w * (own[r] - other[r]);
                }
            }
        }
        out
    }

    /// `X V_k` with `V_k = I − W_k / n`, applied to several matrices that
    /// share one round of messages.
    pub fn mix(&mut self, iter: usize, xs: &[&AgentMatrix]) -> Vec<AgentMatrix> {
        let (_, adj) = self.broadcast(iter);
        let n = xs.first().map_or(0, |x| x.agents()) as f64;
        xs.iter()
            .map(|x| {
                let d = x.dim();
                let mut out = (*x).clone();
                for (i, inbox) in adj.iter().enumerate() {
                    let own = x.col(i).to_vec();
                    let acc = out.col_mut(i);
                    for &(j, w) in inbox {
                        let other = x.col(j);
                        for r in 0..d {
                            acc[r] -= w * (own[r] - other[r]) / n;
                        }
                    }
                }
                out
            })
            .collect()
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn into_log(self) -> Option<MessageLog> {
        self.log
    }
}
