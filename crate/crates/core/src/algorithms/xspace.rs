//! Centralized reference run of the dual method in the original variables
//! `X ∈ ℝ^{d×n}`, using explicit square roots of the Laplacians.
//!
//! The state is kept as the offset `E = X − X_ref` from the minimum-norm
//! dual solution `X_ref` of the first epoch. For quadratics the conjugate map
//! is affine, so `ỹ(z* + dz) − y* = P⁻¹ dz` is evaluated without ever
//! forming `z* + dz`; residuals stay accurate long after `f(X) − f*` drops
//! below the rounding level of `f*` itself.

use super::dual::{momentum_coefficient, schedule_constants};
use crate::error::{Error, Result};
use crate::graphs::GraphSchedule;
use crate::linalg::{eig_sym, project_consensus_orth, sqrt_psd, AgentMatrix, SymMatrix};
use crate::objectives::{centralized_solve, AggregateObjective, DualConstants};

/// Tolerance of the centralized solve behind `y*` and `f*`.
pub const ORACLE_TOLERANCE: f64 = 1e-12;

/// Per-epoch minimizers closer than this (relative) count as one.
pub const COMMON_MINIMIZER_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XMethod {
    Gradient,
    Nesterov,
}

#[derive(Clone, Debug)]
pub struct XSpaceParams {
    pub max_iter: usize,
    pub method: XMethod,
    /// Starting point; projected onto `(ker W)^⊥`. Zero when absent.
    pub x0: Option<AgentMatrix>,
}

impl XSpaceParams {
    pub fn new(max_iter: usize, method: XMethod) -> Self {
        XSpaceParams {
            max_iter,
            method,
            x0: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct XSpaceRecord {
    pub iter: usize,
    pub epoch: usize,
    /// `y_k − X_ref`: gradient-step sequence.
    pub ey: AgentMatrix,
    /// `x_k − X_ref`: extrapolated sequence.
    pub ex: AgentMatrix,
    /// `z_k − X_ref` with `z_k = x_k/τ − (1−τ) y_k/τ`, `τ = 1/(√κ+1)`.
    pub ez: AgentMatrix,
    /// `f_k(y_k) − f*`.
    pub residual: f64,
    /// `f_{k−1}(y_k) − f*`, the previous epoch's function at the new point.
    pub cross_residual: Option<f64>,
    /// Largest absolute row sum of `∇f_k(x_k)`.
    pub gradient_row_sum: f64,
    /// `‖P(X_k − X_0) − (X_k − X_0)‖_F`, `P` the projection onto `(ker W)^⊥`.
    pub kernel_leak: f64,
}

#[derive(Clone, Debug)]
pub struct XSpaceTrace {
    pub method: XMethod,
    pub constants: DualConstants,
    pub momentum: f64,
    pub tau: f64,
    pub y_star: Vec<f64>,
    pub f_star: f64,
    /// Minimum-norm minimizer of the first epoch's dual.
    pub x_ref: AgentMatrix,
    /// `‖X*_k‖_F` per epoch.
    pub xstar_norms: Vec<f64>,
    /// `‖X_0 − X*_k‖_F` per epoch.
    pub distances: Vec<f64>,
    /// All epochs share `X_ref` as minimizer.
    pub common_minimizer: bool,
    pub records: Vec<XSpaceRecord>,
}

impl XSpaceTrace {
    /// `R = max_k ‖X_0 − X*_k‖_F`; the plain initial distance on static graphs.
    pub fn r(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

/// Precomputed per-epoch operators.
struct EpochOps {
    sqrt_w: SymMatrix,
    /// `−X_ref √W_k − Z*`; zero when `X_ref` minimizes this epoch's dual.
    offset: AgentMatrix,
}

struct Model<'a> {
    agg: &'a AggregateObjective,
    y_star: Vec<f64>,
    z_star: AgentMatrix,
    ops: Vec<EpochOps>,
}

impl Model<'_> {
    /// `ỹ_i(z*_i + dz_i) − y*` for every agent.
    fn shift(&self, dz: &AgentMatrix) -> Result<AgentMatrix> {
        let cols = self
            .agg
            .locals()
            .iter()
            .enumerate()
            .map(|(i, phi)| match phi.conj_shift(dz.col(i)) {
                Some(s) => Ok(s),
                None => {
                    let z: Vec<f64> = self.z_star.col(i).iter().zip(dz.col(i)).map(|(a, b)| a + b).collect();
                    let y = phi.conj_argmax(&z)?;
                    Ok(y.iter().zip(&self.y_star).map(|(a, b)| a - b).collect())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        AgentMatrix::from_columns(&cols)
    }

    fn dz(&self, epoch: usize, e: &AgentMatrix) -> AgentMatrix {
        let op = &self.ops[epoch];
        op.offset.lin_comb(1.0, &e.mul_sym(&op.sqrt_w), -1.0)
    }

    /// `f_k(X_ref + E) − f* = Σ_i D_φi(y*, ỹ_i)`.
    fn residual(&self, epoch: usize, e: &AgentMatrix) -> Result<f64> {
        let s = self.shift(&self.dz(epoch, e))?;
        let mut total = 0.0;
        for (i, phi) in self.agg.locals().iter().enumerate() {
            let y: Vec<f64> = self.y_star.iter().zip(s.col(i)).map(|(a, b)| a + b).collect();
            total += phi.bregman(&self.y_star, &y);
        }
        Ok(total)
    }

    /// `∇f_k(X_ref + E) = −(Ỹ − y*1ᵀ) √W_k`; the dropped `y*1ᵀ√W_k` is zero.
    fn gradient(&self, epoch: usize, e: &AgentMatrix) -> Result<AgentMatrix> {
        let s = self.shift(&self.dz(epoch, e))?;
        Ok(s.mul_sym(&self.ops[epoch].sqrt_w).scale(-1.0))
    }
}

/// `(√W)^+`: inverse square root on the nonzero eigenvalues.
fn pinv_sqrt(w: &SymMatrix) -> Result<SymMatrix> {
    let s = eig_sym(w)?;
    let threshold = crate::graphs::ZERO_EIGENVALUE_THRESHOLD * s.max();
    Ok(s.map(|v| if v > threshold { 1.0 / v.sqrt() } else { 0.0 }))
}

/// Minimum-norm minimizer `X* = −Z* (√W)^+` of `Φ*(−X√W)`, where
/// `Z*_i = ∇φ_i(y*)`.
pub fn min_norm_dual_solution(z_star: &AgentMatrix, laplacian: &SymMatrix) -> Result<AgentMatrix> {
    Ok(z_star.mul_sym(&pinv_sqrt(laplacian)?).scale(-1.0))
}

/// Dual optimum `Z*` (columns `∇φ_i(y*)`) with `y*` and `f* = −φ(y*)`.
pub fn dual_optimum(agg: &AggregateObjective) -> Result<(AgentMatrix, Vec<f64>, f64)> {
    let (y_star, phi_star) = centralized_solve(agg, ORACLE_TOLERANCE * (1.0 + agg.n() as f64))?;
    let cols: Vec<Vec<f64>> = agg.locals().iter().map(|phi| phi.gradient(&y_star)).collect();
    Ok((AgentMatrix::from_columns(&cols)?, y_star, -phi_star))
}

pub fn run_xspace_reference(
    agg: &AggregateObjective,
    schedule: &GraphSchedule,
    params: &XSpaceParams,
) -> Result<XSpaceTrace> {
    if agg.n() != schedule.n() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} agents", schedule.n()),
            found: format!("{} agents", agg.n()),
        });
    }
    let constants = schedule_constants(agg, schedule)?;
    let (z_star, y_star, f_star) = dual_optimum(agg)?;
    let (d, n) = (agg.dim(), agg.n());

    let mut sqrt_ws = Vec::new();
    let mut xstars = Vec::new();
    for e in schedule.epochs() {
        sqrt_ws.push(sqrt_psd(&e.laplacian)?);
        xstars.push(min_norm_dual_solution(&z_star, &e.laplacian)?);
    }
    let x_ref = xstars[0].clone();
    let scale = xstars.iter().map(AgentMatrix::frobenius_norm).fold(0.0, f64::max);
    let common = xstars
        .iter()
        .all(|x| x.sub(&x_ref).frobenius_norm() <= COMMON_MINIMIZER_TOLERANCE * scale);
    let ops: Vec<EpochOps> = sqrt_ws
        .into_iter()
        .enumerate()
        .map(|(k, sqrt_w)| {
            let offset = if common || k == 0 {
                AgentMatrix::zeros(d, n)
            } else {
                x_ref.mul_sym(&sqrt_w).scale(-1.0).sub(&z_star)
            };
            EpochOps { sqrt_w, offset }
        })
        .collect();

    let x0 = match &params.x0 {
        Some(x) if x.dim() != d || x.agents() != n => {
            return Err(Error::ShapeMismatch {
                expected: format!("{d}x{n}"),
                found: format!("{}x{}", x.dim(), x.agents()),
            })
        }
        Some(x) => project_consensus_orth(x),
        None => AgentMatrix::zeros(d, n),
    };
    let distances = xstars.iter().map(|x| x0.sub(x).frobenius_norm()).collect();
    let xstar_norms = xstars.iter().map(AgentMatrix::frobenius_norm).collect();

    let model = Model {
        agg,
        y_star: y_star.clone(),
        z_star,
        ops,
    };
    let beta = match params.method {
        XMethod::Nesterov => momentum_coefficient(constants.kappa).unwrap_or(0.0),
        XMethod::Gradient => 0.0,
    };
    let tau = 1.0 / (constants.kappa.sqrt() + 1.0);
    let step = 1.0 / constants.l_f;

    let e0 = x0.sub(&x_ref);
    let mut ey = e0.clone();
    let mut ex = e0.clone();
    let mut ez = e0.clone();
    let mut records = Vec::with_capacity(params.max_iter + 1);
    let mut cross = None;
    for k in 0..=params.max_iter {
        let epoch = schedule.epoch_index(k);
        let g = model.gradient(epoch, &ex)?;
        let leak = {
            let disp = ex.sub(&e0);
            project_consensus_orth(&disp).sub(&disp).frobenius_norm()
        };
        records.push(XSpaceRecord {
            iter: k,
            epoch,
            ey: ey.clone(),
            ex: ex.clone(),
            ez: ez.clone(),
            residual: model.residual(epoch, &ey)?,
            cross_residual: cross,
            gradient_row_sum: g.row_sums().iter().fold(0.0, |m, v| m.max(v.abs())),
            kernel_leak: leak,
        });
        if k == params.max_iter {
            break;
        }
        let next_y = ex.lin_comb(1.0, &g, -step);
        let next_x = next_y.lin_comb(1.0 + beta, &ey, -beta);
        ez = next_x.lin_comb(1.0 / tau, &next_y, -(1.0 - tau) / tau);
        cross = Some(model.residual(epoch, &next_y)?);
        ey = next_y;
        ex = next_x;
    }

    Ok(XSpaceTrace {
        method: params.method,
        constants,
        momentum: beta,
        tau,
        y_star,
        f_star,
        x_ref,
        xstar_norms,
        distances,
        common_minimizer: common,
        records,
    })
}

impl XSpaceTrace {
    /// Agent-side dual variable `Z = −(X_ref + E) √W_k`, for comparison
    /// with the distributed run.
    pub fn z_of(&self, schedule: &GraphSchedule, epoch: usize, e: &AgentMatrix) -> Result<AgentMatrix> {
        let sqrt_w = sqrt_psd(&schedule.epochs()[epoch].laplacian)?;
        Ok(self.x_ref.add(e).mul_sym(&sqrt_w).scale(-1.0))
    }

    /// `‖y_k − X_ref‖_F` per record.
    pub fn distances_to_reference(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.ey.frobenius_norm()).collect()
    }
}
