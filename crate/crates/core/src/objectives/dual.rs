use serde::{Deserialize, Serialize};

use super::AggregateObjective;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, sqrt_psd, AgentMatrix, SymMatrix};

/// Strong convexity and smoothness of the dual on `(ker W)^⊥`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualConstants {
    pub mu_f: f64,
    pub l_f: f64,
    pub kappa: f64,
}

/// `μ_f = √θ_min / L_Φ`, `L_f = √θ_max / μ_Φ`, `κ = L_f / μ_f`.
pub fn dual_constants(agg: &AggregateObjective, theta: (f64, f64)) -> Result<DualConstants> {
    let (theta_max, theta_min) = theta;
    if !(theta_min > 0.0) {
        return Err(Error::InvalidSchedule(format!(
            "theta_min = {theta_min} is not positive: some graph is disconnected"
        )));
    }
    let mu_f = theta_min.sqrt() / agg.l_phi();
    let l_f = theta_max.sqrt() / agg.mu_phi();
    Ok(DualConstants {
        mu_f,
        l_f,
        kappa: l_f / mu_f,
    })
}

/// `f(X) = Φ*(−X√W)` for a fixed Laplacian.
#[derive(Clone, Debug)]
pub struct DualFunction<'a> {
    agg: &'a AggregateObjective,
    sqrt_w: SymMatrix,
}

impl<'a> DualFunction<'a> {
    pub fn new(agg: &'a AggregateObjective, laplacian: &SymMatrix) -> Result<Self> {
        if laplacian.dim() != agg.n() {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} Laplacian", agg.n()),
                found: format!("{0}x{0}", laplacian.dim()),
            });
        }
        Ok(DualFunction {
            agg,
            sqrt_w: sqrt_psd(laplacian)?,
        })
    }

    pub fn sqrt_w(&self) -> &SymMatrix {
        &self.sqrt_w
    }

    /// Dual point `Z = −X√W` seen by the agents.
    pub fn z_of(&self, x: &AgentMatrix) -> AgentMatrix {
        x.mul_sym(&self.sqrt_w).scale(-1.0)
    }

    pub fn value(&self, x: &AgentMatrix) -> Result<f64> {
        self.agg.conj_value(&self.z_of(x))
    }

    /// `∇f(X) = −Ỹ(−X√W) √W`.
    pub fn gradient(&self, x: &AgentMatrix) -> Result<AgentMatrix> {
        let y = self.agg.conj_argmax(&self.z_of(x))?;
        Ok(y.mul_sym(&self.sqrt_w).scale(-1.0))
    }

    /// `⟨∇f(X + tD) − ∇f(X), D⟩ / (t ‖D‖²)`.
    pub fn secant_curvature(&self, x: &AgentMatrix, d: &AgentMatrix, t: f64) -> Result<f64> {
        let moved = x.lin_comb(1.0, d, t);
        let dg = self.gradient(&moved)?.sub(&self.gradient(x)?);
        Ok(frobenius(&dg, d)? / (t * frobenius(d, d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{gen_topology, laplacian, theta_bounds, GraphSchedule, TopologyKind};
    use crate::objectives::LocalObjective;

    fn unit(n: usize) -> AggregateObjective {
        AggregateObjective::new((0..n).map(|i| LocalObjective::isotropic(&[i as f64]).unwrap()).collect())
            .unwrap()
    }

    fn constants(kind: TopologyKind, n: usize) -> DualConstants {
        let s = GraphSchedule::fixed(gen_topology(&kind, n, 0).unwrap(), 1).unwrap();
        dual_constants(&unit(n), theta_bounds(&s)).unwrap()
    }

    #[test]
    fn path_constants() {
        let c = constants(TopologyKind::Path, 3);
        assert!((c.l_f - 3.0).abs() < 1e-12 && (c.mu_f - 1.0).abs() < 1e-12);
        assert!((c.kappa - 3.0).abs() < 1e-12);
        let c = constants(TopologyKind::Path, 2);
        assert!((c.l_f - 2.0).abs() < 1e-12 && (c.mu_f - 2.0).abs() < 1e-12);
        assert!((c.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_l_phi() {
        let base = AggregateObjective::new(vec![
            LocalObjective::quadratic(SymMatrix::identity(1), vec![0.0], 0.0).unwrap(),
            LocalObjective::quadratic(SymMatrix::identity(1).scale(2.0), vec![0.0], 0.0).unwrap(),
        ])
        .unwrap();
        let doubled = AggregateObjective::new(vec![
            LocalObjective::quadratic(SymMatrix::identity(1), vec![0.0], 0.0).unwrap(),
            LocalObjective::quadratic(SymMatrix::identity(1).scale(4.0), vec![0.0], 0.0).unwrap(),
        ])
        .unwrap();
        let a = dual_constants(&base, (9.0, 1.0)).unwrap();
        let b = dual_constants(&doubled, (9.0, 1.0)).unwrap();
        assert_eq!(b.mu_f, a.mu_f / 2.0);
        assert_eq!(b.kappa, a.kappa * 2.0);
        assert!(dual_constants(&base, (9.0, 0.0)).is_err());
    }

    #[test]
    fn dual_gradient_rows_sum_to_zero() {
        let agg = unit(4);
        let w = laplacian(&gen_topology(&TopologyKind::Star, 4, 0).unwrap());
        let f = DualFunction::new(&agg, &w).unwrap();
        let x = AgentMatrix::from_columns(&[vec![0.3], vec![-1.0], vec![2.0], vec![0.1]]).unwrap();
        let g = f.gradient(&x).unwrap();
        assert!(g.row_sums()[0].abs() <= 1e-12);
    }
}
