//! Local objectives `φ_i`, their sum `Φ`, and the dual constants they induce.

mod data;
mod dual;
mod local;

pub use data::{
    gen_logistic_instance, gen_ridge_instance, load_sparse_labeled, parse_sparse_labeled, Dataset,
    LogisticParams, RidgeInstance, RidgeParams,
};
pub use dual::{dual_constants, DualConstants, DualFunction};
pub use local::{LocalObjective, Logistic, Quadratic, CONJ_MAX_ITER, CONJ_TOLERANCE};

use crate::error::{Error, Result};
use crate::linalg::{norm2, AgentMatrix, Cholesky, SymMatrix};

/// `Φ(Y) = Σ_i φ_i(y_i)` over `n` agents sharing a decision dimension `d`.
#[derive(Clone, Debug)]
pub struct AggregateObjective {
    locals: Vec<LocalObjective>,
    mu_phi: f64,
    l_phi: f64,
}

impl AggregateObjective {
    pub fn new(locals: Vec<LocalObjective>) -> Result<Self> {
        let Some(first) = locals.first() else {
            return Err(Error::InvalidArgument("aggregate needs at least one agent".into()));
        };
        let d = first.dim();
        if let Some((i, bad)) = locals.iter().enumerate().find(|(_, o)| o.dim() != d) {
            return Err(Error::ShapeMismatch {
                expected: format!("dimension {d}"),
                found: format!("dimension {} at agent {}", bad.dim(), i + 1),
            });
        }
        let mu_phi = locals.iter().map(LocalObjective::mu).fold(f64::INFINITY, f64::min);
        let l_phi = locals.iter().map(LocalObjective::l).fold(0.0, f64::max);
        Ok(AggregateObjective {
            locals,
            mu_phi,
            l_phi,
        })
    }

    pub fn locals(&self) -> &[LocalObjective] {
        &self.locals
    }

    pub fn n(&self) -> usize {
        self.locals.len()
    }

    pub fn dim(&self) -> usize {
        self.locals[0].dim()
    }

    /// `min_i μ_i`.
    pub fn mu_phi(&self) -> f64 {
        self.mu_phi
    }

    /// `max_i L_i`.
    pub fn l_phi(&self) -> f64 {
        self.l_phi
    }

    /// Mean condition number `(1/n) Σ L_i/μ_i`.
    pub fn kappa_bar(&self) -> f64 {
        self.locals.iter().map(|o| o.l() / o.mu()).sum::<f64>() / self.n() as f64
    }

    pub fn mu_bar(&self) -> f64 {
        self.locals.iter().map(LocalObjective::mu).sum::<f64>() / self.n() as f64
    }

    pub fn is_quadratic(&self) -> bool {
        self.locals.iter().all(LocalObjective::is_quadratic)
    }

    fn check(&self, y: &AgentMatrix) -> Result<()> {
        if y.dim() != self.dim() || y.agents() != self.n() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.dim(), self.n()),
                found: format!("{}x{}", y.dim(), y.agents()),
            });
        }
        Ok(())
    }

    /// Separable value `Σ_i φ_i(y_i)`.
    pub fn value(&self, y: &AgentMatrix) -> Result<f64> {
        self.check(y)?;
        Ok(self.locals.iter().enumerate().map(|(i, o)| o.value(y.col(i))).sum())
    }

    /// `φ(y) = Σ_i φ_i(y)` at a common point.
    pub fn value_at(&self, y: &[f64]) -> f64 {
        self.locals.iter().map(|o| o.value(y)).sum()
    }

    pub fn gradient_at(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; y.len()];
        for o in &self.locals {
            for (a, b) in g.iter_mut().zip(o.gradient(y)) {
                *a += b;
            }
        }
        g
    }

    /// Column `i` is `∇φ_i(y_i)`.
    pub fn gradients(&self, y: &AgentMatrix) -> Result<AgentMatrix> {
        self.check(y)?;
        let cols: Vec<Vec<f64>> = self
            .locals
            .iter()
            .enumerate()
            .map(|(i, o)| o.gradient(y.col(i)))
            .collect();
        AgentMatrix::from_columns(&cols)
    }

    /// Column `i` is `argmax_y ⟨z_i, y⟩ − φ_i(y)`.
    pub fn conj_argmax(&self, z: &AgentMatrix) -> Result<AgentMatrix> {
        self.check(z)?;
        let cols = self
            .locals
            .iter()
            .enumerate()
            .map(|(i, o)| o.conj_argmax(z.col(i)))
            .collect::<Result<Vec<_>>>()?;
        AgentMatrix::from_columns(&cols)
    }

    /// `Φ*(Z) = Σ_i φ_i*(z_i)`.
    pub fn conj_value(&self, z: &AgentMatrix) -> Result<f64> {
        self.check(z)?;
        let mut total = 0.0;
        for (i, o) in self.locals.iter().enumerate() {
            total += o.conj_value(z.col(i))?;
        }
        Ok(total)
    }
}

/// Moves strong convexity between agents: `φ̂_i = φ_i + (μ̄ − μ_i)‖y‖²/2`.
/// The shifts sum to zero, so `Σ φ̂_i = Σ φ_i` pointwise.
pub fn balance_strong_convexity(agg: &AggregateObjective) -> Result<AggregateObjective> {
    let mu_bar = agg.mu_bar();
    let locals = agg
        .locals
        .iter()
        .map(|o| o.shifted(mu_bar - o.mu()))
        .collect::<Result<Vec<_>>>()?;
    AggregateObjective::new(locals)
}

/// Minimizer and minimum of `φ(y) = Σ_i φ_i(y)` with `‖∇φ(y*)‖ ≤ tol`.
pub fn centralized_solve(agg: &AggregateObjective, tol: f64) -> Result<(Vec<f64>, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let d = agg.dim();
    let mut y = vec![0.0; d];
    const MAX_NEWTON: usize = 200;
    let mut residual = f64::INFINITY;
    // Newton from zero: one step is exact for quadratics, further steps only
    // refine rounding
    for _ in 0..MAX_NEWTON {
        let g = agg.gradient_at(&y);
        residual = norm2(&g);
        if residual <= tol {
            return Ok((y.clone(), agg.value_at(&y)));
        }
        let mut h = SymMatrix::zeros(d);
        for o in agg.locals() {
            h = h.add(&o.hessian(&y));
        }
        let step = Cholesky::factor(&h)?.solve(&g);
        let base = agg.value_at(&y);
        let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        let mut next = y.clone();
        for _ in 0..60 {
            for ((n, a), s) in next.iter_mut().zip(&y).zip(&step) {
                *n = a - t * s;
            }
            if agg.is_quadratic() || agg.value_at(&next) <= base - 1e-4 * t * slope {
                break;
            }
            t *= 0.5;
        }
        if agg.value_at(&next) > base && !agg.is_quadratic() {
            for ((n, a), s) in next.iter_mut().zip(&y).zip(&step) {
                *n = a - s;
            }
        }
        if next == y {
            break;
        }
        y = next;
    }
    let residual = residual.min(norm2(&agg.gradient_at(&y)));
    if residual <= tol {
        return Ok((y.clone(), agg.value_at(&y)));
    }
    Err(Error::SolverFailed {
        residual,
        iterations: MAX_NEWTON,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use rand::Rng;

    fn pair(a: f64, b: f64) -> AggregateObjective {
        AggregateObjective::new(vec![
            LocalObjective::isotropic(&[a]).unwrap(),
            LocalObjective::isotropic(&[b]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn centralized_examples() {
        let (y, v) = centralized_solve(&pair(-1.0, 1.0), 1e-12).unwrap();
        assert_eq!(y, vec![0.0]);
        assert_eq!(v, 1.0);
        let single = AggregateObjective::new(vec![LocalObjective::isotropic(&[2.0, -3.0]).unwrap()]).unwrap();
        let (y, v) = centralized_solve(&single, 1e-12).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-15 && (y[1] + 3.0).abs() < 1e-15);
        assert!(v.abs() < 1e-15);
        assert!(centralized_solve(&single, 0.0).is_err());
    }

    #[test]
    fn aggregate_constants() {
        let agg = AggregateObjective::new(vec![
            LocalObjective::quadratic(SymMatrix::diagonal(&[1.0, 4.0]), vec![0.0, 0.0], 0.0).unwrap(),
            LocalObjective::quadratic(SymMatrix::diagonal(&[2.0, 3.0]), vec![0.0, 0.0], 0.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(agg.mu_phi(), 1.0);
        assert_eq!(agg.l_phi(), 4.0);
        // (4/1 + 3/2) / 2
        assert!((agg.kappa_bar() - 2.75).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = AggregateObjective::new(vec![
            LocalObjective::isotropic(&[0.0]).unwrap(),
            LocalObjective::isotropic(&[0.0, 1.0]).unwrap(),
        ]);
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn balancing_example() {
        let agg = AggregateObjective::new(vec![
            LocalObjective::quadratic(SymMatrix::identity(2), vec![1.0, 0.0], 0.0).unwrap(),
            LocalObjective::quadratic(SymMatrix::identity(2).scale(3.0), vec![0.0, 1.0], 0.0).unwrap(),
        ])
        .unwrap();
        let b = balance_strong_convexity(&agg).unwrap();
        assert_eq!(b.locals()[0].mu(), 2.0);
        assert_eq!(b.locals()[1].mu(), 2.0);
        // first agent gains ½‖y‖²
        let y = [0.3, -2.0];
        let gained = b.locals()[0].value(&y) - agg.locals()[0].value(&y);
        assert!((gained - 0.5 * dot(&y, &y)).abs() < 1e-12);
    }

    #[test]
    fn balancing_equal_moduli_is_identity() {
        let agg = pair(-1.0, 2.0);
        let b = balance_strong_convexity(&agg).unwrap();
        for y in [-1.0, 0.0, 5.0] {
            assert_eq!(b.value_at(&[y]), agg.value_at(&[y]));
        }
    }

    #[test]
    fn balancing_preserves_the_sum() {
        let mut rng = crate::rng::seeded(5);
        let locals = (0..4)
            .map(|k| {
                let p = SymMatrix::identity(3).scale(0.5 + k as f64);
                let c = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                LocalObjective::quadratic(p, c, 0.0).unwrap()
            })
            .collect();
        let agg = AggregateObjective::new(locals).unwrap();
        let b = balance_strong_convexity(&agg).unwrap();
        for _ in 0..100 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            let (u, v) = (agg.value_at(&y), b.value_at(&y));
            assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()), "{u} vs {v}");
        }
    }
}
