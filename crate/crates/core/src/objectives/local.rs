use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, eig_sym, norm2, Cholesky, DenseMatrix, SymMatrix};

/// Inner Newton solve stops when `‖z − ∇φ(y)‖ ≤ CONJ_TOLERANCE (1 + ‖z‖)`.
pub const CONJ_TOLERANCE: f64 = 1e-10;
pub const CONJ_MAX_ITER: usize = 100;

/// Strongly convex quadratic `½ (y − c)ᵀ P (y − c) + m`.
///
/// Keeping the center and the minimum value (rather than `½yᵀPy − qᵀy + r`)
/// keeps values accurate near the minimizer.
#[derive(Clone, Debug)]
pub struct Quadratic {
    p: SymMatrix,
    center: Vec<f64>,
    min_value: f64,
    chol: Cholesky,
    mu: f64,
    l: f64,
}

impl Quadratic {
    pub fn new(p: SymMatrix, center: Vec<f64>, min_value: f64) -> Result<Self> {
        if center.len() != p.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("center of length {}", p.dim()),
                found: format!("length {}", center.len()),
            });
        }
        if !center.iter().all(|v| v.is_finite()) || !min_value.is_finite() {
            return Err(Error::NonFinite);
        }
        let spectrum = eig_sym(&p)?;
        let (mu, l) = (spectrum.min(), spectrum.max());
        if mu <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let chol = Cholesky::factor(&p)?;
        Ok(Quadratic {
            p,
            center,
            min_value,
            chol,
            mu,
            l,
        })
    }

    /// `½ yᵀPy − qᵀy + r`.
    pub fn from_linear(p: SymMatrix, q: &[f64], r: f64) -> Result<Self> {
        let chol = Cholesky::factor(&p)?;
        let center = chol.solve(q);
        let min_value = r - 0.5 * dot(q, &center);
        Self::new(p, center, min_value)
    }

    pub fn hessian(&self) -> &SymMatrix {
        &self.p
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    /// `P⁻¹ v`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        self.chol.solve(v)
    }

    fn offset(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.center).map(|(a, c)| a - c).collect()
    }
}

/// Ridge-regularized logistic loss
/// `(1/scale) Σ_j log(1 + exp(−b_j a_jᵀ y)) + (ridge/2) ‖y‖²`.
#[derive(Clone, Debug)]
pub struct Logistic {
    samples: DenseMatrix,
    labels: Vec<f64>,
    scale: f64,
    ridge: f64,
    mu: f64,
    l: f64,
}

impl Logistic {
    /// `samples` holds one sample per row; labels must be ±1.
    pub fn new(samples: DenseMatrix, labels: Vec<f64>, scale: f64, ridge: f64) -> Result<Self> {
        if samples.rows() != labels.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels", samples.rows()),
                found: format!("{} labels", labels.len()),
            });
        }
        if labels.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::InvalidArgument("logistic labels must be -1 or +1".into()));
        }
        if !(scale > 0.0) || !(ridge > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "logistic scale and ridge must be positive (got {scale}, {ridge})"
            )));
        }
        let top = if samples.rows() == 0 {
            0.0
        } else {
            eig_sym(&samples.gram())?.max().max(0.0)
        };
        Ok(Logistic {
            l: ridge + top / (4.0 * scale),
            mu: ridge,
            samples,
            labels,
            scale,
            ridge,
        })
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn samples(&self) -> &DenseMatrix {
        &self.samples
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    fn margins(&self, y: &[f64]) -> Vec<f64> {
        (0..self.samples.rows())
            .map(|j| self.labels[j] * dot(self.samples.row(j), y))
            .collect()
    }

    fn hessian_at(&self, y: &[f64]) -> SymMatrix {
        let d = y.len();
        let margins = self.margins(y);
        let mut h = SymMatrix::zeros(d).shift_diagonal(self.ridge);
        let mut acc = vec![0.0; d * d];
        for (j, t) in margins.iter().enumerate() {
            let s = sigmoid(*t);
            let w = s * (1.0 - s) / self.scale;
            let a = self.samples.row(j);
            for r in 0..d {
                for c in r..d {
                    acc[r * d + c] += w * a[r] * a[c];
                }
            }
        }
        for r in 0..d {
            for c in r..d {
                let v = h.get(r, c) + acc[r * d + c];
                h.set_sym(r, c, v);
            }
        }
        h
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(u))` without overflow.
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// One agent's private objective `φ_i`.
#[derive(Clone, Debug)]
pub enum LocalObjective {
    Quadratic(Quadratic),
    Logistic(Logistic),
}

impl LocalObjective {
    /// `½ ‖y − a‖²`.
    pub fn isotropic(a: &[f64]) -> Result<Self> {
        let q = Quadratic::new(SymMatrix::identity(a.len()), a.to_vec(), 0.0)?;
        Ok(LocalObjective::Quadratic(q))
    }

    pub fn quadratic(p: SymMatrix, center: Vec<f64>, min_value: f64) -> Result<Self> {
        Ok(LocalObjective::Quadratic(Quadratic::new(p, center, min_value)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            LocalObjective::Quadratic(q) => q.center.len(),
            LocalObjective::Logistic(g) => g.samples.cols(),
        }
    }

    /// Strong convexity modulus `μ_i`.
    pub fn mu(&self) -> f64 {
        match self {
            LocalObjective::Quadratic(q) => q.mu,
            LocalObjective::Logistic(g) => g.mu,
        }
    }

    /// Smoothness constant `L_i`.
    pub fn l(&self) -> f64 {
        match self {
            LocalObjective::Quadratic(q) => q.l,
            LocalObjective::Logistic(g) => g.l,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, LocalObjective::Quadratic(_))
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            LocalObjective::Quadratic(q) => {
                let e = q.offset(y);
                0.5 * q.p.quad_form(&e) + q.min_value
            }
            LocalObjective::Logistic(g) => {
                let loss: f64 = g.margins(y).into_iter().map(|t| softplus(-t)).sum();
                loss / g.scale + 0.5 * g.ridge * dot(y, y)
            }
        }
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        match self {
            LocalObjective::Quadratic(q) => q.p.mul_vec(&q.offset(y)),
            LocalObjective::Logistic(g) => {
                let mut out: Vec<f64> = y.iter().map(|v| g.ridge * v).collect();
                for (j, t) in g.margins(y).into_iter().enumerate() {
                    let w = -g.labels[j] * sigmoid(-t) / g.scale;
                    axpy(w, g.samples.row(j), &mut out);
                }
                out
            }
        }
    }

    pub fn hessian(&self, y: &[f64]) -> SymMatrix {
        match self {
            LocalObjective::Quadratic(q) => q.p.clone(),
            LocalObjective::Logistic(g) => g.hessian_at(y),
        }
    }

    /// `argmax_y ⟨z, y⟩ − φ(y)`, i.e. the `y` with `∇φ(y) = z`.
    pub fn conj_argmax(&self, z: &[f64]) -> Result<Vec<f64>> {
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        match self {
            LocalObjective::Quadratic(q) => {
                let mut y = q.solve(z);
                for (a, c) in y.iter_mut().zip(&q.center) {
                    *a += c;
                }
                Ok(y)
            }
            LocalObjective::Logistic(_) => self.newton_conj(z),
        }
    }

    /// Damped Newton on `g(y) = φ(y) − ⟨z, y⟩` with Armijo backtracking.
    fn newton_conj(&self, z: &[f64]) -> Result<Vec<f64>> {
        let tol = CONJ_TOLERANCE * (1.0 + norm2(z));
        let objective = |y: &[f64]| self.value(y) - dot(z, y);
        let mut y = vec![0.0; z.len()];
        let mut residual = f64::INFINITY;
        for _ in 0..CONJ_MAX_ITER {
            let g: Vec<f64> = self.gradient(&y).iter().zip(z).map(|(a, b)| a - b).collect();
            residual = norm2(&g);
            if residual <= tol {
                return Ok(y);
            }
            let chol = Cholesky::factor(&self.hessian(&y))?;
            let step = chol.solve(&g);
            let slope = dot(&g, &step);
            let g0 = objective(&y);
            let take = |t: f64| -> Vec<f64> { y.iter().zip(&step).map(|(a, s)| a - t * s).collect() };
            // near the optimum the predicted decrease drops below the rounding
            // of the objective; Armijo then judges noise, so take the full step
            let mut t = 1.0;
            if slope > 64.0 * f64::EPSILON * (1.0 + g0.abs()) {
                while t > 1e-18 && objective(&take(t)) > g0 - 1e-4 * t * slope {
                    t *= 0.5;
                }
                if t <= 1e-18 {
                    t = 1.0;
                }
            }
            let next = take(t);
            y = next;
        }
        let g: Vec<f64> = self.gradient(&y).iter().zip(z).map(|(a, b)| a - b).collect();
        let final_residual = norm2(&g);
        if final_residual <= tol {
            return Ok(y);
        }
        Err(Error::SolverFailed {
            residual: final_residual.min(residual),
            iterations: CONJ_MAX_ITER,
        })
    }

    /// `φ*(z)` together with the maximizer.
    pub fn conjugate(&self, z: &[f64]) -> Result<(Vec<f64>, f64)> {
        let y = self.conj_argmax(z)?;
        let value = match self {
            // ⟨z, c⟩ + ½ zᵀP⁻¹z − m, free of cancellation around z = 0
            LocalObjective::Quadratic(q) => {
                dot(z, &q.center) + 0.5 * dot(z, &q.solve(z)) - q.min_value
            }
            LocalObjective::Logistic(_) => dot(z, &y) - self.value(&y),
        };
        Ok((y, value))
    }

    pub fn conj_value(&self, z: &[f64]) -> Result<f64> {
        Ok(self.conjugate(z)?.1)
    }

    /// Bregman divergence `φ(a) − φ(b) − ⟨∇φ(b), a − b⟩`.
    pub fn bregman(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            LocalObjective::Quadratic(q) => {
                let e: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                0.5 * q.p.quad_form(&e)
            }
            LocalObjective::Logistic(_) => {
                let e: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                (self.value(a) - self.value(b) - dot(&self.gradient(b), &e)).max(0.0)
            }
        }
    }

    /// Change in the conjugate maximizer when `z` moves by `dz`, exact for
    /// quadratics: `P⁻¹ dz`.
    pub fn conj_shift(&self, dz: &[f64]) -> Option<Vec<f64>> {
        match self {
            LocalObjective::Quadratic(q) => Some(q.solve(dz)),
            LocalObjective::Logistic(_) => None,
        }
    }

    /// `φ(y) + (s/2) ‖y‖²`. Requires `μ_i + s > 0`.
    pub fn shifted(&self, s: f64) -> Result<Self> {
        if s == 0.0 {
            return Ok(self.clone());
        }
        if self.mu() + s <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        match self {
            LocalObjective::Quadratic(q) => {
                let p = q.p.shift_diagonal(s);
                let chol = Cholesky::factor(&p)?;
                let pc = q.p.mul_vec(&q.center);
                let center = chol.solve(&pc);
                let e = q.offset(&center);
                let min_value = 0.5 * q.p.quad_form(&e) + q.min_value + 0.5 * s * dot(&center, &center);
                Ok(LocalObjective::Quadratic(Quadratic {
                    p,
                    center,
                    min_value,
                    chol,
                    mu: q.mu + s,
                    l: q.l + s,
                }))
            }
            LocalObjective::Logistic(g) => Ok(LocalObjective::Logistic(Logistic {
                ridge: g.ridge + s,
                mu: g.mu + s,
                l: g.l + s,
                ..g.clone()
            })),
        }
    }
}
