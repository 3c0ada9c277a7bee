//! Closed-form rates, iteration counts and bounds.
//!
//! Logarithms are natural throughout. Each evaluator has a typed entry point
//! and is also reachable by name through [`evaluate`], which returns a
//! [`BoundReport`] echoing its inputs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Contraction factor `(L − μ)/(L + μ)` claimed for gradient descent with step `1/L`.
pub fn gd_rate(l: f64, mu: f64) -> Result<f64> {
    check_lmu(l, mu)?;
    Ok((l - mu) / (l + mu))
}

/// Worst-case contraction of gradient descent with step `1/L` on a
/// `μ`-strongly convex `L`-smooth quadratic: `1 − μ/L`.
pub fn gd_rate_step_inv_l(l: f64, mu: f64) -> Result<f64> {
    check_lmu(l, mu)?;
    Ok(1.0 - mu / l)
}

/// `⌈ln(R/ε) / ln((L+μ)/(L−μ))⌉` iterations to reach `‖x_k − x*‖ ≤ ε`.
pub fn gd_iterations(l: f64, mu: f64, r: f64, eps: f64) -> Result<u64> {
    check_lmu(l, mu)?;
    check_nonneg("R", r)?;
    check_pos("eps", eps)?;
    if r <= eps {
        return Ok(0);
    }
    if l == mu {
        return Ok(1);
    }
    Ok(((r / eps).ln() / ((l + mu) / (l - mu)).ln()).ceil() as u64)
}

/// `(L+μ)/2 · R² · κ^m · (1 − 1/√κ)^N` with `κ = L/μ`.
pub fn nesterov_tv_bound(l: f64, mu: f64, r: f64, m: u64, n: u64) -> Result<f64> {
    check_lmu(l, mu)?;
    let kappa = l / mu;
    let rate = 1.0 - 1.0 / kappa.sqrt();
    Ok((l + mu) / 2.0 * r * r * kappa.powf(m as f64) * rate.powf(n as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Complexity {
    pub iterations: u64,
    /// Largest admissible change fraction `1/(√κ ln κ)`; `None` when unbounded.
    pub alpha_ceiling: Option<f64>,
    /// `α` lies below the ceiling.
    pub feasible: bool,
    pub log_term: f64,
}

/// Iterations `⌈(√κ + α ln κ) · ln((L+μ)R²/(2ε))⌉` for the accelerated
/// dual method on a schedule changing at a fraction `α` of iterations.
pub fn alg1_complexity(kappa: f64, l: f64, mu: f64, r: f64, eps: f64, alpha: f64) -> Result<Complexity> {
    check_lmu(l, mu)?;
    check_nonneg("R", r)?;
    check_pos("eps", eps)?;
    alg1_complexity_from_log_term(kappa, ((l + mu) * r * r / (2.0 * eps)).ln(), alpha)
}

/// Same as [`alg1_complexity`] with the logarithmic factor supplied directly.
pub fn alg1_complexity_from_log_term(kappa: f64, log_term: f64, alpha: f64) -> Result<Complexity> {
    if !(kappa >= 1.0) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
            range: "[1, inf)".into(),
        });
    }
    check_nonneg("alpha", alpha)?;
    if log_term.is_nan() {
        return Err(Error::InvalidArgument("log term is NaN".into()));
    }
    let alpha_ceiling = alpha_ceiling(kappa);
    let feasible = alpha_ceiling.is_none_or(|c| alpha < c);
    let raw = (kappa.sqrt() + alpha * kappa.ln()) * log_term;
    Ok(Complexity {
        iterations: if raw > 0.0 { raw.ceil() as u64 } else { 0 },
        alpha_ceiling,
        feasible,
        log_term,
    })
}

/// `1/(√κ ln κ)`, or `None` for `κ = 1`.
pub fn alpha_ceiling(kappa: f64) -> Option<f64> {
    let ln = kappa.ln();
    (ln > 0.0).then(|| 1.0 / (kappa.sqrt() * ln))
}

/// Primal gap implied by a dual gap `ε`: `2κε + L‖X*‖√(2ε/μ)`.
pub fn primal_from_dual_bound(eps: f64, kappa: f64, l: f64, mu: f64, norm_xstar: f64) -> Result<f64> {
    check_nonneg("eps", eps)?;
    check_nonneg("kappa", kappa)?;
    check_nonneg("L", l)?;
    check_pos("mu", mu)?;
    check_nonneg("norm_xstar", norm_xstar)?;
    Ok(2.0 * kappa * eps + l * norm_xstar * (2.0 * eps / mu).sqrt())
}

/// Allowed rounding in [`delta_bound_check`].
pub const DELTA_SLACK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaReport {
    /// Smallest `((L−μ)/μ)(f_k(x) − f*) − (f_next(x) − f_k(x))` over the points.
    pub worst_slack: f64,
    pub worst_index: Option<usize>,
    pub holds: bool,
}

/// Checks `f_next(x) − f_k(x) ≤ ((L−μ)/μ)(f_k(x) − f*)` at every point.
pub fn delta_bound_check<F, G>(
    f_k: F,
    f_next: G,
    f_star: f64,
    l: f64,
    mu: f64,
    points: &[Vec<f64>],
) -> Result<DeltaReport>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    check_lmu(l, mu)?;
    let factor = (l - mu) / mu;
    let mut worst_slack = f64::INFINITY;
    let mut worst_index = None;
    for (i, x) in points.iter().enumerate() {
        let fk = f_k(x);
        let slack = factor * (fk - f_star) - (f_next(x) - fk);
        if slack < worst_slack || slack.is_nan() {
            worst_slack = slack;
            worst_index = Some(i);
        }
    }
    Ok(DeltaReport {
        worst_slack,
        worst_index,
        holds: worst_index.is_none() || worst_slack >= -DELTA_SLACK_TOLERANCE,
    })
}

/// `J = 3√κ̄ B² (1 + 4√n √κ̄)`.
pub fn diging_j(kappa_bar: f64, n: usize, b: usize) -> f64 {
    let s = kappa_bar.sqrt();
    3.0 * s * (b * b) as f64 * (1.0 + 4.0 * (n as f64).sqrt() * s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DigingRates {
    /// `1 − 1/(12 κ̄^{3/2} √n)`, the best rate the gradient-tracking analysis can give.
    pub lambda0: f64,
    pub j: f64,
    /// Step size where the two rate branches meet.
    pub alpha0: f64,
    /// Largest admissible step `1.5(1−δ)²/(μ̄J)`.
    pub alpha_max: f64,
    pub lambda: Option<f64>,
}

/// Rates for gradient tracking with average strong convexity `μ̄`,
/// average condition number `κ̄`, window `B` and mixing gap `δ`.
pub fn diging_rates(
    kappa_bar: f64,
    n: usize,
    b: usize,
    delta: f64,
    mu_bar: f64,
    alpha: Option<f64>,
) -> Result<DigingRates> {
    if !(kappa_bar >= 1.0) {
        return Err(Error::OutOfRange {
            name: "kappa_bar",
            value: kappa_bar,
            range: "[1, inf)".into(),
        });
    }
    check_count("n", n)?;
    check_count("B", b)?;
    check_delta(delta)?;
    check_pos("mu_bar", mu_bar)?;
    let lambda0 = 1.0 - 1.0 / (12.0 * kappa_bar.powf(1.5) * (n as f64).sqrt());
    let j = diging_j(kappa_bar, n, b);
    let root = (j * j + (1.0 - delta * delta) * j).sqrt() - delta * j;
    let alpha0 = 1.5 * root * root / (mu_bar * j * (j + 1.0).powi(2));
    let alpha_max = 1.5 * (1.0 - delta).powi(2) / (mu_bar * j);
    let lambda = match alpha {
        None => None,
        Some(a) if !(a > 0.0 && a <= alpha_max) => {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: a,
                range: format!("(0, {alpha_max:e}]"),
            })
        }
        Some(a) if a <= alpha0 => Some((1.0 - a * mu_bar / 1.5).powf(1.0 / (2.0 * b as f64))),
        Some(a) => Some(((a * mu_bar * j / 1.5).sqrt() + delta).powf(1.0 / b as f64)),
    };
    Ok(DigingRates {
        lambda0,
        j,
        alpha0,
        alpha_max,
        lambda,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PandaRates {
    /// `1 − (9/64) κ^{−3/2}`.
    pub lambda0: f64,
    /// Step-size bound `2√κ μ ((√((1−δ²)κ^{−2/3} + 8) − 8δ)/(κ^{−3/2} + 8))²`.
    pub alpha: f64,
    /// `(1 − c/(2L))^{1/(2B)}`.
    pub lambda: Option<f64>,
}

/// Rates for the primal-dual tracking method, formulas taken verbatim
/// (including the mixed `κ^{−2/3}`, `κ^{−3/2}` exponents).
pub fn panda_rates(kappa: f64, l: f64, mu: f64, delta: f64, b: usize, c: Option<f64>) -> Result<PandaRates> {
    if !(kappa >= 1.0) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
            range: "[1, inf)".into(),
        });
    }
    check_pos("L", l)?;
    check_pos("mu", mu)?;
    check_delta(delta)?;
    check_count("B", b)?;
    let lambda0 = 1.0 - 9.0 / 64.0 * kappa.powf(-1.5);
    let ratio = (((1.0 - delta * delta) * kappa.powf(-2.0 / 3.0) + 8.0).sqrt() - 8.0 * delta)
        / (kappa.powf(-1.5) + 8.0);
    let alpha = 2.0 * kappa.sqrt() * mu * ratio * ratio;
    let lambda = match c {
        None => None,
        Some(c) if !(c > 0.0 && c <= alpha && c < 2.0 * l) => {
            return Err(Error::OutOfRange {
                name: "c",
                value: c,
                range: format!("(0, {:e}]", alpha.min(2.0 * l)),
            })
        }
        Some(c) => Some((1.0 - c / (2.0 * l)).powf(1.0 / (2.0 * b as f64))),
    };
    Ok(PandaRates { lambda0, alpha, lambda })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StaticComparison {
    pub favors_alg1: bool,
    /// `(λ₂(1−λ₂))^{3/2}/250 · √χ`
    pub lhs: f64,
    /// `κ_Φ^{3/14}`
    pub rhs: f64,
}

/// Compares the time-varying accelerated rate with the accelerated static-network rate
/// `1 − C κ_Φ^{−5/7}`, `C = (λ₂(1−λ₂))^{3/2}/250`.
pub fn static_nesterov_comparison(lambda2: f64, kappa_phi: f64, chi: f64) -> Result<StaticComparison> {
    if !(0.0..=1.0).contains(&lambda2) {
        return Err(Error::OutOfRange {
            name: "lambda2",
            value: lambda2,
            range: "[0, 1]".into(),
        });
    }
    for (name, v) in [("kappa_phi", kappa_phi), ("chi", chi)] {
        if !(v >= 1.0) {
            return Err(Error::OutOfRange {
                name,
                value: v,
                range: "[1, inf)".into(),
            });
        }
    }
    let lhs = (lambda2 * (1.0 - lambda2)).powf(1.5) / 250.0 * chi.sqrt();
    let rhs = kappa_phi.powf(3.0 / 14.0);
    Ok(StaticComparison {
        favors_alg1: lhs < rhs,
        lhs,
        rhs,
    })
}

/// Per-iteration rate `1 − 1/(κ_Φ^{1/2} (θ_max/θ_min)^{1/4})` of the accelerated dual method.
pub fn nesterov_rate(kappa_phi: f64, theta_max: f64, theta_min: f64) -> Result<f64> {
    check_pos("kappa_phi", kappa_phi)?;
    check_pos("theta_min", theta_min)?;
    check_pos("theta_max", theta_max)?;
    Ok(1.0 - 1.0 / (kappa_phi.sqrt() * (theta_max / theta_min).powf(0.25)))
}

/// One evaluated bound with the constants that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: Vec<(String, f64)>,
    /// Bound value, rate, or iteration count.
    pub value: f64,
    /// Secondary outputs such as step-size ceilings.
    pub outputs: Vec<(String, f64)>,
    /// Set when `value` is infinite or the inputs fall outside the regime
    /// where the bound is guaranteed.
    pub degenerate: bool,
    pub warning: Option<String>,
    /// Comparison against a measured quantity, when one was supplied.
    pub satisfied: Option<bool>,
}

impl BoundReport {
    fn new(name: &str, inputs: Vec<(&str, f64)>, value: f64) -> Self {
        BoundReport {
            name: name.to_string(),
            inputs: inputs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            value,
            outputs: Vec::new(),
            degenerate: !value.is_finite(),
            warning: None,
            satisfied: None,
        }
    }

    fn output(mut self, name: &str, value: f64) -> Self {
        self.outputs.push((name.to_string(), value));
        self
    }

    /// Marks whether `measured ≤ value`.
    pub fn compare(mut self, measured: f64) -> Self {
        self.satisfied = Some(measured <= self.value);
        self
    }
}

/// Names accepted by [`evaluate`] with their required constants.
pub const BOUNDS: &[(&str, &[&str])] = &[
    ("gd-rate", &["L", "mu"]),
    ("gd-iterations", &["L", "mu", "R", "eps"]),
    ("nesterov-tv", &["L", "mu", "R", "m", "N"]),
    ("complexity", &["kappa", "alpha"]),
    ("primal-from-dual", &["eps", "kappa", "L", "mu", "norm_xstar"]),
    ("diging", &["kappa_bar", "n"]),
    ("panda", &["kappa"]),
    ("static-comparison", &["lambda2", "kappa_phi", "chi"]),
    ("nesterov-rate", &["kappa_phi", "theta_max", "theta_min"]),
];

/// Canonical constant name for common spellings (`κ`, `ε`, `α`, ...).
pub fn canonical_constant(name: &str) -> &str {
    match name {
        "κ" => "kappa",
        "κ̄" | "kbar" => "kappa_bar",
        "κ_Φ" | "κΦ" => "kappa_phi",
        "μ" => "mu",
        "μ̄" => "mu_bar",
        "ε" => "eps",
        "α" => "alpha",
        "δ" => "delta",
        "χ" => "chi",
        "λ2" | "λ₂" => "lambda2",
        "θ_max" | "θmax" => "theta_max",
        "θ_min" | "θmin" => "theta_min",
        "‖X*‖" | "xstar" => "norm_xstar",
        "l" => "L",
        "r" => "R",
        other => other,
    }
}

/// Evaluates the bound `name` from named constants.
///
/// Optional constants: `mu_bar`, `B`, `delta`, `alpha` for `diging`;
/// `L`, `mu`, `delta`, `B`, `c` for `panda`; `logterm` or `L`, `mu`, `R`,
/// `eps` for `complexity`.
pub fn evaluate(name: &str, constants: &BTreeMap<String, f64>) -> Result<BoundReport> {
    let Some((_, required)) = BOUNDS.iter().find(|(n, _)| *n == name) else {
        return Err(Error::UnknownBound {
            name: name.to_string(),
            valid: BOUNDS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
        });
    };
    let get = |key: &str| -> Result<f64> {
        constants.get(key).copied().ok_or_else(|| Error::MissingConstant {
            bound: name.to_string(),
            name: key.to_string(),
        })
    };
    for key in *required {
        get(key)?;
    }
    let opt = |key: &str| constants.get(key).copied();
    let count = |key: &str| -> Result<u64> {
        let v = get(key)?;
        if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{key} must be a nonnegative integer, got {v}")));
        }
        Ok(v as u64)
    };

    let report = match name {
        "gd-rate" => {
            let (l, mu) = (get("L")?, get("mu")?);
            BoundReport::new(name, vec![("L", l), ("mu", mu)], gd_rate(l, mu)?)
                .output("rate_step_inv_l", gd_rate_step_inv_l(l, mu)?)
        }
        "gd-iterations" => {
            let (l, mu, r, eps) = (get("L")?, get("mu")?, get("R")?, get("eps")?);
            let n = gd_iterations(l, mu, r, eps)?;
            BoundReport::new(name, vec![("L", l), ("mu", mu), ("R", r), ("eps", eps)], n as f64)
        }
        "nesterov-tv" => {
            let (l, mu, r) = (get("L")?, get("mu")?, get("R")?);
            let (m, n) = (count("m")?, count("N")?);
            let v = nesterov_tv_bound(l, mu, r, m, n)?;
            BoundReport::new(
                name,
                vec![("L", l), ("mu", mu), ("R", r), ("m", m as f64), ("N", n as f64)],
                v,
            )
        }
        "complexity" => {
            let (kappa, alpha) = (get("kappa")?, get("alpha")?);
            let (c, inputs) = match opt("logterm") {
                Some(t) => (
                    alg1_complexity_from_log_term(kappa, t, alpha)?,
                    vec![("kappa", kappa), ("alpha", alpha), ("logterm", t)],
                ),
                None => {
                    let (l, mu, r, eps) = (get("L")?, get("mu")?, get("R")?, get("eps")?);
                    (
                        alg1_complexity(kappa, l, mu, r, eps, alpha)?,
                        vec![("kappa", kappa), ("alpha", alpha), ("L", l), ("mu", mu), ("R", r), ("eps", eps)],
                    )
                }
            };
            let mut rep = BoundReport::new(name, inputs, c.iterations as f64)
                .output("alpha_ceiling", c.alpha_ceiling.unwrap_or(f64::INFINITY));
            if !c.feasible {
                rep.degenerate = true;
                rep.warning = Some(format!(
                    "alpha = {alpha} is not below the ceiling {}; convergence is not guaranteed",
                    c.alpha_ceiling.unwrap_or(f64::INFINITY)
                ));
            }
            rep
        }
        "primal-from-dual" => {
            let (eps, kappa, l, mu, x) = (get("eps")?, get("kappa")?, get("L")?, get("mu")?, get("norm_xstar")?);
            BoundReport::new(
                name,
                vec![("eps", eps), ("kappa", kappa), ("L", l), ("mu", mu), ("norm_xstar", x)],
                primal_from_dual_bound(eps, kappa, l, mu, x)?,
            )
        }
        "diging" => {
            let kappa_bar = get("kappa_bar")?;
            let n = count("n")? as usize;
            let b = opt("B").map(|_| count("B")).transpose()?.unwrap_or(1) as usize;
            let delta = opt("delta").unwrap_or(0.0);
            let mu_bar = opt("mu_bar").unwrap_or(1.0);
            let r = diging_rates(kappa_bar, n, b, delta, mu_bar, opt("alpha"))?;
            let mut rep = BoundReport::new(
                name,
                vec![
                    ("kappa_bar", kappa_bar),
                    ("n", n as f64),
                    ("B", b as f64),
                    ("delta", delta),
                    ("mu_bar", mu_bar),
                ],
                r.lambda0,
            )
            .output("J", r.j)
            .output("alpha0", r.alpha0)
            .output("alpha_max", r.alpha_max);
            if let Some(l) = r.lambda {
                rep = rep.output("lambda", l);
            }
            rep
        }
        "panda" => {
            let kappa = get("kappa")?;
            let mu = opt("mu").unwrap_or(1.0);
            let l = opt("L").unwrap_or(kappa * mu);
            let delta = opt("delta").unwrap_or(0.0);
            let b = opt("B").map(|_| count("B")).transpose()?.unwrap_or(1) as usize;
            let r = panda_rates(kappa, l, mu, delta, b, opt("c"))?;
            let mut rep = BoundReport::new(
                name,
                vec![("kappa", kappa), ("L", l), ("mu", mu), ("delta", delta), ("B", b as f64)],
                r.lambda0,
            )
            .output("alpha", r.alpha);
            if let Some(l) = r.lambda {
                rep = rep.output("lambda", l);
            }
            rep
        }
        "static-comparison" => {
            let (l2, k, chi) = (get("lambda2")?, get("kappa_phi")?, get("chi")?);
            let c = static_nesterov_comparison(l2, k, chi)?;
            BoundReport::new(name, vec![("lambda2", l2), ("kappa_phi", k), ("chi", chi)], c.lhs)
                .output("rhs", c.rhs)
                .output("favors_time_varying", if c.favors_alg1 { 1.0 } else { 0.0 })
        }
        "nesterov-rate" => {
            let (k, tmax, tmin) = (get("kappa_phi")?, get("theta_max")?, get("theta_min")?);
            BoundReport::new(
                name,
                vec![("kappa_phi", k), ("theta_max", tmax), ("theta_min", tmin)],
                nesterov_rate(k, tmax, tmin)?,
            )
        }
        _ => unreachable!("name validated against BOUNDS"),
    };
    Ok(report)
}

fn check_lmu(l: f64, mu: f64) -> Result<()> {
    check_pos("mu", mu)?;
    if !(l >= mu && l.is_finite()) {
        return Err(Error::OutOfRange {
            name: "L",
            value: l,
            range: format!("[mu = {mu}, inf)"),
        });
    }
    Ok(())
}

fn check_pos(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            range: "(0, inf)".into(),
        })
    }
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            range: "[0, inf)".into(),
        })
    }
}

fn check_count(name: &'static str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v as f64,
            range: "[1, inf)".into(),
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            range: "[0, 1)".into(),
        })
    }
}
