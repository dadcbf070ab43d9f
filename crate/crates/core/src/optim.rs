//! Adam / Nadam with box projection, shared by the pulse and QAOA optimizers.

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Adam,
    Nadam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// Central finite differences, two objective evaluations per coordinate.
    CentralDifference,
    /// Analytic gradient supplied by the objective (where available).
    Adjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_steps: usize,
    pub gradient: GradientMethod,
    /// Finite-difference step relative to `max(|x|, 1)`.
    pub fd_step: f64,
    /// Stop when the largest gradient component falls below this.
    pub convergence_tol: f64,
    /// Stop after this many steps without a relative improvement of 1e-9 in the
    /// best cost; 0 disables the check.
    pub patience: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Nadam,
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_steps: 100,
            gradient: GradientMethod::CentralDifference,
            fd_step: 1e-4,
            convergence_tol: 1e-8,
            patience: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(input_err!("beta1 and beta2 must lie in (0, 1)"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(input_err!("learning rate must be non-negative"));
        }
        if !(self.epsilon > 0.0 && self.fd_step > 0.0) {
            return Err(input_err!("epsilon and fd_step must be positive"));
        }
        Ok(())
    }
}

/// Per-coordinate box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(input_err!("bounds must pair up with lower <= upper"));
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*l, *u);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lower.len() && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| v >= l && v <= u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best_x: Vec<f64>,
    pub best_cost: f64,
    /// Cost at the start of each step (the first entry is the initial point).
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Objective with optional analytic gradient.
pub trait Objective {
    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Value and gradient. The default uses central differences with step
    /// `fd_step·max(|x_i|, 1)`, reflected inward at the box edges.
    fn value_and_gradient(&self, x: &[f64], cfg: &OptimizerConfig, bounds: &Bounds) -> Result<(f64, Vec<f64>)> {
        let f0 = self.value(x)?;
        Ok((f0, central_difference(|y| self.value(y), x, cfg.fd_step, bounds)?))
    }
}

impl<F: Fn(&[f64]) -> Result<f64>> Objective for F {
    fn value(&self, x: &[f64]) -> Result<f64> {
        self(x)
    }
}

/// Central-difference gradient; coordinates at a bound use a one-sided-safe
/// shifted stencil so no evaluation leaves the box.
pub fn central_difference(
    f: impl Fn(&[f64]) -> Result<f64>,
    x: &[f64],
    rel_step: f64,
    bounds: &Bounds,
) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(1.0);
        let mut center = x[i];
        center = center.max(bounds.lower[i] + h).min(bounds.upper[i] - h);
        if bounds.upper[i] - bounds.lower[i] < 2.0 * h {
            continue;
        }
        y[i] = center + h;
        let fp = f(&y)?;
        y[i] = center - h;
        let fm = f(&y)?;
        y[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Minimizes `objective` from `x0`, projecting onto `bounds` after each step.
/// Returns the best point seen.
pub fn minimize(objective: &dyn Objective, x0: &[f64], bounds: &Bounds, cfg: &OptimizerConfig) -> Result<OptimizeResult> {
    cfg.validate()?;
    if bounds.lower.len() != x0.len() {
        return Err(input_err!("bounds dimension does not match the start point"));
    }
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let dim = x.len();
    let (mut m, mut v) = (vec![0.0; dim], vec![0.0; dim]);
    let mut best_x = x.clone();
    let mut best_cost = f64::INFINITY;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut stale = 0usize;

    for step in 1..=cfg.max_steps {
        let (f, g) = objective.value_and_gradient(&x, cfg, bounds)?;
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("objective or gradient is not finite at step {step} (x = {x:?})")));
        }
        trace.push(f);
        if f < best_cost - 1e-9 * best_cost.abs().max(1e-12) {
            stale = 0;
        } else {
            stale += 1;
        }
        if f < best_cost {
            best_cost = f;
            best_x.clone_from(&x);
        }
        // gradient components pushing outward at an active bound do not count
        let free_grad = g
            .iter()
            .zip(&x)
            .enumerate()
            .map(|(i, (gi, xi))| {
                let at_lo = *xi <= bounds.lower[i] && *gi > 0.0;
                let at_hi = *xi >= bounds.upper[i] && *gi < 0.0;
                if at_lo || at_hi {
                    0.0
                } else {
                    gi.abs()
                }
            })
            .fold(0.0, f64::max);
        if free_grad < cfg.convergence_tol || (cfg.patience > 0 && stale >= cfg.patience) {
            converged = true;
            break;
        }
        let t = step as i32;
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        for i in 0..dim {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let v_hat = v[i] / (1.0 - b2.powi(t));
            let m_hat = match cfg.algorithm {
                Algorithm::Adam => m[i] / (1.0 - b1.powi(t)),
                Algorithm::Nadam => b1 * m[i] / (1.0 - b1.powi(t + 1)) + (1.0 - b1) * g[i] / (1.0 - b1.powi(t)),
            };
            x[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
        bounds.project(&mut x);
    }
    if !converged && trace.len() == cfg.max_steps {
        // score the final iterate as well
        let f = objective.value(&x)?;
        if f < best_cost {
            best_cost = f;
            best_x.clone_from(&x);
        }
    }
    Ok(OptimizeResult {
        best_x,
        best_cost,
        trace,
        converged,
    })
}
