//! Graph-learning models and their primal-dual solvers.
//!
//! All models are stated in edge-vector form. With `z` the squared
//! distances and `S` the degree operator:
//!
//! * log-degree: `2 w'z - alpha 1'log(Sw) + beta ||w||^2`, `w >= 0`
//! * l2-degree: `2 w'z + alpha (2 ||w||^2 + ||Sw||^2)`, `w >= 0`, `2 1'w = s`
//! * Gaussian kernel: `w = exp(-z / (2 sigma^2))`, closed form
//!
//! `beta` is the coefficient of the edge-vector norm. The same penalty
//! written on the adjacency matrix, `beta_m ||W||_F^2`, has `beta = 2 beta_m`.

mod fbf;
pub mod prox;

pub use fbf::{learn_l2_degree, learn_log_degree, scale_to_unit_alpha};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{degree_adjoint_into, degree_map_into, DistanceVector, EdgeVector};

/// How the Lipschitz constant of the l2-degree smooth term is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LipschitzRule {
    /// `max(2 alpha (m+1), 4 alpha m)`, a valid bound for every `m`.
    #[default]
    Safe,
    /// `2 alpha (m+1)`; smaller than the true constant for `m > 1`.
    Published,
}

/// Iteration controls shared by both primal-dual solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolverConfig {
    /// Fixed step; `None` picks `0.99 / (zeta + ||K||)`.
    pub step: Option<f64>,
    /// Stop once the relative change of both primal and dual drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Record the objective every this many iterations (0: final value only).
    pub trace_interval: usize,
    pub lipschitz: LipschitzRule,
    /// Starting edge weights; zero when absent.
    #[serde(skip)]
    pub initial_weights: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step: None,
            tolerance: 1e-4,
            max_iterations: 100_000,
            trace_interval: 0,
            lipschitz: LipschitzRule::Safe,
            initial_weights: None,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = self.step {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::validation(format!("step must be positive, got {g}")));
            }
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::validation("tolerance must be nonnegative"));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("max iterations must be positive"));
        }
        Ok(())
    }
}

/// Final dual variable of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DualState {
    /// Node-space dual of the log-degree model (converges to `-alpha / Sw`).
    Degrees(Vec<f64>),
    /// Scalar dual of the l2-degree scale constraint.
    Scale(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverResult {
    pub weights: EdgeVector,
    /// `Sw` of the returned weights.
    pub degrees: Vec<f64>,
    pub dual: DualState,
    pub iterations: usize,
    pub converged: bool,
    pub step: f64,
    pub final_objective: f64,
    pub objective_trace: Vec<f64>,
    pub rel_change_trace: Vec<f64>,
}

/// A learning model with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "camelCase")]
pub enum Model {
    LogDegree { alpha: f64, beta: f64 },
    L2Degree { alpha: f64, s: f64 },
}

/// Objective of `model` at `w`.
///
/// The log-degree value is `+inf` when some degree is zero. The l2-degree
/// value omits the scale constraint and only sums the finite terms.
pub fn objective_value(model: &Model, z: &DistanceVector, w: &EdgeVector) -> Result<f64> {
    if z.nodes() != w.nodes() {
        return Err(Error::DimensionMismatch {
            expected: z.nodes(),
            actual: w.nodes(),
        });
    }
    let m = w.nodes();
    let fit: f64 = 2.0 * w.weights().iter().zip(z.values()).map(|(a, b)| a * b).sum::<f64>();
    let sq: f64 = w.weights().iter().map(|x| x * x).sum();
    let mut d = vec![0.0; m];
    degree_map_into(m, w.weights(), &mut d);
    Ok(match *model {
        Model::LogDegree { alpha, beta } => {
            if d.iter().any(|&x| x <= 0.0) {
                f64::INFINITY
            } else {
                fit - alpha * d.iter().map(|x| x.ln()).sum::<f64>() + beta * sq
            }
        }
        Model::L2Degree { alpha, .. } => {
            fit + alpha * (2.0 * sq + d.iter().map(|x| x * x).sum::<f64>())
        }
    })
}

/// Gradient of the smooth term `beta ||w||^2` of the log-degree model.
pub fn log_degree_smooth_gradient(w: &[f64], beta: f64) -> Vec<f64> {
    w.iter().map(|x| 2.0 * beta * x).collect()
}

/// Gradient of `alpha (2 ||w||^2 + ||Sw||^2)`: `alpha (4 w + 2 S'S w)`.
pub fn l2_degree_smooth_gradient(m: usize, w: &[f64], alpha: f64) -> Vec<f64> {
    let mut d = vec![0.0; m];
    degree_map_into(m, w, &mut d);
    let mut out = vec![0.0; w.len()];
    degree_adjoint_into(m, &d, &mut out);
    out.iter_mut()
        .zip(w)
        .for_each(|(o, x)| *o = alpha * (4.0 * x + 2.0 * *o));
    out
}

/// Uniform `[0, 1)` edge weights for a random starting point.
pub fn random_initial_weights(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = crate::seed::rng(seed);
    (0..crate::graph::edge_count(m)).map(|_| rng.random::<f64>()).collect()
}

/// Gaussian-kernel weights `exp(-z / (2 sigma^2))` on every pair.
pub fn gaussian_kernel(z: &DistanceVector, sigma: f64) -> Result<EdgeVector> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::validation(format!("sigma must be positive, got {sigma}")));
    }
    let denom = 2.0 * sigma * sigma;
    EdgeVector::new(z.nodes(), z.values().iter().map(|x| (-x / denom).exp()).collect())
}

/// Entropy-regularized objective minimized by the Gaussian kernel:
/// `sum_e w_e z_e + 2 sigma^2 w_e (log w_e - 1)`.
pub fn gaussian_kernel_objective(w: &[f64], z: &[f64], sigma: f64) -> f64 {
    let c = 2.0 * sigma * sigma;
    w.iter()
        .zip(z)
        .map(|(&x, &d)| {
            let entropy = if x > 0.0 { x * (x.ln() - 1.0) } else { 0.0 };
            x * d + c * entropy
        })
        .sum()
}
