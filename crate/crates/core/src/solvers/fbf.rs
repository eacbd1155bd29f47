//! Forward-backward-forward primal-dual iterations.
//!
//! Both models are split as `f1(w) + f2(Kw) + f3(w)` with
//! `f1 = indicator{w >= 0} + 2 w'z` handled by its prox, `f2` handled through
//! the prox of its conjugate, and `f3` smooth. One iteration is
//!
//! ```text
//! y  = w - g (grad f3(w) + K'd)      ybar = d + g K w
//! p  = prox_{g f1}(y)                pbar = prox_{g f2*}(ybar)
//! q  = p - g (grad f3(p) + K'pbar)   qbar = pbar + g K p
//! w <- w - y + q                     d   <- d - ybar + qbar
//! ```
//!
//! The correction uses `K'pbar` (the dual candidate) and the primal update
//! takes `q`; both follow the generic scheme and keep every term in the
//! right space. Convergence requires `g < 1 / (zeta + ||K||)`.
//!
//! The returned weights are the last `p`: it is feasible, exactly sparse,
//! and coincides with `w` at the fixed point.

use super::{objective_value, DualState, LipschitzRule, Model, SolverConfig, SolverResult};
use crate::error::{Error, Result};
use crate::graph::{degree_adjoint_into, degree_map_into, edge_count, DistanceVector, EdgeVector};
use crate::solvers::prox::prox_conjugate_log_barrier_scalar;

const STEP_SAFETY: f64 = 0.99;

/// `||new - old|| / max(||old||, ||new||)`, zero when both vanish.
///
/// Dividing by `||old||` alone makes the first step away from a zero start
/// look small whenever the step size is small.
fn relative_change(diff_norm: f64, old_norm: f64, new_norm: f64) -> f64 {
    let scale = old_norm.max(new_norm);
    if scale > 0.0 {
        diff_norm / scale
    } else {
        diff_norm
    }
}

fn initial_weights(cfg: &SolverConfig, ne: usize) -> Result<Vec<f64>> {
    match &cfg.initial_weights {
        None => Ok(vec![0.0; ne]),
        Some(w) if w.len() == ne => Ok(w.clone()),
        Some(w) => Err(Error::DimensionMismatch {
            expected: ne,
            actual: w.len(),
        }),
    }
}

/// Solves the log-degree model by forward-backward-forward splitting.
///
/// Starts from `w = 0` (or `cfg.initial_weights`) and `d = 1`. Hitting the
/// iteration cap is reported through `converged = false`.
pub fn learn_log_degree(z: &DistanceVector, alpha: f64, beta: f64, cfg: &SolverConfig) -> Result<SolverResult> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::validation(format!("log-degree alpha must be positive, got {alpha}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::validation(format!("log-degree beta must be >= 0, got {beta}")));
    }
    cfg.validate()?;
    let m = z.nodes();
    if m < 2 {
        return Err(Error::validation("need at least two nodes"));
    }
    let ne = edge_count(m);
    let zv = z.values();
    let model = Model::LogDegree { alpha, beta };

    let zeta = 2.0 * beta;
    let norm_k = (2.0 * (m as f64 - 1.0)).sqrt();
    let g = cfg.step.unwrap_or(STEP_SAFETY / (zeta + norm_k));

    let mut w = initial_weights(cfg, ne)?;
    let mut d = vec![1.0; m];
    let mut p = vec![0.0; ne];
    let mut pbar = vec![0.0; m];
    let mut ybar = vec![0.0; m];
    let mut y = vec![0.0; ne];
    let mut edge_buf = vec![0.0; ne];
    let mut node_buf = vec![0.0; m];

    let mut result = Trace::default();
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iterations {
        iterations = it;
        // forward step
        degree_adjoint_into(m, &d, &mut edge_buf);
        degree_map_into(m, &w, &mut node_buf);
        for k in 0..ne {
            y[k] = w[k] - g * (zeta * w[k] + edge_buf[k]);
            p[k] = (y[k] - 2.0 * g * zv[k]).max(0.0);
        }
        for i in 0..m {
            ybar[i] = d[i] + g * node_buf[i];
            pbar[i] = prox_conjugate_log_barrier_scalar(ybar[i], alpha, g);
        }

        // correction: q = p - g(2 beta p + S'pbar), qbar = pbar + g Sp
        degree_adjoint_into(m, &pbar, &mut edge_buf);
        let (mut dw, mut wn, mut wn_next) = (0.0, 0.0, 0.0);
        for k in 0..ne {
            let q = p[k] - g * (zeta * p[k] + edge_buf[k]);
            let next = w[k] - y[k] + q;
            let delta = next - w[k];
            dw += delta * delta;
            wn += w[k] * w[k];
            wn_next += next * next;
            w[k] = next;
        }
        degree_map_into(m, &p, &mut node_buf);
        let (mut dd, mut dn, mut dn_next) = (0.0, 0.0, 0.0);
        for i in 0..m {
            let next = d[i] - ybar[i] + pbar[i] + g * node_buf[i];
            let delta = next - d[i];
            dd += delta * delta;
            dn += d[i] * d[i];
            dn_next += next * next;
            d[i] = next;
        }

        let rw = relative_change(dw.sqrt(), wn.sqrt(), wn_next.sqrt());
        let rd = relative_change(dd.sqrt(), dn.sqrt(), dn_next.sqrt());
        if !(rw.is_finite() && rd.is_finite()) {
            return Err(Error::NonFinite {
                solver: "log-degree",
                iteration: it,
            });
        }
        result.rel_change.push(rw.max(rd));
        if cfg.trace_interval > 0 && it % cfg.trace_interval == 0 {
            result.objective.push(objective_value(&model, z, &EdgeVector::from_vec_unchecked(m, p.clone()))?);
        }
        if rw < cfg.tolerance && rd < cfg.tolerance {
            converged = true;
            break;
        }
    }

    let weights = EdgeVector::from_vec_unchecked(m, p);
    finish(model, z, weights, DualState::Degrees(d), iterations, converged, g, result)
}

/// Solves the l2-degree model `2w'z + alpha(2||w||^2 + ||Sw||^2)` subject to
/// `w >= 0`, `2 1'w = s`.
///
/// The scale constraint enters through `K = 2 1'` with a scalar dual
/// started at `c = s`. The returned weights are rescaled to satisfy the
/// constraint exactly; at convergence the factor is `1 + O(tolerance)`.
pub fn learn_l2_degree(z: &DistanceVector, alpha: f64, s: f64, cfg: &SolverConfig) -> Result<SolverResult> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::validation(format!("l2-degree alpha must be >= 0, got {alpha}")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::validation(format!("l2-degree scale must be positive, got {s}")));
    }
    cfg.validate()?;
    let m = z.nodes();
    if m < 2 {
        return Err(Error::validation("need at least two nodes"));
    }
    let ne = edge_count(m);
    let zv = z.values();
    let model = Model::L2Degree { alpha, s };

    let mf = m as f64;
    let zeta = match cfg.lipschitz {
        LipschitzRule::Safe => (2.0 * alpha * (mf + 1.0)).max(4.0 * alpha * mf),
        LipschitzRule::Published => 2.0 * alpha * (mf + 1.0),
    };
    let norm_k = 2.0 * (ne as f64).sqrt();
    let g = cfg.step.unwrap_or(STEP_SAFETY / (zeta + norm_k));

    let mut w = initial_weights(cfg, ne)?;
    let mut c = s;
    let mut p = vec![0.0; ne];
    let mut y = vec![0.0; ne];
    let mut grad = vec![0.0; ne];
    let mut node_buf = vec![0.0; m];

    // grad = alpha (4 v + 2 S'S v)
    let smooth_grad = |v: &[f64], node_buf: &mut [f64], grad: &mut [f64]| {
        degree_map_into(m, v, node_buf);
        degree_adjoint_into(m, node_buf, grad);
        for (gk, vk) in grad.iter_mut().zip(v) {
            *gk = alpha * (4.0 * vk + 2.0 * *gk);
        }
    };

    let mut result = Trace::default();
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iterations {
        iterations = it;
        smooth_grad(&w, &mut node_buf, &mut grad);
        let mut sum_w = 0.0;
        let mut sum_p = 0.0;
        for k in 0..ne {
            sum_w += w[k];
            y[k] = w[k] - g * (grad[k] + 2.0 * c);
            p[k] = (y[k] - 2.0 * g * zv[k]).max(0.0);
            sum_p += p[k];
        }
        let ybar = c + g * 2.0 * sum_w;
        let pbar = ybar - g * s;
        let qbar = pbar + g * 2.0 * sum_p;

        smooth_grad(&p, &mut node_buf, &mut grad);
        let (mut dw, mut wn, mut wn_next) = (0.0, 0.0, 0.0);
        for k in 0..ne {
            let q = p[k] - g * (grad[k] + 2.0 * pbar);
            let next = w[k] - y[k] + q;
            let delta = next - w[k];
            dw += delta * delta;
            wn += w[k] * w[k];
            wn_next += next * next;
            w[k] = next;
        }
        let c_next = c - ybar + qbar;
        let rw = relative_change(dw.sqrt(), wn.sqrt(), wn_next.sqrt());
        let rc = relative_change((c_next - c).abs(), c.abs(), c_next.abs());
        c = c_next;

        if !(rw.is_finite() && rc.is_finite()) {
            return Err(Error::NonFinite {
                solver: "l2-degree",
                iteration: it,
            });
        }
        result.rel_change.push(rw.max(rc));
        if cfg.trace_interval > 0 && it % cfg.trace_interval == 0 {
            result.objective.push(objective_value(&model, z, &EdgeVector::from_vec_unchecked(m, p.clone()))?);
        }
        if rw < cfg.tolerance && rc < cfg.tolerance {
            converged = true;
            break;
        }
    }

    let total = 2.0 * p.iter().sum::<f64>();
    if total > 0.0 {
        let f = s / total;
        p.iter_mut().for_each(|x| *x *= f);
    }
    let weights = EdgeVector::from_vec_unchecked(m, p);
    finish(model, z, weights, DualState::Scale(c), iterations, converged, g, result)
}

/// Log-degree model at `alpha = 1`; any other `alpha` is a rescaling of this one.
pub fn scale_to_unit_alpha(z: &DistanceVector, beta_eff: f64, cfg: &SolverConfig) -> Result<SolverResult> {
    learn_log_degree(z, 1.0, beta_eff, cfg)
}

#[derive(Default)]
struct Trace {
    objective: Vec<f64>,
    rel_change: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn finish(
    model: Model,
    z: &DistanceVector,
    weights: EdgeVector,
    dual: DualState,
    iterations: usize,
    converged: bool,
    step: f64,
    trace: Trace,
) -> Result<SolverResult> {
    let m = weights.nodes();
    let mut degrees = vec![0.0; m];
    degree_map_into(m, weights.weights(), &mut degrees);
    let final_objective = objective_value(&model, z, &weights)?;
    let mut objective_trace = trace.objective;
    objective_trace.push(final_objective);
    Ok(SolverResult {
        weights,
        degrees,
        dual,
        iterations,
        converged,
        step,
        final_objective,
        objective_trace,
        rel_change_trace: trace.rel_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> SolverConfig {
        SolverConfig::default().with_tolerance(1e-12).with_max_iterations(200_000)
    }

    #[test]
    fn single_edge_log_degree() {
        // -2 alpha / w + 2 beta w = 0  =>  w = sqrt(alpha / beta)
        let z = DistanceVector::new(2, vec![0.0]).unwrap();
        let r = learn_log_degree(&z, 1.0, 1.0, &tight()).unwrap();
        assert!(r.converged);
        assert!((r.weights.weights()[0] - 1.0).abs() < 1e-8, "{:?}", r.weights);
        let r = learn_log_degree(&z, 4.0, 1.0, &tight()).unwrap();
        assert!((r.weights.weights()[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn l2_degree_linear_program_limit() {
        let z = DistanceVector::new(4, vec![3.0, 0.5, 2.0, 1.0, 4.0, 0.9]).unwrap();
        let r = learn_l2_degree(&z, 0.0, 10.0, &tight()).unwrap();
        let w = r.weights.weights();
        assert!((w[1] - 5.0).abs() < 1e-6, "{w:?}");
        assert!(w.iter().enumerate().all(|(k, &x)| k == 1 || x < 1e-6));
    }

    #[test]
    fn rejects_bad_parameters() {
        let z = DistanceVector::new(3, vec![1.0; 3]).unwrap();
        let cfg = SolverConfig::default();
        assert!(learn_log_degree(&z, 0.0, 1.0, &cfg).is_err());
        assert!(learn_log_degree(&z, 1.0, -1.0, &cfg).is_err());
        assert!(learn_l2_degree(&z, 1.0, 0.0, &cfg).is_err());
        assert!(learn_l2_degree(&z, -1.0, 1.0, &cfg).is_err());
        let bad_init = SolverConfig {
            initial_weights: Some(vec![0.0; 2]),
            ..Default::default()
        };
        assert!(learn_log_degree(&z, 1.0, 1.0, &bad_init).is_err());
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let z = DistanceVector::new(3, vec![1.0, 2.0, 3.0]).unwrap();
        let cfg = SolverConfig::default().with_tolerance(0.0).with_max_iterations(5);
        let r = learn_log_degree(&z, 1.0, 1.0, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
        assert_eq!(r.rel_change_trace.len(), 5);
        let r = learn_l2_degree(&z, 1.0, 1.0, &cfg).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn huge_step_is_caught() {
        let z = DistanceVector::new(5, (0..10).map(|k| k as f64).collect()).unwrap();
        let cfg = SolverConfig {
            step: Some(1e150),
            max_iterations: 1000,
            ..Default::default()
        };
        match learn_l2_degree(&z, 1.0, 1.0, &cfg) {
            Err(Error::NonFinite { iteration, .. }) => assert!(iteration >= 1),
            other => panic!("expected a non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn objective_trace_interval() {
        let z = DistanceVector::new(4, vec![1.0, 2.0, 3.0, 1.5, 0.5, 2.5]).unwrap();
        let cfg = SolverConfig {
            trace_interval: 10,
            tolerance: 0.0,
            max_iterations: 100,
            ..Default::default()
        };
        let r = learn_log_degree(&z, 1.0, 0.5, &cfg).unwrap();
        assert_eq!(r.objective_trace.len(), 11);
        assert_eq!(*r.objective_trace.last().unwrap(), r.final_objective);
    }
}
