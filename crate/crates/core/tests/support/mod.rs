//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the solver or operator code under test; every
//! quantity is rebuilt from dense matrices and plain loops.

#![allow(dead_code)]

use graphlearn::seed;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed_value: u64) -> ChaCha8Rng {
    seed::rng(seed_value)
}

/// Pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn pairs(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            out.push((i, j));
        }
    }
    out
}

/// Explicit `m x m(m-1)/2` degree operator.
pub fn degree_matrix(m: usize) -> DMatrix<f64> {
    let p = pairs(m);
    let mut s = DMatrix::zeros(m, p.len());
    for (e, &(i, j)) in p.iter().enumerate() {
        s[(i, e)] = 1.0;
        s[(j, e)] = 1.0;
    }
    s
}

pub fn adjacency(m: usize, w: &[f64]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m, m);
    for (e, &(i, j)) in pairs(m).iter().enumerate() {
        a[(i, j)] = w[e];
        a[(j, i)] = w[e];
    }
    a
}

pub fn laplacian(m: usize, w: &[f64]) -> DMatrix<f64> {
    let a = adjacency(m, w);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(m, a.row_iter().map(|r| r.sum())));
    d - a
}

/// Double loop over `||x_i - x_j||^2`.
pub fn naive_distances(x: &DMatrix<f64>) -> Vec<f64> {
    let m = x.nrows();
    pairs(m)
        .iter()
        .map(|&(i, j)| (0..x.ncols()).map(|k| (x[(i, k)] - x[(j, k)]).powi(2)).sum())
        .collect()
}

/// Largest singular value by power iteration on `S S'`.
pub fn power_norm(s: &DMatrix<f64>, iters: usize) -> f64 {
    let sst = s * s.transpose();
    let mut v = DVector::from_fn(sst.nrows(), |i, _| 1.0 + (i as f64) * 1e-3);
    let mut lambda = 0.0;
    for _ in 0..iters {
        let next = &sst * &v;
        lambda = next.norm() / v.norm();
        v = next.normalize();
    }
    lambda.sqrt()
}

pub fn log_objective(m: usize, z: &[f64], w: &[f64], alpha: f64, beta: f64) -> f64 {
    let d = degree_matrix(m) * DVector::from_column_slice(w);
    if d.iter().any(|&x| x <= 0.0) {
        return f64::INFINITY;
    }
    let fit: f64 = 2.0 * w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    fit - alpha * d.iter().map(|x| x.ln()).sum::<f64>() + beta * w.iter().map(|x| x * x).sum::<f64>()
}

pub fn l2_objective(m: usize, z: &[f64], w: &[f64], alpha: f64) -> f64 {
    let d = degree_matrix(m) * DVector::from_column_slice(w);
    let fit: f64 = 2.0 * w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    fit + alpha * (2.0 * w.iter().map(|x| x * x).sum::<f64>() + d.norm_squared())
}

/// Projected gradient with Armijo backtracking for the log-degree model.
///
/// Starts from all-ones weights and iterates until the projected-gradient
/// step stalls below `1e-14` relative.
pub fn oracle_log_degree(m: usize, z: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    let s = degree_matrix(m);
    let f = |w: &DVector<f64>| log_objective(m, z, w.as_slice(), alpha, beta);
    let zv = DVector::from_column_slice(z);
    let mut w = DVector::from_element(z.len(), 1.0);
    let mut step = 1.0;
    for _ in 0..2_000_000 {
        let d = &s * &w;
        let inv = d.map(|x| 1.0 / x);
        let grad = &zv * 2.0 - s.transpose() * inv * alpha + &w * (2.0 * beta);
        let fw = f(&w);
        step *= 2.0;
        let next = loop {
            let cand = (&w - &grad * step).map(|x| x.max(0.0));
            let fc = f(&cand);
            let decrease = grad.dot(&(&w - &cand)) - (&cand - &w).norm_squared() / (2.0 * step);
            if fc.is_finite() && fc <= fw - decrease + 1e-15 * fw.abs() {
                break cand;
            }
            step *= 0.5;
            if step < 1e-30 {
                break w.clone();
            }
        };
        let moved = (&next - &w).norm();
        w = next;
        if moved <= 1e-14 * w.norm().max(1e-300) {
            break;
        }
    }
    w.as_slice().to_vec()
}

/// Euclidean projection onto `{w >= 0, sum w = total}` (sort-based).
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - total) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Projected gradient onto the scaled simplex `2 1'w = s` for the l2-degree
/// model, fixed step `1 / (4 alpha m)`.
pub fn oracle_l2_degree(m: usize, z: &[f64], alpha: f64, s_total: f64) -> Vec<f64> {
    assert!(alpha > 0.0);
    let s = degree_matrix(m);
    let hess_norm = alpha * (4.0 + 2.0 * power_norm(&s, 200).powi(2));
    let step = 1.0 / hess_norm;
    let zv = DVector::from_column_slice(z);
    let mut w = DVector::from_element(z.len(), s_total / (2.0 * z.len() as f64));
    for _ in 0..5_000_000 {
        let grad = &zv * 2.0 + (&w * 4.0 + s.transpose() * (&s * &w) * 2.0) * alpha;
        let next = DVector::from_vec(project_simplex((&w - grad * step).as_slice(), s_total / 2.0));
        let moved = (&next - &w).norm();
        w = next;
        if moved <= 1e-15 * w.norm() {
            break;
        }
    }
    w.as_slice().to_vec()
}

/// Random data matrix with rows drawn uniformly from `[0, 1)^n`.
pub fn random_points(r: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| r.random::<f64>())
}

/// Mean-normalized squared distances of random points.
pub fn random_distances(r: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<f64> {
    let z = naive_distances(&random_points(r, m, n));
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    z.into_iter().map(|x| x / mean).collect()
}

pub fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + r.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

pub fn rel_inf(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().fold(0.0f64, |acc, y| acc.max(y.abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale > 0.0 {
        (a - b).abs() / scale
    } else {
        0.0
    }
}
