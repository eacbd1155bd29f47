//! Numerical self-test of the edge-vector identities on a random instance.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{degree_map, laplacian_from_edges, matrixform, pairwise_distances, smoothness_value, EdgeVector};
use crate::seed::{self, stream};
use crate::signals::white_noise;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

impl IdentityCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let rel_error = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };
        Self { name, lhs, rhs, rel_error }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.rel_error <= tol
    }
}

/// Evaluates both sides of every matrix/edge-vector identity on a random
/// sparse graph with `m` nodes and `n` Gaussian signals.
pub fn norms_check(m: usize, n: usize, seed: u64) -> Result<Vec<IdentityCheck>> {
    if m < 2 || n < 1 {
        return Err(Error::validation("norms check needs m >= 2 and n >= 1"));
    }
    let mut rng = seed::rng(seed::derive(seed, &[stream::GRAPH]));
    let w = EdgeVector::from_fn(m, |_, _| {
        if rng.random::<f64>() < 0.5 {
            0.0
        } else {
            rng.random::<f64>()
        }
    })?;
    let x = white_noise(m, n, seed::derive(seed, &[stream::SIGNAL]));
    let z = pairwise_distances(&x)?;
    let wm = matrixform(&w);
    let wm = wm.matrix();
    let l = laplacian_from_edges(&w);
    let l = l.matrix();
    let d = degree_map(&w);

    let mut hadamard = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                hadamard += wm[(i, j)] * z.get(i, j);
            }
        }
    }
    let wz: f64 = w.weights().iter().zip(z.values()).map(|(a, b)| a * b).sum();
    let sq: f64 = w.weights().iter().map(|a| a * a).sum();
    let deg_sq: f64 = d.values().iter().map(|a| a * a).sum();
    let diag_gap = (0..m).map(|i| (l[(i, i)] - d.values()[i]).abs()).fold(0.0, f64::max);
    let diag_scale = d.values().iter().fold(0.0f64, |a, b| a.max(b.abs()));

    Ok(vec![
        IdentityCheck::new("2 tr(X'LX) = |W o Z|_1", 2.0 * smoothness_value(&x, &w)?, hadamard),
        IdentityCheck::new("|W o Z|_1 = 2 w'z", hadamard, 2.0 * wz),
        IdentityCheck::new("tr(L) = |W|_1", l.trace(), wm.iter().map(|v| v.abs()).sum()),
        IdentityCheck::new("tr(L) = 2 |w|_1", l.trace(), 2.0 * w.l1_norm()),
        IdentityCheck::new("|W|_F^2 = 2 |w|^2", wm.norm_squared(), 2.0 * sq),
        IdentityCheck::new("|L|_F^2 = 2 |w|^2 + |Sw|^2", l.norm_squared(), 2.0 * sq + deg_sq),
        IdentityCheck::new("diag(L) = Sw", diag_scale + diag_gap, diag_scale),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold() {
        for (m, seed) in [(2, 1), (7, 2), (50, 7)] {
            let checks = norms_check(m, 5, seed).unwrap();
            assert_eq!(checks.len(), 7);
            for c in checks {
                assert!(c.passes(1e-9), "{c:?}");
            }
        }
        assert!(norms_check(1, 5, 0).is_err());
    }
}
