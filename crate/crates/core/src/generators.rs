//! Seeded random ground-truth graphs.
//!
//! Two manifold graphs (uniform and non-uniform samples of a 2-D region,
//! Gaussian-kernel weights) and two non-manifold ones (Gilbert random
//! graph, preferential attachment).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_count, edge_index, edge_pairs, EdgeVector};
use crate::seed;

/// Height of the strip `[0,1] x [0,H]` used by the non-uniform graph.
pub const NONUNIFORM_HEIGHT: f64 = 5.0;

/// Random graph family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum GraphModel {
    /// Uniform points in the unit square, Gaussian weights below `threshold` removed.
    Rgg {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_rgg_threshold")]
        threshold: f64,
    },
    /// Points on `[0,1] x [0,5]` with density proportional to `1 / (1 + a x2)`.
    NonUniform {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_density")]
        density: f64,
    },
    /// Gilbert `G(m, p)`; `p` defaults to `3/m`.
    ErdosRenyi {
        #[serde(default)]
        p: Option<f64>,
    },
    BarabasiAlbert {
        #[serde(default = "default_edges_per_node")]
        edges_per_node: usize,
    },
}

fn default_sigma() -> f64 {
    0.2
}
fn default_rgg_threshold() -> f64 {
    0.6
}
fn default_density() -> f64 {
    2.0
}
fn default_edges_per_node() -> usize {
    2
}

impl GraphModel {
    pub fn rgg() -> Self {
        GraphModel::Rgg {
            sigma: default_sigma(),
            threshold: default_rgg_threshold(),
        }
    }

    pub fn nonuniform() -> Self {
        GraphModel::NonUniform {
            sigma: default_sigma(),
            density: default_density(),
        }
    }

    pub fn erdos_renyi() -> Self {
        GraphModel::ErdosRenyi { p: None }
    }

    pub fn barabasi_albert() -> Self {
        GraphModel::BarabasiAlbert {
            edges_per_node: default_edges_per_node(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphModel::Rgg { .. } => "rgg",
            GraphModel::NonUniform { .. } => "nonUniform",
            GraphModel::ErdosRenyi { .. } => "erdosRenyi",
            GraphModel::BarabasiAlbert { .. } => "barabasiAlbert",
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let min_nodes = if matches!(self, GraphModel::BarabasiAlbert { .. }) { 3 } else { 2 };
        if m < min_nodes {
            return Err(Error::validation(format!(
                "{} needs at least {min_nodes} nodes, got {m}",
                self.name()
            )));
        }
        match *self {
            GraphModel::Rgg { sigma, threshold } => {
                check_sigma(sigma)?;
                if !(0.0..1.0).contains(&threshold) {
                    return Err(Error::validation(format!("threshold must lie in [0, 1), got {threshold}")));
                }
            }
            GraphModel::NonUniform { sigma, density } => {
                check_sigma(sigma)?;
                if !(density > 0.0 && density.is_finite()) {
                    return Err(Error::validation(format!("density parameter must be positive, got {density}")));
                }
            }
            GraphModel::ErdosRenyi { p: Some(p) } if !(0.0..=1.0).contains(&p) => {
                return Err(Error::validation(format!("edge probability must lie in [0, 1], got {p}")));
            }
            GraphModel::BarabasiAlbert { edges_per_node: 0 } => {
                return Err(Error::validation("edges per node must be at least 1"));
            }
            _ => {}
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(format!("sigma must be positive, got {sigma}")))
    }
}

/// A graph model instantiated on `m` nodes with a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphModelSpec {
    pub model: GraphModel,
    pub m: usize,
    pub seed: u64,
}

impl GraphModelSpec {
    pub fn generate(&self) -> Result<GeneratedGraph> {
        generate(&self.model, self.m, self.seed)
    }
}

/// A generated ground-truth graph, with node positions for the manifold families.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedGraph {
    pub edges: EdgeVector,
    pub coords: Option<Vec<[f64; 2]>>,
}

pub fn generate(model: &GraphModel, m: usize, seed: u64) -> Result<GeneratedGraph> {
    model.validate(m)?;
    match *model {
        GraphModel::Rgg { sigma, threshold } => rgg(m, sigma, threshold, seed),
        GraphModel::NonUniform { sigma, density } => nonuniform(m, sigma, density, seed),
        GraphModel::ErdosRenyi { p } => Ok(GeneratedGraph {
            edges: erdos_renyi(m, p.unwrap_or(3.0 / m as f64), seed)?,
            coords: None,
        }),
        GraphModel::BarabasiAlbert { edges_per_node } => Ok(GeneratedGraph {
            edges: barabasi_albert(m, edges_per_node, seed)?,
            coords: None,
        }),
    }
}

fn gaussian_weights(points: &[[f64; 2]], sigma: f64) -> Vec<f64> {
    let m = points.len();
    let denom = 2.0 * sigma * sigma;
    edge_pairs(m)
        .map(|(i, j)| {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            (-(dx * dx + dy * dy) / denom).exp()
        })
        .collect()
}

/// Random geometric graph on the unit square.
pub fn rgg(m: usize, sigma: f64, threshold: f64, seed: u64) -> Result<GeneratedGraph> {
    GraphModel::Rgg { sigma, threshold }.validate(m)?;
    let mut rng = seed::rng(seed);
    let points: Vec<[f64; 2]> = (0..m).map(|_| [rng.random(), rng.random()]).collect();
    let mut w = gaussian_weights(&points, sigma);
    w.iter_mut().filter(|x| **x < threshold).for_each(|x| *x = 0.0);
    Ok(GeneratedGraph {
        edges: EdgeVector::new(m, w)?,
        coords: Some(points),
    })
}

/// Inverse CDF of the density `~ 1/(1 + a x)` on `[0, height]`.
pub fn nonuniform_inverse_cdf(u: f64, a: f64, height: f64) -> f64 {
    ((1.0 + a * height).powf(u) - 1.0) / a
}

/// Smallest per-node maximum weight: the best connection of the most isolated node.
pub fn adaptive_threshold(w: &EdgeVector) -> f64 {
    let m = w.nodes();
    let mut best = vec![0.0f64; m];
    for ((i, j), &x) in edge_pairs(m).zip(w.weights()) {
        best[i] = best[i].max(x);
        best[j] = best[j].max(x);
    }
    best.into_iter().fold(f64::INFINITY, f64::min)
}

pub fn nonuniform(m: usize, sigma: f64, density: f64, seed: u64) -> Result<GeneratedGraph> {
    GraphModel::NonUniform { sigma, density }.validate(m)?;
    let mut rng = seed::rng(seed);
    let points: Vec<[f64; 2]> = (0..m)
        .map(|_| {
            let x1: f64 = rng.random();
            let u: f64 = rng.random();
            [x1, nonuniform_inverse_cdf(u, density, NONUNIFORM_HEIGHT)]
        })
        .collect();
    let full = EdgeVector::new(m, gaussian_weights(&points, sigma))?;
    let tau = adaptive_threshold(&full);
    let w = full.into_weights().into_iter().map(|x| if x < tau { 0.0 } else { x }).collect();
    Ok(GeneratedGraph {
        edges: EdgeVector::new(m, w)?,
        coords: Some(points),
    })
}

/// Gilbert random graph: each pair is an edge independently with probability `p`.
pub fn erdos_renyi(m: usize, p: f64, seed: u64) -> Result<EdgeVector> {
    GraphModel::ErdosRenyi { p: Some(p) }.validate(m)?;
    let mut rng = seed::rng(seed);
    let w = (0..edge_count(m))
        .map(|_| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
        .collect();
    EdgeVector::new(m, w)
}

/// Preferential attachment grown from a single edge between nodes 0 and 1.
///
/// Node `v` attaches `min(edges_per_node, v)` edges to distinct earlier nodes,
/// each chosen with probability proportional to its current degree.
pub fn barabasi_albert(m: usize, edges_per_node: usize, seed: u64) -> Result<EdgeVector> {
    GraphModel::BarabasiAlbert { edges_per_node }.validate(m)?;
    let mut rng = seed::rng(seed);
    let mut w = vec![0.0; edge_count(m)];
    // every node appears once per incident edge
    let mut endpoints: Vec<usize> = vec![0, 1];
    w[edge_index(m, 0, 1)] = 1.0;
    let mut targets = Vec::with_capacity(edges_per_node);
    for v in 2..m {
        let k = edges_per_node.min(v);
        targets.clear();
        while targets.len() < k {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            w[edge_index(m, t, v)] = 1.0;
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    EdgeVector::new(m, w)
}
