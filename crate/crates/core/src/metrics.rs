//! Comparison of a learned graph with its ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{degree_map_into, edge_pairs, EdgeVector};

/// Default cut for "nonzero" edges, relative to the largest weight.
pub const DEFAULT_REL_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    fn of_diff(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }
}

/// All metrics for one learned graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluationReport {
    pub f_measure: f64,
    pub edge_l1: f64,
    pub edge_l2: f64,
    pub degree_l1: f64,
    pub degree_l2: f64,
    pub component_count: usize,
    pub disconnected_node_count: usize,
}

impl EvaluationReport {
    pub const CSV_HEADER: &'static str =
        "fMeasure,edgeL1,edgeL2,degreeL1,degreeL2,componentCount,disconnectedNodeCount";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.f_measure,
            self.edge_l1,
            self.edge_l2,
            self.degree_l1,
            self.degree_l2,
            self.component_count,
            self.disconnected_node_count
        )
    }
}

fn same_size(a: &EdgeVector, b: &EdgeVector) -> Result<()> {
    if a.nodes() != b.nodes() {
        return Err(Error::DimensionMismatch {
            expected: b.nodes(),
            actual: a.nodes(),
        });
    }
    Ok(())
}

/// Edge pattern: `w_e > rel_threshold * max(w)`. An all-zero graph has no edges.
pub fn binarize_edges(w: &EdgeVector, rel_threshold: f64) -> Vec<bool> {
    let max = w.weights().iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return vec![false; w.len()];
    }
    let cut = rel_threshold * max;
    w.weights().iter().map(|&x| x > cut).collect()
}

/// Precision/recall harmonic mean of two edge patterns.
pub fn f_measure_patterns(learned: &[bool], truth: &[bool]) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&l, &t) in learned.iter().zip(truth) {
        match (l, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            _ => {}
        }
    }
    // 2PR/(P+R) == 2tp / (2tp + fp + fn)
    let denom = 2 * tp + fp + fneg;
    if tp == 0 || denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

pub fn f_measure(learned: &EdgeVector, truth: &EdgeVector, rel_threshold: f64) -> Result<f64> {
    same_size(learned, truth)?;
    Ok(f_measure_patterns(
        &binarize_edges(learned, rel_threshold),
        &binarize_edges(truth, rel_threshold),
    ))
}

/// Learned weights rescaled to the ground-truth norm; `None` when the learned graph is empty.
fn normalized(learned: &EdgeVector, truth: &EdgeVector, p: Norm) -> Result<Option<Vec<f64>>> {
    same_size(learned, truth)?;
    let t = p.of(truth.weights());
    if t == 0.0 {
        return Err(Error::validation("relative error against an empty ground truth"));
    }
    let l = p.of(learned.weights());
    if l == 0.0 {
        return Ok(None);
    }
    Ok(Some(learned.weights().iter().map(|x| x * t / l).collect()))
}

/// `||w_hat - w0||_p / ||w0||_p` with `w_hat` scaled so that `||w_hat||_p = ||w0||_p`.
pub fn relative_edge_error(learned: &EdgeVector, truth: &EdgeVector, p: Norm) -> Result<f64> {
    Ok(match normalized(learned, truth, p)? {
        None => 1.0,
        Some(w) => p.of_diff(&w, truth.weights()) / p.of(truth.weights()),
    })
}

/// Same normalization as [`relative_edge_error`], measured on the degrees.
pub fn relative_degree_error(learned: &EdgeVector, truth: &EdgeVector, p: Norm) -> Result<f64> {
    let Some(w) = normalized(learned, truth, p)? else {
        return Ok(1.0);
    };
    let m = truth.nodes();
    let mut d = vec![0.0; m];
    let mut d0 = vec![0.0; m];
    degree_map_into(m, &w, &mut d);
    degree_map_into(m, truth.weights(), &mut d0);
    Ok(p.of_diff(&d, &d0) / p.of(&d0))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// `(connected components, nodes of degree zero)` of the binarized graph.
pub fn connectivity(w: &EdgeVector, rel_threshold: f64) -> (usize, usize) {
    let m = w.nodes();
    let pattern = binarize_edges(w, rel_threshold);
    let mut parent: Vec<usize> = (0..m).collect();
    let mut touched = vec![false; m];
    let mut components = m;
    for ((i, j), &on) in edge_pairs(m).zip(&pattern) {
        if !on {
            continue;
        }
        touched[i] = true;
        touched[j] = true;
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
            components -= 1;
        }
    }
    (components, touched.iter().filter(|t| !**t).count())
}

pub fn evaluate(learned: &EdgeVector, truth: &EdgeVector, rel_threshold: f64) -> Result<EvaluationReport> {
    let (component_count, disconnected_node_count) = connectivity(learned, rel_threshold);
    Ok(EvaluationReport {
        f_measure: f_measure(learned, truth, rel_threshold)?,
        edge_l1: relative_edge_error(learned, truth, Norm::L1)?,
        edge_l2: relative_edge_error(learned, truth, Norm::L2)?,
        degree_l1: relative_degree_error(learned, truth, Norm::L1)?,
        degree_l2: relative_degree_error(learned, truth, Norm::L2)?,
        component_count,
        disconnected_node_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(m: usize, w: &[f64]) -> EdgeVector {
        EdgeVector::new(m, w.to_vec()).unwrap()
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize_edges(&ev(3, &[1.0, 0.5, 0.0]), 1e-4), vec![true, true, false]);
        assert_eq!(binarize_edges(&ev(3, &[1.0, 5e-5, 0.0]), 1e-4), vec![true, false, false]);
        assert_eq!(binarize_edges(&ev(3, &[0.0; 3]), 1e-4), vec![false; 3]);
    }

    #[test]
    fn f_measure_examples() {
        let t = ev(4, &[1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f_measure(&t, &t, 1e-4).unwrap(), 1.0);
        let disjoint = ev(4, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(f_measure(&disjoint, &t, 1e-4).unwrap(), 0.0);
        // truth plus as many false edges: P = 1/2, R = 1
        let union = ev(4, &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        assert!((f_measure(&union, &t, 1e-4).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f_measure(&ev(4, &[0.0; 6]), &t, 1e-4).unwrap(), 0.0);
        assert!(f_measure(&ev(3, &[1.0; 3]), &t, 1e-4).is_err());
    }

    #[test]
    fn edge_error_examples() {
        let t = ev(3, &[1.0, 2.0, 0.0]);
        for p in [Norm::L1, Norm::L2] {
            assert!(relative_edge_error(&t.scaled(3.7).unwrap(), &t, p).unwrap() < 1e-15);
            assert_eq!(relative_edge_error(&ev(3, &[0.0; 3]), &t, p).unwrap(), 1.0);
        }
        let other = ev(3, &[0.0, 0.0, 5.0]);
        assert!((relative_edge_error(&other, &t, Norm::L1).unwrap() - 2.0).abs() < 1e-15);
        assert!((relative_edge_error(&other, &t, Norm::L2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(relative_edge_error(&t, &ev(3, &[0.0; 3]), Norm::L1).is_err());
    }

    #[test]
    fn degree_error_examples() {
        let t = ev(3, &[1.0, 1.0, 1.0]);
        assert!(relative_degree_error(&t.scaled(0.2).unwrap(), &t, Norm::L2).unwrap() < 1e-15);
        assert_eq!(relative_degree_error(&ev(3, &[0.0; 3]), &t, Norm::L1).unwrap(), 1.0);

        // all mass on edge (0,1): degrees (3,3,0) against (2,2,2)
        let lumped = ev(3, &[3.0, 0.0, 0.0]);
        let e1 = relative_degree_error(&lumped, &t, Norm::L1).unwrap();
        assert!((e1 - 4.0 / 6.0).abs() < 1e-15);
        // l2 normalization scales to (sqrt 3, 0, 0): degrees (sqrt3, sqrt3, 0)
        let e2 = relative_degree_error(&lumped, &t, Norm::L2).unwrap();
        let s3 = 3f64.sqrt();
        let expected = (2.0 * (s3 - 2.0).powi(2) + 4.0).sqrt() / 12f64.sqrt();
        assert!((e2 - expected).abs() < 1e-14);
    }

    #[test]
    fn connectivity_examples() {
        assert_eq!(connectivity(&ev(4, &[1.0; 6]), 1e-4), (1, 0));
        assert_eq!(connectivity(&ev(4, &[0.0; 6]), 1e-4), (4, 4));
        assert_eq!(connectivity(&ev(4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]), 1e-4), (2, 0));
        assert_eq!(connectivity(&ev(4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 1e-4), (3, 2));
    }

    #[test]
    fn report_csv_shape() {
        let t = ev(3, &[1.0, 1.0, 0.0]);
        let r = evaluate(&t, &t, DEFAULT_REL_THRESHOLD).unwrap();
        assert_eq!(r.f_measure, 1.0);
        assert_eq!(r.csv_row().split(',').count(), EvaluationReport::CSV_HEADER.split(',').count());
        let json = serde_json::to_value(r).unwrap();
        assert!(json.get("disconnectedNodeCount").is_some());
    }
}
