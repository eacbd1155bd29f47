//! Grid-search experiment runner for synthetic graph-learning benchmarks.
//!
//! One [`ExperimentSpec`] describes a cell: a ground-truth graph family, a
//! signal filter, and the parameter grids of every model. Each trial draws a
//! fresh graph, smooth signals and noise from seeds derived from the master
//! seed, learns a graph at every grid point and scores it. For every metric
//! the grid point with the best trial-averaged score is reported.
//!
//! Trials and grid points are independent jobs; results are keyed by
//! `(trial, grid index)` so serial and parallel runs are bitwise identical.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{self, GraphModel};
use crate::graph::{laplacian_from_edges, pairwise_distances, DistanceVector, EdgeVector};
use crate::io::write_edge_list;
use crate::metrics::{self, binarize_edges, f_measure_patterns, EvaluationReport, DEFAULT_REL_THRESHOLD};
use crate::seed::{self, stream};
use crate::signals::{self, FilterSpec};
use crate::solvers::{gaussian_kernel, learn_l2_degree, learn_log_degree, SolverConfig};

/// `count` points spaced evenly on a log scale from `lo` to `hi`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

fn default_log_grid() -> Vec<f64> {
    logspace(1e-3, 1e2, 21)
}

fn default_sigma_grid() -> Vec<f64> {
    logspace(1e-2, 1e1, 25)
}

/// Quantile levels `1 - f` with kept fractions `f` log-spaced in `[10^-2.5, 1]`.
///
/// Sparse ground truths keep only a few percent of all pairs, so the levels
/// are packed near 1.
pub fn default_quantile_levels() -> Vec<f64> {
    logspace(10f64.powf(-2.5), 1.0, 25).into_iter().rev().map(|f| 1.0 - f).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct LogDegreeGrid {
    pub alpha: f64,
    pub beta: Vec<f64>,
}

impl Default for LogDegreeGrid {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: default_log_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct L2DegreeGrid {
    pub alpha: Vec<f64>,
    /// Total weight `2 1'w`; the node count when absent.
    pub scale: Option<f64>,
}

impl Default for L2DegreeGrid {
    fn default() -> Self {
        Self {
            alpha: default_log_grid(),
            scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GaussianGrid {
    pub sigma: Vec<f64>,
}

impl Default for GaussianGrid {
    fn default() -> Self {
        Self {
            sigma: default_sigma_grid(),
        }
    }
}

/// Edge patterns obtained by thresholding Gaussian weights at quantiles of
/// their distribution. The kernel is monotone in distance, so the patterns
/// do not depend on `sigma` as long as no weight underflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ThresholdGrid {
    pub sigma: f64,
    pub quantiles: Vec<f64>,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            quantiles: default_quantile_levels(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ModelGrids {
    pub log_degree: Option<LogDegreeGrid>,
    pub l2_degree: Option<L2DegreeGrid>,
    pub gaussian_baseline: Option<GaussianGrid>,
    pub threshold_baseline: Option<ThresholdGrid>,
}

impl Default for ModelGrids {
    fn default() -> Self {
        Self {
            log_degree: Some(LogDegreeGrid::default()),
            l2_degree: Some(L2DegreeGrid::default()),
            gaussian_baseline: Some(GaussianGrid::default()),
            threshold_baseline: Some(ThresholdGrid::default()),
        }
    }
}

/// How the best grid point is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Selection {
    /// Average each metric over trials, then pick the best grid point.
    #[default]
    Averaged,
    /// Pick the best grid point separately in every trial (optimistic).
    PerTrial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExperimentSpec {
    pub graph: GraphModel,
    pub filter: FilterSpec,
    pub m: usize,
    pub n: usize,
    pub noise_ratio: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub models: ModelGrids,
    pub solver: SolverConfig,
    /// Edges below this fraction of the largest weight count as absent.
    pub rel_threshold: f64,
    /// Divide the distances by their mean before learning so that the
    /// default grids do not depend on the signal energy.
    pub normalize_distances: bool,
    pub selection: Selection,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            graph: GraphModel::rgg(),
            filter: FilterSpec::tikhonov(),
            m: 100,
            n: 1000,
            noise_ratio: 0.1,
            trials: 20,
            master_seed: 0,
            models: ModelGrids::default(),
            solver: SolverConfig::default(),
            rel_threshold: DEFAULT_REL_THRESHOLD,
            normalize_distances: true,
            selection: Selection::Averaged,
        }
    }
}

fn check_grid(name: &str, grid: &[f64], allow_zero: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::validation(format!("{name} grid is empty")));
    }
    for &v in grid {
        let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
        if !ok {
            return Err(Error::validation(format!("{name} grid value {v} out of range")));
        }
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate(self.m)?;
        self.filter.validate()?;
        self.solver.validate()?;
        if self.trials == 0 {
            return Err(Error::validation("trials must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::validation("signal count n must be at least 1"));
        }
        if !(self.noise_ratio >= 0.0 && self.noise_ratio.is_finite()) {
            return Err(Error::validation("noise ratio must be >= 0"));
        }
        if !(self.rel_threshold >= 0.0 && self.rel_threshold < 1.0) {
            return Err(Error::validation("relative threshold must lie in [0, 1)"));
        }
        let g = &self.models;
        if g.log_degree.is_none() && g.l2_degree.is_none() && g.gaussian_baseline.is_none() && g.threshold_baseline.is_none() {
            return Err(Error::validation("no models configured"));
        }
        if let Some(lg) = &g.log_degree {
            check_grid("log-degree alpha", &[lg.alpha], false)?;
            check_grid("log-degree beta", &lg.beta, true)?;
        }
        if let Some(l2) = &g.l2_degree {
            check_grid("l2-degree alpha", &l2.alpha, true)?;
            if let Some(s) = l2.scale {
                check_grid("l2-degree scale", &[s], false)?;
            }
        }
        if let Some(gg) = &g.gaussian_baseline {
            check_grid("gaussian sigma", &gg.sigma, false)?;
        }
        if let Some(tg) = &g.threshold_baseline {
            check_grid("threshold sigma", &[tg.sigma], false)?;
            if tg.quantiles.is_empty() || tg.quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(Error::validation("threshold quantiles must be non-empty and lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn l2_scale(&self) -> f64 {
        self.models
            .l2_degree
            .as_ref()
            .and_then(|g| g.scale)
            .unwrap_or(self.m as f64)
    }

    /// Seed of trial `t`; every random draw of the trial derives from it.
    pub fn trial_seed(&self, t: usize) -> u64 {
        seed::derive(self.master_seed, &[t as u64])
    }
}

/// Ground truth and learning input of one trial.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub seed: u64,
    pub truth: EdgeVector,
    pub distances: DistanceVector,
}

/// Regenerates the data of trial `t` from its seed.
pub fn prepare_trial(spec: &ExperimentSpec, t: usize) -> Result<TrialData> {
    let ts = spec.trial_seed(t);
    let graph = generators::generate(&spec.graph, spec.m, seed::derive(ts, &[stream::GRAPH]))?;
    let lap = signals::normalize_laplacian_scale(&laplacian_from_edges(&graph.edges))?;
    let spec_l = signals::spectrum(&lap);
    let x = signals::generate_smooth_matrix(&spec_l, &spec.filter, spec.n, seed::derive(ts, &[stream::SIGNAL]))?;
    let x = signals::add_noise(&x, spec.noise_ratio, seed::derive(ts, &[stream::NOISE]))?;
    let mut z = pairwise_distances(&x)?;
    if spec.normalize_distances {
        let mean = z.mean();
        if mean > 0.0 {
            z = z.scaled(1.0 / mean)?;
        }
    }
    Ok(TrialData {
        seed: ts,
        truth: graph.edges,
        distances: z,
    })
}

/// Models reported by the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ModelKind {
    LogDegree,
    L2Degree,
    /// Gaussian kernel for the error metrics, thresholded kernel for the F-measure.
    Baseline,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::LogDegree, ModelKind::L2Degree, ModelKind::Baseline];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::LogDegree => "logDegree",
            ModelKind::L2Degree => "l2Degree",
            ModelKind::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Metric {
    FMeasure,
    EdgeL1,
    EdgeL2,
    DegreeL1,
    DegreeL2,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::FMeasure, Metric::EdgeL1, Metric::EdgeL2, Metric::DegreeL1, Metric::DegreeL2];

    pub fn name(self) -> &'static str {
        match self {
            Metric::FMeasure => "fMeasure",
            Metric::EdgeL1 => "edgeL1",
            Metric::EdgeL2 => "edgeL2",
            Metric::DegreeL1 => "degreeL1",
            Metric::DegreeL2 => "degreeL2",
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::FMeasure)
    }

    pub fn of(self, r: &EvaluationReport) -> f64 {
        match self {
            Metric::FMeasure => r.f_measure,
            Metric::EdgeL1 => r.edge_l1,
            Metric::EdgeL2 => r.edge_l2,
            Metric::DegreeL1 => r.degree_l1,
            Metric::DegreeL2 => r.degree_l2,
        }
    }
}

/// Grid families evaluated per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GridKind {
    LogDegree,
    L2Degree,
    Gaussian,
    Threshold,
}

impl GridKind {
    pub fn name(self) -> &'static str {
        match self {
            GridKind::LogDegree => "logDegree",
            GridKind::L2Degree => "l2Degree",
            GridKind::Gaussian => "gaussian",
            GridKind::Threshold => "threshold",
        }
    }
}

/// Score of one learned graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PointScore {
    pub report: EvaluationReport,
    pub edges_per_node: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn score(learned: &EdgeVector, truth: &EdgeVector, rel: f64, converged: bool, iterations: usize) -> Result<PointScore> {
    let report = metrics::evaluate(learned, truth, rel)?;
    let kept = binarize_edges(learned, rel).iter().filter(|&&b| b).count();
    Ok(PointScore {
        report,
        edges_per_node: kept as f64 / learned.nodes() as f64,
        converged,
        iterations,
    })
}

/// Threshold at quantile level `q` of `w`: the weight of rank `round(q (E-1))`
/// in ascending order.
pub fn quantile_threshold(w: &EdgeVector, q: f64) -> f64 {
    let mut sorted = w.weights().to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_of_sorted(&sorted, q)
}

fn quantile_of_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = (q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx]
}

/// Keeps the weights `>= tau` and drops the rest.
pub fn threshold_edges(w: &EdgeVector, tau: f64) -> EdgeVector {
    EdgeVector::from_vec_unchecked(
        w.nodes(),
        w.weights().iter().map(|&x| if x >= tau { x } else { 0.0 }).collect(),
    )
}

/// Gaussian-kernel graph at every `sigma`, scored without thresholding.
pub fn baseline_gaussian(z: &DistanceVector, sigma_grid: &[f64], truth: &EdgeVector, rel: f64) -> Result<Vec<EvaluationReport>> {
    check_grid("gaussian sigma", sigma_grid, false)?;
    sigma_grid
        .iter()
        .map(|&s| metrics::evaluate(&gaussian_kernel(z, s)?, truth, rel))
        .collect()
}

/// F-measure of the thresholded Gaussian kernel at each absolute threshold
/// (`w >= tau` is kept); returns the best value and its index.
pub fn baseline_threshold_fmeasure(
    z: &DistanceVector,
    sigma: f64,
    thresholds: &[f64],
    truth: &EdgeVector,
    rel: f64,
) -> Result<(f64, usize)> {
    if thresholds.is_empty() {
        return Err(Error::validation("threshold grid is empty"));
    }
    let w = gaussian_kernel(z, sigma)?;
    let t = binarize_edges(truth, rel);
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, &tau) in thresholds.iter().enumerate() {
        let pattern: Vec<bool> = w.weights().iter().map(|&x| x >= tau).collect();
        let f = f_measure_patterns(&pattern, &t);
        if f > best.0 {
            best = (f, k);
        }
    }
    Ok(best)
}

/// Graph learned by `grid` at `index` on trial data `data`.
pub fn learn_grid_point(spec: &ExperimentSpec, data: &TrialData, grid: GridKind, index: usize) -> Result<(EdgeVector, bool, usize)> {
    let z = &data.distances;
    let g = &spec.models;
    let missing = || Error::validation(format!("{} grid not configured", grid.name()));
    let out_of_range = || Error::validation(format!("{} grid index {index} out of range", grid.name()));
    match grid {
        GridKind::LogDegree => {
            let lg = g.log_degree.as_ref().ok_or_else(missing)?;
            let beta = *lg.beta.get(index).ok_or_else(out_of_range)?;
            let r = learn_log_degree(z, lg.alpha, beta, &spec.solver)?;
            Ok((r.weights, r.converged, r.iterations))
        }
        GridKind::L2Degree => {
            let l2 = g.l2_degree.as_ref().ok_or_else(missing)?;
            let alpha = *l2.alpha.get(index).ok_or_else(out_of_range)?;
            let r = learn_l2_degree(z, alpha, spec.l2_scale(), &spec.solver)?;
            Ok((r.weights, r.converged, r.iterations))
        }
        GridKind::Gaussian => {
            let gg = g.gaussian_baseline.as_ref().ok_or_else(missing)?;
            let sigma = *gg.sigma.get(index).ok_or_else(out_of_range)?;
            Ok((gaussian_kernel(z, sigma)?, true, 0))
        }
        GridKind::Threshold => {
            let tg = g.threshold_baseline.as_ref().ok_or_else(missing)?;
            let q = *tg.quantiles.get(index).ok_or_else(out_of_range)?;
            let w = gaussian_kernel(z, tg.sigma)?;
            let tau = quantile_threshold(&w, q);
            Ok((threshold_edges(&w, tau), true, 0))
        }
    }
}

fn grid_params(spec: &ExperimentSpec, grid: GridKind) -> Vec<f64> {
    let g = &spec.models;
    match grid {
        GridKind::LogDegree => g.log_degree.as_ref().map(|x| x.beta.clone()),
        GridKind::L2Degree => g.l2_degree.as_ref().map(|x| x.alpha.clone()),
        GridKind::Gaussian => g.gaussian_baseline.as_ref().map(|x| x.sigma.clone()),
        GridKind::Threshold => g.threshold_baseline.as_ref().map(|x| x.quantiles.clone()),
    }
    .unwrap_or_default()
}

const GRIDS: [GridKind; 4] = [GridKind::LogDegree, GridKind::L2Degree, GridKind::Gaussian, GridKind::Threshold];

/// Mean scores of one grid point over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridPointSummary {
    pub grid: GridKind,
    pub index: usize,
    pub param: f64,
    pub f_measure: f64,
    pub edge_l1: f64,
    pub edge_l2: f64,
    pub degree_l1: f64,
    pub degree_l2: f64,
    pub edges_per_node: f64,
    pub component_count: f64,
    pub disconnected_node_count: f64,
    pub nonconverged: usize,
    pub mean_iterations: f64,
}

impl GridPointSummary {
    pub const CSV_HEADER: &'static str = "grid,index,param,fMeasure,edgeL1,edgeL2,degreeL1,degreeL2,edgesPerNode,componentCount,disconnectedNodeCount,nonconverged,meanIterations";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.grid.name(),
            self.index,
            self.param,
            self.f_measure,
            self.edge_l1,
            self.edge_l2,
            self.degree_l1,
            self.degree_l2,
            self.edges_per_node,
            self.component_count,
            self.disconnected_node_count,
            self.nonconverged,
            self.mean_iterations
        )
    }
}

/// Best-over-grid result for one (model, metric) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultRecord {
    pub graph: String,
    pub signal: String,
    pub model: ModelKind,
    pub metric: Metric,
    /// Grid family the parameter belongs to.
    pub grid: GridKind,
    /// Selected parameter; `None` under per-trial selection.
    pub param: Option<f64>,
    pub grid_index: Option<usize>,
    /// Mean of `per_trial`.
    pub value: f64,
    pub per_trial: Vec<f64>,
    /// Grid index chosen in each trial (all equal under averaged selection).
    pub per_trial_index: Vec<usize>,
    pub nonconverged: usize,
}

impl ResultRecord {
    pub const CSV_HEADER: &'static str = "graph,signal,model,metric,param,value";

    pub fn csv_row(&self) -> String {
        let param = self.param.map_or_else(|| "NaN".to_string(), |p| p.to_string());
        format!("{},{},{},{},{},{}", self.graph, self.signal, self.model.name(), self.metric.name(), param, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentOutcome {
    pub trial_seeds: Vec<u64>,
    pub records: Vec<ResultRecord>,
    pub grid: Vec<GridPointSummary>,
    /// Raw scores indexed as `scores[grid][trial][index]`, grids in the
    /// order of [`GridKind`].
    #[serde(skip)]
    pub scores: Vec<Vec<Vec<PointScore>>>,
}

impl ExperimentOutcome {
    pub fn record(&self, model: ModelKind, metric: Metric) -> Option<&ResultRecord> {
        self.records.iter().find(|r| r.model == model && r.metric == metric)
    }

    /// `metric x model` table of the selected values.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("metric");
        for m in ModelKind::ALL {
            out.push(',');
            out.push_str(m.name());
        }
        out.push('\n');
        for metric in Metric::ALL {
            out.push_str(metric.name());
            for model in ModelKind::ALL {
                out.push(',');
                if let Some(r) = self.record(model, metric) {
                    out.push_str(&r.value.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn records_csv(&self) -> String {
        let mut out = format!("{}\n", ResultRecord::CSV_HEADER);
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn grid_csv(&self) -> String {
        let mut out = format!("{}\n", GridPointSummary::CSV_HEADER);
        for g in &self.grid {
            out.push_str(&g.csv_row());
            out.push('\n');
        }
        out
    }

    /// One row per (model, metric, trial) with the seed that regenerates it.
    pub fn trials_csv(&self) -> String {
        let mut out = String::from("graph,signal,model,metric,trial,seed,gridIndex,value\n");
        for r in &self.records {
            for (t, (v, idx)) in r.per_trial.iter().zip(&r.per_trial_index).enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.graph,
                    r.signal,
                    r.model.name(),
                    r.metric.name(),
                    t,
                    self.trial_seeds[t],
                    idx,
                    v
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// Rayon's global pool.
    #[default]
    Parallel,
    /// A dedicated pool with this many workers.
    Threads(usize),
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    run_experiment_with(spec, Execution::Parallel)
}

pub fn run_experiment_with(spec: &ExperimentSpec, exec: Execution) -> Result<ExperimentOutcome> {
    spec.validate()?;
    match exec {
        Execution::Threads(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::validation(format!("cannot build worker pool: {e}")))?;
            pool.install(|| run_inner(spec, true))
        }
        Execution::Parallel => run_inner(spec, true),
        Execution::Serial => run_inner(spec, false),
    }
}

fn map_jobs<T: Sync, R: Send>(items: &[T], parallel: bool, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

fn run_inner(spec: &ExperimentSpec, parallel: bool) -> Result<ExperimentOutcome> {
    let trial_ids: Vec<usize> = (0..spec.trials).collect();
    let trials = map_jobs(&trial_ids, parallel, |&t| prepare_trial(spec, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let params: Vec<Vec<f64>> = GRIDS.iter().map(|&g| grid_params(spec, g)).collect();
    let mut jobs: Vec<(usize, usize, usize)> = Vec::new();
    for (gi, p) in params.iter().enumerate() {
        for t in 0..spec.trials {
            jobs.extend((0..p.len()).map(|k| (gi, t, k)));
        }
    }
    let results = map_jobs(&jobs, parallel, |&(gi, t, k)| {
        let data = &trials[t];
        let (w, converged, iterations) = learn_grid_point(spec, data, GRIDS[gi], k)?;
        score(&w, &data.truth, spec.rel_threshold, converged, iterations)
    });

    let mut scores: Vec<Vec<Vec<PointScore>>> = params
        .iter()
        .map(|p| (0..spec.trials).map(|_| Vec::with_capacity(p.len())).collect())
        .collect();
    for (&(gi, t, _), r) in jobs.iter().zip(results) {
        scores[gi][t].push(r?);
    }

    let grid = summarize_grid(&params, &scores);
    let records = select_records(spec, &params, &scores);
    Ok(ExperimentOutcome {
        trial_seeds: trials.iter().map(|d| d.seed).collect(),
        records,
        grid,
        scores,
    })
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn summarize_grid(params: &[Vec<f64>], scores: &[Vec<Vec<PointScore>>]) -> Vec<GridPointSummary> {
    let mut out = Vec::new();
    for (gi, p) in params.iter().enumerate() {
        for (k, &param) in p.iter().enumerate() {
            let at = || scores[gi].iter().map(move |trial| &trial[k]);
            out.push(GridPointSummary {
                grid: GRIDS[gi],
                index: k,
                param,
                f_measure: mean(at().map(|s| s.report.f_measure)),
                edge_l1: mean(at().map(|s| s.report.edge_l1)),
                edge_l2: mean(at().map(|s| s.report.edge_l2)),
                degree_l1: mean(at().map(|s| s.report.degree_l1)),
                degree_l2: mean(at().map(|s| s.report.degree_l2)),
                edges_per_node: mean(at().map(|s| s.edges_per_node)),
                component_count: mean(at().map(|s| s.report.component_count as f64)),
                disconnected_node_count: mean(at().map(|s| s.report.disconnected_node_count as f64)),
                nonconverged: at().filter(|s| !s.converged).count(),
                mean_iterations: mean(at().map(|s| s.iterations as f64)),
            });
        }
    }
    out
}

/// Index of the best value; ties go to the lowest index.
fn argbest(values: impl Iterator<Item = f64>, higher: bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.enumerate() {
        if v.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, b)) => {
                if higher {
                    v > b
                } else {
                    v < b
                }
            }
        };
        if better {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k)
}

/// Grid that serves `metric` for `model`, if configured.
fn source_grid(spec: &ExperimentSpec, model: ModelKind, metric: Metric) -> Option<GridKind> {
    let g = &spec.models;
    match model {
        ModelKind::LogDegree => g.log_degree.as_ref().map(|_| GridKind::LogDegree),
        ModelKind::L2Degree => g.l2_degree.as_ref().map(|_| GridKind::L2Degree),
        ModelKind::Baseline => {
            let gauss = g.gaussian_baseline.as_ref().map(|_| GridKind::Gaussian);
            if metric == Metric::FMeasure {
                g.threshold_baseline.as_ref().map(|_| GridKind::Threshold).or(gauss)
            } else {
                gauss
            }
        }
    }
}

fn select_records(spec: &ExperimentSpec, params: &[Vec<f64>], scores: &[Vec<Vec<PointScore>>]) -> Vec<ResultRecord> {
    let mut records = Vec::new();
    for model in ModelKind::ALL {
        for metric in Metric::ALL {
            let Some(grid) = source_grid(spec, model, metric) else {
                continue;
            };
            if grid == GridKind::Threshold && metric != Metric::FMeasure {
                continue;
            }
            let gi = GRIDS.iter().position(|&g| g == grid).expect("known grid");
            let per_grid = &scores[gi];
            let higher = metric.higher_is_better();
            let (param, grid_index, per_trial, per_trial_index) = match spec.selection {
                Selection::Averaged => {
                    let k = argbest(
                        (0..params[gi].len()).map(|k| mean(per_grid.iter().map(|trial| metric.of(&trial[k].report)))),
                        higher,
                    )
                    .unwrap_or(0);
                    let vals: Vec<f64> = per_grid.iter().map(|trial| metric.of(&trial[k].report)).collect();
                    (Some(params[gi][k]), Some(k), vals, vec![k; per_grid.len()])
                }
                Selection::PerTrial => {
                    let idx: Vec<usize> = per_grid
                        .iter()
                        .map(|trial| argbest(trial.iter().map(|s| metric.of(&s.report)), higher).unwrap_or(0))
                        .collect();
                    let vals = per_grid.iter().zip(&idx).map(|(trial, &k)| metric.of(&trial[k].report)).collect();
                    (None, None, vals, idx)
                }
            };
            let nonconverged = per_grid
                .iter()
                .zip(&per_trial_index)
                .filter(|(trial, &k)| !trial[k].converged)
                .count();
            records.push(ResultRecord {
                graph: spec.graph.name().to_string(),
                signal: spec.filter.name().to_string(),
                model,
                metric,
                grid,
                param,
                grid_index,
                value: mean(per_trial.iter().copied()),
                per_trial,
                per_trial_index,
                nonconverged,
            });
        }
    }
    records
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Summary<'a> {
    graph: &'a str,
    signal: &'a str,
    trials: usize,
    master_seed: u64,
    trial_seeds: &'a [u64],
    records: &'a [ResultRecord],
}

/// Writes the cell directory: `config.json`, `records.csv`, `table.csv`,
/// `grid.csv`, `trials.csv`, `summary.json` and, when `graphs` is set, the
/// ground truth and the F-measure-selected graph of every model per trial
/// under `graphs/`.
pub fn write_outputs(spec: &ExperimentSpec, outcome: &ExperimentOutcome, dir: &Path, graphs: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(spec)? + "\n")?;
    fs::write(dir.join("records.csv"), outcome.records_csv())?;
    fs::write(dir.join("table.csv"), outcome.table_csv())?;
    fs::write(dir.join("grid.csv"), outcome.grid_csv())?;
    fs::write(dir.join("trials.csv"), outcome.trials_csv())?;
    let summary = Summary {
        graph: spec.graph.name(),
        signal: spec.filter.name(),
        trials: spec.trials,
        master_seed: spec.master_seed,
        trial_seeds: &outcome.trial_seeds,
        records: &outcome.records,
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    if !graphs {
        return Ok(());
    }
    let gdir = dir.join("graphs");
    fs::create_dir_all(&gdir)?;
    for t in 0..spec.trials {
        let data = prepare_trial(spec, t)?;
        let write = |name: String, w: &EdgeVector| -> Result<()> {
            let f = fs::File::create(gdir.join(name))?;
            write_edge_list(w, BufWriter::new(f))
        };
        write(format!("trial{t:03}_truth.edges"), &data.truth)?;
        for r in outcome.records.iter().filter(|r| r.metric == Metric::FMeasure) {
            let (w, _, _) = learn_grid_point(spec, &data, r.grid, r.per_trial_index[t])?;
            write(format!("trial{t:03}_{}.edges", r.model.name()), &w)?;
        }
    }
    Ok(())
}
