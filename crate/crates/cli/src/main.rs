use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphlearn::checks::norms_check;
use graphlearn::experiment::{run_experiment_with, write_outputs, Execution, ExperimentSpec};
use graphlearn::generators::{self, GraphModel};
use graphlearn::io::{read_edge_list, read_matrix_csv, write_coords_csv, write_edge_list, write_matrix_csv};
use graphlearn::metrics::{self, DEFAULT_REL_THRESHOLD};
use graphlearn::signals::{self, FilterSpec};
use graphlearn::solvers::{gaussian_kernel_objective, random_initial_weights};
use graphlearn::{
    gaussian_kernel, knn_edges, laplacian_from_edges, learn_l2_degree, learn_log_degree, pairwise_distances,
    DistanceVector, EdgeVector, Error, KnnWeighting, SolverConfig,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "graphlearn", version, about = "Learn sparse graphs from smooth signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random ground-truth graph and write it as an edge list.
    GenerateGraph(GenerateGraphArgs),
    /// Filter white noise on a graph and write the signals as CSV (rows = nodes).
    GenerateSignals(GenerateSignalsArgs),
    /// Learn a graph from distances or data.
    Learn(LearnArgs),
    /// Compare a learned edge list against a ground truth.
    Evaluate(EvaluateArgs),
    /// Run a grid-search experiment described by a JSON config.
    Experiment(ExperimentArgs),
    /// Check the matrix/edge-vector identities on a random instance.
    NormsCheck(NormsCheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Rgg,
    NonUniform,
    ErdosRenyi,
    BarabasiAlbert,
}

#[derive(Args)]
struct GenerateGraphArgs {
    #[arg(long, value_enum, default_value = "rgg")]
    kind: GraphKind,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Kernel width of the geometric graphs.
    #[arg(long)]
    sigma: Option<f64>,
    /// Weight cutoff of the random geometric graph.
    #[arg(long)]
    threshold: Option<f64>,
    /// Density decay of the non-uniform graph.
    #[arg(long)]
    density: Option<f64>,
    /// Edge probability of the Erdos-Renyi graph (default 3/m).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    edges_per_node: Option<usize>,
    #[arg(long)]
    output: PathBuf,
    /// Also write node coordinates (geometric graphs only).
    #[arg(long)]
    coords: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterKind {
    Tikhonov,
    Generative,
    Heat,
}

#[derive(Args)]
struct GenerateSignalsArgs {
    /// Ground-truth edge list.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "tikhonov")]
    filter: FilterKind,
    /// Filter parameter (Tikhonov alpha or heat t).
    #[arg(long)]
    param: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Noise energy relative to the signal energy.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum LearnModel {
    Log,
    L2,
    Gaussian,
    Knn,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long, value_enum)]
    model: LearnModel,
    /// Squared distances as an edge list.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    distances: Option<PathBuf>,
    /// Data matrix as CSV, one row per node.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Divide the distances by their mean before learning.
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Total weight of the l2-degree model (default: node count).
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long)]
    step: Option<f64>,
    /// Start the solver from random weights drawn with this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Learned edge list.
    #[arg(long)]
    output: PathBuf,
    /// Write the run summary here instead of stdout.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    learned: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = DEFAULT_REL_THRESHOLD)]
    rel_threshold: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the experiment cell.
    #[arg(long)]
    output: PathBuf,
    /// Run all jobs on the calling thread.
    #[arg(long, conflicts_with = "threads")]
    serial: bool,
    /// Worker count (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Skip writing per-trial edge lists.
    #[arg(long)]
    no_graphs: bool,
}

#[derive(Args)]
struct NormsCheckArgs {
    #[arg(long, default_value_t = 50)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

/// Failure with its exit code: 1 for invalid input, 2 for runtime errors.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::NonFinite { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", path.display()),
        })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", path.display()),
        })
}

fn generate_graph(a: GenerateGraphArgs) -> CmdResult {
    let model = match a.kind {
        GraphKind::Rgg => {
            let GraphModel::Rgg { sigma, threshold } = GraphModel::rgg() else { unreachable!() };
            GraphModel::Rgg {
                sigma: a.sigma.unwrap_or(sigma),
                threshold: a.threshold.unwrap_or(threshold),
            }
        }
        GraphKind::NonUniform => {
            let GraphModel::NonUniform { sigma, density } = GraphModel::nonuniform() else { unreachable!() };
            GraphModel::NonUniform {
                sigma: a.sigma.unwrap_or(sigma),
                density: a.density.unwrap_or(density),
            }
        }
        GraphKind::ErdosRenyi => GraphModel::ErdosRenyi { p: a.p },
        GraphKind::BarabasiAlbert => GraphModel::BarabasiAlbert {
            edges_per_node: a.edges_per_node.unwrap_or(2),
        },
    };
    let g = generators::generate(&model, a.m, a.seed)?;
    write_edge_list(&g.edges, create(&a.output)?)?;
    if let Some(path) = a.coords {
        let coords = g
            .coords
            .ok_or_else(|| invalid(format!("{} graphs have no coordinates", model.name())))?;
        write_coords_csv(&coords, create(&path)?)?;
    }
    eprintln!("{} nodes, {} edges", g.edges.nodes(), g.edges.nonzeros());
    Ok(())
}

fn generate_signals(a: GenerateSignalsArgs) -> CmdResult {
    let filter = match a.filter {
        FilterKind::Tikhonov => FilterSpec::Tikhonov {
            alpha: a.param.unwrap_or(FilterSpec::DEFAULT_TIKHONOV_ALPHA),
        },
        FilterKind::Generative => FilterSpec::Generative,
        FilterKind::Heat => FilterSpec::Heat {
            t: a.param.unwrap_or(FilterSpec::DEFAULT_HEAT_T),
        },
    };
    let w = read_edge_list(open(&a.graph)?)?;
    let lap = signals::normalize_laplacian_scale(&laplacian_from_edges(&w))?;
    let spec = signals::spectrum(&lap);
    let x = signals::generate_smooth_matrix(&spec, &filter, a.n, a.seed)?;
    let x = signals::add_noise(&x, a.noise, a.seed)?;
    write_matrix_csv(&x, create(&a.output)?)?;
    Ok(())
}

fn load_distances(a: &LearnArgs) -> Result<DistanceVector, Failure> {
    let z = match (&a.distances, &a.data) {
        (Some(path), _) => {
            let w = read_edge_list(open(path)?)?;
            DistanceVector::new(w.nodes(), w.into_weights())?
        }
        (None, Some(path)) => pairwise_distances(&read_matrix_csv(open(path)?)?)?,
        (None, None) => return Err(invalid("one of --distances or --data is required")),
    };
    if a.normalize && z.mean() > 0.0 {
        return Ok(z.scaled(1.0 / z.mean())?);
    }
    Ok(z)
}

fn learn(a: LearnArgs) -> CmdResult {
    let z = load_distances(&a)?;
    let m = z.nodes();
    let cfg = SolverConfig {
        step: a.step,
        tolerance: a.tol,
        max_iterations: a.max_iter,
        initial_weights: a.seed.map(|s| random_initial_weights(m, s)),
        ..Default::default()
    };
    let (w, iterations, converged, objective): (EdgeVector, usize, bool, Option<f64>) = match a.model {
        LearnModel::Log => {
            let r = learn_log_degree(&z, a.alpha, a.beta, &cfg)?;
            (r.weights, r.iterations, r.converged, Some(r.final_objective))
        }
        LearnModel::L2 => {
            let r = learn_l2_degree(&z, a.alpha, a.scale.unwrap_or(m as f64), &cfg)?;
            (r.weights, r.iterations, r.converged, Some(r.final_objective))
        }
        LearnModel::Gaussian => {
            let sigma = a.sigma.ok_or_else(|| invalid("--sigma is required for the gaussian model"))?;
            let w = gaussian_kernel(&z, sigma)?;
            let obj = gaussian_kernel_objective(w.weights(), z.values(), sigma);
            (w, 0, true, Some(obj))
        }
        LearnModel::Knn => {
            let k = a.k.ok_or_else(|| invalid("--k is required for the knn model"))?;
            let weighting = match a.sigma {
                Some(sigma) => KnnWeighting::Gaussian { sigma },
                None => KnnWeighting::Binary,
            };
            (knn_edges(&z, k, weighting)?, 0, true, None)
        }
    };
    write_edge_list(&w, create(&a.output)?)?;
    let summary = json!({
        "weights-path": a.output.display().to_string(),
        "iterations": iterations,
        "converged": converged,
        "finalObjective": objective,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(Error::from)? + "\n";
    match a.summary {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    if !converged {
        eprintln!("warning: iteration cap reached before convergence");
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> CmdResult {
    let learned = read_edge_list(open(&a.learned)?)?;
    let truth = read_edge_list(open(&a.truth)?)?;
    let report = metrics::evaluate(&learned, &truth, a.rel_threshold)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
    Ok(())
}

fn experiment(a: ExperimentArgs) -> CmdResult {
    let text = fs::read_to_string(&a.config).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", a.config.display()),
    })?;
    let spec = ExperimentSpec::from_json(&text)?;
    let exec = match (a.serial, a.threads) {
        (true, _) => Execution::Serial,
        (false, Some(k)) => Execution::Threads(k),
        (false, None) => Execution::Parallel,
    };
    let outcome = run_experiment_with(&spec, exec)?;
    write_outputs(&spec, &outcome, &a.output, !a.no_graphs)?;
    let nonconverged: usize = outcome.grid.iter().map(|g| g.nonconverged).sum();
    if nonconverged > 0 {
        eprintln!("warning: {nonconverged} solves hit the iteration cap");
    }
    print!("{}", outcome.table_csv());
    Ok(())
}

fn norms(a: NormsCheckArgs) -> CmdResult {
    let checks = norms_check(a.m, a.n, a.seed)?;
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for c in &checks {
        let ok = c.passes(a.tol);
        failed += usize::from(!ok);
        writeln!(out, "{} {:.3e} {}", if ok { "ok  " } else { "FAIL" }, c.rel_error, c.name)?;
    }
    if failed > 0 {
        return Err(Failure {
            code: 2,
            message: format!("{failed} identities exceed tolerance {:e}", a.tol),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::GenerateGraph(a) => generate_graph(a),
        Command::GenerateSignals(a) => generate_signals(a),
        Command::Learn(a) => learn(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment(a) => experiment(a),
        Command::NormsCheck(a) => norms(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
