//! Argument parsing and command dispatch.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use fusedlasso_core::path::{lambda1_max, lambda2_max_by_component, PathGrid, PathOptions};
use fusedlasso_core::simgen::{SignalBlock, SimConfig};
use fusedlasso_core::verify::{check_optimality, problem_certificate, Optimality};
use fusedlasso_core::{loss_value, solve, FusedProblem, Loss, SolverConfig, SolverKind};

use crate::bench::{run_bench, BenchSpec};
use crate::driver::run_path_parallel;
use crate::formats::{self, DataError};
use crate::results::{self, loss_name, SolveDoc, SparseBeta, VerifyDoc, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<fusedlasso_core::Error> for CliError {
    fn from(e: fusedlasso_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "fusedlasso", version, about = "Generalized fused lasso solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one (λ₁, λ₂) instance.
    Solve(SolveArgs),
    /// Solve over an exponential (λ₁, λ₂) grid.
    Path(PathArgs),
    /// Write a simulated instance to a directory.
    Simulate(SimulateArgs),
    /// Check whether a coefficient vector is optimal.
    Verify(VerifyArgs),
    /// Time full-grid paths of several solvers on simulated data.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Squared,
    Logistic,
    Cox,
}

impl From<LossArg> for Loss {
    fn from(l: LossArg) -> Loss {
        match l {
            LossArg::Squared => Loss::Squared,
            LossArg::Logistic => Loss::Logistic,
            LossArg::Cox => Loss::Cox,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Exact,
    Naive,
    Huber,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> SolverKind {
        match s {
            SolverArg::Exact => SolverKind::Exact,
            SolverArg::Naive => SolverKind::Naive,
            SolverArg::Huber => SolverKind::Huber,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimArg {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
}

impl SimArg {
    fn dims(self) -> u8 {
        match self {
            SimArg::OneD => 1,
            SimArg::TwoD => 2,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimOptions {
    /// Observations.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Coefficients in 1D; grid side in 2D.
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 10.0)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long, value_enum, default_value_t = LossArg::Squared)]
    pub loss: LossArg,
    /// Headerless CSV design matrix, one observation per row.
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Response, one value per line (`time,status` for cox).
    #[arg(long)]
    pub response: Option<PathBuf>,
    /// Edge list, one `k l w` triple per line, 1-based.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Optional node weights, one `k w` pair per line.
    #[arg(long)]
    pub node_weights: Option<PathBuf>,
    /// Use a simulated instance instead of files.
    #[arg(long, value_enum, conflicts_with_all = ["design", "response", "graph", "node_weights"])]
    pub sim: Option<SimArg>,
    #[command(flatten)]
    pub sim_options: SimOptions,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
    pub solver: SolverArg,
    #[arg(long)]
    pub lambda1: f64,
    #[arg(long)]
    pub lambda2: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 50)]
    pub n_lambda1: usize,
    #[arg(long, default_value_t = 20)]
    pub n_lambda2: usize,
    /// Smallest grid value as a fraction of the largest.
    #[arg(long, default_value_t = 1e-4)]
    pub ratio: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
    pub solver: SolverArg,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Override the computed λ₁ maximum.
    #[arg(long)]
    pub lambda1_max: Option<f64>,
    /// Override the computed λ₂ maximum.
    #[arg(long)]
    pub lambda2_max: Option<f64>,
    /// Skip the rest of a row after more than this many times n nonzero
    /// coefficients; 0 disables.
    #[arg(long, default_value_t = 2)]
    pub stop_factor: usize,
    /// Worker threads for λ₂ rows.
    #[arg(long, env = "FUSED_SOLVE_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub sim: SimArg,
    #[command(flatten)]
    pub sim_options: SimOptions,
    /// Signal block: `auto`, `off`, or a length (1D) or side (2D).
    #[arg(long, default_value = "auto")]
    pub block: String,
    /// Directory for X.csv, y.csv, graph.edges, beta_true.csv, meta.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Coefficients: a solve result document or one value per line.
    #[arg(long)]
    pub beta: PathBuf,
    #[arg(long)]
    pub lambda1: f64,
    #[arg(long)]
    pub lambda2: f64,
    /// Largest coordinate move tolerated.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = SimArg::OneD)]
    pub sim: SimArg,
    /// Observation counts, paired with --p.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub p: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 10.0)]
    pub sigma: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact,naive,huber")]
    pub solvers: Vec<SolverArg>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Untimed runs per solver before the timed one.
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
    #[arg(long, env = "FUSED_SOLVE_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Also print the table as tab-separated text on standard output.
    #[arg(long)]
    pub tsv: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status. Messages go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Path(args) => cmd_path(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Bench(args) => cmd_bench(&args),
    }
}

fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("missing required flag {flag} (or use --sim)")))
}

/// Loads the problem described by the data flags, with both λ set to 0.
pub fn load_problem(data: &DataArgs) -> CliResult<FusedProblem> {
    let loss: Loss = data.loss.into();
    if let Some(sim) = data.sim {
        if loss != Loss::Squared {
            return Err(CliError::Usage("--sim generates squared-error data; drop --loss".into()));
        }
        let o = &data.sim_options;
        let instance = crate::bench::simulate(sim.dims(), o.n, o.p, o.seed, o.sigma)?;
        return Ok(crate::bench::sim_problem(&instance)?);
    }
    let design_path = require(&data.design, "--design")?;
    let response_path = require(&data.response, "--response")?;
    let graph_path = require(&data.graph, "--graph")?;

    let design_name = design_path.display().to_string();
    let x = formats::parse_design(&formats::read_text(design_path)?, &design_name)?;
    let response_name = response_path.display().to_string();
    let response = formats::parse_response(&formats::read_text(response_path)?, &response_name, loss)?;
    if response.len() != x.nrows() {
        return Err(DataError::new(
            &response_name,
            None,
            format!("{} responses for {} design rows", response.len(), x.nrows()),
        )
        .into());
    }
    let p = x.ncols();
    let graph_name = graph_path.display().to_string();
    let edges = formats::parse_edges(&formats::read_text(graph_path)?, &graph_name, p)?;
    let weights = match &data.node_weights {
        Some(path) => {
            let name = path.display().to_string();
            formats::parse_node_weights(&formats::read_text(path)?, &name, p)?
        }
        None => vec![1.0; p],
    };
    let graph = formats::build_graph(edges, weights, &graph_name)?;
    Ok(FusedProblem::new(x, response, graph, 0.0, 0.0)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Data(format!("standard output: {e}")))
        }
    }
}

fn certificate_residual(problem: &FusedProblem, beta: &[f64]) -> Option<f64> {
    problem_certificate(problem, beta).ok().map(|c| c.max_residual)
}

fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let base = load_problem(&args.data)?;
    let problem = base.with_lambdas(args.lambda1, args.lambda2)?;
    let kind: SolverKind = args.solver.into();
    let sol = solve(&problem, None, &SolverConfig::new(kind))?;
    let residual = match &sol.certificate {
        Some(c) => Some(c.max_residual),
        None => certificate_residual(&problem, &sol.beta),
    };
    let doc = SolveDoc {
        schema_version: SCHEMA_VERSION,
        command: "solve".to_owned(),
        loss: loss_name(problem.loss()).to_owned(),
        solver: kind.name().to_owned(),
        n: problem.n(),
        p: problem.p(),
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        objective: sol.objective,
        converged: sol.converged,
        iterations: sol.iterations,
        certificate_residual: residual,
        beta: SparseBeta::from_dense(&sol.beta),
    };
    emit(&args.out, &results::to_json(&doc))
}

fn cmd_path(args: &PathArgs) -> CliResult<()> {
    let problem = load_problem(&args.data)?;
    let l1 = match args.lambda1_max {
        Some(v) => v,
        None => lambda1_max(&problem)?,
    };
    let l2 = match args.lambda2_max {
        Some(v) => v,
        None => {
            let per = lambda2_max_by_component(&problem)?;
            let max = per.iter().copied().fold(0.0, f64::max);
            if per.len() > 1 {
                eprintln!(
                    "warning: graph has {} components; using the largest fusing λ₂ ({max})",
                    per.len()
                );
            }
            max
        }
    };
    let grid = PathGrid::exponential(l1, l2, args.grid.n_lambda1, args.grid.n_lambda2, args.grid.ratio)?;
    let kind: SolverKind = args.solver.into();
    let options = PathOptions {
        solver: SolverConfig::new(kind),
        stop_factor: (args.stop_factor > 0).then_some(args.stop_factor),
        certify: true,
    };
    if args.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let path = run_path_parallel(&problem, &grid, &options, args.threads)?;
    let doc = results::PathDoc::new(problem.loss(), kind, problem.n(), problem.p(), &path);
    emit(&args.out, &results::to_json(&doc))
}

fn parse_block(text: &str) -> CliResult<SignalBlock> {
    match text {
        "auto" => Ok(SignalBlock::Auto),
        "off" => Ok(SignalBlock::Off),
        other => other
            .parse()
            .map(SignalBlock::Length)
            .map_err(|_| CliError::Usage(format!("--block expects auto, off or a length, got {other:?}"))),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let o = &args.sim_options;
    let config = SimConfig {
        sigma: o.sigma,
        block: parse_block(&args.block)?,
        ..SimConfig::new(o.n, o.p, o.seed)
    };
    let sim = match args.sim {
        SimArg::OneD => fusedlasso_core::simgen::gen_1d(&config)?,
        SimArg::TwoD => fusedlasso_core::simgen::gen_2d(&config)?,
    };
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let files = [
        ("X.csv", formats::format_design(&sim.x)),
        ("y.csv", formats::format_vector(&sim.y)),
        ("graph.edges", formats::format_edges(&sim.graph)),
        ("beta_true.csv", formats::format_vector(&sim.beta_true)),
    ];
    let mut names = Vec::new();
    for (name, text) in &files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        names.push(name.to_string());
    }
    let doc = results::SimulateDoc::new(&sim.metadata, sim.beta_true.len(), names);
    let meta = dir.join("meta.json");
    fs::write(&meta, results::to_json(&doc)).map_err(|e| CliError::Data(format!("{}: {e}", meta.display())))
}

/// Reads a solve document or a plain one-per-line vector.
pub fn read_beta(path: &Path) -> CliResult<Vec<f64>> {
    let name = path.display().to_string();
    let text = formats::read_text(path)?;
    if text.trim_start().starts_with('{') {
        let doc: SolveDoc = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{name}: not a solve document: {e}")))?;
        return doc.beta.to_dense().map_err(|e| CliError::Data(format!("{name}: {e}")));
    }
    let mut beta = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let v: f64 = l
            .parse()
            .map_err(|_| DataError::new(&name, Some(i + 1), format!("not a number: {l:?}")))?;
        beta.push(v);
    }
    Ok(beta)
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let base = load_problem(&args.data)?;
    let problem = base.with_lambdas(args.lambda1, args.lambda2)?;
    let beta = read_beta(&args.beta)?;
    if beta.len() != problem.p() {
        return Err(CliError::Data(format!(
            "{}: {} coefficients for {} design columns",
            args.beta.display(),
            beta.len(),
            problem.p()
        )));
    }
    let objective = loss_value(&problem, &beta)?;
    let (certified, violations, cert) = match problem.loss() {
        Loss::Squared => {
            let verdict = check_optimality(&problem, &beta, args.tol)?;
            let violations = results::violations_of(&verdict);
            let certified = matches!(verdict, Optimality::Certified(_));
            (certified, violations, verdict.certificate().clone())
        }
        _ => {
            let cert = problem_certificate(&problem, &beta)?;
            let ok = cert.max_residual <= fusedlasso_core::verify::CERTIFICATE_TOL;
            let violations = if ok {
                Vec::new()
            } else {
                vec![format!("stationarity residual {} above tolerance", cert.max_residual)]
            };
            (ok, violations, cert)
        }
    };
    let doc = VerifyDoc {
        schema_version: SCHEMA_VERSION,
        command: "verify".to_owned(),
        loss: loss_name(problem.loss()).to_owned(),
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        objective,
        certified,
        max_residual: cert.max_residual,
        violations,
        s: cert.s,
        t: cert.t,
    };
    emit(&args.out, &results::to_json(&doc))
}

fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    if args.n.len() != args.p.len() {
        return Err(CliError::Usage(format!(
            "--n has {} values but --p has {}",
            args.n.len(),
            args.p.len()
        )));
    }
    if args.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let spec = BenchSpec {
        dims: args.sim.dims(),
        sizes: args.n.iter().copied().zip(args.p.iter().copied()).collect(),
        seeds: args.seeds.clone(),
        sigma: args.sigma,
        solvers: args.solvers.iter().map(|s| SolverKind::from(*s)).collect(),
        n_lambda1: args.grid.n_lambda1,
        n_lambda2: args.grid.n_lambda2,
        ratio: args.grid.ratio,
        warmup: args.warmup,
        threads: args.threads,
    };
    let table = run_bench(&spec)?;
    if args.tsv {
        print!("{}", table.to_tsv());
    }
    match &args.out {
        Some(_) => emit(&args.out, &results::to_json(&table)),
        None if args.tsv => Ok(()),
        None => emit(&None, &results::to_json(&table)),
    }
}
