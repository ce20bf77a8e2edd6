//! `gee` command-line front end.
//!
//! Subcommands:
//!
//! - `embed`: edge list + labels to an embedding CSV,
//! - `sbm`: write a stochastic block model graph and its labels,
//! - `density`: node count, edge count and edge density of an edge list,
//! - `bench`: time the sparse and edge-list pipelines over option settings.
//!
//! Exit codes: 0 success, 1 output or verification failure, 2 bad
//! arguments, 3 unreadable or malformed input, 4 shape or label mismatch.

mod bench;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_gee::{
    edge_density, encode, generate_sbm, parse_edge_list, parse_labels, write_edge_list,
    write_embedding, write_labels, EdgeList, EmbedError, EmbedOptions, GraphIoError, LabelVector,
    ParseOptions, SbmParams, SparseError,
};
use thiserror::Error;

pub use bench::{BenchResult, Pipeline};

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Args(String),

    #[error("{path}: {source}")]
    Input { path: PathBuf, source: GraphIoError },

    #[error("{0}")]
    Shape(String),

    #[error("{path}: {source}")]
    Output { path: PathBuf, source: io::Error },

    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Args(_) => 2,
            CliError::Input { source, .. } if source.is_parse_error() => 3,
            CliError::Input { .. } | CliError::Shape(_) => 4,
            CliError::Output { .. } | CliError::Verification(_) => 1,
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        CliError::Shape(e.to_string())
    }
}

impl From<SparseError> for CliError {
    fn from(e: SparseError) -> Self {
        CliError::Shape(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "gee", version, about = "Sparse graph encoder embedding")]
struct Cli {
    /// Worker threads for the row-parallel kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Embed a labelled graph and write the N x K matrix as CSV.
    Embed(EmbedArgs),
    /// Generate a stochastic block model graph.
    Sbm(SbmArgs),
    /// Report node count, edge count and edge density.
    Density(DensityArgs),
    /// Time the embedding pipelines.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge list: `i j [w]` per line, whitespace or comma separated.
    #[arg(long)]
    edges: PathBuf,

    /// Treat edges as directed instead of mirroring them.
    #[arg(long)]
    directed: bool,

    /// Node ids in the input files start at 1.
    #[arg(long)]
    one_based: bool,

    /// Node count, for graphs whose highest-numbered nodes are isolated.
    #[arg(long)]
    nodes: Option<usize>,
}

impl GraphArgs {
    fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            index_base: usize::from(self.one_based),
            directed: self.directed,
            n_nodes: self.nodes,
            ..Default::default()
        }
    }

    fn read_edges(&self) -> Result<EdgeList, CliError> {
        read_input(&self.edges, |r| parse_edge_list(r, &self.parse_options()))
    }
}

#[derive(Args, Debug)]
struct LabelArgs {
    /// Labels: one per line, or `node label` pairs; -1 marks unlabeled nodes.
    #[arg(long)]
    labels: PathBuf,

    /// Number of classes (default: largest label + 1).
    #[arg(long)]
    classes: Option<usize>,
}

impl LabelArgs {
    fn read(&self, graph: &GraphArgs, n_nodes: usize) -> Result<LabelVector, CliError> {
        let opts = ParseOptions {
            n_classes: self.classes,
            ..graph.parse_options()
        };
        let labels = read_input(&self.labels, |r| parse_labels(r, &opts))?;
        if labels.len() != n_nodes {
            return Err(CliError::Shape(format!(
                "{}: {} labels for a graph with {} nodes",
                self.labels.display(),
                labels.len(),
                n_nodes
            )));
        }
        Ok(labels)
    }
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[command(flatten)]
    graph: GraphArgs,

    #[command(flatten)]
    labels: LabelArgs,

    /// Laplacian normalization, D^-1/2 A D^-1/2.
    #[arg(long)]
    lap: bool,

    /// Diagonal augmentation, A + I.
    #[arg(long)]
    diag: bool,

    /// Scale each embedding row to unit 2-norm.
    #[arg(long)]
    corr: bool,

    /// Output CSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SbmArgs {
    #[arg(long)]
    nodes: usize,

    /// Comma-separated class probabilities summing to 1.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.3,0.5")]
    class_probs: Vec<f64>,

    /// Edge probability between nodes of the same class.
    #[arg(long, default_value_t = 0.13)]
    within: f64,

    /// Edge probability between nodes of different classes.
    #[arg(long, default_value_t = 0.1)]
    between: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    out_edges: PathBuf,

    #[arg(long)]
    out_labels: PathBuf,

    /// Contiguous class blocks of size round(n * p) instead of sampled labels.
    #[arg(long)]
    exact_counts: bool,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    graph: GraphArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    graph: GraphArgs,

    #[command(flatten)]
    labels: LabelArgs,

    /// Enable laplacian, diagonal and correlation.
    #[arg(long, conflicts_with_all = ["lap", "diag", "corr", "grid"])]
    all_options: bool,

    #[arg(long, value_name = "BOOL")]
    lap: Option<bool>,

    #[arg(long, value_name = "BOOL")]
    diag: Option<bool>,

    #[arg(long, value_name = "BOOL")]
    corr: Option<bool>,

    /// Run all eight option combinations.
    #[arg(long, conflicts_with_all = ["lap", "diag", "corr"])]
    grid: bool,

    #[arg(long, default_value_t = 5)]
    repeats: usize,

    #[arg(long, value_enum, default_value_t = PipelineArg::Sparse)]
    pipeline: PipelineArg,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Name for the dataset column (default: edge file stem).
    #[arg(long)]
    dataset: Option<String>,

    /// Write results here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PipelineArg {
    Sparse,
    Reference,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// One line per repeat.
    Csv,
    /// One line per setting with mean and min.
    Table,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let command = cli.command;
    let result = with_threads(cli.threads, stdout, stderr, move |out, err| dispatch(command, out, err));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

type Body<'a> = dyn FnOnce(&mut dyn Write, &mut dyn Write) -> Result<(), CliError> + Send + 'a;

/// Runs `body` with the requested number of worker threads. Output produced
/// inside a dedicated pool is buffered and copied out afterwards.
fn with_threads<'a, F>(
    threads: Option<usize>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    body: F,
) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write, &mut dyn Write) -> Result<(), CliError> + Send + 'a,
{
    let body: Box<Body<'a>> = Box::new(body);
    match threads {
        None => body(stdout, stderr),
        Some(0) => Err(CliError::Args("--threads must be at least 1".into())),
        Some(n) => {
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let result = in_pool(n, || body(&mut out, &mut err));
            let _ = stdout.write_all(&out);
            let _ = stderr.write_all(&err);
            result
        }
    }
}

#[cfg(feature = "parallel")]
fn in_pool<F>(n: usize, f: F) -> Result<(), CliError>
where
    F: FnOnce() -> Result<(), CliError> + Send,
{
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Args(format!("cannot start {n} threads: {e}")))?
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn in_pool<F>(_n: usize, f: F) -> Result<(), CliError>
where
    F: FnOnce() -> Result<(), CliError> + Send,
{
    f()
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Embed(args) => cmd_embed(args, stdout, stderr),
        Command::Sbm(args) => cmd_sbm(args, stdout, stderr),
        Command::Density(args) => cmd_density(args, stdout),
        Command::Bench(args) => cmd_bench(args, stdout, stderr),
    }
}

fn read_input<T, F>(path: &Path, parse: F) -> Result<T, CliError>
where
    F: FnOnce(BufReader<File>) -> Result<T, GraphIoError>,
{
    let file = File::open(path).map_err(|e| CliError::Input {
        path: path.to_owned(),
        source: e.into(),
    })?;
    parse(BufReader::new(file)).map_err(|source| CliError::Input {
        path: path.to_owned(),
        source,
    })
}

/// Writes to `path`, or to `fallback` when no path is given.
fn write_output<F>(path: Option<&Path>, fallback: &mut dyn Write, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let shown = path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_owned);
    let wrap = |source| CliError::Output {
        path: shown.clone(),
        source,
    };
    match path {
        Some(p) => {
            let mut sink = BufWriter::new(File::create(p).map_err(wrap)?);
            write(&mut sink).and_then(|_| sink.flush()).map_err(wrap)
        }
        None => {
            let mut sink = BufWriter::new(fallback);
            write(&mut sink).and_then(|_| sink.flush()).map_err(wrap)
        }
    }
}

/// `x` with five significant digits; zero prints as `0`.
fn significant5(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (4 - x.abs().log10().floor() as i64).max(0) as usize;
    format!("{x:.decimals$}")
}

fn cmd_embed(args: EmbedArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let edges = args.graph.read_edges()?;
    let labels = args.labels.read(&args.graph, edges.n_nodes())?;
    let opts = EmbedOptions::new(args.lap, args.diag, args.corr);

    let start = Instant::now();
    let adjacency = edges.to_adjacency()?;
    let z = encode(&adjacency, &labels, opts)?;
    let seconds = start.elapsed().as_secs_f64();

    write_output(args.out.as_deref(), stdout, |w| write_embedding(&z, w))?;

    let density = edge_density(edges.n_nodes(), edges.undirected_edge_count())
        .map_or_else(|_| "n/a".to_string(), significant5);
    let _ = writeln!(
        stderr,
        "nodes={} edges={} classes={} nnz={} density={} options=[{}] seconds={:.6}",
        edges.n_nodes(),
        edges.len(),
        labels.k_classes(),
        adjacency.nnz(),
        density,
        opts,
        seconds
    );
    Ok(())
}

fn cmd_sbm(args: SbmArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let params = SbmParams {
        n_nodes: args.nodes,
        class_probs: args.class_probs,
        within_prob: args.within,
        between_prob: args.between,
        seed: args.seed,
        exact_counts: args.exact_counts,
    };
    let start = Instant::now();
    let (edges, labels) = generate_sbm(&params).map_err(|e| CliError::Args(e.to_string()))?;
    let seconds = start.elapsed().as_secs_f64();

    write_output(Some(&args.out_edges), stdout, |w| write_edge_list(&edges, w))?;
    write_output(Some(&args.out_labels), stdout, |w| write_labels(&labels, w))?;

    let counts = labels.class_counts();
    let counts_text: Vec<String> = counts.iter().map(usize::to_string).collect();
    let (mean, var) = expected_edges(&counts, params.within_prob, params.between_prob);
    let _ = writeln!(stdout, "edges={}", edges.len());
    let _ = writeln!(stdout, "class_counts={}", counts_text.join(","));
    let _ = writeln!(stdout, "expected_edges={mean:.1} sd={:.1}", var.sqrt());
    let _ = writeln!(stderr, "generated in {seconds:.3}s");
    Ok(())
}

/// Mean and variance of the edge count given the class sizes.
fn expected_edges(counts: &[usize], within: f64, between: f64) -> (f64, f64) {
    let mut mean = 0.0;
    let mut var = 0.0;
    for (a, &na) in counts.iter().enumerate() {
        for (b, &nb) in counts.iter().enumerate().skip(a) {
            let (pairs, p) = if a == b {
                ((na * na.saturating_sub(1) / 2) as f64, within)
            } else {
                ((na * nb) as f64, between)
            };
            mean += pairs * p;
            var += pairs * p * (1.0 - p);
        }
    }
    (mean, var)
}

fn cmd_density(args: DensityArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let edges = args.graph.read_edges()?;
    let n_edges = edges.undirected_edge_count();
    let d = edge_density(edges.n_nodes(), n_edges).map_err(|e| CliError::Shape(e.to_string()))?;
    let _ = writeln!(stdout, "nodes {}", edges.n_nodes());
    let _ = writeln!(stdout, "edges {n_edges}");
    let _ = writeln!(stdout, "density {}", significant5(d));
    Ok(())
}

fn cmd_bench(args: BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    if args.repeats == 0 {
        return Err(CliError::Args("--repeats must be at least 1".into()));
    }
    let edges = args.graph.read_edges()?;
    let labels = args.labels.read(&args.graph, edges.n_nodes())?;
    let settings: Vec<EmbedOptions> = if args.grid {
        EmbedOptions::grid().to_vec()
    } else if args.all_options {
        vec![EmbedOptions::ALL]
    } else {
        vec![EmbedOptions::new(
            args.lap.unwrap_or(false),
            args.diag.unwrap_or(false),
            args.corr.unwrap_or(false),
        )]
    };
    let pipelines: &[Pipeline] = match args.pipeline {
        PipelineArg::Sparse => &[Pipeline::Sparse],
        PipelineArg::Reference => &[Pipeline::Reference],
        PipelineArg::Both => &[Pipeline::Sparse, Pipeline::Reference],
    };
    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.graph
            .edges
            .file_stem()
            .map_or_else(|| "graph".to_string(), |s| s.to_string_lossy().into_owned())
    });

    let mut results = Vec::new();
    for &opts in &settings {
        let mut outputs = Vec::new();
        for &pipeline in pipelines {
            let (result, z) = bench::run_setting(&dataset, pipeline, &edges, &labels, opts, args.repeats)?;
            results.push(result);
            outputs.push(z);
        }
        if let [sparse, reference] = outputs.as_slice() {
            let diff = sparse.max_abs_diff(reference);
            let _ = writeln!(stderr, "max_abs_diff [{opts}] {diff:e}");
            if diff > bench::PIPELINE_TOLERANCE {
                return Err(CliError::Verification(format!(
                    "pipelines disagree by {diff:e} for [{opts}]"
                )));
            }
        }
    }

    write_output(args.out.as_deref(), stdout, |w| match args.format {
        Format::Csv => bench::write_csv(&results, w),
        Format::Table => bench::write_table(&results, w),
    })?;
    if args.format == Format::Csv {
        let _ = bench::write_table(&results, stderr);
    }
    Ok(())
}
