//! `apm`: build influence trees, plan invitations and run sweeps from the shell.
//!
//! Exit status is 0 on success, 1 on a usage error and 2 when the inputs
//! are well formed but the request cannot be served.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use apm_core::bench::{run_experiment, write_csv, ExperimentSpec};
use apm_core::eval::{
    acceptance_probability, mc_estimate, selection_mask, submodularity_counterexample,
};
use apm_core::graph::{
    generate_synthetic, load_edge_list, write_edge_list, FriendSet, HomophilyModel, NodeId,
    SocialGraph, ZipfWeightConfig,
};
use apm_core::miia::{build_miia, Arborescence};
use apm_core::planner::{run_planner, Algorithm, InvitationPlan, PlanRequest};
use apm_core::{BenchError, EvalError, GraphError, PlanError, TreeError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("{0}")]
    Invalid(String),
}

impl From<io::Error> for CliError {
    fn from(source: io::Error) -> Self {
        CliError::Io {
            path: "<stdout>".into(),
            source,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "apm",
    version,
    about = "Plan friend invitations that maximise the chance a target accepts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph with Zipf-distributed edge weights.
    Gen(GenArgs),
    /// Print the influence arborescence towards a target.
    Miia(TreeArgs),
    /// Choose whom to invite under a budget.
    Plan(PlanArgs),
    /// Acceptance probability of a given invitation set.
    Eval(EvalArgs),
    /// Monte Carlo estimate of the acceptance probability of an invitation set.
    Simulate(SimulateArgs),
    /// Show that the acceptance probability is not submodular.
    Counterexample,
    /// Run a sensitivity sweep described by an experiment file and write CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum OutputFormat {
    #[default]
    Table,
    Json,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1000)]
    nodes: usize,
    #[arg(long, default_value_t = 5.0)]
    avg_degree: f64,
    /// Zipf skew; 0 gives every edge the largest weight.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 10)]
    ranks: usize,
    #[arg(long, default_value_t = 0.9)]
    w_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list file to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TreeArgs {
    /// Edge list with `u v w` lines.
    #[arg(long)]
    graph: PathBuf,
    /// Treat each input edge as two arcs with the same weight.
    #[arg(long)]
    undirected: bool,
    /// Initiator.
    #[arg(long)]
    source: NodeId,
    #[arg(long)]
    target: NodeId,
    /// Comma-separated friends of the initiator; defaults to its out-neighbours.
    #[arg(long, value_delimiter = ',')]
    friends: Option<Vec<NodeId>>,
    /// Homophily probability: one number for every node, or a file of `v h` lines.
    #[arg(long)]
    homophily: Option<String>,
    /// Drop influence paths with probability below this threshold.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, value_enum, default_value_t)]
    output: OutputFormat,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    tree: TreeArgs,
    #[arg(long)]
    budget: usize,
    /// rg, sita or sitina.
    #[arg(long, default_value = "sitina", value_parser = parse_algorithm)]
    algorithm: Algorithm,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    tree: TreeArgs,
    /// Comma-separated invited users; the target is added if missing.
    #[arg(long, value_delimiter = ',', required = true)]
    select: Vec<NodeId>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment file with `key = value` lines.
    #[arg(long)]
    spec: PathBuf,
    /// CSV file to write; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the experiment file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse()
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn output_sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    Ok(())
}

struct Query {
    graph: SocialGraph,
    request: PlanRequest,
    homophily: HomophilyModel,
}

impl TreeArgs {
    fn query(&self, budget: usize) -> Result<Query> {
        let graph = load_edge_list(open(&self.graph)?, self.undirected)?;
        if !graph.contains(self.source) {
            return Err(GraphError::UnknownNode(self.source).into());
        }
        if !graph.contains(self.target) {
            return Err(GraphError::UnknownNode(self.target).into());
        }
        let friends = match &self.friends {
            Some(list) => FriendSet::new(self.source, list.iter().copied()),
            None => FriendSet::from_out_neighbors(&graph, self.source),
        };
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(CliError::Invalid(format!(
                "--theta {} is outside [0, 1]",
                self.theta
            )));
        }
        let homophily = match self.homophily.as_deref() {
            None => HomophilyModel::Absent,
            Some(text) => match text.parse::<f64>() {
                Ok(h) if (0.0..=1.0).contains(&h) => HomophilyModel::Constant(h),
                Ok(h) => {
                    return Err(CliError::Invalid(format!(
                        "--homophily {h} is outside [0, 1]"
                    )))
                }
                Err(_) => HomophilyModel::load(open(Path::new(text))?)?,
            },
        };
        let request =
            PlanRequest::new(self.source, self.target, friends, budget).with_theta(self.theta);
        Ok(Query {
            graph,
            request,
            homophily,
        })
    }

    fn tree(&self) -> Result<Arborescence> {
        let q = self.query(1)?;
        Ok(build_miia(&q.graph, &q.request, &q.homophily)?)
    }
}

fn gen(args: &GenArgs) -> Result<()> {
    let zipf = ZipfWeightConfig {
        alpha: args.alpha,
        ranks: args.ranks,
        w_max: args.w_max,
        seed: args.seed,
    };
    let graph = generate_synthetic(args.nodes, args.avg_degree, &zipf)?;
    let mut out = output_sink(args.out.as_deref())?;
    writeln!(
        out,
        "# {} nodes, {} edges, alpha {}, seed {}",
        graph.node_count(),
        graph.edge_count(),
        args.alpha,
        args.seed
    )?;
    write_edge_list(&graph, &mut out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TreeNodeJson {
    node: String,
    parent: Option<String>,
    weight: Option<f64>,
    friend: bool,
    z: usize,
}

fn miia(args: &TreeArgs) -> Result<()> {
    let tree = args.tree()?;
    let mut out = io::stdout().lock();
    match args.output {
        OutputFormat::Table => {
            writeln!(out, "# node parent weight z")?;
            tree.dump(&mut out)?;
        }
        OutputFormat::Json => {
            let nodes: Vec<TreeNodeJson> = tree
                .topo_order()
                .iter()
                .rev()
                .map(|&i| {
                    let n = tree.node(i);
                    TreeNodeJson {
                        node: tree.label(i),
                        parent: n.parent.map(|p| tree.label(p)),
                        weight: n.parent.map(|_| n.weight),
                        friend: n.friend,
                        z: n.z,
                    }
                })
                .collect();
            writeln!(out, "{}", to_json(&nodes))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SelectedJson {
    node: NodeId,
    subtree_budget: usize,
    ap: f64,
}

#[derive(Serialize)]
struct PlanJson {
    algorithm: String,
    budget: usize,
    objective: f64,
    selected: Vec<SelectedJson>,
    tree_size: usize,
    runtime_ms: f64,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serialises")
}

fn plan(args: &PlanArgs) -> Result<()> {
    let q = args.tree.query(args.budget)?;
    q.request.validate()?;
    let tree = build_miia(&q.graph, &q.request, &q.homophily)?;
    let start = Instant::now();
    let plan = run_planner(&tree, args.algorithm, args.budget)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    print_plan(&plan, tree.len(), runtime_ms, args.tree.output)
}

fn print_plan(
    plan: &InvitationPlan,
    tree_size: usize,
    runtime_ms: f64,
    format: OutputFormat,
) -> Result<()> {
    let mut out = io::stdout().lock();
    match format {
        OutputFormat::Json => {
            let json = PlanJson {
                algorithm: plan.algorithm.name().into(),
                budget: plan.budget,
                objective: plan.objective,
                selected: plan
                    .nodes
                    .iter()
                    .map(|n| SelectedJson {
                        node: n.node,
                        subtree_budget: n.subtree_budget,
                        ap: n.ap,
                    })
                    .collect(),
                tree_size,
                runtime_ms,
            };
            writeln!(out, "{}", to_json(&json))?;
        }
        OutputFormat::Table => {
            writeln!(out, "algorithm  {}", plan.algorithm)?;
            writeln!(out, "budget     {}", plan.budget)?;
            writeln!(out, "objective  {:.6}", plan.objective)?;
            writeln!(out, "invited    {}", plan.nodes.len())?;
            writeln!(out, "tree size  {tree_size}")?;
            writeln!(out, "runtime    {runtime_ms:.3} ms")?;
            writeln!(out)?;
            writeln!(
                out,
                "{:>12} {:>8} {:>12} {:>6}",
                "node", "budget", "ap", "depth"
            )?;
            for n in &plan.nodes {
                writeln!(
                    out,
                    "{:>12} {:>8} {:>12.6} {:>6}",
                    n.node, n.subtree_budget, n.ap, n.depth
                )?;
            }
        }
    }
    Ok(())
}

fn selection(args: &EvalArgs) -> Result<(Arborescence, Vec<NodeId>)> {
    let tree = args.tree.tree()?;
    let mut select = args.select.clone();
    if !select.contains(&args.tree.target) {
        select.push(args.tree.target);
    }
    select.sort_unstable();
    select.dedup();
    Ok((tree, select))
}

#[derive(Serialize)]
struct NodeApJson {
    node: NodeId,
    ap: f64,
}

#[derive(Serialize)]
struct EvalJson {
    target: NodeId,
    objective: f64,
    nodes: Vec<NodeApJson>,
}

fn eval(args: &EvalArgs) -> Result<()> {
    let (tree, select) = selection(args)?;
    let report = acceptance_probability(&tree, &select.iter().copied().collect())?;
    let nodes: Vec<NodeApJson> = select
        .iter()
        .map(|&v| NodeApJson {
            node: v,
            ap: report.get(&tree, v).unwrap_or(0.0),
        })
        .collect();
    let mut out = io::stdout().lock();
    match args.tree.output {
        OutputFormat::Json => {
            let json = EvalJson {
                target: tree.target(),
                objective: report.objective(),
                nodes,
            };
            writeln!(out, "{}", to_json(&json))?;
        }
        OutputFormat::Table => {
            writeln!(out, "ap(t = {}) = {:.6}", tree.target(), report.objective())?;
            writeln!(out, "{:>12} {:>12}", "node", "ap")?;
            for n in &nodes {
                writeln!(out, "{:>12} {:>12.6}", n.node, n.ap)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateJson {
    estimate: f64,
    std_error: f64,
    trials: u64,
    successes: u64,
    analytic: f64,
    seed: u64,
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    if args.trials == 0 {
        return Err(CliError::Invalid("--trials must be at least 1".into()));
    }
    set_threads(args.threads)?;
    let (tree, select) = selection(&args.eval)?;
    let selected = select.iter().copied().collect();
    let mask = selection_mask(&tree, &selected)?;
    let analytic = acceptance_probability(&tree, &selected)?.objective();
    let mc = mc_estimate(&tree, &mask, args.trials, args.seed);
    let json = SimulateJson {
        estimate: mc.estimate,
        std_error: mc.std_error,
        trials: mc.trials,
        successes: mc.successes,
        analytic,
        seed: args.seed,
    };
    let mut out = io::stdout().lock();
    match args.eval.tree.output {
        OutputFormat::Json => writeln!(out, "{}", to_json(&json))?,
        OutputFormat::Table => {
            writeln!(
                out,
                "estimate   {:.6} +/- {:.6}",
                json.estimate, json.std_error
            )?;
            writeln!(out, "successes  {} / {}", json.successes, json.trials)?;
            writeln!(out, "analytic   {:.6}", json.analytic)?;
        }
    }
    Ok(())
}

fn counterexample() -> Result<()> {
    write!(io::stdout().lock(), "{}", submodularity_counterexample())?;
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    set_threads(args.threads)?;
    let text = std::fs::read_to_string(&args.spec).map_err(|source| CliError::Io {
        path: args.spec.display().to_string(),
        source,
    })?;
    let mut spec = ExperimentSpec::parse(&text)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let rows = run_experiment(&spec, args.threads != Some(1))?;
    let mut out = output_sink(args.out.as_deref())?;
    write_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(&a),
        Command::Miia(a) => miia(&a),
        Command::Plan(a) => plan(&a),
        Command::Eval(a) => eval(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Counterexample => counterexample(),
        Command::Bench(a) => bench(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
