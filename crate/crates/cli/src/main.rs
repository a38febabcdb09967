use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use colearn::classes::{ClassDescriptor, HypothesisClass};
use colearn::erm::{augmented_erm_feasible, augmented_erm_min};
use colearn::formats::{format_dimacs, parse_dimacs, InstanceFile};
use colearn::graph::{approx_color, build_conflict_graph, exact_color, two_color, Coloring, Graph};
use colearn::harness::{
    generate_planted, run_experiment, run_trial, summarize, write_rows_csv, write_summary_csv, Cell,
    ClassFamily, ExperimentSpec, PlantMode, Summary, TrialRow, TrialSettings,
};
use colearn::learners::{Algorithm, ColoringBackend, LearnerConfig, DEFAULT_C};
use colearn::par::{map_range, Execution};
use colearn::reductions::{coloring_to_erm, sparsify_coloring, subsetsum_to_erm, SubsetSumInstance};
use colearn::rng::{tags, RngStream};
use colearn::vcdim::{augment_class, vc_bound_threshold, vc_dimension, VcResult, MAX_VC_CAP};

/// Collaborative PAC learning: learners, oracles, reductions and experiments.
#[derive(Parser, Debug)]
#[command(name = "colearn", version)]
struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for trial-level parallelism (1 runs sequentially).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run learners on an instance file or on a grid of planted instances; writes CSV.
    Simulate(SimulateArgs),
    /// Solve augmented ERM (feasibility, or minimum error with --min).
    Erm(ErmArgs),
    /// VC dimension of a class, or of its augmented class with --n and --k.
    Vcdim(VcdimArgs),
    /// Conflict graph of an instance's datasets, in DIMACS format.
    ConflictGraph(InstanceArg),
    /// Color a DIMACS graph promised to be k-colorable.
    Color(ColorArgs),
    /// Build reduction instances.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Generate a planted instance file.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgoArg {
    General,
    SameMarginal,
    Refutable,
    Naive,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::General => Algorithm::General,
            AlgoArg::SameMarginal => Algorithm::SameMarginal,
            AlgoArg::Refutable => Algorithm::Refutable,
            AlgoArg::Naive => Algorithm::Naive,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    AllFunctions,
    AtMostOnePositive,
}

impl From<FamilyArg> for ClassFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::AllFunctions => ClassFamily::AllFunctions,
            FamilyArg::AtMostOnePositive => ClassFamily::AtMostOnePositive,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    IidMarginals,
    SharedMarginal,
    RefutableExact,
}

impl From<ModeArg> for PlantMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::IidMarginals => PlantMode::IidMarginals,
            ModeArg::SharedMarginal => PlantMode::SharedMarginal,
            ModeArg::RefutableExact => PlantMode::RefutableExact,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Approximate,
    Exact,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Algorithms to run; each trial runs all of them on the same instance.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "general")]
    algo: Vec<AlgoArg>,
    /// Instance JSON with distributions. Without it, planted instances are generated.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    delta: Vec<f64>,
    /// Known k (a list for planted grids; defaults to the instance's k).
    #[arg(long, value_delimiter = ',', conflicts_with = "doubling")]
    k: Vec<usize>,
    /// Learn without knowing k, by the doubling wrapper.
    #[arg(long)]
    doubling: bool,
    /// Planted grid: numbers of distributions.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    n: Vec<usize>,
    /// Planted grid: class dimensions.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    d: Vec<usize>,
    /// Planted k when running with --doubling.
    #[arg(long, default_value_t = 2)]
    planted_k: usize,
    #[arg(long, value_enum, default_value = "all-functions")]
    family: FamilyArg,
    #[arg(long, value_enum, default_value = "iid-marginals")]
    mode: ModeArg,
    /// Label-flip probability of planted distributions.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Constant multiplying every sample-size formula.
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    /// Reuse slack of the same-marginal learner.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "approximate")]
    coloring: BackendArg,
    /// Run the same-marginal learner even if marginals differ.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    max_samples: Option<u64>,
    /// Also write per-cell aggregates to this CSV file.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InstanceArg {
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Args, Debug)]
struct ErmArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Overrides the instance's k.
    #[arg(long)]
    k: Option<usize>,
    /// Minimize total mistakes instead of deciding zero-error feasibility.
    #[arg(long)]
    min: bool,
}

#[derive(Args, Debug)]
struct VcdimArgs {
    /// Class as JSON, e.g. '{"kind":"all_functions","d":3}'.
    #[arg(long, conflicts_with = "instance")]
    class: Option<String>,
    /// Take the class from an instance file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Augment the class for n distributions (requires --k).
    #[arg(long, requires = "k")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    k: Option<usize>,
    /// Stop searching once a set of this size is shattered.
    #[arg(long, default_value_t = MAX_VC_CAP)]
    cap: usize,
}

#[derive(Args, Debug)]
struct ColorArgs {
    /// DIMACS graph file.
    #[arg(long)]
    graph: PathBuf,
    /// Promised colorability; not used by the two-coloring backend.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "wigderson")]
    backend: ColorBackend,
    /// Same as `--backend exact`.
    #[arg(long, conflicts_with = "backend")]
    exact: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ColorBackend {
    /// Bipartition, or an odd cycle certifying there is none.
    Two,
    /// Approximate coloring of a k-colorable graph within a color budget.
    Wigderson,
    /// Exhaustive k-coloring.
    Exact,
}

#[derive(Subcommand, Debug)]
enum ReduceCommand {
    /// Graph coloring to augmented ERM over all functions.
    Coloring {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Subset sum to augmented ERM over budgeted thresholds with k = 2.
    Subsetsum {
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<u64>,
        #[arg(long, alias = "t")]
        target: u64,
    },
    /// Coloring to coloring with maximum degree at most 2k - 1.
    Sparsify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Dimension for --family.
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, value_enum, default_value = "all-functions")]
    family: FamilyArg,
    /// Class as JSON; overrides --family and --d.
    #[arg(long)]
    class: Option<String>,
    #[arg(long, value_enum, default_value = "iid-marginals")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<colearn::Error>() {
            Some(colearn::Error::Capacity(_)) => 3,
            Some(colearn::Error::RefutabilityViolation { .. }) => 4,
            Some(colearn::Error::Internal(_)) => 1,
            _ => 2,
        };
        Failure { code, error }
    }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.jobs {
        Some(0) => Err(Failure::from(anyhow!("--jobs must be at least 1"))),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Failure::from(anyhow!(e))),
        },
        None => dispatch(&cli),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult {
    let exec = if cli.jobs == Some(1) {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a, exec),
        Command::Erm(a) => erm(cli, a),
        Command::Vcdim(a) => vcdim(cli, a),
        Command::ConflictGraph(a) => conflict_graph(cli, a, exec),
        Command::Color(a) => color(cli, a),
        Command::Reduce(r) => reduce(cli, r),
        Command::Gen(a) => gen(cli, a),
    }
}

fn emit(cli: &Cli, text: &str) -> anyhow::Result<()> {
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(cli: &Cli, value: &serde_json::Value) -> anyhow::Result<()> {
    emit(cli, &format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<InstanceFile, Failure> {
    let text = read(path)?;
    InstanceFile::parse(&text).map_err(|e| Failure::from(anyhow!(e).context(path.display().to_string())))
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    Ok(parse_dimacs(&read(path)?)?)
}

fn parse_class(json: &str) -> Result<HypothesisClass, Failure> {
    let desc: ClassDescriptor =
        serde_json::from_str(json).map_err(|e| invalid(format!("class JSON: {e}")))?;
    Ok(HypothesisClass::from_descriptor(&desc)?)
}

fn settings(a: &SimulateArgs) -> TrialSettings {
    TrialSettings {
        algorithms: a.algo.iter().map(|&x| x.into()).collect(),
        doubling: a.doubling,
        c: a.c,
        alpha: a.alpha,
        coloring: match a.coloring {
            BackendArg::Approximate => ColoringBackend::Approximate,
            BackendArg::Exact => ColoringBackend::Exact,
        },
        force: a.force,
        max_samples: a.max_samples,
    }
}

fn simulate(cli: &Cli, a: &SimulateArgs, exec: Execution) -> CliResult {
    if a.trials == 0 {
        return Err(invalid("trials must be at least 1").into());
    }
    let settings = settings(a);
    let (rows, summaries) = match &a.instance {
        Some(path) => simulate_instance(cli, a, &settings, path, exec)?,
        None => {
            let ks = if a.doubling {
                vec![a.planted_k]
            } else if a.k.is_empty() {
                vec![2]
            } else {
                a.k.clone()
            };
            let mut spec = ExperimentSpec::new(a.n.clone(), ks, a.d.clone(), a.eps.clone(), a.delta.clone());
            spec.family = a.family.into();
            spec.mode = a.mode.into();
            spec.noise = a.noise;
            spec.trials = a.trials;
            spec.seed = cli.seed;
            spec.settings = settings;
            spec.execution = exec;
            let res = run_experiment(&spec)?;
            (res.rows, res.summaries)
        }
    };
    let mut buf = Vec::new();
    write_rows_csv(&rows, &mut buf)?;
    emit(cli, &String::from_utf8(buf)?)?;
    if let Some(p) = &a.summary {
        let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_summary_csv(&summaries, f)?;
    }
    let promise = rows.iter().any(|r| r.flag_list().contains(&"promise_violation"));
    Ok(if promise { 4 } else { 0 })
}

fn simulate_instance(
    cli: &Cli,
    a: &SimulateArgs,
    settings: &TrialSettings,
    path: &Path,
    exec: Execution,
) -> Result<(Vec<TrialRow>, Vec<Summary>), Failure> {
    let file = load_instance(path)?;
    let class = file.class()?;
    let dists = file.distributions()?;
    if dists.is_empty() {
        return Err(invalid("the instance has no distributions").into());
    }
    let k = match (a.doubling, a.k.as_slice(), file.k) {
        (true, _, _) => dists.len(),
        (false, [k], _) => *k,
        (false, [], Some(k)) => k,
        (false, [], None) => return Err(invalid("k is neither given nor in the instance").into()),
        (false, _, _) => return Err(invalid("give a single --k with --instance").into()),
    };
    let root = RngStream::root(cli.seed);
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut cell_index = 0u64;
    for &eps in &a.eps {
        for &delta in &a.delta {
            let mut config = LearnerConfig::new(k, eps, delta);
            config.c = settings.c;
            config.alpha = settings.alpha;
            config.coloring = settings.coloring;
            config.force = settings.force;
            config.max_samples = settings.max_samples;
            let cell_stream = root.child(tags::CELL, cell_index);
            cell_index += 1;
            let per_trial = map_range(exec, a.trials, |t| {
                let stream = cell_stream.child(tags::TRIAL, t as u64);
                settings
                    .algorithms
                    .iter()
                    .map(|&alg| run_trial(alg, &dists, &class, &config, settings.doubling, t, stream))
                    .collect::<Vec<_>>()
            });
            let block: Vec<TrialRow> = per_trial.into_iter().flatten().collect();
            let cell = Cell {
                n: dists.len(),
                k,
                d: class.vc_dim(),
                eps,
                delta,
            };
            for &alg in &settings.algorithms {
                let mine: Vec<&TrialRow> = block.iter().filter(|r| r.algo == alg.name()).collect();
                summaries.push(summarize(alg, alg.guarantee(&config), &cell, &mine));
            }
            rows.extend(block);
        }
    }
    Ok((rows, summaries))
}

fn erm(cli: &Cli, a: &ErmArgs) -> CliResult {
    let inst = load_instance(&a.instance)?.erm_instance(a.k)?;
    let labels = |hs: &[colearn::data::Hypothesis]| {
        hs.iter()
            .map(|h| h.to_labels().iter().map(|&b| char::from(b'0' + b)).collect::<String>())
            .collect::<Vec<_>>()
    };
    let one_based = |asg: &[usize]| asg.iter().map(|g| g + 1).collect::<Vec<_>>();
    let value = if a.min {
        let sol = augmented_erm_min(&inst)?;
        json!({
            "k": inst.k,
            "mistakes": sol.mistakes,
            "error": sol.error,
            "route": sol.route.name(),
            "hypotheses": labels(&sol.solution.hypotheses),
            "assignment": one_based(&sol.solution.assignment),
        })
    } else {
        match augmented_erm_feasible(&inst)? {
            Some(sol) => json!({
                "k": inst.k,
                "feasible": true,
                "hypotheses": labels(&sol.hypotheses),
                "assignment": one_based(&sol.assignment),
            }),
            None => json!({ "k": inst.k, "feasible": false }),
        }
    };
    emit_json(cli, &value)?;
    Ok(0)
}

fn vcdim(cli: &Cli, a: &VcdimArgs) -> CliResult {
    let class = match (&a.class, &a.instance) {
        (Some(json), _) => parse_class(json)?,
        (None, Some(p)) => load_instance(p)?.class()?,
        (None, None) => return Err(invalid("give --class or --instance").into()),
    };
    let (target, bound) = match (a.n, a.k) {
        (Some(n), Some(k)) => {
            let d = class.vc_dim();
            (augment_class(&class, n, k)?, Some(vc_bound_threshold(d.max(1), n, k)?))
        }
        _ => (class, None),
    };
    let (vc, exact) = match vc_dimension(&target, a.cap)? {
        VcResult::Exact(v) => (v, true),
        VcResult::AtLeast(v) => (v, false),
    };
    let mut value = json!({ "vc": vc, "exact": exact });
    if let Some(b) = bound {
        value["bound"] = json!(b);
        value["below_bound"] = json!(vc < b);
    }
    emit_json(cli, &value)?;
    Ok(0)
}

fn conflict_graph(cli: &Cli, a: &InstanceArg, exec: Execution) -> CliResult {
    let file = load_instance(&a.instance)?;
    if file.datasets.is_empty() {
        return Err(invalid("the instance has no datasets").into());
    }
    let g = build_conflict_graph(&file.class()?, &file.datasets, exec)?;
    emit(cli, &format_dimacs(&g))?;
    Ok(0)
}

fn coloring_json(c: &Coloring) -> serde_json::Value {
    json!({
        "num_colors": c.num_colors(),
        "colors": c.colors().iter().map(|x| x + 1).collect::<Vec<_>>(),
    })
}

fn color(cli: &Cli, a: &ColorArgs) -> CliResult {
    let g = load_graph(&a.graph)?;
    let backend = if a.exact { ColorBackend::Exact } else { a.backend };
    if backend == ColorBackend::Two {
        let value = match two_color(&g) {
            Ok(c) => {
                let mut v = coloring_json(&c);
                v["colorable"] = json!(true);
                v
            }
            Err(cycle) => json!({
                "colorable": false,
                "odd_cycle": cycle.0.iter().map(|x| x + 1).collect::<Vec<_>>(),
            }),
        };
        emit_json(cli, &value)?;
        return Ok(0);
    }
    let k = a.k.ok_or_else(|| invalid("--k is required by this backend"))?;
    if backend == ColorBackend::Exact {
        let value = match exact_color(&g, k)? {
            Some(c) => {
                let mut v = coloring_json(&c);
                v["colorable"] = json!(true);
                v
            }
            None => json!({ "colorable": false }),
        };
        emit_json(cli, &value)?;
        return Ok(0);
    }
    let r = approx_color(&g, k)?;
    let mut value = coloring_json(&r.coloring);
    value["proper"] = json!(r.coloring.is_proper(&g));
    value["budget"] = json!(r.budget);
    value["promise_violated"] = json!(r.promise_violated);
    emit_json(cli, &value)?;
    Ok(if r.promise_violated { 4 } else { 0 })
}

fn reduce(cli: &Cli, r: &ReduceCommand) -> CliResult {
    match r {
        ReduceCommand::Coloring { graph, k } => {
            let inst = coloring_to_erm(&load_graph(graph)?, *k)?;
            emit(cli, &format!("{}\n", InstanceFile::from_erm(&inst).to_json()))?;
        }
        ReduceCommand::Subsetsum { values, target } => {
            let ss = SubsetSumInstance::new(values.clone(), *target)?;
            let inst = subsetsum_to_erm(&ss)?;
            emit(cli, &format!("{}\n", InstanceFile::from_erm(&inst).to_json()))?;
        }
        ReduceCommand::Sparsify { graph, k } => {
            let g = sparsify_coloring(&load_graph(graph)?, *k)?;
            emit(cli, &format_dimacs(&g))?;
        }
    }
    Ok(0)
}

fn gen(cli: &Cli, a: &GenArgs) -> CliResult {
    let class = match &a.class {
        Some(json) => parse_class(json)?,
        None => ClassFamily::from(a.family).build(a.d)?,
    };
    let stream = RngStream::root(cli.seed).child(tags::INSTANCE, 0);
    let inst = generate_planted(&class, a.n, a.k, a.noise, a.mode.into(), stream)?;
    emit(cli, &format!("{}\n", InstanceFile::from_planted(&inst).to_json()))?;
    Ok(0)
}

fn invalid(msg: impl Into<String>) -> colearn::Error {
    colearn::Error::InvalidInput(msg.into())
}
