use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lslab_core::adversary::{permutation_inversion_system, snake_relation_system, upsilon_bounds, RelationSystemFile};
use lslab_core::harness::{
    generate_instance, run_experiment, trial_rng, write_csv, write_report, Experiment, ExperimentConfig, Format,
    Generator, Record,
};
use lslab_core::oracle::decision_wrap;
use lslab_core::solvers::SolverKind;
use lslab_core::verify::{run_check, Level, VerifySummary};
use lslab_core::{Budget, GraphKind, Instance, InstanceFile, QueryOracle, Vertex};

#[derive(Parser)]
#[command(name = "lslab", version, about = "Local search query complexity laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as JSON.
    GenInstance(GenArgs),
    /// Run a solver on a stored or freshly generated instance.
    Solve(SolveArgs),
    /// Run the verification battery.
    Verify(VerifyArgs),
    /// Compute adversary bounds for a relation system.
    Adversary(AdversaryArgs),
    /// Run an experiment over many seeded trials.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Hypercube,
    Grid,
    Line,
    Complete,
}

#[derive(Args, Clone, Default)]
struct GraphArgs {
    /// Graph family; inferred from --n or --d/--side when omitted.
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Hypercube dimension.
    #[arg(long)]
    n: Option<u32>,
    /// Grid dimension.
    #[arg(long)]
    d: Option<u32>,
    /// Grid side length.
    #[arg(long)]
    side: Option<u32>,
    /// Vertex count for line and complete graphs.
    #[arg(long)]
    size: Option<u64>,
    /// Snake length.
    #[arg(long = "L", value_name = "L")]
    length: Option<usize>,
}

impl GraphArgs {
    fn kind(&self) -> Result<Option<GraphKind>> {
        let family = match (self.family, self.n, self.d.or(self.side.map(|_| 0)), self.size) {
            (Some(f), ..) => f,
            (None, None, None, None) => return Ok(None),
            (None, Some(_), None, None) => Family::Hypercube,
            (None, None, Some(_), None) => Family::Grid,
            (None, None, None, Some(_)) => Family::Line,
            _ => bail!("give --family when mixing --n, --d/--side and --size"),
        };
        let need = |v: Option<u64>, flag: &str| v.with_context(|| format!("--{flag} is required for this family"));
        Ok(Some(match family {
            Family::Hypercube => GraphKind::Hypercube {
                n: need(self.n.map(u64::from), "n")? as u32,
            },
            Family::Grid => GraphKind::Grid {
                d: need(self.d.map(u64::from), "d")? as u32,
                side: need(self.side.map(u64::from), "side")? as u32,
            },
            Family::Line => GraphKind::Line {
                size: need(self.size, "size")?,
            },
            Family::Complete => GraphKind::Complete {
                size: need(self.size, "size")?,
            },
        }))
    }
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON experiment configuration; flags given on the command line override it.
    #[arg(long, value_name = "FILE.json")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: lslab_core::Error| e.to_string())
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: lslab_core::Error| e.to_string())
}

fn parse_generator(s: &str) -> Result<Generator, String> {
    s.parse().map_err(|e: lslab_core::Error| e.to_string())
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: lslab_core::Error| e.to_string())
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    run: RunArgs,
    /// hitting-time, staircase or snake.
    #[arg(long, value_parser = parse_generator)]
    generator: Option<Generator>,
    /// Attach an answer bit revealed at the minimum.
    #[arg(long)]
    answer_bit: Option<u8>,
    /// Also write the snake behind a snake instance.
    #[arg(long)]
    snake_out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Instance JSON to solve; otherwise one is generated per trial.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_parser = parse_generator)]
    generator: Option<Generator>,
    /// steepest-descent, random-sample or line-binary-search.
    #[arg(long, value_parser = parse_solver)]
    solver: Option<SolverKind>,
    /// Sample count for random-sample.
    #[arg(long)]
    samples: Option<u64>,
    /// Start vertex for steepest-descent.
    #[arg(long)]
    start: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    level: LevelArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Run only these checks (1 to 10).
    #[arg(long = "check", value_parser = clap::value_parser!(u8).range(1..=10))]
    checks: Vec<u8>,
    /// Machine-readable output instead of one line per check.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Permutation,
    Snake,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    problem: Option<Problem>,
    /// Relation system JSON to analyse instead of a built-in problem.
    #[arg(long, conflicts_with = "problem")]
    system: Option<PathBuf>,
    /// Permutation size, or hypercube dimension for the snake problem.
    #[arg(long)]
    n: Option<u32>,
    /// Snake length for the snake problem.
    #[arg(long = "L", value_name = "L", default_value_t = 6)]
    length: usize,
    /// Also write the relation system as JSON.
    #[arg(long)]
    export_system: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Experiment name; required unless the config names one.
    #[arg(long, value_parser = parse_experiment)]
    experiment: Option<Experiment>,
    #[arg(long, value_parser = parse_generator)]
    generator: Option<Generator>,
    #[arg(long, value_parser = parse_solver)]
    solver: Option<SolverKind>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    flicks: Option<u64>,
    #[arg(long)]
    gap: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated sizes for adversary-table or subgraph.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))
}

/// Base configuration from `--config` or a fresh one, with command-line overrides.
fn load_config(run: &RunArgs, default_experiment: Option<Experiment>) -> Result<ExperimentConfig> {
    let mut cfg = match (&run.config, default_experiment) {
        (Some(p), _) => read_json::<ExperimentConfig>(p)?,
        (None, Some(e)) => ExperimentConfig::new(e),
        (None, None) => bail!("give --experiment or --config"),
    };
    if let Some(kind) = run.graph.kind()? {
        cfg.graph = Some(kind);
    }
    if let Some(l) = run.graph.length {
        cfg.length = Some(l);
    }
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(t) = run.trials {
        cfg.trials = t;
    }
    if let Some(w) = run.workers {
        cfg.workers = w;
    }
    if let Some(f) = run.format {
        cfg.format = f;
    }
    Ok(cfg)
}

fn budget() -> Result<Budget> {
    Ok(Budget::from_env()?)
}

fn gen_instance(args: GenArgs) -> Result<bool> {
    let mut cfg = load_config(&args.run, Some(Experiment::SolverBenchmark))?;
    if args.generator.is_some() {
        cfg.generator = args.generator;
    }
    if cfg.graph.is_none() {
        bail!("gen-instance needs a graph (--n, --d/--side or --family/--size)");
    }
    let budget = budget()?;
    let mut rng = trial_rng(cfg.seed, 0);
    let gen = generate_instance(&cfg, &mut rng, &budget)?;
    let inst = match args.answer_bit {
        Some(bit) => decision_wrap(&gen.instance, bit)?,
        None => gen.instance,
    };
    let mut file = inst.to_file(&budget)?;
    file.meta.seed = Some(cfg.seed);
    write_json(&file, args.run.out.as_deref())?;
    if let Some(p) = &args.snake_out {
        let snake = gen.snake.context("--snake-out needs the snake generator")?;
        write_json(&snake.to_file(), Some(p))?;
    }
    Ok(true)
}

#[derive(serde::Serialize)]
struct SolveRun {
    trial: u64,
    seed: u64,
    graph: GraphKind,
    solver: SolverKind,
    output: Vertex,
    queries: u64,
    moves: u64,
    verified: bool,
}

fn size_label(kind: GraphKind) -> u64 {
    match kind {
        GraphKind::Hypercube { n } => n as u64,
        GraphKind::Grid { d, side } => (side as u64).pow(d),
        GraphKind::Line { size } | GraphKind::Complete { size } => size,
    }
}

fn solve(args: SolveArgs) -> Result<bool> {
    let mut cfg = load_config(&args.run, Some(Experiment::SolverBenchmark))?;
    let budget = budget()?;
    let stored = match &args.instance {
        Some(p) => Some(Instance::from_file(read_json::<InstanceFile>(p)?)?),
        None => None,
    };
    if let Some(inst) = &stored {
        cfg.graph = Some(inst.graph().kind());
    }
    if args.generator.is_some() {
        cfg.generator = args.generator;
    }
    cfg.solver = args.solver.or(cfg.solver);
    cfg.samples = args.samples.or(cfg.samples);
    cfg.start = args.start.or(cfg.start);
    cfg.validate()?;
    let solver = cfg.solver.unwrap_or(SolverKind::RandomSample);

    let mut runs = Vec::new();
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        let generated;
        let inst = match &stored {
            Some(i) => i,
            None => {
                generated = generate_instance(&cfg, &mut rng, &budget)?.instance;
                &generated
            }
        };
        let mut oracle = QueryOracle::new(inst);
        let res = solver.run(&mut oracle, &mut rng, cfg.samples, cfg.start.map(Vertex))?;
        runs.push(SolveRun {
            trial,
            seed: cfg.seed,
            graph: inst.graph().kind(),
            solver,
            output: res.output,
            queries: res.queries,
            moves: res.moves,
            verified: res.verified,
        });
    }
    match cfg.format {
        Format::Json => write_json(&runs, args.run.out.as_deref())?,
        Format::Csv => {
            let records: Vec<Record> = runs
                .iter()
                .flat_map(|r| {
                    let metrics = [
                        ("output", r.output.0 as f64),
                        ("queries", r.queries as f64),
                        ("moves", r.moves as f64),
                        ("verified", f64::from(u8::from(r.verified))),
                    ];
                    metrics.map(|(metric, value)| Record {
                        experiment: "solve".into(),
                        n_or_n: size_label(r.graph),
                        length: cfg.length.unwrap_or(0) as u64,
                        trial: r.trial,
                        seed: r.seed,
                        metric: metric.into(),
                        value,
                    })
                })
                .collect();
            let mut w = output(args.run.out.as_deref())?;
            write_csv(&records, &mut w)?;
            w.flush()?;
        }
    }
    Ok(runs.iter().all(|r| r.verified))
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let budget = budget()?;
    let level = match args.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let ids: Vec<usize> = if args.checks.is_empty() {
        (1..=10).collect()
    } else {
        args.checks.iter().map(|&c| c as usize).collect()
    };
    let mut summary = VerifySummary {
        level,
        seed: args.seed,
        checks: Vec::new(),
    };
    for id in ids {
        let c = run_check(id, level, args.seed, &budget);
        if args.format.is_none() {
            println!("{}", c.line());
        }
        summary.checks.push(c);
    }
    let passed = summary.all_passed();
    match args.format {
        None => {
            let ok = summary.checks.iter().filter(|c| c.passed).count();
            println!("{ok}/{} checks passed", summary.checks.len());
        }
        Some(Format::Json) => write_json(&summary, args.out.as_deref())?,
        Some(Format::Csv) => {
            let records: Vec<Record> = summary
                .checks
                .iter()
                .flat_map(|c| {
                    [("passed", f64::from(u8::from(c.passed))), ("seconds", c.seconds)].map(|(metric, value)| Record {
                        experiment: "verify".into(),
                        n_or_n: c.id as u64,
                        length: 0,
                        trial: 0,
                        seed: args.seed,
                        metric: metric.into(),
                        value,
                    })
                })
                .collect();
            let mut w = output(args.out.as_deref())?;
            write_csv(&records, &mut w)?;
            w.flush()?;
        }
    }
    Ok(passed)
}

fn adversary(args: AdversaryArgs) -> Result<bool> {
    let budget = budget()?;
    let sys = match (&args.system, args.problem) {
        (Some(p), _) => read_json::<RelationSystemFile>(p)?.build()?,
        (None, Some(Problem::Permutation)) => {
            let n = args.n.context("--n (the permutation size) is required")?;
            permutation_inversion_system(n as usize, &budget)?
        }
        (None, Some(Problem::Snake)) => {
            let n = args.n.context("--n (the hypercube dimension) is required")?;
            snake_relation_system(n, args.length, &budget)?.system
        }
        (None, None) => bail!("give --problem or --system"),
    };
    if let Some(p) = &args.export_system {
        write_json(&sys.to_file(), Some(p))?;
    }
    write_json(&upsilon_bounds(&sys)?, args.out.as_deref())?;
    Ok(true)
}

fn sweep(args: SweepArgs) -> Result<bool> {
    let mut cfg = load_config(&args.run, args.experiment)?;
    if let Some(e) = args.experiment {
        cfg.experiment = e;
    }
    macro_rules! set {
        ($($field:ident),*) => {$(if args.$field.is_some() { cfg.$field = args.$field.clone(); })*};
    }
    set!(generator, solver, samples, flicks, gap, c, eps, sizes);
    let budget = budget()?;
    let rep = run_experiment(&cfg, &budget)?;
    let mut w = output(args.run.out.as_deref())?;
    write_report(&rep, cfg.format, &mut w)?;
    w.flush()?;
    for a in &rep.aggregates {
        eprintln!("{}: mean {:.6} (n={}, se {:.6}) | {}", a.metric, a.mean, a.count, a.std_err, a.claim);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::GenInstance(a) => gen_instance(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Adversary(a) => adversary(a),
        Command::Sweep(a) => sweep(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
