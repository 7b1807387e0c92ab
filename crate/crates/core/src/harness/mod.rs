//! Seeded experiment runner. Every trial draws from its own stream, so the
//! output depends only on the config and never on the worker count.

mod report;

pub use report::{aggregate, emit_report, read_csv, write_csv, write_report, Aggregate, ExperimentReport, Record, CSV_HEADER};

use std::fmt;
use std::str::FromStr;

use num::rational::Ratio;
use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{permutation_inversion_system, snake_relation_system, subgraph_holds, subgraph_prune, to_f64, upsilon_bounds};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::generators::{hitting_time_instance, staircase_instance};
use crate::graph::{Graph, GraphKind, Vertex};
use crate::oracle::{Instance, QueryOracle};
use crate::snake::{
    flick_tail, goodness_estimate, mixing_check, sample_snake, snake_instance, sparseness_check, GoodnessMode,
    Snake, SparseMode,
};
use crate::solvers::SolverKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SolverBenchmark,
    Intersect,
    Sparse,
    Mixing,
    Goodness,
    Wsym,
    Subgraph,
    AdversaryTable,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Self::SolverBenchmark,
        Self::Intersect,
        Self::Sparse,
        Self::Mixing,
        Self::Goodness,
        Self::Wsym,
        Self::Subgraph,
        Self::AdversaryTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SolverBenchmark => "solver-benchmark",
            Self::Intersect => "intersect",
            Self::Sparse => "sparse",
            Self::Mixing => "mixing",
            Self::Goodness => "goodness",
            Self::Wsym => "wsym",
            Self::Subgraph => "subgraph",
            Self::AdversaryTable => "adversary-table",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    HittingTime,
    Staircase,
    Snake,
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hitting-time" => Ok(Self::HittingTime),
            "staircase" => Ok(Self::Staircase),
            "snake" => Ok(Self::Snake),
            other => Err(Error::Config(format!("unknown generator {other:?}"))),
        }
    }
}

fn one() -> u64 {
    1
}

fn one_worker() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    /// Snake length.
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Sparseness constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Goodness target for the per-vertex hit probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Solver sample count, or vertices checked by sampled sparseness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Tail flicks per snake.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flicks: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<usize>,
    /// Permutation sizes for the adversary table, or the largest matrix for subgraph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<u64>,
    #[serde(default = "one")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "one_worker")]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            graph: None,
            generator: None,
            length: None,
            c: None,
            eps: None,
            samples: None,
            flicks: None,
            gap: None,
            sizes: None,
            solver: None,
            start: None,
            trials: 1,
            seed: 0,
            format: Format::Csv,
            workers: 1,
        }
    }

    fn graph(&self) -> Result<Graph> {
        let kind = self
            .graph
            .ok_or_else(|| Error::Config(format!("experiment {} needs a graph", self.experiment)))?;
        Graph::new(kind).map_err(|e| Error::Config(e.to_string()))
    }

    fn snake_graph(&self) -> Result<Graph> {
        let g = self.graph()?;
        match g.kind() {
            GraphKind::Hypercube { .. } | GraphKind::Grid { .. } => Ok(g),
            k => Err(Error::Config(format!("experiment {} needs a hypercube or grid, got {k}", self.experiment))),
        }
    }

    fn snake_length(&self, g: &Graph) -> usize {
        self.length.unwrap_or_else(|| default_length(g))
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.length == Some(0) {
            return Err(Error::Config("L must be at least 1".into()));
        }
        match self.experiment {
            Experiment::SolverBenchmark => {
                let g = self.graph()?;
                let gen = self.generator.unwrap_or(Generator::HittingTime);
                if gen == Generator::Snake {
                    self.snake_graph()?;
                }
                if self.solver == Some(SolverKind::LineBinarySearch) && !matches!(g.kind(), GraphKind::Line { .. }) {
                    return Err(Error::Config("line-binary-search needs a line graph".into()));
                }
                if let Some(s) = self.start {
                    g.vertex(s).map_err(|e| Error::Config(e.to_string()))?;
                }
                if self.samples == Some(0) {
                    return Err(Error::Config("samples must be at least 1".into()));
                }
            }
            Experiment::Intersect | Experiment::Wsym => {
                if !matches!(self.graph()?.kind(), GraphKind::Hypercube { .. }) {
                    return Err(Error::Config(format!("experiment {} needs a hypercube", self.experiment)));
                }
            }
            Experiment::Sparse | Experiment::Mixing | Experiment::Goodness => {
                self.snake_graph()?;
            }
            Experiment::Subgraph => {
                if let Some(s) = &self.sizes {
                    if s.len() != 1 || s[0] == 0 {
                        return Err(Error::Config("subgraph takes one positive matrix size".into()));
                    }
                }
            }
            Experiment::AdversaryTable => {
                if let Some(s) = &self.sizes {
                    if s.iter().any(|&n| n == 0 || n % 2 == 1) {
                        return Err(Error::Config("permutation sizes must be even and positive".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Snake length used when none is configured: `2^(n/2) / 4` on the
/// hypercube and `sqrt(N) / 4` on grids, at least 1.
pub fn default_length(g: &Graph) -> usize {
    ((g.num_vertices() as f64).sqrt() / 4.0).floor().max(1.0) as usize
}

/// The analysis' nominal length `sqrt(N) / 100`.
pub fn nominal_length(g: &Graph) -> f64 {
    (g.num_vertices() as f64).sqrt() / 100.0
}

/// Random stream for one trial: the seed picks the key, the trial index the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

/// Dimension for hypercubes, vertex count otherwise.
fn size_label(g: &Graph) -> u64 {
    match g.kind() {
        GraphKind::Hypercube { n } => n as u64,
        _ => g.num_vertices(),
    }
}

type Metrics = Vec<(&'static str, f64)>;

fn b(x: bool) -> f64 {
    f64::from(u8::from(x))
}

/// A generated instance, with the snake behind it when there is one.
#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: Instance,
    pub snake: Option<Snake>,
}

/// Draws one instance for the configured graph and generator (hitting time by default).
pub fn generate_instance<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R, budget: &Budget) -> Result<Generated> {
    let g = cfg.graph()?;
    make_instance(cfg, &g, rng, budget)
}

fn make_instance<R: Rng + ?Sized>(cfg: &ExperimentConfig, g: &Graph, rng: &mut R, budget: &Budget) -> Result<Generated> {
    let plain = |instance| Generated { instance, snake: None };
    match cfg.generator.unwrap_or(Generator::HittingTime) {
        Generator::HittingTime => hitting_time_instance(g, rng, budget).map(plain),
        Generator::Staircase => {
            let v = g.random_vertex(rng);
            staircase_instance(g, v, rng, budget).map(plain)
        }
        Generator::Snake => {
            let g = cfg.snake_graph()?;
            let head = g.random_vertex(rng);
            let x = sample_snake(&g, head, cfg.snake_length(&g), rng)?;
            Ok(Generated {
                instance: snake_instance(&g, &x, budget)?,
                snake: Some(x),
            })
        }
    }
}

fn solver_trial(cfg: &ExperimentConfig, g: &Graph, rng: &mut ChaCha8Rng, budget: &Budget) -> Result<Metrics> {
    let inst = make_instance(cfg, g, rng, budget)?.instance;
    let solver = cfg.solver.unwrap_or(SolverKind::RandomSample);
    let mut oracle = QueryOracle::new(&inst);
    let res = solver.run(&mut oracle, rng, cfg.samples, cfg.start.map(Vertex))?;
    let scale = (g.num_vertices() as f64 * g.max_degree().max(1) as f64).sqrt();
    Ok(vec![
        ("queries", res.queries as f64),
        ("queries_over_sqrt_n_delta", res.queries as f64 / scale),
        ("moves", res.moves as f64),
        ("verified", b(res.verified)),
    ])
}

fn intersect_trial(cfg: &ExperimentConfig, g: &Graph, rng: &mut ChaCha8Rng) -> Result<Metrics> {
    let len = cfg.snake_length(g);
    let head = g.random_vertex(rng);
    let x = sample_snake(g, head, len, rng)?;
    let flicks = cfg.flicks.unwrap_or(1000);
    let mut failures = 0u64;
    for _ in 0..flicks {
        failures += u64::from(!flick_tail(g, &x, rng)?.agree);
    }
    Ok(vec![
        ("failures", failures as f64),
        ("flicks", flicks as f64),
        ("failure_rate", failures as f64 / flicks.max(1) as f64),
    ])
}

fn sparse_trial(cfg: &ExperimentConfig, g: &Graph, rng: &mut ChaCha8Rng, budget: &Budget) -> Result<Metrics> {
    let len = cfg.snake_length(g);
    let head = g.random_vertex(rng);
    let x = sample_snake(g, head, len, rng)?;
    let exact_cost = g.num_vertices() as u128 * len as u128;
    let mode = match cfg.samples {
        Some(v) => SparseMode::Sampled { vertices: v },
        None if budget.check("sparseness", exact_cost).is_ok() => SparseMode::Exact,
        None => SparseMode::Sampled { vertices: 1000 },
    };
    let rep = sparseness_check(g, &x, cfg.c.unwrap_or(3.0), mode, rng, budget)?;
    let w = rep.worst.expect("snake is nonempty");
    Ok(vec![
        ("sparse", b(rep.sparse)),
        ("worst_ratio", w.count as f64 / w.threshold),
        ("worst_k", w.k as f64),
        ("worst_count", w.count as f64),
    ])
}

fn default_gap(g: &Graph) -> usize {
    match g.kind() {
        GraphKind::Grid { d, side } => (d * side) as usize,
        _ => g.dimension(),
    }
}

fn mixing_trial(cfg: &ExperimentConfig, g: &Graph, rng: &mut ChaCha8Rng, budget: &Budget) -> Result<Metrics> {
    let start = g.random_vertex(rng);
    let gap = cfg.gap.unwrap_or_else(|| default_gap(g));
    let dev = mixing_check(g, start, gap, budget)?;
    Ok(vec![("deviation", dev), ("uniform", b(dev <= 1e-12))])
}

fn goodness_trial(cfg: &ExperimentConfig, g: &Graph, rng: &mut ChaCha8Rng, budget: &Budget) -> Result<Metrics> {
    let len = cfg.snake_length(g);
    let head = g.random_vertex(rng);
    let x = sample_snake(g, head, len, rng)?;
    let mode = match cfg.flicks {
        Some(0) => GoodnessMode::Exact,
        Some(f) => GoodnessMode::MonteCarlo { flicks: f },
        None => GoodnessMode::MonteCarlo { flicks: 2000 },
    };
    let rep = goodness_estimate(g, &x, mode, rng, budget)?;
    let dim = g.dimension() as f64;
    let mut m = vec![
        ("p_agree", rep.p_agree),
        ("agree_at_least_nine_tenths", b(rep.p_agree >= 0.9)),
        ("eps_hat", rep.eps_hat),
        ("eps_hat_l_over_dim_sq", rep.eps_hat * len as f64 / (dim * dim)),
    ];
    if let Some(eps) = cfg.eps {
        m.push(("good", b(rep.is_good(eps))));
    }
    Ok(m)
}

fn wsym_metrics(cfg: &ExperimentConfig, g: &Graph, budget: &Budget) -> Result<Metrics> {
    let GraphKind::Hypercube { n } = g.kind() else {
        return Err(Error::Config("wsym needs a hypercube".into()));
    };
    let len = cfg.length.unwrap_or(6);
    let rel = snake_relation_system(n, len, budget)?;
    let k = rel.snakes.len();
    let mut asym = 0u64;
    let mut total = BigRational::from_integer(BigInt::from(0));
    for x in 0..k {
        for y in 0..k {
            let w = rel.w(x, y);
            if x < y && w != rel.w(y, x) {
                asym += 1;
            }
            total += w;
        }
    }
    let one = BigRational::from_integer(BigInt::from(1));
    let rep = upsilon_bounds(&rel.system)?;
    Ok(vec![
        ("pairs", (k * k) as f64),
        ("asymmetric_pairs", asym as f64),
        ("total_weight", to_f64(&total)),
        ("normalized_exactly", b(total == one)),
        ("related_pairs", rep.related_pairs as f64),
        ("upsilon_min", to_f64(&rep.upsilon_min)),
        ("upsilon_geom", rep.upsilon_geom),
    ])
}

/// Random `(p, w, r)` with `m` indices, `sum w >= r`, exact weights.
pub fn random_subgraph_instance<R: Rng + ?Sized>(rng: &mut R, m: usize) -> (Vec<Ratio<i128>>, Vec<Vec<Ratio<i128>>>, Ratio<i128>) {
    let raw: Vec<i128> = (0..m).map(|_| rng.gen_range(1..=20)).collect();
    let sp: i128 = raw.iter().sum();
    let p = raw.iter().map(|&x| Ratio::new(x, sp)).collect();
    let density = rng.gen_range(0.05..1.0);
    let mut w = vec![vec![Ratio::from_integer(0); m]; m];
    let mut total = 0i128;
    for i in 0..m {
        for j in 0..=i {
            if rng.gen_bool(density) {
                let x = rng.gen_range(1..=10i128);
                w[i][j] = Ratio::from_integer(x);
                w[j][i] = w[i][j];
                total += if i == j { x } else { 2 * x };
            }
        }
    }
    let r = Ratio::new(total * rng.gen_range(0..=1000), 1000);
    (p, w, r)
}

fn subgraph_trial(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Metrics> {
    let max_m = cfg.sizes.as_ref().map_or(30, |s| s[0]);
    let m = rng.gen_range(1..=max_m);
    let (p, w, r) = random_subgraph_instance(rng, m);
    let u = subgraph_prune(&p, &w, &r)?;
    Ok(vec![
        ("size", m as f64),
        ("kept", u.len() as f64),
        ("holds", b(subgraph_holds(&p, &w, &r, &u))),
    ])
}

fn adversary_metrics(n: usize, budget: &Budget) -> Result<Metrics> {
    let sys = permutation_inversion_system(n, budget)?;
    let rep = upsilon_bounds(&sys)?;
    let target = BigRational::new(BigInt::from(2), BigInt::from(n));
    Ok(vec![
        ("upsilon_geom_sq", to_f64(&rep.upsilon_geom_sq)),
        ("upsilon_min", to_f64(&rep.upsilon_min)),
        ("two_over_n", 2.0 / n as f64),
        ("exact_match", b(rep.upsilon_geom_sq == target && rep.upsilon_min == target)),
        ("randomized_bound", to_f64(&rep.randomized_bound)),
        ("quantum_bound", rep.quantum_bound),
    ])
}

fn claim_for(experiment: Experiment, metric: &str, cfg: &ExperimentConfig, g: Option<&Graph>) -> (String, Option<f64>) {
    let l = g.map(|g| cfg.snake_length(g) as f64);
    let s = |x: &str| x.to_string();
    match (experiment, metric) {
        (Experiment::SolverBenchmark, "verified") => (s("classical solvers always return a local minimum"), Some(1.0)),
        (Experiment::SolverBenchmark, "queries_over_sqrt_n_delta") => {
            (s("random sampling then descent uses O(sqrt(N delta)) queries"), None)
        }
        (Experiment::SolverBenchmark, _) => (s("query cost of the chosen solver"), None),
        (Experiment::Intersect, "failure_rate") => {
            let bound = g.zip(l).map(|(g, l)| l * l / g.num_vertices() as f64);
            (s("a flicked tail meets the old tail only at shared first hits, failure <= L^2/N"), bound)
        }
        (Experiment::Intersect, _) => (s("tail-flick intersection counts"), None),
        (Experiment::Sparse, "sparse") => (s("random snakes are sparse with high probability"), Some(1.0)),
        (Experiment::Sparse, _) => (s("largest count relative to its sparseness threshold"), Some(1.0)),
        (Experiment::Mixing, _) => (s("the coordinate walk mixes exactly after one full sweep"), Some(0.0)),
        (Experiment::Goodness, "p_agree") | (Experiment::Goodness, "agree_at_least_nine_tenths") => {
            (s("a flicked tail agrees with the old one with probability >= 9/10"), Some(0.9))
        }
        (Experiment::Goodness, "good") => (s("snakes are eps-good"), cfg.eps),
        (Experiment::Goodness, _) => (s("per-vertex hit probability of a flicked tail is O(n^2/L)"), None),
        (Experiment::Wsym, "asymmetric_pairs") => (s("the flick weight w is symmetric"), Some(0.0)),
        (Experiment::Wsym, "normalized_exactly") | (Experiment::Wsym, "total_weight") => {
            (s("the flick weights sum to 1"), Some(1.0))
        }
        (Experiment::Wsym, _) => (s("adversary values of the snake relation"), None),
        (Experiment::Subgraph, "holds") => {
            (s("pruning leaves a nonempty set keeping r p(i)/2 weight at every member"), Some(1.0))
        }
        (Experiment::Subgraph, _) => (s("pruned subgraph sizes"), None),
        (Experiment::AdversaryTable, "upsilon_geom_sq") | (Experiment::AdversaryTable, "upsilon_min") => {
            (s("permutation inversion: theta = 2/N, upsilon_geom = sqrt(2/N)"), None)
        }
        (Experiment::AdversaryTable, "exact_match") => (s("exact rational match with 2/N"), Some(1.0)),
        (Experiment::AdversaryTable, _) => (s("lower bounds from the permutation adversary"), None),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, budget: &Budget) -> Result<ExperimentReport> {
    cfg.validate()?;
    let name = cfg.experiment.name().to_string();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;

    let rows = |label: u64, length: u64, trial: u64, metrics: Metrics| -> Vec<Record> {
        metrics
            .into_iter()
            .map(|(metric, value)| Record {
                experiment: name.clone(),
                n_or_n: label,
                length,
                trial,
                seed: cfg.seed,
                metric: metric.to_string(),
                value,
            })
            .collect()
    };

    let (graph, records) = match cfg.experiment {
        Experiment::AdversaryTable => {
            let sizes = cfg.sizes.clone().unwrap_or_else(|| vec![2, 4, 6, 8]);
            let per: Vec<Metrics> =
                pool.install(|| sizes.par_iter().map(|&n| adversary_metrics(n, budget)).collect::<Result<_>>())?;
            let recs = per
                .into_iter()
                .zip(&sizes)
                .enumerate()
                .flat_map(|(t, (m, &n))| rows(n as u64, 0, t as u64, m))
                .collect();
            (None, recs)
        }
        Experiment::Wsym => {
            let g = cfg.graph()?;
            let m = wsym_metrics(cfg, &g, budget)?;
            let recs = rows(size_label(&g), cfg.length.unwrap_or(6) as u64, 0, m);
            (Some(g), recs)
        }
        Experiment::Subgraph => {
            let per: Vec<Metrics> = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| subgraph_trial(cfg, &mut trial_rng(cfg.seed, t)))
                    .collect::<Result<_>>()
            })?;
            let recs = per.into_iter().enumerate().flat_map(|(t, m)| rows(0, 0, t as u64, m)).collect();
            (None, recs)
        }
        exp => {
            let g = cfg.graph()?;
            let length = match exp {
                Experiment::SolverBenchmark if cfg.generator != Some(Generator::Snake) => 0,
                Experiment::Mixing => 0,
                _ => cfg.snake_length(&g) as u64,
            };
            let per: Vec<Metrics> = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(cfg.seed, t);
                        match exp {
                            Experiment::SolverBenchmark => solver_trial(cfg, &g, &mut rng, budget),
                            Experiment::Intersect => intersect_trial(cfg, &g, &mut rng),
                            Experiment::Sparse => sparse_trial(cfg, &g, &mut rng, budget),
                            Experiment::Mixing => mixing_trial(cfg, &g, &mut rng, budget),
                            Experiment::Goodness => goodness_trial(cfg, &g, &mut rng, budget),
                            _ => unreachable!("handled above"),
                        }
                    })
                    .collect::<Result<_>>()
            })?;
            let label = size_label(&g);
            let recs = per.into_iter().enumerate().flat_map(|(t, m)| rows(label, length, t as u64, m)).collect();
            (Some(g), recs)
        }
    };

    let snake_based = matches!(
        cfg.experiment,
        Experiment::Intersect | Experiment::Sparse | Experiment::Goodness | Experiment::Wsym
    ) || cfg.generator == Some(Generator::Snake);
    let aggregates = aggregate(&records, |m| claim_for(cfg.experiment, m, cfg, graph.as_ref()));
    Ok(ExperimentReport {
        config: cfg.clone(),
        nominal_length: graph.as_ref().filter(|_| snake_based).map(nominal_length),
        records,
        aggregates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(exp: Experiment, graph: Option<GraphKind>, trials: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(exp);
        c.graph = graph;
        c.trials = trials;
        c.seed = 7;
        c
    }

    fn csv_of(rep: &ExperimentReport) -> String {
        let mut buf = Vec::new();
        write_csv(&rep.records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn solver_benchmark_always_succeeds() {
        let mut c = cfg(Experiment::SolverBenchmark, Some(GraphKind::Hypercube { n: 10 }), 100);
        c.solver = Some(SolverKind::RandomSample);
        let rep = run_experiment(&c, &Budget::default()).unwrap();
        assert_eq!(rep.aggregate("verified").unwrap().mean, 1.0);
        assert_eq!(rep.records.len(), 400);
    }

    #[test]
    fn deterministic_across_workers() {
        for exp in [Experiment::Intersect, Experiment::Goodness, Experiment::Sparse, Experiment::Subgraph] {
            let mut c = cfg(exp, Some(GraphKind::Hypercube { n: 8 }), 12);
            c.flicks = Some(50);
            let one = run_experiment(&c, &Budget::default()).unwrap();
            c.workers = 4;
            let four = run_experiment(&c, &Budget::default()).unwrap();
            assert_eq!(csv_of(&one), csv_of(&four));
            assert_eq!(one.aggregates, four.aggregates);
        }
    }

    #[test]
    fn adversary_table_rows() {
        let c = cfg(Experiment::AdversaryTable, None, 1);
        let rep = run_experiment(&c, &Budget::default()).unwrap();
        let rows: Vec<_> = rep.records.iter().filter(|r| r.metric == "exact_match").collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.value == 1.0));
        for r in rep.records.iter().filter(|r| r.metric == "upsilon_geom_sq") {
            assert!((r.value - 2.0 / r.n_or_n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn mixing_and_wsym() {
        let rep = run_experiment(&cfg(Experiment::Mixing, Some(GraphKind::Hypercube { n: 4 }), 5), &Budget::default()).unwrap();
        assert_eq!(rep.aggregate("uniform").unwrap().mean, 1.0);
        let mut c = cfg(Experiment::Wsym, Some(GraphKind::Hypercube { n: 3 }), 1);
        c.length = Some(5);
        let rep = run_experiment(&c, &Budget::default()).unwrap();
        assert_eq!(rep.aggregate("asymmetric_pairs").unwrap().max, 0.0);
        assert_eq!(rep.aggregate("normalized_exactly").unwrap().min, 1.0);
    }

    #[test]
    fn config_errors() {
        let bad = [
            cfg(Experiment::Mixing, None, 1),
            cfg(Experiment::Intersect, Some(GraphKind::Grid { d: 2, side: 4 }), 1),
            cfg(Experiment::Goodness, Some(GraphKind::Line { size: 4 }), 1),
            {
                let mut c = cfg(Experiment::SolverBenchmark, Some(GraphKind::Hypercube { n: 3 }), 1);
                c.solver = Some(SolverKind::LineBinarySearch);
                c
            },
            {
                let mut c = cfg(Experiment::AdversaryTable, None, 1);
                c.sizes = Some(vec![3]);
                c
            },
        ];
        for c in bad {
            assert!(matches!(run_experiment(&c, &Budget::default()), Err(Error::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn config_json() {
        let text = r#"{"experiment":"intersect","graph":{"family":"hypercube","n":12},"L":20,"trials":3,"seed":5}"#;
        let c: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.length, Some(20));
        assert_eq!(c.workers, 1);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"experiment":"intersect","bogus":1}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"experiment":"nope"}"#).is_err());
    }

    #[test]
    fn every_aggregate_is_annotated() {
        for exp in Experiment::ALL {
            let mut c = cfg(exp, Some(GraphKind::Hypercube { n: 6 }), 3);
            c.flicks = Some(20);
            c.length = Some(5);
            c.sizes = match exp {
                Experiment::AdversaryTable => Some(vec![2, 4]),
                _ => None,
            };
            let rep = run_experiment(&c, &Budget::default()).unwrap();
            assert!(!rep.aggregates.is_empty());
            assert!(rep.aggregates.iter().all(|a| !a.claim.is_empty()));
        }
    }

    #[test]
    fn substreams_are_uncorrelated() {
        // adjacent trial streams, 10^6 paired draws
        let n = 1_000_000;
        let mut a = trial_rng(3, 0);
        let mut b = trial_rng(3, 1);
        let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x: f64 = a.gen();
            let y: f64 = b.gen();
            sx += x;
            sy += y;
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        let nf = n as f64;
        let cov = sxy / nf - sx * sy / nf / nf;
        let corr = cov / ((sxx / nf - (sx / nf).powi(2)) * (syy / nf - (sy / nf).powi(2))).sqrt();
        assert!(corr.abs() < 5.0 / nf.sqrt(), "{corr}");
        assert_ne!(trial_rng(3, 0).gen::<u64>(), trial_rng(4, 0).gen::<u64>());
    }
}
