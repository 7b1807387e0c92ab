//! Query-counted local search solvers and the analytic quantum cost model.

use std::collections::HashMap;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Vertex};
use crate::oracle::QueryOracle;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverResult {
    pub output: Vertex,
    pub queries: u64,
    /// Ground-truth check of the output, not charged as queries.
    pub verified: bool,
    pub moves: u64,
    pub transcript: Vec<(Vertex, u64)>,
}

/// Serves repeated queries from the transcript so each vertex is charged once.
struct Cached<'o, 'a> {
    oracle: &'o mut QueryOracle<'a>,
    seen: HashMap<Vertex, u64>,
}

impl<'o, 'a> Cached<'o, 'a> {
    fn new(oracle: &'o mut QueryOracle<'a>) -> Self {
        let seen = oracle.log().iter().copied().collect();
        Self { oracle, seen }
    }

    fn value(&mut self, v: Vertex) -> Result<u64> {
        if let Some(&f) = self.seen.get(&v) {
            return Ok(f);
        }
        let f = self.oracle.query(v)?.value;
        self.seen.insert(v, f);
        Ok(f)
    }

    fn finish(self, output: Vertex, moves: u64) -> SolverResult {
        SolverResult {
            output,
            queries: self.oracle.count(),
            verified: self.oracle.instance().is_local_min(output),
            moves,
            transcript: self.oracle.log().to_vec(),
        }
    }
}

fn descend(c: &mut Cached, start: Vertex) -> Result<(Vertex, u64)> {
    let g = c.oracle.graph();
    g.validate(start)?;
    let mut cur = start;
    let mut fcur = c.value(cur)?;
    let mut moves = 0;
    let mut nbrs = Vec::new();
    loop {
        g.neighbors_into(cur, &mut nbrs);
        let mut best: Option<(u64, Vertex)> = None;
        for &w in &nbrs {
            let fw = c.value(w)?;
            // neighbors arrive in ascending index order, so strict < keeps the lowest on ties
            if best.is_none_or(|(fb, _)| fw < fb) {
                best = Some((fw, w));
            }
        }
        match best {
            Some((fb, w)) if fb < fcur => {
                cur = w;
                fcur = fb;
                moves += 1;
            }
            _ => return Ok((cur, moves)),
        }
    }
}

/// Moves to the lowest-valued neighbor until none is lower.
pub fn steepest_descent(oracle: &mut QueryOracle, start: Vertex) -> Result<SolverResult> {
    let mut c = Cached::new(oracle);
    let (out, moves) = descend(&mut c, start)?;
    Ok(c.finish(out, moves))
}

/// Default sample count `max(1, ceil(sqrt(N * max_degree)))`.
pub fn default_samples(g: &Graph) -> u64 {
    ((g.num_vertices() as f64 * g.max_degree().max(1) as f64).sqrt().ceil() as u64).max(1)
}

/// Queries `samples` uniform vertices, then descends from the best one.
/// When `samples >= N` every vertex is queried once instead.
pub fn random_sample_descent<R: Rng + ?Sized>(
    oracle: &mut QueryOracle,
    rng: &mut R,
    samples: Option<u64>,
) -> Result<SolverResult> {
    let g = oracle.graph();
    let samples = samples.unwrap_or_else(|| default_samples(g));
    if samples == 0 {
        return Err(Error::Precondition("samples must be at least 1".into()));
    }
    let mut c = Cached::new(oracle);
    let mut best: Option<(u64, Vertex)> = None;
    let mut consider = |c: &mut Cached, v: Vertex| -> Result<()> {
        let f = c.value(v)?;
        if best.is_none_or(|b| (f, v) < b) {
            best = Some((f, v));
        }
        Ok(())
    };
    if samples >= g.num_vertices() {
        for v in g.vertices() {
            consider(&mut c, v)?;
        }
    } else {
        for _ in 0..samples {
            let v = g.random_vertex(rng);
            consider(&mut c, v)?;
        }
    }
    let (_, v0) = best.expect("at least one sample");
    let (out, moves) = descend(&mut c, v0)?;
    Ok(c.finish(out, moves))
}

/// Bisection on a path: compare the two middle vertices and keep the half
/// next to the smaller one.
pub fn line_binary_search(oracle: &mut QueryOracle) -> Result<SolverResult> {
    let g = oracle.graph();
    let GraphKind::Line { size } = g.kind() else {
        return Err(Error::Unsupported("binary search needs a line graph"));
    };
    let mut c = Cached::new(oracle);
    // f(lo) < f(lo - 1) when lo > 0, and f(hi) <= f(hi + 1) when hi < N - 1
    let (mut lo, mut hi) = (0u64, size - 1);
    let mut moves = 0;
    while hi - lo >= 2 {
        let m = (lo + hi) / 2;
        if c.value(Vertex(m))? <= c.value(Vertex(m + 1))? {
            hi = m;
        } else {
            lo = m + 1;
        }
        moves += 1;
    }
    let out = if hi == lo || c.value(Vertex(lo))? <= c.value(Vertex(hi))? {
        Vertex(lo)
    } else {
        Vertex(hi)
    };
    c.value(out)?;
    Ok(c.finish(out, moves))
}

/// Worst-case query bound of [`line_binary_search`].
pub fn line_query_cap(size: u64) -> u64 {
    2 * (64 - (size.max(1) - 1).leading_zeros()) as u64 + 3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    SteepestDescent,
    RandomSample,
    LineBinarySearch,
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steepest-descent" | "steepest_descent" => Ok(Self::SteepestDescent),
            "random-sample" | "random_sample_descent" | "random-sample-descent" => Ok(Self::RandomSample),
            "line-binary-search" | "line_binary_search" | "binary-search" => Ok(Self::LineBinarySearch),
            other => Err(Error::Config(format!("unknown solver {other:?}"))),
        }
    }
}

impl SolverKind {
    pub fn run<R: Rng + ?Sized>(
        self,
        oracle: &mut QueryOracle,
        rng: &mut R,
        samples: Option<u64>,
        start: Option<Vertex>,
    ) -> Result<SolverResult> {
        match self {
            Self::SteepestDescent => {
                let start = match start {
                    Some(v) => v,
                    None => oracle.graph().random_vertex(rng),
                };
                steepest_descent(oracle, start)
            }
            Self::RandomSample => random_sample_descent(oracle, rng, samples),
            Self::LineBinarySearch => line_binary_search(oracle),
        }
    }
}

/// Analytic costs of the Grover-based local search. A model, not a measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCostModel {
    pub label: String,
    pub n: f64,
    pub delta: f64,
    /// `N^(2/3) delta^(1/3)` vertices searched for a good start.
    pub sample_size: f64,
    /// `(N / delta)^(1/3)` vertices expected below the start.
    pub expected_better: f64,
    /// `N^(1/3) delta^(1/6)`.
    pub cost: f64,
}

pub fn quantum_cost_model(n: f64, delta: f64) -> Result<QuantumCostModel> {
    if !(n >= 1.0 && delta >= 1.0) {
        return Err(Error::Precondition(format!("need N, delta >= 1, got {n}, {delta}")));
    }
    Ok(QuantumCostModel {
        label: "analytic cost model (no quantum simulation)".into(),
        n,
        delta,
        sample_size: n.powf(2.0 / 3.0) * delta.powf(1.0 / 3.0),
        expected_better: (n / delta).powf(1.0 / 3.0),
        cost: n.powf(1.0 / 3.0) * delta.powf(1.0 / 6.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::generators::{hitting_time_instance, staircase_instance};
    use crate::oracle::{Instance, InstanceMeta};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use serde_json::json;

    fn inst(g: Graph, f: impl Fn(Vertex) -> u64) -> Instance {
        Instance::from_fn(g, f, InstanceMeta::new("test", json!({}), None, false), &Budget::default()).unwrap()
    }

    #[test]
    fn descent_from_strict_min() {
        let i = inst(Graph::hypercube(3).unwrap(), |v| v.0.count_ones() as u64);
        let mut o = QueryOracle::new(&i);
        let r = steepest_descent(&mut o, Vertex(0)).unwrap();
        assert_eq!((r.output, r.queries, r.moves), (Vertex(0), 4, 0));
        assert!(r.verified);
    }

    #[test]
    fn hamming_weight_descent() {
        let i = inst(Graph::hypercube(3).unwrap(), |v| v.0.count_ones() as u64);
        let mut o = QueryOracle::new(&i);
        let r = steepest_descent(&mut o, Vertex(0b111)).unwrap();
        assert_eq!((r.output, r.moves), (Vertex(0), 3));
        assert_eq!(r.queries, o.count());
        // ties go to the lowest index: 111 -> 011 -> 001 -> 000
        let path: Vec<_> = r.transcript.iter().map(|&(v, _)| v.0).collect();
        assert_eq!(&path[..4], &[0b111, 0b011, 0b101, 0b110]);
        assert_eq!(path[4], 0b001);
    }

    #[test]
    fn staircase_descent_queries() {
        let g = Graph::hypercube(6).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v = g.random_vertex(&mut r);
            let i = staircase_instance(&g, v, &mut r, &Budget::default()).unwrap();
            let mut o = QueryOracle::new(&i);
            let res = steepest_descent(&mut o, v).unwrap();
            assert_eq!(Some(res.output), i.minimum());
            assert_eq!(res.moves, 1);
            assert!(res.queries <= 2 * 6 + 2);
        }
    }

    #[test]
    fn sample_everything() {
        let g = Graph::hypercube(4).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let i = hitting_time_instance(&g, &mut r, &Budget::default()).unwrap();
        let mut o = QueryOracle::new(&i);
        let res = random_sample_descent(&mut o, &mut r, Some(16)).unwrap();
        assert_eq!(Some(res.output), i.minimum());
        assert_eq!((res.moves, res.queries), (0, 16));
    }

    #[test]
    fn single_vertex_line() {
        let i = inst(Graph::line(1).unwrap(), |_| 5);
        let mut r = ChaCha8Rng::seed_from_u64(0);
        let mut o = QueryOracle::new(&i);
        let res = random_sample_descent(&mut o, &mut r, None).unwrap();
        assert_eq!((res.output, res.queries), (Vertex(0), 1));
        let mut o = QueryOracle::new(&i);
        let res = line_binary_search(&mut o).unwrap();
        assert_eq!((res.output, res.queries), (Vertex(0), 1));
    }

    #[test]
    fn binary_search_small_and_decreasing() {
        let i = inst(Graph::line(2).unwrap(), |v| 9 - v.0);
        let mut o = QueryOracle::new(&i);
        let res = line_binary_search(&mut o).unwrap();
        assert_eq!((res.output, res.queries), (Vertex(1), 2));

        let i = inst(Graph::line(1024).unwrap(), |v| 5000 - v.0);
        let mut o = QueryOracle::new(&i);
        let res = line_binary_search(&mut o).unwrap();
        assert_eq!(res.output, Vertex(1023));
        assert!(res.queries <= 2 * 10 + 3);
        assert!(res.verified);
        assert_eq!(line_query_cap(1024), 23);
        assert_eq!(line_query_cap(1), 3);
    }

    #[test]
    fn binary_search_rejects_other_graphs() {
        let i = inst(Graph::hypercube(2).unwrap(), |_| 0);
        let mut o = QueryOracle::new(&i);
        assert!(line_binary_search(&mut o).is_err());
    }

    #[test]
    fn cost_model_values() {
        let m = quantum_cost_model(4096.0, 12.0).unwrap();
        // 16 * 12^(1/6)
        assert!((m.cost - 24.2094).abs() < 1e-3, "{}", m.cost);
        assert!((m.expected_better - 6.99).abs() < 0.01);
        assert!((quantum_cost_model(1000.0, 1.0).unwrap().cost - 10.0).abs() < 1e-9);
        assert!(quantum_cost_model(0.0, 1.0).is_err());
    }

    #[test]
    fn solver_names() {
        assert_eq!("steepest-descent".parse::<SolverKind>().unwrap(), SolverKind::SteepestDescent);
        assert!("grover".parse::<SolverKind>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #[test]
            fn binary_search_cap_and_correctness(vals in proptest::collection::vec(0u64..20, 1..64)) {
                let n = vals.len() as u64;
                let i = inst(Graph::line(n).unwrap(), |v| vals[v.index()]);
                let mut o = QueryOracle::new(&i);
                let res = line_binary_search(&mut o).unwrap();
                prop_assert!(res.verified);
                prop_assert!(res.queries <= line_query_cap(n));
            }

            #[test]
            fn descent_moves_bounded_by_lower_set(seed in any::<u64>(), n in 2u32..7) {
                let g = Graph::hypercube(n).unwrap();
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let vals: Vec<u64> = (0..g.num_vertices()).map(|_| r.gen_range(0..8)).collect();
                let i = inst(g.clone(), |v| vals[v.index()]);
                let start = g.random_vertex(&mut r);
                let mut o = QueryOracle::new(&i);
                let res = steepest_descent(&mut o, start).unwrap();
                prop_assert!(res.verified);
                prop_assert_eq!(res.queries, o.count());
                let lower = vals.iter().filter(|&&f| f < vals[start.index()]).count() as u64;
                prop_assert!(res.moves <= lower);
                // every vertex charged once
                let mut seen: Vec<_> = res.transcript.iter().map(|p| p.0).collect();
                seen.sort_unstable();
                seen.dedup();
                prop_assert_eq!(seen.len() as u64, res.queries);
            }
        }
    }
}
