//! The verification battery. Each check compares the library against an
//! oracle written here from the definitions, and every threshold is a
//! constant below.

use std::collections::HashMap;
use std::time::Instant;

use num::rational::Ratio;
use num::{BigInt, BigRational, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{
    permutation_inversion_system, progress_trace, random_relation_system, snake_relation_system, subgraph_prune,
    upsilon_bounds, FnPolicy, HashedPolicy, PolicyStep, QueryPolicy, RelationSystem, Symbol,
};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::generators::{hitting_time_instance, staircase_instance};
use crate::graph::{Graph, GraphKind, Vertex};
use crate::harness::{random_subgraph_instance, run_experiment, trial_rng, Experiment, ExperimentConfig};
use crate::oracle::{Instance, InstanceMeta, QueryOracle};
use crate::snake::goodness::AGREE_THRESHOLD;
use crate::snake::{enumerate_outcomes, flick::regrow_below, flick_at, mixing_check, sample_snake, snake_instance, RngChooser, Snake};
use crate::solvers::{line_binary_search, line_query_cap, random_sample_descent, steepest_descent, SolverKind};

/// Allowed excess of the tail-flick failure rate over `L^2 / 2^n`.
pub const INTERSECT_MARGIN: f64 = 0.005;
/// Uniformity tolerance for the exact mixing distribution.
pub const MIXING_TOLERANCE: f64 = 1e-12;
/// Total variation allowed between exact flick distributions.
pub const EXACT_TV: f64 = 1e-12;
/// Total variation allowed between grid flicks and rejection sampling.
pub const GRID_TV: f64 = 0.02;
/// Samples per flick index for the grid comparison.
pub const GRID_SAMPLES: u64 = 100_000;
/// Mean queries of random sampling plus descent, in units of `sqrt(N delta)`.
pub const SOLVER_K: f64 = 2.0;
/// Allowed relative spread of per-seed mean query counts.
pub const SOLVER_STABILITY: f64 = 0.20;
/// Bound on `eps_hat * L / n^2` for every sampled snake.
pub const GOODNESS_C: f64 = 0.1;
/// Fraction of snakes that must reach the agreement threshold.
pub const AGREE_FRACTION: f64 = 0.9;

/// Wall-clock limits in seconds, indexed by check number minus one.
pub const TIME_LIMITS: [f64; 10] = [10.0, 60.0, 30.0, 1.0, 5.0, 60.0, 10.0, 30.0, 120.0, 300.0];

pub const CHECK_NAMES: [&str; 10] = [
    "permutation adversary",
    "unique snake minimum",
    "tail-flick intersection",
    "exact mixing",
    "flick weight symmetry",
    "flick conditional",
    "subgraph pruning",
    "progress measure",
    "solver guarantees",
    "goodness scaling",
];

pub const CHECK_CLAIMS: [&str; 10] = [
    "permutation inversion has upsilon_geom^2 = upsilon_min = 2/N",
    "a snake instance has its unique local minimum at the tail",
    "a flicked tail meets the old tail only at shared first hits, failure <= L^2/2^n",
    "the coordinate walk mixes completely in n steps",
    "the flick weight w is symmetric and sums to 1",
    "tail flicking samples the exact conditional given the fixed head part",
    "pruning leaves a nonempty set keeping r p(i)/2 weight at every member",
    "S starts at 0, never decreases, and grows by at most 3 upsilon_min M per query",
    "classical solvers return local minima; bisection uses <= 2 ceil(log2 N) + 3 queries; sampling costs O(sqrt(N delta))",
    "eps_hat * L / n^2 stays bounded and p_agree >= 9/10 for most snakes",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: &'static str,
    pub claim: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub time_limit: f64,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2} s, limit {} s): {} | {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.time_limit,
            self.detail,
            self.claim
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn verify_suite(level: Level, seed: u64, budget: &Budget) -> VerifySummary {
    VerifySummary {
        level,
        seed,
        checks: (1..=10).map(|id| run_check(id, level, seed, budget)).collect(),
    }
}

/// Runs check `id` (1 to 10). Errors count as failures. Time limits apply at
/// the full level only.
pub fn run_check(id: usize, level: Level, seed: u64, budget: &Budget) -> CheckOutcome {
    assert!((1..=10).contains(&id), "checks are numbered 1 to 10");
    let start = Instant::now();
    let res = match id {
        1 => permutation_adversary(budget),
        2 => unique_minimum(level, seed, budget),
        3 => intersection(level, seed, budget),
        4 => exact_mixing(budget),
        5 => weight_symmetry(budget),
        6 => flick_conditional(level, seed, budget),
        7 => subgraph(level, seed),
        8 => progress(level, seed, budget),
        9 => solvers(level, seed, budget),
        _ => goodness(level, seed, budget),
    };
    let seconds = start.elapsed().as_secs_f64();
    let time_limit = TIME_LIMITS[id - 1];
    let (ok, mut detail) = match res {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = level == Level::Quick || seconds < time_limit;
    if !in_time {
        detail.push_str("; over time limit");
    }
    CheckOutcome {
        id,
        name: CHECK_NAMES[id - 1],
        claim: CHECK_CLAIMS[id - 1],
        passed: ok && in_time,
        detail,
        seconds,
        time_limit,
    }
}

type CheckResult = Result<(bool, String)>;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn permutation_adversary(budget: &Budget) -> CheckResult {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [2usize, 4, 6, 8] {
        let t = Instant::now();
        let rep = upsilon_bounds(&permutation_inversion_system(n, budget)?)?;
        let target = rat(2, n as i64);
        ok &= rep.upsilon_geom_sq == target && rep.upsilon_min == target;
        parts.push(format!(
            "N={n}: geom^2={} min={} ({:.2} s)",
            rep.upsilon_geom_sq,
            rep.upsilon_min,
            t.elapsed().as_secs_f64()
        ));
    }
    Ok((ok, parts.join(", ")))
}

/// Local minima by a full scan with the weak inequality.
fn scan_minima(inst: &Instance) -> Vec<Vertex> {
    let g = inst.graph();
    g.vertices()
        .filter(|&v| {
            let fv = inst.value(v);
            g.neighbors(v).expect("valid vertex").into_iter().all(|w| fv <= inst.value(w))
        })
        .collect()
}

fn unique_minimum(level: Level, seed: u64, budget: &Budget) -> CheckResult {
    let count = if level == Level::Full { 1000 } else { 100 };
    let mut cases: Vec<(Graph, usize)> = [6u32, 8, 10, 12]
        .into_iter()
        .map(|n| (Graph::hypercube(n).unwrap(), (2f64.powf(n as f64 / 2.0) / 4.0) as usize))
        .collect();
    cases.push((Graph::grid(3, 8)?, 11));
    let mut ok = true;
    let mut parts = Vec::new();
    for (ci, (g, len)) in cases.iter().enumerate() {
        let bad: usize = (0..count as u64)
            .into_par_iter()
            .map(|i| -> Result<usize> {
                let mut r = trial_rng(seed ^ 0x2000 ^ ci as u64, i);
                let head = g.random_vertex(&mut r);
                let x = sample_snake(g, head, *len, &mut r)?;
                let inst = snake_instance(g, &x, budget)?;
                Ok(usize::from(scan_minima(&inst) != vec![x.tail()]))
            })
            .sum::<Result<usize>>()?;
        ok &= bad == 0;
        parts.push(format!("{} L={len}: {}/{count} unique", g.kind(), count - bad));
    }
    Ok((ok, parts.join(", ")))
}

fn intersection(level: Level, seed: u64, budget: &Budget) -> CheckResult {
    let (n, len) = (16u32, 25usize);
    let mut cfg = ExperimentConfig::new(Experiment::Intersect);
    cfg.graph = Some(GraphKind::Hypercube { n });
    cfg.length = Some(len);
    cfg.trials = if level == Level::Full { 100 } else { 20 };
    cfg.flicks = Some(if level == Level::Full { 1000 } else { 500 });
    cfg.seed = seed;
    let rep = run_experiment(&cfg, budget)?;
    let agg = rep.aggregate("failure_rate").expect("intersect reports failure_rate");
    let bound = (len * len) as f64 / 2f64.powi(n as i32) + INTERSECT_MARGIN;
    Ok((
        agg.mean <= bound,
        format!(
            "failure rate {:.5} +- {:.5} over {} flicks, bound {:.5}",
            agg.mean,
            agg.std_err,
            cfg.trials * cfg.flicks.unwrap(),
            bound
        ),
    ))
}

/// Distribution after `gap` steps of the coordinate walk, by listing every
/// coin sequence.
fn mixing_by_coins(n: u32, start: u64, gap: usize) -> f64 {
    let size = 1usize << n;
    let mut p = vec![0f64; size];
    for mask in 0u64..1 << gap {
        let mut v = start;
        for (k, t) in (1..=gap).rev().enumerate() {
            if mask >> k & 1 == 1 {
                v ^= 1 << (t % n as usize);
            }
        }
        p[v as usize] += 1.0 / (1u64 << gap) as f64;
    }
    p.iter().map(|x| (x - 1.0 / size as f64).abs()).fold(0.0, f64::max)
}

fn exact_mixing(budget: &Budget) -> CheckResult {
    let mut ok = true;
    let mut worst_full = 0f64;
    let mut min_short = f64::INFINITY;
    for n in [2u32, 3, 4] {
        let g = Graph::hypercube(n)?;
        for v in g.vertices() {
            let full = mixing_check(&g, v, n as usize, budget)?;
            let short = mixing_check(&g, v, n as usize - 1, budget)?;
            ok &= (full - mixing_by_coins(n, v.0, n as usize)).abs() <= MIXING_TOLERANCE;
            ok &= (short - mixing_by_coins(n, v.0, n as usize - 1)).abs() <= MIXING_TOLERANCE;
            ok &= full <= MIXING_TOLERANCE && short > 0.0;
            worst_full = worst_full.max(full);
            min_short = min_short.min(short);
        }
    }
    Ok((ok, format!("gap n: max deviation {worst_full:e}; gap n-1: min deviation {min_short:.4}")))
}

fn weight_symmetry(budget: &Budget) -> CheckResult {
    let rel = snake_relation_system(4, 6, budget)?;
    let k = rel.snakes.len();
    let len = 6usize;
    // w by counting: the support is uniform, so q_j(X, Y) is 1/|consistent| when Y is consistent
    let oracle = |x: usize, y: usize| -> BigRational {
        let xp = rel.snakes[x].path();
        let mut sum = BigRational::zero();
        for j in 0..len {
            if rel.snakes[y].path()[j..] == xp[j..] {
                let c = rel.snakes.iter().filter(|z| z.path()[j..] == xp[j..]).count();
                sum += rat(1, c as i64);
            }
        }
        sum * rat(1, k as i64) * rat(1, len as i64)
    };
    let mut asym = 0;
    let mut mismatched = 0;
    let mut total = BigRational::zero();
    for x in 0..k {
        for y in 0..k {
            let w = rel.w(x, y);
            asym += usize::from(w != rel.w(y, x));
            mismatched += usize::from(w != oracle(x, y));
            total += w;
        }
    }
    let ok = k == 32 && asym == 0 && mismatched == 0 && total.is_one();
    Ok((
        ok,
        format!("{} pairs, {asym} asymmetric, {mismatched} differ from counting, sum w = {total}", k * k),
    ))
}

/// Hypercube snake from its coin sequence, written from the definition:
/// going down from the head at index L-1, step t flips bit t mod n when coin t-1 is set.
fn coin_snake(n: u32, head: u64, len: usize, mask: u64) -> Vec<u64> {
    let mut path = vec![head];
    let mut v = head;
    for t in (1..len).rev() {
        if mask >> (t - 1) & 1 == 1 {
            v ^= 1 << (t % n as usize);
        }
        path.push(v);
    }
    path.reverse();
    path
}

/// Grid snake written from the definition, on 1-based coordinate tuples.
fn rejection_grid_snake<R: Rng>(d: usize, side: u32, head: &[u32], len: usize, rng: &mut R) -> Vec<Vec<u32>> {
    let mut c = head.to_vec();
    let mut path = vec![c.clone()];
    let mut target = 0;
    for t in (1..len).rev() {
        let block = (t - 1) / side as usize;
        let dir = block % d;
        if t == len - 1 || (t - 1) % side as usize == side as usize - 1 {
            target = rng.gen_range(1..=side);
        }
        if c[dir] < target {
            c[dir] += 1;
        } else if c[dir] > target {
            c[dir] -= 1;
        }
        path.push(c.clone());
    }
    path.reverse();
    path
}

fn tv<K: std::hash::Hash + Eq>(a: &HashMap<K, f64>, b: &HashMap<K, f64>) -> f64 {
    let mut s: f64 = a.iter().map(|(k, p)| (p - b.get(k).copied().unwrap_or(0.0)).abs()).sum();
    s += b.iter().filter(|(k, _)| !a.contains_key(k)).map(|(_, p)| p.abs()).sum::<f64>();
    s / 2.0
}

fn flick_conditional(level: Level, seed: u64, budget: &Budget) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6000);
    // exact part
    let (max_n, lens): (u32, &[usize]) = match level {
        Level::Full => (6, &[1, 2, 3, 5, 7, 9, 10]),
        Level::Quick => (5, &[1, 4, 8]),
    };
    let mut worst = BigRational::zero();
    let mut cases = 0;
    for n in 2..=max_n {
        let g = Graph::hypercube(n)?;
        for &len in lens {
            let head = rng.gen_range(0..1u64 << n);
            let support: Vec<Vec<u64>> = (0..1u64 << (len - 1)).map(|m| coin_snake(n, head, len, m)).collect();
            for _ in 0..3 {
                let xp = &support[rng.gen_range(0..support.len())];
                let x = Snake::new(&g, xp.iter().map(|&v| Vertex(v)).collect())?;
                for j in 0..len {
                    let consistent: Vec<&Vec<u64>> = support.iter().filter(|z| z[j..] == xp[j..]).collect();
                    let mut oracle: HashMap<Vec<u64>, BigRational> = HashMap::new();
                    for z in &consistent {
                        *oracle.entry((*z).clone()).or_insert_with(BigRational::zero) += rat(1, consistent.len() as i64);
                    }
                    let outs = enumerate_outcomes(budget.enumeration_cap, |ch| regrow_below(&g, &x, j, ch))?;
                    let mut imp: HashMap<Vec<u64>, BigRational> = HashMap::new();
                    for o in outs {
                        let den = BigInt::from(o.denominator);
                        let y = o.value?;
                        *imp.entry(y.path().iter().map(|v| v.0).collect()).or_insert_with(BigRational::zero) +=
                            BigRational::new(BigInt::one(), den);
                    }
                    let mut d = BigRational::zero();
                    for (k, p) in &imp {
                        d += (p - oracle.get(k).cloned().unwrap_or_else(BigRational::zero)).abs();
                    }
                    for (k, p) in &oracle {
                        if !imp.contains_key(k) {
                            d += p.clone();
                        }
                    }
                    d /= BigInt::from(2);
                    if d > worst {
                        worst = d;
                    }
                    cases += 1;
                }
            }
        }
    }
    let exact_tv = crate::adversary::to_f64(&worst);

    // grid part
    let (d, side, len) = (2usize, 4u32, 8usize);
    let g = Graph::grid(d as u32, side)?;
    let head = g.random_vertex(&mut rng);
    let x = sample_snake(&g, head, len, &mut rng)?;
    let head_c = g.coords(head);
    let x_c: Vec<Vec<u32>> = x.path().iter().map(|&v| g.coords(v)).collect();
    let js: Vec<usize> = match level {
        Level::Full => (0..len).collect(),
        Level::Quick => vec![1, 4, 6],
    };
    let per_j: Vec<Result<f64>> = js
        .par_iter()
        .map(|&j| {
            let mut r = trial_rng(seed ^ 0x6001, j as u64);
            let mut imp: HashMap<Vec<Vec<u32>>, f64> = HashMap::new();
            for _ in 0..GRID_SAMPLES {
                let f = flick_at(&g, &x, j, &mut RngChooser(&mut r))?;
                *imp.entry(f.y.path().iter().map(|&v| g.coords(v)).collect()).or_default() += 1.0 / GRID_SAMPLES as f64;
            }
            let mut rej: HashMap<Vec<Vec<u32>>, f64> = HashMap::new();
            let mut accepted = 0;
            let mut tries = 0u64;
            while accepted < GRID_SAMPLES {
                tries += 1;
                if tries > 1_000 * GRID_SAMPLES {
                    return Err(Error::Precondition("rejection sampler starved".into()));
                }
                let z = rejection_grid_snake(d, side, &head_c, len, &mut r);
                if z[j..] == x_c[j..] {
                    *rej.entry(z).or_default() += 1.0 / GRID_SAMPLES as f64;
                    accepted += 1;
                }
            }
            Ok(tv(&imp, &rej))
        })
        .collect();
    let grid_tv = per_j.into_iter().collect::<Result<Vec<f64>>>()?.into_iter().fold(0.0, f64::max);
    Ok((
        exact_tv <= EXACT_TV && grid_tv <= GRID_TV,
        format!(
            "hypercube exact TV {exact_tv:e} over {cases} (snake, j) cases; grid max TV {grid_tv:.4} over {} indices at {GRID_SAMPLES} samples",
            js.len()
        ),
    ))
}

fn subgraph(level: Level, seed: u64) -> CheckResult {
    let count = if level == Level::Full { 10_000 } else { 2_000 };
    let bad: usize = (0..count as u64)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let mut r = trial_rng(seed ^ 0x7000, i);
            let m = r.gen_range(1..=30);
            let (p, w, rr) = random_subgraph_instance(&mut r, m);
            let u = subgraph_prune(&p, &w, &rr)?;
            let two = Ratio::from_integer(2);
            let holds = !u.is_empty()
                && u.iter().all(|&i| {
                    let mut inside = Ratio::from_integer(0i128);
                    for &j in &u {
                        inside += w[i][j];
                    }
                    inside >= rr * p[i] / two
                });
            Ok(usize::from(!holds))
        })
        .sum::<Result<usize>>()?;
    Ok((bad == 0, format!("{}/{count} instances satisfy the postcondition", count - bad)))
}

struct TraceStats {
    traces: usize,
    violations: usize,
    claim_checked: usize,
    claim_failed: usize,
}

fn check_trace(sys: &RelationSystem, policy: &dyn QueryPolicy, depth: usize, st: &mut TraceStats) -> Result<()> {
    let tr = progress_trace(sys, policy, depth)?;
    // recomputed here from the recorded S values
    let cap = rat(3, 1) * &tr.upsilon_min * sys.total();
    let mut bad = !tr.s[0].is_zero();
    for t in 1..=depth {
        let inc = &tr.s[t] - &tr.s[t - 1];
        bad |= inc.is_negative() || inc > cap || inc != tr.delta[t - 1];
    }
    st.traces += 1;
    st.violations += usize::from(bad);
    if let Some(met) = tr.meets_success_claim() {
        st.claim_checked += 1;
        st.claim_failed += usize::from(!met);
    }
    Ok(())
}

fn progress(level: Level, seed: u64, budget: &Budget) -> CheckResult {
    let mut st = TraceStats {
        traces: 0,
        violations: 0,
        claim_checked: 0,
        claim_failed: 0,
    };
    let perm = permutation_inversion_system(4, budget)?;
    let scan = FnPolicy(|tr: &[(usize, Symbol)], remaining: usize| {
        if tr.iter().any(|&(_, s)| s == 1) {
            PolicyStep::Answer(0)
        } else if tr.len() < 2 && remaining > 0 {
            PolicyStep::Query(tr.len())
        } else {
            PolicyStep::Answer(1)
        }
    });
    for depth in 0..=4 {
        check_trace(&perm, &scan, depth, &mut st)?;
        for s in 0..10 {
            check_trace(&perm, &HashedPolicy { seed: seed ^ s, positions: 4 }, depth, &mut st)?;
        }
    }
    let systems = if level == Level::Full { 100 } else { 30 };
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x8000);
    for i in 0..systems {
        let positions = r.gen_range(2..=6);
        let (na, nb, alphabet, density) = (r.gen_range(1..=6), r.gen_range(1..=6), r.gen_range(2..=4), r.gen_range(0.1..0.9));
        let sys = random_relation_system(&mut r, positions, na, nb, alphabet, density)?;
        for k in 0..5 {
            let depth = r.gen_range(0..=positions + 1);
            check_trace(&sys, &HashedPolicy { seed: seed ^ (i * 31 + k), positions }, depth, &mut st)?;
        }
    }
    Ok((
        st.violations == 0 && st.claim_failed == 0,
        format!(
            "{} traces, {} violations; {} policies at >= 9/10 success, {} below 3M/5",
            st.traces, st.violations, st.claim_checked, st.claim_failed
        ),
    ))
}

fn meta() -> InstanceMeta {
    InstanceMeta::new("verify", serde_json::json!({}), None, false)
}

/// Line instance whose values are the visit order of an interval growing
/// from `s`, with `lefts` marking which of the `N - 1` extensions go left.
fn line_visit_instance(size: u64, s: u64, lefts: u64) -> Result<Instance> {
    let mut f = vec![0u64; size as usize];
    let (mut lo, mut hi) = (s, s);
    for k in 0..size - 1 {
        let t = k + 1;
        if lefts >> k & 1 == 1 {
            lo -= 1;
            f[lo as usize] = t;
        } else {
            hi += 1;
            f[hi as usize] = t;
        }
    }
    Instance::from_fn(Graph::line(size)?, |v| f[v.index()], meta(), &Budget::default())
}

fn solver_mixed_instance(i: u64, seed: u64, budget: &Budget) -> Result<bool> {
    let mut r = trial_rng(seed ^ 0x9000, i);
    let g = match r.gen_range(0..4) {
        0 => Graph::hypercube(r.gen_range(1..=12))?,
        1 => {
            let d = r.gen_range(1..=3u32);
            let max_side = (4096f64.powf(1.0 / d as f64) + 1e-9) as u32;
            Graph::grid(d, r.gen_range(2..=max_side))?
        }
        2 => Graph::line(r.gen_range(2..=256))?,
        _ => Graph::complete(r.gen_range(2..=64))?,
    };
    let snakeable = matches!(g.kind(), GraphKind::Hypercube { .. } | GraphKind::Grid { .. });
    let inst = match r.gen_range(0..3) {
        0 => hitting_time_instance(&g, &mut r, budget)?,
        1 => {
            let v = g.random_vertex(&mut r);
            staircase_instance(&g, v, &mut r, budget)?
        }
        _ if snakeable => {
            let head = g.random_vertex(&mut r);
            let len = r.gen_range(1..=crate::harness::default_length(&g).max(2) * 2);
            let x = sample_snake(&g, head, len, &mut r)?;
            snake_instance(&g, &x, budget)?
        }
        _ => hitting_time_instance(&g, &mut r, budget)?,
    };
    let truth = scan_minima(&inst);
    let mut solvers = vec![SolverKind::SteepestDescent, SolverKind::RandomSample];
    if matches!(g.kind(), GraphKind::Line { .. }) {
        solvers.push(SolverKind::LineBinarySearch);
    }
    let mut ok = true;
    for s in solvers {
        let mut o = QueryOracle::new(&inst);
        let res = s.run(&mut o, &mut r, None, None)?;
        ok &= res.verified && truth.contains(&res.output) && res.queries == o.count();
    }
    Ok(ok)
}

fn solvers(level: Level, seed: u64, budget: &Budget) -> CheckResult {
    let full = level == Level::Full;
    // every classical solver on mixed instances
    let mixed = if full { 10_000 } else { 1_000 };
    let mixed_bad: usize = (0..mixed as u64)
        .into_par_iter()
        .map(|i| solver_mixed_instance(i, seed, budget).map(|ok| usize::from(!ok)))
        .sum::<Result<usize>>()?;

    // bisection on every visit order for N <= 16, then walks and random values up to 64
    let max_exhaustive = if full { 16 } else { 10 };
    let mut line_runs = 0u64;
    let mut line_bad = 0u64;
    let mut check_line = |inst: &Instance| -> Result<()> {
        let mut o = QueryOracle::new(inst);
        let res = line_binary_search(&mut o)?;
        line_runs += 1;
        line_bad += u64::from(!res.verified || res.queries > line_query_cap(inst.graph().num_vertices()));
        Ok(())
    };
    for size in 1..=max_exhaustive {
        for s in 0..size {
            for lefts in 0u64..1 << (size - 1) {
                if lefts.count_ones() as u64 == s {
                    check_line(&line_visit_instance(size, s, lefts)?)?;
                }
            }
        }
    }
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x9100);
    for _ in 0..(if full { 1_000 } else { 200 }) {
        let g = Graph::line(r.gen_range(17..=64))?;
        check_line(&hitting_time_instance(&g, &mut r, budget)?)?;
    }
    for _ in 0..(if full { 10_000 } else { 2_000 }) {
        let size = r.gen_range(1..=64u64);
        let vals: Vec<u64> = (0..size).map(|_| r.gen_range(0..size)).collect();
        check_line(&Instance::from_fn(Graph::line(size)?, |v| vals[v.index()], meta(), budget)?)?;
    }

    // sampling cost on hitting-time instances of the 12-cube
    let g = Graph::hypercube(12)?;
    let scale = (g.num_vertices() as f64 * g.max_degree() as f64).sqrt();
    let trials = if full { 200 } else { 40 };
    let means: Vec<f64> = (0..5u64)
        .map(|s| -> Result<f64> {
            let total: u64 = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<u64> {
                    let mut r = trial_rng(seed ^ 0x9200 ^ (s << 32), t);
                    let inst = hitting_time_instance(&g, &mut r, budget)?;
                    let mut o = QueryOracle::new(&inst);
                    Ok(random_sample_descent(&mut o, &mut r, None)?.queries)
                })
                .sum::<Result<u64>>()?;
            Ok(total as f64 / trials as f64 / scale)
        })
        .collect::<Result<_>>()?;
    let overall = means.iter().sum::<f64>() / means.len() as f64;
    let stable = means.iter().all(|m| (m - overall).abs() <= SOLVER_STABILITY * overall);
    let steep = {
        // keep the start-only descent path exercised too
        let inst = hitting_time_instance(&g, &mut r, budget)?;
        let mut o = QueryOracle::new(&inst);
        steepest_descent(&mut o, Vertex(0))?.verified
    };

    let ok = mixed_bad == 0 && line_bad == 0 && overall <= SOLVER_K && stable && steep;
    Ok((
        ok,
        format!(
            "mixed {}/{mixed} verified; bisection {}/{line_runs} within cap; sampling cost {:.3} sqrt(N delta) (K = {SOLVER_K}), per-seed [{}]",
            mixed - mixed_bad,
            line_runs - line_bad,
            overall,
            means.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn goodness(level: Level, seed: u64, budget: &Budget) -> CheckResult {
    let (ns, snakes, flicks): (&[u32], u64, u64) = match level {
        Level::Full => (&[10, 12, 14, 16], 50, 4000),
        Level::Quick => (&[10, 12], 10, 2000),
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for &n in ns {
        let mut cfg = ExperimentConfig::new(Experiment::Goodness);
        cfg.graph = Some(GraphKind::Hypercube { n });
        cfg.trials = snakes;
        cfg.flicks = Some(flicks);
        cfg.seed = seed ^ (0xA000 + n as u64);
        cfg.workers = rayon::current_num_threads();
        let rep = run_experiment(&cfg, budget)?;
        let scaled = rep.aggregate("eps_hat_l_over_dim_sq").expect("goodness metric");
        let agree = rep.aggregate("agree_at_least_nine_tenths").expect("goodness metric");
        let p = rep.aggregate("p_agree").expect("goodness metric");
        ok &= scaled.max <= GOODNESS_C && agree.mean >= AGREE_FRACTION;
        parts.push(format!(
            "n={n}: max eps*L/n^2 {:.4}, mean p_agree {:.4}, {:.0}% of snakes at >= {AGREE_THRESHOLD}",
            scaled.max,
            p.mean,
            100.0 * agree.mean
        ));
    }
    Ok((ok, format!("{} (C = {GOODNESS_C})", parts.join("; "))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coin_snakes_match_the_sampler_support() {
        let g = Graph::hypercube(3).unwrap();
        let outs = enumerate_outcomes(1 << 10, |ch| crate::snake::sample_with(&g, Vertex(5), 6, ch).unwrap()).unwrap();
        let mut a: Vec<Vec<u64>> = outs.iter().map(|o| o.value.path().iter().map(|v| v.0).collect()).collect();
        let mut b: Vec<Vec<u64>> = (0..32).map(|m| coin_snake(3, 5, 6, m)).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn visit_order_instances_have_their_minimum_at_the_start() {
        for lefts in 0..8u64 {
            let s = lefts.count_ones() as u64;
            let inst = line_visit_instance(4, s, lefts).unwrap();
            assert_eq!(inst.value(Vertex(s)), 0);
            assert_eq!(scan_minima(&inst), vec![Vertex(s)]);
        }
    }

    #[test]
    fn quick_checks_that_should_pass() {
        let b = Budget::default();
        for id in [1, 4, 5, 7, 8] {
            let c = run_check(id, Level::Quick, 1, &b);
            assert!(c.passed, "{}", c.line());
        }
    }
}
