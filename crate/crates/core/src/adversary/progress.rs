//! Progress of a deterministic query policy against a relation system: the
//! total weight of related pairs it has told apart after each query.

use std::hash::{DefaultHasher, Hash, Hasher};

use num::{BigInt, BigRational, Zero};
use rayon::prelude::*;

use super::{upsilon_bounds, RelationSystem, Side, Symbol};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyStep {
    Query(usize),
    Answer(u8),
}

/// A deterministic decision tree: the next query or the final answer as a
/// function of the transcript so far. `remaining` is the number of queries
/// still allowed; at zero the policy must answer.
pub trait QueryPolicy: Sync {
    fn step(&self, transcript: &[(usize, Symbol)], remaining: usize) -> PolicyStep;
}

/// A policy given by a closure.
pub struct FnPolicy<F>(pub F);

impl<F> QueryPolicy for FnPolicy<F>
where
    F: Fn(&[(usize, Symbol)], usize) -> PolicyStep + Sync,
{
    fn step(&self, transcript: &[(usize, Symbol)], remaining: usize) -> PolicyStep {
        (self.0)(transcript, remaining)
    }
}

/// Pseudo-random decision tree keyed by a seed: each transcript hashes to
/// an arbitrary but fixed choice.
#[derive(Debug, Clone, Copy)]
pub struct HashedPolicy {
    pub seed: u64,
    pub positions: usize,
}

impl QueryPolicy for HashedPolicy {
    fn step(&self, transcript: &[(usize, Symbol)], remaining: usize) -> PolicyStep {
        let mut h = DefaultHasher::new();
        (self.seed, transcript).hash(&mut h);
        let z = h.finish();
        if remaining == 0 || z % 8 == 0 {
            PolicyStep::Answer(((z >> 8) & 1) as u8)
        } else {
            PolicyStep::Query(((z >> 16) % self.positions.max(1) as u64) as usize)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressTrace {
    pub depth: usize,
    /// `S^(t)` for `t = 0..=depth`.
    pub s: Vec<BigRational>,
    /// `S^(t) - S^(t-1)` for `t = 1..=depth`.
    pub delta: Vec<BigRational>,
    pub upsilon_min: BigRational,
    /// `3 upsilon_min M`.
    pub increment_cap: BigRational,
    pub total: BigRational,
    /// A-inputs answered 0 and B-inputs answered 1.
    pub w_a: Vec<usize>,
    pub w_b: Vec<usize>,
    pub success_weight_a: BigRational,
    pub success_weight_b: BigRational,
    /// Success probability when the input is an A-input with probability
    /// `M(A) / 2M` or a B-input with probability `M(B) / 2M`.
    pub success_probability: BigRational,
}

impl ProgressTrace {
    pub fn nondecreasing(&self) -> bool {
        self.s.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn increments_within_cap(&self) -> bool {
        self.delta.iter().all(|d| *d <= self.increment_cap)
    }

    /// `None` below 9/10 success, else whether `S^(T) >= 3M/5`.
    pub fn meets_success_claim(&self) -> Option<bool> {
        let nine_tenths = BigRational::new(BigInt::from(9), BigInt::from(10));
        if self.success_probability < nine_tenths {
            return None;
        }
        let three_fifths = BigRational::new(BigInt::from(3), BigInt::from(5));
        Some(self.s[self.depth] >= three_fifths * &self.total)
    }
}

struct Run {
    queries: Vec<usize>,
    answer: u8,
}

fn run_policy(policy: &dyn QueryPolicy, input: &[Symbol], depth: usize) -> Result<Run> {
    let mut transcript = Vec::new();
    loop {
        match policy.step(&transcript, depth - transcript.len()) {
            PolicyStep::Answer(b) => {
                return Ok(Run {
                    queries: transcript.into_iter().map(|(x, _)| x).collect(),
                    answer: b,
                })
            }
            PolicyStep::Query(x) => {
                if x >= input.len() {
                    return Err(Error::UnknownIndex { kind: "position", index: x });
                }
                if transcript.len() == depth {
                    return Err(Error::Precondition(format!("policy queried past depth {depth}")));
                }
                transcript.push((x, input[x]));
            }
        }
    }
}

/// First query count (1-based) at which either run touches a position where
/// the two inputs differ.
fn separation_time(a: &[Symbol], b: &[Symbol], ra: &Run, rb: &Run) -> Option<usize> {
    let first = |r: &Run| r.queries.iter().position(|&x| a[x] != b[x]).map(|t| t + 1);
    match (first(ra), first(rb)) {
        (Some(s), Some(t)) => Some(s.min(t)),
        (s, t) => s.or(t),
    }
}

pub fn progress_trace(sys: &RelationSystem, policy: &dyn QueryPolicy, depth: usize) -> Result<ProgressTrace> {
    let runs = |side: Side| -> Result<Vec<Run>> {
        sys.inputs(side).par_iter().map(|inp| run_policy(policy, inp, depth)).collect()
    };
    let ra = runs(Side::A)?;
    let rb = runs(Side::B)?;

    let mut inc = vec![BigRational::zero(); depth + 1];
    for (a, b, r) in sys.entries() {
        let (ia, ib) = (&sys.inputs(Side::A)[*a], &sys.inputs(Side::B)[*b]);
        if let Some(t) = separation_time(ia, ib, &ra[*a], &rb[*b]) {
            inc[t] += r;
        }
    }
    let mut s = Vec::with_capacity(depth + 1);
    let mut acc = BigRational::zero();
    for d in &inc {
        acc += d;
        s.push(acc.clone());
    }
    let delta = inc[1..].to_vec();

    let upsilon_min = match upsilon_bounds(sys) {
        Ok(rep) => rep.upsilon_min,
        Err(Error::NoQualifyingTriple) => BigRational::zero(),
        Err(e) => return Err(e),
    };
    let total = sys.total().clone();
    let increment_cap = BigRational::from_integer(BigInt::from(3)) * &upsilon_min * &total;

    let w_a: Vec<usize> = (0..ra.len()).filter(|&i| ra[i].answer == 0).collect();
    let w_b: Vec<usize> = (0..rb.len()).filter(|&i| rb[i].answer == 1).collect();
    let sum = |side: Side, idx: &[usize]| idx.iter().fold(BigRational::zero(), |acc, &i| acc + sys.mass(side, i));
    let success_weight_a = sum(Side::A, &w_a);
    let success_weight_b = sum(Side::B, &w_b);
    let success_probability =
        (&success_weight_a + &success_weight_b) / (BigRational::from_integer(BigInt::from(2)) * &total);

    Ok(ProgressTrace {
        depth,
        s,
        delta,
        upsilon_min,
        increment_cap,
        total,
        w_a,
        w_b,
        success_weight_a,
        success_weight_b,
        success_probability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{permutation_inversion_system, random_relation_system};
    use crate::budget::Budget;
    use num::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Scan the first half of the positions; answer 0 once symbol 1 shows up.
    fn scan_half(n: usize) -> FnPolicy<impl Fn(&[(usize, Symbol)], usize) -> PolicyStep + Sync> {
        FnPolicy(move |tr: &[(usize, Symbol)], remaining: usize| {
            if tr.iter().any(|&(_, s)| s == 1) {
                PolicyStep::Answer(0)
            } else if tr.len() < n / 2 && remaining > 0 {
                PolicyStep::Query(tr.len())
            } else {
                PolicyStep::Answer(1)
            }
        })
    }

    #[test]
    fn depth_zero() {
        let sys = permutation_inversion_system(4, &Budget::default()).unwrap();
        let tr = progress_trace(&sys, &scan_half(4), 0).unwrap();
        assert_eq!(tr.s, vec![BigRational::zero()]);
        assert!(tr.delta.is_empty());
    }

    #[test]
    fn immediate_answer() {
        let sys = permutation_inversion_system(4, &Budget::default()).unwrap();
        let tr = progress_trace(&sys, &FnPolicy(|_: &[(usize, Symbol)], _| PolicyStep::Answer(1)), 3).unwrap();
        assert!(tr.s.iter().all(Zero::is_zero));
        assert!(tr.w_a.is_empty());
        assert_eq!(tr.w_b.len(), 12);
        assert_eq!(tr.success_probability, BigRational::new(1.into(), 2.into()));
        assert_eq!(tr.meets_success_claim(), None);
    }

    #[test]
    fn scan_policy_on_permutations() {
        let sys = permutation_inversion_system(4, &Budget::default()).unwrap();
        let tr = progress_trace(&sys, &scan_half(4), 2).unwrap();
        assert!(tr.nondecreasing());
        assert!(tr.increments_within_cap());
        assert_eq!(tr.increment_cap, BigRational::from_integer(36.into()));
        assert_eq!(tr.success_probability, BigRational::one());
        assert_eq!(tr.s[2], *sys.total());
        assert_eq!(tr.meets_success_claim(), Some(true));
    }

    #[test]
    fn invalid_positions_and_depth() {
        let sys = permutation_inversion_system(2, &Budget::default()).unwrap();
        let bad = FnPolicy(|_: &[(usize, Symbol)], _| PolicyStep::Query(7));
        assert!(matches!(progress_trace(&sys, &bad, 1), Err(Error::UnknownIndex { .. })));
        let greedy = FnPolicy(|_: &[(usize, Symbol)], _| PolicyStep::Query(0));
        assert!(matches!(progress_trace(&sys, &greedy, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn hashed_policies_respect_the_cap() {
        let mut r = ChaCha8Rng::seed_from_u64(12);
        for seed in 0..30 {
            let sys = random_relation_system(&mut r, 5, 6, 6, 3, 0.4).unwrap();
            let tr = progress_trace(&sys, &HashedPolicy { seed, positions: 5 }, 4).unwrap();
            assert!(tr.s[0].is_zero());
            assert!(tr.nondecreasing());
            assert!(tr.increments_within_cap(), "{tr:?}");
        }
    }
}
