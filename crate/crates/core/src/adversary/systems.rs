//! Concrete relation systems: permutation inversion, snake inputs, random tables.

use std::collections::HashMap;

use num::{BigInt, BigRational, One, Zero};
use rand::Rng;

use super::{build_relation_system, RelationSystem, Symbol};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::snake::{enumerate_outcomes, flick::agreement, Snake};

/// Symbol tag for the minimum of an A-input (answer bit 0).
pub const SYMBOL_BIT0: Symbol = 2;
/// Symbol tag for the minimum of a B-input (answer bit 1).
pub const SYMBOL_BIT1: Symbol = 3;

fn next_permutation(p: &mut [Symbol]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("pivot has a larger successor");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// A-inputs hide symbol 1 in the first half of the positions, B-inputs in
/// the second; related pairs differ by swapping where the 1 sits.
pub fn permutation_inversion_system(n: usize, budget: &Budget) -> Result<RelationSystem> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::Precondition(format!("permutation size must be even and positive, got {n}")));
    }
    let fact = (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k)).unwrap_or(u128::MAX);
    budget.check("permutation inversion system", fact.saturating_mul(n as u128).saturating_mul(8))?;

    let half = n / 2;
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut perm: Vec<Symbol> = (1..=n as Symbol).collect();
    loop {
        let one = perm.iter().position(|&s| s == 1).expect("1 present");
        if one < half {
            a.push(perm.clone());
        } else {
            b.push(perm.clone());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let b_index: HashMap<&[Symbol], usize> = b.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let mut entries = Vec::with_capacity(a.len() * half);
    for (i, sigma) in a.iter().enumerate() {
        let p = sigma.iter().position(|&s| s == 1).expect("1 present");
        let mut tau = sigma.clone();
        for q in half..n {
            tau.swap(p, q);
            entries.push((i, b_index[tau.as_slice()], BigRational::one()));
            tau.swap(p, q);
        }
    }
    build_relation_system(n, a, b, entries)
}

/// The snake family on a hypercube with head at the all-zeros vertex.
#[derive(Debug, Clone)]
pub struct SnakeRelation {
    pub system: RelationSystem,
    /// Every snake in the support, indexed like the A- and B-inputs.
    pub snakes: Vec<Snake>,
    pub graph: Graph,
}

impl SnakeRelation {
    /// Probability of each snake in the support.
    pub fn p(&self) -> BigRational {
        uniform_p(&self.snakes)
    }

    /// Probability that regrowing below `j` from `x` yields `y`: zero unless
    /// they agree at every index `>= j`, otherwise a factor 1/2 for every
    /// regrown step `y` takes consistently with the bit schedule.
    pub fn q(&self, x: usize, y: usize, j: usize) -> BigRational {
        regrow_probability(&self.graph, &self.snakes[x], &self.snakes[y], j)
    }

    /// `w(X, Y) = p(X) / L * sum_j q_j(X, Y)`.
    pub fn w(&self, x: usize, y: usize) -> BigRational {
        flick_weight(&self.graph, &self.snakes, x, y)
    }
}

fn uniform_p(snakes: &[Snake]) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << (snakes[0].len() - 1))
}

fn regrow_probability(g: &Graph, x: &Snake, y: &Snake, j: usize) -> BigRational {
    let (xp, yp) = (x.path(), y.path());
    if xp[j..] != yp[j..] {
        return BigRational::zero();
    }
    let n = g.dimension();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut prob = BigRational::one();
    for t in (1..=j).rev() {
        let flip = yp[t].0 ^ yp[t - 1].0;
        if flip != 0 && flip != 1 << (t % n) {
            return BigRational::zero();
        }
        prob *= &half;
    }
    prob
}

fn flick_weight(g: &Graph, snakes: &[Snake], x: usize, y: usize) -> BigRational {
    let l = snakes[x].len();
    let sum = (0..l).fold(BigRational::zero(), |acc, j| acc + regrow_probability(g, &snakes[x], &snakes[y], j));
    uniform_p(snakes) * sum / BigRational::from_integer(BigInt::from(l))
}

fn snake_symbols(g: &Graph, x: &Snake, bit_tag: Symbol) -> Vec<Symbol> {
    let len = x.len() as u64;
    let mut sym: Vec<Symbol> = g
        .vertices()
        .map(|v| (g.distance_unchecked(v, x.head()) + len) << 2)
        .collect();
    for (v, t) in x.first_hits() {
        sym[v.index()] = (t as u64) << 2;
    }
    sym[x.tail().index()] |= bit_tag;
    sym
}

/// All snakes of length `length` on the `n`-cube with head `0`, as bit-0
/// inputs `f_X` and bit-1 inputs `g_Y`, related by `w(X, Y)` when the two
/// agree on their shared vertices.
pub fn snake_relation_system(n: u32, length: usize, budget: &Budget) -> Result<SnakeRelation> {
    if length == 0 {
        return Err(Error::Precondition("snake length must be positive".into()));
    }
    let g = Graph::hypercube(n)?;
    let support = 1u128 << (length - 1);
    budget.check(
        "snake relation system",
        (support * ((support << 1) - 1)).div_ceil(8),
    )?;
    budget.check("snake relation inputs", support * g.num_vertices() as u128)?;
    let outs = enumerate_outcomes(budget.enumeration_cap, |ch| {
        crate::snake::sample_with(&g, Vertex(0), length, ch)
    })?;
    let snakes = outs.into_iter().map(|o| o.value).collect::<Result<Vec<_>>>()?;

    let a: Vec<_> = snakes.iter().map(|x| snake_symbols(&g, x, SYMBOL_BIT0)).collect();
    let b: Vec<_> = snakes.iter().map(|x| snake_symbols(&g, x, SYMBOL_BIT1)).collect();
    let mut entries = Vec::new();
    for x in 0..snakes.len() {
        for y in 0..snakes.len() {
            if agreement(&snakes[x], &snakes[y]).1 {
                let w = flick_weight(&g, &snakes, x, y);
                if !w.is_zero() {
                    entries.push((x, y, w));
                }
            }
        }
    }
    let system = build_relation_system(g.num_vertices() as usize, a, b, entries)?;
    Ok(SnakeRelation { system, snakes, graph: g })
}

/// Random table with symbols in `0..alphabet` and small integer weights.
/// Every input gets at least one partner.
pub fn random_relation_system<R: Rng + ?Sized>(
    rng: &mut R,
    positions: usize,
    na: usize,
    nb: usize,
    alphabet: Symbol,
    density: f64,
) -> Result<RelationSystem> {
    let mut draw = |k: usize| -> Vec<Vec<Symbol>> {
        (0..k).map(|_| (0..positions).map(|_| rng.gen_range(0..alphabet.max(1))).collect()).collect()
    };
    let a = draw(na);
    let b = draw(nb);
    let mut entries = Vec::new();
    for i in 0..na {
        for j in 0..nb {
            let forced = j == i % nb || i == j % na;
            if forced || rng.gen_bool(density.clamp(0.0, 1.0)) {
                entries.push((i, j, BigRational::from_integer(BigInt::from(rng.gen_range(1..=4)))));
            }
        }
    }
    build_relation_system(positions, a, b, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{upsilon_bounds, Side};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn permutation_n2() {
        let s = permutation_inversion_system(2, &Budget::default()).unwrap();
        assert_eq!(s.inputs(Side::A), &[vec![1, 2]]);
        assert_eq!(s.inputs(Side::B), &[vec![2, 1]]);
        assert_eq!(s.weight(0, 0), q(1, 1));
    }

    #[test]
    fn permutation_n4_counts() {
        let s = permutation_inversion_system(4, &Budget::default()).unwrap();
        assert_eq!(s.inputs(Side::A).len(), 12);
        assert_eq!(s.inputs(Side::B).len(), 12);
        assert_eq!(s.total(), &q(24, 1));
        for i in 0..12 {
            assert_eq!(s.mass(Side::A, i), &q(2, 1));
            assert_eq!(s.mass(Side::B, i), &q(2, 1));
        }
        // theta is 2/N at positions a partner can move the 1 to, 0 at the
        // other first-half positions
        for (i, sigma) in s.inputs(Side::A).iter().enumerate() {
            let p = sigma.iter().position(|&v| v == 1).unwrap();
            for x in 0..4 {
                let expect = match x {
                    _ if x == p => q(1, 1),
                    0 | 1 => q(0, 1),
                    _ => q(1, 2),
                };
                assert_eq!(s.theta(Side::A, i, x).unwrap(), expect);
            }
        }
    }

    #[test]
    fn permutation_n6_geom() {
        let s = permutation_inversion_system(6, &Budget::default()).unwrap();
        let r = upsilon_bounds(&s).unwrap();
        assert_eq!(r.upsilon_geom_sq, q(1, 3));
        assert_eq!(r.upsilon_min, q(1, 3));
    }

    #[test]
    fn permutation_rejects() {
        assert!(permutation_inversion_system(3, &Budget::default()).is_err());
        assert!(permutation_inversion_system(0, &Budget::default()).is_err());
        assert!(matches!(
            permutation_inversion_system(12, &Budget::default()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    /// Conditional probability by counting: the support is uniform, so
    /// q_j(X, Y) = [Y agrees with X at t >= j] / |{Z : Z agrees with X at t >= j}|.
    fn q_by_counting(rel: &SnakeRelation, x: usize, y: usize, j: usize) -> BigRational {
        let xp = rel.snakes[x].path();
        let consistent = rel.snakes.iter().filter(|z| z.path()[j..] == xp[j..]).count();
        if rel.snakes[y].path()[j..] == xp[j..] {
            BigRational::new(BigInt::one(), BigInt::from(consistent))
        } else {
            BigRational::zero()
        }
    }

    #[test]
    fn snake_weights_symmetric_and_normalized() {
        let rel = snake_relation_system(4, 6, &Budget::default()).unwrap();
        let k = rel.snakes.len();
        assert_eq!(k, 32);
        let mut total = BigRational::zero();
        for x in 0..k {
            assert!(rel.w(x, x) > BigRational::zero());
            for y in 0..k {
                for j in 0..6 {
                    assert_eq!(rel.q(x, y, j), q_by_counting(&rel, x, y, j));
                }
                assert_eq!(rel.w(x, y), rel.w(y, x));
                total += rel.w(x, y);
            }
        }
        assert_eq!(total, BigRational::one());
    }

    #[test]
    fn snake_inputs_mark_the_minimum() {
        let rel = snake_relation_system(3, 4, &Budget::default()).unwrap();
        for (i, x) in rel.snakes.iter().enumerate() {
            let a = &rel.system.inputs(Side::A)[i];
            let b = &rel.system.inputs(Side::B)[i];
            assert_eq!(a[x.tail().index()], SYMBOL_BIT0);
            assert_eq!(b[x.tail().index()], SYMBOL_BIT1);
            assert_eq!(a[x.head().index()] >> 2, x.first_hits()[&x.head()] as u64);
        }
        let r = upsilon_bounds(&rel.system).unwrap();
        assert!(r.upsilon_min.clone() * r.upsilon_min.clone() <= r.upsilon_geom_sq);
        assert!(r.upsilon_geom_sq <= BigRational::one());
    }

    #[test]
    fn snake_system_budget() {
        assert!(snake_relation_system(4, 20, &Budget::default()).is_err());
    }

    #[test]
    fn random_systems_are_valid() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let s = random_relation_system(&mut r, 4, 5, 3, 3, 0.3).unwrap();
            assert_eq!(s.inputs(Side::A).len(), 5);
            assert_eq!(s.inputs(Side::B).len(), 3);
        }
    }
}
