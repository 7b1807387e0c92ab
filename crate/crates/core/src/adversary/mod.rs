//! Relational and geometric-mean adversary quantities over finite input families.
//!
//! All bound arithmetic is exact. The geometric-mean value is kept squared so
//! it stays rational.

mod progress;
mod subgraph;
mod systems;

pub use progress::{progress_trace, FnPolicy, HashedPolicy, PolicyStep, ProgressTrace, QueryPolicy};
pub use subgraph::{subgraph_holds, subgraph_prune};
pub use systems::{
    permutation_inversion_system, random_relation_system, snake_relation_system, SnakeRelation, SYMBOL_BIT0,
    SYMBOL_BIT1,
};

use num::{BigInt, BigRational, One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbol an input shows at one position.
pub type Symbol = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationSystem {
    positions: usize,
    a_inputs: Vec<Vec<Symbol>>,
    b_inputs: Vec<Vec<Symbol>>,
    /// Positive entries `(a, b, R(a, b))`, sorted by `(a, b)`.
    entries: Vec<(usize, usize, BigRational)>,
    by_a: Vec<Vec<usize>>,
    by_b: Vec<Vec<usize>>,
    m_a: Vec<BigRational>,
    m_b: Vec<BigRational>,
    total: BigRational,
}

/// Validates inputs and relation weights and caches the row, column and
/// grand sums. Zero weights are dropped and repeated pairs are summed.
pub fn build_relation_system(
    positions: usize,
    a_inputs: Vec<Vec<Symbol>>,
    b_inputs: Vec<Vec<Symbol>>,
    entries: Vec<(usize, usize, BigRational)>,
) -> Result<RelationSystem> {
    for (side, inputs) in [("A", &a_inputs), ("B", &b_inputs)] {
        if let Some((i, inp)) = inputs.iter().enumerate().find(|(_, v)| v.len() != positions) {
            return Err(Error::ShapeMismatch(format!(
                "{side}-input {i} has {} positions, expected {positions}",
                inp.len()
            )));
        }
    }
    let mut entries = entries;
    for (a, b, r) in &entries {
        if *a >= a_inputs.len() || *b >= b_inputs.len() {
            return Err(Error::ShapeMismatch(format!(
                "relation entry ({a}, {b}) outside {}x{}",
                a_inputs.len(),
                b_inputs.len()
            )));
        }
        if r.is_negative() {
            return Err(Error::NegativeWeight(*a, *b));
        }
    }
    entries.retain(|e| !e.2.is_zero());
    entries.sort_by_key(|e| (e.0, e.1));
    let mut merged: Vec<(usize, usize, BigRational)> = Vec::with_capacity(entries.len());
    for e in entries {
        match merged.last_mut() {
            Some(last) if (last.0, last.1) == (e.0, e.1) => last.2 += e.2,
            _ => merged.push(e),
        }
    }

    let mut by_a = vec![Vec::new(); a_inputs.len()];
    let mut by_b = vec![Vec::new(); b_inputs.len()];
    let mut m_a = vec![BigRational::zero(); a_inputs.len()];
    let mut m_b = vec![BigRational::zero(); b_inputs.len()];
    for (k, (a, b, r)) in merged.iter().enumerate() {
        by_a[*a].push(k);
        by_b[*b].push(k);
        m_a[*a] += r;
        m_b[*b] += r;
    }
    if let Some(i) = m_a.iter().position(Zero::is_zero) {
        return Err(Error::DegenerateRelation { side: "A", index: i });
    }
    if let Some(i) = m_b.iter().position(Zero::is_zero) {
        return Err(Error::DegenerateRelation { side: "B", index: i });
    }
    if a_inputs.is_empty() || b_inputs.is_empty() {
        return Err(Error::ShapeMismatch("both input sets must be nonempty".into()));
    }
    let total = m_a.iter().fold(BigRational::zero(), |acc, x| acc + x);
    Ok(RelationSystem {
        positions,
        a_inputs,
        b_inputs,
        entries: merged,
        by_a,
        by_b,
        m_a,
        m_b,
        total,
    })
}

impl RelationSystem {
    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn inputs(&self, side: Side) -> &[Vec<Symbol>] {
        match side {
            Side::A => &self.a_inputs,
            Side::B => &self.b_inputs,
        }
    }

    pub fn entries(&self) -> &[(usize, usize, BigRational)] {
        &self.entries
    }

    /// `R(a, b)`, zero when unrelated.
    pub fn weight(&self, a: usize, b: usize) -> BigRational {
        self.by_a
            .get(a)
            .and_then(|ks| ks.iter().find(|&&k| self.entries[k].1 == b))
            .map_or_else(BigRational::zero, |&k| self.entries[k].2.clone())
    }

    /// `M(A)` or `M(B)`.
    pub fn mass(&self, side: Side, index: usize) -> &BigRational {
        match side {
            Side::A => &self.m_a[index],
            Side::B => &self.m_b[index],
        }
    }

    /// `M`, the total relation weight.
    pub fn total(&self) -> &BigRational {
        &self.total
    }

    fn check_input(&self, side: Side, index: usize) -> Result<()> {
        let n = self.inputs(side).len();
        if index >= n {
            return Err(Error::UnknownIndex {
                kind: match side {
                    Side::A => "A-input",
                    Side::B => "B-input",
                },
                index,
            });
        }
        Ok(())
    }

    /// Fraction of `input`'s relation weight on partners that differ at `x`.
    pub fn theta(&self, side: Side, index: usize, x: usize) -> Result<BigRational> {
        self.check_input(side, index)?;
        if x >= self.positions {
            return Err(Error::UnknownIndex { kind: "position", index: x });
        }
        Ok(self.theta_unchecked(side, index, x))
    }

    fn theta_unchecked(&self, side: Side, index: usize, x: usize) -> BigRational {
        let (own, ks) = match side {
            Side::A => (&self.a_inputs[index], &self.by_a[index]),
            Side::B => (&self.b_inputs[index], &self.by_b[index]),
        };
        let mut num = BigRational::zero();
        for &k in ks {
            let (a, b, r) = &self.entries[k];
            let other = match side {
                Side::A => &self.b_inputs[*b],
                Side::B => &self.a_inputs[*a],
            };
            if other[x] != own[x] {
                num += r;
            }
        }
        num / self.mass(side, index)
    }

    /// `theta` for every position of one input.
    fn theta_row(&self, side: Side, index: usize) -> Vec<BigRational> {
        (0..self.positions).map(|x| self.theta_unchecked(side, index, x)).collect()
    }
}

/// `(a, b, x)`: related inputs and a position where they differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub a: usize,
    pub b: usize,
    pub x: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryReport {
    /// Square of the largest geometric mean `sqrt(theta_A theta_B)`.
    #[serde(with = "rational_str")]
    pub upsilon_geom_sq: BigRational,
    pub upsilon_geom: f64,
    pub geom_witness: Witness,
    /// Largest `min(theta_A, theta_B)`.
    #[serde(with = "rational_str")]
    pub upsilon_min: BigRational,
    pub min_witness: Witness,
    /// Randomized lower bound `1 / (5 upsilon_min)`.
    #[serde(with = "rational_str")]
    pub randomized_bound: BigRational,
    /// Quantum lower bound up to constants, `1 / upsilon_geom`.
    pub quantum_bound: f64,
    #[serde(with = "rational_str")]
    pub total_weight: BigRational,
    pub a_inputs: usize,
    pub b_inputs: usize,
    pub related_pairs: usize,
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Maxima over related `(A, B)` and positions where they differ. Ties keep
/// the first triple in `(a, b, x)` order.
pub fn upsilon_bounds(sys: &RelationSystem) -> Result<AdversaryReport> {
    let theta_a: Vec<Vec<BigRational>> =
        (0..sys.a_inputs.len()).into_par_iter().map(|i| sys.theta_row(Side::A, i)).collect();
    let theta_b: Vec<Vec<BigRational>> =
        (0..sys.b_inputs.len()).into_par_iter().map(|i| sys.theta_row(Side::B, i)).collect();

    type Best = Option<(BigRational, Witness)>;
    let per_entry: Vec<(Best, Best)> = sys
        .entries
        .par_iter()
        .map(|(a, b, _)| {
            let (mut geom, mut min): (Best, Best) = (None, None);
            for x in 0..sys.positions {
                if sys.a_inputs[*a][x] == sys.b_inputs[*b][x] {
                    continue;
                }
                let w = Witness { a: *a, b: *b, x };
                let (ta, tb) = (&theta_a[*a][x], &theta_b[*b][x]);
                let g = ta * tb;
                if geom.as_ref().map_or(true, |(v, _)| g > *v) {
                    geom = Some((g, w));
                }
                let m = if ta < tb { ta.clone() } else { tb.clone() };
                if min.as_ref().map_or(true, |(v, _)| m > *v) {
                    min = Some((m, w));
                }
            }
            (geom, min)
        })
        .collect();

    let pick = |best: &mut Best, cand: Best| {
        if let Some((v, w)) = cand {
            if best.as_ref().map_or(true, |(b, _)| v > *b) {
                *best = Some((v, w));
            }
        }
    };
    let (mut geom, mut min): (Best, Best) = (None, None);
    for (g, m) in per_entry {
        pick(&mut geom, g);
        pick(&mut min, m);
    }
    let (Some((geom_sq, geom_witness)), Some((vmin, min_witness))) = (geom, min) else {
        return Err(Error::NoQualifyingTriple);
    };
    let five = BigRational::from_integer(BigInt::from(5));
    let upsilon_geom = to_f64(&geom_sq).sqrt();
    Ok(AdversaryReport {
        randomized_bound: BigRational::one() / (five * &vmin),
        quantum_bound: 1.0 / upsilon_geom,
        upsilon_geom,
        upsilon_geom_sq: geom_sq,
        geom_witness,
        upsilon_min: vmin,
        min_witness,
        total_weight: sys.total.clone(),
        a_inputs: sys.a_inputs.len(),
        b_inputs: sys.b_inputs.len(),
        related_pairs: sys.entries.len(),
    })
}

/// JSON import format for user-supplied systems. Weights are strings such
/// as `"3"` or `"1/4"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSystemFile {
    pub positions: usize,
    pub a: Vec<Vec<Symbol>>,
    pub b: Vec<Vec<Symbol>>,
    pub relation: Vec<(usize, usize, String)>,
}

impl RelationSystemFile {
    pub fn build(self) -> Result<RelationSystem> {
        let entries = self
            .relation
            .into_iter()
            .map(|(a, b, w)| {
                w.trim()
                    .parse::<BigRational>()
                    .map(|r| (a, b, r))
                    .map_err(|_| Error::Config(format!("bad weight {w:?} at ({a}, {b})")))
            })
            .collect::<Result<Vec<_>>>()?;
        build_relation_system(self.positions, self.a, self.b, entries)
    }
}

impl RelationSystem {
    pub fn to_file(&self) -> RelationSystemFile {
        RelationSystemFile {
            positions: self.positions,
            a: self.a_inputs.clone(),
            b: self.b_inputs.clone(),
            relation: self.entries.iter().map(|(a, b, r)| (*a, *b, r.to_string())).collect(),
        }
    }
}

mod rational_str {
    use num::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_pair() {
        let s = build_relation_system(1, vec![vec![0]], vec![vec![1]], vec![(0, 0, q(1, 1))]).unwrap();
        assert_eq!(s.total(), &q(1, 1));
        let r = upsilon_bounds(&s).unwrap();
        assert_eq!(r.upsilon_min, q(1, 1));
        assert_eq!(r.upsilon_geom_sq, q(1, 1));
        assert_eq!(r.randomized_bound, q(1, 5));
    }

    #[test]
    fn rejects_bad_relations() {
        let zero = build_relation_system(1, vec![vec![0]], vec![vec![1]], vec![(0, 0, q(0, 1))]);
        assert!(matches!(zero, Err(Error::DegenerateRelation { .. })));
        let none = build_relation_system(1, vec![vec![0]], vec![vec![1]], vec![]);
        assert!(matches!(none, Err(Error::DegenerateRelation { .. })));
        let neg = build_relation_system(1, vec![vec![0]], vec![vec![1]], vec![(0, 0, q(-1, 2))]);
        assert!(matches!(neg, Err(Error::NegativeWeight(0, 0))));
        let shape = build_relation_system(2, vec![vec![0]], vec![vec![1, 1]], vec![(0, 0, q(1, 1))]);
        assert!(matches!(shape, Err(Error::ShapeMismatch(_))));
        let oob = build_relation_system(1, vec![vec![0]], vec![vec![1]], vec![(0, 3, q(1, 1))]);
        assert!(matches!(oob, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn theta_extremes() {
        // A0 differs from both partners at position 0 and from none at position 1
        let s = build_relation_system(
            2,
            vec![vec![0, 7]],
            vec![vec![1, 7], vec![2, 7]],
            vec![(0, 0, q(1, 3)), (0, 1, q(2, 3))],
        )
        .unwrap();
        assert_eq!(s.theta(Side::A, 0, 0).unwrap(), q(1, 1));
        assert_eq!(s.theta(Side::A, 0, 1).unwrap(), q(0, 1));
        assert!(s.theta(Side::A, 1, 0).is_err());
        assert!(s.theta(Side::B, 0, 2).is_err());
        let r = upsilon_bounds(&s).unwrap();
        assert_eq!((r.upsilon_min.clone(), r.upsilon_geom_sq.clone()), (q(1, 1), q(1, 1)));
        assert!(r.upsilon_min <= r.upsilon_geom_sq);
    }

    #[test]
    fn no_qualifying_triple() {
        let s = build_relation_system(1, vec![vec![0]], vec![vec![0]], vec![(0, 0, q(1, 1))]).unwrap();
        assert!(matches!(upsilon_bounds(&s), Err(Error::NoQualifyingTriple)));
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let s = build_relation_system(1, vec![vec![0]], vec![vec![1]], vec![(0, 0, q(1, 2)), (0, 0, q(1, 2))]).unwrap();
        assert_eq!(s.weight(0, 0), q(1, 1));
        assert_eq!(s.entries().len(), 1);
    }

    #[test]
    fn file_round_trip() {
        let s = build_relation_system(
            2,
            vec![vec![0, 1], vec![1, 1]],
            vec![vec![0, 0]],
            vec![(0, 0, q(1, 4)), (1, 0, q(3, 4))],
        )
        .unwrap();
        let text = serde_json::to_string(&s.to_file()).unwrap();
        let back: RelationSystemFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build().unwrap(), s);
        let bad = RelationSystemFile {
            positions: 1,
            a: vec![vec![0]],
            b: vec![vec![1]],
            relation: vec![(0, 0, "one half".into())],
        };
        assert!(matches!(bad.build(), Err(Error::Config(_))));
    }

    #[test]
    fn report_json_uses_rational_strings() {
        let s = build_relation_system(1, vec![vec![0]], vec![vec![1]], vec![(0, 0, q(1, 1))]).unwrap();
        let r = upsilon_bounds(&s).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["upsilon_min"], "1");
        assert_eq!(v["randomized_bound"], "1/5");
        let back: AdversaryReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
