//! Discrete random choices, either drawn from an RNG or enumerated exhaustively.
//!
//! Every generating process in this crate is written against [`Chooser`].
//! Driving it with [`RngChooser`] samples it; driving it with
//! [`enumerate_outcomes`] visits every branch exactly once together with its
//! exact probability, through the same code.

use rand::Rng;

use crate::error::{Error, Result};

pub trait Chooser {
    /// A uniform draw from `0..arity`. `arity` must be at least 1.
    fn choose(&mut self, arity: u32) -> u32;
}

pub struct RngChooser<'a, R: Rng + ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> Chooser for RngChooser<'_, R> {
    #[inline]
    fn choose(&mut self, arity: u32) -> u32 {
        debug_assert!(arity >= 1);
        if arity == 1 {
            0
        } else {
            self.0.gen_range(0..arity)
        }
    }
}

/// Replays a prefix of recorded choices, extending with zeros.
#[derive(Debug, Default)]
struct Tape {
    slots: Vec<(u32, u32)>,
    pos: usize,
}

impl Chooser for Tape {
    fn choose(&mut self, arity: u32) -> u32 {
        debug_assert!(arity >= 1);
        if arity == 1 {
            return 0;
        }
        let c = if self.pos < self.slots.len() {
            debug_assert_eq!(self.slots[self.pos].1, arity, "process is not replayable");
            self.slots[self.pos].0
        } else {
            self.slots.push((0, arity));
            0
        };
        self.pos += 1;
        c
    }
}

impl Tape {
    /// Odometer step to the next unvisited branch. Returns false when exhausted.
    fn advance(&mut self) -> bool {
        self.slots.truncate(self.pos);
        self.pos = 0;
        while let Some(last) = self.slots.last_mut() {
            if last.0 + 1 < last.1 {
                last.0 += 1;
                return true;
            }
            self.slots.pop();
        }
        false
    }

    fn denominator(&self) -> u128 {
        self.slots[..self.pos].iter().map(|&(_, a)| a as u128).product()
    }
}

/// One branch of a process: its output and probability `1 / denominator`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub denominator: u128,
    pub value: T,
}

impl<T> Outcome<T> {
    pub fn probability(&self) -> f64 {
        1.0 / self.denominator as f64
    }
}

/// Runs `process` once per branch of its choice tree. Fails once more than
/// `cap` branches have been produced.
pub fn enumerate_outcomes<T>(cap: u64, mut process: impl FnMut(&mut dyn Chooser) -> T) -> Result<Vec<Outcome<T>>> {
    let mut tape = Tape::default();
    let mut out = Vec::new();
    loop {
        let value = process(&mut tape);
        if out.len() as u64 >= cap {
            return Err(Error::BudgetExceeded {
                what: "outcome enumeration",
                needed: out.len() as u128 + 1,
                cap,
            });
        }
        out.push(Outcome {
            denominator: tape.denominator(),
            value,
        });
        if !tape.advance() {
            return Ok(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_variable_depth_tree() {
        // first a coin; on heads, a three-way choice
        let outs = enumerate_outcomes(100, |ch| {
            if ch.choose(2) == 1 {
                10 + ch.choose(3)
            } else {
                0
            }
        })
        .unwrap();
        let got: Vec<_> = outs.iter().map(|o| (o.value, o.denominator)).collect();
        assert_eq!(got, vec![(0, 2), (10, 6), (11, 6), (12, 6)]);
        let total: f64 = outs.iter().map(|o| o.probability()).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_process_has_one_outcome() {
        let outs = enumerate_outcomes(10, |ch| ch.choose(1)).unwrap();
        assert_eq!(outs, vec![Outcome { denominator: 1, value: 0 }]);
    }

    #[test]
    fn cap_is_enforced() {
        let r = enumerate_outcomes(7, |ch| (0..3).map(|_| ch.choose(2)).sum::<u32>());
        assert!(r.is_err());
        assert_eq!(enumerate_outcomes(8, |ch| (0..3).map(|_| ch.choose(2)).sum::<u32>()).unwrap().len(), 8);
    }
}
