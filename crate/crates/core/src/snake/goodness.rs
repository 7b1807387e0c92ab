//! Estimating how well a snake spreads out when it flicks its tail.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::flick::{agreement, regrow_below};
use super::{enumerate_outcomes, flick_tail, Snake};
use crate::budget::Budget;
use crate::error::Result;
use crate::graph::{Graph, Vertex};

/// Agreement probability threshold for a good snake.
pub const AGREE_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum GoodnessMode {
    Exact,
    MonteCarlo { flicks: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    /// `Pr_{j,Y}[X ∩ Y = S_{X,Y}]`.
    pub p_agree: f64,
    /// `max_v Pr_{j,Y}[v ∈ {y_0 .. y_j}]`.
    pub eps_hat: f64,
    pub argmax: Vertex,
    /// Flicks drawn, or regrowth branches enumerated.
    pub samples: u64,
    pub exact: bool,
}

impl GoodnessReport {
    pub fn is_good(&self, eps: f64) -> bool {
        self.p_agree >= AGREE_THRESHOLD && self.eps_hat <= eps
    }
}

fn max_entry(mass: HashMap<Vertex, f64>) -> (Vertex, f64) {
    mass.into_iter()
        .fold((Vertex(0), f64::NEG_INFINITY), |best, (v, p)| {
            if p > best.1 || (p == best.1 && v < best.0) {
                (v, p)
            } else {
                best
            }
        })
}

pub fn goodness_estimate<R: Rng + ?Sized>(
    g: &Graph,
    x: &Snake,
    mode: GoodnessMode,
    rng: &mut R,
    budget: &Budget,
) -> Result<GoodnessReport> {
    let len = x.len();
    let mut mass: HashMap<Vertex, f64> = HashMap::new();
    let mut p_agree = 0.0;
    let mut seen = HashSet::new();
    let (samples, exact) = match mode {
        GoodnessMode::MonteCarlo { flicks } => {
            let mut agree = 0u64;
            let mut hits: HashMap<Vertex, u64> = HashMap::new();
            for _ in 0..flicks {
                let f = flick_tail(g, x, rng)?;
                agree += u64::from(f.agree);
                seen.clear();
                seen.extend(f.y.path()[..=f.j].iter().copied());
                for &v in &seen {
                    *hits.entry(v).or_default() += 1;
                }
            }
            let denom = flicks.max(1) as f64;
            p_agree = agree as f64 / denom;
            mass = hits.into_iter().map(|(v, c)| (v, c as f64 / denom)).collect();
            (flicks, false)
        }
        GoodnessMode::Exact => {
            let mut used = 0u64;
            for j in 0..len {
                let remaining = budget.enumeration_cap.saturating_sub(used);
                let outs = enumerate_outcomes(remaining, |ch| regrow_below(g, x, j, ch))?;
                used += outs.len() as u64;
                for o in outs {
                    let w = o.probability() / len as f64;
                    let y = o.value?;
                    if agreement(x, &y).1 {
                        p_agree += w;
                    }
                    seen.clear();
                    seen.extend(y.path()[..=j].iter().copied());
                    for &v in &seen {
                        *mass.entry(v).or_default() += w;
                    }
                }
            }
            (used, true)
        }
    };
    let (argmax, eps_hat) = max_entry(mass);
    Ok(GoodnessReport {
        p_agree,
        eps_hat,
        argmax,
        samples,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snake::sample_snake;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn length_one() {
        let h = Graph::hypercube(4).unwrap();
        let x = Snake::new(&h, vec![Vertex(2)]).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(0);
        let rep = goodness_estimate(&h, &x, GoodnessMode::Exact, &mut r, &Budget::default()).unwrap();
        assert_eq!(rep.p_agree, 1.0);
        assert_eq!(rep.eps_hat, 1.0);
        assert_eq!(rep.argmax, Vertex(2));
    }

    #[test]
    fn head_always_reachable() {
        let h = Graph::hypercube(6).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let x = sample_snake(&h, Vertex(9), 12, &mut r).unwrap();
        let rep = goodness_estimate(&h, &x, GoodnessMode::Exact, &mut r, &Budget::default()).unwrap();
        assert!(rep.eps_hat >= 1.0 / 12.0);
        assert!(rep.samples == (1 << 12) - 1);
    }

    #[test]
    fn monte_carlo_tracks_exact() {
        let h = Graph::hypercube(5).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(8);
        let x = sample_snake(&h, Vertex(0), 10, &mut r).unwrap();
        let ex = goodness_estimate(&h, &x, GoodnessMode::Exact, &mut r, &Budget::default()).unwrap();
        let mc = goodness_estimate(&h, &x, GoodnessMode::MonteCarlo { flicks: 200_000 }, &mut r, &Budget::default()).unwrap();
        assert!((ex.p_agree - mc.p_agree).abs() < 0.01, "{ex:?} {mc:?}");
        assert!((ex.eps_hat - mc.eps_hat).abs() < 0.01, "{ex:?} {mc:?}");
    }

    #[test]
    fn grid_exact_runs() {
        let g = Graph::grid(2, 3).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(8);
        let x = sample_snake(&g, Vertex(4), 8, &mut r).unwrap();
        let ex = goodness_estimate(&g, &x, GoodnessMode::Exact, &mut r, &Budget::default()).unwrap();
        assert!(ex.p_agree > 0.0 && ex.p_agree <= 1.0 + 1e-12);
        assert!(ex.eps_hat >= 1.0 / 8.0);
    }

    #[test]
    fn exact_budget() {
        let h = Graph::hypercube(8).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(8);
        let x = sample_snake(&h, Vertex(0), 24, &mut r).unwrap();
        assert!(goodness_estimate(&h, &x, GoodnessMode::Exact, &mut r, &Budget::default()).is_err());
    }
}
