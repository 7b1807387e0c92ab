//! Tail flicking: resample the path below a uniform index `j`, keeping
//! `x_j .. x_{L-1}` fixed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{assemble, regrow_grid, regrow_hypercube, Chooser, RngChooser, Snake};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Vertex};

/// Inclusive range of 1-based coordinate values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSet {
    pub lo: u32,
    pub hi: u32,
}

impl TargetSet {
    pub fn len(&self) -> u32 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, z: u32) -> bool {
        (self.lo..=self.hi).contains(&z)
    }
}

/// What the fixed part of a grid snake reveals about the block being cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridBlockState {
    pub block: usize,
    pub direction: usize,
    /// Coordinate value where the block's line started.
    pub start_value: u32,
    /// Targets consistent with the observed part of the line.
    pub targets: TargetSet,
    pub stalled: bool,
}

/// Posterior over the target of the block containing `j - 1`, given
/// `x_j .. x_{L-1}`. `None` when `j == 0`.
pub fn grid_block_state(g: &Graph, x: &Snake, j: usize) -> Option<GridBlockState> {
    let (d, side) = match g.kind() {
        GraphKind::Grid { d, side } => (d as usize, side as usize),
        _ => return None,
    };
    if j == 0 || j >= x.len() {
        return None;
    }
    let landing = j - 1;
    let block = landing / side;
    let direction = block % d;
    let entry = (side * (block + 1)).min(x.len() - 1);
    let path = x.path();
    let start_value = g.grid_coord(path[entry], direction);
    let full = TargetSet { lo: 1, hi: side as u32 };
    if entry == j {
        return Some(GridBlockState {
            block,
            direction,
            start_value,
            targets: full,
            stalled: false,
        });
    }
    let now = g.grid_coord(path[j], direction);
    let before = g.grid_coord(path[j + 1], direction);
    let (targets, stalled) = match now.cmp(&before) {
        std::cmp::Ordering::Equal => (TargetSet { lo: now, hi: now }, true),
        std::cmp::Ordering::Greater => (TargetSet { lo: now, hi: full.hi }, false),
        std::cmp::Ordering::Less => (TargetSet { lo: 1, hi: now }, false),
    };
    Some(GridBlockState {
        block,
        direction,
        start_value,
        targets,
        stalled,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlickResult {
    pub j: usize,
    pub y: Snake,
    /// `S_{X,Y}`: common vertices with equal first-hit index, ascending.
    pub shared: Vec<Vertex>,
    /// Whether every common vertex is in `shared`.
    pub agree: bool,
}

/// Shared first-hit set of two snakes and whether it covers their intersection.
pub fn agreement(x: &Snake, y: &Snake) -> (Vec<Vertex>, bool) {
    let fx = x.first_hits();
    let fy = y.first_hits();
    let mut shared = Vec::new();
    let mut agree = true;
    for (v, tx) in &fx {
        if let Some(ty) = fy.get(v) {
            if tx == ty {
                shared.push(*v);
            } else {
                agree = false;
            }
        }
    }
    shared.sort_unstable();
    (shared, agree)
}

/// Regrows indices below `j` of `x`, drawing from the conditional of the
/// generating process given `x_j .. x_{L-1}`.
pub fn regrow_below<C: Chooser + ?Sized>(g: &Graph, x: &Snake, j: usize, ch: &mut C) -> Result<Snake> {
    if g.kind() != x.kind() {
        return Err(Error::ShapeMismatch(format!("snake on {} used with {}", x.kind(), g.kind())));
    }
    if j >= x.len() {
        return Err(Error::Precondition(format!("flick index {j} >= L = {}", x.len())));
    }
    let top = x.path()[j];
    let below = match g.kind() {
        GraphKind::Hypercube { n } => regrow_hypercube(n, top, j, ch),
        GraphKind::Grid { .. } => match grid_block_state(g, x, j) {
            Some(state) => regrow_grid(g, top, j, state.targets, ch),
            None => Vec::new(),
        },
        _ => return Err(Error::Unsupported("snakes live on hypercubes and grids")),
    };
    Ok(assemble(x.kind(), below, &x.path()[j..]))
}

pub fn flick_at<C: Chooser + ?Sized>(g: &Graph, x: &Snake, j: usize, ch: &mut C) -> Result<FlickResult> {
    let y = regrow_below(g, x, j, ch)?;
    let (shared, agree) = agreement(x, &y);
    Ok(FlickResult { j, y, shared, agree })
}

/// The snake flicking its tail: `j` uniform in `0..L`, then a conditional regrowth.
pub fn flick_tail<R: Rng + ?Sized>(g: &Graph, x: &Snake, rng: &mut R) -> Result<FlickResult> {
    let j = rng.gen_range(0..x.len());
    flick_at(g, x, j, &mut RngChooser(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snake::{enumerate_outcomes, sample_snake};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn j_zero_is_identity() {
        let h = Graph::hypercube(6).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let x = sample_snake(&h, Vertex(3), 20, &mut r).unwrap();
        let f = flick_at(&h, &x, 0, &mut RngChooser(&mut r)).unwrap();
        assert_eq!(f.y, x);
        assert!(f.agree);
        let mut all: Vec<_> = x.first_hits().into_keys().collect();
        all.sort_unstable();
        assert_eq!(f.shared, all);
    }

    #[test]
    fn suffix_is_kept() {
        let graphs = [Graph::hypercube(9).unwrap(), Graph::grid(3, 5).unwrap()];
        for g in &graphs {
            let mut r = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..500 {
                let head = g.random_vertex(&mut r);
                let x = sample_snake(g, head, 30, &mut r).unwrap();
                let f = flick_tail(g, &x, &mut r).unwrap();
                assert_eq!(&f.y.path()[f.j..], &x.path()[f.j..]);
                assert!(Snake::new(g, f.y.path().to_vec()).is_ok());
                let (shared_rev, agree_rev) = agreement(&f.y, &x);
                assert_eq!(shared_rev, f.shared);
                assert_eq!(agree_rev, f.agree);
            }
        }
    }

    #[test]
    fn shared_is_subset_of_intersection() {
        let h = Graph::hypercube(4).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let x = sample_snake(&h, Vertex(0), 12, &mut r).unwrap();
            let f = flick_tail(&h, &x, &mut r).unwrap();
            for v in &f.shared {
                assert!(x.path().contains(v) && f.y.path().contains(v));
            }
        }
    }

    #[test]
    fn block_state_posterior_cases() {
        // d=1, side=5: a single direction; path x_4..x_0 written head first
        let g = Graph::grid(1, 5).unwrap();
        let mk = |head_first: &[u32]| {
            let mut p: Vec<Vertex> = head_first.iter().map(|&c| g.from_coords(&[c]).unwrap()).collect();
            p.reverse();
            Snake::new(&g, p).unwrap()
        };
        // L=5: block 0 covers 0..=4, entry is the head at index 4
        let x = mk(&[2, 3, 4, 4, 4]);
        let s = grid_block_state(&g, &x, 4).unwrap();
        assert_eq!(s.targets, TargetSet { lo: 1, hi: 5 });
        let s = grid_block_state(&g, &x, 3).unwrap();
        assert_eq!((s.targets, s.stalled, s.start_value), (TargetSet { lo: 3, hi: 5 }, false, 2));
        let s = grid_block_state(&g, &x, 1).unwrap();
        assert_eq!((s.targets, s.stalled), (TargetSet { lo: 4, hi: 4 }, true));
        let y = mk(&[4, 3, 2, 2, 2]);
        let s = grid_block_state(&g, &y, 2).unwrap();
        assert_eq!(s.targets, TargetSet { lo: 1, hi: 2 });
        assert!(grid_block_state(&g, &y, 0).is_none());
    }

    #[test]
    fn block_state_at_block_entry_is_fresh() {
        let g = Graph::grid(2, 3).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let x = sample_snake(&g, Vertex(4), 10, &mut r).unwrap();
        // index 6 = 3 * 2 is the entry of block 1
        let s = grid_block_state(&g, &x, 6).unwrap();
        assert_eq!((s.block, s.direction, s.targets), (1, 1, TargetSet { lo: 1, hi: 3 }));
        let s = grid_block_state(&g, &x, 3).unwrap();
        assert_eq!((s.block, s.direction, s.targets.len()), (0, 0, 3));
    }

    #[test]
    fn hypercube_regrowth_probability_is_two_to_minus_j() {
        let h = Graph::hypercube(5).unwrap();
        let x = sample_snake(&h, Vertex(17), 9, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for j in 0..9 {
            let outs = enumerate_outcomes(1 << 12, |ch| regrow_below(&h, &x, j, ch).unwrap()).unwrap();
            assert_eq!(outs.len(), 1 << j);
            assert!(outs.iter().all(|o| o.denominator == 1 << j));
        }
    }

    #[test]
    fn out_of_range_j() {
        let h = Graph::hypercube(3).unwrap();
        let x = Snake::new(&h, vec![Vertex(0), Vertex(1)]).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(0);
        assert!(flick_at(&h, &x, 2, &mut RngChooser(&mut r)).is_err());
    }
}
