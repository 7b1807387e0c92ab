//! Exact distribution of the generating process a fixed number of steps past a known state.

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Vertex};

/// Runs the generating process for `gap` steps from `start` and returns
/// `max_v |p(v) - 1/N|`.
///
/// The fixed state sits at index `gap`, so the steps follow the same
/// coordinate schedule as generation from a head at that index.
pub fn mixing_check(g: &Graph, start: Vertex, gap: usize, budget: &Budget) -> Result<f64> {
    g.validate(start)?;
    let n_vertices = g.num_vertices() as usize;
    budget.check("exact mixing distribution", (n_vertices as u128) << 6)?;
    let mut p = vec![0f64; n_vertices];
    p[start.index()] = 1.0;
    match g.kind() {
        GraphKind::Hypercube { n } => {
            let mut next = vec![0f64; n_vertices];
            for t in (1..=gap).rev() {
                if n == 0 {
                    break;
                }
                let bit = 1usize << (t % n as usize);
                for (v, slot) in next.iter_mut().enumerate() {
                    *slot = 0.5 * p[v] + 0.5 * p[v ^ bit];
                }
                std::mem::swap(&mut p, &mut next);
            }
        }
        GraphKind::Grid { d, side } => {
            let (d, side) = (d as usize, side as usize);
            let mut top = gap;
            while top > 0 {
                let block = (top - 1) / side;
                let dir = block % d;
                let steps = top - block * side;
                top = block * side;
                let mut next = vec![0f64; n_vertices];
                for v in 0..n_vertices {
                    if p[v] == 0.0 {
                        continue;
                    }
                    let vert = Vertex(v as u64);
                    let c = g.grid_coord(vert, dir) as i64;
                    let share = p[v] / side as f64;
                    for z in 1..=side as i64 {
                        let moved = (z - c).abs().min(steps as i64);
                        let to = c + moved * (z - c).signum();
                        next[g.with_grid_coord(vert, dir, to as u32).index()] += share;
                    }
                }
                p = next;
            }
        }
        _ => return Err(Error::Unsupported("snakes live on hypercubes and grids")),
    }
    let uniform = 1.0 / n_vertices as f64;
    Ok(p.iter().map(|&x| (x - uniform).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_mixes_in_n_steps() {
        let h = Graph::hypercube(4).unwrap();
        assert!(mixing_check(&h, Vertex(5), 4, &Budget::default()).unwrap() <= 1e-12);
        assert!(mixing_check(&h, Vertex(5), 3, &Budget::default()).unwrap() > 0.0);
        assert!(mixing_check(&h, Vertex(5), 11, &Budget::default()).unwrap() <= 1e-12);
        assert!((mixing_check(&h, Vertex(0), 0, &Budget::default()).unwrap() - 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn grid_mixes_in_d_blocks() {
        let g = Graph::grid(2, 4).unwrap();
        for start in g.vertices() {
            assert!(mixing_check(&g, start, 2 * 4, &Budget::default()).unwrap() <= 1e-12);
            // three steps still reach every target
            assert!(mixing_check(&g, start, 2 * 4 - 1, &Budget::default()).unwrap() <= 1e-12);
        }
        // two steps from a corner do not
        assert!(mixing_check(&g, Vertex(0), 4 + 2, &Budget::default()).unwrap() > 0.0);
        let g3 = Graph::grid(3, 3).unwrap();
        assert!(mixing_check(&g3, Vertex(13), 9, &Budget::default()).unwrap() <= 1e-12);
        assert!(mixing_check(&g3, Vertex(13), 6, &Budget::default()).unwrap() > 0.0);
    }

    #[test]
    fn budget_and_family() {
        let h = Graph::hypercube(20).unwrap();
        assert!(mixing_check(&h, Vertex(0), 20, &Budget::default()).is_err());
        let l = Graph::line(4).unwrap();
        assert!(mixing_check(&l, Vertex(0), 2, &Budget::default()).is_err());
    }
}
