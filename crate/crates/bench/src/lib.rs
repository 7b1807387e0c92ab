//! Fixtures shared by the benchmarks.

use lslab_core::harness::default_length;
use lslab_core::snake::{sample_snake, Snake};
use lslab_core::Graph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A hypercube and a snake of the default length on it.
pub fn cube_snake(n: u32, seed: u64) -> (Graph, Snake) {
    let g = Graph::hypercube(n).expect("valid dimension");
    let mut r = rng(seed);
    let head = g.random_vertex(&mut r);
    let x = sample_snake(&g, head, default_length(&g), &mut r).expect("valid snake");
    (g, x)
}
