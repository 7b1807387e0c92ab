//! Coordinate-scan distances and the sparseness test for snakes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Snake;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Vertex};

/// Least `k` such that `x` and `v` agree outside the cyclic window
/// `{i, i-1, .., i-k+1}` of coordinates. Ranges over `0..=dim`.
pub fn delta_scan(g: &Graph, x: Vertex, v: Vertex, i: usize) -> Result<u32> {
    g.validate(x)?;
    g.validate(v)?;
    let dim = g.dimension();
    if i >= dim.max(1) {
        return Err(Error::Precondition(format!("coordinate {i} >= dimension {dim}")));
    }
    Ok(delta_unchecked(g, x, v, i))
}

#[inline]
pub(crate) fn delta_unchecked(g: &Graph, x: Vertex, v: Vertex, i: usize) -> u32 {
    let window = |c: usize, dim: usize| ((i + dim - c) % dim) as u32 + 1;
    match g.kind() {
        GraphKind::Hypercube { n } => {
            let mut diff = x.0 ^ v.0;
            let mut k = 0;
            while diff != 0 {
                let c = diff.trailing_zeros() as usize;
                k = k.max(window(c, n as usize));
                diff &= diff - 1;
            }
            k
        }
        GraphKind::Grid { d, .. } => (0..d as usize)
            .filter(|&c| g.grid_coord(x, c) != g.grid_coord(v, c))
            .map(|c| window(c, d as usize))
            .max()
            .unwrap_or(0),
        _ => u32::from(x != v),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum SparseMode {
    Exact,
    Sampled { vertices: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityWitness {
    pub vertex: u64,
    pub k: u32,
    pub count: u64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsenessReport {
    pub sparse: bool,
    pub c: f64,
    /// The `(v, k)` pair with the largest count-to-threshold ratio.
    pub worst: Option<SparsityWitness>,
    /// `mu_k = (L / dim) * side^k / N`.
    pub expected_counts: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub vertices_checked: u64,
    pub exact: bool,
}

/// Coordinate scanned first at index `t`.
fn scan_start(g: &Graph, t: usize) -> usize {
    match g.kind() {
        GraphKind::Hypercube { n } => t % (n.max(1) as usize),
        GraphKind::Grid { d, side } => (t / side as usize) % d as usize,
        _ => 0,
    }
}

fn thresholds(g: &Graph, len: usize, c: f64) -> Vec<f64> {
    let dim = g.dimension();
    let n_vertices = g.num_vertices() as f64;
    let l = len as f64;
    match g.kind() {
        GraphKind::Hypercube { n } => (0..=n)
            .map(|k| c * n as f64 * (n as f64 + l / 2f64.powi((n - k) as i32)))
            .collect(),
        GraphKind::Grid { d, side } => (0..=d)
            .map(|k| c * n_vertices.ln() * (side as f64 + l / n_vertices.powf(1.0 - k as f64 / d as f64)))
            .collect(),
        _ => vec![c * l; dim + 1],
    }
}

/// Counts `|{t : delta(x_t, v, scan(t)) = k}|` and compares each against
/// its threshold (hypercube: `c n (n + L / 2^(n-k))`; grid:
/// `c ln N (side + L / N^(1 - k/d))`).
pub fn sparseness_check<R: Rng + ?Sized>(
    g: &Graph,
    x: &Snake,
    c: f64,
    mode: SparseMode,
    rng: &mut R,
    budget: &Budget,
) -> Result<SparsenessReport> {
    if g.kind() != x.kind() {
        return Err(Error::ShapeMismatch(format!("snake on {} used with {}", x.kind(), g.kind())));
    }
    if !matches!(g.kind(), GraphKind::Hypercube { .. } | GraphKind::Grid { .. }) {
        return Err(Error::Unsupported("snakes live on hypercubes and grids"));
    }
    let dim = g.dimension();
    let len = x.len();
    let th = thresholds(g, len, c);
    let side = match g.kind() {
        GraphKind::Grid { side, .. } => side as f64,
        _ => 2.0,
    };
    let expected_counts = (0..=dim)
        .map(|k| len as f64 / dim.max(1) as f64 * side.powi(k as i32) / g.num_vertices() as f64)
        .collect();

    let mut worst: Option<(f64, SparsityWitness)> = None;
    let mut consider = |v: Vertex, counts: &[u64]| {
        for (k, &cnt) in counts.iter().enumerate() {
            let ratio = cnt as f64 / th[k];
            if worst.as_ref().is_none_or(|(r, _)| ratio > *r) {
                worst = Some((
                    ratio,
                    SparsityWitness {
                        vertex: v.0,
                        k: k as u32,
                        count: cnt,
                        threshold: th[k],
                    },
                ));
            }
        }
    };

    let (vertices_checked, exact) = match mode {
        SparseMode::Exact => {
            let n_vertices = g.num_vertices();
            budget.check("exact sparseness check", n_vertices as u128 * len as u128)?;
            let stride = dim + 1;
            let mut counts = vec![0u64; n_vertices as usize * stride];
            match g.kind() {
                GraphKind::Hypercube { n } => {
                    let n = n as usize;
                    for (t, &xt) in x.path().iter().enumerate() {
                        let i = scan_start(g, t);
                        counts[xt.index() * stride] += 1;
                        let mut free = 0u64;
                        for k in 1..=n {
                            let top = (i + n - (k - 1)) % n;
                            let base = xt.0 ^ (1 << top);
                            // all subsets of the lower window positions
                            let mut sub = free;
                            loop {
                                counts[(base ^ sub) as usize * stride + k] += 1;
                                if sub == 0 {
                                    break;
                                }
                                sub = (sub - 1) & free;
                            }
                            free |= 1 << top;
                        }
                    }
                }
                _ => {
                    for (t, &xt) in x.path().iter().enumerate() {
                        let i = scan_start(g, t);
                        for v in g.vertices() {
                            counts[v.index() * stride + delta_unchecked(g, xt, v, i) as usize] += 1;
                        }
                    }
                }
            }
            for v in g.vertices() {
                consider(v, &counts[v.index() * stride..(v.index() + 1) * stride]);
            }
            (n_vertices, true)
        }
        SparseMode::Sampled { vertices } => {
            let mut counts = vec![0u64; dim + 1];
            for _ in 0..vertices {
                let v = g.random_vertex(rng);
                counts.iter_mut().for_each(|c| *c = 0);
                for (t, &xt) in x.path().iter().enumerate() {
                    counts[delta_unchecked(g, xt, v, scan_start(g, t)) as usize] += 1;
                }
                consider(v, &counts);
            }
            (vertices, false)
        }
    };

    let worst = worst.map(|(_, w)| w);
    let sparse = worst.as_ref().is_none_or(|w| w.count as f64 <= w.threshold);
    Ok(SparsenessReport {
        sparse,
        c,
        worst,
        expected_counts,
        thresholds: th,
        vertices_checked,
        exact,
    })
}
