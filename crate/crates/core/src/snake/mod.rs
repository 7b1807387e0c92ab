//! Snake distributions on the hypercube and the grid.
//!
//! A snake is a path `x_0 .. x_{L-1}` whose head `x_{L-1} = h` is fixed and
//! whose tail end `x_0` carries the unique minimum of the derived instance.
//! Paths are generated from the head downward:
//!
//! * hypercube: the step from index `t` to `t - 1` flips bit `t mod n` with
//!   probability 1/2 (the coordinate loop);
//! * grid: index `t` belongs to block `t / side`, whose direction is
//!   `block mod d`. Entering a block draws a uniform target for that
//!   coordinate; each step inside the block moves one unit toward the target
//!   and stalls once it is reached.

mod choice;
pub mod flick;
pub mod goodness;
pub mod mixing;
pub mod sparse;

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use choice::{enumerate_outcomes, Chooser, Outcome, RngChooser};
pub use flick::{flick_at, flick_tail, grid_block_state, FlickResult, GridBlockState, TargetSet};
pub use goodness::{goodness_estimate, GoodnessMode, GoodnessReport};
pub use mixing::mixing_check;
pub use sparse::{delta_scan, sparseness_check, SparseMode, SparsenessReport, SparsityWitness};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Vertex};
use crate::oracle::{Instance, InstanceMeta, Values};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Snake {
    kind: GraphKind,
    path: Vec<Vertex>,
}

impl Snake {
    /// Validates that consecutive entries are equal or adjacent.
    pub fn new(g: &Graph, path: Vec<Vertex>) -> Result<Self> {
        if path.is_empty() {
            return Err(Error::Precondition("snake length must be at least 1".into()));
        }
        for &v in &path {
            g.validate(v)?;
        }
        if let Some(t) = path.windows(2).position(|w| g.distance_unchecked(w[0], w[1]) > 1) {
            return Err(Error::Precondition(format!("snake steps {t} -> {} are not adjacent", t + 1)));
        }
        Ok(Self { kind: g.kind(), path })
    }

    pub(crate) fn from_parts(kind: GraphKind, path: Vec<Vertex>) -> Self {
        debug_assert!(!path.is_empty());
        Self { kind, path }
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn path(&self) -> &[Vertex] {
        &self.path
    }

    pub fn head(&self) -> Vertex {
        *self.path.last().expect("nonempty")
    }

    pub fn tail(&self) -> Vertex {
        self.path[0]
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.path.len()
    }

    /// `min { t : x_t = v }` for every vertex on the path.
    pub fn first_hits(&self) -> HashMap<Vertex, usize> {
        let mut m = HashMap::with_capacity(self.path.len());
        for (t, &v) in self.path.iter().enumerate().rev() {
            m.insert(v, t);
        }
        m
    }

    pub fn to_file(&self) -> SnakeFile {
        SnakeFile {
            graph: self.kind,
            head: self.head().0,
            length: self.len(),
            path: self.path.iter().map(|v| v.0).collect(),
        }
    }

    pub fn from_file(file: &SnakeFile) -> Result<Self> {
        let g = Graph::new(file.graph)?;
        let s = Self::new(&g, file.path.iter().map(|&i| Vertex(i)).collect())?;
        if s.len() != file.length || s.head().0 != file.head {
            return Err(Error::ShapeMismatch("snake head or length disagrees with path".into()));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnakeFile {
    pub graph: GraphKind,
    pub head: u64,
    #[serde(rename = "L")]
    pub length: usize,
    pub path: Vec<u64>,
}

/// Regrows the path below `top` (which sits at index `top_index`) with the
/// coordinate loop. Returns `x_0 .. x_{top_index - 1}`.
pub(crate) fn regrow_hypercube<C: Chooser + ?Sized>(n: u32, top: Vertex, top_index: usize, ch: &mut C) -> Vec<Vertex> {
    let mut out = vec![top; top_index];
    let mut cur = top.0;
    for t in (1..=top_index).rev() {
        if n > 0 && ch.choose(2) == 1 {
            cur ^= 1 << (t % n as usize);
        }
        out[t - 1] = Vertex(cur);
    }
    out
}

/// One unit step of coordinate `dir` toward `target`, or a stall.
#[inline]
pub(crate) fn step_toward(g: &Graph, v: Vertex, dir: usize, target: u32) -> Vertex {
    let c = g.grid_coord(v, dir);
    match c.cmp(&target) {
        std::cmp::Ordering::Less => g.with_grid_coord(v, dir, c + 1),
        std::cmp::Ordering::Greater => g.with_grid_coord(v, dir, c - 1),
        std::cmp::Ordering::Equal => v,
    }
}

/// Regrows a grid path below `top` at `top_index`. The block containing
/// `top_index - 1` draws its target from `first`; later blocks draw fresh
/// uniform targets.
pub(crate) fn regrow_grid<C: Chooser + ?Sized>(
    g: &Graph,
    top: Vertex,
    top_index: usize,
    first: TargetSet,
    ch: &mut C,
) -> Vec<Vertex> {
    let (d, side) = match g.kind() {
        GraphKind::Grid { d, side } => (d as usize, side as usize),
        _ => unreachable!("grid regrowth on a non-grid graph"),
    };
    let mut out = vec![top; top_index];
    let mut cur = top;
    let mut target = 0u32;
    for t in (1..=top_index).rev() {
        let landing = t - 1;
        let block = landing / side;
        let dir = block % d;
        if t == top_index {
            target = first.lo + ch.choose(first.hi - first.lo + 1);
        } else if landing % side == side - 1 {
            target = 1 + ch.choose(side as u32);
        }
        cur = step_toward(g, cur, dir, target);
        out[landing] = cur;
    }
    out
}

pub(crate) fn assemble(kind: GraphKind, mut below: Vec<Vertex>, head_part: &[Vertex]) -> Snake {
    below.extend_from_slice(head_part);
    Snake::from_parts(kind, below)
}

pub(crate) fn sample_with<C: Chooser + ?Sized>(g: &Graph, head: Vertex, length: usize, ch: &mut C) -> Result<Snake> {
    g.validate(head)?;
    if length == 0 {
        return Err(Error::Precondition("snake length must be at least 1".into()));
    }
    let below = match g.kind() {
        GraphKind::Hypercube { n } => regrow_hypercube(n, head, length - 1, ch),
        GraphKind::Grid { side, .. } => regrow_grid(g, head, length - 1, TargetSet { lo: 1, hi: side }, ch),
        _ => return Err(Error::Unsupported("snakes live on hypercubes and grids")),
    };
    Ok(assemble(g.kind(), below, &[head]))
}

/// A snake from the coordinate-loop distribution with head `head`.
pub fn sample_hypercube_snake<R: Rng + ?Sized>(g: &Graph, head: Vertex, length: usize, rng: &mut R) -> Result<Snake> {
    if !matches!(g.kind(), GraphKind::Hypercube { .. }) {
        return Err(Error::Unsupported("expected a hypercube"));
    }
    sample_with(g, head, length, &mut RngChooser(rng))
}

/// A snake from the line-segment distribution on a grid with head `head`.
pub fn sample_grid_snake<R: Rng + ?Sized>(g: &Graph, head: Vertex, length: usize, rng: &mut R) -> Result<Snake> {
    if !matches!(g.kind(), GraphKind::Grid { .. }) {
        return Err(Error::Unsupported("expected a grid"));
    }
    sample_with(g, head, length, &mut RngChooser(rng))
}

/// Dispatches on the graph family.
pub fn sample_snake<R: Rng + ?Sized>(g: &Graph, head: Vertex, length: usize, rng: &mut R) -> Result<Snake> {
    sample_with(g, head, length, &mut RngChooser(rng))
}

/// The instance `f_X`: first-hit index on the path, `dist(v, h) + L` off it.
/// The unique local minimum is `x_0`.
pub fn snake_instance(g: &Graph, x: &Snake, budget: &Budget) -> Result<Instance> {
    if g.kind() != x.kind {
        return Err(Error::ShapeMismatch(format!("snake on {} used with {}", x.kind, g.kind())));
    }
    let len = x.len() as u64;
    let head = x.head();
    let listed: HashMap<Vertex, u64> = x.first_hits().into_iter().map(|(v, t)| (v, t as u64)).collect();
    let meta = InstanceMeta::new(
        "snake",
        json!({ "graph": g.kind(), "head": head.0, "L": len }),
        None,
        true,
    );
    let values = if g.num_vertices() <= budget.enumeration_cap {
        Values::Dense(
            g.vertices()
                .map(|v| listed.get(&v).copied().unwrap_or_else(|| g.distance_unchecked(v, head) + len))
                .collect(),
        )
    } else {
        Values::PathRule {
            listed,
            anchor: head,
            offset: len,
        }
    };
    Instance::new(g.clone(), values, Some(x.tail()), meta)
}
