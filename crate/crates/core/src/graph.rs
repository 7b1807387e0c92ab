//! Graph families with canonical vertex encoding.
//!
//! Every vertex is a canonical index in `[0, N)`. Hypercube vertices carry
//! bit `i` at position `i`; grid vertices are mixed-radix integers with
//! coordinate 0 least significant and coordinates 1-based in `{1..side}`.
//! Grids do not wrap at the boundary.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count any family may have.
pub const MAX_VERTICES: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GraphKind {
    Hypercube {
        n: u32,
    },
    Grid {
        d: u32,
        side: u32,
    },
    Line {
        #[serde(rename = "N")]
        size: u64,
    },
    Complete {
        #[serde(rename = "N")]
        size: u64,
    },
}

impl std::fmt::Display for GraphKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphKind::Hypercube { n } => write!(f, "hypercube(n={n})"),
            GraphKind::Grid { d, side } => write!(f, "grid(d={d}, side={side})"),
            GraphKind::Line { size } => write!(f, "line(N={size})"),
            GraphKind::Complete { size } => write!(f, "complete(N={size})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(pub u64);

impl Vertex {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An immutable graph handle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    kind: GraphKind,
    size: u64,
    max_degree: u64,
    /// `side^i` for grids, empty otherwise.
    strides: Vec<u64>,
}

impl Graph {
    pub fn new(kind: GraphKind) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidGraph(msg));
        let (size, max_degree, strides) = match kind {
            GraphKind::Hypercube { n } => {
                if n > 32 {
                    return bad(format!("hypercube n={n} exceeds 2^32 vertices"));
                }
                (1u64 << n, n as u64, Vec::new())
            }
            GraphKind::Grid { d, side } => {
                if d == 0 {
                    return bad("grid dimension must be at least 1".into());
                }
                if side < 2 {
                    return bad(format!("grid side {side} < 2"));
                }
                let mut strides = Vec::with_capacity(d as usize);
                let mut acc: u64 = 1;
                for _ in 0..d {
                    strides.push(acc);
                    acc = match acc.checked_mul(side as u64) {
                        Some(v) if v <= MAX_VERTICES => v,
                        _ => return bad(format!("grid {side}^{d} exceeds 2^32 vertices")),
                    };
                }
                let deg = if side == 2 { d as u64 } else { 2 * d as u64 };
                (acc, deg, strides)
            }
            GraphKind::Line { size } => {
                if size == 0 || size > MAX_VERTICES {
                    return bad(format!("line size {size} outside [1, 2^32]"));
                }
                (size, (size - 1).min(2), Vec::new())
            }
            GraphKind::Complete { size } => {
                if size == 0 || size > MAX_VERTICES {
                    return bad(format!("complete graph size {size} outside [1, 2^32]"));
                }
                (size, size - 1, Vec::new())
            }
        };
        Ok(Self {
            kind,
            size,
            max_degree,
            strides,
        })
    }

    pub fn hypercube(n: u32) -> Result<Self> {
        Self::new(GraphKind::Hypercube { n })
    }

    pub fn grid(d: u32, side: u32) -> Result<Self> {
        Self::new(GraphKind::Grid { d, side })
    }

    pub fn line(size: u64) -> Result<Self> {
        Self::new(GraphKind::Line { size })
    }

    pub fn complete(size: u64) -> Result<Self> {
        Self::new(GraphKind::Complete { size })
    }

    #[inline]
    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    #[inline]
    pub fn num_vertices(&self) -> u64 {
        self.size
    }

    #[inline]
    pub fn max_degree(&self) -> u64 {
        self.max_degree
    }

    /// Number of coordinates: bits for a hypercube, `d` for a grid, 1 otherwise.
    pub fn dimension(&self) -> usize {
        match self.kind {
            GraphKind::Hypercube { n } => n as usize,
            GraphKind::Grid { d, .. } => d as usize,
            _ => 1,
        }
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        v.0 < self.size
    }

    pub fn vertex(&self, index: u64) -> Result<Vertex> {
        let v = Vertex(index);
        self.validate(v)?;
        Ok(v)
    }

    pub fn validate(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                index: v.0,
                size: self.size,
            })
        }
    }

    /// All vertices in canonical order.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..self.size).map(Vertex)
    }

    pub fn neighbors(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.validate(v)?;
        let mut out = Vec::with_capacity(self.max_degree as usize);
        self.neighbors_into(v, &mut out);
        Ok(out)
    }

    /// Writes the neighbors of a valid `v` into `out`, ascending by index.
    pub fn neighbors_into(&self, v: Vertex, out: &mut Vec<Vertex>) {
        out.clear();
        let x = v.0;
        match self.kind {
            GraphKind::Hypercube { n } => {
                for i in (0..n).rev() {
                    if x >> i & 1 == 1 {
                        out.push(Vertex(x ^ (1 << i)));
                    }
                }
                for i in 0..n {
                    if x >> i & 1 == 0 {
                        out.push(Vertex(x ^ (1 << i)));
                    }
                }
            }
            GraphKind::Grid { side, .. } => {
                let side = side as u64;
                for &s in self.strides.iter().rev() {
                    if (x / s) % side > 0 {
                        out.push(Vertex(x - s));
                    }
                }
                for &s in &self.strides {
                    if (x / s) % side < side - 1 {
                        out.push(Vertex(x + s));
                    }
                }
            }
            GraphKind::Line { size } => {
                if x > 0 {
                    out.push(Vertex(x - 1));
                }
                if x + 1 < size {
                    out.push(Vertex(x + 1));
                }
            }
            GraphKind::Complete { size } => {
                out.extend((0..size).filter(|&w| w != x).map(Vertex));
            }
        }
    }

    pub fn degree(&self, v: Vertex) -> u64 {
        match self.kind {
            GraphKind::Hypercube { n } => n as u64,
            GraphKind::Complete { size } => size - 1,
            _ => {
                let mut buf = Vec::new();
                self.neighbors_into(v, &mut buf);
                buf.len() as u64
            }
        }
    }

    pub fn are_adjacent(&self, v: Vertex, w: Vertex) -> bool {
        self.distance_unchecked(v, w) == 1
    }

    pub fn distance(&self, v: Vertex, w: Vertex) -> Result<u64> {
        self.validate(v)?;
        self.validate(w)?;
        Ok(self.distance_unchecked(v, w))
    }

    /// Shortest-path distance between two valid vertices.
    pub fn distance_unchecked(&self, v: Vertex, w: Vertex) -> u64 {
        match self.kind {
            GraphKind::Hypercube { .. } => (v.0 ^ w.0).count_ones() as u64,
            GraphKind::Grid { side, .. } => {
                let side = side as u64;
                self.strides
                    .iter()
                    .map(|&s| ((v.0 / s) % side).abs_diff((w.0 / s) % side))
                    .sum()
            }
            GraphKind::Line { .. } => v.0.abs_diff(w.0),
            GraphKind::Complete { .. } => u64::from(v != w),
        }
    }

    /// Coordinate view: bits for a hypercube, 1-based coordinates for a grid,
    /// the bare index for a line or complete graph.
    pub fn coords(&self, v: Vertex) -> Vec<u32> {
        match self.kind {
            GraphKind::Hypercube { n } => (0..n).map(|i| (v.0 >> i & 1) as u32).collect(),
            GraphKind::Grid { .. } => (0..self.strides.len()).map(|i| self.grid_coord(v, i)).collect(),
            _ => vec![v.0 as u32],
        }
    }

    pub fn from_coords(&self, coords: &[u32]) -> Result<Vertex> {
        let bad = || Error::InvalidGraph(format!("coordinates {coords:?} do not fit {}", self.kind));
        match self.kind {
            GraphKind::Hypercube { n } => {
                if coords.len() != n as usize || coords.iter().any(|&b| b > 1) {
                    return Err(bad());
                }
                Ok(Vertex(
                    coords.iter().enumerate().map(|(i, &b)| (b as u64) << i).sum(),
                ))
            }
            GraphKind::Grid { side, .. } => {
                if coords.len() != self.strides.len() || coords.iter().any(|&c| c == 0 || c > side) {
                    return Err(bad());
                }
                Ok(Vertex(
                    coords
                        .iter()
                        .zip(&self.strides)
                        .map(|(&c, &s)| (c as u64 - 1) * s)
                        .sum(),
                ))
            }
            _ => match coords {
                [i] => self.vertex(*i as u64),
                _ => Err(bad()),
            },
        }
    }

    /// 1-based coordinate `i` of a grid vertex.
    #[inline]
    pub fn grid_coord(&self, v: Vertex, i: usize) -> u32 {
        let side = self.grid_side() as u64;
        ((v.0 / self.strides[i]) % side) as u32 + 1
    }

    /// Grid vertex with coordinate `i` replaced by the 1-based `value`.
    #[inline]
    pub fn with_grid_coord(&self, v: Vertex, i: usize, value: u32) -> Vertex {
        let old = self.grid_coord(v, i) as u64;
        Vertex(v.0 - (old - 1) * self.strides[i] + (value as u64 - 1) * self.strides[i])
    }

    pub fn grid_side(&self) -> u32 {
        match self.kind {
            GraphKind::Grid { side, .. } => side,
            _ => 0,
        }
    }

    pub fn random_vertex<R: Rng + ?Sized>(&self, rng: &mut R) -> Vertex {
        Vertex(rng.gen_range(0..self.size))
    }

    /// Uniform neighbor of `v`; `None` for an isolated vertex.
    pub fn random_neighbor<R: Rng + ?Sized>(&self, v: Vertex, rng: &mut R, buf: &mut Vec<Vertex>) -> Option<Vertex> {
        match self.kind {
            GraphKind::Hypercube { n } if n > 0 => Some(Vertex(v.0 ^ (1 << rng.gen_range(0..n)))),
            GraphKind::Complete { size } if size > 1 => {
                let w = rng.gen_range(0..size - 1);
                Some(Vertex(if w >= v.0 { w + 1 } else { w }))
            }
            _ => {
                self.neighbors_into(v, buf);
                if buf.is_empty() {
                    None
                } else {
                    Some(buf[rng.gen_range(0..buf.len())])
                }
            }
        }
    }
}
