//! Non-snake hard instances: the degree staircase and first-hitting-time landscapes.

use std::collections::VecDeque;

use rand::Rng;
use serde_json::json;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::oracle::{Instance, InstanceMeta, Values};

/// Hides the minimum among the neighbors of `v`.
///
/// A uniform neighbor `w` gets value 1, `v` gets 2, the other neighbors 3,
/// and every vertex outside the closed neighborhood `S` of `v` gets
/// `3 + dist(x, S)`. The only local minimum is `w`.
pub fn staircase_instance<R: Rng + ?Sized>(g: &Graph, v: Vertex, rng: &mut R, budget: &Budget) -> Result<Instance> {
    g.validate(v)?;
    budget.check("staircase instance", g.num_vertices() as u128)?;
    let nbrs = g.neighbors(v)?;
    if nbrs.is_empty() {
        return Err(Error::IsolatedVertex(v.0));
    }
    let w = nbrs[rng.gen_range(0..nbrs.len())];

    // multi-source BFS from the closed neighborhood
    let mut dist = vec![u64::MAX; g.num_vertices() as usize];
    let mut queue = VecDeque::new();
    for &s in std::iter::once(&v).chain(&nbrs) {
        dist[s.index()] = 0;
        queue.push_back(s);
    }
    let mut buf = Vec::new();
    while let Some(u) = queue.pop_front() {
        g.neighbors_into(u, &mut buf);
        for &x in &buf {
            if dist[x.index()] == u64::MAX {
                dist[x.index()] = dist[u.index()] + 1;
                queue.push_back(x);
            }
        }
    }

    let mut values: Vec<u64> = dist.iter().map(|&d| 3u64.saturating_add(d)).collect();
    for &u in &nbrs {
        values[u.index()] = 3;
    }
    values[v.index()] = 2;
    values[w.index()] = 1;

    let meta = InstanceMeta::new(
        "staircase",
        json!({ "graph": g.kind(), "center": v.0, "hidden": w.0 }),
        None,
        true,
    );
    Instance::new(g.clone(), Values::Dense(values), Some(w), meta)
}

/// First hitting times of an unbiased walk from a uniform start, run until
/// every vertex has been visited. The start is the unique local minimum.
pub fn hitting_time_instance<R: Rng + ?Sized>(g: &Graph, rng: &mut R, budget: &Budget) -> Result<Instance> {
    let n = g.num_vertices();
    budget.check("hitting-time instance", n as u128)?;
    let start = g.random_vertex(rng);
    let mut values = vec![u64::MAX; n as usize];
    values[start.index()] = 0;
    let mut unvisited = n - 1;
    let mut cur = start;
    let mut step: u64 = 0;
    let mut buf = Vec::new();
    while unvisited > 0 {
        if step >= budget.walk_steps {
            return Err(Error::WalkBudget(budget.walk_steps));
        }
        step += 1;
        cur = g
            .random_neighbor(cur, rng, &mut buf)
            .ok_or(Error::IsolatedVertex(cur.0))?;
        let slot = &mut values[cur.index()];
        if *slot == u64::MAX {
            *slot = step;
            unvisited -= 1;
        }
    }
    let meta = InstanceMeta::new(
        "hitting-time",
        json!({ "graph": g.kind(), "start": start.0, "cover_steps": step }),
        None,
        true,
    );
    Instance::new(g.clone(), Values::Dense(values), Some(start), meta)
}
