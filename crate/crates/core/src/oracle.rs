//! Value functions, query-counting oracles, and local-minimum checks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Vertex};

/// Where an instance came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub generator: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// The generator guarantees exactly one local minimum, at `minimum`.
    #[serde(default)]
    pub unique_minimum: bool,
}

impl InstanceMeta {
    pub fn new(generator: &str, params: serde_json::Value, seed: Option<u64>, unique_minimum: bool) -> Self {
        let params = match params {
            serde_json::Value::Object(m) => m,
            serde_json::Value::Null => serde_json::Map::new(),
            other => {
                let mut m = serde_json::Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        Self {
            generator: generator.to_owned(),
            params,
            seed,
            unique_minimum,
        }
    }
}

/// A total value function over the vertices of a graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    /// One value per vertex in canonical order.
    Dense(Vec<u64>),
    /// Lazy rule: listed vertices take their listed value, every other vertex
    /// `v` takes `distance(v, anchor) + offset`.
    PathRule {
        listed: HashMap<Vertex, u64>,
        anchor: Vertex,
        offset: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    graph: Graph,
    values: Values,
    minimum: Option<Vertex>,
    answer_bit: Option<u8>,
    meta: InstanceMeta,
}

impl Instance {
    pub fn new(graph: Graph, values: Values, minimum: Option<Vertex>, meta: InstanceMeta) -> Result<Self> {
        match &values {
            Values::Dense(v) if v.len() as u64 != graph.num_vertices() => {
                return Err(Error::ShapeMismatch(format!(
                    "{} values for {} vertices",
                    v.len(),
                    graph.num_vertices()
                )));
            }
            Values::PathRule { listed, anchor, .. } => {
                graph.validate(*anchor)?;
                for v in listed.keys() {
                    graph.validate(*v)?;
                }
            }
            _ => {}
        }
        if let Some(m) = minimum {
            graph.validate(m)?;
        }
        let inst = Self {
            graph,
            values,
            minimum,
            answer_bit: None,
            meta,
        };
        if let Some(m) = minimum {
            if !inst.is_local_min(m) {
                return Err(Error::Precondition(format!("designated minimum {m} is not a local minimum")));
            }
        }
        Ok(inst)
    }

    /// Materializes `f` over every vertex.
    pub fn from_fn(graph: Graph, f: impl Fn(Vertex) -> u64, meta: InstanceMeta, budget: &Budget) -> Result<Self> {
        budget.check("materialized instance", graph.num_vertices() as u128)?;
        let values = graph.vertices().map(f).collect();
        Self::new(graph, Values::Dense(values), None, meta)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn minimum(&self) -> Option<Vertex> {
        self.minimum
    }

    pub fn answer_bit(&self) -> Option<u8> {
        self.answer_bit
    }

    pub fn meta(&self) -> &InstanceMeta {
        &self.meta
    }

    /// `f(v)` for a valid vertex.
    #[inline]
    pub fn value(&self, v: Vertex) -> u64 {
        match &self.values {
            Values::Dense(vals) => vals[v.index()],
            Values::PathRule { listed, anchor, offset } => match listed.get(&v) {
                Some(&x) => x,
                None => self.graph.distance_unchecked(v, *anchor) + offset,
            },
        }
    }

    pub fn is_local_min(&self, v: Vertex) -> bool {
        is_local_min(&self.graph, |w| self.value(w), v)
    }

    pub fn brute_force_minima(&self, budget: &Budget) -> Result<Vec<Vertex>> {
        brute_force_minima(&self.graph, |w| self.value(w), budget)
    }

    pub fn materialize(&self, budget: &Budget) -> Result<Vec<u64>> {
        match &self.values {
            Values::Dense(v) => Ok(v.clone()),
            Values::PathRule { .. } => {
                budget.check("materialized instance", self.graph.num_vertices() as u128)?;
                Ok(self.graph.vertices().map(|v| self.value(v)).collect())
            }
        }
    }

    pub fn to_file(&self, budget: &Budget) -> Result<InstanceFile> {
        Ok(InstanceFile {
            graph: self.graph.kind(),
            values: self.materialize(budget)?,
            minimum: self.minimum.map(|v| v.0),
            answer_bit: self.answer_bit,
            meta: self.meta.clone(),
        })
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        let graph = Graph::new(file.graph)?;
        let minimum = file.minimum.map(|m| graph.vertex(m)).transpose()?;
        let mut inst = Self::new(graph, Values::Dense(file.values), minimum, file.meta)?;
        if let Some(bit) = file.answer_bit {
            inst = decision_wrap(&inst, bit)?;
        }
        Ok(inst)
    }
}

/// On-disk instance format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub graph: GraphKind,
    pub values: Vec<u64>,
    pub minimum: Option<u64>,
    pub answer_bit: Option<u8>,
    pub meta: InstanceMeta,
}

/// Attaches an answer bit that is revealed when the designated minimum is queried.
pub fn decision_wrap(inst: &Instance, bit: u8) -> Result<Instance> {
    if bit > 1 {
        return Err(Error::Precondition(format!("answer bit must be 0 or 1, got {bit}")));
    }
    if inst.minimum.is_none() {
        return Err(Error::NoDesignatedMinimum);
    }
    let mut out = inst.clone();
    out.answer_bit = Some(bit);
    Ok(out)
}

/// `f(v) <= f(w)` for every neighbor `w`.
pub fn is_local_min(g: &Graph, f: impl Fn(Vertex) -> u64, v: Vertex) -> bool {
    let fv = f(v);
    let mut buf = Vec::with_capacity(g.max_degree() as usize);
    g.neighbors_into(v, &mut buf);
    buf.iter().all(|&w| fv <= f(w))
}

/// Every local minimum, by full scan.
pub fn brute_force_minima(g: &Graph, f: impl Fn(Vertex) -> u64, budget: &Budget) -> Result<Vec<Vertex>> {
    budget.check("brute-force scan", g.num_vertices() as u128)?;
    let mut buf = Vec::with_capacity(g.max_degree() as usize);
    let mut out = Vec::new();
    for v in g.vertices() {
        let fv = f(v);
        g.neighbors_into(v, &mut buf);
        if buf.iter().all(|&w| fv <= f(w)) {
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryAnswer {
    pub value: u64,
    pub bit: Option<u8>,
}

/// Counts and logs every evaluation of an instance.
#[derive(Debug)]
pub struct QueryOracle<'a> {
    instance: &'a Instance,
    log: Vec<(Vertex, u64)>,
}

impl<'a> QueryOracle<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Self {
            instance,
            log: Vec::new(),
        }
    }

    pub fn query(&mut self, v: Vertex) -> Result<QueryAnswer> {
        self.instance.graph.validate(v)?;
        let value = self.instance.value(v);
        self.log.push((v, value));
        let bit = match self.instance.minimum {
            Some(m) if m == v => self.instance.answer_bit,
            _ => None,
        };
        Ok(QueryAnswer { value, bit })
    }

    pub fn count(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn log(&self) -> &[(Vertex, u64)] {
        &self.log
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn graph(&self) -> &'a Graph {
        &self.instance.graph
    }
}
