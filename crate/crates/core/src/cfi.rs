//! Generalized Cai-Fürer-Immerman graphs over `Z_p`.
//!
//! Base vertex `v` becomes the gadget vertices `(v, f)` for every
//! `f: E(v) -> Z_p` with zero sum; each oriented base edge `e` gets port
//! vertices `(e, end, a)`. A gadget vertex is joined to the port of each
//! incident edge end carrying its value, and the two port sets of an edge
//! are matched by `a + b = twist(e)`. Directed `succ` arcs `a -> a + 1`
//! fix the cyclic order of every port set, so that negating all values
//! (which sends twist `t` to `-t`) is not an isomorphism when `p > 2`.
//! Loop colors record the base vertex or edge end each vertex came from.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::is_prime;
use crate::graph::{ColoredGraph, GraphBuilder, GraphError, GraphFile};

pub const DEFAULT_COLOR: &str = "none";
pub const PORT_COLOR: &str = "port";
pub const LINK_COLOR: &str = "link";
pub const SUCC_COLOR: &str = "succ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfiError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("base graph is not connected")]
    Disconnected,
    #[error("base graph has no vertices")]
    EmptyBase,
    #[error("base edge {0:?} is a loop")]
    LoopEdge(String),
    #[error("unknown base vertex {0:?}")]
    UnknownVertex(String),
    #[error("bad base edge entry {0:?}")]
    BadEdge(Vec<String>),
    #[error("{got} twists for {edges} base edges")]
    TwistCount { got: usize, edges: usize },
    #[error("bad twist specification {0:?}")]
    BadTwist(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An undirected multigraph whose edges keep the orientation they were
/// listed with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseGraph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
}

impl BaseGraph {
    pub fn new(vertices: &[&str], edges: &[(&str, &str)]) -> Result<Self, CfiError> {
        let vertices: Vec<String> = vertices.iter().map(|s| s.to_string()).collect();
        let find =
            |name: &str| vertices.iter().position(|v| v == name).ok_or_else(|| CfiError::UnknownVertex(name.into()));
        let mut out = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            let (a, b) = (find(u)?, find(v)?);
            if a == b {
                return Err(CfiError::LoopEdge(u.to_string()));
            }
            out.push((a, b));
        }
        Ok(BaseGraph { vertices, edges: out })
    }

    /// Reads the vertex list and edge list of a graph file, keeping
    /// repeated edges as parallel edges. Edge colors are ignored.
    pub fn from_file(file: &GraphFile) -> Result<Self, CfiError> {
        let mut pairs = Vec::with_capacity(file.edges.len());
        for e in &file.edges {
            match e.as_slice() {
                [u, v] | [u, v, _] => pairs.push((u.as_str(), v.as_str())),
                _ => return Err(CfiError::BadEdge(e.clone())),
            }
        }
        let names: Vec<&str> = file.vertices.iter().map(String::as_str).collect();
        BaseGraph::new(&names, &pairs)
    }

    pub fn load(text: &str) -> Result<Self, CfiError> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        BaseGraph::from_file(&file)
    }

    /// Undirected simple triangle `a, b, c`.
    pub fn triangle() -> Self {
        BaseGraph::new(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")]).expect("valid base")
    }

    /// Two vertices joined by three parallel edges.
    pub fn theta() -> Self {
        BaseGraph::new(&["a", "b"], &[("a", "b"), ("a", "b"), ("a", "b")]).expect("valid base")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Parses `"e0:1,e2:3"` (edge index `i` as `e<i>` or `i`) into a twist
    /// vector, unlisted edges getting 0.
    pub fn parse_twists(&self, spec: &str, p: u64) -> Result<Vec<u64>, CfiError> {
        let mut twists = vec![0; self.edges.len()];
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || CfiError::BadTwist(item.to_string());
            let (e, t) = item.split_once(':').ok_or_else(bad)?;
            let e: usize = e.trim().trim_start_matches('e').parse().map_err(|_| bad())?;
            let t: i64 = t.trim().parse().map_err(|_| bad())?;
            if e >= twists.len() {
                return Err(bad());
            }
            twists[e] = t.rem_euclid(p as i64) as u64;
        }
        Ok(twists)
    }
}

/// A base graph, a prime and a twist per base edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfiSpec {
    pub base: BaseGraph,
    pub p: u64,
    pub twists: Vec<u64>,
}

impl CfiSpec {
    pub fn new(base: BaseGraph, p: u64, twists: Vec<u64>) -> Result<Self, CfiError> {
        if !is_prime(p) {
            return Err(CfiError::NotPrime(p));
        }
        if base.vertices.is_empty() {
            return Err(CfiError::EmptyBase);
        }
        if !base.is_connected() {
            return Err(CfiError::Disconnected);
        }
        if twists.len() != base.edges.len() {
            return Err(CfiError::TwistCount { got: twists.len(), edges: base.edges.len() });
        }
        let twists = twists.into_iter().map(|t| t % p).collect();
        Ok(CfiSpec { base, p, twists })
    }

    /// Twist `total` on the first edge and 0 elsewhere.
    pub fn with_total_twist(base: BaseGraph, p: u64, total: u64) -> Result<Self, CfiError> {
        let mut twists = vec![0; base.edges.len()];
        if let Some(t) = twists.first_mut() {
            *t = total % p;
        }
        CfiSpec::new(base, p, twists)
    }

    pub fn total_twist(&self) -> u64 {
        self.twists.iter().sum::<u64>() % self.p
    }
}

/// Every zero-sum assignment of `Z_p` values to `d` slots, in
/// lexicographic order.
fn zero_sum_assignments(d: usize, p: u64) -> Vec<Vec<u64>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut cur = vec![0u64; d - 1];
    loop {
        let s: u64 = cur.iter().sum::<u64>() % p;
        let mut f = cur.clone();
        f.push((p - s) % p);
        out.push(f);
        let mut i = d - 1;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < p {
                break;
            }
            cur[i] = 0;
        }
    }
}

fn port_name(e: usize, end: usize, a: u64) -> String {
    format!("e{e}.{end}={a}")
}

pub fn cfi_build(spec: &CfiSpec) -> Result<ColoredGraph, CfiError> {
    let CfiSpec { base, p, twists } = spec;
    let p = *p;
    let mut b = GraphBuilder::new(DEFAULT_COLOR, "unused");
    for (e, _) in base.edges.iter().enumerate() {
        for end in 0..2 {
            for a in 0..p {
                let id = b.add_vertex(&port_name(e, end, a))?;
                b.set_loop_id(id, &format!("end:e{e}.{end}"))?;
            }
        }
    }
    for (v, vname) in base.vertices.iter().enumerate() {
        // Incident (edge, end) slots in edge order.
        let slots: Vec<(usize, usize)> = base
            .edges
            .iter()
            .enumerate()
            .flat_map(|(e, &(x, y))| [(x == v).then_some((e, 0)), (y == v).then_some((e, 1))])
            .flatten()
            .collect();
        for f in zero_sum_assignments(slots.len(), p) {
            let label: Vec<String> = f.iter().map(u64::to_string).collect();
            let id = b.add_vertex(&format!("{vname}[{}]", label.join(",")))?;
            b.set_loop_id(id, &format!("gadget:{vname}"))?;
            for (&(e, end), &a) in slots.iter().zip(&f) {
                b.add_edge(&format!("{vname}[{}]", label.join(",")), &port_name(e, end, a), PORT_COLOR, true)?;
            }
        }
    }
    for (e, t) in twists.iter().enumerate() {
        for a in 0..p {
            let c = (t + p - a) % p;
            b.add_edge(&port_name(e, 0, a), &port_name(e, 1, c), LINK_COLOR, true)?;
            if p > 1 {
                for end in 0..2 {
                    b.add_edge(&port_name(e, end, a), &port_name(e, end, (a + 1) % p), SUCC_COLOR, false)?;
                }
            }
        }
    }
    Ok(b.build()?)
}

/// The copies with total twist `0..p` and their disjoint union, whose
/// vertices are named `<copy>/<name>`.
#[derive(Debug, Clone)]
pub struct CfiFamily {
    pub copies: Vec<ColoredGraph>,
    pub union: ColoredGraph,
}

pub fn cfi_family(base: &BaseGraph, p: u64) -> Result<CfiFamily, CfiError> {
    let copies =
        (0..p).map(|j| cfi_build(&CfiSpec::with_total_twist(base.clone(), p, j)?)).collect::<Result<Vec<_>, _>>()?;
    let union = ColoredGraph::disjoint_union(&copies)?;
    Ok(CfiFamily { copies, union })
}
