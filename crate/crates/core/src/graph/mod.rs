//! Edge-colored complete digraphs, the tuple calculus on `V^k`, atomic
//! types, and brute-force oracles.
//!
//! Every ordered pair of vertices carries a color. Loop colors (on `(u,u)`)
//! and pair colors (on `(u,v)`, `u != v`) are disjoint sets, so the color
//! of a pair also records whether its endpoints coincide. Color ids are
//! assigned by sorting color names, which makes them comparable across
//! graphs that use the same names.

mod io;
mod oracle;
mod tuple;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

pub use io::{load_graph, save_graph, GraphFile};
pub use oracle::{automorphism_mapping, automorphisms, brute_force_orbits, color_isomorphic, ORBIT_ORACLE_LIMIT};
pub use tuple::{extract, index_tuples, project, substitute, TupleIndex};

use crate::partition::LabelledPartition;

pub type Vertex = usize;
pub type ColorId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("malformed graph JSON: {0}")]
    Json(String),
    #[error("duplicate vertex name {0:?}")]
    DuplicateVertex(String),
    #[error("unknown vertex name {0:?}")]
    UnknownVertex(String),
    #[error("conflicting colors for pair ({0}, {1}): {2:?} vs {3:?}")]
    ConflictingEdge(String, String, String, String),
    #[error("conflicting loop colors for {0}: {1:?} vs {2:?}")]
    ConflictingLoop(String, String, String),
    #[error("edge entry {0:?} must be [u, v] or [u, v, color]")]
    BadEdgeEntry(Vec<String>),
    #[error("loop entry {0:?} must be [v, color]")]
    BadLoopEntry(Vec<String>),
    #[error("self-pair ({0}, {0}) listed as an edge; use \"loops\"")]
    LoopAsEdge(String),
    #[error("color {0:?} is used both on loops and on pairs of distinct vertices")]
    LoopColorOverlap(String),
    #[error("graph has no vertices")]
    Empty,
    #[error("repeated position {0} in index tuple")]
    RepeatedIndex(usize),
    #[error("position {pos} out of range for width {k}")]
    IndexOutOfRange { pos: usize, k: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("projection width {t} outside 1..={k}")]
    ProjectionRange { t: usize, k: usize },
    #[error("{n}^{k} tuples exceed the addressable range")]
    TooManyTuples { n: usize, k: usize },
    #[error("orbit oracle refuses graphs with {n} > {limit} vertices")]
    OracleLimit { n: usize, limit: usize },
}

/// Complete edge-colored digraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    n: usize,
    names: Vec<String>,
    colors: Vec<ColorId>,
    color_names: Vec<String>,
    loop_color_flags: Vec<bool>,
    default_color: String,
    loop_color: String,
}

impl ColoredGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_name(&self, v: Vertex) -> &str {
        &self.names[v]
    }

    pub fn vertex_id(&self, name: &str) -> Option<Vertex> {
        self.names.iter().position(|x| x == name)
    }

    #[inline]
    pub fn color(&self, u: Vertex, v: Vertex) -> ColorId {
        self.colors[u * self.n + v]
    }

    pub fn color_names(&self) -> &[String] {
        &self.color_names
    }

    pub fn color_name(&self, c: ColorId) -> &str {
        &self.color_names[c as usize]
    }

    pub fn color_id(&self, name: &str) -> Option<ColorId> {
        self.color_names.binary_search_by(|x| x.as_str().cmp(name)).ok().map(|i| i as ColorId)
    }

    pub fn num_colors(&self) -> usize {
        self.color_names.len()
    }

    pub fn is_loop_color(&self, c: ColorId) -> bool {
        self.loop_color_flags[c as usize]
    }

    /// Name used for pairs not mentioned in the input file.
    pub fn default_color(&self) -> &str {
        &self.default_color
    }

    /// Name used for loops not mentioned in the input file.
    pub fn loop_color(&self) -> &str {
        &self.loop_color
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|u| (0..u).all(|v| self.color(u, v) == self.color(v, u)))
    }

    /// Sorted `(out color, in color)` pairs over all other vertices.
    pub fn color_profile(&self, u: Vertex) -> Vec<(ColorId, ColorId)> {
        let mut p: Vec<_> = (0..self.n).filter(|&w| w != u).map(|w| (self.color(u, w), self.color(w, u))).collect();
        p.sort_unstable();
        p
    }

    /// Builds a graph from vertex names and a color-name function on ordered pairs.
    pub fn from_fn(
        names: Vec<String>,
        default_color: &str,
        loop_color: &str,
        color: impl Fn(Vertex, Vertex) -> String,
    ) -> Result<Self, GraphError> {
        let n = names.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(GraphError::DuplicateVertex(name.clone()));
            }
        }
        let raw: Vec<String> = (0..n * n).map(|i| color(i / n, i % n)).collect();
        let mut loop_names = BTreeSet::new();
        let mut pair_names = BTreeSet::new();
        for (i, c) in raw.iter().enumerate() {
            if i / n == i % n {
                loop_names.insert(c.as_str());
            } else {
                pair_names.insert(c.as_str());
            }
        }
        if let Some(c) = loop_names.intersection(&pair_names).next() {
            return Err(GraphError::LoopColorOverlap(c.to_string()));
        }
        let color_names: Vec<String> = loop_names.union(&pair_names).map(|s| s.to_string()).collect();
        let ids: HashMap<&str, ColorId> =
            color_names.iter().enumerate().map(|(i, s)| (s.as_str(), i as ColorId)).collect();
        let loop_color_flags = color_names.iter().map(|s| loop_names.contains(s.as_str())).collect();
        let colors = raw.iter().map(|c| ids[c.as_str()]).collect();
        Ok(ColoredGraph {
            n,
            names,
            colors,
            color_names,
            loop_color_flags,
            default_color: default_color.to_string(),
            loop_color: loop_color.to_string(),
        })
    }

    /// Plain undirected graph with the default color names.
    pub fn undirected(names: &[&str], edges: &[(&str, &str)]) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new("non-edge", "vertex");
        for v in names {
            b.add_vertex(v)?;
        }
        for (u, v) in edges {
            b.add_edge(u, v, "edge", true)?;
        }
        b.build()
    }

    /// The same graph with vertices renamed and reordered: new vertex `i` is old vertex `perm[i]`.
    pub fn permuted(&self, perm: &[Vertex]) -> Result<Self, GraphError> {
        let names = perm.iter().map(|&p| self.names[p].clone()).collect();
        ColoredGraph::from_fn(names, &self.default_color, &self.loop_color, |u, v| {
            self.color_name(self.color(perm[u], perm[v])).to_string()
        })
    }

    /// Disjoint union; vertex `v` of copy `i` is named `"{i}/{name}"`, and
    /// pairs across copies get the first graph's default color.
    pub fn disjoint_union(graphs: &[ColoredGraph]) -> Result<Self, GraphError> {
        let first = graphs.first().ok_or(GraphError::Empty)?;
        let mut names = Vec::new();
        let mut owner = Vec::new();
        for (i, g) in graphs.iter().enumerate() {
            for (v, name) in g.names.iter().enumerate() {
                names.push(format!("{i}/{name}"));
                owner.push((i, v));
            }
        }
        let cross = first.default_color.clone();
        ColoredGraph::from_fn(names, &first.default_color, &first.loop_color, |a, b| {
            let ((ga, va), (gb, vb)) = (owner[a], owner[b]);
            if ga == gb {
                graphs[ga].color_name(graphs[ga].color(va, vb)).to_string()
            } else {
                cross.clone()
            }
        })
    }

    /// Labels tuples for human-readable output.
    pub fn tuple_names(&self, t: &[Vertex]) -> Vec<String> {
        t.iter().map(|&v| self.names[v].clone()).collect()
    }

    pub fn parse_tuple(&self, names: &[String]) -> Result<Vec<Vertex>, GraphError> {
        names.iter().map(|s| self.vertex_id(s).ok_or_else(|| GraphError::UnknownVertex(s.clone()))).collect()
    }
}

/// Incremental construction with conflict detection.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, Vertex>,
    pairs: HashMap<(Vertex, Vertex), String>,
    loops: HashMap<Vertex, String>,
    default_color: String,
    loop_color: String,
}

impl GraphBuilder {
    pub fn new(default_color: &str, loop_color: &str) -> Self {
        GraphBuilder {
            names: Vec::new(),
            index: HashMap::new(),
            pairs: HashMap::new(),
            loops: HashMap::new(),
            default_color: default_color.to_string(),
            loop_color: loop_color.to_string(),
        }
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<Vertex, GraphError> {
        if self.index.contains_key(name) {
            return Err(GraphError::DuplicateVertex(name.to_string()));
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn vertex(&self, name: &str) -> Result<Vertex, GraphError> {
        self.index.get(name).copied().ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    fn set_pair(&mut self, u: Vertex, v: Vertex, color: &str) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::LoopAsEdge(self.names[u].clone()));
        }
        match self.pairs.get(&(u, v)) {
            Some(old) if old != color => Err(GraphError::ConflictingEdge(
                self.names[u].clone(),
                self.names[v].clone(),
                old.clone(),
                color.to_string(),
            )),
            _ => {
                self.pairs.insert((u, v), color.to_string());
                Ok(())
            }
        }
    }

    pub fn add_edge(&mut self, u: &str, v: &str, color: &str, undirected: bool) -> Result<(), GraphError> {
        let (a, b) = (self.vertex(u)?, self.vertex(v)?);
        self.set_pair(a, b, color)?;
        if undirected {
            self.set_pair(b, a, color)?;
        }
        Ok(())
    }

    pub fn add_edge_ids(&mut self, u: Vertex, v: Vertex, color: &str, undirected: bool) -> Result<(), GraphError> {
        self.set_pair(u, v, color)?;
        if undirected {
            self.set_pair(v, u, color)?;
        }
        Ok(())
    }

    pub fn set_loop(&mut self, v: &str, color: &str) -> Result<(), GraphError> {
        let a = self.vertex(v)?;
        self.set_loop_id(a, color)
    }

    pub fn set_loop_id(&mut self, a: Vertex, color: &str) -> Result<(), GraphError> {
        match self.loops.get(&a) {
            Some(old) if old != color => {
                Err(GraphError::ConflictingLoop(self.names[a].clone(), old.clone(), color.to_string()))
            }
            _ => {
                self.loops.insert(a, color.to_string());
                Ok(())
            }
        }
    }

    pub fn build(self) -> Result<ColoredGraph, GraphError> {
        let GraphBuilder { names, pairs, loops, default_color, loop_color, .. } = self;
        ColoredGraph::from_fn(names, &default_color, &loop_color, |u, v| {
            if u == v {
                loops.get(&u).cloned().unwrap_or_else(|| loop_color.clone())
            } else {
                pairs.get(&(u, v)).cloned().unwrap_or_else(|| default_color.clone())
            }
        })
    }
}

/// Atomic-type key of a tuple: the `k x k` matrix of pair colors.
pub fn atomic_type_key(g: &ColoredGraph, t: &[Vertex]) -> Vec<ColorId> {
    let mut key = Vec::with_capacity(t.len() * t.len());
    for &a in t {
        for &b in t {
            key.push(g.color(a, b));
        }
    }
    key
}

/// Partition of `V^k` into atomic types. Labels are the ranks of the
/// realized color matrices in sorted order, so isomorphic graphs get the
/// same labels.
pub fn atomic_type_partition(g: &ColoredGraph, k: usize) -> Result<LabelledPartition, GraphError> {
    let idx = TupleIndex::new(g.n(), k)?;
    let mut t = vec![0; k];
    let keys: Vec<Vec<ColorId>> = (0..idx.size())
        .map(|r| {
            idx.unrank_into(r, &mut t);
            atomic_type_key(g, &t)
        })
        .collect();
    Ok(LabelledPartition::from_sorted_keys(k, g.n(), &keys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> ColoredGraph {
        ColoredGraph::undirected(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    #[test]
    fn loop_and_pair_colors_are_disjoint() {
        let mut b = GraphBuilder::new("non-edge", "vertex");
        b.add_vertex("a").unwrap();
        b.add_vertex("b").unwrap();
        b.add_edge("a", "b", "vertex", true).unwrap();
        assert!(matches!(b.build(), Err(GraphError::LoopColorOverlap(_))));
    }

    #[test]
    fn color_ids_follow_name_order() {
        let g = path();
        assert_eq!(g.color_names(), &["edge", "non-edge", "vertex"]);
        assert!(g.is_loop_color(g.color_id("vertex").unwrap()));
        assert!(!g.is_loop_color(g.color_id("edge").unwrap()));
    }

    #[test]
    fn atomic_types_of_path_pairs() {
        let g = path();
        let p = atomic_type_partition(&g, 2).unwrap();
        assert_eq!(p.num_classes(), 3);
        let idx = TupleIndex::new(3, 2).unwrap();
        let c = |a: usize, b: usize| p.color(idx.rank(&[a, b]));
        assert_eq!(c(0, 0), c(1, 1));
        assert_eq!(c(0, 0), c(2, 2));
        assert_eq!(c(0, 1), c(1, 0));
        assert_eq!(c(0, 1), c(2, 1));
        assert_eq!(c(0, 2), c(2, 0));
        assert_ne!(c(0, 1), c(0, 2));
        assert_ne!(c(0, 0), c(0, 1));
    }

    #[test]
    fn atomic_types_width_one_plain_graph() {
        let p = atomic_type_partition(&path(), 1).unwrap();
        assert_eq!(p.num_classes(), 1);
    }

    #[test]
    fn atomic_type_labels_are_canonical() {
        let g = path();
        let h = g.permuted(&[2, 0, 1]).unwrap();
        let pg = atomic_type_partition(&g, 2).unwrap();
        let ph = atomic_type_partition(&h, 2).unwrap();
        let mut a: Vec<_> = pg.colors().to_vec();
        let mut b: Vec<_> = ph.colors().to_vec();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn union_shares_loop_colors() {
        let g = path();
        let u = ColoredGraph::disjoint_union(&[g.clone(), g]).unwrap();
        assert_eq!(u.n(), 6);
        assert_eq!(u.color_name(u.color(0, 3)), "non-edge");
        assert_eq!(u.color(0, 0), u.color(3, 3));
        assert_eq!(u.vertex_name(4), "1/b");
    }
}
