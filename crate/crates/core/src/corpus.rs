//! A fixed collection of small named graphs used by the test harness and
//! the `compare` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{ColoredGraph, GraphBuilder, GraphError};

#[derive(Debug, Clone)]
pub struct CorpusGraph {
    pub name: String,
    pub graph: ColoredGraph,
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

fn simple(n: usize, edges: &[(usize, usize)]) -> ColoredGraph {
    let names = names(n);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let e: Vec<(&str, &str)> = edges.iter().map(|&(u, v)| (refs[u], refs[v])).collect();
    ColoredGraph::undirected(&refs, &e).expect("corpus graph is well formed")
}

fn cycle(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

fn path(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (i - 1, i)).collect()
}

fn complete(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

fn directed(n: usize, arcs: &[(usize, usize)]) -> ColoredGraph {
    let names = names(n);
    let mut b = GraphBuilder::new("non-edge", "vertex");
    for v in &names {
        b.add_vertex(v).expect("fresh name");
    }
    for &(u, v) in arcs {
        b.add_edge_ids(u, v, "arc", false).expect("distinct arcs");
        b.add_edge_ids(v, u, "back", false).expect("distinct arcs");
    }
    b.build().expect("corpus graph is well formed")
}

/// Undirected graph with one vertex given a distinct loop color.
fn marked(n: usize, edges: &[(usize, usize)], v: usize, color: &str) -> ColoredGraph {
    let mut b = GraphBuilder::new("non-edge", "vertex");
    for name in names(n) {
        b.add_vertex(&name).expect("fresh name");
    }
    for &(u, w) in edges {
        b.add_edge_ids(u, w, "edge", true).expect("distinct edges");
    }
    b.set_loop_id(v, color).expect("one loop color per vertex");
    b.build().expect("corpus graph is well formed")
}

/// Undirected graph on `n` vertices with each edge present with probability
/// one half, drawn from a ChaCha stream seeded by `seed`.
pub fn seeded_random(n: usize, seed: u64) -> Result<ColoredGraph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = complete(n).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    let names = names(n);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let e: Vec<(&str, &str)> = edges.iter().map(|&(u, v)| (refs[u], refs[v])).collect();
    ColoredGraph::undirected(&refs, &e)
}

/// The corpus, in a fixed order. Every graph has between 2 and 6 vertices.
pub fn corpus() -> Vec<CorpusGraph> {
    let mut out: Vec<(String, ColoredGraph)> = vec![
        ("k2".into(), simple(2, &[(0, 1)])),
        ("empty2".into(), simple(2, &[])),
        ("p3".into(), simple(3, &path(3))),
        ("k3".into(), simple(3, &complete(3))),
        ("k1+k2".into(), simple(3, &[(1, 2)])),
        ("p4".into(), simple(4, &path(4))),
        ("c4".into(), simple(4, &cycle(4))),
        ("star3".into(), simple(4, &[(0, 1), (0, 2), (0, 3)])),
        ("paw".into(), simple(4, &[(0, 1), (1, 2), (2, 0), (2, 3)])),
        ("diamond".into(), simple(4, &[(0, 1), (1, 2), (2, 0), (1, 3), (2, 3)])),
        ("k4".into(), simple(4, &complete(4))),
        ("2k2".into(), simple(4, &[(0, 1), (2, 3)])),
        ("p5".into(), simple(5, &path(5))),
        ("c5".into(), simple(5, &cycle(5))),
        ("bull".into(), simple(5, &[(0, 1), (1, 2), (2, 0), (1, 3), (2, 4)])),
        ("house".into(), simple(5, &[(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (3, 4)])),
        ("k23".into(), simple(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)])),
        ("dir-p3".into(), directed(3, &path(3))),
        ("dir-c3".into(), directed(3, &cycle(3))),
        ("marked-c4".into(), marked(4, &cycle(4), 0, "red")),
        ("c6".into(), simple(6, &cycle(6))),
        ("2k3".into(), simple(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])),
        ("prism".into(), simple(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)])),
        ("k33".into(), simple(6, &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)])),
    ];
    for (n, seed) in [(4, 1), (5, 2), (5, 3), (6, 4)] {
        out.push((format!("random{n}-s{seed}"), seeded_random(n, seed).expect("random graph is well formed")));
    }
    out.into_iter().map(|(name, graph)| CorpusGraph { name, graph }).collect()
}

/// Looks up a corpus graph by name.
pub fn corpus_graph(name: &str) -> Option<ColoredGraph> {
    corpus().into_iter().find(|c| c.name == name).map(|c| c.graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_large_and_small() {
        let c = corpus();
        assert!(c.len() >= 20);
        assert!(c.iter().all(|g| (2..=6).contains(&g.graph.n())));
        assert!(c.iter().filter(|g| g.graph.n() <= 5).count() >= 15);
        let mut names: Vec<&str> = c.iter().map(|g| g.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), c.len());
    }

    #[test]
    fn seeded_graphs_are_reproducible() {
        assert_eq!(seeded_random(6, 9).unwrap(), seeded_random(6, 9).unwrap());
    }

    #[test]
    fn marked_cycle_keeps_its_mark() {
        let g = corpus_graph("marked-c4").unwrap();
        assert_eq!(g.color_name(g.color(0, 0)), "red");
        assert_eq!(g.color_name(g.color(0, 1)), "edge");
        assert!(g.is_symmetric());
    }
}
