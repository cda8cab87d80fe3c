//! Exhaustive reference computations: automorphism groups, orbit
//! partitions and color-preserving isomorphism. These are oracles for
//! small inputs, not scalable algorithms.

use std::collections::HashMap;

use super::{ColoredGraph, GraphError, TupleIndex, Vertex};
use crate::partition::LabelledPartition;

/// Default vertex limit for [`brute_force_orbits`].
pub const ORBIT_ORACLE_LIMIT: usize = 8;

/// Every color-preserving permutation of `g`, as image vectors.
pub fn automorphisms(g: &ColoredGraph) -> Vec<Vec<Vertex>> {
    let n = g.n();
    let profiles: Vec<_> = (0..n).map(|u| (g.color(u, u), g.color_profile(u))).collect();
    let mut order: Vec<Vertex> = (0..n).collect();
    order.sort_by(|&a, &b| profiles[a].cmp(&profiles[b]).then(a.cmp(&b)));
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut out = Vec::new();
    extend(g, g, &order, 0, &mut image, &mut used, &|u, w| profiles[u] == profiles[w], &mut |m| {
        out.push(m.to_vec());
        true
    });
    out
}

/// Backtracking over `order`; `compatible(u, w)` prefilters candidate
/// images. `found` returns whether to continue searching.
#[allow(clippy::too_many_arguments)]
fn extend(
    g: &ColoredGraph,
    h: &ColoredGraph,
    order: &[Vertex],
    depth: usize,
    image: &mut [Vertex],
    used: &mut [bool],
    compatible: &dyn Fn(Vertex, Vertex) -> bool,
    found: &mut dyn FnMut(&[Vertex]) -> bool,
) -> bool {
    if depth == order.len() {
        return found(image);
    }
    let u = order[depth];
    for w in 0..h.n() {
        if used[w] || !compatible(u, w) || g.color(u, u) != h.color(w, w) {
            continue;
        }
        let consistent = order[..depth].iter().all(|&a| {
            let b = image[a];
            g.color(u, a) == h.color(w, b) && g.color(a, u) == h.color(b, w)
        });
        if !consistent {
            continue;
        }
        image[u] = w;
        used[w] = true;
        let go_on = extend(g, h, order, depth + 1, image, used, compatible, found);
        used[w] = false;
        image[u] = usize::MAX;
        if !go_on {
            return false;
        }
    }
    true
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Orbits of `Aut(g)` acting diagonally on `V^k`, labelled by first
/// occurrence in rank order. Refuses graphs above `limit` vertices
/// (default [`ORBIT_ORACLE_LIMIT`]).
pub fn brute_force_orbits(g: &ColoredGraph, k: usize, limit: Option<usize>) -> Result<LabelledPartition, GraphError> {
    let limit = limit.unwrap_or(ORBIT_ORACLE_LIMIT);
    if g.n() > limit {
        return Err(GraphError::OracleLimit { n: g.n(), limit });
    }
    let idx = TupleIndex::new(g.n(), k)?;
    let mut uf = UnionFind((0..idx.size()).collect());
    let mut t = vec![0; k];
    let mut img = vec![0; k];
    for perm in automorphisms(g) {
        for r in 0..idx.size() {
            idx.unrank_into(r, &mut t);
            for (a, &b) in img.iter_mut().zip(&t) {
                *a = perm[b];
            }
            uf.union(r, idx.rank(&img));
        }
    }
    let roots: Vec<usize> = (0..idx.size()).map(|r| uf.find(r)).collect();
    Ok(LabelledPartition::from_keys_first_occurrence(k, g.n(), roots))
}

/// Joint color refinement on the disjoint union of `g` and `h`. Returns
/// per-vertex class ids for each graph, comparable between them.
fn joint_refinement(g: &ColoredGraph, h: &ColoredGraph) -> (Vec<u32>, Vec<u32>) {
    joint_refinement_from(
        g,
        h,
        (0..g.n()).map(|u| g.color(u, u)).collect(),
        (0..h.n()).map(|u| h.color(u, u)).collect(),
    )
}

fn joint_refinement_from(
    g: &ColoredGraph,
    h: &ColoredGraph,
    init_g: Vec<u32>,
    init_h: Vec<u32>,
) -> (Vec<u32>, Vec<u32>) {
    let graphs = [g, h];
    let mut cls: [Vec<u32>; 2] = [init_g, init_h];
    let mut count = usize::MAX;
    loop {
        let mut dict: HashMap<(u32, Vec<(u32, u32, u32)>), u32> = HashMap::new();
        let mut next: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        for s in 0..2 {
            let gr = graphs[s];
            for u in 0..gr.n() {
                let mut sig: Vec<_> =
                    (0..gr.n()).filter(|&w| w != u).map(|w| (gr.color(u, w), gr.color(w, u), cls[s][w])).collect();
                sig.sort_unstable();
                let len = dict.len() as u32;
                next[s].push(*dict.entry((cls[s][u], sig)).or_insert(len));
            }
        }
        let c = dict.len();
        cls = next;
        if c == count {
            return (cls[0].clone(), cls[1].clone());
        }
        count = c;
    }
}

/// An automorphism `π` of `g` with `π(u_i) = v_i` for every position, found
/// by individualization and color refinement. Gives up with `None` after
/// `budget` search nodes, so `None` does not prove that no such map exists.
pub fn automorphism_mapping(g: &ColoredGraph, u: &[Vertex], v: &[Vertex], budget: usize) -> Option<Vec<Vertex>> {
    if u.len() != v.len() || u.iter().chain(v).any(|&x| x >= g.n()) {
        return None;
    }
    let mut cg: Vec<u32> = (0..g.n()).map(|x| g.color(x, x)).collect();
    let mut ch = cg.clone();
    for (i, (&a, &b)) in u.iter().zip(v).enumerate() {
        // Repeated entries must map consistently; reuse the first mark.
        let first = u.iter().position(|&x| x == a).expect("a occurs in u");
        if v[first] != b || v.iter().position(|&y| y == b) != Some(first) {
            return None;
        }
        if first == i {
            cg[a] = u32::MAX - i as u32;
            ch[b] = u32::MAX - i as u32;
        }
    }
    let mut nodes = 0;
    individualize(g, cg, ch, budget, &mut nodes)
}

fn individualize(
    g: &ColoredGraph,
    cg: Vec<u32>,
    ch: Vec<u32>,
    budget: usize,
    nodes: &mut usize,
) -> Option<Vec<Vertex>> {
    *nodes += 1;
    if *nodes > budget {
        return None;
    }
    let (cg, ch) = joint_refinement_from(g, g, cg, ch);
    let mut size: HashMap<u32, (usize, usize)> = HashMap::new();
    for &c in &cg {
        size.entry(c).or_default().0 += 1;
    }
    for &c in &ch {
        size.entry(c).or_default().1 += 1;
    }
    if size.values().any(|&(a, b)| a != b) {
        return None;
    }
    let n = g.n();
    match size.iter().filter(|(_, &(a, _))| a > 1).min_by_key(|(&c, &(a, _))| (a, c)) {
        None => {
            let mut target: HashMap<u32, Vertex> = HashMap::new();
            for (w, &c) in ch.iter().enumerate() {
                target.insert(c, w);
            }
            let pi: Vec<Vertex> = cg.iter().map(|c| target[c]).collect();
            let is_aut = (0..n).all(|a| (0..n).all(|b| g.color(a, b) == g.color(pi[a], pi[b])));
            is_aut.then_some(pi)
        }
        Some((&cell, _)) => {
            let x = cg.iter().position(|&c| c == cell).expect("cell is nonempty");
            for w in (0..n).filter(|&w| ch[w] == cell) {
                let (mut ng, mut nh) = (cg.clone(), ch.clone());
                ng[x] = u32::MAX;
                nh[w] = u32::MAX;
                if let Some(pi) = individualize(g, ng, nh, budget, nodes) {
                    return Some(pi);
                }
                if *nodes > budget {
                    return None;
                }
            }
            None
        }
    }
}

/// Whether a color-preserving bijection `g -> h` exists. Graphs with
/// different color-name sets are never isomorphic.
pub fn color_isomorphic(g: &ColoredGraph, h: &ColoredGraph) -> bool {
    if g.n() != h.n() || g.color_names() != h.color_names() {
        return false;
    }
    let (cg, ch) = joint_refinement(g, h);
    let mut hist: HashMap<u32, i64> = HashMap::new();
    for &c in &cg {
        *hist.entry(c).or_default() += 1;
    }
    for &c in &ch {
        *hist.entry(c).or_default() -= 1;
    }
    if hist.values().any(|&d| d != 0) {
        return false;
    }
    // Smallest classes first, then stay close to already placed vertices.
    let n = g.n();
    let mut size: HashMap<u32, usize> = HashMap::new();
    for &c in &cg {
        *size.entry(c).or_default() += 1;
    }
    let default = g.color_id(g.default_color());
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let next = (0..n)
            .filter(|&u| !placed[u])
            .min_by_key(|&u| {
                let linked = order.iter().any(|&a| Some(g.color(u, a)) != default || Some(g.color(a, u)) != default);
                (!linked, size[&cg[u]], u)
            })
            .expect("unplaced vertex exists");
        placed[next] = true;
        order.push(next);
    }
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut ok = false;
    extend(g, h, &order, 0, &mut image, &mut used, &|u, w| cg[u] == ch[w], &mut |_| {
        ok = true;
        false
    });
    ok
}
