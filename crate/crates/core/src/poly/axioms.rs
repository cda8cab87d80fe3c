//! The isomorphism axioms `Ax(Γ)` and `Ax(Γ_{u→v})`, and free-form axiom
//! sets over anonymous variables.
//!
//! Only A1, A2, A5 and custom polynomials are stored. A3 is answered from
//! the graph on demand and A4 is built into the multilinear arithmetic.

use serde::{Deserialize, Serialize};

use super::{var_id, var_pair, IntPolynomial, Monomial, PolyError, Polynomial, VarId};
use crate::field::Field;
use crate::graph::{ColoredGraph, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AxiomTag {
    A1,
    A2,
    A3,
    A4,
    A5,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axiom {
    pub tag: AxiomTag,
    pub poly: IntPolynomial,
}

/// An axiom used in a derivation: a stored axiom by index, or the A3
/// monomial `x_a x_b` (`a <= b`; `a == b` is the single variable `x_a`
/// after reduction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomRef {
    Explicit(usize),
    A3(VarId, VarId),
}

#[derive(Debug, Clone)]
pub struct AxiomSet {
    num_vars: usize,
    graph: Option<ColoredGraph>,
    explicit: Vec<Axiom>,
    target: Option<(Vec<Vertex>, Vec<Vertex>)>,
}

impl AxiomSet {
    /// `Ax(Γ)`: A1 and A2 for every vertex, with A3 and A4 implicit.
    pub fn ax_graph(g: &ColoredGraph) -> Result<Self, PolyError> {
        let n = g.n();
        if n * n > u16::MAX as usize {
            return Err(PolyError::TooManyVariables(n * n));
        }
        let mut explicit = Vec::with_capacity(2 * n);
        for v in 0..n {
            let mut t: Vec<_> = (0..n).map(|u| (vec![var_id(n, u, v)], 1)).collect();
            t.push((vec![], -1));
            explicit.push(Axiom { tag: AxiomTag::A1, poly: IntPolynomial::new(t) });
        }
        for v in 0..n {
            let mut t: Vec<_> = (0..n).map(|u| (vec![var_id(n, v, u)], 1)).collect();
            t.push((vec![], -1));
            explicit.push(Axiom { tag: AxiomTag::A2, poly: IntPolynomial::new(t) });
        }
        Ok(AxiomSet { num_vars: n * n, graph: Some(g.clone()), explicit, target: None })
    }

    /// `Ax(Γ_{u→v})`: `Ax(Γ)` plus `x_{v_i u_i} - 1` for every position.
    pub fn ax_iso(g: &ColoredGraph, u: &[Vertex], v: &[Vertex]) -> Result<Self, PolyError> {
        AxiomSet::ax_graph(g)?.with_target(u, v)
    }

    /// Appends the A5 axioms for `u -> v`, replacing any previous target.
    pub fn with_target(mut self, u: &[Vertex], v: &[Vertex]) -> Result<Self, PolyError> {
        let n = self.graph.as_ref().map_or(0, ColoredGraph::n);
        if u.len() != v.len() {
            return Err(PolyError::LengthMismatch(u.len(), v.len()));
        }
        if let Some(&bad) = u.iter().chain(v).find(|&&x| x >= n) {
            return Err(PolyError::UnknownVariable { var: bad as VarId, num_vars: n });
        }
        self.explicit.retain(|a| a.tag != AxiomTag::A5);
        for (&a, &b) in u.iter().zip(v) {
            let poly = IntPolynomial::new(vec![(vec![var_id(n, b, a)], 1), (vec![], -1)]);
            self.explicit.push(Axiom { tag: AxiomTag::A5, poly });
        }
        self.target = Some((u.to_vec(), v.to_vec()));
        Ok(self)
    }

    /// A free-form axiom set over variables `0..num_vars`, without a graph.
    pub fn custom(num_vars: usize, polys: Vec<IntPolynomial>) -> Result<Self, PolyError> {
        if num_vars > u16::MAX as usize {
            return Err(PolyError::TooManyVariables(num_vars));
        }
        for p in &polys {
            if let Some(x) = p.max_var().filter(|&x| x as usize >= num_vars) {
                return Err(PolyError::UnknownVariable { var: x, num_vars });
            }
        }
        let explicit = polys.into_iter().map(|poly| Axiom { tag: AxiomTag::Custom, poly }).collect();
        Ok(AxiomSet { num_vars, graph: None, explicit, target: None })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn graph(&self) -> Option<&ColoredGraph> {
        self.graph.as_ref()
    }

    pub fn explicit(&self) -> &[Axiom] {
        &self.explicit
    }

    pub fn target(&self) -> Option<(&[Vertex], &[Vertex])> {
        self.target.as_ref().map(|(u, v)| (u.as_slice(), v.as_slice()))
    }

    /// Whether `{a, b}` as a partial map is a local isomorphism: well
    /// defined, injective, and preserving vertex colors and both ordered
    /// pair colors. Always true without a graph.
    pub fn local_iso(&self, a: VarId, b: VarId) -> bool {
        let Some(g) = &self.graph else { return true };
        let n = g.n();
        let (u, v) = var_pair(n, a);
        let (u2, v2) = var_pair(n, b);
        if g.color(u, u) != g.color(v, v) || g.color(u2, u2) != g.color(v2, v2) {
            return false;
        }
        if u == u2 || v == v2 {
            return u == u2 && v == v2;
        }
        g.color(u, u2) == g.color(v, v2) && g.color(u2, u) == g.color(v2, v)
    }

    /// Every A3 axiom as `(a, b)` with `a <= b`, in increasing order.
    pub fn a3_pairs(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        if self.graph.is_none() {
            return out;
        }
        for a in 0..self.num_vars as VarId {
            for b in a..self.num_vars as VarId {
                if !self.local_iso(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// All axioms written out, A3 and A4 included. Quadratic in the
    /// number of variables; intended for small inputs and inspection.
    pub fn materialize(&self) -> Vec<Axiom> {
        let mut out: Vec<Axiom> = self.explicit.iter().filter(|a| a.tag != AxiomTag::A5).cloned().collect();
        for (a, b) in self.a3_pairs() {
            out.push(Axiom { tag: AxiomTag::A3, poly: IntPolynomial::new(vec![(vec![a, b], 1)]) });
        }
        for x in 0..self.num_vars as VarId {
            out.push(Axiom { tag: AxiomTag::A4, poly: IntPolynomial::new(vec![(vec![x, x], 1), (vec![x], -1)]) });
        }
        out.extend(self.explicit.iter().filter(|a| a.tag == AxiomTag::A5).cloned());
        out
    }

    /// The multilinear polynomial of a referenced axiom.
    pub fn polynomial<F: Field>(&self, f: &F, r: AxiomRef) -> Polynomial<F::Elem> {
        match r {
            AxiomRef::Explicit(i) => self.explicit[i].poly.to_field(f),
            AxiomRef::A3(a, b) => Polynomial::from_terms(f, [(Monomial::new(vec![a, b]), f.one())]),
        }
    }

    /// Readable name: `x[u->v]` for graph axioms, `x<i>` otherwise.
    pub fn var_name(&self, x: VarId) -> String {
        match &self.graph {
            Some(g) => {
                let (u, v) = var_pair(g.n(), x);
                format!("x[{}->{}]", g.vertex_name(u), g.vertex_name(v))
            }
            None => format!("x{x}"),
        }
    }

    pub fn monomial_name(&self, m: &Monomial) -> String {
        if m.is_one() {
            return "1".to_string();
        }
        m.vars().iter().map(|&x| self.var_name(x)).collect::<Vec<_>>().join("*")
    }

    /// Whether the 0/1 assignment is a common root of every axiom.
    pub fn is_common_root<F: Field>(&self, f: &F, assignment: impl Fn(VarId) -> bool + Copy) -> bool {
        self.materialize().iter().all(|a| f.is_zero(&a.poly.to_field(f).eval(f, assignment)))
    }
}
