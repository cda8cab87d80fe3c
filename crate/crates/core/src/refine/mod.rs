//! Refinement operators on labelled partitions of `V^k`: counting
//! operators `C_{k,r}`, solvability operators `Sol_{k,r}` over a prime
//! field or the rationals, their combined form, and fixed points.

mod sol;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sol::{is_sol_stable, sol_combined_step, sol_equiv, sol_step};

use crate::audit;
use crate::field::FieldSpec;
use crate::graph::{index_tuples, TupleIndex};
use crate::partition::{LabelledPartition, PartitionError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("invalid operator parameters: {0}")]
    BadParameters(String),
    #[error("solvability operators are only defined on invariant partitions")]
    NotInvariant,
    #[error("character vectors differ in shape: {0} vs {1}")]
    ShapeMismatch(usize, usize),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Counting,
    Sol,
    SolCombined,
}

/// A refinement operator with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
}

impl OperatorSpec {
    pub fn counting(k: usize, r: usize) -> Result<Self, RefineError> {
        let op = OperatorSpec { kind: OperatorKind::Counting, k, r: Some(r), field: None };
        op.validate()?;
        Ok(op)
    }

    pub fn sol(k: usize, r: usize, field: FieldSpec) -> Result<Self, RefineError> {
        let op = OperatorSpec { kind: OperatorKind::Sol, k, r: Some(r), field: Some(field) };
        op.validate()?;
        Ok(op)
    }

    pub fn sol_combined(k: usize, field: FieldSpec) -> Result<Self, RefineError> {
        let op = OperatorSpec { kind: OperatorKind::SolCombined, k, r: None, field: Some(field) };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<(), RefineError> {
        let bad = |m: String| Err(RefineError::BadParameters(m));
        match (self.kind, self.r, self.field) {
            (OperatorKind::Counting, Some(r), _) if r >= 1 && r < self.k => Ok(()),
            (OperatorKind::Counting, r, _) => bad(format!("counting needs 1 <= r < k, got r={r:?}, k={}", self.k)),
            (OperatorKind::Sol, Some(r), Some(_)) if r >= 1 && 2 * r <= self.k => Ok(()),
            (OperatorKind::Sol, r, f) => {
                bad(format!("sol needs 1 <= r, 2r <= k and a field, got r={r:?}, k={}, field={f:?}", self.k))
            }
            (OperatorKind::SolCombined, None, Some(_)) if self.k >= 2 => Ok(()),
            (OperatorKind::SolCombined, r, f) => {
                bad(format!("combined sol needs k >= 2, no r, and a field, got r={r:?}, k={}, field={f:?}", self.k))
            }
        }
    }

    pub fn step(&self, gamma: &LabelledPartition) -> Result<LabelledPartition, RefineError> {
        self.validate()?;
        if gamma.k() != self.k {
            return Err(RefineError::BadParameters(format!(
                "partition width {} but operator width {}",
                gamma.k(),
                self.k
            )));
        }
        match self.kind {
            OperatorKind::Counting => Ok(counting_step(gamma, self.k, self.r.expect("validated"))?),
            OperatorKind::Sol => sol_step(gamma, self.k, self.r.expect("validated"), self.field.expect("validated")),
            OperatorKind::SolCombined => sol_combined_step(gamma, self.k, self.field.expect("validated")),
        }
    }
}

/// For each tuple, the rank of the tuple with positions `i` set to vertex 0.
/// Substituting into `v` at `i` depends on `v` only through this base.
pub(crate) fn base_ranks(idx: &TupleIndex, i: &[usize]) -> Vec<usize> {
    let mut t = vec![0; idx.k()];
    (0..idx.size())
        .map(|r| {
            idx.unrank_into(r, &mut t);
            for &p in i {
                t[p] = 0;
            }
            idx.rank(&t)
        })
        .collect()
}

/// Offsets added to a base rank when the values `x ∈ V^r` are written at positions `i`.
pub(crate) fn substitution_offsets(idx: &TupleIndex, i: &[usize]) -> Vec<usize> {
    let half = TupleIndex::new(idx.n(), i.len()).expect("fits whenever the full index fits");
    let mut x = vec![0; i.len()];
    (0..half.size())
        .map(|xr| {
            half.unrank_into(xr, &mut x);
            i.iter().zip(&x).map(|(&p, &xv)| xv * idx.weight(p)).sum()
        })
        .collect()
}

/// Per index tuple `i ∈ [k]^{(r)}`, an id for the multiset
/// `{γ(v<i,x>) : x ∈ V^r}` of every tuple `v`.
fn counting_signatures(gamma: &LabelledPartition, r: usize) -> Vec<Vec<u32>> {
    let idx = gamma.tuple_index();
    index_tuples(gamma.k(), r)
        .into_iter()
        .map(|i| {
            let bases = base_ranks(&idx, &i);
            let offs = substitution_offsets(&idx, &i);
            let mut by_base: HashMap<usize, u32> = HashMap::new();
            let mut interned: HashMap<Vec<(u32, u32)>, u32> = HashMap::new();
            bases
                .iter()
                .map(|&b| {
                    *by_base.entry(b).or_insert_with(|| {
                        let mut cols: Vec<u32> = offs.iter().map(|o| gamma.color(b + o)).collect();
                        cols.sort_unstable();
                        let mut hist: Vec<(u32, u32)> = Vec::new();
                        for c in cols {
                            match hist.last_mut() {
                                Some((last, cnt)) if *last == c => *cnt += 1,
                                _ => hist.push((c, 1)),
                            }
                        }
                        let next = interned.len() as u32;
                        *interned.entry(hist).or_insert(next)
                    })
                })
                .collect()
        })
        .collect()
}

/// `C_{k,r}`: the new color is the old color together with, for each
/// `i ∈ [k]^{(r)}`, the multiset of colors of the tuples `v<i,x>`.
pub fn counting_step(gamma: &LabelledPartition, k: usize, r: usize) -> Result<LabelledPartition, RefineError> {
    OperatorSpec::counting(k, r)?;
    if gamma.k() != k {
        return Err(RefineError::BadParameters(format!("partition width {} but k = {k}", gamma.k())));
    }
    let sigs = counting_signatures(gamma, r);
    let keys = (0..gamma.size()).map(|t| {
        let mut key = Vec::with_capacity(sigs.len() + 1);
        key.push(gamma.color(t));
        key.extend(sigs.iter().map(|s| s[t]));
        key
    });
    let out = LabelledPartition::from_keys_first_occurrence(k, gamma.n(), keys.collect::<Vec<_>>());
    Ok(out)
}

/// Whether `|{x ∈ V^r : γ(v<i,x>) = σ}|` is constant on every class, for
/// all `i` and `σ`. Accepts `1 <= r <= k`.
pub fn is_counting_stable(gamma: &LabelledPartition, k: usize, r: usize) -> Result<bool, RefineError> {
    if r == 0 || r > k || gamma.k() != k {
        return Err(RefineError::BadParameters(format!(
            "counting stability needs 1 <= r <= k = width, got r={r}, k={k}"
        )));
    }
    let sigs = counting_signatures(gamma, r);
    Ok(sigs.iter().all(|sig| {
        let mut seen = vec![u32::MAX; gamma.num_classes()];
        (0..gamma.size()).all(|t| {
            let slot = &mut seen[gamma.color(t) as usize];
            if *slot == u32::MAX {
                *slot = sig[t];
            }
            *slot == sig[t]
        })
    }))
}

/// Result of iterating an operator to stability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPoint {
    pub partition: LabelledPartition,
    /// Number of operator applications, including the confirming one.
    pub iterations: usize,
}

/// Iterates `op` from `gamma0` until the equivalence relation stops
/// changing. Every step is checked to refine its input.
pub fn fixed_point(op: &OperatorSpec, gamma0: &LabelledPartition) -> Result<FixedPoint, RefineError> {
    op.validate()?;
    if op.kind != OperatorKind::Counting && !gamma0.is_invariant() {
        return Err(RefineError::NotInvariant);
    }
    let mut cur = gamma0.normalized();
    let mut iterations = 0;
    loop {
        let next = op.step(&cur)?;
        iterations += 1;
        let refines = cur.is_refined_by(&next)?;
        audit::record_refine_step(refines);
        // Under refinement, an unchanged class count means an unchanged relation.
        if refines && next.num_classes() == cur.num_classes() {
            return Ok(FixedPoint { partition: next, iterations });
        }
        if !refines {
            // Keep going from the common refinement so that the loop still terminates.
            cur = LabelledPartition::product(&[&cur, &next])?;
        } else {
            cur = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{atomic_type_partition, brute_force_orbits, ColoredGraph};

    fn path() -> ColoredGraph {
        ColoredGraph::undirected(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    fn triangle() -> ColoredGraph {
        ColoredGraph::undirected(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]).unwrap()
    }

    #[test]
    fn counting_parameters_checked() {
        assert!(OperatorSpec::counting(2, 2).is_err());
        assert!(OperatorSpec::counting(2, 0).is_err());
        assert!(OperatorSpec::sol(3, 2, FieldSpec::RATIONALS).is_err());
        assert!(OperatorSpec::sol(4, 2, FieldSpec::RATIONALS).is_ok());
    }

    #[test]
    fn unit_partition_is_a_counting_fixed_point() {
        let unit = LabelledPartition::unit(2, 3).unwrap();
        let next = counting_step(&unit, 2, 1).unwrap();
        assert_eq!(next.num_classes(), 1, "one round of counting over a single class sees identical multisets");
        // The atomic types already separate the diagonal; a stable input stays put.
        let at = atomic_type_partition(&triangle(), 2).unwrap();
        assert!(counting_step(&at, 2, 1).unwrap().same_relation(&at));
    }

    #[test]
    fn path_one_round() {
        let g = path();
        let at = atomic_type_partition(&g, 2).unwrap();
        let next = counting_step(&at, 2, 1).unwrap();
        let idx = at.tuple_index();
        let c = |a: usize, b: usize| next.color(idx.rank(&[a, b]));
        // Endpoint diagonal vs midpoint diagonal.
        assert_ne!(c(0, 0), c(1, 1));
        assert_eq!(c(0, 0), c(2, 2));
        // (a,b) and (c,b) are mirror images; (a,b) and (b,a) are not.
        assert_eq!(c(0, 1), c(2, 1));
        assert_ne!(c(0, 1), c(1, 0));
    }

    #[test]
    fn path_fixed_point_matches_orbits() {
        let g = path();
        let op = OperatorSpec::counting(2, 1).unwrap();
        let fp = fixed_point(&op, &atomic_type_partition(&g, 2).unwrap()).unwrap();
        let orb = brute_force_orbits(&g, 2, None).unwrap();
        assert!(fp.partition.same_relation(&orb));
        assert!(is_counting_stable(&fp.partition, 2, 1).unwrap());
    }

    #[test]
    fn stable_input_needs_one_confirming_pass() {
        let at = atomic_type_partition(&triangle(), 2).unwrap();
        let fp = fixed_point(&OperatorSpec::counting(2, 1).unwrap(), &at).unwrap();
        assert_eq!(fp.iterations, 1);
        assert!(fp.partition.same_relation(&at));
    }

    #[test]
    fn single_vertex_fixed_point() {
        let g = ColoredGraph::undirected(&["a"], &[]).unwrap();
        let at = atomic_type_partition(&g, 2).unwrap();
        let fp = fixed_point(&OperatorSpec::counting(2, 1).unwrap(), &at).unwrap();
        assert_eq!(fp.partition.num_classes(), 1);
        assert_eq!(fp.iterations, 1);
    }

    #[test]
    fn triangle_atomic_types_are_counting_stable() {
        let at = atomic_type_partition(&triangle(), 2).unwrap();
        assert!(is_counting_stable(&at, 2, 1).unwrap());
    }

    #[test]
    fn counting_stability_on_path() {
        let g = path();
        // A single color is counted n times from every tuple.
        assert!(is_counting_stable(&LabelledPartition::unit(2, 3).unwrap(), 2, 1).unwrap());
        // Endpoints and the midpoint see different numbers of edges.
        assert!(!is_counting_stable(&atomic_type_partition(&g, 2).unwrap(), 2, 1).unwrap());
    }
}
