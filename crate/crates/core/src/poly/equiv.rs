//! The equivalence `u ≡ v` iff `Ax(Γ_{u→v})` has no degree-`d`
//! refutation, as a labelled partition of `V^k`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::engine::{Prepared, State};
use super::{var_id, AxiomSet, Calculus, EngineOptions, PolyError, VarId};
use crate::field::{Field, FieldSpec};
use crate::graph::{atomic_type_partition, automorphism_mapping, ColoredGraph};
use crate::partition::LabelledPartition;
use crate::with_field;

/// Search nodes spent looking for an automorphism between two tuples.
const AUTOMORPHISM_BUDGET: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquivOptions {
    pub engine: EngineOptions,
    /// Worker threads; classes of the atomic-type partition are split
    /// between them.
    pub jobs: usize,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions { engine: EngineOptions::default(), jobs: 1 }
    }
}

/// Partitions `V^k` by the degree-`d` refutability of `Ax(Γ_{u→v})`.
///
/// Only pairs of the same atomic type are tested. Within a type, each
/// tuple is compared with the elected representatives in rank order,
/// which is enough because the relation is an equivalence.
pub fn calculus_equiv_partition(
    g: &ColoredGraph,
    k: usize,
    calc: Calculus,
    d: usize,
    field: FieldSpec,
    opts: &EquivOptions,
) -> Result<LabelledPartition, PolyError> {
    with_field!(field, f => equiv_in(g, k, calc, d, f, opts))
}

fn equiv_in<F: Field>(
    g: &ColoredGraph,
    k: usize,
    calc: Calculus,
    d: usize,
    f: F,
    opts: &EquivOptions,
) -> Result<LabelledPartition, PolyError> {
    let at = atomic_type_partition(g, k)?;
    let idx = at.tuple_index();
    let n = g.n();
    let ax = AxiomSet::ax_graph(g)?;
    let prep = Prepared::new(&ax, d, f, &opts.engine)?;
    let base = State::closure(&prep, calc, &opts.engine)?;
    let classes = at.classes();

    // x_{v_i u_i} for each position, as A5 prescribes for u -> v.
    let targets = |u: usize, v: usize| -> Vec<VarId> {
        let (tu, tv) = (idx.unrank(u), idx.unrank(v));
        let mut vars: Vec<VarId> = tu.iter().zip(&tv).map(|(&a, &b)| var_id(n, b, a)).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    };
    // Exact shortcuts before saturating: an automorphism taking one tuple
    // to the other is a common root, and a pin product already in the
    // closure yields a refutation by peeling off one `x - 1` at a time.
    let refutes = |r: usize, t: usize| -> Result<bool, PolyError> {
        if automorphism_mapping(g, &idx.unrank(r), &idx.unrank(t), AUTOMORPHISM_BUDGET).is_some() {
            return Ok(false);
        }
        let vars = targets(r, t);
        let pinned = (1..1usize << vars.len()).any(|mask| {
            let j: Vec<VarId> = vars.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect();
            j.len() <= d && base.derives_monomial(&prep, &j)
        });
        Ok(pinned || base.refutes_with_units(&prep, &vars, &opts.engine)?)
    };
    let split = |members: &[usize]| -> Result<Vec<u32>, PolyError> {
        let mut reps: Vec<usize> = Vec::new();
        let mut out = Vec::with_capacity(members.len());
        for &t in members {
            let mut label = None;
            for (j, &r) in reps.iter().enumerate() {
                if !refutes(r, t)? {
                    label = Some(j as u32);
                    break;
                }
            }
            out.push(label.unwrap_or_else(|| {
                reps.push(t);
                (reps.len() - 1) as u32
            }));
        }
        Ok(out)
    };

    let results: Vec<Mutex<Option<Result<Vec<u32>, PolyError>>>> = classes.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let c = next.fetch_add(1, Ordering::Relaxed);
        if c >= classes.len() {
            break;
        }
        let r = split(&classes[c]);
        let failed = r.is_err();
        *results[c].lock().expect("result slot") = Some(r);
        if failed {
            next.store(classes.len(), Ordering::Relaxed);
        }
    };
    let jobs = opts.jobs.clamp(1, classes.len().max(1));
    if jobs == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(worker);
            }
        });
    }

    let mut keys = vec![(0u32, 0u32); at.size()];
    for (c, slot) in classes.iter().zip(results) {
        let labels = match slot.into_inner().expect("result slot") {
            Some(r) => r?,
            None => continue,
        };
        for (&t, l) in c.iter().zip(labels) {
            keys[t] = (at.color(t), l);
        }
    }
    Ok(LabelledPartition::from_keys_first_occurrence(k, n, keys))
}

/// Smallest `J ⊆ [k]`, `|J| <= d`, in size-then-lexicographic order, such
/// that `∏_{i∈J} x_{v_i u_i}` has a degree-`d` derivation from `Ax(Γ)`.
///
/// Diagnostic view of a refutation of `Ax(Γ_{u→v})`: any such `J` yields one,
/// since peeling off `x_{v_j u_j} - 1` one factor at a time stays within
/// degree `|J|`. The converse is not assumed.
pub fn derivable_pin_subset(
    g: &ColoredGraph,
    u: &[usize],
    v: &[usize],
    calc: Calculus,
    d: usize,
    field: FieldSpec,
    opts: &EngineOptions,
) -> Result<Option<Vec<usize>>, PolyError> {
    if u.len() != v.len() {
        return Err(PolyError::LengthMismatch(u.len(), v.len()));
    }
    with_field!(field, f => {
        let ax = AxiomSet::ax_graph(g)?;
        let prep = Prepared::new(&ax, d, f, opts)?;
        let base = State::closure(&prep, calc, opts)?;
        let n = g.n();
        let k = u.len();
        for size in 0..=k.min(d) {
            for j in subsets(k, size) {
                let vars: Vec<VarId> = j.iter().map(|&i| var_id(n, v[i], u[i])).collect();
                if base.derives_monomial(&prep, &vars) {
                    return Ok(Some(j));
                }
            }
        }
        Ok(None)
    })
}

/// Index subsets of `[k]` of the given size, in lexicographic order.
fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=k - left {
            cur.push(i);
            go(i + 1, k, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, size, &mut Vec::new(), &mut out);
    out
}
