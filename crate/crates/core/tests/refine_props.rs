//! Operator laws and partition-order properties on random small graphs.

use std::collections::BTreeSet;

use algiso::corpus::{corpus, seeded_random};
use algiso::field::FieldSpec;
use algiso::graph::{atomic_type_partition, brute_force_orbits, index_tuples, substitute, ColoredGraph, TupleIndex};
use algiso::partition::{permutations, LabelledPartition, PartitionOrder};
use algiso::refine::{fixed_point, OperatorSpec};
use proptest::prelude::*;

fn fields() -> [FieldSpec; 3] {
    [FieldSpec::RATIONALS, FieldSpec::prime(2).unwrap(), FieldSpec::prime(3).unwrap()]
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Smallest coarsening of `rho` that merges the classes `merge` sends to
/// the same label and is closed under permuting coordinates.
fn invariant_coarsening(rho: &LabelledPartition, merge: impl Fn(u32) -> u64) -> LabelledPartition {
    let idx = TupleIndex::new(rho.n(), rho.k()).unwrap();
    let size = idx.size();
    let mut parent: Vec<usize> = (0..size).collect();
    let mut first = std::collections::HashMap::new();
    for r in 0..size {
        let root = *first.entry(merge(rho.color(r))).or_insert(r);
        let (a, b) = (find(&mut parent, r), find(&mut parent, root));
        parent[a] = b;
    }
    let perms = permutations(rho.k());
    let permute = |r: usize, pi: &[usize]| {
        let t = idx.unrank(r);
        idx.rank(&pi.iter().map(|&p| t[p]).collect::<Vec<_>>())
    };
    loop {
        let mut changed = false;
        for r in 0..size {
            let root = find(&mut parent, r);
            for pi in &perms {
                let (a, b) = (find(&mut parent, permute(r, pi)), find(&mut parent, permute(root, pi)));
                if a != b {
                    parent[a] = b;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let keys: Vec<usize> = (0..size).map(|r| find(&mut parent, r)).collect();
    LabelledPartition::from_keys_first_occurrence(rho.k(), rho.n(), keys)
}

fn operators(k: usize) -> Vec<OperatorSpec> {
    let mut ops = vec![OperatorSpec::counting(k, 1).unwrap()];
    for f in fields() {
        ops.push(OperatorSpec::sol(k, 1, f).unwrap());
    }
    ops
}

fn arb_graph() -> impl Strategy<Value = ColoredGraph> {
    (3usize..=5, any::<u64>()).prop_map(|(n, seed)| seeded_random(n, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// γ ⪯ ρ implies R∘γ ⪯ R∘ρ, with γ an invariant coarsening of the orbits.
    #[test]
    fn steps_are_monotone(g in arb_graph(), k in 2usize..=3, labels in proptest::collection::vec(0u64..4, 64)) {
        let rho = brute_force_orbits(&g, k, None).unwrap();
        let gamma = invariant_coarsening(&rho, |c| labels[c as usize % labels.len()]);
        prop_assert!(gamma.is_invariant());
        prop_assert!(gamma.is_refined_by(&rho).unwrap());
        for op in operators(k) {
            let (sg, sr) = (op.step(&gamma).unwrap(), op.step(&rho).unwrap());
            prop_assert!(gamma.is_refined_by(&sg).unwrap(), "{:?} does not refine its input", op);
            prop_assert!(sg.is_refined_by(&sr).unwrap(), "{:?} is not monotone", op);
        }
    }

    /// Graph-like inputs stay graph-like. Merging only within atomic types
    /// keeps the coarsening graph-like.
    #[test]
    fn steps_preserve_graph_like(g in arb_graph(), k in 2usize..=3, labels in proptest::collection::vec(0u64..3, 64)) {
        let alpha = atomic_type_partition(&g, k).unwrap();
        let rho = brute_force_orbits(&g, k, None).unwrap();
        let ranks: Vec<u32> = (0..rho.num_classes()).map(|c| {
            let r = rho.colors().iter().position(|&x| x == c as u32).unwrap();
            alpha.color(r)
        }).collect();
        let gamma = invariant_coarsening(&rho, |c| u64::from(ranks[c as usize]) * 8 + labels[c as usize % labels.len()]);
        prop_assert!(gamma.is_graph_like());
        for op in operators(k) {
            prop_assert!(op.step(&gamma).unwrap().is_graph_like(), "{:?}", op);
        }
    }

    #[test]
    fn compare_is_a_partial_order(
        c in proptest::collection::vec(0u32..6, 16),
        f in proptest::collection::vec(0u32..3, 6),
        h in proptest::collection::vec(0u32..2, 3),
        other in proptest::collection::vec(0u32..4, 16),
    ) {
        let part = |cs: Vec<u32>| LabelledPartition::from_keys_first_occurrence(2, 4, cs);
        let fine = part(c);
        let mid = fine.map_colors(|x| f[x as usize]);
        let coarse = mid.map_colors(|x| h[x as usize % h.len()]);
        let free = part(other);
        let all = [&fine, &mid, &coarse, &free];
        for a in all {
            prop_assert_eq!(a.compare(a).unwrap(), PartitionOrder::Equal);
            prop_assert_eq!(a.compare(&a.normalized()).unwrap(), PartitionOrder::Equal);
            for b in all {
                let brute = (0..16).all(|i| (0..16).all(|j| b.color(i) != b.color(j) || a.color(i) == a.color(j)));
                prop_assert_eq!(a.is_refined_by(b).unwrap(), brute);
                let flipped = match a.compare(b).unwrap() {
                    PartitionOrder::FirstCoarser => PartitionOrder::SecondCoarser,
                    PartitionOrder::SecondCoarser => PartitionOrder::FirstCoarser,
                    o => o,
                };
                prop_assert_eq!(b.compare(a).unwrap(), flipped);
                if a.compare(b).unwrap() == PartitionOrder::Equal {
                    prop_assert_eq!(a.normalized(), b.normalized());
                }
                for c in all {
                    if a.is_refined_by(b).unwrap() && b.is_refined_by(c).unwrap() {
                        prop_assert!(a.is_refined_by(c).unwrap());
                    }
                }
            }
        }
        prop_assert!(coarse.is_refined_by(&mid).unwrap() && mid.is_refined_by(&fine).unwrap());
    }
}

/// At a graph-like Sol fixed point, same-colored tuples see the same set of
/// colors along the diagonal substitutions `v<i, w·w>`.
#[test]
fn diagonal_colors_agree_at_sol_fixed_points() {
    for cg in corpus().iter().filter(|c| c.graph.n() <= 5) {
        let g = &cg.graph;
        for k in 2..=3 {
            let idx = TupleIndex::new(g.n(), k).unwrap();
            for f in fields() {
                let op = OperatorSpec::sol(k, 1, f).unwrap();
                let gamma = fixed_point(&op, &atomic_type_partition(g, k).unwrap()).unwrap().partition;
                assert!(gamma.is_graph_like(), "{} k={k}", cg.name);
                let index = index_tuples(k, 2);
                let seen = |r: usize, i: &[usize]| -> BTreeSet<u32> {
                    let t = idx.unrank(r);
                    (0..g.n()).map(|w| gamma.color_of(&substitute(&t, i, &[w, w]).unwrap())).collect()
                };
                for class in gamma.classes() {
                    let u = class[0];
                    for &v in &class[1..] {
                        for i in &index {
                            assert_eq!(seen(u, i), seen(v, i), "{} k={k} {f}", cg.name);
                        }
                    }
                }
            }
        }
    }
}
