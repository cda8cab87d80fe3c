//! Solvability operators. Two character vectors are `~sol`-equivalent
//! when some matrix `M` with all row and column sums 1 satisfies
//! `χ_σ M = M ξ_σ` for every color `σ`; this is decided exactly by
//! Gaussian elimination in the `N²` entries of `M`.

use std::collections::{BTreeSet, HashMap};

use crate::exactla::{solve_sparse_feasible, SparseVec};
use crate::field::{Field, FieldSpec};
use crate::graph::index_tuples;
use crate::partition::{CharacterVector, LabelledPartition};
use crate::with_field;

use super::{base_ranks, OperatorSpec, RefineError};

/// Decides `χ ~sol ξ` over the prime field of the given characteristic.
pub fn sol_equiv(chi: &CharacterVector, xi: &CharacterVector, field: FieldSpec) -> Result<bool, RefineError> {
    if chi.dim() != xi.dim() {
        return Err(RefineError::ShapeMismatch(chi.dim(), xi.dim()));
    }
    if chi.cells() == xi.cells() {
        return Ok(true);
    }
    Ok(with_field!(field, f => sol_equiv_in(&f, chi, xi)))
}

/// Invariant of the `~sol` class: for every pair of colors, the sum of the
/// entries of `χ_σ χ_τ`, together with the number of ones of each `χ_σ`,
/// reduced in the field. Any admissible `M` fixes `1` on both sides, so
/// `1ᵀ χ_σ χ_τ 1 = 1ᵀ ξ_σ ξ_τ 1`.
pub(crate) fn sol_fingerprint(chi: &CharacterVector, field: FieldSpec) -> Vec<(u32, u32, i64)> {
    let n = chi.dim();
    let reduce = |v: i64| match field.characteristic() {
        0 => v,
        p => v.rem_euclid(p as i64),
    };
    let mut acc: HashMap<(u32, u32), i64> = HashMap::new();
    let mut col: HashMap<u32, i64> = HashMap::new();
    let mut row: HashMap<u32, i64> = HashMap::new();
    for c in 0..n {
        col.clear();
        row.clear();
        for a in 0..n {
            *col.entry(chi.color_at(a, c)).or_default() += 1;
            *row.entry(chi.color_at(c, a)).or_default() += 1;
        }
        for (&s, &x) in &col {
            *acc.entry((s, u32::MAX)).or_default() += x;
            for (&t, &y) in &row {
                *acc.entry((s, t)).or_default() += x * y;
            }
        }
    }
    let mut out: Vec<(u32, u32, i64)> =
        acc.into_iter().map(|((s, t), v)| (s, t, reduce(v))).filter(|&(_, _, v)| v != 0).collect();
    out.sort_unstable();
    out
}

fn sol_equiv_in<F: Field>(f: &F, chi: &CharacterVector, xi: &CharacterVector) -> bool {
    if sol_fingerprint(chi, f.spec()) != sol_fingerprint(xi, f.spec()) {
        return false;
    }
    let colors: BTreeSet<u32> = chi.cells().iter().chain(xi.cells()).copied().collect();

    let n = chi.dim();
    let var = |a: usize, b: usize| a * n + b;
    // Rows of χ_σ and columns of ξ_σ as index lists.
    let mut chi_rows: HashMap<u32, Vec<Vec<usize>>> = HashMap::new();
    let mut xi_cols: HashMap<u32, Vec<Vec<usize>>> = HashMap::new();
    for a in 0..n {
        for c in 0..n {
            chi_rows.entry(chi.color_at(a, c)).or_insert_with(|| vec![Vec::new(); n])[a].push(c);
            xi_cols.entry(xi.color_at(a, c)).or_insert_with(|| vec![Vec::new(); n])[c].push(a);
        }
    }
    let empty = vec![Vec::new(); n];
    let one = f.one();
    let minus_one = f.neg(&one);
    let mut eqs: Vec<(SparseVec<F::Elem>, F::Elem)> = Vec::new();
    for s in colors {
        let rows = chi_rows.get(&s).unwrap_or(&empty);
        let cols = xi_cols.get(&s).unwrap_or(&empty);
        for a in 0..n {
            for b in 0..n {
                if rows[a].is_empty() && cols[b].is_empty() {
                    continue;
                }
                // (χ_σ M)_{ab} - (M ξ_σ)_{ab} = Σ_c χ[a][c] M[c][b] - Σ_c M[a][c] ξ[c][b]
                let mut e: Vec<(usize, F::Elem)> = rows[a].iter().map(|&c| (var(c, b), one.clone())).collect();
                e.extend(cols[b].iter().map(|&c| (var(a, c), minus_one.clone())));
                let v = SparseVec::from_entries(f, e);
                if !v.is_empty() {
                    eqs.push((v, f.zero()));
                }
            }
        }
    }
    for a in 0..n {
        eqs.push((SparseVec::from_entries(f, (0..n).map(|b| (var(a, b), one.clone())).collect()), one.clone()));
        eqs.push((SparseVec::from_entries(f, (0..n).map(|b| (var(b, a), one.clone())).collect()), one.clone()));
    }
    solve_sparse_feasible(f, n * n, eqs).is_some()
}

fn check_sol_params(gamma: &LabelledPartition, k: usize, r: usize, field: FieldSpec) -> Result<(), RefineError> {
    OperatorSpec::sol(k, r, field)?;
    if gamma.k() != k {
        return Err(RefineError::BadParameters(format!("partition width {} but k = {k}", gamma.k())));
    }
    if !gamma.is_invariant() {
        return Err(RefineError::NotInvariant);
    }
    Ok(())
}

/// For one index tuple: an id per tuple such that two tuples share an id
/// iff their character vectors are `~sol`. The vector depends only on the
/// base, so each distinct cell pattern is classified once, by comparison
/// with the representatives sharing its fingerprint.
fn sol_classes(gamma: &LabelledPartition, i: &[usize], field: FieldSpec) -> Result<Vec<u32>, RefineError> {
    let idx = gamma.tuple_index();
    let bases = base_ranks(&idx, i);
    let mut reps: HashMap<Vec<(u32, u32, i64)>, Vec<(u32, CharacterVector)>> = HashMap::new();
    let mut next_id = 0u32;
    let mut by_base: HashMap<usize, u32> = HashMap::new();
    let mut by_cells: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut out = Vec::with_capacity(gamma.size());
    for t in 0..gamma.size() {
        if let Some(&id) = by_base.get(&bases[t]) {
            out.push(id);
            continue;
        }
        let cv = gamma.character_vector(i, &idx.unrank(t))?;
        let id = match by_cells.get(cv.cells()) {
            Some(&id) => id,
            None => {
                let cells = cv.cells().to_vec();
                let list = reps.entry(sol_fingerprint(&cv, field)).or_default();
                let mut found = None;
                for (id, rep) in list.iter() {
                    if sol_equiv(rep, &cv, field)? {
                        found = Some(*id);
                        break;
                    }
                }
                let id = found.unwrap_or_else(|| {
                    next_id += 1;
                    list.push((next_id - 1, cv));
                    next_id - 1
                });
                by_cells.insert(cells, id);
                id
            }
        };
        by_base.insert(bases[t], id);
        out.push(id);
    }
    Ok(out)
}

/// `Sol_{k,r}`: the new color is the old color together with the
/// `~sol`-class of the `(i, v)`-character vector for every `i ∈ [k]^{(2r)}`.
pub fn sol_step(
    gamma: &LabelledPartition,
    k: usize,
    r: usize,
    field: FieldSpec,
) -> Result<LabelledPartition, RefineError> {
    check_sol_params(gamma, k, r, field)?;
    let per_i: Vec<Vec<u32>> =
        index_tuples(k, 2 * r).iter().map(|i| sol_classes(gamma, i, field)).collect::<Result<_, _>>()?;
    let keys: Vec<Vec<u32>> = (0..gamma.size())
        .map(|t| std::iter::once(gamma.color(t)).chain(per_i.iter().map(|c| c[t])).collect())
        .collect();
    Ok(LabelledPartition::from_keys_first_occurrence(k, gamma.n(), keys))
}

/// `Sol_k`: product of `Sol_{k,r}` over `r = 1..=⌊k/2⌋`.
pub fn sol_combined_step(
    gamma: &LabelledPartition,
    k: usize,
    field: FieldSpec,
) -> Result<LabelledPartition, RefineError> {
    OperatorSpec::sol_combined(k, field)?;
    let parts: Vec<LabelledPartition> = (1..=k / 2).map(|r| sol_step(gamma, k, r, field)).collect::<Result<_, _>>()?;
    let refs: Vec<&LabelledPartition> = parts.iter().collect();
    Ok(LabelledPartition::product(&refs)?)
}

/// Whether every pair of same-colored tuples has `~sol` character vectors
/// for every `i`. Each tuple is compared with the first tuple of its class,
/// which decides all pairs because `~sol` is an equivalence relation.
pub fn is_sol_stable(gamma: &LabelledPartition, k: usize, r: usize, field: FieldSpec) -> Result<bool, RefineError> {
    check_sol_params(gamma, k, r, field)?;
    let idx = gamma.tuple_index();
    for i in index_tuples(k, 2 * r) {
        let bases = base_ranks(&idx, &i);
        let mut first: Vec<Option<(usize, CharacterVector)>> = vec![None; gamma.num_classes()];
        for t in 0..gamma.size() {
            let slot = &mut first[gamma.color(t) as usize];
            match slot {
                None => *slot = Some((bases[t], gamma.character_vector(&i, &idx.unrank(t))?)),
                Some((b, _)) if *b == bases[t] => {}
                Some((_, rep)) => {
                    let cv = gamma.character_vector(&i, &idx.unrank(t))?;
                    if !sol_equiv(rep, &cv, field)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}
