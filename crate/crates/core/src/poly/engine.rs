//! Degree-bounded refutation engines.
//!
//! Every engine works in the multilinear quotient and, further, modulo the
//! monomials that contain a forbidden variable or a forbidden pair (an A3
//! axiom or a custom single-term axiom). Each such monomial of degree at
//! most `k` is itself a degree-`k` Nullstellensatz generator, so dropping
//! those coordinates changes no answer. What remains is indexed by the
//! "good" monomials: partial local isomorphisms of size at most `k`.

use std::ops::Range;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use super::{merge_union, AxiomRef, AxiomSet, Monomial, PolyError, Polynomial, VarId};
use crate::exactla::{RrefBasis, SparseVec};
use crate::field::{Field, FieldElem, FieldSpec};
use crate::with_field;

/// Monomials are packed 16 bits per variable into a `u128` key.
pub const MAX_ENGINE_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    Nc,
    Mc,
    Pc,
}

impl Calculus {
    pub const ALL: [Calculus; 3] = [Calculus::Nc, Calculus::Mc, Calculus::Pc];

    pub fn name(self) -> &'static str {
        match self {
            Calculus::Nc => "nc",
            Calculus::Mc => "mc",
            Calculus::Pc => "pc",
        }
    }
}

impl std::str::FromStr for Calculus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "nc" => Ok(Calculus::Nc),
            "mc" => Ok(Calculus::Mc),
            "pc" => Ok(Calculus::Pc),
            _ => Err(format!("unknown calculus {s:?} (expected nc, mc or pc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "REFUTE")]
    Refute,
    #[serde(rename = "NOREFUTE")]
    NoRefute,
}

impl Verdict {
    pub fn is_refute(self) -> bool {
        self == Verdict::Refute
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineOptions {
    /// Cap on the number of good monomials of degree at most `k`.
    pub max_monomials: Option<usize>,
    /// Cap on the rank of the span.
    pub max_rows: Option<usize>,
    /// Produce and verify a certificate on NC refutations.
    pub witness: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineStats {
    pub monomials: usize,
    pub generators: usize,
    pub rank: usize,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTerm {
    pub coefficient: FieldElem,
    pub multiplier: Monomial,
    pub axiom: AxiomRef,
}

/// A Nullstellensatz certificate: `sum coefficient * X_multiplier * axiom = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Witness {
    pub terms: Vec<WitnessTerm>,
}

impl Witness {
    /// The re-expanded sum in the multilinear quotient.
    pub fn expand(&self, ax: &AxiomSet, field: FieldSpec) -> Polynomial<FieldElem> {
        let mut acc = Polynomial::zero();
        for t in &self.terms {
            acc.add_scaled_product(&field, &t.coefficient, &t.multiplier, &ax.polynomial(&field, t.axiom));
        }
        acc
    }

    /// Checks that every term uses a genuine axiom within degree `k` and
    /// that the sum re-expands to exactly 1.
    pub fn verify(&self, ax: &AxiomSet, field: FieldSpec, k: usize) -> bool {
        let genuine = |r: AxiomRef| match r {
            AxiomRef::Explicit(i) => i < ax.explicit().len(),
            AxiomRef::A3(a, b) => a <= b && (b as usize) < ax.num_vars() && !ax.local_iso(a, b),
        };
        self.terms.iter().all(|t| t.coefficient.field() == field && genuine(t.axiom))
            && self.degree(ax, field) <= k
            && self.expand(ax, field).is_one(&field)
    }

    /// Largest `|multiplier| + deg(axiom)` over the terms.
    pub fn degree(&self, ax: &AxiomSet, field: FieldSpec) -> usize {
        self.terms.iter().map(|t| t.multiplier.degree() + ax.polynomial(&field, t.axiom).degree()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refutation {
    pub calculus: Calculus,
    pub degree: usize,
    pub field: FieldSpec,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub stats: EngineStats,
}

pub fn nc_refute(ax: &AxiomSet, k: usize, field: FieldSpec, opts: &EngineOptions) -> Result<Refutation, PolyError> {
    refute(Calculus::Nc, ax, k, field, opts)
}

pub fn mc_refute(ax: &AxiomSet, k: usize, field: FieldSpec, opts: &EngineOptions) -> Result<Refutation, PolyError> {
    refute(Calculus::Mc, ax, k, field, opts)
}

pub fn pc_refute(ax: &AxiomSet, k: usize, field: FieldSpec, opts: &EngineOptions) -> Result<Refutation, PolyError> {
    refute(Calculus::Pc, ax, k, field, opts)
}

/// Decides whether `ax` has a degree-`k` refutation in the given calculus.
pub fn refute(
    calc: Calculus,
    ax: &AxiomSet,
    k: usize,
    field: FieldSpec,
    opts: &EngineOptions,
) -> Result<Refutation, PolyError> {
    with_field!(field, f => run(calc, ax, k, f, opts))
}

fn run<F: Field>(calc: Calculus, ax: &AxiomSet, k: usize, f: F, opts: &EngineOptions) -> Result<Refutation, PolyError> {
    let prep = Prepared::new(ax, k, f.clone(), opts)?;
    let witness_wanted = opts.witness && calc == Calculus::Nc;
    let mut state = State::new(&prep, calc, witness_wanted);
    let all: Vec<usize> = (0..prep.axioms.len()).collect();
    let refuted = match prep.contradiction {
        Some(_) => true,
        None => {
            state.add_generators(&prep, &all, opts)?;
            state.saturate(&prep, opts)?;
            state.refuted(&prep)
        }
    };
    let witness = if refuted && witness_wanted {
        let w = prep.witness(ax, &state)?;
        if !w.verify(ax, f.spec(), k) {
            return Err(PolyError::WitnessInvalid);
        }
        Some(w)
    } else {
        None
    };
    state.stats.rank = state.basis.rank();
    Ok(Refutation {
        calculus: calc,
        degree: k,
        field: f.spec(),
        verdict: if refuted { Verdict::Refute } else { Verdict::NoRefute },
        witness,
        stats: state.stats,
    })
}

fn pack(vars: &[VarId]) -> u128 {
    vars.iter().fold(0u128, |acc, &x| acc << 16 | (x as u128 + 1))
}

/// The good monomials of degree at most `k`, as columns ordered by
/// degree (highest first) and then lexicographically. The constant is the
/// last column.
#[derive(Debug)]
pub(crate) struct Universe {
    k: usize,
    monos: Vec<Vec<VarId>>,
    index: FxHashMap<u128, u32>,
    good_vars: Vec<VarId>,
    /// Sorted compatible good partners of each variable.
    compat: Vec<Vec<VarId>>,
    by_degree: Vec<Range<usize>>,
}

impl Universe {
    fn build(
        ax: &AxiomSet,
        k: usize,
        singles: &FxHashSet<VarId>,
        pairs: &FxHashSet<(VarId, VarId)>,
        max_monomials: Option<usize>,
    ) -> Result<Self, PolyError> {
        let nv = ax.num_vars();
        let good_vars: Vec<VarId> = (0..nv as VarId).filter(|&x| ax.local_iso(x, x) && !singles.contains(&x)).collect();
        let mut compat = vec![Vec::new(); nv];
        for (i, &a) in good_vars.iter().enumerate() {
            for &b in &good_vars[i + 1..] {
                if ax.local_iso(a, b) && !pairs.contains(&(a, b)) {
                    compat[a as usize].push(b);
                    compat[b as usize].push(a);
                }
            }
        }
        for c in compat.iter_mut() {
            c.sort_unstable();
        }
        let limit = max_monomials.unwrap_or(usize::MAX);
        let mut monos: Vec<Vec<VarId>> = vec![Vec::new()];
        let mut stack: Vec<VarId> = Vec::new();
        fn dfs(
            compat: &[Vec<VarId>],
            cands: &[VarId],
            k: usize,
            stack: &mut Vec<VarId>,
            out: &mut Vec<Vec<VarId>>,
            limit: usize,
        ) -> Result<(), PolyError> {
            for (i, &x) in cands.iter().enumerate() {
                stack.push(x);
                out.push(stack.clone());
                if out.len() > limit {
                    return Err(PolyError::GuardExceeded { what: "monomials", count: out.len(), limit });
                }
                if stack.len() < k {
                    let next: Vec<VarId> = cands[i + 1..]
                        .iter()
                        .copied()
                        .filter(|y| compat[x as usize].binary_search(y).is_ok())
                        .collect();
                    dfs(compat, &next, k, stack, out, limit)?;
                }
                stack.pop();
            }
            Ok(())
        }
        if k > 0 {
            dfs(&compat, &good_vars, k, &mut stack, &mut monos, limit)?;
        }
        monos.sort_unstable_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let index = monos.iter().enumerate().map(|(c, m)| (pack(m), c as u32)).collect();
        let mut by_degree = vec![0..0; k + 1];
        let mut start = 0;
        while start < monos.len() {
            let d = monos[start].len();
            let end = start + monos[start..].iter().take_while(|m| m.len() == d).count();
            by_degree[d] = start..end;
            start = end;
        }
        Ok(Universe { k, monos, index, good_vars, compat, by_degree })
    }

    fn len(&self) -> usize {
        self.monos.len()
    }

    fn const_col(&self) -> usize {
        self.monos.len() - 1
    }

    fn col(&self, vars: &[VarId]) -> Option<usize> {
        if vars.len() > self.k {
            return None;
        }
        self.index.get(&pack(vars)).map(|&c| c as usize)
    }

    fn degree(&self, col: usize) -> usize {
        self.monos[col].len()
    }

    /// Columns of the good monomials of degree at most `d`.
    fn up_to_degree(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        (0..=d.min(self.k)).rev().flat_map(move |e| self.by_degree[e].clone())
    }

    fn compatible(&self, a: VarId, b: VarId) -> bool {
        self.compat[a as usize].binary_search(&b).is_ok()
    }

    /// Good strict supersets of column `col` with degree at most `k`.
    fn supersets(&self, col: usize, out: &mut Vec<usize>) {
        let base = &self.monos[col];
        let cands: Vec<VarId> = match base.first() {
            None => self.good_vars.clone(),
            Some(&a) => self.compat[a as usize]
                .iter()
                .copied()
                .filter(|&y| base[1..].iter().all(|&b| b == y || self.compatible(b, y)) && !base.contains(&y))
                .collect(),
        };
        let mut extra = Vec::new();
        self.extend(base, &cands, &mut extra, out);
    }

    fn extend(&self, base: &[VarId], cands: &[VarId], extra: &mut Vec<VarId>, out: &mut Vec<usize>) {
        for (i, &x) in cands.iter().enumerate() {
            extra.push(x);
            let mut sorted = extra.clone();
            sorted.sort_unstable();
            let vars = merge_union(base, &sorted);
            out.push(self.col(&vars).expect("pairwise compatible variables form a good monomial"));
            if vars.len() < self.k {
                let next: Vec<VarId> = cands[i + 1..].iter().copied().filter(|&y| self.compatible(x, y)).collect();
                self.extend(base, &next, extra, out);
            }
            extra.pop();
        }
    }
}

/// How a forbidden variable or pair is justified, with the coefficient
/// of its single term.
#[derive(Debug, Clone)]
struct Cover<E> {
    axiom: AxiomRef,
    coefficient: E,
}

/// Axioms converted to the field and the monomial universe they induce.
#[derive(Debug, Clone)]
pub(crate) struct Prepared<F: Field> {
    field: F,
    k: usize,
    universe: Arc<Universe>,
    /// Multi-term axioms: explicit index, terms and degree.
    axioms: Vec<(usize, Vec<(Vec<VarId>, F::Elem)>, usize)>,
    singles: FxHashMap<VarId, Cover<F::Elem>>,
    pairs: FxHashMap<(VarId, VarId), Cover<F::Elem>>,
    /// A nonzero constant axiom: its index and value.
    contradiction: Option<(usize, F::Elem)>,
}

impl<F: Field> Prepared<F> {
    pub(crate) fn new(ax: &AxiomSet, k: usize, f: F, opts: &EngineOptions) -> Result<Self, PolyError> {
        if k > MAX_ENGINE_DEGREE {
            return Err(PolyError::DegreeTooLarge(k));
        }
        let mut needed = if ax.graph().is_some_and(|g| g.n() >= 2) { 2 } else { 0 };
        let mut axioms = Vec::new();
        let mut singles = FxHashMap::default();
        let mut pairs = FxHashMap::default();
        let mut contradiction = None;
        for (i, a) in ax.explicit().iter().enumerate() {
            let p = a.poly.to_field(&f);
            if p.is_zero() {
                continue;
            }
            let d = p.degree();
            needed = needed.max(d);
            let terms: Vec<(Vec<VarId>, F::Elem)> = p.terms().map(|(m, c)| (m.vars().to_vec(), c.clone())).collect();
            match (terms.len(), d) {
                (1, 0) => contradiction = contradiction.or(Some((i, terms[0].1.clone()))),
                (1, 1) => {
                    singles
                        .entry(terms[0].0[0])
                        .or_insert(Cover { axiom: AxiomRef::Explicit(i), coefficient: terms[0].1.clone() });
                }
                (1, 2) => {
                    let (x, y) = (terms[0].0[0], terms[0].0[1]);
                    pairs
                        .entry((x, y))
                        .or_insert(Cover { axiom: AxiomRef::Explicit(i), coefficient: terms[0].1.clone() });
                }
                _ => axioms.push((i, terms, d)),
            }
        }
        if contradiction.is_none() && k < needed {
            return Err(PolyError::DegreeTooSmall { degree: k, needed });
        }
        let single_set: FxHashSet<VarId> = singles.keys().copied().collect();
        let pair_set: FxHashSet<(VarId, VarId)> = pairs.keys().copied().collect();
        let universe = Universe::build(ax, k, &single_set, &pair_set, opts.max_monomials)?;
        Ok(Prepared { field: f, k, universe: Arc::new(universe), axioms, singles, pairs, contradiction })
    }

    /// Projection of `X_multiplier * terms` onto the good monomials.
    fn product(&self, multiplier: &[VarId], terms: &[(Vec<VarId>, F::Elem)]) -> SparseVec<F::Elem> {
        let mut e = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            if let Some(col) = self.universe.col(&merge_union(multiplier, m)) {
                e.push((col, c.clone()));
            }
        }
        SparseVec::from_entries(&self.field, e)
    }

    /// Finds an axiom whose single monomial divides the bad monomial `m`.
    fn cover(&self, ax: &AxiomSet, m: &Monomial) -> (AxiomRef, F::Elem, Vec<VarId>) {
        let one = self.field.one();
        let vars = m.vars();
        for &x in vars {
            if let Some(c) = self.singles.get(&x) {
                return (c.axiom, c.coefficient.clone(), vec![x]);
            }
            if !ax.local_iso(x, x) {
                return (AxiomRef::A3(x, x), one, vec![x]);
            }
        }
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                if let Some(c) = self.pairs.get(&(a, b)) {
                    return (c.axiom, c.coefficient.clone(), vec![a, b]);
                }
                if !ax.local_iso(a, b) {
                    return (AxiomRef::A3(a, b), one, vec![a, b]);
                }
            }
        }
        unreachable!("monomial {m} outside the universe is not forbidden")
    }

    /// Certificate for `1`, from the generator combination found by the
    /// basis plus explicit terms for the dropped monomials.
    fn witness(&self, ax: &AxiomSet, state: &State<F>) -> Result<Witness, PolyError> {
        let f = &self.field;
        let mut terms: Vec<(F::Elem, Monomial, AxiomRef)> = Vec::new();
        if let Some((i, c)) = &self.contradiction {
            terms.push((f.inv(c), Monomial::one(), AxiomRef::Explicit(*i)));
        } else {
            let target = SparseVec::unit(f, self.universe.const_col());
            let coefs = state.basis.express(&target).ok_or(PolyError::WitnessInvalid)?;
            let mut acc = Polynomial::zero();
            for (g, c) in coefs {
                let (axiom, mcol) = state.gens[g];
                let multiplier = Monomial::new(self.universe.monos[mcol as usize].clone());
                let poly = ax.polynomial(f, AxiomRef::Explicit(axiom as usize));
                acc.add_scaled_product(f, &c, &multiplier, &poly);
                terms.push((c, multiplier, AxiomRef::Explicit(axiom as usize)));
            }
            let residue: Vec<(Monomial, F::Elem)> =
                acc.terms().filter(|(m, _)| !m.is_one()).map(|(m, c)| (m.clone(), c.clone())).collect();
            for (m, r) in residue {
                let (axiom, lead, vars) = self.cover(ax, &m);
                let coef = f.neg(&f.mul(&r, &f.inv(&lead)));
                terms.push((coef, m.without(&vars), axiom));
            }
        }
        Ok(Witness {
            terms: terms
                .into_iter()
                .map(|(c, multiplier, axiom)| WitnessTerm { coefficient: f.to_elem(&c), multiplier, axiom })
                .collect(),
        })
    }
}

/// The span under construction and the per-calculus closure state.
#[derive(Debug, Clone)]
pub(crate) struct State<F: Field> {
    calc: Calculus,
    basis: RrefBasis<F>,
    tracked: bool,
    /// Generator id -> (axiom index, multiplier column), with history only.
    gens: Vec<(u32, u32)>,
    /// Monomial calculus: columns already closed upward.
    closed: Vec<bool>,
    /// Polynomial calculus: span of the low-degree vectors already multiplied.
    processed: Option<RrefBasis<F>>,
    stats: EngineStats,
}

impl<F: Field> State<F> {
    pub(crate) fn new(prep: &Prepared<F>, calc: Calculus, history: bool) -> Self {
        let ncols = prep.universe.len();
        let basis = if history {
            RrefBasis::with_history(prep.field.clone(), ncols)
        } else {
            RrefBasis::new(prep.field.clone(), ncols)
        };
        State {
            calc,
            basis,
            tracked: history,
            gens: Vec::new(),
            closed: if calc == Calculus::Mc { vec![false; ncols] } else { Vec::new() },
            processed: (calc == Calculus::Pc).then(|| RrefBasis::new(prep.field.clone(), ncols)),
            stats: EngineStats { monomials: ncols, ..EngineStats::default() },
        }
    }

    pub(crate) fn refuted(&self, prep: &Prepared<F>) -> bool {
        prep.contradiction.is_some() || self.basis.contains_unit(prep.universe.const_col())
    }

    fn insert(&mut self, v: &SparseVec<F::Elem>, opts: &EngineOptions) -> Result<(), PolyError> {
        self.basis.insert(v);
        self.check_rows(opts)
    }

    fn check_rows(&self, opts: &EngineOptions) -> Result<(), PolyError> {
        match opts.max_rows {
            Some(limit) if self.basis.rank() > limit => {
                Err(PolyError::GuardExceeded { what: "basis rows", count: self.basis.rank(), limit })
            }
            _ => Ok(()),
        }
    }

    /// Inserts every `X_A * f` of degree at most `k` for the listed axioms.
    pub(crate) fn add_generators(
        &mut self,
        prep: &Prepared<F>,
        which: &[usize],
        opts: &EngineOptions,
    ) -> Result<(), PolyError> {
        let axioms: Vec<_> = which.iter().map(|&i| &prep.axioms[i]).collect();
        self.add_generator_terms(prep, axioms.iter().map(|a| (a.0, &a.1, a.2)), opts)
    }

    pub(crate) fn add_generator_terms<'t>(
        &mut self,
        prep: &Prepared<F>,
        axioms: impl Iterator<Item = (usize, &'t Vec<(Vec<VarId>, F::Elem)>, usize)>,
        opts: &EngineOptions,
    ) -> Result<(), PolyError>
    where
        F::Elem: 't,
    {
        let u = &prep.universe;
        for (idx, terms, d) in axioms {
            if d > prep.k {
                continue;
            }
            for col in u.up_to_degree(prep.k - d) {
                let v = prep.product(&u.monos[col], terms);
                if v.is_empty() {
                    continue;
                }
                self.stats.generators += 1;
                if self.tracked {
                    self.basis.insert_tracked(&v, self.gens.len());
                    self.gens.push((idx as u32, col as u32));
                    self.check_rows(opts)?;
                } else {
                    self.insert(&v, opts)?;
                }
            }
        }
        Ok(())
    }

    /// The closure of the prepared axioms alone, for reuse across targets.
    pub(crate) fn closure(prep: &Prepared<F>, calc: Calculus, opts: &EngineOptions) -> Result<Self, PolyError> {
        let mut state = State::new(prep, calc, false);
        if prep.contradiction.is_none() {
            let all: Vec<usize> = (0..prep.axioms.len()).collect();
            state.add_generators(prep, &all, opts)?;
            state.saturate(prep, opts)?;
        }
        Ok(state)
    }

    /// Whether the monomial over `vars` lies in the closure. Monomials
    /// outside the pruned universe are derivable exactly when their degree
    /// is within bounds, since each contains a forbidden single or pair.
    pub(crate) fn derives_monomial(&self, prep: &Prepared<F>, vars: &[VarId]) -> bool {
        let mut m = vars.to_vec();
        m.sort_unstable();
        m.dedup();
        if m.len() > prep.k {
            return false;
        }
        match prep.universe.col(&m) {
            Some(c) => self.refuted(prep) || self.basis.contains_unit(c),
            None => true,
        }
    }

    /// Whether adding `x - 1` for each listed variable makes the closure
    /// contain 1. Leaves `self` untouched.
    pub(crate) fn refutes_with_units(
        &self,
        prep: &Prepared<F>,
        vars: &[VarId],
        opts: &EngineOptions,
    ) -> Result<bool, PolyError> {
        if self.refuted(prep) {
            return Ok(true);
        }
        let f = &prep.field;
        let mut state = self.clone();
        let axioms: Vec<Vec<(Vec<VarId>, F::Elem)>> =
            vars.iter().map(|&x| vec![(vec![x], f.one()), (vec![], f.neg(&f.one()))]).collect();
        state.add_generator_terms(prep, axioms.iter().map(|t| (usize::MAX, t, 1)), opts)?;
        state.saturate(prep, opts)?;
        Ok(state.refuted(prep))
    }

    /// Runs the calculus-specific closure until the span is stable or
    /// contains 1.
    pub(crate) fn saturate(&mut self, prep: &Prepared<F>, opts: &EngineOptions) -> Result<(), PolyError> {
        match self.calc {
            Calculus::Nc => Ok(()),
            Calculus::Mc => self.saturate_mc(prep, opts),
            Calculus::Pc => self.saturate_pc(prep, opts),
        }
    }

    fn saturate_mc(&mut self, prep: &Prepared<F>, opts: &EngineOptions) -> Result<(), PolyError> {
        let u = &prep.universe;
        let mut supers = Vec::new();
        loop {
            if self.refuted(prep) {
                return Ok(());
            }
            self.stats.rounds += 1;
            let found: Vec<usize> = self
                .basis
                .rows()
                .filter(|r| r.len() == 1)
                .filter_map(|r| r.leading())
                .filter(|&c| u.degree(c) < prep.k && !self.closed[c])
                .collect();
            if found.is_empty() {
                return Ok(());
            }
            for a in found {
                self.closed[a] = true;
                supers.clear();
                u.supersets(a, &mut supers);
                for &b in &supers {
                    if !self.basis.contains_unit(b) {
                        let unit = SparseVec::unit(&prep.field, b);
                        self.insert(&unit, opts)?;
                    }
                }
            }
        }
    }

    fn saturate_pc(&mut self, prep: &Prepared<F>, opts: &EngineOptions) -> Result<(), PolyError> {
        let u = &prep.universe;
        let f = &prep.field;
        loop {
            if self.refuted(prep) {
                return Ok(());
            }
            self.stats.rounds += 1;
            // Rows led by a low-degree monomial span the low-degree part,
            // since every later column has no larger degree.
            let processed = self.processed.as_mut().expect("polynomial calculus state");
            let fresh: Vec<SparseVec<F::Elem>> = self
                .basis
                .rows()
                .filter(|r| r.leading().is_some_and(|c| u.degree(c) < prep.k))
                .filter(|r| !processed.contains(r))
                .cloned()
                .collect();
            if fresh.is_empty() {
                return Ok(());
            }
            for r in fresh {
                self.processed.as_mut().expect("polynomial calculus state").insert(&r);
                for &x in &u.good_vars {
                    let mut e = Vec::with_capacity(r.len());
                    for (col, c) in r.entries() {
                        if let Some(b) = u.col(&merge_union(&u.monos[*col], &[x])) {
                            e.push((b, c.clone()));
                        }
                    }
                    let v = SparseVec::from_entries(f, e);
                    if !v.is_empty() {
                        self.insert(&v, opts)?;
                    }
                }
                if self.refuted(prep) {
                    return Ok(());
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ColoredGraph;
    use crate::poly::IntPolynomial;

    fn opts() -> EngineOptions {
        EngineOptions { witness: true, ..EngineOptions::default() }
    }

    fn path() -> ColoredGraph {
        ColoredGraph::undirected(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    #[test]
    fn constant_axiom_refutes_at_degree_zero() {
        let ax = AxiomSet::custom(1, vec![IntPolynomial::new(vec![(vec![], 1)])]).unwrap();
        for calc in Calculus::ALL {
            let r = refute(calc, &ax, 0, FieldSpec::RATIONALS, &opts()).unwrap();
            assert_eq!(r.verdict, Verdict::Refute);
        }
        let w = nc_refute(&ax, 0, FieldSpec::RATIONALS, &opts()).unwrap().witness.unwrap();
        assert!(w.verify(&ax, FieldSpec::RATIONALS, 0));
    }

    #[test]
    fn satisfiable_single_variable() {
        let ax = AxiomSet::custom(1, vec![IntPolynomial::new(vec![(vec![0], 1), (vec![], -1)])]).unwrap();
        for k in 1..=4 {
            for calc in Calculus::ALL {
                assert_eq!(
                    refute(calc, &ax, k, FieldSpec::prime(2).unwrap(), &opts()).unwrap().verdict,
                    Verdict::NoRefute
                );
            }
        }
    }

    #[test]
    fn conflicting_linear_axioms() {
        // x - 1 and x together: refuted at degree 1 in every calculus.
        let ax = AxiomSet::custom(
            1,
            vec![IntPolynomial::new(vec![(vec![0], 1), (vec![], -1)]), IntPolynomial::new(vec![(vec![0], 1)])],
        )
        .unwrap();
        let r = nc_refute(&ax, 1, FieldSpec::prime(3).unwrap(), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Refute);
        assert!(r.witness.unwrap().verify(&ax, FieldSpec::prime(3).unwrap(), 1));
    }

    #[test]
    fn identity_map_is_never_refuted() {
        let g = path();
        for k in 2..=4 {
            let ax = AxiomSet::ax_iso(&g, &[0, 1], &[0, 1]).unwrap();
            for calc in Calculus::ALL {
                let r = refute(calc, &ax, k, FieldSpec::RATIONALS, &opts()).unwrap();
                assert_eq!(r.verdict, Verdict::NoRefute, "{calc:?} at {k}");
            }
        }
    }

    #[test]
    fn end_versus_middle_of_path() {
        let g = path();
        let ax = AxiomSet::ax_iso(&g, &[0], &[1]).unwrap();
        let nc = nc_refute(&ax, 2, FieldSpec::RATIONALS, &opts()).unwrap();
        let mc = mc_refute(&ax, 2, FieldSpec::RATIONALS, &opts()).unwrap();
        let pc = pc_refute(&ax, 2, FieldSpec::RATIONALS, &opts()).unwrap();
        assert!(!nc.verdict.is_refute() || mc.verdict.is_refute());
        assert!(!mc.verdict.is_refute() || pc.verdict.is_refute());
        assert_eq!(pc.verdict, Verdict::Refute);
        if let Some(w) = nc.witness {
            assert!(w.verify(&ax, FieldSpec::RATIONALS, 2));
        }
    }

    #[test]
    fn mismatched_vertex_colors_refute_immediately() {
        let mut b = crate::graph::GraphBuilder::new("non-edge", "plain");
        b.add_vertex("a").unwrap();
        b.add_vertex("b").unwrap();
        b.set_loop("b", "red").unwrap();
        let g = b.build().unwrap();
        let ax = AxiomSet::ax_iso(&g, &[0], &[1]).unwrap();
        let r = nc_refute(&ax, 2, FieldSpec::prime(2).unwrap(), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Refute);
        assert!(r.witness.unwrap().verify(&ax, FieldSpec::prime(2).unwrap(), 2));
    }

    #[test]
    fn degree_below_axioms_rejected() {
        let ax = AxiomSet::ax_graph(&path()).unwrap();
        assert_eq!(
            nc_refute(&ax, 1, FieldSpec::RATIONALS, &opts()).unwrap_err(),
            PolyError::DegreeTooSmall { degree: 1, needed: 2 }
        );
    }

    #[test]
    fn monomial_guard() {
        let ax = AxiomSet::ax_graph(&path()).unwrap();
        let o = EngineOptions { max_monomials: Some(5), ..EngineOptions::default() };
        assert!(matches!(
            mc_refute(&ax, 2, FieldSpec::RATIONALS, &o),
            Err(PolyError::GuardExceeded { what: "monomials", .. })
        ));
    }

    #[test]
    fn universe_counts_partial_isomorphisms() {
        // All vertices share a color, so every single map is good; pairs
        // must be partial isomorphisms.
        let g = path();
        let ax = AxiomSet::ax_graph(&g).unwrap();
        let u = Universe::build(&ax, 2, &FxHashSet::default(), &FxHashSet::default(), None).unwrap();
        assert_eq!(u.by_degree[1].len(), 9);
        assert_eq!(u.const_col(), u.len() - 1);
        for c in u.by_degree[2].clone() {
            let m = &u.monos[c];
            assert!(ax.local_iso(m[0], m[1]));
        }
    }
}
