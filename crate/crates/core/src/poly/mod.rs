//! Multilinear polynomials over the variables `x_{uv}`, the isomorphism
//! axioms, and degree-bounded Nullstellensatz, monomial and polynomial
//! calculus refutation engines.

mod axioms;
mod engine;
mod equiv;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use axioms::{Axiom, AxiomRef, AxiomSet, AxiomTag};
pub use engine::{
    mc_refute, nc_refute, pc_refute, refute, Calculus, EngineOptions, EngineStats, Refutation, Verdict, Witness,
    WitnessTerm, MAX_ENGINE_DEGREE,
};
pub use equiv::{calculus_equiv_partition, derivable_pin_subset, EquivOptions};

use crate::field::Field;
use crate::graph::GraphError;

/// Index of the variable `x_{uv}` (the map `u -> v`) is `u * n + v`.
pub type VarId = u32;

pub fn var_id(n: usize, u: usize, v: usize) -> VarId {
    debug_assert!(u < n && v < n);
    (u * n + v) as VarId
}

/// The pair `(u, v)` of a variable id.
pub fn var_pair(n: usize, x: VarId) -> (usize, usize) {
    (x as usize / n, x as usize % n)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("degree {degree} is below the axiom degree {needed}")]
    DegreeTooSmall { degree: usize, needed: usize },
    #[error("degree {0} exceeds the supported maximum of {MAX_ENGINE_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("{0} variables exceed the supported maximum of 65535")]
    TooManyVariables(usize),
    #[error("variable {var} outside the {num_vars} variables of the axiom set")]
    UnknownVariable { var: VarId, num_vars: usize },
    #[error("resource guard exceeded: {what} reached {count} (limit {limit})")]
    GuardExceeded { what: &'static str, count: usize, limit: usize },
    #[error("tuples of length {0} and {1} cannot be matched")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("witness failed to re-expand to 1")]
    WitnessInvalid,
}

/// A multilinear monomial: a strictly increasing list of variables. The
/// empty monomial is the constant 1.
///
/// Monomials order by degree, highest first, then lexicographically, so
/// the constant comes last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<VarId>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    /// Multilinear monomial of the given variables; repeats collapse.
    pub fn new(mut vars: Vec<VarId>) -> Self {
        vars.sort_unstable();
        vars.dedup();
        Monomial(vars)
    }

    pub fn var(x: VarId) -> Self {
        Monomial(vec![x])
    }

    pub fn vars(&self) -> &[VarId] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: VarId) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// The multilinear product `self * other`.
    pub fn union(&self, other: &Monomial) -> Monomial {
        Monomial(merge_union(&self.0, &other.0))
    }

    /// `self` without the variables of `other`.
    pub fn without(&self, other: &[VarId]) -> Monomial {
        Monomial(self.0.iter().copied().filter(|x| !other.contains(x)).collect())
    }
}

pub(crate) fn merge_union(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
            j += 1;
        }
    }
    out
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.len().cmp(&self.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "x{x}")?;
        }
        Ok(())
    }
}

/// Sparse multilinear polynomial with coefficients in one field. Zero
/// coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial<E> {
    terms: BTreeMap<Monomial, E>,
}

impl<E: Clone + PartialEq> Polynomial<E> {
    pub fn zero() -> Self {
        Polynomial { terms: BTreeMap::new() }
    }

    pub fn constant<F: Field<Elem = E>>(f: &F, c: E) -> Self {
        Self::from_terms(f, [(Monomial::one(), c)])
    }

    /// Sums the given terms, dropping zeros.
    pub fn from_terms<F: Field<Elem = E>>(f: &F, terms: impl IntoIterator<Item = (Monomial, E)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(f, m, c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &E)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&E> {
        self.terms.get(m)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().next().map_or(0, Monomial::degree)
    }

    pub fn is_one<F: Field<Elem = E>>(&self, f: &F) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::one()).is_some_and(|c| f.is_one(c))
    }

    pub fn add_term<F: Field<Elem = E>>(&mut self, f: &F, m: Monomial, c: E) {
        if f.is_zero(&c) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = f.add(e.get(), &c);
                if f.is_zero(&s) {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// `self += c * X_m * other`, reduced multilinearly.
    pub fn add_scaled_product<F: Field<Elem = E>>(&mut self, f: &F, c: &E, m: &Monomial, other: &Polynomial<E>) {
        for (m2, c2) in &other.terms {
            self.add_term(f, m.union(m2), f.mul(c, c2));
        }
    }

    pub fn add<F: Field<Elem = E>>(&self, f: &F, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled_product(f, &f.one(), &Monomial::one(), other);
        out
    }

    /// Multilinear product.
    pub fn mul<F: Field<Elem = E>>(&self, f: &F, other: &Self) -> Self {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.add_scaled_product(f, c, m, other);
        }
        out
    }

    /// Value at a 0/1 assignment.
    pub fn eval<F: Field<Elem = E>>(&self, f: &F, assignment: impl Fn(VarId) -> bool) -> E {
        let mut acc = f.zero();
        for (m, c) in &self.terms {
            if m.vars().iter().all(|&x| assignment(x)) {
                acc = f.add(&acc, c);
            }
        }
        acc
    }
}

/// Lowers every exponent to 1 and collects terms. Each input term is a
/// coefficient with a list of variables that may repeat.
pub fn multilinear_reduce<F: Field>(
    f: &F,
    terms: impl IntoIterator<Item = (Vec<VarId>, F::Elem)>,
) -> Polynomial<F::Elem> {
    Polynomial::from_terms(f, terms.into_iter().map(|(vars, c)| (Monomial::new(vars), c)))
}

/// A polynomial with integer coefficients whose variable lists may repeat,
/// as axioms are written before multilinear reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    terms: Vec<(Vec<VarId>, i64)>,
}

impl IntPolynomial {
    pub fn new(terms: Vec<(Vec<VarId>, i64)>) -> Self {
        let terms = terms
            .into_iter()
            .map(|(mut v, c)| {
                v.sort_unstable();
                (v, c)
            })
            .collect();
        IntPolynomial { terms }
    }

    pub fn terms(&self) -> &[(Vec<VarId>, i64)] {
        &self.terms
    }

    /// Degree before multilinear reduction.
    pub fn raw_degree(&self) -> usize {
        self.terms.iter().filter(|(_, c)| *c != 0).map(|(v, _)| v.len()).max().unwrap_or(0)
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.terms.iter().flat_map(|(v, _)| v.iter().copied()).max()
    }

    /// Multilinear image over the field.
    pub fn to_field<F: Field>(&self, f: &F) -> Polynomial<F::Elem> {
        multilinear_reduce(f, self.terms.iter().map(|(v, c)| (v.clone(), f.from_i64(*c))))
    }
}
