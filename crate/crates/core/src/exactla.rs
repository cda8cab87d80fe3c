//! Exact linear algebra over a [`Field`]: dense reduced row-echelon form,
//! feasibility of linear systems, and an incrementally maintained sparse
//! RREF basis answering span-membership queries.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::field::Field;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("matrix entries length {len} does not match {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    entries: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn new(rows: usize, cols: usize, entries: Vec<E>) -> Result<Self, LinAlgError> {
        if entries.len() != rows * cols {
            return Err(LinAlgError::BadShape { rows, cols, len: entries.len() });
        }
        Ok(Matrix { rows, cols, entries })
    }

    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Matrix { rows, cols, entries: vec![value; rows * cols] }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<E>>) -> Result<Self, LinAlgError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinAlgError::DimensionMismatch(format!(
                    "row of length {} in a matrix with {cols} columns",
                    r.len()
                )));
            }
            entries.extend(r);
        }
        Ok(Matrix { rows: n, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[E] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &E {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: E) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[E] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<T: Clone>(&self, f: impl Fn(&E) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }
}

impl<E: Clone> Matrix<E> {
    pub fn identity<F: Field<Elem = E>>(field: &F, n: usize) -> Self {
        let mut m = Matrix::filled(n, n, field.zero());
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_i64<F: Field<Elem = E>>(field: &F, cols: usize, rows: &[Vec<i64>]) -> Result<Self, LinAlgError> {
        Matrix::from_rows(cols, rows.iter().map(|r| r.iter().map(|&v| field.from_i64(v)).collect()).collect())
    }
}

/// Output of [`rref`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref<E> {
    pub matrix: Matrix<E>,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Gauss-Jordan elimination. Pivot is the first nonzero entry of each column.
pub fn rref<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Rref<F::Elem> {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !field.is_zero(a.get(i, c))) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.entries.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = field.inv(a.get(r, c));
        for j in 0..cols {
            let v = field.mul(a.get(r, j), &inv);
            a.set(r, j, v);
        }
        for i in 0..rows {
            if i == r || field.is_zero(a.get(i, c)) {
                continue;
            }
            let factor = a.get(i, c).clone();
            for j in 0..cols {
                let mut v = a.get(i, j).clone();
                field.sub_mul_assign(&mut v, &factor, a.get(r, j));
                a.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { matrix: a, rank: r, pivots }
}

pub fn rank<F: Field>(field: &F, m: &Matrix<F::Elem>) -> usize {
    rref(field, m).rank
}

/// Finds some `x` with `A x = b`, or `None` when the system is infeasible.
/// Free variables are set to zero.
pub fn solve_feasible<F: Field>(
    field: &F,
    a: &Matrix<F::Elem>,
    b: &[F::Elem],
) -> Result<Option<Vec<F::Elem>>, LinAlgError> {
    if b.len() != a.rows {
        return Err(LinAlgError::DimensionMismatch(format!("{} right-hand sides for {} equations", b.len(), a.rows)));
    }
    let cols = a.cols + 1;
    let mut entries = Vec::with_capacity(a.rows * cols);
    for (r, rhs) in b.iter().enumerate() {
        entries.extend(a.row(r).iter().cloned());
        entries.push(rhs.clone());
    }
    let aug = Matrix { rows: a.rows, cols, entries };
    let red = rref(field, &aug);
    if red.pivots.last() == Some(&a.cols) {
        return Ok(None);
    }
    let mut x = vec![field.zero(); a.cols];
    for (r, &c) in red.pivots.iter().enumerate() {
        x[c] = red.matrix.get(r, a.cols).clone();
    }
    debug_assert!(satisfies(field, a, &x, b), "solve_feasible returned a non-solution");
    Ok(Some(x))
}

/// Exact substitution check `A x == b`.
pub fn satisfies<F: Field>(field: &F, a: &Matrix<F::Elem>, x: &[F::Elem], b: &[F::Elem]) -> bool {
    (0..a.rows).all(|r| {
        let mut acc = field.zero();
        for (c, xc) in x.iter().enumerate() {
            acc = field.add(&acc, &field.mul(a.get(r, c), xc));
        }
        acc == b[r]
    })
}

/// Sparse vector: entries strictly sorted by coordinate, no stored zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseVec<E> {
    entries: Vec<(usize, E)>,
}

impl<E> Default for SparseVec<E> {
    fn default() -> Self {
        SparseVec { entries: Vec::new() }
    }
}

impl<E: Clone> SparseVec<E> {
    /// Sorts, merges duplicate coordinates and drops zeros.
    pub fn from_entries<F: Field<Elem = E>>(field: &F, mut entries: Vec<(usize, E)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, E)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 = field.add(&last.1, &v),
                _ => out.push((c, v)),
            }
        }
        out.retain(|(_, v)| !field.is_zero(v));
        SparseVec { entries: out }
    }

    /// Caller guarantees sorted, duplicate-free, zero-free entries.
    pub fn from_sorted_unchecked(entries: Vec<(usize, E)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        SparseVec { entries }
    }

    pub fn unit<F: Field<Elem = E>>(field: &F, col: usize) -> Self {
        SparseVec { entries: vec![(col, field.one())] }
    }

    pub fn entries(&self) -> &[(usize, E)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, E)> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, col: usize) -> Option<&E> {
        self.entries.binary_search_by_key(&col, |e| e.0).ok().map(|i| &self.entries[i].1)
    }

    pub fn leading(&self) -> Option<usize> {
        self.entries.first().map(|e| e.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Grew,
    AlreadyInSpan,
}

const NO_ROW: u32 = u32::MAX;

/// Dense accumulator for sparse reductions; only touched slots are visited.
#[derive(Debug, Clone)]
struct Scratch<E> {
    vals: Vec<E>,
    touched: Vec<bool>,
    list: Vec<usize>,
}

impl<E: Clone> Scratch<E> {
    fn new(n: usize, zero: E) -> Self {
        Scratch { vals: vec![zero; n], touched: vec![false; n], list: Vec::new() }
    }

    fn mark(&mut self, c: usize) {
        if !self.touched[c] {
            self.touched[c] = true;
            self.list.push(c);
        }
    }

    /// Drains into a sorted sparse vector, resetting every touched slot.
    fn drain<F: Field<Elem = E>>(&mut self, field: &F) -> Vec<(usize, E)> {
        self.list.sort_unstable();
        let mut out = Vec::new();
        for &c in &self.list {
            self.touched[c] = false;
            let v = std::mem::replace(&mut self.vals[c], field.zero());
            if !field.is_zero(&v) {
                out.push((c, v));
            }
        }
        self.list.clear();
        out
    }
}

/// Incrementally maintained reduced row-echelon basis of a subspace of
/// `F^ncols`. Column order is the numeric order of coordinates.
///
/// Invariants: every row has coefficient 1 at its pivot (its first entry),
/// and no row has a nonzero entry in another row's pivot column.
///
/// With history enabled, every elimination step is logged so that any
/// vector in the span can be written in terms of the inserted generators.
#[derive(Debug, Clone)]
pub struct RrefBasis<F: Field> {
    field: F,
    ncols: usize,
    rows: Vec<SparseVec<F::Elem>>,
    pivot_row: Vec<u32>,
    // Row ids that may hold a nonzero in each non-pivot column. Entries can
    // be stale; every use re-checks the row.
    col_rows: Vec<Vec<u32>>,
    scratch: Scratch<F::Elem>,
    history: Option<Vec<Event<F::Elem>>>,
}

/// One elimination step. `Insert` creates row `row` as
/// `inv * (generator - sum hits[s].1 * row hits[s].0)`; `Update` replaces
/// row `target` by `target - alpha * source`.
#[derive(Debug, Clone)]
enum Event<E> {
    Insert { generator: usize, row: u32, inv: E, hits: Vec<(u32, E)> },
    Update { target: u32, source: u32, alpha: E },
}

impl<F: Field> RrefBasis<F> {
    pub fn new(field: F, ncols: usize) -> Self {
        let zero = field.zero();
        RrefBasis {
            field,
            ncols,
            rows: Vec::new(),
            pivot_row: vec![NO_ROW; ncols],
            col_rows: vec![Vec::new(); ncols],
            scratch: Scratch::new(ncols, zero),
            history: None,
        }
    }

    /// A basis that logs its elimination steps, enabling
    /// [`RrefBasis::express`] in terms of the generator ids passed to
    /// [`RrefBasis::insert_tracked`].
    pub fn with_history(field: F, ncols: usize) -> Self {
        let mut b = RrefBasis::new(field, ncols);
        b.history = Some(Vec::new());
        b
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_row[col] != NO_ROW
    }

    /// The basis row whose pivot is `col`.
    pub fn row_for_pivot(&self, col: usize) -> Option<&SparseVec<F::Elem>> {
        match self.pivot_row[col] {
            NO_ROW => None,
            r => Some(&self.rows[r as usize]),
        }
    }

    /// True iff the unit vector `e_col` lies in the span, i.e. some row is exactly `e_col`.
    pub fn contains_unit(&self, col: usize) -> bool {
        self.row_for_pivot(col).is_some_and(|r| r.len() == 1)
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseVec<F::Elem>> {
        self.rows.iter()
    }

    /// Residual of `v` after reduction against the basis; zero iff `v` is in the span.
    pub fn reduce(&self, v: &SparseVec<F::Elem>) -> SparseVec<F::Elem> {
        let f = &self.field;
        let mut acc: FxHashMap<usize, F::Elem> = FxHashMap::default();
        for (c, a) in &v.entries {
            match self.pivot_row[*c] {
                NO_ROW => {
                    let slot = acc.entry(*c).or_insert_with(|| f.zero());
                    *slot = f.add(slot, a);
                }
                r => {
                    for (c2, b) in self.rows[r as usize].entries.iter().skip(1) {
                        let slot = acc.entry(*c2).or_insert_with(|| f.zero());
                        f.sub_mul_assign(slot, a, b);
                    }
                }
            }
        }
        SparseVec::from_entries(f, acc.into_iter().collect())
    }

    pub fn contains(&self, v: &SparseVec<F::Elem>) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn insert(&mut self, v: &SparseVec<F::Elem>) -> InsertOutcome {
        assert!(self.history.is_none(), "tracked basis requires insert_tracked");
        self.insert_inner(v, None)
    }

    pub fn insert_tracked(&mut self, v: &SparseVec<F::Elem>, generator: usize) -> InsertOutcome {
        assert!(self.history.is_some(), "basis was built without history");
        self.insert_inner(v, Some(generator))
    }

    fn insert_inner(&mut self, v: &SparseVec<F::Elem>, generator: Option<usize>) -> InsertOutcome {
        let field = self.field.clone();
        let f = &field;
        let mut hits = Vec::new();
        for (c, a) in &v.entries {
            debug_assert!(*c < self.ncols, "coordinate {c} outside {} columns", self.ncols);
            match self.pivot_row[*c] {
                NO_ROW => {
                    self.scratch.mark(*c);
                    let slot = &mut self.scratch.vals[*c];
                    *slot = f.add(slot, a);
                }
                r => {
                    for (c2, b) in self.rows[r as usize].entries.iter().skip(1) {
                        self.scratch.mark(*c2);
                        f.sub_mul_assign(&mut self.scratch.vals[*c2], a, b);
                    }
                    if generator.is_some() {
                        hits.push((r, a.clone()));
                    }
                }
            }
        }
        let mut residual = self.scratch.drain(f);
        if residual.is_empty() {
            return InsertOutcome::AlreadyInSpan;
        }
        let pivot = residual[0].0;
        let inv = f.inv(&residual[0].1);
        if !f.is_one(&inv) {
            for e in residual.iter_mut() {
                e.1 = f.mul(&e.1, &inv);
            }
        }
        let new_row = SparseVec { entries: residual };
        let id = self.rows.len() as u32;
        if let (Some(log), Some(g)) = (self.history.as_mut(), generator) {
            log.push(Event::Insert { generator: g, row: id, inv, hits });
        }

        // Clear the new pivot column from every other row.
        let candidates = std::mem::take(&mut self.col_rows[pivot]);
        for rid in candidates {
            let row = &self.rows[rid as usize];
            let Some(alpha) = row.get(pivot).cloned() else {
                continue;
            };
            let (merged, added) = axpy_merge(f, &row.entries, &alpha, &new_row.entries);
            for c in added {
                self.col_rows[c].push(rid);
            }
            self.rows[rid as usize] = SparseVec { entries: merged };
            if let Some(log) = self.history.as_mut() {
                log.push(Event::Update { target: rid, source: id, alpha });
            }
        }

        for (c, _) in new_row.entries.iter().skip(1) {
            self.col_rows[*c].push(id);
        }
        self.pivot_row[pivot] = id;
        self.rows.push(new_row);
        InsertOutcome::Grew
    }

    /// Coefficients `c_g` with `sum c_g * generator_g = v`, or `None` when
    /// `v` is outside the span. Requires a basis built with history.
    pub fn express(&self, v: &SparseVec<F::Elem>) -> Option<Vec<(usize, F::Elem)>> {
        let log = self.history.as_ref().expect("basis was built without history");
        if !self.contains(v) {
            return None;
        }
        let f = &self.field;
        // v = sum c[s] * row s, read off at the pivots of the final rows.
        let mut c = vec![f.zero(); self.rows.len()];
        for (col, a) in &v.entries {
            let r = self.pivot_row[*col];
            if r != NO_ROW {
                c[r as usize] = a.clone();
            }
        }
        let mut coef: FxHashMap<usize, F::Elem> = FxHashMap::default();
        for ev in log.iter().rev() {
            match ev {
                Event::Update { target, source, alpha } => {
                    let ct = c[*target as usize].clone();
                    if !f.is_zero(&ct) {
                        f.sub_mul_assign(&mut c[*source as usize], alpha, &ct);
                    }
                }
                Event::Insert { generator, row, inv, hits } => {
                    let ct = std::mem::replace(&mut c[*row as usize], f.zero());
                    if f.is_zero(&ct) {
                        continue;
                    }
                    let w = f.mul(&ct, inv);
                    let slot = coef.entry(*generator).or_insert_with(|| f.zero());
                    *slot = f.add(slot, &w);
                    for (s, a) in hits {
                        f.sub_mul_assign(&mut c[*s as usize], &w, a);
                    }
                }
            }
        }
        let mut out: Vec<_> = coef.into_iter().filter(|(_, x)| !f.is_zero(x)).collect();
        out.sort_unstable_by_key(|e| e.0);
        Some(out)
    }

    /// Checks the RREF invariants. Intended for tests.
    pub fn check_invariants(&self) -> bool {
        self.rows.iter().enumerate().all(|(rid, row)| {
            let Some(&(p, ref lead)) = row.entries.first() else {
                return false;
            };
            self.pivot_row[p] == rid as u32
                && self.field.is_one(lead)
                && row.entries.iter().skip(1).all(|(c, v)| !self.is_pivot(*c) && !self.field.is_zero(v))
                && row.entries.windows(2).all(|w| w[0].0 < w[1].0)
        })
    }
}

/// `x - alpha * y` on sorted sparse entry lists. Also returns the
/// coordinates that are nonzero in the result but were absent from `x`.
fn axpy_merge<F: Field>(
    f: &F,
    x: &[(usize, F::Elem)],
    alpha: &F::Elem,
    y: &[(usize, F::Elem)],
) -> (Vec<(usize, F::Elem)>, Vec<usize>) {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let mut added = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
            out.push(x[i].clone());
            i += 1;
        } else if i == x.len() || y[j].0 < x[i].0 {
            let v = f.neg(&f.mul(alpha, &y[j].1));
            out.push((y[j].0, v));
            added.push(y[j].0);
            j += 1;
        } else {
            let mut v = x[i].1.clone();
            f.sub_mul_assign(&mut v, alpha, &y[j].1);
            if !f.is_zero(&v) {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    (out, added)
}

/// Sparse feasibility: rows are `(a, b)` meaning `a . x = b` over `ncols` unknowns.
/// Returns a solution with free variables zero, or `None` when infeasible.
pub fn solve_sparse_feasible<F: Field>(
    field: &F,
    ncols: usize,
    equations: impl IntoIterator<Item = (SparseVec<F::Elem>, F::Elem)>,
) -> Option<Vec<F::Elem>> {
    // Right-hand side lives in column `ncols`, last in the order, so a pivot
    // there is exactly the equation 0 = 1.
    let mut basis = RrefBasis::new(field.clone(), ncols + 1);
    let mut eqs = Vec::new();
    for (a, b) in equations {
        let mut entries = a.entries.clone();
        if !field.is_zero(&b) {
            entries.push((ncols, b.clone()));
        }
        let row = SparseVec { entries };
        basis.insert(&row);
        if basis.is_pivot(ncols) {
            return None;
        }
        if cfg!(debug_assertions) {
            eqs.push((a, b));
        }
    }
    let mut x = vec![field.zero(); ncols];
    for row in basis.rows() {
        let p = row.leading().expect("basis rows are nonzero");
        if let Some(v) = row.get(ncols) {
            x[p] = v.clone();
        }
    }
    debug_assert!(eqs.iter().all(|(a, b)| {
        let mut acc = field.zero();
        for (c, v) in a.entries() {
            acc = field.add(&acc, &field.mul(v, &x[*c]));
        }
        acc == *b
    }));
    Some(x)
}
