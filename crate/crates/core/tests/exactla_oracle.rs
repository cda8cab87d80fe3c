//! Exact linear algebra against brute-force oracles: span enumeration over
//! small prime fields and largest nonvanishing minor over the rationals.

use std::collections::HashSet;

use algiso::exactla::{
    rank, rref, satisfies, solve_feasible, solve_sparse_feasible, InsertOutcome, Matrix, RrefBasis, SparseVec,
};
use algiso::field::{Field, PrimeField, Rationals};
use proptest::prelude::*;

/// Every vector in the row space of `rows` over GF(p).
fn span(p: u64, cols: usize, rows: &[Vec<u64>]) -> HashSet<Vec<u64>> {
    let mut out: HashSet<Vec<u64>> = HashSet::from([vec![0; cols]]);
    for r in rows {
        let mut next = HashSet::new();
        for v in &out {
            for c in 0..p {
                next.insert(v.iter().zip(r).map(|(a, b)| (a + c * b) % p).collect());
            }
        }
        out = next;
    }
    out
}

fn span_rank(p: u64, cols: usize, rows: &[Vec<u64>]) -> usize {
    let size = span(p, cols, rows).len();
    (0..).find(|&r| p.pow(r) as usize == size).unwrap() as usize
}

fn determinant<F: Field>(f: &F, m: &[Vec<F::Elem>]) -> F::Elem {
    if m.is_empty() {
        return f.one();
    }
    let mut acc = f.zero();
    for c in 0..m.len() {
        let minor: Vec<Vec<F::Elem>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = f.mul(&m[0][c], &determinant(f, &minor));
        acc = if c % 2 == 0 { f.add(&acc, &term) } else { f.sub(&acc, &term) };
    }
    acc
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Size of the largest square submatrix with nonzero determinant.
fn minor_rank<F: Field>(f: &F, m: &Matrix<F::Elem>) -> usize {
    let top = m.rows().min(m.cols());
    (1..=top)
        .rev()
        .find(|&s| {
            subsets(m.rows(), s).iter().any(|rs| {
                subsets(m.cols(), s).iter().any(|cs| {
                    let sub: Vec<Vec<F::Elem>> =
                        rs.iter().map(|&r| cs.iter().map(|&c| m.get(r, c).clone()).collect()).collect();
                    !f.is_zero(&determinant(f, &sub))
                })
            })
        })
        .unwrap_or(0)
}

fn arb_matrix(max: usize, lo: i64, hi: i64) -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1..=max, 1..=max)
        .prop_flat_map(move |(r, c)| (Just(c), proptest::collection::vec(proptest::collection::vec(lo..=hi, c), r)))
}

fn check_rref_shape<F: Field>(f: &F, m: &Matrix<F::Elem>) {
    let red = rref(f, m);
    assert_eq!(red.rank, red.pivots.len());
    assert!(red.pivots.windows(2).all(|w| w[0] < w[1]));
    for (r, &c) in red.pivots.iter().enumerate() {
        for i in 0..m.rows() {
            let expect = if i == r { f.one() } else { f.zero() };
            assert_eq!(red.matrix.get(i, c), &expect);
        }
        assert!((0..c).all(|j| f.is_zero(red.matrix.get(r, j))));
    }
    for i in red.rank..m.rows() {
        assert!(red.matrix.row(i).iter().all(|x| f.is_zero(x)));
    }
    assert_eq!(rref(f, &red.matrix), red);
}

proptest! {
    #[test]
    fn prime_field_rank_matches_span_size((cols, rows) in arb_matrix(4, 0, 4), p_ix in 0usize..3) {
        let p = [2u64, 3, 5][p_ix];
        let f = PrimeField::new(p);
        let rows: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| x as u64 % p).collect()).collect();
        let m = Matrix::from_rows(cols, rows.clone()).unwrap();
        prop_assert_eq!(rank(&f, &m), span_rank(p, cols, &rows));
        check_rref_shape(&f, &m);
    }

    #[test]
    fn rational_rank_matches_minors((cols, rows) in arb_matrix(4, -3, 3)) {
        let f = Rationals;
        let m = Matrix::from_i64(&f, cols, &rows).unwrap();
        prop_assert_eq!(rank(&f, &m), minor_rank(&f, &m));
        check_rref_shape(&f, &m);
    }

    #[test]
    fn rational_solutions_satisfy_the_system((cols, rows) in arb_matrix(4, -3, 3), rhs in proptest::collection::vec(-3i64..=3, 4)) {
        let f = Rationals;
        let a = Matrix::from_i64(&f, cols, &rows).unwrap();
        let b: Vec<_> = rhs[..rows.len()].iter().map(|&x| f.from_i64(x)).collect();
        let aug_rows: Vec<Vec<i64>> = rows.iter().zip(&rhs).map(|(r, &x)| r.iter().copied().chain([x]).collect()).collect();
        let aug = Matrix::from_i64(&f, cols + 1, &aug_rows).unwrap();
        let feasible = minor_rank(&f, &a) == minor_rank(&f, &aug);
        let sol = solve_feasible(&f, &a, &b).unwrap();
        prop_assert_eq!(sol.is_some(), feasible);
        if let Some(x) = sol {
            prop_assert!(satisfies(&f, &a, &x, &b));
        }
        let eqs = (0..rows.len()).map(|r| {
            let entries = (0..cols).map(|c| (c, a.get(r, c).clone())).collect();
            (SparseVec::from_entries(&f, entries), b[r].clone())
        });
        let sparse = solve_sparse_feasible(&f, cols, eqs);
        prop_assert_eq!(sparse.is_some(), feasible);
        if let Some(x) = sparse {
            prop_assert!(satisfies(&f, &a, &x, &b));
        }
    }

    #[test]
    fn basis_tracks_span_membership((cols, rows) in arb_matrix(4, 0, 2), probes in proptest::collection::vec(proptest::collection::vec(0u64..3, 4), 1..6)) {
        let p = 3;
        let f = PrimeField::new(p);
        let rows: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| x as u64).collect()).collect();
        let to_sparse = |v: &[u64]| SparseVec::from_entries(&f, v.iter().copied().enumerate().collect());
        let mut basis = RrefBasis::with_history(f, cols);
        let mut seen: Vec<Vec<u64>> = Vec::new();
        for (g, r) in rows.iter().enumerate() {
            let before = basis.rank();
            let in_span = span(p, cols, &seen).contains(r);
            let outcome = basis.insert_tracked(&to_sparse(r), g);
            prop_assert_eq!(outcome == InsertOutcome::AlreadyInSpan, in_span);
            prop_assert_eq!(basis.rank(), before + usize::from(!in_span));
            prop_assert!(basis.check_invariants());
            seen.push(r.clone());
            prop_assert_eq!(basis.rank(), span_rank(p, cols, &seen));
        }
        let all = span(p, cols, &rows);
        for probe in &probes {
            let v = &probe[..cols];
            let sv = to_sparse(v);
            prop_assert_eq!(basis.contains(&sv), all.contains(v));
            if let Some(coef) = basis.express(&sv) {
                let mut acc = vec![0u64; cols];
                for (g, c) in coef {
                    for (a, x) in acc.iter_mut().zip(&rows[g]) {
                        *a = (*a + c * x) % p;
                    }
                }
                prop_assert_eq!(&acc[..], v);
            }
        }
    }
}

#[test]
fn gf2_feasibility_is_exact_up_to_three_by_three() {
    let f = PrimeField::new(2);
    for r in 1..=3usize {
        for c in 1..=3usize {
            for bits in 0u32..1 << (r * c + r) {
                let bit = |i: usize| u64::from(bits >> i & 1);
                let a = Matrix::new(r, c, (0..r * c).map(bit).collect()).unwrap();
                let b: Vec<u64> = (0..r).map(|i| bit(r * c + i)).collect();
                let brute = (0u32..1 << c).any(|xb| {
                    let x: Vec<u64> = (0..c).map(|i| u64::from(xb >> i & 1)).collect();
                    satisfies(&f, &a, &x, &b)
                });
                let sol = solve_feasible(&f, &a, &b).unwrap();
                assert_eq!(sol.is_some(), brute, "{r}x{c} pattern {bits:b}");
                if let Some(x) = sol {
                    assert!(satisfies(&f, &a, &x, &b));
                }
            }
        }
    }
}

#[test]
fn mismatched_right_hand_side_is_an_error() {
    let f = Rationals;
    let a = Matrix::from_i64(&f, 2, &[vec![1, 0], vec![0, 1]]).unwrap();
    assert!(solve_feasible(&f, &a, &[f.one()]).is_err());
}
