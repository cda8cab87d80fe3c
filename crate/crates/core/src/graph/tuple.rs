use super::{GraphError, Vertex};

/// Mixed-radix bijection between `V^k` and `0..n^k`; the first coordinate
/// is the most significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleIndex {
    n: usize,
    k: usize,
    size: usize,
}

impl TupleIndex {
    pub fn new(n: usize, k: usize) -> Result<Self, GraphError> {
        let size = u32::try_from(k)
            .ok()
            .and_then(|k32| n.checked_pow(k32))
            .filter(|&s| s <= u32::MAX as usize)
            .ok_or(GraphError::TooManyTuples { n, k })?;
        Ok(TupleIndex { n, k, size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Place value of position `pos`.
    pub fn weight(&self, pos: usize) -> usize {
        self.n.pow((self.k - 1 - pos) as u32)
    }

    pub fn rank(&self, t: &[Vertex]) -> usize {
        debug_assert_eq!(t.len(), self.k);
        t.iter().fold(0, |acc, &x| acc * self.n + x)
    }

    pub fn unrank(&self, r: usize) -> Vec<Vertex> {
        let mut t = vec![0; self.k];
        self.unrank_into(r, &mut t);
        t
    }

    pub fn unrank_into(&self, mut r: usize, t: &mut [Vertex]) {
        for slot in t.iter_mut().rev() {
            *slot = r % self.n;
            r /= self.n;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<Vertex>> + '_ {
        (0..self.size).map(|r| self.unrank(r))
    }
}

/// All index tuples in `[k]^{(r)}` (0-based positions, pairwise distinct), lexicographic.
pub fn index_tuples(k: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for p in 0..k {
            if !cur.contains(&p) {
                cur.push(p);
                go(k, r, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if r <= k {
        go(k, r, &mut Vec::with_capacity(r), &mut out);
    }
    out
}

fn check_positions(k: usize, i: &[usize]) -> Result<(), GraphError> {
    for (s, &p) in i.iter().enumerate() {
        if p >= k {
            return Err(GraphError::IndexOutOfRange { pos: p, k });
        }
        if i[..s].contains(&p) {
            return Err(GraphError::RepeatedIndex(p));
        }
    }
    Ok(())
}

/// `v<i,u>`: position `i[s]` receives `u[s]`, all other positions are kept.
pub fn substitute(v: &[Vertex], i: &[usize], u: &[Vertex]) -> Result<Vec<Vertex>, GraphError> {
    check_positions(v.len(), i)?;
    if i.len() != u.len() {
        return Err(GraphError::LengthMismatch(format!("{} positions but {} values", i.len(), u.len())));
    }
    let mut out = v.to_vec();
    for (&p, &x) in i.iter().zip(u) {
        out[p] = x;
    }
    Ok(out)
}

/// Entries of `v` at positions `i`.
pub fn extract(v: &[Vertex], i: &[usize]) -> Result<Vec<Vertex>, GraphError> {
    check_positions(v.len(), i)?;
    Ok(i.iter().map(|&p| v[p]).collect())
}

/// `pr_t v`: the first `t` entries.
pub fn project(v: &[Vertex], t: usize) -> Result<Vec<Vertex>, GraphError> {
    if t == 0 || t > v.len() {
        return Err(GraphError::ProjectionRange { t, k: v.len() });
    }
    Ok(v[..t].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitute_single_position() {
        assert_eq!(substitute(&[1, 2, 3], &[2], &[9]).unwrap(), vec![1, 2, 9]);
    }

    #[test]
    fn substitute_two_positions() {
        assert_eq!(substitute(&[1, 2, 3], &[0, 2], &[7, 8]).unwrap(), vec![7, 2, 8]);
    }

    #[test]
    fn substitute_rejects_repeats() {
        assert_eq!(substitute(&[1, 2, 3], &[1, 1], &[0, 0]), Err(GraphError::RepeatedIndex(1)));
    }

    #[test]
    fn substitute_extract_identity_exhaustive() {
        let idx = TupleIndex::new(3, 3).unwrap();
        for v in idx.iter() {
            for r in 0..=3 {
                for i in index_tuples(3, r) {
                    let u = extract(&v, &i).unwrap();
                    assert_eq!(substitute(&v, &i, &u).unwrap(), v);
                }
            }
        }
    }

    #[test]
    fn rank_unrank_roundtrip() {
        let idx = TupleIndex::new(4, 3).unwrap();
        for r in 0..idx.size() {
            assert_eq!(idx.rank(&idx.unrank(r)), r);
        }
        assert_eq!(idx.rank(&[0, 0, 1]), 1);
        assert_eq!(idx.rank(&[1, 0, 0]), 16);
    }

    #[test]
    fn index_tuple_counts() {
        assert_eq!(index_tuples(4, 2).len(), 12);
        assert_eq!(index_tuples(3, 3).len(), 6);
        assert_eq!(index_tuples(2, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn projection() {
        assert_eq!(project(&[0, 1, 2], 2).unwrap(), vec![0, 1]);
        assert!(project(&[0, 1], 3).is_err());
    }
}
