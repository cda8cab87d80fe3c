//! Labelled partitions of `V^k`, the refinement order, invariance and
//! graph-likeness, and character vectors.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit;
use crate::graph::{ColoredGraph, GraphError, TupleIndex, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("shape mismatch: ({0}, {1}) vs ({2}, {3})")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("expected {expected} colors, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("color ids are not dense: {0} unused")]
    NotDense(u32),
    #[error("malformed index tuple: {0}")]
    MalformedIndex(String),
    #[error("partition JSON: {0}")]
    Json(String),
    #[error("tuple {0:?} appears more than once")]
    DuplicateTuple(Vec<String>),
    #[error("{0} tuples are missing from the partition")]
    MissingTuples(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Relative position of two partitions in the refinement order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionOrder {
    Equal,
    /// The first partition is coarser: the second refines it.
    FirstCoarser,
    /// The second partition is coarser: the first refines it.
    SecondCoarser,
    Incomparable,
}

/// A coloring of `V^k`, indexed by tuple rank. Color ids are dense in `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledPartition {
    k: usize,
    n: usize,
    colors: Vec<u32>,
    m: usize,
}

impl LabelledPartition {
    pub fn new(k: usize, n: usize, colors: Vec<u32>) -> Result<Self, PartitionError> {
        let expected = TupleIndex::new(n, k)?.size();
        if colors.len() != expected {
            return Err(PartitionError::BadLength { expected, got: colors.len() });
        }
        let m = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut seen = vec![false; m];
        for &c in &colors {
            seen[c as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(PartitionError::NotDense(missing as u32));
        }
        Ok(LabelledPartition { k, n, colors, m })
    }

    /// Labels are ranks of the keys among the distinct keys in sorted order.
    pub fn from_sorted_keys<K: Ord + Clone>(k: usize, n: usize, keys: &[K]) -> Self {
        let mut distinct: Vec<&K> = keys.iter().collect();
        distinct.sort();
        distinct.dedup();
        let colors = keys.iter().map(|key| distinct.binary_search(&key).expect("key present") as u32).collect();
        LabelledPartition { k, n, colors, m: distinct.len() }
    }

    /// Labels are assigned by first occurrence in rank order.
    pub fn from_keys_first_occurrence<K: Hash + Eq>(k: usize, n: usize, keys: impl IntoIterator<Item = K>) -> Self {
        let mut ids: HashMap<K, u32> = HashMap::new();
        let colors: Vec<u32> = keys
            .into_iter()
            .map(|key| {
                let next = ids.len() as u32;
                *ids.entry(key).or_insert(next)
            })
            .collect();
        LabelledPartition { k, n, colors, m: ids.len() }
    }

    pub fn unit(k: usize, n: usize) -> Result<Self, PartitionError> {
        let size = TupleIndex::new(n, k)?.size();
        Ok(LabelledPartition { k, n, colors: vec![0; size], m: usize::from(size > 0) })
    }

    pub fn discrete(k: usize, n: usize) -> Result<Self, PartitionError> {
        let size = TupleIndex::new(n, k)?.size();
        Ok(LabelledPartition { k, n, colors: (0..size as u32).collect(), m: size })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_classes(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    #[inline]
    pub fn color(&self, rank: usize) -> u32 {
        self.colors[rank]
    }

    pub fn tuple_index(&self) -> TupleIndex {
        TupleIndex::new(self.n, self.k).expect("validated on construction")
    }

    pub fn color_of(&self, t: &[Vertex]) -> u32 {
        self.colors[self.tuple_index().rank(t)]
    }

    /// Tuple ranks of each class, classes ordered by color id.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.m];
        for (r, &c) in self.colors.iter().enumerate() {
            out[c as usize].push(r);
        }
        out
    }

    /// Same partition, labels reassigned by first occurrence.
    pub fn normalized(&self) -> Self {
        LabelledPartition::from_keys_first_occurrence(self.k, self.n, self.colors.iter().copied())
    }

    /// Coarsening through an arbitrary relabelling of colors.
    pub fn map_colors<K: Hash + Eq>(&self, f: impl Fn(u32) -> K) -> Self {
        LabelledPartition::from_keys_first_occurrence(self.k, self.n, self.colors.iter().map(|&c| f(c)))
    }

    fn check_shape(&self, other: &Self) -> Result<(), PartitionError> {
        if self.k != other.k || self.n != other.n {
            return Err(PartitionError::ShapeMismatch(self.k, self.n, other.k, other.n));
        }
        Ok(())
    }

    /// `self ⪯ other`: every class of `other` lies inside a class of `self`.
    pub fn is_refined_by(&self, other: &Self) -> Result<bool, PartitionError> {
        self.check_shape(other)?;
        let mut map = vec![u32::MAX; other.m];
        for (&mine, &theirs) in self.colors.iter().zip(&other.colors) {
            let slot = &mut map[theirs as usize];
            if *slot == u32::MAX {
                *slot = mine;
            } else if *slot != mine {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn compare(&self, other: &Self) -> Result<PartitionOrder, PartitionError> {
        let a = self.is_refined_by(other)?;
        let b = other.is_refined_by(self)?;
        Ok(match (a, b) {
            (true, true) => PartitionOrder::Equal,
            (true, false) => PartitionOrder::FirstCoarser,
            (false, true) => PartitionOrder::SecondCoarser,
            (false, false) => PartitionOrder::Incomparable,
        })
    }

    pub fn same_relation(&self, other: &Self) -> bool {
        matches!(self.compare(other), Ok(PartitionOrder::Equal))
    }

    /// Common refinement: colors are tuples of the inputs' colors.
    pub fn product(parts: &[&LabelledPartition]) -> Result<Self, PartitionError> {
        let first = parts.first().ok_or_else(|| PartitionError::Json("empty product".into()))?;
        for p in parts {
            first.check_shape(p)?;
        }
        let keys = (0..first.size()).map(|r| parts.iter().map(|p| p.colors[r]).collect::<Vec<_>>());
        Ok(LabelledPartition::from_keys_first_occurrence(first.k, first.n, keys))
    }

    /// `pr_t γ(u) = γ(u_1, …, u_t, u_t, …, u_t)` on `V^t`.
    pub fn project(&self, t: usize) -> Result<Self, PartitionError> {
        if t == 0 || t > self.k {
            return Err(GraphError::ProjectionRange { t, k: self.k }.into());
        }
        let small = TupleIndex::new(self.n, t)?;
        let big = self.tuple_index();
        let mut u = vec![0; t];
        let mut padded = vec![0; self.k];
        let keys = (0..small.size()).map(|r| {
            small.unrank_into(r, &mut u);
            padded[..t].copy_from_slice(&u);
            for x in padded[t..].iter_mut() {
                *x = u[t - 1];
            }
            self.colors[big.rank(&padded)]
        });
        Ok(LabelledPartition::from_keys_first_occurrence(t, self.n, keys.collect::<Vec<_>>()))
    }

    /// `γ(u) = γ(v) ⇒ γ(u^π) = γ(v^π)` for every coordinate permutation π.
    pub fn is_invariant(&self) -> bool {
        let idx = self.tuple_index();
        let mut t = vec![0; self.k];
        let mut moved = vec![0; self.k];
        permutations(self.k).iter().all(|perm| {
            let mut map = vec![u32::MAX; self.m];
            (0..self.size()).all(|r| {
                idx.unrank_into(r, &mut t);
                for (slot, &p) in moved.iter_mut().zip(perm) {
                    *slot = t[p];
                }
                let target = self.colors[idx.rank(&moved)];
                let slot = &mut map[self.colors[r] as usize];
                if *slot == u32::MAX {
                    *slot = target;
                }
                *slot == target
            })
        })
    }

    /// Invariant and refining the partition into equality types.
    pub fn is_graph_like(&self) -> bool {
        let idx = self.tuple_index();
        let mut t = vec![0; self.k];
        let mut pattern = vec![u64::MAX; self.m];
        for r in 0..self.size() {
            idx.unrank_into(r, &mut t);
            let mut bits = 0u64;
            let mut b = 0;
            for i in 0..self.k {
                for j in i + 1..self.k {
                    if t[i] == t[j] {
                        bits |= 1 << b;
                    }
                    b += 1;
                }
            }
            let slot = &mut pattern[self.colors[r] as usize];
            if *slot == u64::MAX {
                *slot = bits;
            } else if *slot != bits {
                return false;
            }
        }
        self.is_invariant()
    }

    /// The `(i, v)`-character vector. `i` lists `2r` distinct 0-based positions.
    pub fn character_vector(&self, i: &[usize], v: &[Vertex]) -> Result<CharacterVector, PartitionError> {
        if i.is_empty() || i.len() % 2 != 0 || i.len() > self.k {
            return Err(PartitionError::MalformedIndex(format!("{i:?} for width {}", self.k)));
        }
        if v.len() != self.k {
            return Err(PartitionError::MalformedIndex(format!("anchor of length {} for width {}", v.len(), self.k)));
        }
        for (s, &p) in i.iter().enumerate() {
            if p >= self.k || i[..s].contains(&p) {
                return Err(PartitionError::MalformedIndex(format!("{i:?}")));
            }
        }
        let r = i.len() / 2;
        let idx = self.tuple_index();
        let half = TupleIndex::new(self.n, r)?;
        let dim = half.size();
        let mut base_t = v.to_vec();
        for &p in i {
            base_t[p] = 0;
        }
        let base = idx.rank(&base_t);
        let offsets = |positions: &[usize]| -> Vec<usize> {
            let mut x = vec![0; r];
            (0..dim)
                .map(|xr| {
                    half.unrank_into(xr, &mut x);
                    positions.iter().zip(&x).map(|(&p, &xv)| xv * idx.weight(p)).sum()
                })
                .collect()
        };
        let off_x = offsets(&i[..r]);
        let off_y = offsets(&i[r..]);
        let mut cells = Vec::with_capacity(dim * dim);
        for ox in &off_x {
            for oy in &off_y {
                cells.push(self.colors[base + ox + oy]);
            }
        }
        let cv = CharacterVector { r, dim, cells, index: i.to_vec(), anchor: v.to_vec() };
        audit::record_character_vector(cv.check_partition_of_unity());
        Ok(cv)
    }

    /// Classes are listed in order of their least tuple rank, so equal
    /// relations serialize identically.
    pub fn to_file(&self, g: &ColoredGraph) -> PartitionFile {
        let idx = self.tuple_index();
        PartitionFile {
            k: self.k,
            classes: self
                .normalized()
                .classes()
                .into_iter()
                .map(|cls| cls.into_iter().map(|r| g.tuple_names(&idx.unrank(r))).collect())
                .collect(),
        }
    }

    pub fn from_file(g: &ColoredGraph, file: &PartitionFile) -> Result<Self, PartitionError> {
        let idx = TupleIndex::new(g.n(), file.k)?;
        let mut colors = vec![u32::MAX; idx.size()];
        for (c, cls) in file.classes.iter().enumerate() {
            for names in cls {
                if names.len() != file.k {
                    return Err(PartitionError::MalformedIndex(format!("tuple {names:?} in width {}", file.k)));
                }
                let r = idx.rank(&g.parse_tuple(names)?);
                if colors[r] != u32::MAX {
                    return Err(PartitionError::DuplicateTuple(names.clone()));
                }
                colors[r] = c as u32;
            }
        }
        let missing = colors.iter().filter(|&&c| c == u32::MAX).count();
        if missing > 0 {
            return Err(PartitionError::MissingTuples(missing));
        }
        // Empty classes in the file are dropped.
        Ok(LabelledPartition::from_keys_first_occurrence(file.k, g.n(), colors))
    }
}

/// All permutations of `0..k`, lexicographic.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    crate::graph::index_tuples(k, k)
}

/// Serialized partition: classes of tuples written with vertex names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub k: usize,
    pub classes: Vec<Vec<Vec<String>>>,
}

/// Character vector of a partition at index tuple `i` and anchor `v`.
/// Cell `(x, y)` of the `V^r x V^r` grid stores the color of
/// `v<i, x·y>`; the 0/1 matrix `χ_σ` is the support of color `σ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharacterVector {
    r: usize,
    dim: usize,
    cells: Vec<u32>,
    index: Vec<usize>,
    anchor: Vec<Vertex>,
}

impl CharacterVector {
    pub fn r(&self) -> usize {
        self.r
    }

    /// `|V|^r`, the side length of every matrix.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn anchor(&self) -> &[Vertex] {
        &self.anchor
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn color_at(&self, x: usize, y: usize) -> u32 {
        self.cells[x * self.dim + y]
    }

    /// Colors with a nonempty matrix, ascending.
    pub fn colors(&self) -> Vec<u32> {
        let mut c = self.cells.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Cells `(x, y)` where `χ_σ` is 1.
    pub fn support(&self, sigma: u32) -> Vec<(usize, usize)> {
        self.cells.iter().enumerate().filter(|(_, &c)| c == sigma).map(|(i, _)| (i / self.dim, i % self.dim)).collect()
    }

    /// Number of ones in `χ_σ`.
    pub fn nnz(&self, sigma: u32) -> usize {
        self.cells.iter().filter(|&&c| c == sigma).count()
    }

    /// Dense 0/1 matrix `χ_σ`, row-major.
    pub fn matrix(&self, sigma: u32) -> Vec<u8> {
        self.cells.iter().map(|&c| u8::from(c == sigma)).collect()
    }

    /// `Σ_σ χ_σ = J`: the supports of the realized colors are disjoint and cover every cell.
    pub fn check_partition_of_unity(&self) -> bool {
        let mut supports: HashMap<u32, Vec<usize>> = HashMap::new();
        for (cell, &c) in self.cells.iter().enumerate() {
            supports.entry(c).or_default().push(cell);
        }
        let mut hits = vec![0u32; self.dim * self.dim];
        for cells in supports.values() {
            for &cell in cells {
                hits[cell] += 1;
            }
        }
        self.cells.len() == self.dim * self.dim && hits.iter().all(|&h| h == 1)
    }

    /// Every `χ_σ^t` equals some `χ_σ'`.
    pub fn is_transpose_closed(&self) -> bool {
        let d = self.dim;
        let mut partner: HashMap<u32, u32> = HashMap::new();
        for x in 0..d {
            for y in 0..d {
                let (a, b) = (self.cells[x * d + y], self.cells[y * d + x]);
                if *partner.entry(a).or_insert(b) != b {
                    return false;
                }
            }
        }
        true
    }
}
