//! Snapshot and node-set bitsets.
//!
//! A snapshot stores the undirected edge set `E_t` as a symmetric adjacency
//! bitset: O(1) membership, and neighborhood unions in `n/64` word
//! operations, which is what the flooding engine and the expansion
//! statistics spend their time on.

/// A subset of `[n]` as a fixed-universe bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    n: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

impl NodeSet {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; word_count(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for w in &mut s.words {
            *w = !0;
        }
        s.trim();
        s
    }

    pub fn from_members(n: usize, members: &[usize]) -> Self {
        let mut s = Self::empty(n);
        for &i in members {
            s.insert(i);
        }
        s
    }

    fn trim(&mut self) {
        let extra = self.words.len() * 64 - self.n;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 >> extra;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn subtract(&mut self, other: &NodeSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn intersects(&self, other: &NodeSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        !self.intersects(other)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

/// The undirected edge set over `[n]` at one time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl Snapshot {
    pub fn empty(n: usize) -> Self {
        let wpr = word_count(n);
        Self {
            n,
            words_per_row: wpr,
            bits: vec![0; wpr * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                s.add_edge(i, j);
            }
        }
        s
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn clear(&mut self) {
        self.bits.fill(0);
    }

    /// Inserts the undirected edge `{i, j}`; self-loops are rejected.
    #[inline]
    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j, "snapshot edges are loop-free");
        assert!(i < self.n && j < self.n, "edge endpoint out of range");
        self.bits[i * self.words_per_row + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words_per_row + i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    /// Adjacency row of node `i` as bitset words.
    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        let total: usize = self.bits.iter().map(|w| w.count_ones() as usize).sum();
        total / 2
    }

    /// Sorted `(i, j)` pairs with `i < j`.
    pub fn edge_list(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for (wi, &w) in self.row(i).iter().enumerate() {
                let mut bits = w;
                while bits != 0 {
                    let j = wi * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if j > i {
                        out.push((i as u32, j as u32));
                    }
                }
            }
        }
        out
    }

    /// Adds every node adjacent to a member of `set` into `out`.
    pub fn neighbors_into(&self, set: &NodeSet, out: &mut NodeSet) {
        for i in set.iter() {
            for (w, r) in out_words(out).iter_mut().zip(self.row(i)) {
                *w |= r;
            }
        }
    }

    /// Structural sanity: symmetric adjacency and empty diagonal.
    pub fn is_consistent(&self) -> bool {
        for i in 0..self.n {
            if self.has_edge(i, i) {
                return false;
            }
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) != self.has_edge(j, i) {
                    return false;
                }
            }
        }
        true
    }
}

// NodeSet exposes words mutably only to Snapshot for the union kernel.
fn out_words(set: &mut NodeSet) -> &mut [u64] {
    &mut set.words
}
