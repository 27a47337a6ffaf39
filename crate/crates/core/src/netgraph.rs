//! Undirected simple graphs, the canonical edge-bit encoding of topologies
//! and topology changes, and seeded generators for the graph families used
//! in the experiments.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Error;
use crate::numerics::SquareMatrix;
use crate::rng;
use crate::Result;

/// Undirected simple graph stored as a dense symmetric 0/1 adjacency matrix
/// with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<u8>, // row-major n*n
}

impl Graph {
    /// Empty graph on `n` nodes.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("node count must be >= 1".into()));
        }
        Ok(Graph { n, adj: vec![0; n * n] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j] == 1
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::InvalidArgument(format!(
                "edge ({i},{j}) invalid for n={}",
                self.n
            )));
        }
        self.adj[i * self.n + j] = 1;
        self.adj[j * self.n + i] = 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        self.adj[i * self.n + j] = 0;
        self.adj[j * self.n + i] = 0;
    }

    /// Node degrees d_i = row sums of the adjacency matrix.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| (0..self.n).filter(|&j| self.has_edge(i, j)).count())
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }

    /// Edges as sorted (i, j) pairs with i < j.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.has_edge(i, j)).collect()
    }

    /// Adjacency matrix as a dense real matrix.
    pub fn adjacency_matrix(&self) -> SquareMatrix {
        let data: Vec<f64> = self.adj.iter().map(|&b| b as f64).collect();
        SquareMatrix::from_vec(self.n, data).expect("0/1 entries are finite")
    }

    /// Connected components as node partitions, each sorted, ordered by
    /// smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for v in 0..self.n {
                    if self.has_edge(u, v) && !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }
}

/// Canonical index of the unordered pair (i, j), i < j, under row-major
/// strict-upper-triangle order.
pub fn edge_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= j || j >= n {
        return Err(Error::InvalidArgument(format!(
            "pair ({i},{j}) must satisfy 0 <= i < j < n={n}"
        )));
    }
    Ok(i * n - i * (i + 1) / 2 + (j - i - 1))
}

/// Inverse of [`edge_index`].
pub fn edge_pair(k: usize, n: usize) -> Result<(usize, usize)> {
    let total = n * (n - 1) / 2;
    if k >= total {
        return Err(Error::InvalidArgument(format!(
            "edge index {k} out of range for n={n} ({total} pairs)"
        )));
    }
    let mut i = 0;
    let mut base = 0;
    loop {
        let row = n - 1 - i;
        if k < base + row {
            return Ok((i, i + 1 + (k - base)));
        }
        base += row;
        i += 1;
    }
}

/// 0/1 vector over canonical edge indices; encodes a whole topology or a
/// change vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeBitVector {
    n: usize,
    bits: Vec<u8>,
}

impl EdgeBitVector {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("node count must be >= 1".into()));
        }
        Ok(EdgeBitVector { n, bits: vec![0; n * (n - 1) / 2] })
    }

    pub fn from_bits(n: usize, bits: Vec<u8>) -> Result<Self> {
        if n == 0 || bits.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidArgument(format!(
                "bit vector length {} does not match n(n-1)/2 for n={n}",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("entries must be 0 or 1".into()));
        }
        Ok(EdgeBitVector { n, bits })
    }

    pub fn from_graph(g: &Graph) -> Self {
        let n = g.n();
        let mut bits = vec![0; n * (n - 1) / 2];
        for (i, j) in g.edges() {
            bits[edge_index(i, j, n).expect("valid pair")] = 1;
        }
        EdgeBitVector { n, bits }
    }

    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::empty(self.n).expect("n >= 1");
        for (k, &b) in self.bits.iter().enumerate() {
            if b == 1 {
                let (i, j) = edge_pair(k, self.n).expect("index in range");
                g.add_edge(i, j).expect("valid pair");
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, k: usize) -> u8 {
        self.bits[k]
    }

    pub fn set(&mut self, k: usize, v: u8) {
        self.bits[k] = v & 1;
    }

    pub fn flip(&mut self, k: usize) {
        self.bits[k] ^= 1;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn hamming(&self, other: &EdgeBitVector) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// XOR of two bit vectors of the same size.
    pub fn xor(&self, other: &EdgeBitVector) -> Result<EdgeBitVector> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "node counts differ: {} vs {}",
                self.n, other.n
            )));
        }
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(EdgeBitVector { n: self.n, bits })
    }
}

/// Sign map S_x0: +1 on non-edges of the initial topology (a set bit in the
/// change vector adds that edge), -1 on edges (it removes it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMap {
    signs: Vec<i8>,
}

impl SignMap {
    pub fn from_initial(x0: &EdgeBitVector) -> Self {
        SignMap {
            signs: x0.bits().iter().map(|&b| if b == 0 { 1 } else { -1 }).collect(),
        }
    }

    pub fn sign(&self, k: usize) -> i8 {
        self.signs[k]
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }
}

/// Applies a change vector to an initial topology: result = x0 XOR x.
///
/// Equivalent to result(k) = x0(k) + x(k) * S_x0(k) since a set change bit
/// adds a missing edge and removes a present one.
pub fn apply_changes(x0: &EdgeBitVector, x: &EdgeBitVector) -> Result<EdgeBitVector> {
    x0.xor(x)
}

/// Erdos-Renyi G(n, p); each pair included independently with probability p.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p={p} outside [0,1]")));
    }
    let mut g = Graph::empty(n)?;
    let mut r = rng::stream(seed, 0x4552, 0); // generator-local domain tag
    for i in 0..n {
        for j in (i + 1)..n {
            if r.gen::<f64>() < p {
                g.add_edge(i, j)?;
            }
        }
    }
    Ok(g)
}

/// Ring lattice: node i connected to i +- 1, ..., i +- d/2 (mod n).
pub fn gen_ring_lattice(n: usize, d: usize) -> Result<Graph> {
    if d % 2 != 0 {
        return Err(Error::InvalidArgument(format!("degree d={d} must be even")));
    }
    if n == 0 || (n > 0 && d > n.saturating_sub(1)) {
        return Err(Error::InvalidArgument(format!(
            "degree d={d} too large for n={n}"
        )));
    }
    let mut g = Graph::empty(n)?;
    for i in 0..n {
        for s in 1..=(d / 2) {
            let j = (i + s) % n;
            if i != j {
                g.add_edge(i.min(j), i.max(j))?;
            }
        }
    }
    Ok(g)
}

/// Star with node 0 as the center.
pub fn gen_star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("star needs n >= 2, got {n}")));
    }
    let mut g = Graph::empty(n)?;
    for j in 1..n {
        g.add_edge(0, j)?;
    }
    Ok(g)
}

/// Watts-Strogatz small world: start from a ring lattice and rewire the far
/// endpoint of each lattice edge with probability `beta`. Rewiring targets
/// are resampled up to n times to avoid self-loops and duplicates, then the
/// rewiring is skipped, so the edge count stays n*d/2.
pub fn gen_small_world(n: usize, d: usize, beta: f64, seed: u64) -> Result<Graph> {
    if d % 2 != 0 || d + 1 >= n {
        return Err(Error::InvalidArgument(format!(
            "small world needs even d < n-1, got d={d}, n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("beta={beta} outside [0,1]")));
    }
    let mut g = gen_ring_lattice(n, d)?;
    let mut r = rng::stream(seed, 0x5753, 0);
    for s in 1..=(d / 2) {
        for i in 0..n {
            let j = (i + s) % n;
            if r.gen::<f64>() >= beta {
                continue;
            }
            // pick a non-neighbor of i (the current edge (i,j) counts, so w != j)
            let mut target = None;
            for _ in 0..n {
                let w = r.gen_range(0..n);
                if w != i && !g.has_edge(i, w) {
                    target = Some(w);
                    break;
                }
            }
            if let Some(w) = target {
                g.remove_edge(i, j);
                g.add_edge(i.min(w), i.max(w))?;
            }
        }
    }
    Ok(g)
}
