//! MaxCut problem instances.
//!
//! A [`WeightedGraph`] stores undirected edges in canonical `i < j` order with
//! strictly positive weights. Assignments are bit masks over the vertices
//! ([`CutAssignment`]); set bits form the cut subset.

mod metrics;
mod oracle;
mod random;

pub use metrics::{
    ground_state_probability, step_to_solution, Distribution, ProbabilityMap, ShotHistogram,
};
pub use oracle::{brute_force_maxcut, OracleResult, MAX_ORACLE_VERTICES};
pub use random::{gen_erdos_renyi, GeneratedGraph};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

/// Largest vertex count for which dense `2^n` tables are built.
pub const MAX_TABLE_VERTICES: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Builds a graph, swapping endpoints into `i < j` order. Self-loops,
    /// duplicate pairs and non-positive or non-finite weights are rejected.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(input_err!("graph needs at least one vertex"));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            let (i, j) = if a <= b { (a, b) } else { (b, a) };
            if i == j {
                return Err(input_err!("self-loop on vertex {i}"));
            }
            if j >= n {
                return Err(input_err!("edge ({i}, {j}) references vertex outside 0..{n}"));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(input_err!("edge ({i}, {j}) has non-positive or non-finite weight {w}"));
            }
            if !seen.insert((i, j)) {
                return Err(input_err!("duplicate edge ({i}, {j})"));
            }
            out.push(Edge { i, j, w });
        }
        Ok(Self { n, edges: out })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Sum of all edge weights (`W_total`).
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).fold(0.0, f64::max)
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.edges.iter().find(|e| e.i == i && e.j == j).map(|e| e.w)
    }

    /// Adjacency lists, neighbours in ascending order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Same graph with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n, self.edges.iter().map(|e| (e.i, e.j, e.w * factor)))
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(input_err!("permutation length {} != {}", perm.len(), self.n));
        }
        Self::new(self.n, self.edges.iter().map(|e| (perm[e.i], perm[e.j], e.w)))
    }

    fn check_assignment(&self, a: &CutAssignment) -> Result<()> {
        if a.len() != self.n {
            return Err(input_err!(
                "assignment has {} bits but graph has {} vertices",
                a.len(),
                self.n
            ));
        }
        Ok(())
    }

    /// Total weight of edges whose endpoints lie on different sides.
    pub fn cut_value(&self, a: &CutAssignment) -> Result<f64> {
        self.check_assignment(a)?;
        Ok(cut_of_index(&self.edges, a.index()))
    }

    /// Ising cost `Σ w_ij s_i s_j` with `s = +1` for bit 0 and `-1` for bit 1.
    pub fn cost_value(&self, a: &CutAssignment) -> Result<f64> {
        self.check_assignment(a)?;
        Ok(cost_of_index(&self.edges, a.index()))
    }

    /// Ising cost of every assignment index `0..2^n`.
    pub fn cost_table(&self) -> Result<Vec<f64>> {
        if self.n > MAX_TABLE_VERTICES {
            return Err(Error::Capacity(format!(
                "cost table for {} vertices exceeds the {MAX_TABLE_VERTICES}-vertex limit",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        let mut table = vec![0.0; dim];
        for e in &self.edges {
            let (bi, bj) = (1usize << e.i, 1usize << e.j);
            for (k, c) in table.iter_mut().enumerate() {
                let differ = ((k & bi) != 0) != ((k & bj) != 0);
                *c += if differ { -e.w } else { e.w };
            }
        }
        Ok(table)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges.iter().map(|e| (e.i, e.j, e.w)).collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        Self::new(json.n, json.edges.iter().copied())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: GraphJson =
            serde_json::from_str(text).map_err(|e| input_err!("graph JSON: {e}"))?;
        Self::from_json(&json)
    }
}

pub(crate) fn cut_of_index(edges: &[Edge], k: u64) -> f64 {
    edges
        .iter()
        .filter(|e| ((k >> e.i) ^ (k >> e.j)) & 1 == 1)
        .map(|e| e.w)
        .sum()
}

pub(crate) fn cost_of_index(edges: &[Edge], k: u64) -> f64 {
    edges
        .iter()
        .map(|e| if ((k >> e.i) ^ (k >> e.j)) & 1 == 1 { -e.w } else { e.w })
        .sum()
}

/// Graph file format: `{"n": int, "edges": [[i, j, w], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

/// A bipartition of the vertices. Bit `i` set means vertex `i` is in the cut
/// subset (atom measured in the Rydberg state).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutAssignment {
    bits: u64,
    len: usize,
}

impl CutAssignment {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len > 64 {
            return Err(input_err!("assignments are limited to 64 bits, got {len}"));
        }
        if len < 64 && bits >> len != 0 {
            return Err(input_err!("bits {bits:#b} do not fit in {len} positions"));
        }
        Ok(Self { bits, len })
    }

    /// Parses a string of `0`/`1` where character `i` is vertex `i`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        let mut len = 0;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(input_err!("invalid bit character {c:?} in {s:?}")),
            }
            len = i + 1;
        }
        Self::new(bits, len)
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: 0, len }
    }

    pub fn index(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        let mask = if self.len == 64 { u64::MAX } else { (1u64 << self.len) - 1 };
        Self {
            bits: !self.bits & mask,
            len: self.len,
        }
    }
}

impl fmt::Display for CutAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for CutAssignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CutAssignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Formats assignment index `k` over `n` vertices, vertex 0 first.
pub fn bitstring(k: u64, n: usize) -> String {
    (0..n).map(|i| if (k >> i) & 1 == 1 { '1' } else { '0' }).collect()
}
