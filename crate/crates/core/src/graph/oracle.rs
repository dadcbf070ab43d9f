use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cut_of_index, CutAssignment, WeightedGraph};
use crate::error::{Error, Result};

/// Enumeration guard for [`brute_force_maxcut`].
pub const MAX_ORACLE_VERTICES: usize = 24;

/// Relative tolerance under which two cut values count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub max_cut_value: f64,
    /// `W_total - 2 * max_cut_value`.
    pub min_cost: f64,
    /// Every maximum-cut assignment, sorted by index. Closed under complement.
    pub optimal_assignments: Vec<CutAssignment>,
}

impl OracleResult {
    pub fn n_vertices(&self) -> usize {
        self.optimal_assignments.first().map_or(0, |a| a.len())
    }

    pub fn is_optimal(&self, index: u64) -> bool {
        self.optimal_assignments
            .binary_search_by_key(&index, |a| a.index())
            .is_ok()
    }
}

/// Exact MaxCut by enumeration of the `2^(n-1)` assignments with the last
/// vertex fixed to 0; complements are added afterwards.
pub fn brute_force_maxcut(graph: &WeightedGraph) -> Result<OracleResult> {
    let n = graph.n_vertices();
    if n > MAX_ORACLE_VERTICES {
        return Err(Error::Capacity(format!(
            "brute-force oracle supports at most {MAX_ORACLE_VERTICES} vertices, got {n}"
        )));
    }
    let half = 1u64 << (n - 1);
    let edges = graph.edges();
    let n_chunks = half.div_ceil(CHUNK);

    let best = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            (c * CHUNK..((c + 1) * CHUNK).min(half))
                .map(|k| cut_of_index(edges, k))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);

    let tol = TIE_TOLERANCE * best.abs();
    let winners: Vec<u64> = (0..n_chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            (c * CHUNK..((c + 1) * CHUNK).min(half)).filter(move |&k| cut_of_index(edges, k) >= best - tol)
        })
        .collect();

    let mut optimal: Vec<CutAssignment> = winners
        .into_iter()
        .flat_map(|k| {
            let a = CutAssignment::new(k, n).expect("index fits");
            [a, a.complement()]
        })
        .collect();
    optimal.sort_unstable();
    optimal.dedup();

    Ok(OracleResult {
        max_cut_value: best,
        min_cost: graph.total_weight() - 2.0 * best,
        optimal_assignments: optimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(r: &OracleResult) -> Vec<String> {
        r.optimal_assignments.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn single_edge() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let r = brute_force_maxcut(&g).unwrap();
        assert_eq!(r.max_cut_value, 1.0);
        assert_eq!(r.min_cost, -1.0);
        let mut s = strings(&r);
        s.sort();
        assert_eq!(s, ["01", "10"]);
    }

    #[test]
    fn triangle_has_six_optima() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let r = brute_force_maxcut(&g).unwrap();
        assert_eq!(r.max_cut_value, 2.0);
        assert_eq!(r.optimal_assignments.len(), 6);
    }

    #[test]
    fn four_cycle() {
        let g =
            WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).unwrap();
        let r = brute_force_maxcut(&g).unwrap();
        assert_eq!(r.max_cut_value, 4.0);
        let mut s = strings(&r);
        s.sort();
        assert_eq!(s, ["0101", "1010"]);
    }

    #[test]
    fn edgeless_graph_makes_everything_optimal() {
        let g = WeightedGraph::new(3, []).unwrap();
        let r = brute_force_maxcut(&g).unwrap();
        assert_eq!(r.max_cut_value, 0.0);
        assert_eq!(r.optimal_assignments.len(), 8);
    }

    #[test]
    fn capacity_guard() {
        let g = WeightedGraph::new(MAX_ORACLE_VERTICES + 1, []).unwrap();
        assert!(matches!(brute_force_maxcut(&g), Err(Error::Capacity(_))));
    }
}
