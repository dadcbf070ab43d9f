//! Measurement distributions and solution-quality metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OracleResult;
use crate::error::{input_err, Error, Result};

/// Tolerance on the total mass of an exact distribution.
const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Common read interface of exact distributions and shot histograms.
pub trait ProbabilityMap {
    fn n_bits(&self) -> usize;

    /// Normalized probability of assignment `index`.
    fn probability(&self, index: u64) -> f64;

    /// Sum of [`ProbabilityMap::probability`] over all assignments.
    fn total_probability(&self) -> f64;
}

/// Dense probability vector over all `2^n` assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    n: usize,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << n {
            return Err(input_err!(
                "distribution over {n} bits needs {} entries, got {}",
                1usize << n,
                probs.len()
            ));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(input_err!("distribution entries must be finite and non-negative"));
        }
        Ok(Self { n, probs })
    }

    pub fn point_mass(n: usize, index: u64) -> Self {
        let mut probs = vec![0.0; 1usize << n];
        probs[index as usize] = 1.0;
        Self { n, probs }
    }

    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        Self {
            n,
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn n_bits(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Entries with probability above `threshold`, ascending by index.
    pub fn support(&self, threshold: f64) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(move |(_, p)| **p > threshold)
            .map(|(k, p)| (k as u64, *p))
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

impl ProbabilityMap for Distribution {
    fn n_bits(&self) -> usize {
        self.n
    }

    fn probability(&self, index: u64) -> f64 {
        self.probs.get(index as usize).copied().unwrap_or(0.0)
    }

    fn total_probability(&self) -> f64 {
        self.sum()
    }
}

/// Measurement counts from a finite number of shots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotHistogram {
    pub n_bits: usize,
    pub shots: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl ShotHistogram {
    pub fn from_counts(n_bits: usize, counts: BTreeMap<u64, u64>) -> Result<Self> {
        let shots: u64 = counts.values().sum();
        if shots == 0 {
            return Err(input_err!("histogram has no shots"));
        }
        if let Some(k) = counts.keys().find(|&&k| n_bits < 64 && k >> n_bits != 0) {
            return Err(input_err!("outcome {k} does not fit in {n_bits} bits"));
        }
        Ok(Self {
            n_bits,
            shots,
            counts,
        })
    }

    /// Counts divided by the number of shots.
    pub fn to_distribution(&self) -> Distribution {
        let mut probs = vec![0.0; 1usize << self.n_bits];
        for (&k, &c) in &self.counts {
            probs[k as usize] = c as f64 / self.shots as f64;
        }
        Distribution {
            n: self.n_bits,
            probs,
        }
    }

    pub fn count(&self, index: u64) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }
}

impl ProbabilityMap for ShotHistogram {
    fn n_bits(&self) -> usize {
        self.n_bits
    }

    fn probability(&self, index: u64) -> f64 {
        self.count(index) as f64 / self.shots as f64
    }

    fn total_probability(&self) -> f64 {
        1.0
    }
}

/// Probability mass on all maximum-cut assignments (P(GS)).
pub fn ground_state_probability<P: ProbabilityMap + ?Sized>(
    distribution: &P,
    oracle: &OracleResult,
) -> Result<f64> {
    let n = oracle.n_vertices();
    if distribution.n_bits() != n {
        return Err(input_err!(
            "distribution over {} bits but oracle over {n} vertices",
            distribution.n_bits()
        ));
    }
    let total = distribution.total_probability();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(input_err!("distribution sums to {total}, expected 1"));
    }
    Ok(oracle
        .optimal_assignments
        .iter()
        .map(|a| distribution.probability(a.index()))
        .sum())
}

/// Expected number of repetitions to observe the solution with 99% certainty:
/// `log(0.01) / log(1 - p_gs)`.
///
/// `p_gs = 0` yields `+inf`. `p_gs = 1` is rejected because the expression is
/// singular there, as are values outside `[0, 1]`.
pub fn step_to_solution(p_gs: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_gs) || p_gs.is_nan() {
        return Err(Error::Domain(format!("P(GS) = {p_gs} is not a probability")));
    }
    if p_gs == 1.0 {
        return Err(Error::Domain("step-to-solution is singular at P(GS) = 1".into()));
    }
    if p_gs == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(0.01f64.ln() / (-p_gs).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{brute_force_maxcut, WeightedGraph};

    fn edge_oracle() -> OracleResult {
        brute_force_maxcut(&WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap()).unwrap()
    }

    #[test]
    fn p_gs_examples() {
        let oracle = edge_oracle();
        // index 1 = "10", index 2 = "01"
        let d = Distribution::new(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert_eq!(ground_state_probability(&d, &oracle).unwrap(), 1.0);
        let d = Distribution::point_mass(2, 0b11);
        assert_eq!(ground_state_probability(&d, &oracle).unwrap(), 0.0);
        let h = ShotHistogram::from_counts(2, BTreeMap::from([(0b10, 639), (0b00, 361)])).unwrap();
        assert!((ground_state_probability(&h, &oracle).unwrap() - 0.639).abs() < 1e-15);
    }

    #[test]
    fn p_gs_rejects_bad_inputs() {
        let oracle = edge_oracle();
        let d = Distribution::uniform(3);
        assert!(matches!(ground_state_probability(&d, &oracle), Err(Error::Input(_))));
        let d = Distribution::new(2, vec![0.5, 0.5, 0.5, 0.0]).unwrap();
        assert!(matches!(ground_state_probability(&d, &oracle), Err(Error::Input(_))));
    }

    #[test]
    fn step_to_solution_examples() {
        assert!((step_to_solution(0.99).unwrap() - 1.0).abs() < 1e-12);
        assert!((step_to_solution(0.5).unwrap() - 6.643856189774724).abs() < 1e-12);
        assert!((step_to_solution(0.9).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(step_to_solution(0.0).unwrap(), f64::INFINITY);
        assert!(matches!(step_to_solution(1.0), Err(Error::Domain(_))));
        assert!(matches!(step_to_solution(-0.1), Err(Error::Domain(_))));
        assert!(matches!(step_to_solution(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn histogram_normalizes_by_shots() {
        let h = ShotHistogram::from_counts(1, BTreeMap::from([(0, 3), (1, 1)])).unwrap();
        assert_eq!(h.to_distribution().as_slice(), &[0.75, 0.25]);
        assert!(ShotHistogram::from_counts(1, BTreeMap::from([(2, 1)])).is_err());
    }
}
